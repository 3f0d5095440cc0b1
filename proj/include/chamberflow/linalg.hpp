#pragma once

#include "chamberflow/types.hpp"

#include <span>
#include <vector>

namespace chamberflow {

struct IwasawaTriple {
  Mat k;           // SO(n)
  CartanVector a;  // log of the positive diagonal
  Mat u;           // unit upper (KAN) or unit lower (KAN^-) triangular
};

struct CartanKAK {
  Mat k1;
  CartanVector a;  // non-increasing
  Mat k2;
};

struct BruhatLU {
  Mat u_minus;  // unit lower-triangular
  AMElement x;
  Mat u_plus;   // unit upper-triangular
};

IwasawaTriple iwasawa_kan(const GroupElement& g);
IwasawaTriple iwasawa_kan_minus(const GroupElement& g);
CartanKAK cartan_kak(const GroupElement& g);
CartanVector jordan_projection(const GroupElement& g);
BruhatLU bruhat_lu(const GroupElement& g, const Config& cfg = Config::defaults());

// Same factorization for any square matrix with det > 0 (comparison matrices, section values).
BruhatLU bruhat_lu_matrix(const Mat& g, const Config& cfg = Config::defaults());

// Leading principal minors, each divided by max|g_ij|^k; the big-cell test compares these with tol_minor.
std::vector<double> relative_leading_minors(const Mat& g);

// Householder QR with R forced to a positive diagonal; q may have det -1 if det(g) < 0.
void qr_positive(const Mat& g, Mat& q, Mat& r);

// Antidiagonal permutation with the (1,n) sign chosen so that det = +1.
Mat k_iota(int n);
// Plain antidiagonal permutation (involution), used for flips.
Mat reversal(int n);

Mat skew_exp(const Mat& x);

// A group element kept as an ordered list of factors f[0] f[1] ... f[L-1].
// Long products and high powers are never multiplied out when acting on flags or
// evaluating cocycles, so the lower singular directions keep full relative accuracy.
class Factored {
 public:
  Factored(const GroupElement& g);  // NOLINT(google-explicit-constructor)
  explicit Factored(std::vector<GroupElement> factors);
  static Factored power(const GroupElement& g, int p);

  const std::vector<GroupElement>& factors() const { return f_; }
  int n() const { return f_.front().n(); }
  Factored inverse() const;
  Factored pow(int p) const;
  // Multiplies the factors out; may be ill-conditioned for long products.
  GroupElement dense() const;

  friend Factored operator*(const Factored& a, const Factored& b);

 private:
  std::vector<GroupElement> f_;
};

// Iterated QR of g * start = q * R with R upper-triangular, positive diagonal; only
// log diag(R) is kept.
struct ChainQR {
  Mat q;
  Vec log_r;
};
ChainQR qr_chain(const Factored& g, const Mat& start);

}  // namespace chamberflow
