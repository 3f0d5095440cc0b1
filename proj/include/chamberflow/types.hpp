#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chamberflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Numerical thresholds shared by every module. Callers may pass their own copy.
struct Config {
  double tol_det = 1e-9;    // relative, det(g) = 1 check
  double tol_minor = 1e-10; // relative to max|g_ij|^k for the k-th leading minor
  double tol_recon = 1e-9;  // decomposition round trips
  double tol_id = 1e-8;     // cocycle/transition identities
  double tol_lox = 1e-6;    // relative separation of eigenvalue moduli

  static const Config& defaults();
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CHAMBERFLOW_ERROR(Name)                   \
  class Name : public Error {                     \
   public:                                        \
    explicit Name(const std::string& what)        \
        : Error(std::string(#Name ": ") + what) {} \
  }

CHAMBERFLOW_ERROR(InvalidInput);
CHAMBERFLOW_ERROR(NonInvertible);
CHAMBERFLOW_ERROR(NotInBigCell);
CHAMBERFLOW_ERROR(NotTransverse);
CHAMBERFLOW_ERROR(OutOfDomain);
CHAMBERFLOW_ERROR(NotLoxodromic);
CHAMBERFLOW_ERROR(HypothesisViolated);
CHAMBERFLOW_ERROR(CannotCertify);
CHAMBERFLOW_ERROR(NotGeneric);
CHAMBERFLOW_ERROR(BudgetExceeded);
CHAMBERFLOW_ERROR(NeedLargerN);
CHAMBERFLOW_ERROR(NotDenseAtBudget);

#undef CHAMBERFLOW_ERROR

// Element of SL(n,R).
class GroupElement {
 public:
  explicit GroupElement(Mat m, const Config& cfg = Config::defaults());

  static GroupElement identity(int n);
  // Skips the determinant check; for products of elements already known to lie in SL(n,R).
  static GroupElement trusted(Mat m);
  // Rescales an invertible matrix to |det| = 1 and flips the first row if det < 0.
  static GroupElement projected(Mat m);

  const Mat& matrix() const { return m_; }
  int n() const { return static_cast<int>(m_.rows()); }
  Mat inverse_matrix() const;
  GroupElement inverse() const;

  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);

 private:
  struct TrustedTag {};
  GroupElement(Mat m, TrustedTag) : m_(std::move(m)) {}
  Mat m_;
};

// Element of the Cartan subspace: log-diagonal coordinates summing to zero.
class CartanVector {
 public:
  CartanVector() = default;
  explicit CartanVector(Vec coords);  // validates the zero sum
  // Removes the (rounding-size) mean so that the sum is exactly representable as zero.
  static CartanVector recentered(const Vec& coords);
  static CartanVector zero(int n) { return CartanVector(Vec::Zero(n)); }

  const Vec& coords() const { return c_; }
  int n() const { return static_cast<int>(c_.size()); }
  double operator[](int i) const { return c_[i]; }

  bool in_chamber_plus(double tol = 0.0) const;
  // Smallest consecutive difference c_i - c_{i+1}.
  double min_gap() const;

  CartanVector operator+(const CartanVector& o) const { return CartanVector(c_ + o.c_, 0); }
  CartanVector operator-(const CartanVector& o) const { return CartanVector(c_ - o.c_, 0); }
  CartanVector operator-() const { return CartanVector(-c_, 0); }
  CartanVector operator*(double s) const { return CartanVector(c_ * s, 0); }

 private:
  CartanVector(Vec c, int) : c_(std::move(c)) {}
  Vec c_;
};

// Element of M: diagonal signs with product +1.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::vector<int> signs);
  static SignVector identity(int n) { return SignVector(std::vector<int>(n, 1)); }

  const std::vector<int>& signs() const { return s_; }
  int n() const { return static_cast<int>(s_.size()); }
  int operator[](int i) const { return s_[i]; }
  bool is_identity() const;
  // Bit i set iff sign i is -1.
  std::uint64_t mask() const;

  SignVector operator*(const SignVector& o) const;
  bool operator==(const SignVector& o) const { return s_ == o.s_; }
  bool operator!=(const SignVector& o) const { return s_ != o.s_; }

 private:
  std::vector<int> s_;
};

// Element of AM = diag(m) * exp(diag(a)). The group is abelian for SL(n,R).
struct AMElement {
  CartanVector a;
  SignVector m;

  static AMElement identity(int n) { return {CartanVector::zero(n), SignVector::identity(n)}; }
  // Reads an invertible diagonal (product of signs must be +1).
  static AMElement from_diagonal(const Vec& d);

  int n() const { return a.n(); }
  AMElement operator*(const AMElement& o) const { return {a + o.a, m * o.m}; }
  AMElement inverse() const { return {-a, m}; }
  AMElement pow(int k) const;
  Mat matrix() const;
};

// Euclidean distance of A-parts; +inf when the M-parts differ (M is discrete).
double am_distance(const AMElement& x, const AMElement& y);

}  // namespace chamberflow
