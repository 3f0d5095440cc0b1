#pragma once

#include "chamberflow/linalg.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace chamberflow {

// Full flag in R^n, stored as a canonical SO(n) frame (nested column spans).
class Flag {
 public:
  Flag() = default;
  // Orthonormalizes nothing: rep must already be orthogonal. Canonicalizes the signs.
  static Flag from_rep(const Mat& rep);
  // Flag spanned by the columns of an invertible matrix, in order.
  static Flag from_columns(const Mat& m);

  const Mat& rep() const { return rep_; }
  int n() const { return static_cast<int>(rep_.rows()); }
  bool canonical() const { return true; }
  bool operator==(const Flag& o) const { return rep_ == o.rep_; }

 private:
  explicit Flag(Mat rep) : rep_(std::move(rep)) {}
  Mat rep_;
};

Flag standard_flag(int n);  // eta_0
Flag opposite_flag(int n);  // k_iota eta_0

Flag flag_of(const GroupElement& g);
Flag act(const Factored& g, const Flag& xi);

// min over m in M of ||rep(xi) - rep(eta) m||_F.
double flag_distance(const Flag& xi, const Flag& eta);
// The sign choice in M realizing flag_distance.
std::vector<int> flag_distance_argmin(const Flag& xi, const Flag& eta);

// (rep(xi_check) k_iota^{-1})^{-1} rep(xi).
Mat comparison_matrix(const Flag& xi, const Flag& xi_check);
bool is_transverse(const Flag& xi, const Flag& xi_check, const Config& cfg = Config::defaults());

// Distance from xi to the complement of the cell of flags transverse to xi_check.
// Exact: for each i the nearest non-transverse flag is reached by the plane rotation
// closing the smallest principal angle psi_i between span(xi)_i and span(xi_check)_{n-i},
// at chordal cost 2 sqrt(1 - cos psi_i). Returns 0 on the boundary.
double cell_margin(const Flag& xi, const Flag& xi_check);

// Geodesic bisection estimate: walks t -> exp(tX) xi for `mesh` unit directions X in so(n)
// until a leading minor of the comparison matrix changes sign, and returns the smallest
// chordal distance found. Each value is attained by a boundary flag, so this is an upper
// estimate; nested meshes make it non-increasing under refinement.
double cell_margin_sampled(const Flag& xi, const Flag& xi_check, int mesh);

// Permutation flags k_w eta_check_0 for all w in S_n, in lexicographic order of w.
std::vector<Flag> permutation_flags(int n);

// Random sampling helpers (Haar on SO(n) via QR of a Gaussian matrix).
using Rng = std::mt19937_64;
Mat random_rotation(int n, Rng& rng);
Mat random_skew_unit(int n, Rng& rng);  // Frobenius norm 1
Flag random_flag(int n, Rng& rng);
// Rotation exp(tX) with ||I - exp(tX)||_F = rho (X skew with norm 1, rho below 2).
Mat rotation_at_distance(const Mat& x, double rho);
// Rotation in a random coordinate-free 2-plane with ||I - R||_F = rho (closed form, rho <= 2 sqrt 2).
Mat plane_rotation_at_distance(int n, double rho, Rng& rng);

}  // namespace chamberflow
