#include "chamberflow/flags.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace chamberflow {

namespace {

Mat canonicalize(Mat rep) {
  const int n = static_cast<int>(rep.rows());
  for (int j = 0; j + 1 < n; ++j) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(rep(i, j)) > std::abs(rep(best, j))) best = i;
    if (rep(best, j) < 0) rep.col(j) *= -1.0;
  }
  if (rep.determinant() < 0) rep.col(n - 1) *= -1.0;
  return rep;
}

}  // namespace

Flag Flag::from_rep(const Mat& rep) {
  if (rep.rows() != rep.cols() || rep.rows() < 2) throw InvalidInput("flag representative must be square");
  if (!rep.allFinite()) throw InvalidInput("non-finite flag representative");
  const Mat id = Mat::Identity(rep.rows(), rep.cols());
  if ((rep.transpose() * rep - id).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidInput("flag representative is not orthogonal");
  return Flag(canonicalize(rep));
}

Flag Flag::from_columns(const Mat& m) {
  Mat q, r;
  qr_positive(m, q, r);
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < r.rows(); ++i)
    if (!(r(i, i) > 1e-15 * scale)) throw NonInvertible("columns do not span a full flag");
  return Flag(canonicalize(std::move(q)));
}

Flag standard_flag(int n) { return Flag::from_rep(Mat::Identity(n, n)); }

Flag opposite_flag(int n) { return Flag::from_rep(k_iota(n)); }

Flag flag_of(const GroupElement& g) { return Flag::from_columns(g.matrix()); }

Flag act(const Factored& g, const Flag& xi) {
  if (g.n() != xi.n()) throw InvalidInput("dimension mismatch in action");
  return Flag::from_rep(qr_chain(g, xi.rep()).q);
}

namespace {

// Per-column costs for keeping (+) or flipping (-) a column; M requires an even number of flips.
std::vector<int> best_signs(const Flag& xi, const Flag& eta, double* dist2) {
  const Mat& a = xi.rep();
  const Mat& b = eta.rep();
  const int n = xi.n();
  // best[p] = min cost with flip parity p, path kept for reconstruction.
  std::vector<std::array<double, 2>> cost(n + 1);
  std::vector<std::array<int, 2>> choice(n + 1);
  cost[0] = {0.0, std::numeric_limits<double>::infinity()};
  for (int j = 0; j < n; ++j) {
    const double keep = (a.col(j) - b.col(j)).squaredNorm();
    const double flip = (a.col(j) + b.col(j)).squaredNorm();
    for (int p = 0; p < 2; ++p) {
      const double via_keep = cost[j][p] + keep;
      const double via_flip = cost[j][1 - p] + flip;
      if (via_keep <= via_flip) {
        cost[j + 1][p] = via_keep;
        choice[j + 1][p] = 0;
      } else {
        cost[j + 1][p] = via_flip;
        choice[j + 1][p] = 1;
      }
    }
  }
  std::vector<int> signs(n, 1);
  int p = 0;
  for (int j = n; j >= 1; --j) {
    if (choice[j][p] == 1) {
      signs[j - 1] = -1;
      p = 1 - p;
    }
  }
  if (dist2) *dist2 = cost[n][0];
  return signs;
}

}  // namespace

double flag_distance(const Flag& xi, const Flag& eta) {
  if (xi.n() != eta.n()) throw InvalidInput("dimension mismatch in flag distance");
  double d2 = 0.0;
  best_signs(xi, eta, &d2);
  return std::sqrt(std::max(d2, 0.0));
}

std::vector<int> flag_distance_argmin(const Flag& xi, const Flag& eta) { return best_signs(xi, eta, nullptr); }

Mat comparison_matrix(const Flag& xi, const Flag& xi_check) {
  if (xi.n() != xi_check.n()) throw InvalidInput("dimension mismatch in comparison matrix");
  return k_iota(xi.n()) * xi_check.rep().transpose() * xi.rep();
}

bool is_transverse(const Flag& xi, const Flag& xi_check, const Config& cfg) {
  for (double m : relative_leading_minors(comparison_matrix(xi, xi_check)))
    if (!(std::abs(m) >= cfg.tol_minor)) return false;
  return true;
}

double cell_margin(const Flag& xi, const Flag& xi_check) {
  const int n = xi.n();
  if (xi_check.n() != n) throw InvalidInput("dimension mismatch in cell margin");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) {
    // Columns n-i..n-1 of rep(xi_check) span the orthogonal complement of its (n-i)-space.
    const Mat block = xi_check.rep().rightCols(i).transpose() * xi.rep().leftCols(i);
    Eigen::JacobiSVD<Mat> svd(block);
    const double s = std::clamp(svd.singularValues()(i - 1), 0.0, 1.0);  // sin of smallest angle
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    best = std::min(best, 2.0 * std::sqrt(s * s / (1.0 + c)));
  }
  return best;
}

namespace {

std::vector<int> minor_signs(const Mat& c) {
  std::vector<int> s;
  for (double m : relative_leading_minors(c)) s.push_back(m > 0 ? 1 : (m < 0 ? -1 : 0));
  return s;
}

}  // namespace

double cell_margin_sampled(const Flag& xi, const Flag& xi_check, int mesh) {
  const int n = xi.n();
  const Mat left = k_iota(n) * xi_check.rep().transpose();
  const std::vector<int> s0 = minor_signs(left * xi.rep());
  for (int v : s0)
    if (v == 0) return 0.0;
  Rng rng(0x5eed5eedULL);
  const double step = 0.01;
  const double t_max = 2.0 * std::sqrt(2.0) * M_PI;
  double best = std::numeric_limits<double>::infinity();
  for (int d = 0; d < mesh; ++d) {
    Mat x = (n == 2) ? Mat(Mat::Zero(2, 2)) : random_skew_unit(n, rng);
    if (n == 2) {
      const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      x(1, 0) = sgn / std::sqrt(2.0);
      x(0, 1) = -sgn / std::sqrt(2.0);
    }
    auto changed = [&](double t) { return minor_signs(left * skew_exp(t * x) * xi.rep()) != s0; };
    const Mat e = skew_exp(step * x);
    Mat cur = xi.rep();
    double lo = 0.0;
    double hi = -1.0;
    for (int k = 1; k * step <= t_max; ++k) {
      cur = e * cur;
      if (minor_signs(left * cur) != s0) {
        hi = k * step;
        break;
      }
      lo = k * step;
    }
    if (hi < 0) continue;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (changed(mid) ? hi : lo) = mid;
    }
    const Flag zeta = Flag::from_rep(skew_exp(hi * x) * xi.rep());
    best = std::min(best, flag_distance(xi, zeta));
  }
  return best;
}

std::vector<Flag> permutation_flags(int n) {
  std::vector<int> w(n);
  std::iota(w.begin(), w.end(), 0);
  const Mat ki = k_iota(n);
  std::vector<Flag> out;
  do {
    Mat p = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) p(w[j], j) = 1.0;
    out.push_back(Flag::from_columns(p * ki));
  } while (std::next_permutation(w.begin(), w.end()));
  return out;
}

Mat random_rotation(int n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
  Mat q, r;
  qr_positive(g, q, r);
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

Mat random_skew_unit(int n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat x = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      x(i, j) = nd(rng);
      x(j, i) = -x(i, j);
    }
  return x / x.norm();
}

Flag random_flag(int n, Rng& rng) { return Flag::from_rep(random_rotation(n, rng)); }

Mat rotation_at_distance(const Mat& x, double rho) {
  const int n = static_cast<int>(x.rows());
  const Mat id = Mat::Identity(n, n);
  if (rho <= 0) return id;
  auto dist = [&](double t) { return (id - skew_exp(t * x)).norm(); };
  double lo = 0.0;
  double hi = rho;
  int guard = 0;
  while (dist(hi) < rho) {
    lo = hi;
    hi *= 1.25;
    if (++guard > 60) throw InvalidInput("rotation distance out of reach");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) < rho ? lo : hi) = mid;
  }
  return skew_exp(hi * x);
}

Mat plane_rotation_at_distance(int n, double rho, Rng& rng) {
  if (rho < 0 || rho > 2.0 * std::sqrt(2.0)) throw InvalidInput("plane rotation distance out of range");
  const Mat q = random_rotation(n, rng);
  const Vec u = q.col(0);
  const Vec v = q.col(1);
  const double phi = 2.0 * std::asin(rho / (2.0 * std::sqrt(2.0)));
  return Mat::Identity(n, n) + std::sin(phi) * (v * u.transpose() - u * v.transpose()) +
         (std::cos(phi) - 1.0) * (u * u.transpose() + v * v.transpose());
}

}  // namespace chamberflow
