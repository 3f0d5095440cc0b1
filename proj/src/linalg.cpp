#include "chamberflow/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace chamberflow {

void qr_positive(const Mat& g, Mat& q, Mat& r) {
  Eigen::HouseholderQR<Mat> qr(g);
  q = qr.householderQ();
  r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < r.rows(); ++i) {
    if (r(i, i) < 0) {
      r.row(i) *= -1.0;
      q.col(i) *= -1.0;
    }
  }
}

Mat k_iota(int n) {
  Mat k = reversal(n);
  if (k.determinant() < 0) k(0, n - 1) = -1.0;
  return k;
}

Mat reversal(int n) {
  Mat j = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) j(i, n - 1 - i) = 1.0;
  return j;
}

namespace {

void check_triangular_diag(const Mat& r, const Mat& g) {
  const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < r.rows(); ++i)
    if (!(r(i, i) > 1e-14 * scale)) throw NonInvertible("orthogonalization degenerated");
}

IwasawaTriple from_positive_triangular(Mat k, const Mat& r) {
  const int n = static_cast<int>(r.rows());
  Vec d = r.diagonal();
  Mat u = d.cwiseInverse().asDiagonal() * r;
  for (int i = 0; i < n; ++i) u(i, i) = 1.0;
  return {std::move(k), CartanVector::recentered(d.array().log().matrix()), std::move(u)};
}

}  // namespace

IwasawaTriple iwasawa_kan(const GroupElement& g) {
  Mat q, r;
  qr_positive(g.matrix(), q, r);
  check_triangular_diag(r, g.matrix());
  return from_positive_triangular(std::move(q), r);
}

IwasawaTriple iwasawa_kan_minus(const GroupElement& g) {
  const int n = g.n();
  const Mat j = reversal(n);
  Mat q, r;
  qr_positive(j * g.matrix() * j, q, r);
  check_triangular_diag(r, g.matrix());
  Mat l = j * r * j;
  return from_positive_triangular(j * q * j, l);
}

CartanKAK cartan_kak(const GroupElement& g) {
  Eigen::JacobiSVD<Mat> svd(g.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU();
  Mat v = svd.matrixV();
  if (u.determinant() < 0) {
    u.col(u.cols() - 1) *= -1.0;
    v.col(v.cols() - 1) *= -1.0;
  }
  Vec s = svd.singularValues();
  return {std::move(u), CartanVector::recentered(s.array().log().matrix()), v.transpose()};
}

CartanVector jordan_projection(const GroupElement& g) {
  Eigen::RealSchur<Mat> schur(g.matrix(), false);
  const Mat& t = schur.matrixT();
  const int n = g.n();
  Vec mod(n);
  for (int i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double m = std::sqrt(std::abs(t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i)));
      mod[i] = m;
      mod[i + 1] = m;
      i += 2;
    } else {
      mod[i] = std::abs(t(i, i));
      ++i;
    }
  }
  std::sort(mod.data(), mod.data() + mod.size(), std::greater<>());
  return CartanVector::recentered(mod.array().log().matrix());
}

namespace {

// Right-looking elimination without pivoting. Returns false at the first relative
// leading minor below tol (and leaves the outputs partially filled).
bool eliminate(const Mat& g, double tol, Mat& l, Mat& upper, std::vector<double>* rel_minors) {
  const int n = static_cast<int>(g.rows());
  const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  Mat a = g;
  l = Mat::Identity(n, n);
  double rel = 1.0;
  for (int k = 0; k < n; ++k) {
    const double pivot = a(k, k);
    rel *= pivot / scale;
    if (rel_minors) rel_minors->push_back(rel);
    if (!(std::abs(rel) >= tol) || pivot == 0.0) return false;
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / pivot;
      l(i, k) = f;
      a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
      a(i, k) = 0.0;
    }
  }
  upper = a.triangularView<Eigen::Upper>();
  return true;
}

}  // namespace

std::vector<double> relative_leading_minors(const Mat& g) {
  std::vector<double> out;
  Mat l, u;
  eliminate(g, 0.0, l, u, &out);
  out.resize(g.rows(), 0.0);
  return out;
}

BruhatLU bruhat_lu_matrix(const Mat& g, const Config& cfg) {
  Mat l, upper;
  if (!eliminate(g, cfg.tol_minor, l, upper, nullptr))
    throw NotInBigCell("a leading principal minor is below tol_minor");
  Vec d = upper.diagonal();
  Mat u = d.cwiseInverse().asDiagonal() * upper;
  for (int i = 0; i < u.rows(); ++i) u(i, i) = 1.0;
  return {std::move(l), AMElement::from_diagonal(d), std::move(u)};
}

BruhatLU bruhat_lu(const GroupElement& g, const Config& cfg) { return bruhat_lu_matrix(g.matrix(), cfg); }

Mat skew_exp(const Mat& x) {
  const double norm = x.norm();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.25) ++s;
  const Mat y = x / std::ldexp(1.0, s);
  const int n = static_cast<int>(x.rows());
  Mat term = Mat::Identity(n, n);
  Mat sum = term;
  for (int k = 1; k <= 14; ++k) {
    term = term * y / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

Factored::Factored(const GroupElement& g) : f_{g} {}

Factored::Factored(std::vector<GroupElement> factors) : f_(std::move(factors)) {
  if (f_.empty()) throw InvalidInput("factored element needs at least one factor");
}

Factored Factored::power(const GroupElement& g, int p) {
  if (p == 0) return Factored(GroupElement::identity(g.n()));
  const GroupElement base = p > 0 ? g : g.inverse();
  return Factored(std::vector<GroupElement>(static_cast<std::size_t>(std::abs(p)), base));
}

Factored Factored::inverse() const {
  std::vector<GroupElement> r;
  r.reserve(f_.size());
  for (auto it = f_.rbegin(); it != f_.rend(); ++it) r.push_back(it->inverse());
  return Factored(std::move(r));
}

Factored Factored::pow(int p) const {
  if (p == 0) return Factored(GroupElement::identity(n()));
  const Factored base = p > 0 ? *this : inverse();
  std::vector<GroupElement> r;
  for (int i = 0; i < std::abs(p); ++i) r.insert(r.end(), base.f_.begin(), base.f_.end());
  return Factored(std::move(r));
}

GroupElement Factored::dense() const {
  Mat m = f_.front().matrix();
  for (std::size_t i = 1; i < f_.size(); ++i) m = m * f_[i].matrix();
  return GroupElement::trusted(std::move(m));
}

Factored operator*(const Factored& a, const Factored& b) {
  std::vector<GroupElement> r = a.f_;
  r.insert(r.end(), b.f_.begin(), b.f_.end());
  return Factored(std::move(r));
}

ChainQR qr_chain(const Factored& g, const Mat& start) {
  Mat q, r;
  qr_positive(start, q, r);
  Vec log_r = r.diagonal().array().log().matrix();
  const auto& f = g.factors();
  for (auto it = f.rbegin(); it != f.rend(); ++it) {
    qr_positive(it->matrix() * q, q, r);
    log_r += r.diagonal().array().log().matrix();
  }
  return {std::move(q), std::move(log_r)};
}

}  // namespace chamberflow
