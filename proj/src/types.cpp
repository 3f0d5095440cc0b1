#include "chamberflow/types.hpp"

#include <cmath>
#include <limits>

namespace chamberflow {

const Config& Config::defaults() {
  static const Config cfg{};
  return cfg;
}

namespace {

double hadamard_scale(const Mat& m) {
  double s = 1.0;
  for (int j = 0; j < m.cols(); ++j) s *= std::max(m.col(j).norm(), 1e-300);
  return s;
}

}  // namespace

GroupElement::GroupElement(Mat m, const Config& cfg) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 2) throw InvalidInput("group element must be square with n >= 2");
  if (!m_.allFinite()) throw InvalidInput("non-finite matrix entry");
  const double det = m_.determinant();
  if (std::abs(det - 1.0) > cfg.tol_det * std::max(1.0, hadamard_scale(m_)))
    throw InvalidInput("determinant " + std::to_string(det) + " is not 1");
}

GroupElement GroupElement::identity(int n) { return GroupElement(Mat::Identity(n, n), TrustedTag{}); }

GroupElement GroupElement::trusted(Mat m) { return GroupElement(std::move(m), TrustedTag{}); }

GroupElement GroupElement::projected(Mat m) {
  if (m.rows() != m.cols() || m.rows() < 2) throw InvalidInput("matrix must be square with n >= 2");
  const double det = m.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-300) throw NonInvertible("cannot project a singular matrix to SL(n)");
  if (det < 0) m.row(0) *= -1.0;
  m /= std::pow(std::abs(det), 1.0 / static_cast<double>(m.rows()));
  return GroupElement(std::move(m), TrustedTag{});
}

Mat GroupElement::inverse_matrix() const { return m_.partialPivLu().inverse(); }

GroupElement GroupElement::inverse() const { return GroupElement(inverse_matrix(), TrustedTag{}); }

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (a.n() != b.n()) throw InvalidInput("dimension mismatch in product");
  return GroupElement(a.m_ * b.m_, GroupElement::TrustedTag{});
}

CartanVector::CartanVector(Vec coords) : c_(std::move(coords)) {
  const double scale = std::max(1.0, c_.cwiseAbs().maxCoeff());
  if (std::abs(c_.sum()) > 1e-10 * scale) throw InvalidInput("Cartan vector must sum to zero");
}

CartanVector CartanVector::recentered(const Vec& coords) {
  Vec c = coords.array() - coords.mean();
  return CartanVector(std::move(c), 0);
}

bool CartanVector::in_chamber_plus(double tol) const {
  for (int i = 0; i + 1 < c_.size(); ++i)
    if (c_[i] < c_[i + 1] - tol) return false;
  return true;
}

double CartanVector::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < c_.size(); ++i) g = std::min(g, c_[i] - c_[i + 1]);
  return g;
}

SignVector::SignVector(std::vector<int> signs) : s_(std::move(signs)) {
  int prod = 1;
  for (int s : s_) {
    if (s != 1 && s != -1) throw InvalidInput("sign entries must be +1 or -1");
    prod *= s;
  }
  if (prod != 1) throw InvalidInput("sign vector must have product +1");
}

bool SignVector::is_identity() const {
  for (int s : s_)
    if (s != 1) return false;
  return true;
}

std::uint64_t SignVector::mask() const {
  std::uint64_t b = 0;
  for (std::size_t i = 0; i < s_.size(); ++i)
    if (s_[i] < 0) b |= std::uint64_t{1} << i;
  return b;
}

SignVector SignVector::operator*(const SignVector& o) const {
  std::vector<int> r(s_.size());
  for (std::size_t i = 0; i < s_.size(); ++i) r[i] = s_[i] * o.s_[i];
  return SignVector(std::move(r));
}

AMElement AMElement::from_diagonal(const Vec& d) {
  Vec logs(d.size());
  std::vector<int> signs(d.size());
  for (int i = 0; i < d.size(); ++i) {
    if (!(std::abs(d[i]) > 0) || !std::isfinite(d[i])) throw NonInvertible("zero or non-finite diagonal entry");
    logs[i] = std::log(std::abs(d[i]));
    signs[i] = d[i] < 0 ? -1 : 1;
  }
  return {CartanVector::recentered(logs), SignVector(std::move(signs))};
}

AMElement AMElement::pow(int k) const {
  std::vector<int> s = m.signs();
  if (k % 2 == 0) std::fill(s.begin(), s.end(), 1);
  return {a * static_cast<double>(k), SignVector(std::move(s))};
}

Mat AMElement::matrix() const {
  Vec d(n());
  for (int i = 0; i < n(); ++i) d[i] = m[i] * std::exp(a[i]);
  return d.asDiagonal();
}

double am_distance(const AMElement& x, const AMElement& y) {
  if (x.m != y.m) return std::numeric_limits<double>::infinity();
  return (x.a.coords() - y.a.coords()).norm();
}

}  // namespace chamberflow
