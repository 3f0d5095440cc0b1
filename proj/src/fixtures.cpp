#include "chamberflow/fixtures.hpp"

#include <cmath>

namespace chamberflow {

GroupElement diagonal_element(const std::vector<double>& d) {
  Vec v(static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) v[static_cast<int>(i)] = d[i];
  return GroupElement(Mat(v.asDiagonal()));
}

GroupElement conjugated(const GroupElement& g, const Mat& c) {
  return GroupElement::trusted(c * g.matrix() * c.transpose());
}

std::vector<GroupElement> spread_conjugates(const std::vector<GroupElement>& cores, std::uint64_t seed, int trials) {
  const int n = cores.front().n();
  Rng rng(seed);
  std::vector<Mat> best;
  double best_margin = -1.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<Mat> cs;
    for (std::size_t i = 0; i < cores.size(); ++i) cs.push_back(random_rotation(n, rng));
    double m = INFINITY;
    for (const auto& a : cs)
      for (const auto& b : cs)
        m = std::min(m, cell_margin(Flag::from_rep(a), Flag::from_rep(b * k_iota(n))));
    if (m > best_margin) {
      best_margin = m;
      best = cs;
    }
  }
  std::vector<GroupElement> out;
  for (std::size_t i = 0; i < cores.size(); ++i) out.push_back(conjugated(cores[i], best[i]));
  return out;
}

namespace {

Mat rotation2(double t) {
  Mat r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

}  // namespace

std::vector<GroupElement> sl2_pair() {
  const GroupElement a = diagonal_element({9.0, 1.0 / 9.0});
  return {a, conjugated(a, rotation2(M_PI / 4))};
}

std::vector<GroupElement> sl2_negative_pair() {
  const GroupElement a = diagonal_element({9.0, 1.0 / 9.0});
  const GroupElement b = diagonal_element({-9.0, -1.0 / 9.0});
  return {a, conjugated(b, rotation2(M_PI / 4))};
}

std::vector<GroupElement> sl2_irrational_pair() {
  const double t = std::exp(std::sqrt(5.0));
  return {diagonal_element({9.0, 1.0 / 9.0}), conjugated(diagonal_element({t, 1.0 / t}), rotation2(M_PI / 4))};
}

std::vector<GroupElement> sl3_triple() {
  return spread_conjugates({diagonal_element({4.0, 1.0, 0.25}), diagonal_element({-4.0, -1.0, 0.25}),
                            diagonal_element({4.0, 1.0, 0.25})},
                           0x7431, 400);
}

std::vector<GroupElement> sl3_sign_family() {
  return spread_conjugates({diagonal_element({-4.0, -1.0, 0.25}), diagonal_element({4.0, -1.0, -0.25}),
                            diagonal_element({4.0, 1.0, 0.25})},
                           0x5162, 400);
}

std::vector<GroupElement> sl3_cone_family() {
  return spread_conjugates({diagonal_element({4.0, 1.0, 0.25}), diagonal_element({std::exp(2.0), std::exp(-0.5), std::exp(-1.5)}),
                            diagonal_element({std::exp(1.5), std::exp(0.5), std::exp(-2.0)})},
                           0x3c0e, 400);
}

}  // namespace chamberflow
