#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"

#include "chamberflow/fixtures.hpp"
#include "chamberflow/schottky.hpp"

#include <set>

using namespace chamberflow;

namespace {

const double kR = 0.15, kEps = 0.05;

// Smallest p with diag(t^p, t^-p) (r, eps)-loxodromic, from the Moebius action on RP1.
int moebius_power(double t, double eps) {
  const double theta = M_PI / 2 - 2.0 * std::asin(eps / (2.0 * std::sqrt(2.0)));
  for (int p = 1;; ++p) {
    const double tp = std::pow(t, p);
    const double image = oracle::line_distance(oracle::moebius_angle(tp, theta), 0.0);
    const double c = std::cos(theta), s = std::sin(theta);
    const double slope = (1.0 / (tp * tp)) / (c * c + s * s / std::pow(tp, 4));
    if (image < eps && slope <= eps) return p;
  }
}

Word random_word(int q, int max_len, std::mt19937_64& rng) {
  Word w(1 + rng() % max_len);
  for (int& x : w) x = static_cast<int>(rng() % q);
  return w;
}

double interval_lo(const ConeEstimate& c) {
  double lo = INFINITY;
  for (const auto& h : c.hull) lo = std::min(lo, cone_section_coords(h)[0]);
  return lo;
}
double interval_hi(const ConeEstimate& c) {
  double hi = -INFINITY;
  for (const auto& h : c.hull) hi = std::max(hi, cone_section_coords(h)[0]);
  return hi;
}

}  // namespace

TEST_CASE("build: SL(2) pair against the Moebius oracle") {
  const auto fam = build_schottky(sl2_pair(), kR, kEps, 16);
  const int p = moebius_power(9.0, kEps);
  CHECK(p == 3);
  CHECK(fam.powers == std::vector<int>{p, p});
  CHECK(fam.pairwise_margins.minCoeff() >= 6 * kR);
  CHECK(std::abs(fam.pairwise_margins(0, 1) - 2.0 * std::sqrt(2.0) * std::sin(M_PI / 8)) < 1e-12);
  CHECK(std::abs(fam.pairwise_margins(0, 0) - 2.0) < 1e-12);
  for (const auto& c : fam.certificates) CHECK(c.max_image_distance < kEps);
}

TEST_CASE("build: errors") {
  const auto a = diagonal_element({9.0, 1.0 / 9.0});
  CHECK_THROWS_AS(build_schottky({a, diagonal_element({0.25, 4.0})}, kR, kEps, 16), NotGeneric);
  // Axes 45 degrees apart cannot meet the 6r margin at r = 0.2.
  CHECK_THROWS_AS(build_schottky(sl2_pair(), 0.2, kEps, 16), CannotCertify);
  CHECK_THROWS_AS(build_schottky({a}, kR, kEps, 2), CannotCertify);
}

TEST_CASE("build: SL(3) conjugates of diag(4, 1, 1/4)") {
  const auto core = diagonal_element({4.0, 1.0, 0.25});
  const auto fam = build_schottky(spread_conjugates({core, core, core}, 11, 300), kR, kEps, 32);
  CHECK(fam.size() == 3);
  CHECK(fam.pairwise_margins.minCoeff() >= 6 * kR);
  for (int i = 0; i < 3; ++i) {
    CHECK(fam.powers[i] >= 1);
    CHECK(fam.certificates[i].lipschitz_bound <= kEps);
  }
}

TEST_CASE("words: exterior-power Jordan data against the factored classification") {
  const auto fam = build_schottky(sl3_triple(), kR, kEps, 32);
  const auto words = enumerate_words(fam, 5);
  CHECK(words.size() == 3 + 9 + 27 + 81 + 243);
  CHECK(words[0].word == Word{0});
  CHECK(words[3].word == Word{0, 0});
  CHECK(words[4].word == Word{0, 1});
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto& rec = words[rng() % words.size()];
    REQUIRE(rec.loxodromic);
    const auto l = classify_product(word_element(fam, rec.word));
    CHECK((l.lambda - rec.lambda).coords().norm() < 1e-8 * rec.lambda.coords().norm());
    CHECK(l.signs == rec.signs);
  }
  CHECK_THROWS_AS(enumerate_words(fam, 5, 300), BudgetExceeded);
  // Thread count does not change the enumeration.
  const auto serial = enumerate_words(fam, 4, 200000, 1);
  const auto par = enumerate_words(fam, 4, 200000, 4);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].lambda.coords() == par[i].lambda.coords());
}

TEST_CASE("Schottky products stay loxodromic with flags in the predicted balls") {
  const auto fam = build_schottky(sl3_triple(), kR, kEps, 32);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Word w = random_word(fam.size(), 5, rng);
    const auto l = classify_product(word_element(fam, w));
    CHECK(flag_distance(l.attracting, fam.generators[w.front()].attracting) < kEps);
    CHECK(flag_distance(l.repelling, fam.generators[w.back()].repelling) < kEps);
  }
}

TEST_CASE("limit cone") {
  const auto single = build_schottky({diagonal_element({4.0, 1.0, 0.25})}, kR, kEps, 32);
  const auto c1 = limit_cone(single, 4);
  REQUIRE(c1.hull.size() == 1);
  const Vec expect = single.generators[0].lambda.coords().normalized();
  CHECK((c1.hull[0].coords() - expect).norm() < 1e-9);
  for (const auto& r : c1.rays) CHECK((r.coords() - expect).norm() < 1e-9);

  const auto pair = build_schottky(sl2_pair(), kR, kEps, 16);
  const auto c2 = limit_cone(pair, 6);
  REQUIRE(c2.hull.size() == 1);
  CHECK(std::abs(c2.hull[0][0] - 1.0 / std::sqrt(2.0)) < 1e-12);

  const auto fam = build_schottky(sl3_cone_family(), kR, kEps, 32);
  double prev_lo = INFINITY, prev_hi = -INFINITY;
  for (int len = 4; len <= 6; ++len) {
    const auto c = limit_cone(fam, len);
    REQUIRE(c.hull.size() == 2);
    CHECK(c.containment_residual < 1e-9);
    for (int i = 0; i < fam.size(); ++i) {
      const double x = cone_section_coords(fam.generators[i].lambda)[0];
      CHECK(x >= interval_lo(c) - 1e-9);
      CHECK(x <= interval_hi(c) + 1e-9);
    }
    CHECK(interval_lo(c) <= prev_lo + 1e-12);
    CHECK(interval_hi(c) >= prev_hi - 1e-12);
    prev_lo = interval_lo(c);
    prev_hi = interval_hi(c);
  }
  const auto c = limit_cone(fam, 5);
  const CartanVector mid = CartanVector::recentered(c.hull[0].coords() + c.hull[1].coords());
  CHECK(cone_interior(c, mid));
  CHECK_FALSE(cone_interior(c, c.hull[0]));
  CHECK_FALSE(cone_interior(c, CartanVector::recentered(2.0 * c.hull[0].coords() - c.hull[1].coords())));
}

TEST_CASE("limit cone in SL(4): polygonal cross-section") {
  const auto fam = build_schottky(spread_conjugates({diagonal_element({8.0, 2.0, 0.5, 0.125}),
                                                     diagonal_element({std::exp(2.5), std::exp(0.2), std::exp(-0.4), std::exp(-2.3)}),
                                                     diagonal_element({std::exp(1.8), std::exp(0.9), std::exp(-0.6), std::exp(-2.1)})},
                                                    21, 300),
                                  kR, kEps, 32);
  const auto c = limit_cone(fam, 4);
  CHECK(c.hull_supported);
  CHECK(c.hull.size() >= 3);
  CHECK(c.containment_residual < 1e-9);
  Vec sum = Vec::Zero(4);
  for (const auto& h : c.hull) sum += h.coords();
  CHECK(cone_interior(c, CartanVector::recentered(sum)));
}

TEST_CASE("sign group") {
  const auto pos = sign_group(build_schottky(sl2_pair(), kR, kEps, 16), 6);
  CHECK(pos.p == 0);
  CHECK(pos.order == 1);
  CHECK(pos.all_positive);

  const auto negfam = build_schottky(sl2_negative_pair(), kR, kEps, 16);
  const auto neg = sign_group(negfam, 6);
  CHECK(neg.p == 1);
  CHECK(neg.order == 2);
  REQUIRE(neg.witnesses.size() == 1);
  CHECK(classify_product(word_element(negfam, neg.witnesses[0])).signs == neg.basis[0]);

  const auto fam = build_schottky(sl3_sign_family(), kR, kEps, 32);
  for (int len : {3, 5}) {
    const auto a = sign_group(fam, len);
    const auto b = sign_group(fam, len + 2);
    CHECK(a.order == b.order);
  }
  const auto rep = sign_group(fam, 4);
  CHECK(rep.p == 2);
  CHECK(rep.order == 4);
  CHECK(rep.basis[0] != rep.basis[1]);
  CHECK(!(rep.basis[0] * rep.basis[1]).is_identity());
}

TEST_CASE("label transport") {
  for (const auto& seeds : {sl2_pair(), sl3_triple(), sl3_cone_family()}) {
    const auto fam = build_schottky(seeds, kR, kEps, 32);
    const auto rep = sign_group(fam, 4);
    const int n = fam.n();
    const BHCoordinates start{fam.generators[0].attracting, opposite_flag(n), AMElement::identity(n),
                              transport_section(fam)};
    CHECK(component_label_transport({}, fam, start, rep) == 0);
    for (int i = 0; i < fam.size(); ++i)
      CHECK(component_label_transport({i}, fam, start, rep) == coset_index(rep, fam.generators[i].signs));
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      const Word a = random_word(fam.size(), 4, rng), b = random_word(fam.size(), 4, rng);
      Word ab = a;
      ab.insert(ab.end(), b.begin(), b.end());
      CHECK(component_label_transport(ab, fam, start, rep) ==
            (component_label_transport(a, fam, start, rep) ^ component_label_transport(b, fam, start, rep)));
    }
    // Right translation of the start by m shifts every label by [m].
    std::vector<int> mv(n, 1);
    mv[0] = mv[n - 1] = -1;
    const SignVector m(mv);
    BHCoordinates shifted = start;
    shifted.x = start.x * AMElement{CartanVector::zero(n), m};
    for (int trial = 0; trial < 20; ++trial) {
      const Word w = random_word(fam.size(), 5, rng);
      CHECK(component_label_transport(w, fam, shifted, rep) ==
            (component_label_transport(w, fam, start, rep) ^ coset_index(rep, m)));
    }
  }
}

TEST_CASE("decorrelation at the discrete level") {
  const auto negfam = build_schottky(sl2_negative_pair(), kR, kEps, 16);
  const auto neg = sign_group(negfam, 4);
  const auto d1 = decorrelation_discret_check(negfam, neg, 3);
  CHECK(d1.pass);
  REQUIRE(d1.rows.size() == 2);
  CHECK(d1.rows[0].attained.is_identity());
  CHECK(!d1.rows[1].attained.is_identity());

  const auto fam = build_schottky(sl3_sign_family(), kR, kEps, 32);
  const auto rep = sign_group(fam, 4);
  const auto d2 = decorrelation_discret_check(fam, rep, 2);
  CHECK(d2.pass);
  REQUIRE(d2.rows.size() == 4);
  std::set<std::uint64_t> seen;
  for (const auto& row : d2.rows) seen.insert(row.attained.mask());
  CHECK(seen.size() == 4);

  const auto pos = build_schottky(sl2_pair(), kR, kEps, 16);
  const auto vac = decorrelation_discret_check(pos, sign_group(pos, 4), 1);
  CHECK(vac.pass);
  CHECK(vac.p == 0);

  SchottkyFamily tight = fam;
  tight.eps = 1e-300;
  CHECK_THROWS_AS(decorrelation_discret_check(tight, rep, 1), NeedLargerN);
}

TEST_CASE("Jordan line density probe") {
  const auto pair = build_schottky(sl2_pair(), kR, kEps, 16);
  const auto words = enumerate_words(pair, 6);
  const auto cone = cone_from_words(words, 2, 6);
  const CartanVector axis = CartanVector::recentered((Vec(2) << 1.0, -1.0).finished());
  const auto probe = jordan_line_density_probe(words, cone, axis, 0.0, 1e9, 1e-6);
  CHECK(probe.theta_interior);
  CHECK(probe.hits == words.size());
  std::vector<double> lengths;
  for (const auto& w : words) lengths.push_back(w.lambda.coords().norm());
  std::sort(lengths.begin(), lengths.end());
  for (std::size_t i = 0; i < lengths.size(); ++i) CHECK(std::abs(probe.positions[i] - lengths[i]) < 1e-9);

  const auto single = build_schottky({diagonal_element({4.0, 1.0, 0.25})}, kR, kEps, 32);
  const auto sw = enumerate_words(single, 6);
  const double step = single.generators[0].lambda.coords().norm();
  const auto sp = jordan_line_density_probe(sw, cone_from_words(sw, 3, 6), single.generators[0].lambda, 0.0, 1e9, 1e-6);
  CHECK(sp.hits == 6);
  CHECK(std::abs(sp.max_gap - step) < 1e-8);
  CHECK(std::abs(sp.mean_gap - step) < 1e-8);

  const auto fam = build_schottky(sl3_cone_family(), kR, kEps, 32);
  const auto fw = enumerate_words(fam, 7);
  const auto fc = cone_from_words(fw, 3, 7);
  const Vec a = fc.hull[0].coords(), b = fc.hull[1].coords();
  const CartanVector inside = CartanVector::recentered(a + b);
  const CartanVector outside = CartanVector::recentered(a + 0.8 * (a - b));
  const auto in = jordan_line_density_probe(fw, fc, inside, 40.0, 120.0, 2.0);
  const auto out = jordan_line_density_probe(fw, fc, outside, 40.0, 120.0, 2.0);
  CHECK(in.theta_interior);
  CHECK_FALSE(out.theta_interior);
  CHECK(in.hits > out.hits);
}
