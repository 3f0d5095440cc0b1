#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"

#include "chamberflow/fixtures.hpp"
#include "chamberflow/loxodromy.hpp"

#include <Eigen/Eigenvalues>

using namespace chamberflow;

namespace {

Mat dense_power(const Mat& g, int p) {
  Mat out = Mat::Identity(g.rows(), g.cols());
  for (int k = 0; k < p; ++k) out = out * g;
  return out;
}

// Eigenvalue oracle: sorted log moduli if all eigenvalues are real and well separated.
bool oracle_real_separated(const Mat& g, Vec& logs) {
  Eigen::ComplexEigenSolver<Mat> es(g);
  const int n = static_cast<int>(g.rows());
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  logs.resize(n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(ev[i].imag()) > 1e-9 * std::abs(ev[i])) return false;
    logs[i] = std::log(std::abs(ev[i]));
  }
  for (int i = 0; i + 1 < n; ++i)
    if (logs[i] - logs[i + 1] < 1e-3) return false;
  logs.array() -= logs.mean();
  return true;
}

// Loxodromic element with prescribed core diag(signs) exp(diag(a)) conjugated by a rotation.
GroupElement conjugate_core(const std::vector<double>& d, std::mt19937_64& rng) {
  const int n = static_cast<int>(d.size());
  const Mat c = GroupElement::projected(Mat::Identity(n, n) + 0.5 * oracle::gaussian(n, rng)).matrix();
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = d[i];
  return GroupElement::projected(c * v.asDiagonal() * c.inverse());
}

GroupElement random_loxodromic(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 0.8);
  std::vector<double> d(n);
  double x = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    d[i] = std::exp(x);
    x += u(rng);
  }
  if (rng() % 2) {
    d[0] = -d[0];
    d[n - 1] = -d[n - 1];
  }
  return conjugate_core(d, rng);
}

Section random_section_with(const Flag& must, std::mt19937_64& rng) {
  for (;;) {
    const Flag base = random_flag(must.n(), rng);
    if (cell_margin(must, base) < 0.2) continue;
    return rng() % 2 ? Section::compact(base) : Section::unipotent(base);
  }
}

Flag random_flag_transverse(const Flag& minus, double margin, std::mt19937_64& rng) {
  return sample_deep_flags(minus, margin, 1, rng).front();
}

}  // namespace

TEST_CASE("classify: diagonal and rotation") {
  const auto l = classify(diagonal_element({4.0, 1.0, 0.25}));
  CHECK(std::abs(l.lambda[0] - std::log(4.0)) < 1e-14);
  CHECK(std::abs(l.lambda[1]) < 1e-14);
  CHECK(std::abs(l.lambda[2] + std::log(4.0)) < 1e-14);
  CHECK(flag_distance(l.attracting, standard_flag(3)) < 1e-14);
  CHECK(flag_distance(l.repelling, opposite_flag(3)) < 1e-14);
  CHECK(std::abs(l.gap - std::log(4.0)) < 1e-14);
  CHECK(l.signs.is_identity());

  Mat rot = Mat::Identity(3, 3);
  rot.topLeftCorner(2, 2) << 0.6, -0.8, 0.8, 0.6;
  CHECK_THROWS_AS(classify(GroupElement(rot)), NotLoxodromic);
  CHECK_THROWS_AS(classify(GroupElement::identity(3)), NotLoxodromic);
  CHECK_THROWS_AS(classify(diagonal_element({2.0, 2.0, 0.25})), NotLoxodromic);
}

TEST_CASE("classify: eigen oracle on powers of random elements") {
  std::mt19937_64 rng(808);
  int classified = 0, refused = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + trial % 3;
    const Mat g8 = dense_power(oracle::random_sl_cond(n, rng, 8.0).matrix(), 8);
    const GroupElement g = GroupElement::projected(g8);
    Vec logs;
    if (!oracle_real_separated(g.matrix(), logs)) {
      bool real = true;
      Eigen::ComplexEigenSolver<Mat> es(g.matrix());
      for (int i = 0; i < n; ++i) real = real && std::abs(es.eigenvalues()[i].imag()) < 1e-9;
      if (!real) {
        CHECK_THROWS_AS(classify(g), NotLoxodromic);
        ++refused;
      }
      continue;
    }
    const auto l = classify(g);
    ++classified;
    CHECK((l.lambda.coords() - logs).norm() < 1e-8 * std::max(1.0, logs.norm()));
    CHECK(flag_distance(act(l.g, l.attracting), l.attracting) < 1e-8);
    CHECK(flag_distance(act(l.g.inverse(), l.repelling), l.repelling) < 1e-8);
    const Mat d = l.diagonalizer.inverse_matrix() * g.matrix() * l.diagonalizer.matrix();
    const Mat expect = l.jordan_am().matrix();
    CHECK((d - expect).norm() < 1e-8 * expect.norm());
  }
  CHECK(classified > 25);
  CHECK(refused > 0);
}

TEST_CASE("Iwasawa cocycle at the attracting flag equals the Jordan projection") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    const auto l = classify(random_loxodromic(n, rng));
    CHECK((iwasawa_cocycle(l.g, l.attracting) - l.lambda).coords().norm() < 1e-8);
  }
}

TEST_CASE("extended Jordan projection") {
  const GroupElement g = diagonal_element({-4.0, -2.0, 0.125});
  const auto l = classify(g);
  const AMElement expect{CartanVector::recentered((Vec(3) << std::log(4.0), std::log(2.0), std::log(0.125)).finished()),
                         SignVector({-1, -1, 1})};
  const Section e = Section::unipotent(opposite_flag(3));
  CHECK(am_distance(extended_jordan(e, l), expect) < 1e-12);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const GroupElement h = oracle::random_sl_cond(3, rng, 30.0);
    const auto lh = classify(h * g * h.inverse());
    const Section sh = Section::unipotent_from(h);
    CHECK(am_distance(extended_jordan(sh, lh), expect) < 1e-8);
    for (int k = 0; k < 5; ++k) {
      const Section s = random_section_with(lh.attracting, rng);
      const AMElement js = extended_jordan(s, lh);
      CHECK(js.m == expect.m);
      CHECK((js.a - lh.lambda).coords().norm() < 1e-8);
    }
  }
  CHECK_THROWS_AS(extended_jordan(Section::unipotent(standard_flag(3)), l), OutOfDomain);
}

TEST_CASE("conjugation by transitions and the exact unipotent formula") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const auto l = classify(random_loxodromic(n, rng));
    const Section u = Section::unipotent(l.repelling);
    const AMElement lu = extended_jordan(u, l);
    CHECK(am_distance(lu, l.jordan_am()) < 1e-8);
    const Section s = random_section_with(l.attracting, rng);
    const AMElement t = transition(u, s, l.attracting);
    CHECK(am_distance(extended_jordan(s, l), t.inverse() * lu * t) < 1e-8);
  }
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const auto l = classify(random_loxodromic(n, rng));
    const Section u = Section::unipotent(l.repelling);
    const Flag xi = random_flag_transverse(l.repelling, 0.1, rng);
    for (int p = 1; p <= 8; ++p)
      CHECK(am_distance(cocycle(u, u, l.g.pow(p), xi), l.jordan_am().pow(p)) < 1e-8);
  }
}

TEST_CASE("basin of attraction") {
  std::mt19937_64 rng(5);
  const auto l = classify(random_loxodromic(3, rng));
  for (int trial = 0; trial < 50; ++trial) {
    const Flag xi = random_flag_transverse(l.repelling, 0.05, rng);
    std::vector<double> d;
    Flag cur = xi;
    for (int k = 0; k < 80; ++k) {
      cur = act(l.g, cur);
      d.push_back(flag_distance(cur, l.attracting));
    }
    CHECK(d.back() < 1e-9);
    // Monotone once the orbit is inside the ball of radius 0.1.
    std::size_t start = 0;
    while (start < d.size() && d[start] > 0.1) ++start;
    for (std::size_t k = start + 1; k < d.size(); ++k) CHECK(d[k] <= d[k - 1] + 1e-15);
  }
  // The other fixed flags sit on lower cells: images of the permutation flags under the diagonalizer.
  int others = 0;
  for (const Flag& p : permutation_flags(3)) {
    const Flag xi = Flag::from_columns(l.diagonalizer.matrix() * p.rep());
    if (flag_distance(xi, l.attracting) < 1e-6) continue;
    ++others;
    CHECK(flag_distance(act(l.g, xi), xi) < 1e-8);
    CHECK(cell_margin(xi, l.repelling) < 1e-8);
    CHECK(flag_distance(xi, l.attracting) > 0.1);
  }
  CHECK(others == 5);
}

TEST_CASE("certify: Moebius contraction on RP1") {
  const auto strong = classify(diagonal_element({100.0, 0.01}));
  const auto cert = certify_r_eps(strong, 0.3, 0.3, 200);
  CHECK(cert.samples > 0);
  CHECK(cert.max_image_distance < 0.3);
  CHECK(cert.lipschitz_bound <= 0.3);
  CHECK(std::abs(cert.margin - 2.0) < 1e-12);
  // Oracle: worst image of the eps-thick basin is the boundary point of the level set.
  const double theta_eps = M_PI / 2 - 2.0 * std::asin(0.3 / (2.0 * std::sqrt(2.0)));
  const double worst = oracle::line_distance(oracle::moebius_angle(100.0, theta_eps), 0.0);
  CHECK(std::abs(cert.max_image_distance - worst) < 1e-6);

  const auto weak = classify(diagonal_element({1.01, 1.0 / 1.01}));
  try {
    certify_r_eps(weak, 0.3, 0.3, 200);
    FAIL("expected CannotCertify");
  } catch (const CannotCertify& e) {
    CHECK(std::string(e.what()).find("clause (ii)") != std::string::npos);
  }
  CHECK_THROWS_AS(certify_r_eps(strong, 1.5, 0.3, 200), CannotCertify);
  CHECK_THROWS_AS(certify_r_eps(strong, 0.3, 0.3, 50), InvalidInput);
  CHECK_THROWS_AS(certify_r_eps(strong, 0.2, 0.3, 200), InvalidInput);

  const auto mid = classify(diagonal_element({60.0, 1.0 / 60.0}));
  const auto c1 = certify_r_eps(mid, 0.2, 0.1, 200);
  for (int p : {2, 3}) {
    const auto cp = certify_r_eps(classify_power(mid, p), 0.2, 0.1, 200);
    CHECK(cp.max_image_distance <= c1.max_image_distance);
    CHECK(cp.lipschitz_bound <= c1.lipschitz_bound);
  }
}

TEST_CASE("certify: smallest power in SL(3)") {
  const auto fam = sl3_triple();
  for (const auto& g : fam) {
    const auto cp = certify_smallest_power(classify(g), 0.15, 0.05, 32, 200);
    CHECK(cp.power >= 1);
    CHECK(cp.cert.max_image_distance < 0.05);
    if (cp.power > 1) CHECK_THROWS_AS(certify_r_eps(classify_power(classify(g), cp.power - 1), 0.15, 0.05, 200), CannotCertify);
  }
}

TEST_CASE("ratio identities") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const Flag xc = random_flag(n, rng);
    const Flag x0 = random_flag_transverse(xc, 0.2, rng);
    const Flag x1 = random_flag_transverse(xc, 0.2, rng);
    const Flag eta = random_flag_transverse(xc, 0.2, rng);
    const Section s0 = random_section_with(x0, rng);
    const Section s = random_section_with(x0, rng);
    CHECK(am_distance(ratio(s, s, xc, x0, x0), AMElement::identity(n)) < 1e-12);
    Section c, cc;
    for (;;) {
      c = random_section_with(x1, rng);
      if (in_domain(c, x0)) break;
    }
    for (;;) {
      cc = random_section_with(eta, rng);
      break;
    }
    const AMElement lhs = ratio(s0, cc, xc, x0, eta);
    const AMElement rhs = ratio(c, s0, xc, x1, x0).inverse() * ratio(c, cc, xc, x1, eta);
    CHECK(am_distance(lhs, rhs) < 1e-9);

    // Expanded product of transitions through explicit section values.
    const Section u = Section::unipotent(xc);
    const Mat p1 = eval_section(s0, x0).inverse_matrix() * eval_section(u, x0).matrix();
    const Mat p2 = eval_section(u, eta).inverse_matrix() * eval_section(cc, eta).matrix();
    const AMElement expect = AMElement::from_diagonal(p1.diagonal()) * AMElement::from_diagonal(p2.diagonal());
    CHECK(am_distance(lhs, expect) < 1e-9);
  }
}

TEST_CASE("cocycle through the extended Jordan projection") {
  std::mt19937_64 rng(99);
  const auto l = classify(random_loxodromic(3, rng));
  const Section s = Section::compact(l.repelling);
  CHECK(am_distance(cocycle_via_jordan(l, 1, l.attracting, s, s, s), extended_jordan(s, l)) < 1e-10);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const auto lt = classify(random_loxodromic(n, rng));
    const int p = 1 + trial % 6;
    const Flag xi = random_flag_transverse(lt.repelling, 0.2, rng);
    const Section s0 = random_section_with(xi, rng);
    const Section s1 = random_section_with(lt.attracting, rng);
    const Flag image = act(lt.g.pow(p), xi);
    const Section s2 = random_section_with(image, rng);
    if (!in_domain(s1, xi) || !in_domain(s1, image)) continue;
    const AMElement lhs = cocycle(s2, s0, lt.g.pow(p), xi);
    CHECK(am_distance(lhs, cocycle_via_jordan(lt, p, xi, s0, s1, s2)) < 1e-7 * p);
  }
}

TEST_CASE("equicontinuity constant") {
  DeltaOptions opt;
  opt.n = 2;
  opt.r = 0.2;
  opt.mc_samples = 10000;
  opt.eps = 1e-4;
  const double small = delta_r_eps(opt);
  CHECK(small < 1e-2);
  opt.eps = 0.05;
  const double mid = delta_r_eps(opt);
  opt.eps = 0.2;
  const double big = delta_r_eps(opt);
  CHECK(small <= mid);
  CHECK(mid <= big);
  CHECK(mid > 0);

  opt.eps = 0.05;
  opt.workers = 1;
  const double serial = delta_r_eps(opt);
  opt.workers = 4;
  CHECK(delta_r_eps(opt) == serial);
  CHECK(serial == mid);

  std::mt19937_64 rng(3);
  opt.n = 3;
  opt.seed = 7;
  const double at_base = delta_r_eps(opt);
  opt.seed = 8;
  const double elsewhere = delta_r_eps(opt, random_flag(3, rng));
  CHECK(at_base > 0);
  CHECK(elsewhere <= 2.0 * at_base);
  CHECK(at_base <= 2.0 * elsewhere);

  opt.mc_samples = 10;
  CHECK_THROWS_AS(delta_r_eps(opt), InvalidInput);
}

TEST_CASE("product estimate: single generator") {
  const auto l = certify_smallest_power(classify(sl2_pair()[0]), 0.15, 0.05, 8, 200).data;
  const Section s = Section::compact(l.repelling);
  std::mt19937_64 rng(1);
  const Flag xi0 = random_flag_transverse(l.repelling, 0.3, rng);
  const auto rep = product_estimate({l}, {2}, xi0, {s, s}, 0.15, 0.05, 0.0);
  CHECK(rep.beta_distance < 1e-9);
  CHECK(rep.jordan_distance < 1e-9);
  CHECK(am_distance(rep.beta, cocycle_via_jordan(l, 2, xi0, s, s, s)) < 1e-9);
}

TEST_CASE("product estimate: SL(2) pair and SL(3) triple") {
  struct Case {
    std::vector<GroupElement> seeds;
    std::vector<int> powers;
  };
  const double r = 0.15, eps = 0.05;
  for (const Case& c : {Case{sl2_pair(), {3, 3}}, Case{sl3_triple(), {2, 3, 2}}}) {
    const int n = c.seeds.front().n();
    std::vector<LoxodromicData> fam;
    for (const auto& g : c.seeds) fam.push_back(certify_smallest_power(classify(g), r, eps, 32, 200).data);
    std::vector<Section> secs{Section::compact(fam.front().repelling)};
    for (const auto& l : fam) secs.push_back(Section::compact(l.repelling));
    std::mt19937_64 rng(2);
    const Flag xi0 = random_flag_transverse(fam.front().repelling, 0.5, rng);
    DeltaOptions opt;
    opt.n = n;
    opt.r = r;
    opt.eps = eps;
    const double delta = 1.5 * delta_r_eps(opt);
    const auto rep = product_estimate(fam, c.powers, xi0, secs, r, eps, delta);
    CHECK(rep.flags_in_balls);
    CHECK(rep.beta_pass);
    CHECK(rep.jordan_pass);
    CHECK(rep.beta.m == rep.beta_chain.m);
    CHECK(rep.jordan.m == rep.jordan_chain.m);
    // Brute-force oracle: dense product classified by eigen-decomposition.
    Mat w = Mat::Identity(n, n);
    for (std::size_t i = 0; i < fam.size(); ++i)
      for (int k = 0; k < c.powers[i]; ++k) w = fam[i].g.dense().matrix() * w;
    Vec top;
    std::vector<int> signs;
    double prefix = 1.0;
    for (int k = 1; k < n; ++k) {
      Vec v;
      const double ev = oracle::dominant_eigen(oracle::compound(w, k), v);
      if (k == 1) top = v;
      signs.push_back((ev > 0 ? 1 : -1) * (prefix > 0 ? 1 : -1));
      prefix = ev;
    }
    signs.push_back(prefix > 0 ? 1 : -1);
    const double cosine = std::abs(top.dot(rep.product_attracting.rep().col(0)));
    CHECK(cosine > 1.0 - 1e-9);
    CHECK(rep.jordan.m == SignVector(signs));
  }
}

TEST_CASE("product estimate: hypotheses") {
  const auto pair = sl2_pair();
  const auto a = certify_smallest_power(classify(pair[0]), 0.15, 0.05, 8, 200).data;
  const auto b = certify_smallest_power(classify(pair[1]), 0.15, 0.05, 8, 200).data;
  const Section sa = Section::compact(a.repelling), sb = Section::compact(b.repelling);
  std::mt19937_64 rng(9);
  const Flag xi0 = random_flag_transverse(a.repelling, 0.5, rng);
  CHECK_THROWS_AS(product_estimate({a, b}, {1, 1}, xi0, {sa, sa, sb}, 0.3, 0.05, 1.0), HypothesisViolated);
  const auto ainv = certify_smallest_power(classify(pair[0].inverse()), 0.15, 0.05, 8, 200).data;
  CHECK_THROWS_AS(product_estimate({a, ainv}, {1, 1}, xi0, {sa, sa, Section::compact(ainv.repelling)}, 0.15, 0.05, 1.0),
                  HypothesisViolated);
  CHECK_THROWS_AS(product_estimate({a, b}, {1, 1}, a.repelling, {sa, sa, sb}, 0.15, 0.05, 1.0), HypothesisViolated);
  CHECK_THROWS_AS(product_estimate({a, b}, {1, 1}, xi0, {sa, sb, sb}, 0.15, 0.05, 1.0), HypothesisViolated);
}
