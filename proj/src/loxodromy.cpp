#include "chamberflow/loxodromy.hpp"

#include "chamberflow/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

namespace chamberflow {

namespace {

void check_separated(const CartanVector& lambda, double tol) {
  for (int i = 0; i + 1 < lambda.n(); ++i)
    if (!(std::exp(lambda[i + 1] - lambda[i]) < 1.0 - tol))
      throw NotLoxodromic("eigenvalue moduli " + std::to_string(i) + " and " + std::to_string(i + 1) +
                          " are not separated");
}

GroupElement diagonalizer_for(const Flag& plus, const Flag& minus) {
  const int n = plus.n();
  return from_bh({plus, minus, AMElement::identity(n), Section::unipotent(minus)});
}

// Fixed point of the action of w reached from a fixed generic start; the factor list is
// squared between rounds so slow contractions still converge in few rounds.
Flag attracting_fixed_point(const Factored& w) {
  const int n = w.n();
  Rng rng(0x9e3779b97f4a7c15ULL);
  Flag xi = Flag::from_rep(random_rotation(n, rng));
  Factored cur = w;
  for (int round = 0; round < 24; ++round) {
    for (int it = 0; it < 8; ++it) {
      const Flag next = act(cur, xi);
      const double d = flag_distance(next, xi);
      xi = next;
      if (d < 1e-13) return xi;
    }
    if (cur.factors().size() < 4096) cur = cur * cur;
  }
  throw NotLoxodromic("orbit of the product did not converge to a fixed flag");
}

Flag push_to_level(const Flag& xi, const Flag& target, const Flag& minus, double eps) {
  const auto signs = flag_distance_argmin(xi, target);
  Mat tgt = target.rep();
  for (int j = 0; j < tgt.cols(); ++j) tgt.col(j) *= signs[j];
  auto at = [&](double t) { return Flag::from_columns((1.0 - t) * xi.rep() + t * tgt); };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cell_margin(at(mid), minus) < eps)
      lo = mid;
    else
      hi = mid;
  }
  return at(hi);
}

}  // namespace

LoxodromicData classify(const GroupElement& g, const Config& cfg) {
  const int n = g.n();
  Eigen::EigenSolver<Mat> es(g.matrix());
  if (es.info() != Eigen::Success) throw NotLoxodromic("eigen-decomposition failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  const Eigen::MatrixXcd evec = es.eigenvectors();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(ev[a]) > std::abs(ev[b]); });
  Vec logs(n);
  Mat p(n, n);
  std::vector<int> signs(n);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> z = ev[order[i]];
    if (std::abs(z.imag()) > cfg.tol_lox * std::abs(z)) throw NotLoxodromic("complex eigenvalue pair");
    logs[i] = std::log(std::abs(z));
    signs[i] = z.real() > 0 ? 1 : -1;
    p.col(i) = evec.col(order[i]).real();
  }
  const CartanVector lambda = CartanVector::recentered(logs);
  check_separated(lambda, cfg.tol_lox);
  const Flag plus = Flag::from_columns(p);
  const Flag minus = Flag::from_columns(p * reversal(n));
  return {Factored(g), lambda, SignVector(signs), plus, minus, diagonalizer_for(plus, minus), lambda.min_gap()};
}

LoxodromicData classify_power(const LoxodromicData& l, int p) {
  if (p < 1) throw InvalidInput("power must be positive");
  return {l.g.pow(p), l.lambda * p, AMElement{l.lambda, l.signs}.pow(p).m, l.attracting, l.repelling,
          l.diagonalizer, l.gap * p};
}

LoxodromicData classify_product(const Factored& w, const Config& cfg) {
  const Flag plus = attracting_fixed_point(w);
  const Flag minus = attracting_fixed_point(w.inverse());
  if (!is_transverse(plus, minus, cfg)) throw NotLoxodromic("fixed flags are not transverse");
  const AMElement jordan = cocycle(Section::unipotent(minus), Section::unipotent(minus), w, plus, cfg);
  check_separated(jordan.a, cfg.tol_lox);
  return {w, jordan.a, jordan.m, plus, minus, diagonalizer_for(plus, minus), jordan.a.min_gap()};
}

AMElement extended_jordan(const Section& s, const LoxodromicData& l, const Config& cfg) {
  return cocycle(s, s, l.g, l.attracting, cfg);
}

REpsCertificate certify_r_eps(const LoxodromicData& l, double r, double eps, int grid, const Config&) {
  if (grid < 100) throw InvalidInput("grid below 100 is under-resolved");
  if (!(eps > 0 && eps <= r)) throw InvalidInput("need 0 < eps <= r");
  const int n = l.n();
  REpsCertificate cert;
  cert.r = r;
  cert.eps = eps;
  cert.margin = cell_margin(l.attracting, l.repelling);
  cert.analytic_decay = std::exp(-l.gap);
  if (r > 0.5 * cert.margin)
    throw CannotCertify("clause (i): r = " + std::to_string(r) + " exceeds half the margin " +
                        std::to_string(cert.margin));

  Rng rng(0xce47000ULL + static_cast<std::uint64_t>(grid));
  std::vector<Flag> pts;
  pts.reserve(grid);
  for (int k = 0; k < grid; ++k) {
    Flag xi;
    if (n == 2) {
      const double th = M_PI * k / grid;
      Mat rep(2, 2);
      rep << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      xi = Flag::from_rep(rep);
    } else {
      xi = random_flag(n, rng);
    }
    if (cell_margin(xi, l.repelling) < eps) {
      try {
        xi = push_to_level(xi, l.attracting, l.repelling, eps);
      } catch (const NonInvertible&) {
        continue;
      }
    }
    pts.push_back(xi);
  }
  cert.samples = static_cast<int>(pts.size());

  std::vector<Flag> img;
  img.reserve(pts.size());
  for (const auto& xi : pts) {
    img.push_back(act(l.g, xi));
    cert.max_image_distance = std::max(cert.max_image_distance, flag_distance(img.back(), l.attracting));
  }
  if (!(cert.max_image_distance < eps))
    throw CannotCertify("clause (ii): max d(g xi, g+) = " + std::to_string(cert.max_image_distance) +
                        " is not below eps = " + std::to_string(eps));

  const double h = 1e-5;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Flag near = Flag::from_rep(skew_exp(h * random_skew_unit(n, rng)) * pts[k].rep());
    if (cell_margin(near, l.repelling) < eps) continue;
    const double d = flag_distance(pts[k], near);
    if (d <= 0) continue;
    cert.lipschitz_bound = std::max(cert.lipschitz_bound, flag_distance(img[k], act(l.g, near)) / d);
  }
  const std::size_t pairs = std::min<std::size_t>(pts.size(), 150);
  for (std::size_t a = 0; a < pairs; ++a)
    for (std::size_t b = a + 1; b < pairs; ++b) {
      const double d = flag_distance(pts[a], pts[b]);
      if (d < 1e-12) continue;
      cert.lipschitz_bound = std::max(cert.lipschitz_bound, flag_distance(img[a], img[b]) / d);
    }
  if (!(cert.lipschitz_bound <= eps))
    throw CannotCertify("clause (iii): difference quotient " + std::to_string(cert.lipschitz_bound) +
                        " exceeds eps = " + std::to_string(eps));
  return cert;
}

CertifiedPower certify_smallest_power(const LoxodromicData& l, double r, double eps, int max_power, int grid,
                                      const Config& cfg) {
  std::string last;
  for (int p = 1; p <= max_power; ++p) {
    LoxodromicData lp = classify_power(l, p);
    try {
      REpsCertificate cert = certify_r_eps(lp, r, eps, grid, cfg);
      return {std::move(lp), cert, p};
    } catch (const CannotCertify& e) {
      last = e.what();
      if (last.find("clause (i)") != std::string::npos) break;
    }
  }
  throw CannotCertify("no power up to " + std::to_string(max_power) + " certified; last: " + last);
}

AMElement ratio(const Section& s1, const Section& s2, const Flag& xi_check, const Flag& xi1, const Flag& xi2,
                const Config& cfg) {
  const Section mid = Section::unipotent(xi_check);
  return transition(s1, mid, xi1, cfg) * transition(mid, s2, xi2, cfg);
}

AMElement ratio(const Section& s1, const Section& s2, const LoxodromicData& l, const Flag& xi, const Config& cfg) {
  return ratio(s1, s2, l.repelling, l.attracting, xi, cfg);
}

AMElement cocycle_via_jordan(const LoxodromicData& l, int n, const Flag& xi, const Section& s0, const Section& s1,
                             const Section& s2, const Config& cfg) {
  if (n < 1) throw InvalidInput("power must be positive");
  const Flag image = act(l.g.pow(n), xi);
  return ratio(s1, s2, l, image, cfg).inverse() * extended_jordan(s1, l, cfg).pow(n) * ratio(s1, s0, l, xi, cfg);
}

double delta_r_eps(const DeltaOptions& opt, const Config& cfg) {
  return delta_r_eps(opt, opposite_flag(opt.n), cfg);
}

double delta_r_eps(const DeltaOptions& opt, const Flag& xi_check, const Config& cfg) {
  if (!(opt.eps > 0 && opt.eps <= opt.r)) throw InvalidInput("need 0 < eps <= r");
  if (opt.mc_samples < 1000) throw InvalidInput("mc_samples must be at least 1000");
  const int n = xi_check.n();
  const double cap = 2.0 * std::sqrt(2.0);
  if (3.0 * opt.r >= cap) throw InvalidInput("3r exceeds the diameter bound of the flag variety");
  constexpr int kChunk = 1024;
  const std::size_t chunks = (static_cast<std::size_t>(opt.mc_samples) + kChunk - 1) / kChunk;
  std::vector<double> best(chunks, 0.0);
  const Section base = Section::compact(xi_check);
  for_each_chunk(chunks, opt.workers, [&](std::size_t c) {
    Rng rng = chunk_rng(opt.seed, c);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int count = std::min<int>(kChunk, opt.mc_samples - static_cast<int>(c) * kChunk);
    double local = 0.0;
    for (int k = 0; k < count; ++k) {
      // c ranges over the Frobenius r-ball around e, which moves every flag by at most r and so lies in K_r.
      const Mat rot = plane_rotation_at_distance(n, opt.r * unif(rng), rng);
      const Section s = base.left_translated(rot);
      Flag xi1;
      int tries = 0;
      do {
        if (++tries > 100000) throw InvalidInput("no flag found at margin 3r from the base");
        xi1 = random_flag(n, rng);
      } while (cell_margin(xi1, xi_check) < 3.0 * opt.r);
      const double rho = unif(rng) < 0.5 ? opt.r * std::pow(1e-6, unif(rng)) : opt.r * unif(rng);
      const Mat step = plane_rotation_at_distance(n, rho, rng);
      if (!(rho < opt.eps)) continue;
      const Flag xi2 = Flag::from_rep(step * xi1.rep());
      const AMElement q = ratio(s, s, xi_check, xi1, xi2, cfg);
      local = std::max(local, am_distance(q, AMElement::identity(n)));
    }
    best[c] = local;
  });
  return *std::max_element(best.begin(), best.end());
}

std::vector<Flag> sample_deep_flags(const Flag& xi_check, double margin, int count, Rng& rng) {
  std::vector<Flag> out;
  out.reserve(count);
  long tries = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++tries > 1000L * count + 100000) throw InvalidInput("margin too large to sample flags");
    Flag xi = random_flag(xi_check.n(), rng);
    if (cell_margin(xi, xi_check) >= margin) out.push_back(std::move(xi));
  }
  return out;
}

EstimateReport product_estimate(const std::vector<LoxodromicData>& family, const std::vector<int>& powers,
                                const Flag& xi0, const std::vector<Section>& sections, double r, double eps,
                                double delta, const Config& cfg) {
  const int l = static_cast<int>(family.size());
  if (l < 1 || static_cast<int>(powers.size()) != l || static_cast<int>(sections.size()) != l + 1)
    throw InvalidInput("need l generators, l powers and l+1 sections");
  for (int p : powers)
    if (p < 1) throw InvalidInput("powers must be positive");
  const auto prev = [&](int i) -> const LoxodromicData& { return family[(i + l - 1) % l]; };

  for (int i = 0; i < l; ++i)
    if (cell_margin(prev(i).attracting, family[i].repelling) <= 0.0)
      throw HypothesisViolated("genericity: g" + std::to_string((i + l - 1) % l + 1) + "+ is not transverse to g" +
                               std::to_string(i + 1) + "-");
  for (int i = 0; i < l; ++i) {
    const double m = std::min(cell_margin(prev(i).attracting, family[i].repelling),
                              cell_margin(family[i].attracting, family[i].repelling));
    if (r > m / 6.0)
      throw HypothesisViolated("star: r exceeds a sixth of the margins at g" + std::to_string(i + 1));
  }
  // The complement of the domain of s is the boundary of b(base); a rotation moving base by
  // less than rad moves that boundary by less than rad, so it stays inside V_rad(boundary of b(minus)).
  const auto covers = [&](const Section& s, const Flag& minus, double rad) { return flag_distance(s.base, minus) < rad; };
  for (int i = 0; i < l; ++i)
    if (!covers(sections[i + 1], family[i].repelling, r))
      throw HypothesisViolated("star-star: section s" + std::to_string(i + 1) + " does not cover the r-complement");
  if (!covers(sections[0], family[0].repelling, eps))
    throw HypothesisViolated("star-star: section s0 does not cover the eps-complement");
  if (cell_margin(xi0, family[0].repelling) < eps)
    throw HypothesisViolated("xi0 lies in the eps-neighbourhood of the boundary");
  for (int i = 0; i < l; ++i) {
    try {
      certify_r_eps(family[i], r, eps, 200, cfg);
    } catch (const CannotCertify& e) {
      throw HypothesisViolated("g" + std::to_string(i + 1) + " is not (r, eps)-loxodromic: " + e.what());
    }
  }

  std::vector<GroupElement> factors;
  for (int i = l - 1; i >= 0; --i)
    for (int k = 0; k < powers[i]; ++k)
      for (const auto& f : family[i].g.factors()) factors.push_back(f);
  const Factored w(std::move(factors));

  EstimateReport rep;
  rep.l = l;
  rep.beta = cocycle(sections[l], sections[0], w, xi0, cfg);
  const int n = xi0.n();
  AMElement chain = AMElement::identity(n);
  for (int i = 0; i < l; ++i) {
    const Flag& from = i == 0 ? xi0 : family[i - 1].attracting;
    chain = extended_jordan(sections[i + 1], family[i], cfg).pow(powers[i]) *
            ratio(sections[i + 1], sections[i], family[i], from, cfg) * chain;
  }
  rep.beta_chain = chain;
  rep.beta_distance = am_distance(rep.beta, rep.beta_chain);
  rep.beta_bound = (2 * l - 1) * delta;
  rep.beta_pass = rep.beta_distance <= rep.beta_bound;

  const LoxodromicData prod = classify_product(w, cfg);
  rep.product_attracting = prod.attracting;
  rep.product_repelling = prod.repelling;
  rep.attracting_distance = flag_distance(prod.attracting, family[l - 1].attracting);
  rep.repelling_distance = flag_distance(prod.repelling, family[0].repelling);
  rep.flags_in_balls = rep.attracting_distance < eps && rep.repelling_distance < eps;
  rep.jordan = cocycle(sections[l], sections[l], w, prod.attracting, cfg);
  AMElement jchain = AMElement::identity(n);
  for (int i = 0; i < l; ++i) {
    const Flag& from = i == 0 ? family[l - 1].attracting : family[i - 1].attracting;
    const Section& s_from = i == 0 ? sections[l] : sections[i];
    jchain = extended_jordan(sections[i + 1], family[i], cfg).pow(powers[i]) *
             ratio(sections[i + 1], s_from, family[i], from, cfg) * jchain;
  }
  rep.jordan_chain = jchain;
  rep.jordan_distance = am_distance(rep.jordan, rep.jordan_chain);
  rep.jordan_bound = 2 * l * delta;
  rep.jordan_pass = rep.jordan_distance <= rep.jordan_bound;
  return rep;
}

}  // namespace chamberflow
