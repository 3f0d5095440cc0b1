#include "chamberflow/schottky.hpp"

#include "chamberflow/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chamberflow {

SchottkyFamily build_schottky(const std::vector<GroupElement>& seeds, double r, double eps, int max_power,
                              const Config& cfg) {
  if (seeds.empty()) throw InvalidInput("no seeds");
  std::vector<LoxodromicData> base;
  for (const auto& g : seeds) base.push_back(classify(g, cfg));
  const int q = static_cast<int>(base.size());
  SchottkyFamily fam;
  fam.r = r;
  fam.eps = eps;
  fam.pairwise_margins.resize(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double m = cell_margin(base[i].attracting, base[j].repelling);
      if (m <= 1e-12)
        throw NotGeneric("g" + std::to_string(i + 1) + "+ is not transverse to g" + std::to_string(j + 1) + "-");
      fam.pairwise_margins(i, j) = m;
    }
  for (int i = 0; i < q; ++i) {
    auto cp = certify_smallest_power(base[i], r, eps, max_power, 200, cfg);
    fam.generators.push_back(std::move(cp.data));
    fam.certificates.push_back(cp.cert);
    fam.powers.push_back(cp.power);
  }
  const double worst = fam.pairwise_margins.minCoeff();
  if (worst < 6.0 * r)
    throw CannotCertify("strong Schottky margin " + std::to_string(worst) + " is below 6r = " +
                        std::to_string(6.0 * r));
  return fam;
}

Factored word_element(const SchottkyFamily& fam, const Word& w) {
  if (w.empty()) return Factored(GroupElement::identity(fam.n()));
  std::vector<GroupElement> f;
  for (int letter : w)
    for (const auto& x : fam.generators.at(letter).g.factors()) f.push_back(x);
  return Factored(std::move(f));
}

namespace {

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

Mat compound(const Mat& g, const std::vector<std::vector<int>>& idx) {
  const int m = static_cast<int>(idx.size());
  const int k = static_cast<int>(idx.front().size());
  Mat c(m, m);
  Mat sub(k, k);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = g(idx[a][i], idx[b][j]);
      c(a, b) = sub.determinant();
    }
  return c;
}

// Exterior powers 1..n-1 of a word, each kept as a unit-norm matrix times exp(log_scale).
struct Exterior {
  std::vector<Mat> m;
  std::vector<double> log_scale;
};

void times(Exterior& acc, const Exterior& g) {
  for (std::size_t k = 0; k < acc.m.size(); ++k) {
    acc.m[k] = acc.m[k] * g.m[k];
    const double nrm = acc.m[k].norm();
    acc.m[k] /= nrm;
    acc.log_scale[k] += g.log_scale[k] + std::log(nrm);
  }
}

Exterior exterior_of(const Factored& g, const std::vector<std::vector<std::vector<int>>>& idx) {
  Exterior e;
  for (const auto& s : idx) {
    e.m.push_back(Mat::Identity(static_cast<int>(s.size()), static_cast<int>(s.size())));
    e.log_scale.push_back(0.0);
  }
  for (const auto& f : g.factors()) {
    Exterior step;
    for (const auto& s : idx) {
      Mat c = compound(f.matrix(), s);
      const double nrm = c.norm();
      step.m.push_back(c / nrm);
      step.log_scale.push_back(std::log(nrm));
    }
    times(e, step);
  }
  return e;
}

void read_jordan(const Exterior& e, int n, double tol, WordRecord& rec) {
  Vec partial(n + 1);
  partial[0] = 0.0;
  partial[n] = 0.0;
  std::vector<int> sgn(n + 1, 1);
  for (int k = 1; k < n; ++k) {
    const Mat& m = e.m[k - 1];
    std::complex<double> top;
    double second = 0.0;
    if (m.rows() == 1) {
      top = m(0, 0);
    } else {
      Eigen::EigenSolver<Mat> es(m, false);
      const Eigen::VectorXcd ev = es.eigenvalues();
      int best = 0;
      for (int i = 1; i < ev.size(); ++i)
        if (std::abs(ev[i]) > std::abs(ev[best])) best = i;
      top = ev[best];
      for (int i = 0; i < ev.size(); ++i)
        if (i != best) second = std::max(second, std::abs(ev[i]));
    }
    const double rho = std::abs(top);
    if (!(rho > 0) || std::abs(top.imag()) > tol * rho || second >= (1.0 - tol) * rho) {
      rec.loxodromic = false;
      return;
    }
    partial[k] = std::log(rho) + e.log_scale[k - 1];
    sgn[k] = top.real() > 0 ? 1 : -1;
  }
  Vec lam(n);
  std::vector<int> signs(n);
  for (int k = 1; k <= n; ++k) {
    lam[k - 1] = partial[k] - partial[k - 1];
    signs[k - 1] = sgn[k] * sgn[k - 1];
  }
  rec.loxodromic = true;
  rec.lambda = CartanVector::recentered(lam);
  rec.signs = SignVector(signs);
}

}  // namespace

std::vector<WordRecord> enumerate_words(const SchottkyFamily& fam, int max_len, std::size_t cap, int workers,
                                        const Config& cfg) {
  if (max_len < 1) throw InvalidInput("max_len must be positive");
  const int q = fam.size();
  const int n = fam.n();
  std::size_t total = 0, level = 1;
  for (int len = 1; len <= max_len; ++len) {
    level *= static_cast<std::size_t>(q);
    total += level;
    if (total > cap)
      throw BudgetExceeded(std::to_string(total) + "+ words up to length " + std::to_string(len) +
                           " exceed the cap " + std::to_string(cap));
  }
  std::vector<std::vector<std::vector<int>>> idx;
  for (int k = 1; k < n; ++k) idx.push_back(subsets(n, k));
  std::vector<Exterior> gens;
  for (const auto& l : fam.generators) gens.push_back(exterior_of(l.g, idx));

  std::vector<WordRecord> out;
  out.reserve(total);
  std::vector<Exterior> prev;
  std::vector<Word> prev_words;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t parents = len == 1 ? 1 : prev.size();
    std::vector<Exterior> cur(parents * q);
    std::vector<WordRecord> recs(parents * q);
    const std::size_t chunk = 256;
    const std::size_t chunks = (parents + chunk - 1) / chunk;
    for_each_chunk(chunks, workers, [&](std::size_t c) {
      for (std::size_t p = c * chunk; p < std::min(parents, (c + 1) * chunk); ++p)
        for (int j = 0; j < q; ++j) {
          const std::size_t at = p * q + j;
          if (len == 1) {
            cur[at] = gens[j];
            recs[at].word = {j};
          } else {
            cur[at] = prev[p];
            times(cur[at], gens[j]);
            recs[at].word = prev_words[p];
            recs[at].word.push_back(j);
          }
          read_jordan(cur[at], n, cfg.tol_lox, recs[at]);
        }
    });
    prev = std::move(cur);
    prev_words.clear();
    for (auto& r : recs) {
      prev_words.push_back(r.word);
      out.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

Vec rho_hat(int n) {
  Vec rho(n);
  for (int i = 0; i < n; ++i) rho[i] = n - 1 - 2 * i;
  return rho.normalized();
}

Vec helmert(int n, int k) {  // k = 1..n-1
  Vec h = Vec::Zero(n);
  for (int i = 0; i < k; ++i) h[i] = 1.0;
  h[k] = -k;
  return h / std::sqrt(static_cast<double>(k) * (k + 1));
}

Mat section_basis(int n) {
  const Vec rho = rho_hat(n);
  Mat b(n, 0);
  for (int k = 1; k < n; ++k) {
    Vec v = helmert(n, k);
    v -= v.dot(rho) * rho;
    for (int j = 0; j < b.cols(); ++j) v -= v.dot(b.col(j)) * b.col(j);
    if (v.norm() < 1e-9) continue;
    b.conservativeResize(n, b.cols() + 1);
    b.col(b.cols() - 1) = v.normalized();
  }
  return b;
}

double cross(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Signed distance of p to the left of the directed edge a -> b.
double edge_distance(const Vec& a, const Vec& b, const Vec& p) { return cross(a, b, p) / (b - a).norm(); }

std::vector<Vec> hull_points(const ConeEstimate& cone) {
  std::vector<Vec> pts;
  for (const auto& h : cone.hull) pts.push_back(cone_section_coords(h));
  return pts;
}

}  // namespace

Vec cone_section_coords(const CartanVector& x) {
  const int n = x.n();
  const double h = x.coords().dot(rho_hat(n));
  if (!(h > 0)) throw InvalidInput("direction outside the half-space of the positive chamber");
  return section_basis(n).transpose() * (x.coords() / h);
}

std::pair<double, double> plot_coords(const CartanVector& dir) {
  const int n = dir.n();
  const Vec u = dir.coords().normalized();
  return {u.dot(helmert(n, 1)), n > 2 ? u.dot(helmert(n, 2)) : 0.0};
}

ConeEstimate cone_from_words(const std::vector<WordRecord>& words, int n, int max_len) {
  ConeEstimate cone;
  cone.word_length = max_len;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!words[i].loxodromic) continue;
    cone.rays.push_back(CartanVector::recentered(words[i].lambda.coords().normalized()));
    cone.ray_word.push_back(static_cast<int>(i));
  }
  if (cone.rays.empty()) return cone;
  const int dim = n - 2;
  if (dim == 0) {
    cone.hull = {cone.rays.front()};
    return cone;
  }
  if (dim > 2) {
    cone.hull_supported = false;
    return cone;
  }
  std::vector<Vec> pts;
  for (const auto& r : cone.rays) pts.push_back(cone_section_coords(r));
  if (dim == 1) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i][0] < pts[lo][0]) lo = i;
      if (pts[i][0] > pts[hi][0]) hi = i;
    }
    cone.hull = {cone.rays[lo]};
    if (hi != lo) cone.hull.push_back(cone.rays[hi]);
    return cone;
  }
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a][0] < pts[b][0] || (pts[a][0] == pts[b][0] && pts[a][1] < pts[b][1]);
  });
  std::vector<std::size_t> h(2 * order.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    while (k >= 2 && cross(pts[h[k - 2]], pts[h[k - 1]], pts[order[i]]) <= 0) --k;
    h[k++] = order[i];
  }
  for (std::size_t i = order.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(pts[h[k - 2]], pts[h[k - 1]], pts[order[i]]) <= 0) --k;
    h[k++] = order[i];
  }
  if (k > 1) --k;
  for (std::size_t i = 0; i < k; ++i) cone.hull.push_back(cone.rays[h[i]]);
  if (k >= 3)
    for (const auto& p : pts)
      for (std::size_t i = 0; i < k; ++i)
        cone.containment_residual =
            std::max(cone.containment_residual, -edge_distance(pts[h[i]], pts[h[(i + 1) % k]], p));
  return cone;
}

ConeEstimate limit_cone(const SchottkyFamily& fam, int max_len, std::size_t cap, int workers, const Config& cfg) {
  return cone_from_words(enumerate_words(fam, max_len, cap, workers, cfg), fam.n(), max_len);
}

bool cone_interior(const ConeEstimate& cone, const CartanVector& theta) {
  if (cone.hull.empty() || !cone.hull_supported) return false;
  const int n = theta.n();
  if (!(theta.coords().dot(rho_hat(n)) > 0)) return false;
  if (n == 2) return true;
  const Vec p = cone_section_coords(theta);
  const auto hp = hull_points(cone);
  const double m = 1e-6;
  if (n == 3) {
    if (hp.size() < 2) return false;
    const double lo = std::min(hp[0][0], hp[1][0]), hi = std::max(hp[0][0], hp[1][0]);
    return p[0] > lo + m && p[0] < hi - m;
  }
  if (hp.size() < 3) return false;
  for (std::size_t i = 0; i < hp.size(); ++i)
    if (!(edge_distance(hp[i], hp[(i + 1) % hp.size()], p) > m)) return false;
  return true;
}

SignGroupReport sign_group_from_words(const std::vector<WordRecord>& words, int n) {
  SignGroupReport rep;
  std::vector<std::uint64_t> reduced;
  for (const auto& w : words) {
    if (!w.loxodromic) continue;
    ++rep.words_scanned;
    std::uint64_t v = w.signs.mask();
    if (v != 0) rep.all_positive = false;
    for (std::uint64_t b : reduced)
      if (v & (b & (~b + 1))) v ^= b;
    if (v == 0) continue;
    // Keep the reduced rows in echelon form on their lowest set bit.
    const std::uint64_t low = v & (~v + 1);
    for (auto& b : reduced)
      if (b & low) b ^= v;
    reduced.push_back(v);
    rep.basis.push_back(w.signs);
    rep.witnesses.push_back(w.word);
    if (static_cast<int>(rep.basis.size()) == n - 1) break;
  }
  rep.p = static_cast<int>(rep.basis.size());
  rep.order = std::size_t{1} << rep.p;
  return rep;
}

SignGroupReport sign_group(const SchottkyFamily& fam, int max_len, std::size_t cap, int workers, const Config& cfg) {
  return sign_group_from_words(enumerate_words(fam, max_len, cap, workers, cfg), fam.n());
}

std::uint64_t coset_index(const SignGroupReport& report, const SignVector& m) {
  std::vector<std::uint64_t> reduced;
  for (const auto& b : report.basis) {
    std::uint64_t v = b.mask();
    for (std::uint64_t r : reduced)
      if (v & (r & (~r + 1))) v ^= r;
    const std::uint64_t low = v & (~v + 1);
    for (auto& r : reduced)
      if (r & low) r ^= v;
    reduced.push_back(v);
  }
  std::uint64_t v = m.mask();
  for (std::uint64_t r : reduced)
    if (v & (r & (~r + 1))) v ^= r;
  return v;
}

Section transport_section(const SchottkyFamily& fam) {
  const auto cover = covering_family(fam.n());
  int best = -1;
  double best_margin = 0.0;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    double m = INFINITY;
    for (const auto& g : fam.generators) m = std::min(m, cell_margin(g.attracting, cover[i].base));
    if (m > best_margin) {
      best_margin = m;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw OutOfDomain("no covering section contains every attracting flag");
  return cover[best];
}

std::uint64_t component_label_transport(const Word& word, const SchottkyFamily& fam, const BHCoordinates& start,
                                        const SignGroupReport& report, const Config& cfg) {
  const auto cover = covering_family(fam.n());
  Flag xi = start.xi;
  AMElement x = start.x;
  Section cur = start.section;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const LoxodromicData& g = fam.generators.at(*it);
    const Flag next = act(g.g, xi);
    const Section& s = cover[best_section(cover, next)];
    x = cocycle(s, cur, g.g, xi, cfg) * x;
    xi = next;
    cur = s;
  }
  if (!word.empty() && in_domain(start.section, xi, cfg)) x = transition(start.section, cur, xi, cfg) * x;
  return coset_index(report, x.m);
}

DecorrelationReport decorrelation_discret_check(const SchottkyFamily& fam, const SignGroupReport& report, int n,
                                                const Config& cfg) {
  DecorrelationReport rep;
  rep.p = report.p;
  rep.n = n;
  const int dim = fam.n();
  if (report.p == 0) {
    rep.rows.push_back({{}, SignVector::identity(dim), SignVector::identity(dim), true});
    return rep;
  }
  if (n < 1) throw InvalidInput("n must be positive");
  const int p = report.p;
  std::vector<LoxodromicData> h;
  for (const auto& w : report.witnesses) h.push_back(classify_product(word_element(fam, w), cfg));
  for (int i = 0; i < p; ++i) {
    const auto& prev = h[(i + p - 1) % p];
    if (cell_margin(prev.attracting, h[i].repelling) <= fam.eps)
      throw HypothesisViolated("witness h" + std::to_string((i + p - 1) % p + 1) + "+ is within eps of the boundary of b(h" +
                               std::to_string(i + 1) + "-)");
  }
  std::vector<Section> secs{Section::compact(h.front().repelling)};
  for (const auto& l : h) secs.push_back(Section::compact(l.repelling));
  const Flag xi0 = h.back().attracting;

  SignVector base;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    DecorrelationRow row;
    Flag xi = xi0;
    AMElement beta = AMElement::identity(dim);
    SignVector expected = SignVector::identity(dim);
    for (int i = 0; i < p; ++i) {
      const int nu = static_cast<int>((mask >> i) & 1u);
      row.nu.push_back(nu);
      if (nu) expected = expected * report.basis[i];
      const Factored g = h[i].g.pow(2 * n + nu);
      beta = cocycle(secs[i + 1], secs[i], g, xi, cfg) * beta;
      xi = act(g, xi);
      if (!(flag_distance(xi, h[i].attracting) < fam.eps))
        throw NeedLargerN("ping-pong containment fails at h" + std::to_string(i + 1) + " for n = " + std::to_string(n));
    }
    if (mask == 0) base = beta.m;
    row.attained = beta.m * base;
    row.expected = expected;
    row.match = row.attained == row.expected;
    rep.pass = rep.pass && row.match;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

ProbeReport jordan_line_density_probe(const std::vector<WordRecord>& words, const ConeEstimate& cone,
                                      const CartanVector& theta, double lo, double hi, double delta0) {
  if (!(hi > lo) || !(delta0 > 0)) throw InvalidInput("empty window or non-positive delta0");
  ProbeReport rep;
  const Vec dir = theta.coords().normalized();
  rep.theta = CartanVector::recentered(dir);
  rep.lo = lo;
  rep.hi = hi;
  rep.delta0 = delta0;
  rep.theta_interior = cone_interior(cone, rep.theta);
  for (const auto& w : words) {
    if (!w.loxodromic) continue;
    ++rep.words;
    const double t = w.lambda.coords().dot(dir);
    if (t < lo || t > hi) continue;
    if ((w.lambda.coords() - t * dir).norm() >= delta0) continue;
    rep.positions.push_back(t);
  }
  std::sort(rep.positions.begin(), rep.positions.end());
  rep.hits = rep.positions.size();
  if (rep.hits >= 2) {
    for (std::size_t i = 1; i < rep.hits; ++i)
      rep.max_gap = std::max(rep.max_gap, rep.positions[i] - rep.positions[i - 1]);
    rep.mean_gap = (rep.positions.back() - rep.positions.front()) / static_cast<double>(rep.hits - 1);
  } else {
    rep.max_gap = hi - lo;
    rep.mean_gap = hi - lo;
  }
  return rep;
}

}  // namespace chamberflow
