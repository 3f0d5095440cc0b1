#include "chamberflow/verify.hpp"

#include "chamberflow/density.hpp"
#include "chamberflow/fixtures.hpp"
#include "chamberflow/loxodromy.hpp"
#include "chamberflow/schottky.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>

namespace chamberflow {

using nlohmann::json;

json to_json(const RunConfig& c) {
  return json{{"n", c.n},
              {"seed", c.seed},
              {"tolerances",
               {{"tol_det", c.tol.tol_det},
                {"tol_minor", c.tol.tol_minor},
                {"tol_recon", c.tol.tol_recon},
                {"tol_id", c.tol.tol_id},
                {"tol_lox", c.tol.tol_lox}}},
              {"budgets", {{"max_words", c.max_words}, {"max_power", c.max_power}, {"mc_samples", c.mc_samples}}},
              {"r", c.r},
              {"eps", c.eps},
              {"workers", c.workers},
              {"io", {{"out_dir", c.out_dir}}}};
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw InvalidInput("unknown config key '" + k + "' in " + where);
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j, RunConfig c) {
  reject_unknown(j, {"n", "seed", "tolerances", "budgets", "r", "eps", "workers", "io"}, "config");
  read(j, "n", c.n);
  read(j, "seed", c.seed);
  read(j, "r", c.r);
  read(j, "eps", c.eps);
  read(j, "workers", c.workers);
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    reject_unknown(t, {"tol_det", "tol_minor", "tol_recon", "tol_id", "tol_lox"}, "tolerances");
    read(t, "tol_det", c.tol.tol_det);
    read(t, "tol_minor", c.tol.tol_minor);
    read(t, "tol_recon", c.tol.tol_recon);
    read(t, "tol_id", c.tol.tol_id);
    read(t, "tol_lox", c.tol.tol_lox);
  }
  if (j.contains("budgets")) {
    const json& b = j["budgets"];
    reject_unknown(b, {"max_words", "max_power", "mc_samples"}, "budgets");
    read(b, "max_words", c.max_words);
    read(b, "max_power", c.max_power);
    read(b, "mc_samples", c.mc_samples);
  }
  if (j.contains("io")) {
    reject_unknown(j["io"], {"out_dir"}, "io");
    read(j["io"], "out_dir", c.out_dir);
  }
  if (c.n < 2 || c.n > 8) throw InvalidInput("n must lie in [2, 8]");
  if (!(c.eps > 0 && c.eps <= c.r)) throw InvalidInput("need 0 < eps <= r");
  if (c.max_power < 1 || c.mc_samples < 1 || c.max_words < 1) throw InvalidInput("budgets must be positive");
  return c;
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("workers");
  j.erase("io");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Accumulates the worst residual of one identity.
struct Tally {
  Tally(std::string n, double b) : name(std::move(n)), bound(b) {}
  std::string name;
  double bound;
  std::size_t instances = 0;
  double worst = 0.0;
  bool failed = false;
  std::string note;

  void add(double residual) {
    ++instances;
    if (!(residual <= bound)) failed = true;
    if (std::isnan(residual)) worst = INFINITY;
    else worst = std::max(worst, residual);
  }
  IdentityResult result() const { return {name, instances, worst, bound, !failed && instances > 0, note, 0.0}; }
};

// Gaussian SL(n) element with 2-norm condition number at most max_cond.
GroupElement random_sl(int n, Rng& rng, double max_cond) {
  std::normal_distribution<double> nd;
  for (;;) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
    const Eigen::JacobiSVD<Mat> svd(g);
    if (svd.singularValues()[0] / svd.singularValues()[n - 1] > max_cond) continue;
    return GroupElement::projected(g);
  }
}

AMElement random_am(int n, Rng& rng) {
  std::normal_distribution<double> nd;
  Vec a(n);
  for (int i = 0; i < n; ++i) a[i] = nd(rng);
  std::vector<int> s(n, 1);
  for (int i = 0; i + 1 < n; ++i)
    if (rng() % 2) s[i] = -s[i], s[n - 1] = -s[n - 1];
  return {CartanVector::recentered(a), SignVector(s)};
}

Section random_section(int n, Rng& rng, const std::vector<Flag>& must) {
  for (;;) {
    const Flag base = random_flag(n, rng);
    bool ok = true;
    for (const Flag& f : must) ok = ok && cell_margin(f, base) > 0.05;
    if (!ok) continue;
    if (rng() % 2) return Section::unipotent(base, random_am(n, rng));
    return Section::compact(base, random_am(n, rng).m);
  }
}

double am_residual(const AMElement& x, const AMElement& y) { return am_distance(x, y); }

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

Mat expd(const CartanVector& a) { return a.coords().array().exp().matrix().asDiagonal(); }

// Loxodromic element: conjugate of a core with spread log moduli and random signs.
GroupElement random_loxodromic(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.3, 0.8);
  std::normal_distribution<double> nd;
  Vec d(n);
  double x = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    d[i] = std::exp(x);
    x += u(rng);
  }
  if (rng() % 2) d[0] = -d[0], d[n - 1] = -d[n - 1];
  Mat c = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) += 0.5 * nd(rng);
  c = GroupElement::projected(c).matrix();
  return GroupElement::projected(c * d.asDiagonal() * c.inverse());
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) { return seed * 0x9e3779b97f4a7c15ULL + salt; }

double delta_hat(const RunConfig& cfg, int n) {
  DeltaOptions opt;
  opt.n = n;
  opt.r = cfg.r;
  opt.eps = cfg.eps;
  opt.mc_samples = cfg.mc_samples;
  opt.seed = cfg.seed;
  opt.workers = cfg.workers;
  return delta_r_eps(opt, cfg.tol);
}

}  // namespace

std::vector<IdentityResult> suite_decompositions(const RunConfig& cfg) {
  Rng rng(mix(cfg.seed, 1));
  const double tol = cfg.tol.tol_recon;
  Tally kan{"kan-roundtrip", tol}, kanm{"kan-minus-roundtrip", tol}, kak{"kak-roundtrip", tol},
      lu{"bruhat-lu-roundtrip", tol};
  for (int t = 0; t < 1000; ++t) {
    const GroupElement g = random_sl(cfg.n, rng, 1e3);
    const Mat& m = g.matrix();
    const auto a = iwasawa_kan(g);
    kan.add(rel(a.k * expd(a.a) * a.u, m));
    const auto b = iwasawa_kan_minus(g);
    kanm.add(rel(b.k * expd(b.a) * b.u, m));
    const auto c = cartan_kak(g);
    kak.add(rel(c.k1 * expd(c.a) * c.k2, m));
    const auto d = bruhat_lu(g, cfg.tol);
    lu.add(rel(d.u_minus * d.x.matrix() * d.u_plus, m));
  }
  return {kan.result(), kanm.result(), kak.result(), lu.result()};
}

std::vector<IdentityResult> suite_cocycles(const RunConfig& cfg) {
  Rng rng(mix(cfg.seed, 2));
  const int n = cfg.n;
  const double tol = cfg.tol.tol_id;
  Tally rel_{"cocycle-relation", tol}, chasles{"transition-chasles", tol}, bridge{"bridge-identity", tol};
  for (int t = 0; t < 200; ++t) {
    const Flag xi = random_flag(n, rng);
    const GroupElement g = random_sl(n, rng, 100.0), h = random_sl(n, rng, 100.0);
    const Flag hxi = act(h, xi), ghxi = act(g * h, xi);
    const Section si = random_section(n, rng, {xi}), sj = random_section(n, rng, {hxi}),
                  sk = random_section(n, rng, {ghxi});
    const AMElement bij = cocycle(sj, si, h, xi, cfg.tol);
    rel_.add(am_residual(cocycle(sk, si, g * h, xi, cfg.tol), cocycle(sk, sj, g, hxi, cfg.tol) * bij));

    const Section s2 = random_section(n, rng, {xi}), s3 = random_section(n, rng, {xi});
    chasles.add(am_residual(transition(si, s2, xi, cfg.tol) * transition(s2, s3, xi, cfg.tol),
                            transition(si, s3, xi, cfg.tol)));

    const Section si2 = random_section(n, rng, {xi}), sj2 = random_section(n, rng, {hxi});
    bridge.add(am_residual(cocycle(sj2, si2, h, xi, cfg.tol),
                           transition(sj2, sj, hxi, cfg.tol) * bij * transition(si, si2, xi, cfg.tol)));
  }
  return {rel_.result(), chasles.result(), bridge.result()};
}

std::vector<IdentityResult> suite_hopf(const RunConfig& cfg) {
  Rng rng(mix(cfg.seed, 3));
  const int n = cfg.n;
  Tally hopf{"hopf-compatibility", cfg.tol.tol_recon};
  for (int t = 0; t < 200; ++t) {
    const Flag xi = random_flag(n, rng);
    const GroupElement h = random_sl(n, rng, 100.0);
    const Section c0 = Section::compact(random_section(n, rng, {xi}).base, random_am(n, rng).m);
    const Section c1 = Section::compact(random_section(n, rng, {act(h, xi)}).base, random_am(n, rng).m);
    const CartanVector sigma = iwasawa_cocycle(h, xi);
    // Both against the cocycle and against a dense KAN of h rep(xi).
    hopf.add((cocycle(c1, c0, h, xi, cfg.tol).a - sigma).coords().norm());
    hopf.add((iwasawa_kan(GroupElement::trusted(h.matrix() * xi.rep())).a - sigma).coords().norm());
  }
  return {hopf.result()};
}

std::vector<IdentityResult> suite_loxodromic(const RunConfig& cfg) {
  Rng rng(mix(cfg.seed, 4));
  const double tol = cfg.tol.tol_id;
  Tally sigma{"sigma-at-attracting-flag", tol}, exact{"exact-cocycle-formula", tol},
      apart{"jordan-a-part", tol}, count{"loxodromic-classified", 0.0};
  std::size_t classified = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 7;  // n = 2..8
    std::optional<LoxodromicData> lo;
    try {
      lo = classify(random_loxodromic(n, rng), cfg.tol);
    } catch (const NotLoxodromic&) {
      continue;
    }
    const LoxodromicData& l = *lo;
    ++classified;
    sigma.add((iwasawa_cocycle(l.g, l.attracting) - l.lambda).coords().norm());
    const Section s = random_section(n, rng, {l.attracting});
    apart.add((extended_jordan(s, l, cfg.tol).a - l.lambda).coords().norm());
    // Exact formula for beta(g^p, xi) through the ratio maps, sections through xi, g^p xi.
    const Flag xi = sample_deep_flags(l.repelling, 0.1, 1, rng).front();
    const Section s0 = random_section(n, rng, {xi});
    for (int p = 1; p <= 8; ++p) {
      const Flag gpxi = act(l.g.pow(p), xi);
      const Section s2 = random_section(n, rng, {gpxi});
      exact.add(am_residual(cocycle(s2, s0, l.g.pow(p), xi, cfg.tol), cocycle_via_jordan(l, p, xi, s0, s, s2, cfg.tol)));
    }
  }
  count.instances = classified;
  count.failed = classified < 100;
  count.worst = 100.0 - static_cast<double>(classified);
  count.note = "shortfall from 100 classified elements";
  return {sigma.result(), exact.result(), apart.result(), count.result()};
}

std::vector<IdentityResult> suite_prop_crucial(const RunConfig& cfg) {
  struct Case {
    std::string name;
    std::vector<GroupElement> seeds;
    std::vector<int> powers;
  };
  std::vector<IdentityResult> out;
  for (const Case& c : {Case{"sl2-pair", sl2_pair(), {3, 3}}, Case{"sl3-triple", sl3_triple(), {2, 3, 2}}}) {
    const int n = c.seeds.front().n();
    std::vector<LoxodromicData> fam;
    for (const auto& g : c.seeds)
      fam.push_back(certify_smallest_power(classify(g, cfg.tol), cfg.r, cfg.eps, cfg.max_power, 200, cfg.tol).data);
    std::vector<Section> secs{Section::compact(fam.front().repelling)};
    for (const auto& l : fam) secs.push_back(Section::compact(l.repelling));
    Rng rng(mix(cfg.seed, 5));
    const Flag xi0 = sample_deep_flags(fam.front().repelling, 0.5, 1, rng).front();
    const double delta = 1.5 * delta_hat(cfg, n);
    const auto rep = product_estimate(fam, c.powers, xi0, secs, cfg.r, cfg.eps, delta, cfg.tol);
    const double l = static_cast<double>(fam.size());
    Tally att{"prop-crucial-" + c.name + "-attracting", cfg.eps}, repl{"prop-crucial-" + c.name + "-repelling", cfg.eps},
        beta{"prop-crucial-" + c.name + "-beta", (2 * l - 1) * delta},
        jor{"prop-crucial-" + c.name + "-jordan", 2 * l * delta};
    att.add(rep.attracting_distance);
    repl.add(rep.repelling_distance);
    beta.add(rep.beta_distance);
    jor.add(rep.jordan_distance);
    for (Tally* t : {&att, &repl, &beta, &jor}) {
      t->note = "delta = 1.5 x seeded estimate";
      out.push_back(t->result());
    }
  }
  return out;
}

std::vector<IdentityResult> suite_sign_group(const RunConfig& cfg) {
  const auto fam = build_schottky(sl3_sign_family(), cfg.r, cfg.eps, cfg.max_power, cfg.tol);
  const auto rep = sign_group(fam, 4, cfg.max_words, cfg.workers, cfg.tol);
  const auto stable = sign_group(fam, 6, cfg.max_words, cfg.workers, cfg.tol);
  Tally order{"sign-group-order", 0.0};
  order.add(std::abs(static_cast<double>(rep.order) - 4.0));
  order.note = "order " + std::to_string(rep.order) + ", stable at length 6: " + std::to_string(stable.order);
  if (stable.order != rep.order) order.failed = true;
  Tally dec{"decorrelation-components", 0.0};
  const auto d = decorrelation_discret_check(fam, rep, 2, cfg.tol);
  std::set<std::uint64_t> seen;
  for (const auto& row : d.rows) {
    seen.insert(row.attained.mask());
    dec.add(row.match ? 0.0 : 1.0);
  }
  dec.note = std::to_string(seen.size()) + " of 4 components attained";
  if (seen.size() != 4 || !d.pass) dec.failed = true;
  return {order.result(), dec.result()};
}

std::vector<IdentityResult> suite_density(const RunConfig& cfg) {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const std::vector<TorusPoint> e{TorusPoint(Vec::Constant(1, 1.0), Vec::Constant(1, 0.0)),
                                  TorusPoint(Vec::Constant(1, std::sqrt(2.0)), Vec::Constant(1, golden))};
  DensityOptions opt;
  opt.workers = cfg.workers;
  Tally sel{"density-select-covering", 0.1}, size{"density-select-size", 5.0}, cone{"density-cone-covering", 0.1},
      agree{"density-reverification", 0.0};
  try {
    const auto c = select_dense_subgroup_generators(e, 0.1, Box::cube(1, -5, 5), opt);
    sel.add(c.worst_distance);
    size.add(static_cast<double>(c.subset.size()));
    agree.add(verify_certificate(c) == c.covered ? 0.0 : 1.0);
  } catch (const NotDenseAtBudget& ex) {
    sel.add(INFINITY);
    sel.note = ex.what();
  }
  try {
    const auto c = semigroup_cone_density(e, 0.1, Box::cube(1, -5, 5), opt);
    cone.add(c.worst_distance);
    cone.note = "v_F = " + std::to_string(c.v_F[0]);
    agree.add(verify_certificate(c) == c.covered ? 0.0 : 1.0);
  } catch (const NotDenseAtBudget& ex) {
    cone.add(INFINITY);
    cone.note = ex.what();
  }
  return {sel.result(), size.result(), cone.result(), agree.result()};
}

std::vector<IdentityResult> suite_mix_probe(const RunConfig& cfg) {
  const auto fam = build_schottky(sl3_cone_family(), cfg.r, cfg.eps, cfg.max_power, cfg.tol);
  int len = 1;
  std::size_t total = 3;
  while (total + std::pow(3.0, len + 1) <= static_cast<double>(cfg.max_words)) total += std::pow(3.0, ++len);
  const auto words = enumerate_words(fam, len, cfg.max_words, cfg.workers, cfg.tol);
  const auto cone = cone_from_words(words, 3, len);
  const Vec a = cone.hull[0].coords(), b = cone.hull[1].coords();
  const CartanVector inside = CartanVector::recentered(a + b);
  const CartanVector outside = CartanVector::recentered(a + 0.8 * (a - b));
  const auto in = jordan_line_density_probe(words, cone, inside, 40.0, 120.0, 2.0);
  const auto out = jordan_line_density_probe(words, cone, outside, 40.0, 120.0, 2.0);
  Tally contrast{"mix-probe-contrast", 0.0};
  // Residual: how far the interior count falls short of 5 times the exterior count.
  contrast.add(std::max(0.0, 5.0 * static_cast<double>(out.hits) - static_cast<double>(in.hits)));
  if (!in.theta_interior || out.theta_interior || in.hits == 0) contrast.failed = true;
  contrast.note = std::to_string(words.size()) + " words up to length " + std::to_string(len) + "; hits " +
                  std::to_string(in.hits) + " inside, " + std::to_string(out.hits) + " outside";
  return {contrast.result()};
}

namespace {

using SuiteFn = std::vector<IdentityResult> (*)(const RunConfig&);
const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"decompositions", suite_decompositions}, {"cocycles", suite_cocycles},   {"hopf", suite_hopf},
      {"loxodromic", suite_loxodromic},         {"prop-crucial", suite_prop_crucial},
      {"sign-group", suite_sign_group},         {"density", suite_density},     {"mix-probe", suite_mix_probe}};
  return r;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

VerifyReport run_verify(const RunConfig& cfg, const std::vector<std::string>& suites) {
  std::vector<std::string> wanted = suites;
  if (wanted.empty() || (wanted.size() == 1 && wanted[0] == "all")) wanted = suite_names();
  VerifyReport report;
  report.config = cfg;
  for (const auto& w : wanted) {
    SuiteFn fn = nullptr;
    for (const auto& [name, f] : registry())
      if (name == w) fn = f;
    if (!fn) throw InvalidInput("unknown suite '" + w + "'");
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<IdentityResult> rows;
    try {
      rows = fn(cfg);
    } catch (const Error& e) {
      rows = {IdentityResult{w, 0, INFINITY, 0.0, false, e.what(), 0.0}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : rows) {
      r.seconds = secs;
      report.pass = report.pass && r.pass;
      report.results.push_back(std::move(r));
    }
  }
  return report;
}

json report_json(const VerifyReport& report, const std::string& timestamp) {
  json ids = json::array();
  json timing = json::object();
  for (const auto& r : report.results) {
    json row{{"name", r.name},
             {"instances", r.instances},
             {"max_residual", std::isfinite(r.max_residual) ? json(r.max_residual) : json("inf")},
             {"bound", r.bound},
             {"pass", r.pass}};
    if (!r.note.empty()) row["note"] = r.note;
    ids.push_back(row);
    timing[r.name] = r.seconds;
  }
  return json{{"config", to_json(report.config)},
              {"config_hash", config_hash(report.config)},
              {"identities", ids},
              {"pass", report.pass},
              {"timing", timing},
              {"timestamp", timestamp}};
}

json strip_volatile(json j) {
  j.erase("timing");
  j.erase("timestamp");
  if (j.contains("config")) j["config"].erase("workers");
  return j;
}

}  // namespace chamberflow
