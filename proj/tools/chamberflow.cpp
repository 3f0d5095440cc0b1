// chamberflow command line: one subcommand per module, JSON reports, exit codes
// 0 = success, 1 = failed identity or mathematical refusal, 2 = configuration or input error.

#include "CLI11.hpp"

#include "chamberflow/density.hpp"
#include "chamberflow/fixtures.hpp"
#include "chamberflow/io.hpp"
#include "chamberflow/verify.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace chamberflow;

namespace {

struct Globals {
  std::string config_path;
  int n = 3;
  std::uint64_t seed = 42;
  int workers = 0;
  int max_power = 40;
  std::size_t max_words = 200000;
  int mc_samples = 10000;
  double r = 0.15, eps = 0.05;
  std::string out_dir = ".";
  CLI::Option* n_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* max_power_opt = nullptr;
  CLI::Option* max_words_opt = nullptr;
  CLI::Option* mc_opt = nullptr;
  CLI::Option* r_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

// Defaults, then flags, then the config file, then CHAMBERFLOW_SEED.
RunConfig resolve(const Globals& g) {
  RunConfig c;
  if (g.n_opt->count()) c.n = g.n;
  if (g.seed_opt->count()) c.seed = g.seed;
  if (g.workers_opt->count()) c.workers = g.workers;
  if (g.max_power_opt->count()) c.max_power = g.max_power;
  if (g.max_words_opt->count()) c.max_words = g.max_words;
  if (g.mc_opt->count()) c.mc_samples = g.mc_samples;
  if (g.r_opt->count()) c.r = g.r;
  if (g.eps_opt->count()) c.eps = g.eps;
  if (g.out_opt->count()) c.out_dir = g.out_dir;
  c = run_config_from_json(g.config_path.empty() ? json::object() : load_json_file(g.config_path), c);
  if (const char* env = std::getenv("CHAMBERFLOW_SEED")) {
    try {
      std::size_t pos = 0;
      c.seed = std::stoull(env, &pos);
      if (env[pos] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InvalidInput(std::string("CHAMBERFLOW_SEED is not an unsigned integer: ") + env);
    }
  }
  return c;
}

void emit(json report, const RunConfig& cfg, const std::string& path) {
  report["config_hash"] = config_hash(cfg);
  const std::string text = dump_json(report);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<GroupElement> fixture(const std::string& name) {
  if (name == "sl2-pair") return sl2_pair();
  if (name == "sl2-negative-pair") return sl2_negative_pair();
  if (name == "sl2-irrational-pair") return sl2_irrational_pair();
  if (name == "sl3-triple") return sl3_triple();
  if (name == "sl3-sign-family") return sl3_sign_family();
  if (name == "sl3-cone-family") return sl3_cone_family();
  throw InvalidInput("unknown fixture '" + name + "'");
}

struct FamilyArgs {
  std::string input;
  std::string fixture = "sl3-triple";
  std::string json_path;
};

void add_family_args(CLI::App* app, FamilyArgs& a) {
  app->add_option("--input", a.input, "JSON array of generator matrices");
  app->add_option("--fixture", a.fixture,
                  "sl2-pair, sl2-negative-pair, sl2-irrational-pair, sl3-triple, sl3-sign-family, sl3-cone-family");
  app->add_option("--json", a.json_path, "write the report here instead of stdout");
}

SchottkyFamily family(const FamilyArgs& a, const RunConfig& cfg) {
  std::vector<GroupElement> seeds;
  if (!a.input.empty()) {
    const json j = load_json_file(a.input);
    if (!j.is_array() || j.empty()) throw InvalidInput("generator file must hold a non-empty array of matrices");
    for (const auto& m : j) seeds.push_back(group_element_from_json(m, cfg.tol));
  } else {
    seeds = fixture(a.fixture);
  }
  return build_schottky(seeds, cfg.r, cfg.eps, cfg.max_power, cfg.tol);
}

Section section_from(const std::string& path, const std::string& kind) {
  const Flag base = flag_from_json(load_json_file(path));
  if (kind == "compact") return Section::compact(base);
  if (kind == "unipotent") return Section::unipotent(base);
  throw InvalidInput("section kind must be compact or unipotent");
}

std::pair<double, double> parse_window(const std::string& s) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument("no comma");
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw InvalidInput("window must be 'a,b', got '" + s + "'");
  }
}

CartanVector parse_theta(const std::string& s, int n) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw InvalidInput("theta must be comma separated numbers");
  }
  if (static_cast<int>(v.size()) != n) throw InvalidInput("theta must have n entries");
  return CartanVector::recentered(Eigen::Map<Vec>(v.data(), n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chamberflow: Weyl chamber flow computations for SL(n, R)"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration (overrides flags)");
  g.n_opt = app.add_option("--n", g.n, "matrix size");
  g.seed_opt = app.add_option("--seed", g.seed, "random seed (CHAMBERFLOW_SEED overrides)");
  g.workers_opt = app.add_option("--workers", g.workers, "worker threads, 0 = all cores");
  g.max_power_opt = app.add_option("--max-power", g.max_power, "power budget for (r, eps) certification");
  g.max_words_opt = app.add_option("--max-words", g.max_words, "word enumeration budget");
  g.mc_opt = app.add_option("--mc-samples", g.mc_samples, "Monte-Carlo samples for the equicontinuity estimate");
  g.r_opt = app.add_option("--r", g.r, "basin depth r");
  g.eps_opt = app.add_option("--eps", g.eps, "contraction eps");
  g.out_opt = app.add_option("--out-dir", g.out_dir, "directory for CSV and SVG files");

  std::function<int()> run;

  // decompose
  std::string mat_path, kind = "all", json_path;
  auto* dec = app.add_subcommand("decompose", "KAN, KAN-, KAK and Bruhat-LU of a matrix");
  dec->add_option("matfile", mat_path)->required();
  dec->add_option("--kind", kind, "kan, kan-minus, kak, bruhat or all");
  dec->add_option("--json", json_path);
  dec->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(g);
      const GroupElement x = group_element_from_json(load_json_file(mat_path), cfg.tol);
      json out;
      const auto diag = [](const CartanVector& a) { return vec_json(a.coords()); };
      if (kind == "kan" || kind == "all") {
        const auto t = iwasawa_kan(x);
        out["kan"] = {{"k", matrix_json(t.k)}, {"a", diag(t.a)}, {"u", matrix_json(t.u)}};
      }
      if (kind == "kan-minus" || kind == "all") {
        const auto t = iwasawa_kan_minus(x);
        out["kan_minus"] = {{"k", matrix_json(t.k)}, {"a", diag(t.a)}, {"u", matrix_json(t.u)}};
      }
      if (kind == "kak" || kind == "all") {
        const auto t = cartan_kak(x);
        out["kak"] = {{"k1", matrix_json(t.k1)}, {"a", diag(t.a)}, {"k2", matrix_json(t.k2)}};
      }
      if (kind == "bruhat" || kind == "all") {
        const auto t = bruhat_lu(x, cfg.tol);
        out["bruhat"] = {{"u_minus", matrix_json(t.u_minus)}, {"x", am_json(t.x)}, {"u_plus", matrix_json(t.u_plus)}};
      }
      if (out.is_null()) throw InvalidInput("unknown decomposition kind '" + kind + "'");
      emit(out, cfg, json_path);
      return 0;
    };
  });

  // transverse
  std::string flag_a, flag_b;
  auto* tr = app.add_subcommand("transverse", "transversality of two flags");
  tr->add_option("A", flag_a)->required();
  tr->add_option("B", flag_b)->required();
  tr->add_option("--json", json_path);
  tr->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(g);
      const Flag a = flag_from_json(load_json_file(flag_a)), b = flag_from_json(load_json_file(flag_b));
      const bool t = is_transverse(a, b, cfg.tol);
      emit(json{{"transverse", t}, {"margin", cell_margin(a, b)}}, cfg, json_path);
      return t ? 0 : 1;
    };
  });

  // cocycle
  std::string s1_path, s0_path, g_path, xi_path, section_kind = "unipotent";
  auto* coc = app.add_subcommand("cocycle", "signed Iwasawa cocycle beta_{s1,s0}(g, xi)");
  coc->add_option("--s1", s1_path, "flag file: base of the target section")->required();
  coc->add_option("--s0", s0_path, "flag file: base of the source section")->required();
  coc->add_option("--g", g_path, "matrix file")->required();
  coc->add_option("--xi", xi_path, "flag file")->required();
  coc->add_option("--section-kind", section_kind, "unipotent or compact");
  coc->add_option("--json", json_path);
  coc->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(g);
      const Section s1 = section_from(s1_path, section_kind), s0 = section_from(s0_path, section_kind);
      const GroupElement x = group_element_from_json(load_json_file(g_path), cfg.tol);
      const AMElement b = cocycle(s1, s0, x, flag_from_json(load_json_file(xi_path)), cfg.tol);
      emit(am_json(b), cfg, json_path);
      return 0;
    };
  });

  // lox
  int lox_power = 0;
  auto* lox = app.add_subcommand("lox", "Jordan data and fixed flags of a loxodromic element");
  lox->add_option("matfile", mat_path)->required();
  lox->add_option("--certify-power", lox_power, "also find the smallest (r, eps)-certified power up to max-power");
  lox->add_option("--json", json_path);
  lox->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(g);
      const auto l = classify(group_element_from_json(load_json_file(mat_path), cfg.tol), cfg.tol);
      json out = lox_json(l);
      if (lox_power) {
        const auto cp = certify_smallest_power(l, cfg.r, cfg.eps, cfg.max_power, 200, cfg.tol);
        out["certified_power"] = cp.power;
        out["certificate"] = certificate_json(cp.cert);
      }
      emit(out, cfg, json_path);
      return 0;
    };
  });

  // schottky family commands, available both under `schottky` and at the top level.
  FamilyArgs fa;
  int max_len = 6, decor_n = 2;
  double lo = 40.0, hi = 120.0, delta0 = 2.0;
  std::string theta;
  auto* sch = app.add_subcommand("schottky", "strong (r, eps)-Schottky families");
  sch->require_subcommand(1);
  sch->fallthrough();
  const auto build_cmd = [&](CLI::App* parent) {
    auto* c = parent->add_subcommand("build", "certified powers and margins");
    add_family_args(c, fa);
    c->callback([&] {
      run = [&] {
        const RunConfig cfg = resolve(g);
        emit(family_json(family(fa, cfg)), cfg, fa.json_path);
        return 0;
      };
    });
  };
  const auto cone_cmd = [&](CLI::App* parent) {
    auto* c = parent->add_subcommand("limit-cone", "limit cone samples, cone.csv and cone.svg");
    add_family_args(c, fa);
    c->add_option("--max-len", max_len);
    c->callback([&] {
      run = [&] {
        const RunConfig cfg = resolve(g);
        const auto fam = family(fa, cfg);
        const auto words = enumerate_words(fam, max_len, cfg.max_words, cfg.workers, cfg.tol);
        const auto cone = cone_from_words(words, fam.n(), max_len);
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream(std::filesystem::path(cfg.out_dir) / "cone.csv") << cone_csv(words, fam.n());
        json out = cone_json(cone);
        out["csv"] = (std::filesystem::path(cfg.out_dir) / "cone.csv").string();
        if (fam.n() == 3) {
          std::ofstream(std::filesystem::path(cfg.out_dir) / "cone.svg") << cone_svg(words, cone);
          out["svg"] = (std::filesystem::path(cfg.out_dir) / "cone.svg").string();
        } else {
          std::cerr << "notice: cone.svg is drawn for n = 3 only; skipped for n = " << fam.n() << "\n";
        }
        emit(out, cfg, fa.json_path);
        return 0;
      };
    });
  };
  const auto sign_cmd = [&](CLI::App* parent) {
    auto* c = parent->add_subcommand("sign-group", "sign group of the family");
    add_family_args(c, fa);
    c->add_option("--max-len", max_len);
    c->callback([&] {
      run = [&] {
        const RunConfig cfg = resolve(g);
        emit(sign_group_json(sign_group(family(fa, cfg), max_len, cfg.max_words, cfg.workers, cfg.tol)), cfg,
             fa.json_path);
        return 0;
      };
    });
  };
  const auto decor_cmd = [&](CLI::App* parent) {
    auto* c = parent->add_subcommand("decor-check", "discrete decorrelation of the sign components");
    add_family_args(c, fa);
    c->add_option("--max-len", max_len);
    c->add_option("--power-n", decor_n, "base exponent n of the witness powers");
    c->callback([&] {
      run = [&] {
        const RunConfig cfg = resolve(g);
        const auto fam = family(fa, cfg);
        const auto rep = sign_group(fam, max_len, cfg.max_words, cfg.workers, cfg.tol);
        const auto d = decorrelation_discret_check(fam, rep, decor_n, cfg.tol);
        emit(decorrelation_json(d), cfg, fa.json_path);
        return d.pass ? 0 : 1;
      };
    });
  };
  const auto probe_cmd = [&](CLI::App* parent) {
    auto* c = parent->add_subcommand("mix-probe", "Jordan projection hits along a direction");
    add_family_args(c, fa);
    c->add_option("--max-len", max_len);
    c->add_option("--theta", theta, "direction, comma separated (default: middle of the cone)");
    c->add_option("--lo", lo);
    c->add_option("--hi", hi);
    c->add_option("--delta0", delta0);
    c->callback([&] {
      run = [&] {
        const RunConfig cfg = resolve(g);
        const auto fam = family(fa, cfg);
        const auto words = enumerate_words(fam, max_len, cfg.max_words, cfg.workers, cfg.tol);
        const auto cone = cone_from_words(words, fam.n(), max_len);
        CartanVector th;
        if (!theta.empty()) {
          th = parse_theta(theta, fam.n());
        } else {
          Vec sum = Vec::Zero(fam.n());
          for (const auto& ray : cone.rays) sum += ray.coords();
          th = CartanVector::recentered(sum);
        }
        emit(probe_json(jordan_line_density_probe(words, cone, th, lo, hi, delta0)), cfg, fa.json_path);
        return 0;
      };
    });
  };
  for (CLI::App* parent : {sch}) {
    build_cmd(parent);
    cone_cmd(parent);
    sign_cmd(parent);
    decor_cmd(parent);
    probe_cmd(parent);
  }
  cone_cmd(&app);
  sign_cmd(&app);
  decor_cmd(&app);
  probe_cmd(&app);

  // density
  std::string pts_path, window = "-5,5";
  double delta = 0.1;
  long coeff_bound = 1000;
  auto* den = app.add_subcommand("density", "dense subgroups and semigroup cones in V x torus");
  den->require_subcommand(1);
  den->fallthrough();
  for (const std::string mode : {"select", "cone"}) {
    auto* c = den->add_subcommand(mode, mode == "select" ? "subgroup generator selection" : "semigroup cone density");
    c->add_option("--input", pts_path, "JSON points [{\"v\": [...], \"c\": [...]}]")->required();
    c->add_option("--delta", delta);
    c->add_option("--window", window, "a,b: the window [a, b]^d");
    c->add_option("--coeff-bound", coeff_bound);
    c->add_option("--json", json_path);
    c->callback([&, mode] {
      run = [&, mode] {
        const RunConfig cfg = resolve(g);
        const auto pts = torus_points_from_json(load_json_file(pts_path));
        const auto [a, b] = parse_window(window);
        DensityOptions opt;
        opt.coeff_bound = coeff_bound;
        opt.workers = cfg.workers;
        const Box box = Box::cube(pts.front().d(), a, b);
        const auto cert = mode == "select" ? select_dense_subgroup_generators(pts, delta, box, opt)
                                           : semigroup_cone_density(pts, delta, box, opt);
        json out = density_json(cert);
        out["reverified"] = verify_certificate(cert);
        emit(out, cfg, json_path);
        return out["reverified"].get<bool>() ? 0 : 1;
      };
    });
  }
  auto* bridge = den->add_subcommand("jordan", "cone density of the Jordan projections of a family");
  add_family_args(bridge, fa);
  bridge->add_option("--delta", delta);
  bridge->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(g);
      const auto fam = family(fa, cfg);
      DeltaOptions dopt;
      dopt.n = fam.n();
      dopt.r = cfg.r;
      dopt.eps = cfg.eps;
      dopt.mc_samples = cfg.mc_samples;
      dopt.seed = cfg.seed;
      dopt.workers = cfg.workers;
      BridgeOptions opt;
      opt.delta_hat = 1.5 * delta_r_eps(dopt, cfg.tol);
      opt.density.workers = cfg.workers;
      const auto cert = jordan_density_bridge(fam, delta, opt);
      json out = density_json(cert);
      out["delta_hat"] = opt.delta_hat;
      out["reverified"] = verify_certificate(cert);
      emit(out, cfg, fa.json_path);
      return out["reverified"].get<bool>() ? 0 : 1;
    };
  });

  // verify
  std::vector<std::string> suites;
  auto* ver = app.add_subcommand("verify", "run the identity suites");
  ver->add_option("suites", suites, "suite names (default: all)");
  ver->add_option("--json", json_path);
  ver->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(g);
      const auto report = run_verify(cfg, suites);
      emit(report_json(report, timestamp()), cfg, json_path);
      return report.pass ? 0 : 1;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return run ? run() : 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
