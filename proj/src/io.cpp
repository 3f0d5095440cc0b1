#include "chamberflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chamberflow {

namespace {

void emit(const json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += pad + json(k).dump() + (indent > 0 ? ": " : ":");
        emit(v, indent, depth + 1, out);
      }
      out += close + '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",";
        if (!flat) out += pad;
        emit(j[i], indent, depth + 1, out);
      }
      out += (flat ? "" : close) + ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>() + 0.0;  // folds -0 into 0
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  return out + "\n";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("'" + path + "': " + e.what());
  }
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return json{{"n", m.rows()}, {"rows", rows}};
}

Mat matrix_from_json(const json& j) {
  try {
    const json& rows = j.is_object() ? j.at("rows") : j;
    if (!rows.is_array() || rows.empty()) throw InvalidInput("matrix rows must be a non-empty array");
    const int n = static_cast<int>(rows.size());
    if (j.is_object() && j.contains("n") && j.at("n").get<int>() != n) throw InvalidInput("matrix 'n' does not match rows");
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) throw InvalidInput("matrix must be square");
      for (int k = 0; k < n; ++k) m(i, k) = rows[i][k].get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("matrix JSON: ") + e.what());
  }
}

GroupElement group_element_from_json(const json& j, const Config& cfg) { return GroupElement(matrix_from_json(j), cfg); }

json flag_json(const Flag& f) { return json{{"rep", matrix_json(f.rep())}, {"canonical", true}}; }

Flag flag_from_json(const json& j) {
  const json& m = j.is_object() && j.contains("rep") ? j.at("rep") : j;
  return Flag::from_columns(matrix_from_json(m));
}

json am_json(const AMElement& x) { return json{{"a", vec_json(x.a.coords())}, {"m", x.m.signs()}}; }

json lox_json(const LoxodromicData& l) {
  return json{{"lambda", vec_json(l.lambda.coords())},
              {"signs", l.signs.signs()},
              {"attracting", flag_json(l.attracting)},
              {"repelling", flag_json(l.repelling)},
              {"gap", l.gap}};
}

json certificate_json(const REpsCertificate& c) {
  return json{{"r", c.r},
              {"eps", c.eps},
              {"margin", c.margin},
              {"max_image_distance", c.max_image_distance},
              {"lipschitz_bound", c.lipschitz_bound},
              {"analytic_decay", c.analytic_decay},
              {"samples", c.samples}};
}

json family_json(const SchottkyFamily& fam) {
  json gens = json::array();
  for (int i = 0; i < fam.size(); ++i) {
    json g = lox_json(fam.generators[i]);
    g["power"] = fam.powers[i];
    g["certificate"] = certificate_json(fam.certificates[i]);
    gens.push_back(g);
  }
  json margins = json::array();
  for (int i = 0; i < fam.pairwise_margins.rows(); ++i) margins.push_back(vec_json(fam.pairwise_margins.row(i).transpose()));
  return json{{"r", fam.r}, {"eps", fam.eps}, {"generators", gens}, {"pairwise_margins", margins}};
}

json sign_group_json(const SignGroupReport& r) {
  json basis = json::array();
  for (std::size_t i = 0; i < r.basis.size(); ++i)
    basis.push_back(json{{"m", r.basis[i].signs()}, {"witness", r.witnesses[i]}});
  return json{{"p", r.p},
              {"order", r.order},
              {"basis", basis},
              {"words_scanned", r.words_scanned},
              {"all_positive", r.all_positive}};
}

json decorrelation_json(const DecorrelationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"nu", row.nu}, {"attained", row.attained.signs()}, {"expected", row.expected.signs()}, {"match", row.match}});
  return json{{"p", r.p}, {"n", r.n}, {"rows", rows}, {"pass", r.pass}};
}

json probe_json(const ProbeReport& r) {
  return json{{"theta", vec_json(r.theta.coords())},
              {"lo", r.lo},
              {"hi", r.hi},
              {"delta0", r.delta0},
              {"theta_interior", r.theta_interior},
              {"words", r.words},
              {"hits", r.hits},
              {"max_gap", r.max_gap},
              {"mean_gap", r.mean_gap}};
}

json cone_json(const ConeEstimate& c) {
  json hull = json::array();
  for (const auto& h : c.hull) hull.push_back(vec_json(h.coords()));
  return json{{"word_length", c.word_length},
              {"rays", c.rays.size()},
              {"hull", hull},
              {"hull_supported", c.hull_supported},
              {"containment_residual", c.containment_residual}};
}

std::vector<TorusPoint> torus_points_from_json(const json& j) {
  try {
    const json& pts = j.is_object() ? j.at("points") : j;
    if (!pts.is_array() || pts.empty()) throw InvalidInput("points must be a non-empty array");
    std::vector<TorusPoint> out;
    for (const auto& p : pts) {
      const auto v = p.at("v").get<std::vector<double>>();
      const auto c = p.contains("c") ? p.at("c").get<std::vector<double>>() : std::vector<double>{};
      out.emplace_back(Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size())),
                       Eigen::Map<const Vec>(c.data(), static_cast<long>(c.size())));
    }
    return out;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("points JSON: ") + e.what());
  }
}

json density_json(const DensityCertificate& c) {
  json subset = json::array();
  for (std::size_t i = 0; i < c.subset.size(); ++i) {
    json s{{"index", c.subset_index[i]}, {"v", vec_json(c.subset[i].v)}, {"c", vec_json(c.subset[i].c)}};
    if (i < c.subset_words.size()) s["word"] = c.subset_words[i];
    subset.push_back(s);
  }
  json out{{"kind", c.semigroup ? "cone" : "select"},
           {"delta", c.delta},
           {"grid_step", c.grid_step},
           {"coeff_bound", c.coeff_bound},
           {"covered", c.covered},
           {"subset", subset},
           {"window", {{"lo", vec_json(c.window.lo)}, {"hi", vec_json(c.window.hi)}}},
           {"cells", c.cells.size()},
           {"worst_distance", c.worst_distance},
           {"max_coeff", c.max_coeff}};
  if (c.semigroup) {
    out["v_F"] = vec_json(c.v_F);
    out["max_factors"] = c.max_factors;
  }
  if (!std::isnan(c.threshold)) out["threshold"] = c.threshold;
  if (!std::isnan(c.inflated_delta)) out["inflated_delta"] = c.inflated_delta;
  return out;
}

std::string cone_csv(const std::vector<WordRecord>& words, int n) {
  std::ostringstream os;
  os << "word_id,length";
  for (int i = 1; i <= n; ++i) os << ",lambda_" << i;
  os << ",dir_x,dir_y\n";
  char buf[32];
  const auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!words[i].loxodromic) continue;
    const auto& l = words[i].lambda;
    os << i << ',' << words[i].word.size();
    for (int k = 0; k < n; ++k) os << ',' << num(l[k]);
    const auto [x, y] = plot_coords(l);
    os << ',' << num(x) << ',' << num(y) << '\n';
  }
  return os.str();
}

std::string cone_svg(const std::vector<WordRecord>& words, const ConeEstimate& cone) {
  const double size = 400.0, scale = 180.0;
  const auto px = [&](double x, double y) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", size / 2 + scale * x, size / 2 - scale * y);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  os << "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  // Walls of the positive chamber: x1 = x2 and x2 = x3.
  const CartanVector w1 = CartanVector::recentered((Vec(3) << 1.0, 1.0, -2.0).finished());
  const CartanVector w2 = CartanVector::recentered((Vec(3) << 2.0, -1.0, -1.0).finished());
  for (const auto& w : {w1, w2}) {
    const auto [x, y] = plot_coords(w);
    os << "<polyline points=\"" << px(0, 0) << ' ' << px(x, y) << "\" stroke=\"gray\" fill=\"none\"/>\n";
  }
  for (const auto& w : words) {
    if (!w.loxodromic) continue;
    const auto [x, y] = plot_coords(w.lambda);
    const std::string p = px(x, y);
    const auto comma = p.find(',');
    os << "<circle cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1) << "\" r=\"1.5\" fill=\"steelblue\"/>\n";
  }
  if (!cone.hull.empty()) {
    os << "<polyline points=\"" << px(0, 0);
    for (const auto& h : cone.hull) {
      const auto [x, y] = plot_coords(h);
      os << ' ' << px(x, y);
    }
    os << ' ' << px(0, 0) << "\" stroke=\"firebrick\" fill=\"none\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace chamberflow
