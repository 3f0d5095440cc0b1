#pragma once

#include "chamberflow/density.hpp"
#include "chamberflow/loxodromy.hpp"
#include "chamberflow/schottky.hpp"

#include "json.hpp"

#include <string>

namespace chamberflow {

using nlohmann::json;

// Serializes with every float as %.17g; non-finite floats become null.
std::string dump_json(const json& j, int indent = 2);
// Reads a file and parses it; InvalidInput with the parser message on failure.
json load_json_file(const std::string& path);

json matrix_json(const Mat& m);             // {"n", "rows"}
Mat matrix_from_json(const json& j);        // accepts {"n", "rows"} or a bare array of rows
GroupElement group_element_from_json(const json& j, const Config& cfg = Config::defaults());
json flag_json(const Flag& f);              // {"rep", "canonical"}
Flag flag_from_json(const json& j);         // {"rep": matrix} or a bare matrix; orthonormalized by columns
json am_json(const AMElement& x);           // {"a", "m"}
json vec_json(const Vec& v);
json lox_json(const LoxodromicData& l);

json certificate_json(const REpsCertificate& c);
json family_json(const SchottkyFamily& fam);
json sign_group_json(const SignGroupReport& r);
json decorrelation_json(const DecorrelationReport& r);
json probe_json(const ProbeReport& r);
json cone_json(const ConeEstimate& c);

// Torus points: [{"v": [...], "c": [...]}, ...] ("c" optional).
std::vector<TorusPoint> torus_points_from_json(const json& j);
json density_json(const DensityCertificate& c);

// CSV of cone samples: word_id, length, lambda_1..lambda_n, dir_x, dir_y.
std::string cone_csv(const std::vector<WordRecord>& words, int n);
// Deterministic SVG of the cross-section of the chamber for n = 3: walls, samples, hull.
std::string cone_svg(const std::vector<WordRecord>& words, const ConeEstimate& cone);

}  // namespace chamberflow
