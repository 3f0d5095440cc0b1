#pragma once

#include "chamberflow/flags.hpp"

#include <vector>

namespace chamberflow {

// diag(d) as a group element; d must have product 1.
GroupElement diagonal_element(const std::vector<double>& d);
// c g c^T for a rotation c.
GroupElement conjugated(const GroupElement& g, const Mat& c);

// Conjugates of the given diagonal cores by rotations from a seeded search that maximizes the
// smallest cell margin d(g_i+, boundary of b(g_j-)) over all ordered pairs, i = j included.
std::vector<GroupElement> spread_conjugates(const std::vector<GroupElement>& cores, std::uint64_t seed, int trials);

// diag(9, 1/9) and its conjugate by the rotation of angle pi/4 (orthogonal axes in the disc model).
std::vector<GroupElement> sl2_pair();
// Same axes, with the second generator negated (negative trace).
std::vector<GroupElement> sl2_negative_pair();
// diag(9, 1/9) and a conjugate of diag(e^sqrt5, e^-sqrt5): lengths with irrational ratio.
std::vector<GroupElement> sl2_irrational_pair();
// Three conjugates of diag(4, 1, 1/4); the second carries the signs (-, -, +).
std::vector<GroupElement> sl3_triple();
// Two conjugates of diag(4, 1, 1/4) with sign parts (-, -, +) and (+, -, -), plus a positive one.
std::vector<GroupElement> sl3_sign_family();

// Three conjugates of diagonal cores with distinct Jordan directions, spanning a 2-D limit cone.
std::vector<GroupElement> sl3_cone_family();

}  // namespace chamberflow
