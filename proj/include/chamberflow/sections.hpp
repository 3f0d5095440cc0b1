#pragma once

#include "chamberflow/flags.hpp"

#include <vector>

namespace chamberflow {

enum class SectionKind { Unipotent, Compact };

// A Bruhat section determined by its domain (the cell opposite `base`) and a right AM gauge.
// With h = rep(base) k_iota^{-1}:
//   Unipotent: s(xi) = h [e](h^{-1} xi) x,   [e](zeta) in N^- with [e](zeta) eta_0 = zeta
//   Compact:   s(xi) = k_I(h [e](h^{-1} xi)) m   (the offset of a compact section lies in M)
struct Section {
  SectionKind kind = SectionKind::Unipotent;
  Flag base;
  AMElement offset;

  static Section unipotent(const Flag& base);
  static Section unipotent(const Flag& base, const AMElement& offset);
  static Section compact(const Flag& base);
  static Section compact(const Flag& base, const SignVector& m);
  // [h] for an arbitrary h in G, normalized as [k_{I-}(h)].a_{I-}(h).
  static Section unipotent_from(const GroupElement& h);
  // k_I o [h].
  static Section compact_from(const GroupElement& h);

  int n() const { return base.n(); }
  // Right translation s.x (for compact sections x must lie in M).
  Section translated(const AMElement& x) const;
  // Left translation xi -> c s(c^{-1} xi) for c in SO(n).
  Section left_translated(const Mat& c) const;
};

// rep(xi_check) k_iota^{-1}: the representative in K of the section family.
Mat section_representative(const Flag& xi_check);

bool in_domain(const Section& s, const Flag& xi, const Config& cfg = Config::defaults());
GroupElement eval_section(const Section& s, const Flag& xi, const Config& cfg = Config::defaults());

// Diagonal AM-part of a matrix known to lie in MAN (upper triangular up to rounding).
AMElement am_part(const Mat& man);

// T_{s,s2}(xi) = AM-part of s(xi)^{-1} s2(xi).
AMElement transition(const Section& s, const Section& s2, const Flag& xi, const Config& cfg = Config::defaults());

// beta_{s1,s0}(g, xi): the AM-part of s1(g xi)^{-1} g s0(xi). Products are never multiplied out.
AMElement cocycle(const Section& s1, const Section& s0, const Factored& g, const Flag& xi,
                  const Config& cfg = Config::defaults());

// sigma(g, xi): a-part of the KAN decomposition of g rep(xi).
CartanVector iwasawa_cocycle(const Factored& g, const Flag& xi);

struct BHCoordinates {
  Flag xi;
  Flag xi_check;
  AMElement x;
  Section section;
};

BHCoordinates to_bh(const GroupElement& g, const Section& s, const Config& cfg = Config::defaults());
GroupElement from_bh(const BHCoordinates& c, const Config& cfg = Config::defaults());

struct CompactCoords {
  Flag xi;
  SignVector signs;
};
CompactCoords compact_coords(const Mat& k, const Section& s, const Config& cfg = Config::defaults());

// Compact sections at the n! permutation flags; together their domains cover the flag variety.
std::vector<Section> covering_family(int n);
// Index of the section whose domain contains xi with the largest cell margin.
int best_section(const std::vector<Section>& family, const Flag& xi);

}  // namespace chamberflow
