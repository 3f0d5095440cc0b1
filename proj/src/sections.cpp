#include "chamberflow/sections.hpp"

#include <cmath>

namespace chamberflow {

namespace {

SignVector round_signs(const Vec& d) {
  std::vector<int> s(d.size());
  for (int i = 0; i < d.size(); ++i) s[i] = d[i] < 0 ? -1 : 1;
  return SignVector(std::move(s));
}

SignVector sign_part(const Mat& m_diag_like) { return round_signs(m_diag_like.diagonal()); }

// Every section value is rep(xi) T with T upper triangular. Returns AM(T):
// unipotent: C = L D U gives T = U^{-1} D^{-1} x; compact: T = sign(D) m.
AMElement frame_am(const Section& s, const Flag& xi, const Config& cfg) {
  if (s.n() != xi.n()) throw InvalidInput("dimension mismatch between section and flag");
  const Mat c = comparison_matrix(xi, s.base);
  BruhatLU lu;
  try {
    lu = bruhat_lu_matrix(c, cfg);
  } catch (const NotInBigCell&) {
    throw OutOfDomain("flag is not transverse to the section base");
  }
  if (s.kind == SectionKind::Unipotent) return lu.x.inverse() * s.offset;
  return AMElement{CartanVector::zero(s.n()), lu.x.m * s.offset.m};
}

AMElement diag_am(const SignVector& m, const Vec& log_abs) {
  return AMElement{CartanVector::recentered(log_abs), m};
}

}  // namespace

Section Section::unipotent(const Flag& base) { return unipotent(base, AMElement::identity(base.n())); }

Section Section::unipotent(const Flag& base, const AMElement& offset) {
  if (offset.n() != base.n()) throw InvalidInput("offset dimension mismatch");
  return Section{SectionKind::Unipotent, base, offset};
}

Section Section::compact(const Flag& base) { return compact(base, SignVector::identity(base.n())); }

Section Section::compact(const Flag& base, const SignVector& m) {
  if (m.n() != base.n()) throw InvalidInput("offset dimension mismatch");
  return Section{SectionKind::Compact, base, AMElement{CartanVector::zero(base.n()), m}};
}

Mat section_representative(const Flag& xi_check) { return xi_check.rep() * k_iota(xi_check.n()).transpose(); }

namespace {

// h = k a u^- with k = h_base m'; returns (base, m', a).
struct Normalized {
  Flag base;
  SignVector m;
  CartanVector a;
};

Normalized normalize(const GroupElement& h) {
  const auto kan = iwasawa_kan_minus(h);
  const int n = h.n();
  const Flag base = Flag::from_rep(kan.k * k_iota(n));
  const Mat mp = section_representative(base).transpose() * kan.k;
  return {base, sign_part(mp), kan.a};
}

}  // namespace

Section Section::unipotent_from(const GroupElement& h) {
  const auto nz = normalize(h);
  return unipotent(nz.base, AMElement{nz.a, nz.m});
}

Section Section::compact_from(const GroupElement& h) {
  const auto nz = normalize(h);
  return compact(nz.base, nz.m);
}

Section Section::translated(const AMElement& x) const {
  if (kind == SectionKind::Compact && x.a.coords().norm() != 0.0)
    throw InvalidInput("a compact section can only be translated by M");
  Section s = *this;
  s.offset = offset * x;
  return s;
}

Section Section::left_translated(const Mat& c) const {
  const int nn = n();
  if (c.rows() != nn || (c.transpose() * c - Mat::Identity(nn, nn)).norm() > 1e-9 || c.determinant() < 0)
    throw InvalidInput("left translation needs an element of SO(n)");
  Section s = *this;
  s.base = Flag::from_rep(c * base.rep());
  const Mat mp = section_representative(s.base).transpose() * c * section_representative(base);
  s.offset = offset * AMElement{CartanVector::zero(nn), sign_part(mp)};
  return s;
}

bool in_domain(const Section& s, const Flag& xi, const Config& cfg) { return is_transverse(xi, s.base, cfg); }

GroupElement eval_section(const Section& s, const Flag& xi, const Config& cfg) {
  if (s.n() != xi.n()) throw InvalidInput("dimension mismatch between section and flag");
  const Mat c = comparison_matrix(xi, s.base);
  BruhatLU lu;
  try {
    lu = bruhat_lu_matrix(c, cfg);
  } catch (const NotInBigCell&) {
    throw OutOfDomain("flag is not transverse to the section base");
  }
  if (s.kind == SectionKind::Unipotent)
    return GroupElement::trusted(section_representative(s.base) * lu.u_minus * s.offset.matrix());
  Mat k = xi.rep();
  const SignVector m = lu.x.m * s.offset.m;
  for (int j = 0; j < k.cols(); ++j) k.col(j) *= m[j];
  return GroupElement::trusted(std::move(k));
}

AMElement am_part(const Mat& man) {
  return AMElement::from_diagonal(man.diagonal());
}

AMElement transition(const Section& s, const Section& s2, const Flag& xi, const Config& cfg) {
  return frame_am(s, xi, cfg).inverse() * frame_am(s2, xi, cfg);
}

AMElement cocycle(const Section& s1, const Section& s0, const Factored& g, const Flag& xi, const Config& cfg) {
  const AMElement t0 = frame_am(s0, xi, cfg);
  const ChainQR chain = qr_chain(g, xi.rep());
  const Flag gxi = Flag::from_rep(chain.q);
  const AMElement t1 = frame_am(s1, gxi, cfg);
  const SignVector mq = sign_part(gxi.rep().transpose() * chain.q);
  return t1.inverse() * diag_am(mq, chain.log_r) * t0;
}

CartanVector iwasawa_cocycle(const Factored& g, const Flag& xi) {
  return CartanVector::recentered(qr_chain(g, xi.rep()).log_r);
}

BHCoordinates to_bh(const GroupElement& g, const Section& s, const Config& cfg) {
  const int n = g.n();
  Mat q, r;
  qr_positive(g.matrix(), q, r);
  const Flag xi = Flag::from_rep(q);
  const AMElement t = frame_am(s, xi, cfg);
  const SignVector mq = sign_part(xi.rep().transpose() * q);
  const Vec log_r = r.diagonal().array().log().matrix();
  const AMElement x = t.inverse() * diag_am(mq, log_r);
  return {xi, flag_of(GroupElement::trusted(g.matrix() * k_iota(n))), x, s};
}

GroupElement from_bh(const BHCoordinates& c, const Config& cfg) {
  const int n = c.xi.n();
  if (!is_transverse(c.xi, c.xi_check, cfg)) throw NotTransverse("xi and xi_check are not transverse");
  const GroupElement sx = eval_section(c.section, c.xi, cfg);
  // zeta = s(xi)^{-1} xi_check = u eta_check_0 with u in N.
  const Flag zeta = Flag::from_columns(sx.matrix().partialPivLu().solve(c.xi_check.rep()));
  const Mat j = reversal(n);
  const Mat y = zeta.rep() * k_iota(n).transpose();
  BruhatLU lu;
  try {
    lu = bruhat_lu_matrix(j * y * j, cfg);
  } catch (const NotInBigCell&) {
    throw NotTransverse("xi_check is not transverse to xi");
  }
  const Mat u = j * lu.u_minus * j;
  return GroupElement::trusted(sx.matrix() * u * c.x.matrix());
}

CompactCoords compact_coords(const Mat& k, const Section& s, const Config& cfg) {
  if (s.kind != SectionKind::Compact) throw InvalidInput("compact coordinates need a compact section");
  const int n = s.n();
  if (k.rows() != n || k.cols() != n || (k.transpose() * k - Mat::Identity(n, n)).norm() > 1e-9 ||
      k.determinant() < 0)
    throw InvalidInput("compact coordinates need an element of SO(n)");
  const Flag xi = Flag::from_rep(k);
  const GroupElement sx = eval_section(s, xi, cfg);
  return {xi, sign_part(sx.matrix().transpose() * k)};
}

std::vector<Section> covering_family(int n) {
  std::vector<Section> out;
  for (const Flag& f : permutation_flags(n)) out.push_back(Section::compact(f));
  return out;
}

int best_section(const std::vector<Section>& family, const Flag& xi) {
  int best = -1;
  double margin = -1.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double m = cell_margin(xi, family[i].base);
    if (m > margin) {
      margin = m;
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || margin <= 0.0) throw OutOfDomain("flag lies outside every section of the family");
  return best;
}

}  // namespace chamberflow
