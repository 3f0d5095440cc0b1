#pragma once

#include "chamberflow/sections.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chamberflow {

struct LoxodromicData {
  Factored g;
  CartanVector lambda;     // strictly decreasing
  SignVector signs;        // M-part of the extended Jordan projection (signs of eigenvalues)
  Flag attracting;         // g+
  Flag repelling;          // g-
  GroupElement diagonalizer;  // h_g with Bruhat coordinates (g+, g- ; e)_[g-]
  double gap = 0.0;        // min consecutive gap of lambda

  int n() const { return lambda.n(); }
  // L_[g-](g) = (lambda, signs).
  AMElement jordan_am() const { return {lambda, signs}; }
};

// Eigen-decomposition based classification of a dense element.
LoxodromicData classify(const GroupElement& g, const Config& cfg = Config::defaults());
// g^p from the data of g; flags and diagonalizer are shared.
LoxodromicData classify_power(const LoxodromicData& l, int p);
// Classification of a long product kept in factored form: fixed flags by iterating the
// action of w and w^{-1}, lambda = sigma(w, w+), signs from the cocycle at w+.
LoxodromicData classify_product(const Factored& w, const Config& cfg = Config::defaults());

// L_s(g) = beta_s(g, g+).
AMElement extended_jordan(const Section& s, const LoxodromicData& l, const Config& cfg = Config::defaults());

struct REpsCertificate {
  double r = 0.0;
  double eps = 0.0;
  double margin = 0.0;           // d(g+, boundary of b(g-))
  double max_image_distance = 0.0;  // clause (ii): max d(g xi, g+) over the samples
  double lipschitz_bound = 0.0;  // clause (iii): max observed difference quotient
  double analytic_decay = 0.0;   // exp(-gap), the per-iteration factor of the analytic bound
  int samples = 0;
};

// Checks the three (r, eps) clauses at the sampled resolution. Throws CannotCertify naming the
// failed clause; InvalidInput for grid < 100 or eps outside (0, r].
REpsCertificate certify_r_eps(const LoxodromicData& l, double r, double eps, int grid,
                              const Config& cfg = Config::defaults());

// Smallest power p <= max_power for which g^p passes certify_r_eps; CannotCertify when none does.
struct CertifiedPower {
  LoxodromicData data;
  REpsCertificate cert;
  int power = 0;
};
CertifiedPower certify_smallest_power(const LoxodromicData& l, double r, double eps, int max_power, int grid,
                                      const Config& cfg = Config::defaults());

// R_{s1,s2}(xi_check ; xi1, xi2) = T_{s1,[xi_check]}(xi1) T_{[xi_check],s2}(xi2).
AMElement ratio(const Section& s1, const Section& s2, const Flag& xi_check, const Flag& xi1, const Flag& xi2,
                const Config& cfg = Config::defaults());
// R_{s1,s2}(g ; xi) = R_{s1,s2}(g- ; g+, xi).
AMElement ratio(const Section& s1, const Section& s2, const LoxodromicData& l, const Flag& xi,
                const Config& cfg = Config::defaults());

// R_{s1,s2}(g ; g^n xi)^{-1} L_{s1}(g)^n R_{s1,s0}(g ; xi).
AMElement cocycle_via_jordan(const LoxodromicData& l, int n, const Flag& xi, const Section& s0, const Section& s1,
                             const Section& s2, const Config& cfg = Config::defaults());

// Monte-Carlo estimate of the equicontinuity constant at base xi_check (default eta_check_0).
struct DeltaOptions {
  int n = 2;
  double r = 0.2;
  double eps = 0.05;
  int mc_samples = 10000;
  std::uint64_t seed = 42;
  int workers = 0;
};
double delta_r_eps(const DeltaOptions& opt, const Config& cfg = Config::defaults());
double delta_r_eps(const DeltaOptions& opt, const Flag& xi_check, const Config& cfg = Config::defaults());

struct EstimateReport {
  int l = 0;
  Flag product_attracting;
  Flag product_repelling;
  double attracting_distance = 0.0;  // d(w+, g_l+)
  double repelling_distance = 0.0;   // d(w-, g_1-)
  bool flags_in_balls = false;
  AMElement beta;        // beta_{s_l,s_0}(w, xi0)
  AMElement beta_chain;  // the L R ... L R chain
  double beta_distance = 0.0;
  double beta_bound = 0.0;  // (2l-1) delta
  AMElement jordan;      // L_{s_l}(w)
  AMElement jordan_chain;
  double jordan_distance = 0.0;
  double jordan_bound = 0.0;  // 2l delta
  bool beta_pass = false;
  bool jordan_pass = false;
};

// Product estimate for w = g_l^{n_l} ... g_1^{n_1}. sections has l+1 entries s_0..s_l.
// Checks genericity, the 1/6 margin hypothesis, the section domains and that each g_i is
// (r, eps)-loxodromic; throws HypothesisViolated naming the clause.
EstimateReport product_estimate(const std::vector<LoxodromicData>& family, const std::vector<int>& powers,
                                const Flag& xi0, const std::vector<Section>& sections, double r, double eps,
                                double delta, const Config& cfg = Config::defaults());

// Flags with cell margin at least `margin` from the cell opposite xi_check (rejection from Haar).
std::vector<Flag> sample_deep_flags(const Flag& xi_check, double margin, int count, Rng& rng);

}  // namespace chamberflow
