#pragma once

#include "chamberflow/loxodromy.hpp"

#include <cstddef>
#include <vector>

namespace chamberflow {

struct SchottkyFamily {
  std::vector<LoxodromicData> generators;  // certified powers of the seeds
  std::vector<int> powers;
  double r = 0.0;
  double eps = 0.0;
  std::vector<REpsCertificate> certificates;
  Mat pairwise_margins;  // (i, j) = d(g_i+, boundary of b(g_j-))

  int size() const { return static_cast<int>(generators.size()); }
  int n() const { return generators.front().n(); }
};

// Replaces every seed by its smallest (r, eps)-certified power and checks the 6r margins.
// NotGeneric when some g_i+ is not transverse to some g_j-; CannotCertify when a power budget
// runs out or a margin is below 6r.
SchottkyFamily build_schottky(const std::vector<GroupElement>& seeds, double r, double eps, int max_power,
                              const Config& cfg = Config::defaults());

using Word = std::vector<int>;  // letters g_{w[0]} g_{w[1]} ... as a left-to-right product

struct WordRecord {
  Word word;
  bool loxodromic = false;
  CartanVector lambda;
  SignVector signs;  // M-part of the extended Jordan projection
};

// Every positive word of length 1..max_len, breadth-first and lexicographic within a length.
// Jordan data come from the dominant eigenvalues of the exterior powers of the word, which
// keeps full relative accuracy for long words. BudgetExceeded if the count exceeds cap.
std::vector<WordRecord> enumerate_words(const SchottkyFamily& fam, int max_len, std::size_t cap = 200000,
                                        int workers = 0, const Config& cfg = Config::defaults());
Factored word_element(const SchottkyFamily& fam, const Word& w);

struct ConeEstimate {
  std::vector<CartanVector> rays;  // unit directions of the loxodromic words
  std::vector<int> ray_word;       // index into the enumeration for each ray
  std::vector<CartanVector> hull;  // extreme rays (empty with hull_supported = false for n >= 5)
  bool hull_supported = true;
  double containment_residual = 0.0;
  int word_length = 0;
};

// Cross-section coordinates of a direction: central projection onto <x, rho> = 1, expressed in
// an orthonormal basis of rho-perp in a (dimension n-2).
Vec cone_section_coords(const CartanVector& x);
// The first two Helmert coordinates of a unit direction, for plots.
std::pair<double, double> plot_coords(const CartanVector& dir);

ConeEstimate limit_cone(const SchottkyFamily& fam, int max_len, std::size_t cap = 200000, int workers = 0,
                        const Config& cfg = Config::defaults());
ConeEstimate cone_from_words(const std::vector<WordRecord>& words, int n, int max_len);
// Strict interior with margin 1e-6 in the cross-section.
bool cone_interior(const ConeEstimate& cone, const CartanVector& theta);

struct SignGroupReport {
  std::vector<SignVector> basis;
  std::vector<Word> witnesses;  // witnesses[i] has M-part basis[i]
  int p = 0;
  std::size_t order = 1;
  std::size_t words_scanned = 0;
  bool all_positive = true;
};

SignGroupReport sign_group(const SchottkyFamily& fam, int max_len, std::size_t cap = 200000, int workers = 0,
                           const Config& cfg = Config::defaults());
SignGroupReport sign_group_from_words(const std::vector<WordRecord>& words, int n);
// Index of the coset of m in M / M_Gamma (bits of m reduced against the basis).
std::uint64_t coset_index(const SignGroupReport& report, const SignVector& m);

// Section used for label transport: the compact section at the permutation flag whose
// domain contains all attracting flags with the largest margin.
Section transport_section(const SchottkyFamily& fam);

// Coset in M / M_Gamma of the M-part of beta(w, xi) x along the orbit, charts switching through
// the covering family; the final chart is the start's section when it contains the endpoint.
std::uint64_t component_label_transport(const Word& word, const SchottkyFamily& fam, const BHCoordinates& start,
                                        const SignGroupReport& report, const Config& cfg = Config::defaults());

struct DecorrelationRow {
  std::vector<int> nu;
  SignVector attained;  // M-part of the product cocycle times the ν = 0 normalization
  SignVector expected;  // prod basis_i^{nu_i}
  bool match = false;
};
struct DecorrelationReport {
  int p = 0;
  int n = 0;
  std::vector<DecorrelationRow> rows;
  bool pass = true;
};

// Products h_p^{2n+nu_p} ... h_1^{2n+nu_1} of the witness words; NeedLargerN when some
// intermediate flag leaves B(h_j+, eps).
DecorrelationReport decorrelation_discret_check(const SchottkyFamily& fam, const SignGroupReport& report, int n,
                                                const Config& cfg = Config::defaults());

struct ProbeReport {
  CartanVector theta;
  double lo = 0.0, hi = 0.0, delta0 = 0.0;
  bool theta_interior = false;
  std::size_t words = 0;
  std::size_t hits = 0;
  std::vector<double> positions;  // sorted theta-components of the hits
  double max_gap = 0.0;
  double mean_gap = 0.0;
};

ProbeReport jordan_line_density_probe(const std::vector<WordRecord>& words, const ConeEstimate& cone,
                                      const CartanVector& theta, double lo, double hi, double delta0);

}  // namespace chamberflow
