#pragma once

#include "chamberflow/schottky.hpp"

#include <limits>
#include <vector>

namespace chamberflow {

// Point of V x C with V = R^d and C = (R/Z)^k; torus coordinates reduced to [0, 1).
struct TorusPoint {
  Vec v;
  Vec c;

  TorusPoint() = default;
  TorusPoint(Vec v_, Vec c_);
  int d() const { return static_cast<int>(v.size()); }
  int k() const { return static_cast<int>(c.size()); }
};

struct Box {
  Vec lo, hi;
  static Box cube(int d, double a, double b);
};

// Product metric: Euclidean on V, flat on the torus.
double torus_distance(const TorusPoint& a, const TorusPoint& b);

struct CellWitness {
  TorusPoint center;
  std::vector<long> coeffs;  // over the certificate subset
  double distance = 0.0;
};

struct DensityCertificate {
  double delta = 0.0;
  double grid_step = 0.0;
  long coeff_bound = 0;
  bool covered = false;
  bool semigroup = false;
  std::vector<TorusPoint> subset;
  std::vector<int> subset_index;  // positions in the input list
  Box window;                     // absolute for the group version, relative to v_F for the cone version
  Vec v_F;                        // cone version only
  Mat cone_basis;                 // cone version: columns spanning the certified cone
  std::vector<CellWitness> cells;
  double worst_distance = 0.0;
  long max_coeff = 0;
  long max_factors = 0;  // largest coefficient sum of a witness (cone version)
  double threshold = std::numeric_limits<double>::quiet_NaN();  // single generator: |pi_V f| / 2
  double inflated_delta = std::numeric_limits<double>::quiet_NaN();  // bridge: delta + 2 l delta_hat
  std::vector<Word> subset_words;  // bridge: the word behind each subset element
};

struct DensityOptions {
  long coeff_bound = 1000;
  std::size_t max_states = 2000000;  // enumeration budget per candidate subset
  int workers = 0;
};

// Generators of a subgroup whose bounded-coefficient elements delta-cover window x torus, with at
// most 3d + 2k elements. Throws NotDenseAtBudget naming the farthest uncovered cell.
DensityCertificate select_dense_subgroup_generators(const std::vector<TorusPoint>& e, double delta, const Box& window,
                                                    const DensityOptions& opt = {});
// Same covering check for a fixed subset (no selection); never throws on failure.
DensityCertificate cover_with_subset(const std::vector<TorusPoint>& subset, double delta, const Box& window,
                                     const DensityOptions& opt = {});

// v_F and a certificate that semigroup elements delta-cover (v_F + cone) intersected with v_F + window.
DensityCertificate semigroup_cone_density(const std::vector<TorusPoint>& f, double delta, const Box& window,
                                          const DensityOptions& opt = {});

// Cone density of the Jordan projections (Helmert coordinates of a) of the words of length
// up to word_len; inflated_delta adds 2 l delta_hat with l the largest witness length in words.
struct BridgeOptions {
  int word_len = 2;
  double window_half = 5.0;
  double delta_hat = 0.0;
  DensityOptions density;
};
DensityCertificate jordan_density_bridge(const SchottkyFamily& fam, double delta, const BridgeOptions& opt = {});

// Single-threaded re-verification: regenerates the grid, rebuilds every witness from its
// coefficients and returns the covered flag it finds.
bool verify_certificate(const DensityCertificate& cert);

// Bridge witness as a word: subset words concatenated in subset order, each repeated by its coefficient.
Word witness_word(const DensityCertificate& cert, const CellWitness& w);

// Helmert coordinates of a Cartan vector (an orthonormal basis of a).
Vec helmert_coords(const CartanVector& x);

}  // namespace chamberflow
