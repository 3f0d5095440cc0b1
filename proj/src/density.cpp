#include "chamberflow/density.hpp"

#include "chamberflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <unordered_map>

namespace chamberflow {

TorusPoint::TorusPoint(Vec v_, Vec c_) : v(std::move(v_)), c(std::move(c_)) {
  for (int i = 0; i < c.size(); ++i) {
    c[i] -= std::floor(c[i]);
    if (c[i] >= 1.0) c[i] = 0.0;
  }
}

Box Box::cube(int d, double a, double b) { return {Vec::Constant(d, a), Vec::Constant(d, b)}; }

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  double s = (a.v - b.v).squaredNorm();
  for (int i = 0; i < a.c.size(); ++i) {
    double t = std::abs(a.c[i] - b.c[i]);
    t -= std::floor(t);
    t = std::min(t, 1.0 - t);
    s += t * t;
  }
  return std::sqrt(s);
}

Vec helmert_coords(const CartanVector& x) {
  const int n = x.n();
  Vec out(n - 1);
  for (int k = 1; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += x[i];
    out[k - 1] = (s - k * x[k]) / std::sqrt(static_cast<double>(k) * (k + 1));
  }
  return out;
}

namespace {

int axis_count(double len, double step) {
  return std::max(1, static_cast<int>(std::ceil(len / step - 1e-12)));
}

// Grid centers of box x torus, in lexicographic order of (V indices, torus indices).
std::vector<TorusPoint> grid_centers(const Box& box, int k, double step) {
  const int d = static_cast<int>(box.lo.size());
  std::vector<int> counts;
  for (int i = 0; i < d; ++i) counts.push_back(axis_count(box.hi[i] - box.lo[i], step));
  for (int i = 0; i < k; ++i) counts.push_back(axis_count(1.0, step));
  std::vector<TorusPoint> out;
  std::vector<int> idx(d + k, 0);
  for (;;) {
    Vec v(d), c(k);
    for (int i = 0; i < d; ++i) v[i] = box.lo[i] + (idx[i] + 0.5) * (box.hi[i] - box.lo[i]) / counts[i];
    for (int i = 0; i < k; ++i) c[i] = (idx[d + i] + 0.5) / counts[d + i];
    out.emplace_back(v, c);
    int j = d + k - 1;
    while (j >= 0 && ++idx[j] == counts[j]) idx[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

struct Element {
  TorusPoint p;
  std::vector<long> coeffs;
};

TorusPoint combine(const std::vector<TorusPoint>& gens, const std::vector<long>& a) {
  const int d = gens.front().d(), k = gens.front().k();
  Vec v = Vec::Zero(d), c = Vec::Zero(k);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    v += static_cast<double>(a[i]) * gens[i].v;
    // Reduce each term first so large coefficients keep torus precision.
    for (int j = 0; j < k; ++j) {
      const double t = static_cast<double>(a[i]) * gens[i].c[j];
      c[j] += t - std::floor(t);
    }
  }
  return TorusPoint(v, c);
}

// Bounded-coefficient elements of the group generated by gens, reduced modulo the lattice of
// the basis elements, indexed for nearest-point queries.
class Cover {
 public:
  Cover(const std::vector<TorusPoint>& gens, const std::vector<int>& basis, double delta, long kmax)
      : gens_(gens), basis_(basis), cell_(delta) {
    const int d = gens.front().d();
    b_.resize(d, d);
    for (int i = 0; i < d; ++i) b_.col(i) = gens[basis[i]].v;
    binv_ = b_.inverse();
    std::vector<int> free;
    for (int i = 0; i < static_cast<int>(gens.size()); ++i)
      if (std::find(basis.begin(), basis.end(), i) == basis.end()) free.push_back(i);
    if (free.empty()) kmax = 0;
    bound_ = kmax;
    std::vector<long> a(free.size(), -kmax);
    for (;;) {
      std::vector<long> full(gens.size(), 0);
      for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = a[i];
      add_reduced(full);
      std::size_t j = 0;
      while (j < a.size() && ++a[j] > kmax) a[j++] = -kmax;
      if (j == a.size()) break;
    }
  }

  // Floor decomposition of the V part in the basis.
  std::vector<long> floors(const Vec& v) const {
    const Vec t = binv_ * v;
    std::vector<long> fl(t.size());
    for (int i = 0; i < t.size(); ++i) fl[i] = static_cast<long>(std::floor(t[i] + 1e-12));
    return fl;
  }

  // Nearest stored element to the target; INF distance if no bucket nearby holds one.
  std::pair<const Element*, double> nearest(const TorusPoint& t) const {
    const auto key = key_of(t);
    const int dim = static_cast<int>(key.size());
    std::vector<int> off(dim, -1);
    const Element* best = nullptr;
    double bd = INFINITY;
    const int d = t.d();
    for (;;) {
      std::vector<long> kk = key;
      for (int i = 0; i < dim; ++i) {
        kk[i] += off[i];
        if (i >= d) {
          const long m = torus_cells();
          kk[i] = ((kk[i] % m) + m) % m;
        }
      }
      auto it = buckets_.find(hash(kk));
      if (it != buckets_.end())
        for (std::size_t idx : it->second) {
          const double dist = torus_distance(elems_[idx].p, t);
          if (dist < bd) {
            bd = dist;
            best = &elems_[idx];
          }
        }
      int j = 0;
      while (j < dim && ++off[j] > 1) off[j++] = -1;
      if (j == dim) break;
    }
    return {best, bd};
  }

  const Mat& basis_matrix() const { return b_; }
  long bound() const { return bound_; }
  const std::vector<Element>& elements() const { return elems_; }

 private:
  void add_reduced(std::vector<long> a) {
    const int d = static_cast<int>(basis_.size());
    TorusPoint p = combine(gens_, a);
    const auto fl = floors(p.v);
    for (int i = 0; i < d; ++i) a[basis_[i]] -= fl[i];
    p = combine(gens_, a);
    // Keep the neighbouring translates so queries near the faces see across them.
    std::vector<int> off(d, -1);
    for (;;) {
      std::vector<long> b = a;
      for (int i = 0; i < d; ++i) b[basis_[i]] += off[i];
      Element e{combine(gens_, b), b};
      const auto kk = key_of(e.p);
      buckets_[hash(kk)].push_back(elems_.size());
      elems_.push_back(std::move(e));
      int j = 0;
      while (j < d && ++off[j] > 1) off[j++] = -1;
      if (j == d) break;
    }
  }

  long torus_cells() const { return std::max(1L, static_cast<long>(std::floor(1.0 / cell_))); }

  std::vector<long> key_of(const TorusPoint& p) const {
    std::vector<long> k;
    for (int i = 0; i < p.d(); ++i) k.push_back(static_cast<long>(std::floor(p.v[i] / cell_)));
    for (int i = 0; i < p.k(); ++i)
      k.push_back(std::min(torus_cells() - 1, static_cast<long>(std::floor(p.c[i] * torus_cells()))));
    return k;
  }

  static std::uint64_t hash(const std::vector<long>& k) {
    std::uint64_t h = 1469598103934665603ULL;
    for (long x : k) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 1099511628211ULL;
    }
    return h;
  }

  std::vector<TorusPoint> gens_;
  std::vector<int> basis_;
  double cell_;
  Mat b_, binv_;
  long bound_ = 0;
  std::vector<Element> elems_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

// Fraction of the fundamental-domain grid within delta of the cover.
double domain_coverage(const Cover& cov, int k, double delta) {
  const Mat& b = cov.basis_matrix();
  const int d = static_cast<int>(b.rows());
  Box box{Vec::Zero(d), Vec::Zero(d)};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      box.lo[i] += std::min(0.0, b(i, j));
      box.hi[i] += std::max(0.0, b(i, j));
    }
  const Mat binv = b.inverse();
  std::size_t total = 0, good = 0;
  for (const auto& p : grid_centers(box, k, delta / 2.0)) {
    const Vec t = binv * p.v;
    if ((t.array() < 0.0).any() || (t.array() >= 1.0).any()) continue;
    ++total;
    if (cov.nearest(p).second <= delta) ++good;
  }
  return total == 0 ? 1.0 : static_cast<double>(good) / static_cast<double>(total);
}

// Smallest doubling K whose cover reaches the whole fundamental domain, within the state budget.
struct Fit {
  std::unique_ptr<Cover> cover;
  double coverage = 0.0;
};

Fit fit_cover(const std::vector<TorusPoint>& gens, const std::vector<int>& basis, double delta,
              const DensityOptions& opt) {
  const double free = static_cast<double>(gens.size() - basis.size());
  const auto affordable = [&](long k) {
    return k <= opt.coeff_bound / 2 && std::pow(2.0 * k + 1.0, free) <= static_cast<double>(opt.max_states);
  };
  Fit fit;
  for (long k = 1;; k *= 2) {
    fit.cover = std::make_unique<Cover>(gens, basis, delta, k);
    fit.coverage = domain_coverage(*fit.cover, gens.front().k(), delta);
    if (fit.coverage >= 1.0 || free == 0 || !affordable(2 * k)) return fit;
  }
}

std::vector<int> greedy_basis(const std::vector<TorusPoint>& e) {
  const int d = e.front().d();
  std::vector<int> chosen;
  Mat m(d, 0);
  for (int step = 0; step < d; ++step) {
    int best = -1;
    double best_vol = 0.0;
    for (int i = 0; i < static_cast<int>(e.size()); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      Mat t(d, m.cols() + 1);
      t << m, e[i].v;
      const double vol = std::sqrt(std::max(0.0, (t.transpose() * t).determinant()));
      if (vol > best_vol * (1.0 + 1e-12)) {
        best_vol = vol;
        best = i;
      }
    }
    if (best < 0 || best_vol < 1e-12) throw NotDenseAtBudget("the V-projections do not span V");
    chosen.push_back(best);
    m.conservativeResize(d, m.cols() + 1);
    m.col(m.cols() - 1) = e[best].v;
  }
  return chosen;
}

// Extreme rays of a pointed cone in dimension 1 or 2, or a greedy basis above that.
std::vector<int> cone_basis(const std::vector<TorusPoint>& f) {
  const int d = f.front().d();
  if (d == 1) {
    bool pos = false, neg = false;
    int best = 0;
    for (int i = 0; i < static_cast<int>(f.size()); ++i) {
      pos = pos || f[i].v[0] > 0;
      neg = neg || f[i].v[0] < 0;
      if (std::abs(f[i].v[0]) > std::abs(f[best].v[0])) best = i;
    }
    if (pos && neg) throw InvalidInput("the cone of the V-projections is not pointed");
    if (std::abs(f[best].v[0]) == 0.0) throw NotDenseAtBudget("all V-projections vanish");
    return {best};
  }
  if (d == 2) {
    Vec mean = Vec::Zero(2);
    for (const auto& p : f) mean += p.v.normalized();
    if (mean.norm() < 1e-9) throw InvalidInput("the cone of the V-projections is not pointed");
    const double base = std::atan2(mean[1], mean[0]);
    int lo = 0, hi = 0;
    double alo = INFINITY, ahi = -INFINITY;
    for (int i = 0; i < static_cast<int>(f.size()); ++i) {
      const double a = std::remainder(std::atan2(f[i].v[1], f[i].v[0]) - base, 2 * M_PI);
      if (std::abs(a) >= M_PI / 2) throw InvalidInput("the cone of the V-projections is not pointed");
      if (a < alo) alo = a, lo = i;
      if (a > ahi) ahi = a, hi = i;
    }
    if (ahi - alo < 1e-9) throw NotDenseAtBudget("the V-projections span a single ray");
    return {lo, hi};
  }
  return greedy_basis(f);
}

struct Selection {
  std::vector<int> subset;  // indices into the input
  std::vector<int> basis;   // positions within subset
};

Selection select(const std::vector<TorusPoint>& e, const std::vector<int>& basis_idx, double delta,
                 const DensityOptions& opt) {
  const int d = e.front().d(), k = e.front().k();
  const std::size_t cap = static_cast<std::size_t>(3 * d + 2 * k);
  Selection sel;
  sel.subset = basis_idx;
  for (int i = 0; i < d; ++i) sel.basis.push_back(i);
  const auto score = [&](const std::vector<int>& idx) {
    std::vector<TorusPoint> g;
    for (int i : idx) g.push_back(e[i]);
    return fit_cover(g, sel.basis, delta, opt).coverage;
  };
  double cur = score(sel.subset);
  while (cur < 1.0 && sel.subset.size() < cap) {
    int best = -1;
    double best_score = cur;
    for (int i = 0; i < static_cast<int>(e.size()); ++i) {
      if (std::find(sel.subset.begin(), sel.subset.end(), i) != sel.subset.end()) continue;
      auto trial = sel.subset;
      trial.push_back(i);
      const double s = score(trial);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best < 0) break;
    sel.subset.push_back(best);
    cur = best_score;
  }
  return sel;
}

void finish(DensityCertificate& cert) {
  cert.covered = true;
  cert.worst_distance = 0.0;
  cert.max_coeff = 0;
  cert.max_factors = 0;
  for (const auto& w : cert.cells) {
    cert.worst_distance = std::max(cert.worst_distance, w.distance);
    cert.covered = cert.covered && w.distance <= cert.delta;
    long sum = 0;
    for (long a : w.coeffs) {
      cert.max_coeff = std::max(cert.max_coeff, std::abs(a));
      sum += a;
    }
    cert.max_factors = std::max(cert.max_factors, sum);
  }
  if (cert.max_coeff > cert.coeff_bound) cert.covered = false;
}

std::string describe_worst(const DensityCertificate& cert) {
  const CellWitness* worst = nullptr;
  for (const auto& w : cert.cells)
    if (!worst || w.distance > worst->distance) worst = &w;
  std::ostringstream os;
  os.precision(6);
  if (!worst) return "no cells";
  os << "farthest uncovered cell at v = (" << worst->center.v.transpose() << "), c = (" << worst->center.c.transpose()
     << ") is " << worst->distance << " from the generated set";
  if (cert.max_coeff > cert.coeff_bound) os << "; coefficients reach " << cert.max_coeff;
  return os.str();
}

DensityCertificate group_certificate(const std::vector<TorusPoint>& e, const Selection& sel, double delta,
                                     const Box& window, const DensityOptions& opt) {
  const int k = e.front().k();
  std::vector<TorusPoint> gens;
  for (int i : sel.subset) gens.push_back(e[i]);
  const Fit fit = fit_cover(gens, sel.basis, delta, opt);
  const Cover& cov = *fit.cover;
  DensityCertificate cert;
  cert.delta = delta;
  cert.grid_step = delta / 2.0;
  cert.coeff_bound = opt.coeff_bound;
  cert.subset = gens;
  cert.subset_index = sel.subset;
  cert.window = window;
  const auto centers = grid_centers(window, k, cert.grid_step);
  cert.cells.resize(centers.size());
  const std::size_t chunk = 1024;
  for_each_chunk((centers.size() + chunk - 1) / chunk, opt.workers, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(centers.size(), (c + 1) * chunk); ++i) {
      const auto fl = cov.floors(centers[i].v);
      std::vector<long> shift(gens.size(), 0);
      for (std::size_t j = 0; j < sel.basis.size(); ++j) shift[sel.basis[j]] = fl[j];
      const TorusPoint s = combine(gens, shift);
      const TorusPoint target(centers[i].v - s.v, centers[i].c - s.c);
      const auto [el, dist] = cov.nearest(target);
      CellWitness w{centers[i], shift, dist};
      if (el)
        for (std::size_t j = 0; j < gens.size(); ++j) w.coeffs[j] += el->coeffs[j];
      cert.cells[i] = std::move(w);
    }
  });
  finish(cert);
  return cert;
}

void check_input(const std::vector<TorusPoint>& e, double delta, const Box& window) {
  if (e.empty()) throw InvalidInput("empty generator list");
  if (!(delta > 0)) throw InvalidInput("delta must be positive");
  for (const auto& p : e)
    if (p.d() != e.front().d() || p.k() != e.front().k()) throw InvalidInput("mixed dimensions");
  if (e.front().d() < 1) throw InvalidInput("V must have positive dimension");
  if (window.lo.size() != e.front().d() || window.hi.size() != e.front().d()) throw InvalidInput("window dimension");
  if (((window.hi - window.lo).array() <= 0).any()) throw InvalidInput("empty window");
}

}  // namespace

DensityCertificate cover_with_subset(const std::vector<TorusPoint>& subset, double delta, const Box& window,
                                     const DensityOptions& opt) {
  check_input(subset, delta, window);
  const auto basis = greedy_basis(subset);
  std::vector<int> order = basis;
  for (int i = 0; i < static_cast<int>(subset.size()); ++i)
    if (std::find(basis.begin(), basis.end(), i) == basis.end()) order.push_back(i);
  Selection sel{order, {}};
  for (std::size_t i = 0; i < basis.size(); ++i) sel.basis.push_back(static_cast<int>(i));
  return group_certificate(subset, sel, delta, window, opt);
}

DensityCertificate select_dense_subgroup_generators(const std::vector<TorusPoint>& e, double delta, const Box& window,
                                                    const DensityOptions& opt) {
  check_input(e, delta, window);
  const Selection sel = select(e, greedy_basis(e), delta, opt);
  const int bound = 3 * e.front().d() + 2 * e.front().k();
  if (static_cast<int>(sel.subset.size()) > bound) throw Error("selection exceeds 3 dim V + 2 dim C");
  DensityCertificate cert = group_certificate(e, sel, delta, window, opt);
  if (!cert.covered) throw NotDenseAtBudget(describe_worst(cert));
  return cert;
}

DensityCertificate semigroup_cone_density(const std::vector<TorusPoint>& f, double delta, const Box& window,
                                          const DensityOptions& opt) {
  check_input(f, delta, window);
  const int d = f.front().d(), k = f.front().k();
  const Selection sel = select(f, cone_basis(f), delta, opt);
  std::vector<TorusPoint> gens;
  for (int i : sel.subset) gens.push_back(f[i]);
  const Fit fit = fit_cover(gens, sel.basis, delta, opt);
  const Cover& cov = *fit.cover;

  // h = N (sum of the subset) absorbs every negative coefficient of the cover.
  long neg = 0;
  for (const auto& el : cov.elements())
    for (long a : el.coeffs) neg = std::max(neg, -a);
  const long nshift = neg + 1;
  const std::vector<long> hcoeffs(gens.size(), nshift);
  const TorusPoint h = combine(gens, hcoeffs);

  DensityCertificate cert;
  cert.semigroup = true;
  cert.delta = delta;
  cert.grid_step = delta / 2.0;
  cert.coeff_bound = opt.coeff_bound;
  cert.subset = gens;
  cert.subset_index = sel.subset;
  cert.window = window;
  cert.v_F = h.v;
  cert.cone_basis = cov.basis_matrix();
  if (gens.size() == 1 && k == 0) cert.threshold = gens.front().v.norm() / 2.0;
  const Mat binv = cert.cone_basis.inverse();
  std::vector<TorusPoint> centers;
  for (const auto& p : grid_centers(window, k, cert.grid_step))
    if (((binv * p.v).array() >= -1e-12).all()) centers.push_back(p);
  cert.cells.resize(centers.size());
  const std::size_t chunk = 1024;
  for_each_chunk((centers.size() + chunk - 1) / chunk, opt.workers, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(centers.size(), (c + 1) * chunk); ++i) {
      const Vec rel = centers[i].v;
      const auto fl = cov.floors(rel);
      std::vector<long> coeffs = hcoeffs;
      for (int j = 0; j < d; ++j) coeffs[sel.basis[j]] += std::max(0L, fl[j]);
      const TorusPoint s = combine(gens, coeffs);
      const TorusPoint target(rel + h.v - s.v, centers[i].c - s.c);
      const auto [el, dist] = cov.nearest(target);
      if (el)
        for (std::size_t j = 0; j < gens.size(); ++j) coeffs[j] += el->coeffs[j];
      CellWitness w{TorusPoint(rel + h.v, centers[i].c), coeffs, dist};
      cert.cells[i] = std::move(w);
    }
  });
  finish(cert);
  for (const auto& w : cert.cells)
    for (long a : w.coeffs)
      if (a < 0) cert.covered = false;
  if (!cert.covered) {
    std::string msg = describe_worst(cert);
    if (!std::isnan(cert.threshold)) msg += "; a single generator needs delta >= " + std::to_string(cert.threshold);
    throw NotDenseAtBudget(msg);
  }
  return cert;
}

DensityCertificate jordan_density_bridge(const SchottkyFamily& fam, double delta, const BridgeOptions& opt) {
  if (opt.word_len < 1) throw InvalidInput("word_len must be positive");
  const auto words = enumerate_words(fam, opt.word_len, 200000, opt.density.workers);
  std::vector<TorusPoint> f;
  std::vector<Word> source;
  for (const auto& w : words)
    if (w.loxodromic) {
      f.emplace_back(helmert_coords(w.lambda), Vec());
      source.push_back(w.word);
    }
  const int d = fam.n() - 1;
  DensityCertificate cert =
      semigroup_cone_density(f, delta, Box::cube(d, -opt.window_half, opt.window_half), opt.density);
  long l = 0;
  for (const auto& w : cert.cells) {
    long words_used = 0;
    for (std::size_t j = 0; j < w.coeffs.size(); ++j) words_used += w.coeffs[j];
    l = std::max(l, words_used);
  }
  cert.inflated_delta = delta + 2.0 * static_cast<double>(l) * opt.delta_hat;
  for (int i : cert.subset_index) cert.subset_words.push_back(source[i]);
  return cert;
}

Word witness_word(const DensityCertificate& cert, const CellWitness& w) {
  if (cert.subset_words.size() != cert.subset.size()) throw InvalidInput("certificate carries no subset words");
  Word out;
  for (std::size_t j = 0; j < cert.subset_words.size(); ++j)
    for (long a = 0; a < w.coeffs[j]; ++a) out.insert(out.end(), cert.subset_words[j].begin(), cert.subset_words[j].end());
  return out;
}

bool verify_certificate(const DensityCertificate& cert) {
  if (cert.subset.empty()) return false;
  const int d = cert.subset.front().d(), k = cert.subset.front().k();
  std::vector<int> counts;
  for (int i = 0; i < d; ++i)
    counts.push_back(std::max(1, static_cast<int>(std::ceil((cert.window.hi[i] - cert.window.lo[i]) / cert.grid_step - 1e-12))));
  for (int i = 0; i < k; ++i) counts.push_back(std::max(1, static_cast<int>(std::ceil(1.0 / cert.grid_step - 1e-12))));
  Mat binv;
  if (cert.semigroup) binv = cert.cone_basis.inverse();
  std::size_t at = 0;
  bool covered = true;
  std::vector<int> idx(d + k, 0);
  for (;;) {
    Vec v(d), c(k);
    for (int i = 0; i < d; ++i) v[i] = cert.window.lo[i] + (idx[i] + 0.5) * (cert.window.hi[i] - cert.window.lo[i]) / counts[i];
    for (int i = 0; i < k; ++i) c[i] = (idx[d + i] + 0.5) / counts[d + i];
    bool in_region = true;
    if (cert.semigroup) in_region = ((binv * v).array() >= -1e-12).all();
    if (in_region) {
      if (at >= cert.cells.size()) return false;
      const CellWitness& w = cert.cells[at++];
      const TorusPoint center(cert.semigroup ? Vec(v + cert.v_F) : v, c);
      if (torus_distance(center, w.center) > 1e-9) return false;
      Vec ev = Vec::Zero(d), ec = Vec::Zero(k);
      bool nonneg = true, any = false;
      for (std::size_t j = 0; j < cert.subset.size(); ++j) {
        const long a = w.coeffs[j];
        if (std::abs(a) > cert.coeff_bound) covered = false;
        nonneg = nonneg && a >= 0;
        any = any || a != 0;
        ev += static_cast<double>(a) * cert.subset[j].v;
        for (int i = 0; i < k; ++i) {
          const double t = static_cast<double>(a) * cert.subset[j].c[i];
          ec[i] += t - std::floor(t);
        }
      }
      if (cert.semigroup && (!nonneg || !any)) covered = false;
      if (torus_distance(TorusPoint(ev, ec), center) > cert.delta) covered = false;
    }
    int j = d + k - 1;
    while (j >= 0 && ++idx[j] == counts[j]) idx[j--] = 0;
    if (j < 0) break;
  }
  return covered && at == cert.cells.size();
}

}  // namespace chamberflow
