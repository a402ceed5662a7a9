#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fgb/boundary.hpp"
#include "fgb/error.hpp"
#include "fgb/rational.hpp"
#include "fgb/rng.hpp"
#include "fgb/word.hpp"

namespace fgb {

// A finite measured equivalence relation: a partition of the ground set with
// weights that are constant on each class. Class-constant weights are exactly
// the invariance condition nu x c = c x nu at finite scale.
class FiniteRelation {
 public:
  FiniteRelation(std::vector<std::uint32_t> class_id, std::vector<Rat> nu)
      : class_id_(std::move(class_id)), nu_(std::move(nu)) {
    if (class_id_.empty() || class_id_.size() != nu_.size())
      throw InvalidParameter("relation needs matching class and weight tables");
    // normalize ids by first occurrence
    std::map<std::uint32_t, std::uint32_t> remap;
    for (auto& c : class_id_) {
      auto [it, fresh] = remap.emplace(c, static_cast<std::uint32_t>(remap.size()));
      c = it->second;
    }
    members_.resize(remap.size());
    for (std::uint32_t b = 0; b < class_id_.size(); ++b)
      members_[class_id_[b]].push_back(b);
    Rat total = 0;
    for (const Rat& w : nu_) {
      if (w <= 0) throw InvalidParameter("weights must be positive");
      total += w;
    }
    if (total != 1) throw InvalidParameter("weights must sum to 1");
    for (const auto& cls : members_)
      for (std::uint32_t b : cls)
        if (nu_[b] != nu_[cls.front()])
          throw InvalidParameter("weights are not class-constant (invariance fails)");
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(class_id_.size()); }
  std::uint32_t num_classes() const { return static_cast<std::uint32_t>(members_.size()); }
  std::uint32_t class_of(std::uint32_t b) const { return class_id_[b]; }
  const std::vector<std::uint32_t>& members(std::uint32_t cls) const { return members_[cls]; }
  const Rat& nu(std::uint32_t b) const { return nu_[b]; }

  bool related(std::uint32_t a, std::uint32_t b) const { return class_id_[a] == class_id_[b]; }

  Rat mass(const std::vector<std::uint32_t>& set) const {
    Rat m = 0;
    for (std::uint32_t b : set) m += nu_[b];
    return m;
  }

 private:
  std::vector<std::uint32_t> class_id_;
  std::vector<Rat> nu_;
  std::vector<std::vector<std::uint32_t>> members_;
};

// F_n(b): one finite subset of class(b) per (n, b), n = 1..n_max.
class FolnerFamily {
 public:
  FolnerFamily(const FiniteRelation& rel, std::vector<std::vector<std::vector<std::uint32_t>>> sets)
      : sets_(std::move(sets)) {
    if (sets_.empty()) throw InvalidParameter("family needs n_max >= 1");
    for (auto& level : sets_) {
      if (level.size() != rel.size()) throw InvalidParameter("family level has wrong size");
      for (std::uint32_t b = 0; b < level.size(); ++b) {
        auto& s = level[b];
        if (s.empty()) throw InvalidParameter("Folner sets must be nonempty");
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        for (std::uint32_t m : s)
          if (!rel.related(m, b)) throw InvalidParameter("Folner set leaves the class");
      }
    }
  }

  int n_max() const { return static_cast<int>(sets_.size()); }
  const std::vector<std::uint32_t>& set(int n, std::uint32_t b) const {
    if (n < 1 || n > n_max()) throw InvalidParameter("family index out of range");
    return sets_[static_cast<std::size_t>(n - 1)][b];
  }

  bool centered() const {
    for (const auto& level : sets_)
      for (std::uint32_t b = 0; b < level.size(); ++b)
        if (!std::binary_search(level[b].begin(), level[b].end(), b)) return false;
    return true;
  }

 private:
  std::vector<std::vector<std::vector<std::uint32_t>>> sets_;
};

// A class-preserving bijection of the ground set.
class RelationAut {
 public:
  RelationAut(const FiniteRelation& rel, std::vector<std::uint32_t> perm) : perm_(std::move(perm)) {
    if (perm_.size() != rel.size()) throw InvalidParameter("automorphism table has wrong size");
    std::vector<bool> seen(perm_.size(), false);
    for (std::uint32_t b = 0; b < perm_.size(); ++b) {
      if (perm_[b] >= perm_.size() || seen[perm_[b]])
        throw InvalidParameter("automorphism is not a bijection");
      seen[perm_[b]] = true;
      if (!rel.related(b, perm_[b]))
        throw InvalidParameter("automorphism graph leaves the relation");
    }
  }

  static RelationAut identity(const FiniteRelation& rel) {
    std::vector<std::uint32_t> p(rel.size());
    std::iota(p.begin(), p.end(), 0u);
    return RelationAut(rel, std::move(p));
  }

  std::uint32_t operator()(std::uint32_t b) const { return perm_[b]; }
  const std::vector<std::uint32_t>& table() const { return perm_; }

 private:
  std::vector<std::uint32_t> perm_;
};

namespace detail {

// Fixed-width bit rows over a local index space; sets inside one class are
// tiny, so intersection tests collapse to a few word operations.
struct BitTable {
  std::size_t width = 0;
  std::vector<std::uint64_t> rows;  // row-major

  BitTable(std::size_t count, std::size_t bits) : width((bits + 63) / 64), rows(count * width, 0) {}
  std::uint64_t* row(std::size_t i) { return rows.data() + i * width; }
  const std::uint64_t* row(std::size_t i) const { return rows.data() + i * width; }
  void set(std::size_t i, std::size_t bit) { row(i)[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  bool meets(std::size_t i, std::size_t j) const {
    const std::uint64_t* a = row(i);
    const std::uint64_t* b = row(j);
    for (std::size_t w = 0; w < width; ++w)
      if (a[w] & b[w]) return true;
    return false;
  }
};

}  // namespace detail

// Least valid doubling constant: the exact maximum over (b, n) of
// |union of earlier-or-equal-level sets meeting F_n(b)| / |F_n(b)|.
inline Rat doubling_constant(const FiniteRelation& rel, const FolnerFamily& fam) {
  Rat best = 0;
  const int levels = fam.n_max();
  std::vector<std::uint32_t> local(rel.size(), 0);
  for (std::uint32_t cls = 0; cls < rel.num_classes(); ++cls) {
    const auto& members = rel.members(cls);
    const std::size_t count = members.size();
    for (std::size_t i = 0; i < count; ++i) local[members[i]] = static_cast<std::uint32_t>(i);
    detail::BitTable masks(count * static_cast<std::size_t>(levels), count);
    auto row_of = [&](int level, std::size_t i) {
      return static_cast<std::size_t>(level - 1) * count + i;
    };
    for (int level = 1; level <= levels; ++level)
      for (std::size_t i = 0; i < count; ++i)
        for (std::uint32_t e : fam.set(level, members[i]))
          masks.set(row_of(level, i), local[e]);
    std::vector<std::uint64_t> uni(masks.width);
    for (int n = 1; n <= levels; ++n) {
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t target = row_of(n, i);
        std::fill(uni.begin(), uni.end(), 0);
        for (int m = 1; m <= n; ++m)
          for (std::size_t j = 0; j < count; ++j) {
            const std::size_t cand = row_of(m, j);
            if (!masks.meets(target, cand)) continue;
            const std::uint64_t* src = masks.row(cand);
            for (std::size_t w = 0; w < masks.width; ++w) uni[w] |= src[w];
          }
        std::size_t union_count = 0;
        for (std::uint64_t w : uni) union_count += static_cast<std::size_t>(__builtin_popcountll(w));
        Rat ratio = rat(static_cast<long>(union_count),
                        static_cast<long>(fam.set(n, members[i]).size()));
        if (ratio > best) best = ratio;
      }
    }
  }
  return best;
}

// A_n[F; f](b): plain mean over F_n(b).
inline std::vector<Rat> relation_average(const FiniteRelation& rel, const FolnerFamily& fam,
                                         const std::vector<Rat>& f, int n) {
  std::vector<Rat> out(rel.size());
  for (std::uint32_t b = 0; b < rel.size(); ++b) {
    const auto& s = fam.set(n, b);
    Rat sum = 0;
    for (std::uint32_t m : s) sum += f[m];
    out[b] = sum / rat(static_cast<long>(s.size()));
  }
  return out;
}

// E[f | R(B)]: the nu-weighted mean over each class.
inline std::vector<Rat> invariant_cond_exp(const FiniteRelation& rel, const std::vector<Rat>& f) {
  std::vector<Rat> out(rel.size());
  for (std::uint32_t cls = 0; cls < rel.num_classes(); ++cls) {
    Rat mass = 0, sum = 0;
    for (std::uint32_t b : rel.members(cls)) {
      mass += rel.nu(b);
      sum += rel.nu(b) * f[b];
    }
    Rat mean = sum / mass;
    for (std::uint32_t b : rel.members(cls)) out[b] = mean;
  }
  return out;
}

// |F_n(b) symmetric-difference phi(F_n(b))| / |F_n(b)| per element.
inline std::vector<Rat> folner_defect(const FiniteRelation& rel, const FolnerFamily& fam,
                                      const RelationAut& phi, int n) {
  std::vector<Rat> out(rel.size());
  std::vector<bool> mark(rel.size(), false);
  for (std::uint32_t b = 0; b < rel.size(); ++b) {
    const auto& s = fam.set(n, b);
    for (std::uint32_t m : s) mark[m] = true;
    std::size_t overlap = 0;
    for (std::uint32_t m : s)
      if (mark[phi(m)]) ++overlap;
    const std::size_t sym_diff = 2 * (s.size() - overlap);
    out[b] = rat(static_cast<long>(sym_diff), static_cast<long>(s.size()));
    for (std::uint32_t m : s) mark[m] = false;
  }
  return out;
}

// The covering algorithm: greedy rounds of maximal elements under the
// three-clause comparison (disjoint / larger rho / equal rho and larger tie),
// removing everything whose set meets a selected set. Deterministic given
// (family, Y, rho, T); the input order of Y is irrelevant.
inline std::vector<std::uint32_t> covering_select(const FiniteRelation& rel, const FolnerFamily& fam,
                                                  std::vector<std::uint32_t> y_set,
                                                  const std::vector<int>& rho,
                                                  const std::vector<std::int64_t>& tie) {
  if (rho.size() != rel.size() || tie.size() != rel.size())
    throw InvalidParameter("rho and tie tables must cover the ground set");
  {
    std::vector<std::int64_t> sorted_tie = tie;
    std::sort(sorted_tie.begin(), sorted_tie.end());
    if (std::adjacent_find(sorted_tie.begin(), sorted_tie.end()) != sorted_tie.end())
      throw InvalidParameter("tie-break labels must be injective");
  }
  std::sort(y_set.begin(), y_set.end());
  y_set.erase(std::unique(y_set.begin(), y_set.end()), y_set.end());
  for (std::uint32_t y : y_set) {
    if (y >= rel.size()) throw InvalidParameter("Y element out of range");
    if (rho[y] < 1 || rho[y] > fam.n_max()) throw InvalidParameter("rho out of the family range");
  }
  // one bit row per Y element, over the whole ground set
  detail::BitTable masks(y_set.size(), rel.size());
  for (std::size_t i = 0; i < y_set.size(); ++i)
    for (std::uint32_t e : fam.set(rho[y_set[i]], y_set[i])) masks.set(i, e);
  std::vector<std::uint64_t> covered(masks.width, 0);  // union of selected sets
  auto meets_covered = [&](std::size_t i) {
    const std::uint64_t* m = masks.row(i);
    for (std::size_t w = 0; w < masks.width; ++w)
      if (m[w] & covered[w]) return true;
    return false;
  };
  std::vector<std::size_t> alive(y_set.size());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  std::vector<std::uint32_t> selected;
  while (!alive.empty()) {
    std::vector<std::size_t> maximal;
    for (std::size_t i : alive) {
      const std::uint32_t y1 = y_set[i];
      bool is_max = true;
      for (std::size_t j : alive) {
        if (i == j) continue;
        const std::uint32_t y2 = y_set[j];
        if (rho[y1] > rho[y2]) continue;
        if (rho[y1] == rho[y2] && tie[y1] > tie[y2]) continue;
        if (!masks.meets(i, j)) continue;
        is_max = false;
        break;
      }
      if (is_max) maximal.push_back(i);
    }
    for (std::size_t i : maximal) {
      selected.push_back(y_set[i]);
      const std::uint64_t* m = masks.row(i);
      for (std::size_t w = 0; w < masks.width; ++w) covered[w] |= m[w];
    }
    std::vector<std::size_t> next;
    for (std::size_t i : alive)
      if (!meets_covered(i)) next.push_back(i);
    alive = std::move(next);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

struct CoverCheck {
  bool disjoint_ok = false;
  bool measure_ok = false;
  Rat doubling;   // the exact C_d used in the comparison
  Rat mass_selected_union;
  Rat mass_total_union;
};

// Direct verification of both covering guarantees.
inline CoverCheck verify_covering(const FiniteRelation& rel, const FolnerFamily& fam,
                                  const std::vector<std::uint32_t>& y_set,
                                  const std::vector<int>& rho,
                                  const std::vector<std::uint32_t>& selected) {
  CoverCheck out;
  out.doubling = doubling_constant(rel, fam);
  std::vector<bool> covered(rel.size(), false);
  out.disjoint_ok = true;
  for (std::uint32_t z : selected)
    for (std::uint32_t m : fam.set(rho[z], z)) {
      if (covered[m]) out.disjoint_ok = false;
      covered[m] = true;
    }
  Rat z_mass = 0;
  for (std::uint32_t b = 0; b < rel.size(); ++b)
    if (covered[b]) z_mass += rel.nu(b);
  std::vector<bool> total(rel.size(), false);
  for (std::uint32_t y : y_set)
    for (std::uint32_t m : fam.set(rho[y], y)) total[m] = true;
  Rat y_mass = 0;
  for (std::uint32_t b = 0; b < rel.size(); ++b)
    if (total[b]) y_mass += rel.nu(b);
  out.mass_selected_union = z_mass;
  out.mass_total_union = y_mass;
  out.measure_ok = out.doubling * z_mass >= y_mass;
  return out;
}

struct MaximalCheck {
  Rat level_set_mass;  // nu(D_{n,t})
  Rat bound;           // (C_d / C_s) ||f||_1 / t
  bool pass = false;
};

// Theorem 2.3 at finite scale: nu{max_{i<=n} A_i[|f|] > t} against the
// covering bound with the exact doubling constant.
inline MaximalCheck maximal_check(const FiniteRelation& rel, const FolnerFamily& fam,
                                  const std::vector<Rat>& f, const Rat& t, int n,
                                  const Rat& c_s) {
  if (t <= 0) throw InvalidParameter("threshold must be positive");
  if (c_s <= 0) throw InvalidParameter("C_s must be positive");
  std::vector<Rat> abs_f(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) abs_f[i] = abs(f[i]);
  std::vector<Rat> maximal(rel.size(), rat(0));
  for (int i = 1; i <= n; ++i) {
    auto avg = relation_average(rel, fam, abs_f, i);
    for (std::uint32_t b = 0; b < rel.size(); ++b)
      if (avg[b] > maximal[b]) maximal[b] = avg[b];
  }
  MaximalCheck out;
  out.level_set_mass = 0;
  for (std::uint32_t b = 0; b < rel.size(); ++b)
    if (maximal[b] > t) out.level_set_mass += rel.nu(b);
  Rat l1 = 0;
  for (std::uint32_t b = 0; b < rel.size(); ++b) l1 += rel.nu(b) * abs_f[b];
  out.bound = doubling_constant(rel, fam) * l1 / (c_s * t);
  out.pass = out.level_set_mass <= out.bound;
  return out;
}

struct NonShrinking {
  bool certified = false;  // true only in the b-in-F_n(b) regime
  Rat value;               // C_s = 1 when certified, otherwise min sampled ratio
};

inline NonShrinking non_shrinking(const FiniteRelation& rel, const FolnerFamily& fam,
                                  int trials, std::uint64_t seed) {
  if (fam.centered()) return NonShrinking{true, rat(1)};
  NonShrinking out{false, rat(1)};
  Rng rng(seed);
  std::vector<bool> covered(rel.size(), false);
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint32_t> y_set;
    for (std::uint32_t b = 0; b < rel.size(); ++b)
      if (rng.coin()) y_set.push_back(b);
    if (y_set.empty()) y_set.push_back(static_cast<std::uint32_t>(rng.below(rel.size())));
    Rat y_mass = 0, union_mass = 0;
    std::vector<std::uint32_t> touched;
    for (std::uint32_t y : y_set) {
      y_mass += rel.nu(y);
      int n = static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(fam.n_max())));
      for (std::uint32_t m : fam.set(n, y))
        if (!covered[m]) {
          covered[m] = true;
          touched.push_back(m);
          union_mass += rel.nu(m);
        }
    }
    for (std::uint32_t m : touched) covered[m] = false;
    Rat ratio = union_mass / y_mass;
    if (ratio < out.value) out.value = ratio;
  }
  return out;
}

// The depth-L boundary model: ground set S_L(e) with uniform weights, classes
// by agreement at all coordinates > n0, Lemma 4.2 ball/sphere families for
// n = 1..n0.
struct BoundaryInstance {
  FiniteRelation relation;
  FolnerFamily ball;
  FolnerFamily sphere;
  std::vector<Word> ground;
  int depth = 0;
  int n0 = 0;
};

inline BoundaryInstance boundary_instance(int rank, int depth, int n0,
                                          std::uint64_t cap = kDefaultBruteCap) {
  if (n0 < 1 || depth < n0 + 1) throw InvalidParameter("boundary instance needs depth >= n0+1 >= 2");
  const std::uint64_t size = sphere_size_checked(rank, depth, cap);
  std::vector<Word> ground;
  ground.reserve(static_cast<std::size_t>(size));
  visit_sphere(rank, depth, [&](std::span<const Letter> ls) {
    ground.emplace_back(rank, std::vector<Letter>(ls.begin(), ls.end()));
  });
  // classes: words sharing all coordinates > n0, i.e. the same suffix
  std::map<std::vector<int>, std::uint32_t> suffix_ids;
  std::vector<std::uint32_t> class_id(ground.size());
  for (std::size_t b = 0; b < ground.size(); ++b) {
    std::vector<int> suffix;
    for (int i = n0; i < depth; ++i) suffix.push_back(ground[b].at(i).code());
    auto [it, fresh] = suffix_ids.emplace(std::move(suffix), static_cast<std::uint32_t>(suffix_ids.size()));
    class_id[b] = it->second;
  }
  std::vector<Rat> nu(ground.size(), rat(Int(1), sphere_size(rank, depth)));
  FiniteRelation rel(std::move(class_id), std::move(nu));
  auto build = [&](FolnerKind kind) {
    std::vector<std::vector<std::vector<std::uint32_t>>> sets(
        static_cast<std::size_t>(n0), std::vector<std::vector<std::uint32_t>>(ground.size()));
    for (std::size_t b = 0; b < ground.size(); ++b) {
      Prefix p(ground[b]);
      for (int n = 1; n <= n0; ++n) {
        for (const Prefix& q : folner_set(p, n, kind, depth))
          sets[static_cast<std::size_t>(n - 1)][b].push_back(
              static_cast<std::uint32_t>(sphere_index(q.word())));
      }
    }
    return FolnerFamily(rel, std::move(sets));
  };
  FolnerFamily ball = build(FolnerKind::Ball);
  FolnerFamily sphere = build(FolnerKind::Sphere);
  return BoundaryInstance{std::move(rel), std::move(ball), std::move(sphere), std::move(ground),
                          depth, n0};
}

// The ground-set automorphism induced by rewriting the first m letters. The
// rewrite fixes coordinate m and everything deeper, so classes survive as
// long as m-1 <= n0.
inline RelationAut relation_aut(const BoundaryInstance& inst, const PrefixPermutation& beta) {
  if (beta.order() - 1 > inst.n0)
    throw InvalidParameter("automorphism order exceeds the class depth; classes would move");
  std::vector<std::uint32_t> perm(inst.ground.size());
  for (std::size_t b = 0; b < inst.ground.size(); ++b) {
    Prefix image = beta.apply(Prefix(inst.ground[b]));
    perm[b] = static_cast<std::uint32_t>(sphere_index(image.word()));
  }
  return RelationAut(inst.relation, std::move(perm));
}

// --- seeded random instances --------------------------------------------------

struct RandomInstanceOptions {
  std::uint32_t min_points = 20;
  std::uint32_t max_points = 200;
  int max_n = 4;
  bool centered = false;
};

struct RelationInstance {
  FiniteRelation relation;
  FolnerFamily family;
};

inline RelationInstance random_relation_instance(std::uint64_t seed,
                                                 const RandomInstanceOptions& opt = {}) {
  Rng rng(seed);
  const std::uint32_t m_points =
      opt.min_points + static_cast<std::uint32_t>(rng.below(opt.max_points - opt.min_points + 1));
  const std::uint32_t k_classes = 1 + static_cast<std::uint32_t>(rng.below(std::max<std::uint32_t>(m_points / 4, 1)));
  std::vector<std::uint32_t> class_id(m_points);
  for (auto& c : class_id) c = static_cast<std::uint32_t>(rng.below(k_classes));
  // class-constant weights from small random per-class integers
  std::vector<long> unit(k_classes);
  for (auto& u : unit) u = 1 + static_cast<long>(rng.below(5));
  long total = 0;
  for (std::uint32_t b = 0; b < m_points; ++b) total += unit[class_id[b]];
  std::vector<Rat> nu(m_points);
  for (std::uint32_t b = 0; b < m_points; ++b) nu[b] = rat(unit[class_id[b]], total);
  FiniteRelation rel(std::move(class_id), std::move(nu));
  const int n_max = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_n)));
  std::vector<std::vector<std::vector<std::uint32_t>>> sets(
      static_cast<std::size_t>(n_max), std::vector<std::vector<std::uint32_t>>(rel.size()));
  for (int n = 1; n <= n_max; ++n) {
    for (std::uint32_t b = 0; b < rel.size(); ++b) {
      const auto& cls = rel.members(rel.class_of(b));
      auto& s = sets[static_cast<std::size_t>(n - 1)][b];
      for (std::uint32_t mbr : cls)
        if (rng.coin()) s.push_back(mbr);
      if (opt.centered) s.push_back(b);
      if (s.empty()) s.push_back(cls[rng.below(cls.size())]);
    }
  }
  FolnerFamily fam(rel, std::move(sets));
  return RelationInstance{std::move(rel), std::move(fam)};
}

struct CoveringQuery {
  std::vector<std::uint32_t> y_set;
  std::vector<int> rho;
  std::vector<std::int64_t> tie;
};

inline CoveringQuery random_covering_query(std::uint64_t seed, const FiniteRelation& rel,
                                           const FolnerFamily& fam) {
  Rng rng(seed);
  CoveringQuery q;
  for (std::uint32_t b = 0; b < rel.size(); ++b)
    if (rng.coin()) q.y_set.push_back(b);
  if (q.y_set.empty()) q.y_set.push_back(static_cast<std::uint32_t>(rng.below(rel.size())));
  q.rho.assign(rel.size(), 1);
  for (auto& r : q.rho) r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(fam.n_max())));
  std::vector<std::int64_t> labels(rel.size());
  std::iota(labels.begin(), labels.end(), 0);
  rng.shuffle(labels);
  q.tie = std::move(labels);
  return q;
}

// --- file format ---------------------------------------------------------------
// "points M classes K" / "class b k" / "nu b num/den" / "folner n b: b1 b2 ..."

inline void dump_relation_instance(std::ostream& os, const FiniteRelation& rel,
                                   const FolnerFamily& fam) {
  os << "points " << rel.size() << " classes " << rel.num_classes() << "\n";
  for (std::uint32_t b = 0; b < rel.size(); ++b)
    os << "class " << b << " " << rel.class_of(b) << "\n";
  for (std::uint32_t b = 0; b < rel.size(); ++b)
    os << "nu " << b << " " << to_string(rel.nu(b)) << "\n";
  for (int n = 1; n <= fam.n_max(); ++n)
    for (std::uint32_t b = 0; b < rel.size(); ++b) {
      os << "folner " << n << " " << b << ":";
      for (std::uint32_t m : fam.set(n, b)) os << " " << m;
      os << "\n";
    }
}

inline RelationInstance parse_relation_instance(std::istream& is) {
  std::string tag1, tag2;
  std::uint32_t m_points = 0, k_classes = 0;
  if (!(is >> tag1 >> m_points >> tag2 >> k_classes) || tag1 != "points" || tag2 != "classes")
    throw ParseError("instance header must be 'points M classes K'");
  std::vector<std::uint32_t> class_id(m_points, 0);
  std::vector<Rat> nu(m_points, rat(1, static_cast<long>(m_points)));
  std::map<int, std::vector<std::vector<std::uint32_t>>> folner;
  std::string line, key;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls >> key;
    if (key == "class") {
      std::uint32_t b, k;
      if (!(ls >> b >> k) || b >= m_points) throw ParseError("bad class line: " + line);
      class_id[b] = k;
    } else if (key == "nu") {
      std::uint32_t b;
      std::string v;
      if (!(ls >> b >> v) || b >= m_points) throw ParseError("bad nu line: " + line);
      nu[b] = parse_rat(v);
    } else if (key == "folner") {
      int n;
      std::uint32_t b;
      char colon;
      if (!(ls >> n >> b >> colon) || colon != ':' || n < 1 || b >= m_points)
        throw ParseError("bad folner line: " + line);
      auto& level = folner[n];
      level.resize(m_points);
      std::uint32_t mbr;
      while (ls >> mbr) level[b].push_back(mbr);
    } else {
      throw ParseError("unknown instance line: " + line);
    }
  }
  if (folner.empty()) throw ParseError("instance has no folner sets");
  const int n_max = folner.rbegin()->first;
  std::vector<std::vector<std::vector<std::uint32_t>>> sets(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    auto it = folner.find(n);
    if (it == folner.end()) throw ParseError("missing folner level " + std::to_string(n));
    sets[static_cast<std::size_t>(n - 1)] = std::move(it->second);
  }
  FiniteRelation rel(std::move(class_id), std::move(nu));
  FolnerFamily fam(rel, std::move(sets));
  return RelationInstance{std::move(rel), std::move(fam)};
}

}  // namespace fgb
