#pragma once

#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fgb/error.hpp"
#include "fgb/rational.hpp"
#include "fgb/rng.hpp"
#include "fgb/word.hpp"

namespace fgb {

struct Violation {
  int generator;  // 1-based; 0 for a global defect
  std::uint32_t point;
  std::string reason;
};

// A finite probability space with one bijection per generator. Freeness of
// the group means any r bijections define an action; validation checks
// bijectivity and that each map preserves the point weights.
class FiniteAction {
 public:
  FiniteAction(int rank, std::vector<Rat> weights, std::vector<std::vector<std::uint32_t>> gens)
      : rank_(rank), weights_(std::move(weights)), gens_(std::move(gens)) {
    detail::check_rank(rank_);
    if (gens_.size() != static_cast<std::size_t>(rank_))
      throw InvalidParameter("need exactly one map per generator");
    const std::size_t n = weights_.size();
    if (n == 0) throw InvalidParameter("empty point set");
    for (const auto& g : gens_)
      if (g.size() != n) throw InvalidParameter("generator map has wrong size");
    violation_ = find_violation();
    if (!violation_) build_inverses();
  }

  int rank() const { return rank_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(weights_.size()); }
  const std::vector<Rat>& weights() const { return weights_; }
  const Rat& weight(std::uint32_t x) const { return weights_[x]; }
  const std::vector<std::vector<std::uint32_t>>& generator_maps() const { return gens_; }

  // nullopt = valid action.
  const std::optional<Violation>& validate() const { return violation_; }
  bool ok() const { return !violation_.has_value(); }

  std::uint32_t apply_letter(Letter l, std::uint32_t x) const {
    require_ok();
    const auto& table = l.is_inverse() ? inv_[static_cast<std::size_t>(l.index() - 1)]
                                       : gens_[static_cast<std::size_t>(l.index() - 1)];
    return table[x];
  }

  // w acting as a group element: letters compose right to left.
  std::uint32_t apply_word(const Word& w, std::uint32_t x) const {
    if (w.rank() != rank_) throw RankMismatch("action and word rank differ");
    for (int i = w.size() - 1; i >= 0; --i) x = apply_letter(w.at(i), x);
    return x;
  }

  // The full point map of w, applied to every x at once.
  std::vector<std::uint32_t> point_map(const Word& w) const {
    std::vector<std::uint32_t> out(size());
    for (std::uint32_t x = 0; x < size(); ++x) out[x] = x;
    for (int i = w.size() - 1; i >= 0; --i) {
      const Letter l = w.at(i);
      require_ok();
      const auto& table = l.is_inverse() ? inv_[static_cast<std::size_t>(l.index() - 1)]
                                         : gens_[static_cast<std::size_t>(l.index() - 1)];
      for (std::uint32_t x = 0; x < size(); ++x) out[x] = table[out[x]];
    }
    return out;
  }

 private:
  void require_ok() const {
    if (violation_) throw InvalidParameter("action failed validation: " + violation_->reason);
  }

  std::optional<Violation> find_violation() const {
    Rat total = 0;
    for (const Rat& w : weights_) {
      if (w <= 0) return Violation{0, 0, "point weights must be positive"};
      total += w;
    }
    if (total != 1) return Violation{0, 0, "point weights must sum to 1"};
    for (int gi = 0; gi < rank_; ++gi) {
      const auto& g = gens_[static_cast<std::size_t>(gi)];
      std::vector<bool> seen(weights_.size(), false);
      for (std::uint32_t x = 0; x < weights_.size(); ++x) {
        if (g[x] >= weights_.size())
          return Violation{gi + 1, x, "image out of range"};
        if (seen[g[x]])
          return Violation{gi + 1, x, "generator map is not a bijection"};
        seen[g[x]] = true;
        if (weights_[g[x]] != weights_[x])
          return Violation{gi + 1, x, "generator does not preserve the measure"};
      }
    }
    return std::nullopt;
  }

  void build_inverses() {
    inv_.assign(gens_.size(), std::vector<std::uint32_t>(weights_.size()));
    for (std::size_t gi = 0; gi < gens_.size(); ++gi)
      for (std::uint32_t x = 0; x < weights_.size(); ++x) inv_[gi][gens_[gi][x]] = x;
  }

  int rank_;
  std::vector<Rat> weights_;
  std::vector<std::vector<std::uint32_t>> gens_;
  std::vector<std::vector<std::uint32_t>> inv_;
  std::optional<Violation> violation_;
};

// Observables live as plain per-point value vectors.
using ObsRat = std::vector<Rat>;
using ObsReal = std::vector<double>;

inline Rat obs_integral(const FiniteAction& a, const ObsRat& f) {
  Rat sum = 0;
  for (std::uint32_t x = 0; x < a.size(); ++x) sum += a.weight(x) * f[x];
  return sum;
}

inline Rat obs_l1_norm(const FiniteAction& a, const ObsRat& f) {
  Rat sum = 0;
  for (std::uint32_t x = 0; x < a.size(); ++x) sum += a.weight(x) * abs(f[x]);
  return sum;
}

inline Rat obs_sup_norm(const ObsRat& f) {
  Rat best = 0;
  for (const Rat& v : f)
    if (abs(v) > best) best = abs(v);
  return best;
}

namespace detail {
struct UnionFind {
  explicit UnionFind(std::uint32_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
  std::vector<std::uint32_t> parent, size;
};
}  // namespace detail

struct OrbitPartition {
  std::vector<std::uint32_t> id;  // orbit id per point, numbered by first occurrence
  std::uint32_t count = 0;
};

// Connected components of X under all length-2 compositions sigma_s sigma_t;
// these generate the even subgroup, so the parts are exactly its orbits.
inline OrbitPartition even_orbits(const FiniteAction& a) {
  if (!a.ok()) throw InvalidParameter("even_orbits needs a valid action");
  detail::UnionFind uf(a.size());
  const int codes = 2 * a.rank();
  for (int c1 = 0; c1 < codes; ++c1)
    for (int c2 = 0; c2 < codes; ++c2)
      for (std::uint32_t x = 0; x < a.size(); ++x)
        uf.unite(x, a.apply_letter(Letter(c1), a.apply_letter(Letter(c2), x)));
  OrbitPartition p;
  p.id.assign(a.size(), 0);
  std::vector<std::int64_t> label(a.size(), -1);
  for (std::uint32_t x = 0; x < a.size(); ++x) {
    std::uint32_t root = uf.find(x);
    if (label[root] < 0) label[root] = p.count++;
    p.id[x] = static_cast<std::uint32_t>(label[root]);
  }
  return p;
}

// E[f | F^2]: the lambda-weighted mean over each even orbit.
inline ObsRat cond_exp_even(const FiniteAction& a, const ObsRat& f) {
  OrbitPartition p = even_orbits(a);
  std::vector<Rat> mass(p.count, rat(0)), sum(p.count, rat(0));
  for (std::uint32_t x = 0; x < a.size(); ++x) {
    mass[p.id[x]] += a.weight(x);
    sum[p.id[x]] += a.weight(x) * f[x];
  }
  ObsRat out(a.size());
  for (std::uint32_t x = 0; x < a.size(); ++x) out[x] = sum[p.id[x]] / mass[p.id[x]];
  return out;
}

// --- builders ---------------------------------------------------------------

inline FiniteAction from_permutations(int rank, std::vector<Rat> weights,
                                      std::vector<std::vector<std::uint32_t>> gens) {
  FiniteAction a(rank, std::move(weights), std::move(gens));
  if (!a.ok()) throw InvalidParameter("invalid action: " + a.validate()->reason);
  return a;
}

// The classical free pair of unimodular maps acting on (Z/N)^2 with uniform
// weights: a1 (x,y) -> (x+2y, y), a2 (x,y) -> (x, y+2x). N must be odd, since
// mod 2 both maps collapse to the identity.
inline FiniteAction sanov_mod(std::uint32_t n_mod) {
  if (n_mod < 3 || n_mod % 2 == 0) throw InvalidParameter("sanov_mod needs odd N >= 3");
  const std::uint32_t n_points = n_mod * n_mod;
  std::vector<std::vector<std::uint32_t>> gens(2, std::vector<std::uint32_t>(n_points));
  for (std::uint32_t x = 0; x < n_mod; ++x)
    for (std::uint32_t y = 0; y < n_mod; ++y) {
      const std::uint32_t p = x * n_mod + y;
      gens[0][p] = ((x + 2 * y) % n_mod) * n_mod + y;
      gens[1][p] = x * n_mod + (y + 2 * x) % n_mod;
    }
  std::vector<Rat> weights(n_points, rat(1, static_cast<long>(n_points)));
  return from_permutations(2, std::move(weights), std::move(gens));
}

inline FiniteAction random_action(std::uint32_t n_points, std::uint64_t seed, int rank = 2) {
  if (n_points == 0) throw InvalidParameter("empty point set");
  Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> gens(static_cast<std::size_t>(rank));
  for (auto& g : gens) {
    g.resize(n_points);
    std::iota(g.begin(), g.end(), 0u);
    rng.shuffle(g);
  }
  std::vector<Rat> weights(n_points, rat(1, static_cast<long>(n_points)));
  return from_permutations(rank, std::move(weights), std::move(gens));
}

// --- file format -------------------------------------------------------------
// "rank r points N" / optional "lambda x num/den" lines (omitted = uniform) /
// "gen i: j0 j1 ... j_{N-1}" per generator / optional "obs x value" lines.

struct ActionFile {
  FiniteAction action;
  std::optional<ObsRat> observable;
};

inline void dump_action(std::ostream& os, const FiniteAction& a, const ObsRat* obs = nullptr) {
  os << "rank " << a.rank() << " points " << a.size() << "\n";
  bool uniform = true;
  for (std::uint32_t x = 0; x < a.size(); ++x)
    if (a.weight(x) != rat(1, static_cast<long>(a.size()))) uniform = false;
  if (!uniform)
    for (std::uint32_t x = 0; x < a.size(); ++x)
      os << "lambda " << x << " " << to_string(a.weight(x)) << "\n";
  for (int gi = 1; gi <= a.rank(); ++gi) {
    os << "gen " << gi << ":";
    for (std::uint32_t x = 0; x < a.size(); ++x)
      os << " " << a.generator_maps()[static_cast<std::size_t>(gi - 1)][x];
    os << "\n";
  }
  if (obs)
    for (std::uint32_t x = 0; x < a.size(); ++x)
      os << "obs " << x << " " << to_string((*obs)[x]) << "\n";
}

inline ActionFile parse_action(std::istream& is) {
  std::string tag1, tag2;
  int rank = 0;
  std::uint32_t n_points = 0;
  if (!(is >> tag1 >> rank >> tag2 >> n_points) || tag1 != "rank" || tag2 != "points")
    throw ParseError("action header must be 'rank r points N'");
  if (n_points == 0) throw ParseError("action needs at least one point");
  std::vector<Rat> weights(n_points, rat(1, static_cast<long>(n_points)));
  std::vector<std::vector<std::uint32_t>> gens(static_cast<std::size_t>(rank < 0 ? 0 : rank));
  std::optional<ObsRat> obs;
  std::string line, key;
  std::getline(is, line);  // finish header line
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls >> key;
    if (key == "lambda") {
      std::uint32_t x;
      std::string v;
      if (!(ls >> x >> v) || x >= n_points) throw ParseError("bad lambda line: " + line);
      weights[x] = parse_rat(v);
    } else if (key == "gen") {
      int gi;
      char colon;
      if (!(ls >> gi >> colon) || colon != ':' || gi < 1 || gi > rank)
        throw ParseError("bad gen line: " + line);
      auto& g = gens[static_cast<std::size_t>(gi - 1)];
      g.resize(n_points);
      for (std::uint32_t x = 0; x < n_points; ++x)
        if (!(ls >> g[x])) throw ParseError("gen table truncated: " + line);
    } else if (key == "obs") {
      if (!obs) obs.emplace(n_points, rat(0));
      std::uint32_t x;
      std::string v;
      if (!(ls >> x >> v) || x >= n_points) throw ParseError("bad obs line: " + line);
      (*obs)[x] = parse_rat(v);
    } else {
      throw ParseError("unknown action line: " + line);
    }
  }
  for (const auto& g : gens)
    if (g.empty()) throw ParseError("missing gen line for some generator");
  return ActionFile{FiniteAction(rank, std::move(weights), std::move(gens)), std::move(obs)};
}

}  // namespace fgb
