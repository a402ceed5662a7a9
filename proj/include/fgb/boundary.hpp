#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fgb/error.hpp"
#include "fgb/rational.hpp"
#include "fgb/word.hpp"

namespace fgb {

// A boundary point known to finite depth: the first L letters of an infinite
// reduced sequence. Every operation states the depth it needs and throws
// InsufficientDepth instead of silently truncating.
class Prefix {
 public:
  explicit Prefix(Word w) : word_(std::move(w)) {
    if (word_.size() < 1) throw InvalidParameter("boundary prefix needs depth >= 1");
  }

  static Prefix parse(int rank, std::string_view text) { return Prefix(Word::parse(rank, text)); }

  const Word& word() const { return word_; }
  int rank() const { return word_.rank(); }
  int depth() const { return word_.size(); }
  Letter at(int i) const { return word_.at(i); }  // 0-based
  std::string str() const { return word_.str(); }

  Prefix truncated(int new_depth) const {
    if (new_depth < 1 || new_depth > depth()) throw InsufficientDepth("cannot truncate to depth " + std::to_string(new_depth));
    std::vector<Letter> ls(word_.letters().begin(), word_.letters().begin() + new_depth);
    return Prefix(Word(rank(), std::move(ls)));
  }

  friend bool operator==(const Prefix& a, const Prefix& b) { return a.word_ == b.word_; }
  friend auto operator<=>(const Prefix& a, const Prefix& b) { return a.word_ <=> b.word_; }

 private:
  Word word_;
};

// nu(O_p) = (2r)^{-1} (2r-1)^{-|p|+1}; the empty word carries the whole boundary.
inline Rat cylinder_measure(const Word& p) {
  if (p.is_identity()) return rat(1);
  const int r = p.rank();
  return rat(Int(1), Int(2 * r) * int_pow(2 * r - 1, static_cast<unsigned long>(p.size() - 1)));
}

// O(stem) minus the cylinder of one child: the set of boundary points that
// extend stem but avoid stem*excluded. Stored structurally so its measure is
// exact at any rank.
class Annulus {
 public:
  Annulus(Word stem, Letter excluded) : stem_(std::move(stem)), excluded_(excluded) {
    if (stem_.size() < 1) throw InvalidParameter("annulus stem must be nonempty");
    if (excluded.code() >= 2 * stem_.rank()) throw RankMismatch("excluded letter outside rank");
    if (stem_.at(stem_.size() - 1) == excluded.inverse())
      throw InvalidParameter("stem*excluded is not reduced");
  }

  const Word& stem() const { return stem_; }
  Letter excluded() const { return excluded_; }
  int rank() const { return stem_.rank(); }

  Word excluded_child() const {
    std::vector<Letter> ls = stem_.letters();
    ls.push_back(excluded_);
    return Word(stem_.rank(), std::move(ls));
  }

  std::string str() const { return stem_.str() + "!" + excluded_.str(); }

  static Annulus parse(int rank, std::string_view text) {
    auto bang = text.find('!');
    if (bang == std::string_view::npos) throw ParseError("annulus literal needs 'stem!letter'");
    Word stem = Word::parse(rank, text.substr(0, bang));
    Word tail = Word::parse(rank, text.substr(bang + 1));
    if (tail.size() != 1) throw ParseError("annulus exclusion must be a single letter");
    return Annulus(std::move(stem), tail.at(0));
  }

 private:
  Word stem_;
  Letter excluded_;
};

inline Rat annulus_measure(const Annulus& a) {
  return cylinder_measure(a.stem()) - cylinder_measure(a.excluded_child());
}

// Membership test for a prefix that is deep enough to decide it.
inline bool annulus_contains(const Annulus& a, const Prefix& p) {
  const int n = a.stem().size();
  if (p.depth() < n + 1) throw InsufficientDepth("annulus membership needs depth >= " + std::to_string(n + 1));
  for (int i = 0; i < n; ++i)
    if (p.at(i) != a.stem().at(i)) return false;
  return p.at(n) != a.excluded();
}

struct BoundaryImage {
  Prefix prefix;
  int cancelled;  // the k of the action formula
};

// g * (xi_1, xi_2, ...) = (t_1, ..., t_{n-k}, xi_{k+1}, ...) where k is the
// longest initial segment of xi cancelling the tail of g.
inline BoundaryImage boundary_action(const Word& g, const Prefix& p) {
  if (g.rank() != p.rank()) throw RankMismatch("action word and prefix have different ranks");
  const int n = g.size();
  const int L = p.depth();
  int k = 0;
  while (k < n && k < L && p.at(k).inverse() == g.at(n - 1 - k)) ++k;
  if (k == L && k < n)
    throw InsufficientDepth("whole prefix cancels while letters of g remain");
  if (L + n - 2 * k < 1)
    throw InsufficientDepth("action result has depth 0; deepen the prefix");
  std::vector<Letter> out;
  out.reserve(static_cast<std::size_t>(L + n - 2 * k));
  for (int i = 0; i < n - k; ++i) out.push_back(g.at(i));
  for (int i = k; i < L; ++i) out.push_back(p.at(i));
  return BoundaryImage{Prefix(Word(g.rank(), std::move(out))), k};
}

// d(nu o g)/d(nu) at p: (2r-1)^{2k-|g|}.
inline Rat radon_nikodym(const Word& g, const Prefix& p) {
  const int k = boundary_action(g, p).cancelled;
  return rat_pow(rat(2 * g.rank() - 1), 2L * k - g.size());
}

// h_xi(g) = m - n for the split g = xi_1..xi_n t_1..t_m with t_1 != xi_{n+1}.
inline int horofunction(const Prefix& p, const Word& g) {
  if (g.rank() != p.rank()) throw RankMismatch("horofunction word and prefix have different ranks");
  if (p.depth() < g.size())
    throw InsufficientDepth("horofunction needs depth >= |g|");
  int n = 0;
  while (n < g.size() && g.at(n) == p.at(n)) ++n;
  const int m = g.size() - n;
  return m - n;
}

// H_xi intersected with the sphere of the given (even) radius: the words
// xi_1..xi_n t_1..t_n with t_1 != xi_{n+1}, in lexicographic order of t.
inline std::vector<Word> horosphere_elements(const Prefix& p, int radius) {
  if (radius < 0) throw InvalidParameter("negative radius");
  if (radius % 2 != 0)
    throw EvenRadiusRequired("horosphere meets no odd sphere (radius " + std::to_string(radius) + ")");
  const int n = radius / 2;
  if (n == 0) return {Word::identity(p.rank())};
  if (p.depth() < n + 1) throw InsufficientDepth("horosphere elements need depth >= " + std::to_string(n + 1));
  const int r = p.rank();
  std::vector<Word> out;
  std::vector<Letter> cur(p.word().letters().begin(), p.word().letters().begin() + n);
  cur.resize(static_cast<std::size_t>(2 * n), Letter(0));
  // positions n..2n-1 hold t_1..t_n
  auto rec = [&](auto&& self, int i) -> void {
    if (i == 2 * n) {
      out.emplace_back(r, cur);
      return;
    }
    for (int c = 0; c < 2 * r; ++c) {
      Letter l(c);
      if (l == cur[static_cast<std::size_t>(i - 1)].inverse()) continue;
      if (i == n && l == p.at(n)) continue;  // t_1 != xi_{n+1}
      cur[static_cast<std::size_t>(i)] = l;
      self(self, i + 1);
    }
  };
  rec(rec, n);
  return out;
}

enum class FolnerKind { Ball, Sphere };

// The depth-L realizations of the Lemma 4.2 sets: all depth-L words agreeing
// with p at every coordinate > n (ball), with the extra constraint t_n != xi_n
// for the sphere. Lexicographic order.
inline std::vector<Prefix> folner_set(const Prefix& p, int n, FolnerKind kind, int out_depth) {
  if (n < 1) throw InvalidParameter("folner sets need n >= 1");
  if (out_depth < n + 1) throw InvalidParameter("output depth must be >= n+1");
  if (p.depth() < out_depth) throw InsufficientDepth("folner_set needs depth >= output depth");
  const int r = p.rank();
  std::vector<Prefix> out;
  std::vector<Letter> cur;
  cur.reserve(static_cast<std::size_t>(out_depth));
  cur.resize(static_cast<std::size_t>(out_depth), Letter(0));
  for (int i = n; i < out_depth; ++i) cur[static_cast<std::size_t>(i)] = p.at(i);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n) {
      out.emplace_back(Word(r, cur));
      return;
    }
    for (int c = 0; c < 2 * r; ++c) {
      Letter l(c);
      if (i > 0 && l == cur[static_cast<std::size_t>(i - 1)].inverse()) continue;
      if (i == n - 1) {
        if (l == cur[static_cast<std::size_t>(n)].inverse()) continue;  // junction with fixed tail
        if (kind == FolnerKind::Sphere && l == p.at(n - 1)) continue;   // t_n != xi_n
      }
      cur[static_cast<std::size_t>(i)] = l;
      self(self, i + 1);
    }
  };
  // generate free positions left to right for lexicographic output order,
  // but the junction constraint sits at position n-1, so recurse over 0..n-1
  rec(rec, 0);
  return out;
}

// d_partial: 1/j where j is the first position (1-based) where the prefixes
// disagree. Full agreement through the common depth is an error, not a bound.
inline Rat boundary_metric(const Prefix& a, const Prefix& b) {
  if (a.rank() != b.rank()) throw RankMismatch("metric of prefixes with different ranks");
  const int m = a.depth() < b.depth() ? a.depth() : b.depth();
  for (int i = 0; i < m; ++i)
    if (a.at(i) != b.at(i)) return rat(1, i + 1);
  throw InsufficientDepth("prefixes agree through their common depth");
}

// P_partial: drop the first letter (= action by xi_1^{-1}).
inline Prefix shift(const Prefix& p) {
  if (p.depth() < 2) throw InsufficientDepth("shift needs depth >= 2");
  std::vector<Letter> ls(p.word().letters().begin() + 1, p.word().letters().end());
  return Prefix(Word(p.rank(), std::move(ls)));
}

namespace detail {

// The middle component of the K bijection, defined (as the repaired contract
// requires) on reduced triples only: the cyclic successor of mid within
// S \ {prev^{-1}, next^{-1}} under the canonical letter order.
inline Letter k_successor(int rank, Letter prev, Letter mid, Letter next) {
  const int top = 2 * rank;
  int banned1 = prev.inverse().code();
  int banned2 = next.inverse().code();
  if (mid.code() == banned1 || mid.code() == banned2)
    throw InvalidParameter("K applied to a non-reduced triple");
  int c = mid.code();
  for (int step = 0; step < top; ++step) {
    c = (c + 1) % top;
    if (c != banned1 && c != banned2) return Letter(c);
  }
  throw InvalidParameter("K domain empty");  // unreachable for rank >= 2
}

inline Letter k_predecessor(int rank, Letter prev, Letter mid, Letter next) {
  const int top = 2 * rank;
  int banned1 = prev.inverse().code();
  int banned2 = next.inverse().code();
  int c = mid.code();
  for (int step = 0; step < top; ++step) {
    c = (c + top - 1) % top;
    if (c != banned1 && c != banned2) return Letter(c);
  }
  throw InvalidParameter("K domain empty");
}

inline void check_prop56_n(int n) {
  if (n <= 5) throw InvalidParameter("prop 5.6 maps need n > 5");
}

}  // namespace detail

// omega: change coordinate n (1-based) to its K-derangement. Permutes the
// depth-L prefixes for every L >= n+1 and fixes all other coordinates.
inline Prefix omega_map(const Prefix& p, int n) {
  detail::check_prop56_n(n);
  if (p.depth() < n + 1) throw InsufficientDepth("omega needs depth >= n+1");
  std::vector<Letter> ls = p.word().letters();
  ls[static_cast<std::size_t>(n - 1)] =
      detail::k_successor(p.rank(), p.at(n - 2), p.at(n - 1), p.at(n));
  return Prefix(Word(p.rank(), std::move(ls)));
}

inline Prefix omega_inverse_map(const Prefix& p, int n) {
  detail::check_prop56_n(n);
  if (p.depth() < n + 1) throw InsufficientDepth("omega inverse needs depth >= n+1");
  std::vector<Letter> ls = p.word().letters();
  ls[static_cast<std::size_t>(n - 1)] =
      detail::k_predecessor(p.rank(), p.at(n - 2), p.at(n - 1), p.at(n));
  return Prefix(Word(p.rank(), std::move(ls)));
}

// psi o omega: (s_3,...,s_{n-1}, s'_n, s_n^{-1}, s'_n, s_{n+1}, ...).
// The output keeps every coordinate the input determines (depth L).
inline Prefix psi_omega_map(const Prefix& p, int n) {
  detail::check_prop56_n(n);
  if (p.depth() < n + 3) throw InsufficientDepth("psi_omega needs depth >= n+3");
  const Letter s_prime =
      detail::k_successor(p.rank(), p.at(n - 2), p.at(n - 1), p.at(n));
  std::vector<Letter> ls;
  ls.reserve(static_cast<std::size_t>(p.depth()));
  for (int i = 2; i <= n - 2; ++i) ls.push_back(p.at(i));
  ls.push_back(s_prime);
  ls.push_back(p.at(n - 1).inverse());
  ls.push_back(s_prime);
  for (int i = n; i < p.depth(); ++i) ls.push_back(p.at(i));
  return Prefix(Word(p.rank(), std::move(ls)));
}

enum class Prop56Which { Omega, PsiOmega };

inline Prefix prop56_map(const Prefix& p, int n, Prop56Which which) {
  return which == Prop56Which::Omega ? omega_map(p, n) : psi_omega_map(p, n);
}

// g = (s_3...s_{n-1}) s'_n (s_1...s_n)^{-1}: applied to xi it yields
// P^2 omega(xi), applied to omega(xi) it yields psi(omega(xi)).
inline Word prop56_witness(const Prefix& p, int n) {
  detail::check_prop56_n(n);
  if (p.depth() < n + 1) throw InsufficientDepth("prop 5.6 witness needs depth >= n+1");
  const Letter s_prime =
      detail::k_successor(p.rank(), p.at(n - 2), p.at(n - 1), p.at(n));
  std::vector<Letter> head;
  for (int i = 2; i <= n - 2; ++i) head.push_back(p.at(i));
  head.push_back(s_prime);
  std::vector<Letter> block;
  for (int i = 0; i < n; ++i) block.push_back(p.at(i));
  Word a(p.rank(), std::move(head));
  Word b = invert(Word(p.rank(), std::move(block)));
  return multiply(a, b).word;
}

// g_1 with g_1 xi = omega(xi): (s_1...s_{n-1} s'_n)(s_1...s_n)^{-1}.
inline Word omega_witness(const Prefix& p, int n) {
  detail::check_prop56_n(n);
  if (p.depth() < n + 1) throw InsufficientDepth("omega witness needs depth >= n+1");
  const Letter s_prime =
      detail::k_successor(p.rank(), p.at(n - 2), p.at(n - 1), p.at(n));
  std::vector<Letter> head;
  for (int i = 0; i <= n - 2; ++i) head.push_back(p.at(i));
  head.push_back(s_prime);
  std::vector<Letter> block;
  for (int i = 0; i < n; ++i) block.push_back(p.at(i));
  Word a(p.rank(), std::move(head));
  Word b = invert(Word(p.rank(), std::move(block)));
  return multiply(a, b).word;
}

// A permutation of the depth-m reduced words, acting on any deeper prefix by
// rewriting its first m letters. Induces an inner automorphism of order m.
class PrefixPermutation {
 public:
  PrefixPermutation(int rank, int depth_m, std::vector<std::uint64_t> table)
      : rank_(rank), depth_m_(depth_m), table_(std::move(table)) {
    if (table_.size() != sphere_size_checked(rank_, depth_m_))
      throw InvalidParameter("permutation table has wrong size");
  }

  int rank() const { return rank_; }
  int order() const { return depth_m_; }
  const std::vector<std::uint64_t>& table() const { return table_; }

  std::uint64_t apply_index(std::uint64_t i) const { return table_[static_cast<std::size_t>(i)]; }

  Prefix apply(const Prefix& p) const {
    if (p.rank() != rank_) throw RankMismatch("permutation and prefix rank differ");
    if (p.depth() < depth_m_) throw InsufficientDepth("prefix shallower than permutation order");
    std::uint64_t idx = sphere_index(
        rank_, std::span<const Letter>(p.word().letters().data(), static_cast<std::size_t>(depth_m_)));
    Word head = word_at_sphere_index(rank_, depth_m_, table_[static_cast<std::size_t>(idx)]);
    std::vector<Letter> ls = head.letters();
    for (int i = depth_m_; i < p.depth(); ++i) ls.push_back(p.at(i));
    return Prefix(Word(rank_, std::move(ls)));
  }

 private:
  int rank_;
  int depth_m_;
  std::vector<std::uint64_t> table_;
};

// The Lemma 4.4 construction, specialized to the minimal bijection: swap the
// depth-m projections of p and q, fix everything else. Requires the last
// coordinate to match, which is exactly when some beta exists.
inline PrefixPermutation build_inner_automorphism(const Prefix& p, const Prefix& q, int m) {
  if (p.rank() != q.rank()) throw RankMismatch("prefixes of different ranks");
  if (m < 1) throw InvalidParameter("permutation depth must be >= 1");
  if (p.depth() < m || q.depth() < m) throw InsufficientDepth("build_inner_automorphism needs depth >= m");
  if (p.at(m - 1) != q.at(m - 1))
    throw IncompatiblePair("no last-coordinate-preserving bijection maps p to q at depth " + std::to_string(m));
  const std::uint64_t size = sphere_size_checked(p.rank(), m);
  std::vector<std::uint64_t> table(static_cast<std::size_t>(size));
  for (std::uint64_t i = 0; i < size; ++i) table[static_cast<std::size_t>(i)] = i;
  std::uint64_t ip = sphere_index(
      p.rank(), std::span<const Letter>(p.word().letters().data(), static_cast<std::size_t>(m)));
  std::uint64_t iq = sphere_index(
      q.rank(), std::span<const Letter>(q.word().letters().data(), static_cast<std::size_t>(m)));
  std::swap(table[static_cast<std::size_t>(ip)], table[static_cast<std::size_t>(iq)]);
  return PrefixPermutation(p.rank(), m, std::move(table));
}

}  // namespace fgb
