#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fgb/boundary.hpp"
#include "fgb/error.hpp"
#include "fgb/rational.hpp"
#include "fgb/word.hpp"

namespace fgb {

// Piecewise-constant function on the depth-m cylinders, stored at its native
// depth and refined on demand. Values are indexed by lexicographic sphere
// rank; depth 0 is the constant function.
class Density {
 public:
  Density(int rank, int depth, std::vector<Rat> values)
      : rank_(rank), depth_(depth), values_(std::move(values)) {
    detail::check_rank(rank_);
    if (depth_ < 0) throw InvalidParameter("negative density depth");
    if (values_.size() != sphere_size_checked(rank_, depth_))
      throw InvalidParameter("density table has wrong size");
    for (const Rat& v : values_)
      if (v < 0) throw InvalidParameter("density values must be nonnegative");
  }

  static Density constant(int rank, const Rat& v) { return Density(rank, 0, {v}); }
  static Density uniform(int rank) { return constant(rank, rat(1)); }

  int rank() const { return rank_; }
  int depth() const { return depth_; }
  const std::vector<Rat>& values() const { return values_; }

  const Rat& value_at_index(std::uint64_t i) const { return values_[static_cast<std::size_t>(i)]; }

  // Value on the cylinder containing O_w; needs |w| >= depth.
  const Rat& value_on(const Word& w) const {
    if (w.rank() != rank_) throw RankMismatch("density and word rank differ");
    if (w.size() < depth_) throw InsufficientDepth("word shorter than density depth");
    std::uint64_t idx = sphere_index(
        rank_, std::span<const Letter>(w.letters().data(), static_cast<std::size_t>(depth_)));
    return values_[static_cast<std::size_t>(idx)];
  }

  const Rat& value_on(const Prefix& p) const { return value_on(p.word()); }

  Rat integral() const {
    Rat sum = 0;
    for (const Rat& v : values_) sum += v;
    return sum * rat(Int(1), sphere_size(rank_, depth_));
  }

  bool is_probability() const { return integral() == 1; }

  // Same function, deeper table.
  Density refined(int new_depth) const {
    if (new_depth < depth_) throw InvalidParameter("refinement must not lose depth");
    if (new_depth == depth_) return *this;
    std::uint64_t size = sphere_size_checked(rank_, new_depth);
    std::vector<Rat> out(static_cast<std::size_t>(size));
    if (depth_ == 0) {
      for (auto& v : out) v = values_[0];
    } else {
      const std::uint64_t block = static_cast<std::uint64_t>(
          mpz_class(int_pow(2 * rank_ - 1, static_cast<unsigned long>(new_depth - depth_))).get_ui());
      for (std::uint64_t i = 0; i < values_.size(); ++i)
        for (std::uint64_t j = 0; j < block; ++j) out[static_cast<std::size_t>(i * block + j)] = values_[static_cast<std::size_t>(i)];
    }
    return Density(rank_, new_depth, std::move(out));
  }

 private:
  int rank_;
  int depth_;
  std::vector<Rat> values_;
};

// Integral of psi over the cylinder O_w, exact for any relative depth.
inline Rat cylinder_integral(const Density& psi, const Word& w) {
  if (w.rank() != psi.rank()) throw RankMismatch("density and word rank differ");
  const int m = psi.depth();
  if (w.size() >= m) return psi.value_on(w) * cylinder_measure(w);
  // descendants of w occupy a contiguous index block at depth m
  std::uint64_t block = 1;
  if (w.size() == 0) {
    block = sphere_size_checked(psi.rank(), m);
  } else {
    block = static_cast<std::uint64_t>(
        mpz_class(int_pow(2 * psi.rank() - 1, static_cast<unsigned long>(m - w.size()))).get_ui());
  }
  const std::uint64_t start = sphere_index(w) * block;
  Rat sum = 0;
  for (std::uint64_t j = 0; j < block; ++j) sum += psi.value_at_index(start + j);
  return sum * rat(Int(1), sphere_size(psi.rank(), m));
}

// rho_w = chi_{O_w} / nu(O_w).
inline Density sector_density(const Word& w) {
  if (w.size() < 1) throw InvalidParameter("sector density needs |w| >= 1");
  std::uint64_t size = sphere_size_checked(w.rank(), w.size());
  std::vector<Rat> vals(static_cast<std::size_t>(size), rat(0));
  vals[static_cast<std::size_t>(sphere_index(w))] = rat(Int(1), Int(1)) / cylinder_measure(w);
  return Density(w.rank(), w.size(), std::move(vals));
}

// E[psi | Sigma_n]: conditional expectation on the depth-n cylinder algebra.
inline Density martingale_project(const Density& psi, int n) {
  if (n < 0) throw InvalidParameter("negative projection depth");
  const int m = psi.depth();
  if (n >= m) return psi.refined(n);
  std::uint64_t size = sphere_size_checked(psi.rank(), n);
  const std::uint64_t block = (n == 0)
      ? sphere_size_checked(psi.rank(), m)
      : static_cast<std::uint64_t>(
            mpz_class(int_pow(2 * psi.rank() - 1, static_cast<unsigned long>(m - n))).get_ui());
  std::vector<Rat> out(static_cast<std::size_t>(size));
  for (std::uint64_t i = 0; i < size; ++i) {
    Rat sum = 0;
    for (std::uint64_t j = 0; j < block; ++j) sum += psi.value_at_index(i * block + j);
    out[static_cast<std::size_t>(i)] = sum * rat(Int(1), Int(block));  // block mean
  }
  return Density(psi.rank(), n, std::move(out));
}

namespace detail {
inline std::pair<Density, Density> to_common_depth(const Density& a, const Density& b) {
  if (a.rank() != b.rank()) throw RankMismatch("densities of different ranks");
  const int d = a.depth() > b.depth() ? a.depth() : b.depth();
  return {a.refined(d), b.refined(d)};
}
}  // namespace detail

inline bool same_function(const Density& a, const Density& b) {
  auto [x, y] = detail::to_common_depth(a, b);
  return x.values() == y.values();
}

inline Rat inner_product(const Density& a, const Density& b) {
  auto [x, y] = detail::to_common_depth(a, b);
  Rat sum = 0;
  for (std::size_t i = 0; i < x.values().size(); ++i) sum += x.values()[i] * y.values()[i];
  return sum * rat(Int(1), sphere_size(a.rank(), x.depth()));
}

// ||psi||_q^q = sum |psi_w|^q nu(O_w), exact for integer q >= 1.
inline Rat lq_norm_pow(const Density& psi, unsigned q) {
  if (q < 1) throw InvalidParameter("q must be >= 1");
  Rat sum = 0;
  for (const Rat& v : psi.values()) sum += rat_pow(abs(v), static_cast<long>(q));
  return sum * rat(Int(1), sphere_size(psi.rank(), psi.depth()));
}

inline Rat linf_norm(const Density& psi) {
  Rat best = 0;
  for (const Rat& v : psi.values())
    if (abs(v) > best) best = abs(v);
  return best;
}

inline Rat l1_distance(const Density& a, const Density& b) {
  auto [x, y] = detail::to_common_depth(a, b);
  Rat sum = 0;
  for (std::size_t i = 0; i < x.values().size(); ++i) sum += abs(x.values()[i] - y.values()[i]);
  return sum * rat(Int(1), sphere_size(a.rank(), x.depth()));
}

inline Rat linf_distance(const Density& a, const Density& b) {
  auto [x, y] = detail::to_common_depth(a, b);
  Rat best = 0;
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    Rat d = abs(x.values()[i] - y.values()[i]);
    if (d > best) best = d;
  }
  return best;
}

namespace detail {

// k-th root of a positive mpf by Newton iteration; working precision is the
// precision of x.
inline mpf_class mpf_kth_root(const mpf_class& x, unsigned long k) {
  if (x == 0) return mpf_class(0, x.get_prec());
  if (k == 1) return x;
  mpf_class y(0, x.get_prec());
  // seed from double
  double seed = std::pow(x.get_d(), 1.0 / static_cast<double>(k));
  y = (seed > 0 && std::isfinite(seed)) ? mpf_class(seed, x.get_prec()) : mpf_class(1, x.get_prec());
  mpf_class prev(0, x.get_prec());
  for (int it = 0; it < 200; ++it) {
    mpf_class p(1, x.get_prec());
    for (unsigned long i = 0; i + 1 < k; ++i) p *= y;  // y^{k-1}
    prev = y;
    y = (mpf_class(k - 1, x.get_prec()) * y + x / p) / k;
    mpf_class diff = y - prev;
    if (diff < 0) diff = -diff;
    if (diff <= mpf_class(1, x.get_prec()) >> static_cast<unsigned long>(x.get_prec() - 4)) break;
  }
  return y;
}

inline mpf_class mpf_pow_rat(const Rat& base, const Rat& e, int prec_bits) {
  // base^(a/b) = (base^a)^(1/b), base >= 0
  long a = static_cast<long>(e.get_num().get_si());
  unsigned long b = e.get_den().get_ui();
  Rat powed = rat_pow(base, a);
  mpf_class x(powed, prec_bits);
  return mpf_kth_root(x, b);
}

}  // namespace detail

// ||psi||_q for any rational q >= 1, as a high-precision float. Exactness is
// only claimed for integer q (use lq_norm_pow) and q = infinity (linf_norm).
inline mpf_class lq_norm_real(const Density& psi, const Rat& q, int prec_bits = 128) {
  if (q < 1) throw InvalidParameter("q must be >= 1");
  mpf_class sum(0, prec_bits);
  const Rat cell = rat(Int(1), sphere_size(psi.rank(), psi.depth()));
  for (const Rat& v : psi.values()) {
    if (v == 0) continue;
    sum += detail::mpf_pow_rat(abs(v), q, prec_bits) * mpf_class(cell, prec_bits);
  }
  // sum^(1/q) = (sum^b)^(1/a) for q = a/b
  unsigned long a = q.get_num().get_ui();
  unsigned long b = q.get_den().get_ui();
  mpf_class powed(1, prec_bits);
  for (unsigned long i = 0; i < b; ++i) powed *= sum;
  return detail::mpf_kth_root(powed, a);
}

// Probability weights on a sphere S_n(e). Factored forms carry the density
// they came from so large radii never materialize; explicit form is a sparse
// index->weight table.
class SphereMeasure {
 public:
  enum class Kind { Explicit, MuOfDensity, EtaOfDensity };

  static SphereMeasure explicit_measure(int rank, int radius, std::map<std::uint64_t, Rat> weights) {
    detail::check_rank(rank);
    if (radius < 0) throw InvalidParameter("negative radius");
    SphereMeasure m;
    m.rank_ = rank;
    m.radius_ = radius;
    m.kind_ = Kind::Explicit;
    m.weights_ = std::move(weights);
    Int size = sphere_size(rank, radius);
    for (const auto& [idx, w] : m.weights_) {
      if (w < 0) throw InvalidParameter("sphere measure weights must be nonnegative");
      if (Int(static_cast<unsigned long>(idx)) >= size) throw InvalidParameter("weight index outside sphere");
    }
    return m;
  }

  static SphereMeasure point_mass(const Word& g) {
    std::map<std::uint64_t, Rat> w;
    w[sphere_index(g)] = rat(1);
    return explicit_measure(g.rank(), g.size(), std::move(w));
  }

  // Uniform measure on S_radius, represented without materialization.
  static SphereMeasure uniform(int rank, int radius);

  int rank() const { return rank_; }
  int radius() const { return radius_; }
  Kind kind() const { return kind_; }
  bool factored() const { return kind_ != Kind::Explicit; }

  const Density& base() const {
    if (kind_ == Kind::Explicit) throw InvalidParameter("explicit measure has no base density");
    return *base_;
  }
  int eta_half() const {
    if (kind_ != Kind::EtaOfDensity) throw InvalidParameter("not an eta measure");
    return radius_ / 2;
  }

  const std::map<std::uint64_t, Rat>& entries() const {
    if (kind_ != Kind::Explicit) throw InvalidParameter("factored measure has no explicit entries");
    return weights_;
  }

  Rat weight(const Word& g) const {
    if (g.rank() != rank_) throw RankMismatch("measure and word rank differ");
    if (g.size() != radius_) return rat(0);
    switch (kind_) {
      case Kind::Explicit: {
        auto it = weights_.find(sphere_index(g));
        return it == weights_.end() ? rat(0) : it->second;
      }
      case Kind::MuOfDensity:
      case Kind::EtaOfDensity:
        // both factored forms reduce to psi_prefix / |S_radius|
        return base_->value_on(g) * rat(Int(1), sphere_size(rank_, radius_));
    }
    return rat(0);
  }

  Rat total_mass() const {
    if (kind_ == Kind::Explicit) {
      Rat sum = 0;
      for (const auto& [idx, w] : weights_) sum += w;
      return sum;
    }
    return base_->integral();
  }

  SphereMeasure materialized(std::uint64_t cap = kDefaultBruteCap) const;

  friend SphereMeasure mu_from_density(const Density& psi, int radius);
  friend SphereMeasure eta_from_density(const Density& psi, int half_radius, std::uint64_t cap);

 private:
  SphereMeasure() = default;

  int rank_ = 2;
  int radius_ = 0;
  Kind kind_ = Kind::Explicit;
  std::map<std::uint64_t, Rat> weights_;       // Explicit
  std::shared_ptr<const Density> base_;        // factored forms
};

// mu_n^psi(g) = integral of psi over O_g, supported on S_n(e).
inline SphereMeasure mu_from_density(const Density& psi, int radius) {
  if (radius < 0) throw InvalidParameter("negative radius");
  SphereMeasure m;
  m.rank_ = psi.rank();
  m.radius_ = radius;
  if (radius >= psi.depth()) {
    m.kind_ = SphereMeasure::Kind::MuOfDensity;
    m.base_ = std::make_shared<Density>(psi);
    return m;
  }
  // shallow sphere: one exact cylinder integral per sphere word
  m.kind_ = SphereMeasure::Kind::Explicit;
  std::uint64_t idx = 0;
  visit_sphere(psi.rank(), radius, [&](std::span<const Letter> ls) {
    Word g(psi.rank(), std::vector<Letter>(ls.begin(), ls.end()));
    Rat w = cylinder_integral(psi, g);
    if (w != 0) m.weights_[idx] = w;
    ++idx;
  });
  return m;
}

// eta_{2n}^psi(g) = (1/((2r-2)(2r-1)^{n-1})) * integral of psi over O'(g),
// supported on S_{2n}(e).
inline SphereMeasure eta_from_density(const Density& psi, int half_radius,
                                      std::uint64_t cap = kDefaultBruteCap) {
  if (half_radius < 1) throw InvalidParameter("eta needs n >= 1");
  const int n = half_radius;
  const int r = psi.rank();
  SphereMeasure m;
  m.rank_ = r;
  m.radius_ = 2 * n;
  if (psi.depth() <= n) {
    // O'(g) integrals collapse: eta weight is psi_prefix / |S_{2n}|
    m.kind_ = SphereMeasure::Kind::EtaOfDensity;
    m.base_ = std::make_shared<Density>(psi);
    return m;
  }
  m.kind_ = SphereMeasure::Kind::Explicit;
  const Rat c = rat(Int(2 * r - 2) * int_pow(2 * r - 1, static_cast<unsigned long>(n - 1)), Int(1));
  sphere_size_checked(r, 2 * n, cap);
  std::uint64_t idx = 0;
  visit_sphere(r, 2 * n, [&](std::span<const Letter> ls) {
    Word stem(r, std::vector<Letter>(ls.begin(), ls.begin() + n));
    Word stem_child(r, std::vector<Letter>(ls.begin(), ls.begin() + n + 1));
    Rat w = (cylinder_integral(psi, stem) - cylinder_integral(psi, stem_child)) / c;
    if (w != 0) m.weights_[idx] = w;
    ++idx;
  });
  return m;
}

inline SphereMeasure SphereMeasure::uniform(int rank, int radius) {
  return mu_from_density(Density::uniform(rank), radius);
}

inline SphereMeasure SphereMeasure::materialized(std::uint64_t cap) const {
  if (kind_ == Kind::Explicit) return *this;
  sphere_size_checked(rank_, radius_, cap);
  std::map<std::uint64_t, Rat> w;
  std::uint64_t idx = 0;
  visit_sphere(rank_, radius_, [&](std::span<const Letter> ls) {
    Word g(rank_, std::vector<Letter>(ls.begin(), ls.end()));
    Rat v = weight(g);
    if (v != 0) w[idx] = v;
    ++idx;
  });
  return explicit_measure(rank_, radius_, std::move(w));
}

// pi_partial: the measure-to-density transfer, nu(O_g)^{-1} on each supporting
// cylinder. Factored measures resolve in closed form at their natural depth.
inline Density pi_boundary(const SphereMeasure& mu) {
  const int r = mu.rank();
  switch (mu.kind()) {
    case SphereMeasure::Kind::Explicit: {
      std::uint64_t size = sphere_size_checked(r, mu.radius());
      std::vector<Rat> vals(static_cast<std::size_t>(size), rat(0));
      const Rat inv_cell = rat(sphere_size(r, mu.radius()), Int(1));
      for (const auto& [idx, w] : mu.entries()) vals[static_cast<std::size_t>(idx)] = w * inv_cell;
      return Density(r, mu.radius(), std::move(vals));
    }
    case SphereMeasure::Kind::MuOfDensity:
      // E[psi | Sigma_radius] with radius >= depth(psi): the same function
      return mu.base();
    case SphereMeasure::Kind::EtaOfDensity: {
      // depth-(n+1) table: |S_2n|/c * (int_{O(pre_n)} psi - int_{O(pre_{n+1})} psi)
      const int n = mu.eta_half();
      const Density& psi = mu.base();
      const Rat scale = rat(sphere_size(r, 2 * n),
                            Int(2 * r - 2) * int_pow(2 * r - 1, static_cast<unsigned long>(n - 1)));
      const Density at_n = martingale_project(psi, n);
      const Density at_n1 = martingale_project(psi, n + 1);
      const Rat cell_n = rat(Int(1), sphere_size(r, n));
      const Rat cell_n1 = rat(Int(1), sphere_size(r, n + 1));
      const std::uint64_t q = static_cast<std::uint64_t>(2 * r - 1);
      std::uint64_t size = sphere_size_checked(r, n + 1);
      std::vector<Rat> vals(static_cast<std::size_t>(size));
      for (std::uint64_t j = 0; j < size; ++j) {
        const std::uint64_t parent = j / q;
        Rat int_n = at_n.value_at_index(parent) * cell_n;
        Rat int_n1 = at_n1.value_at_index(j) * cell_n1;
        vals[static_cast<std::size_t>(j)] = (int_n - int_n1) * scale;
      }
      return Density(r, n + 1, std::move(vals));
    }
  }
  throw InvalidParameter("unknown measure kind");
}

// Residual of the identity
//   pi(eta_{2n}^psi) = (2r-1)/(2r-2) pi(mu_n^psi) - 1/(2r-2) pi(mu_{n+1}^psi)
// as a max-norm over the depth-(n+1) tables; exactly zero for every density.
inline Rat eta_projection_residual(const Density& psi, int n) {
  if (n < 1) throw InvalidParameter("eta identity needs n >= 1");
  const int r = psi.rank();
  Density lhs = pi_boundary(eta_from_density(psi, n));
  Density mu_n = pi_boundary(mu_from_density(psi, n));
  Density mu_n1 = pi_boundary(mu_from_density(psi, n + 1));
  const int d = std::max({lhs.depth(), mu_n.depth(), mu_n1.depth(), n + 1});
  Density l = lhs.refined(d), a = mu_n.refined(d), b = mu_n1.refined(d);
  const Rat ca = rat(2 * r - 1, 2 * r - 2);
  const Rat cb = rat(1, 2 * r - 2);
  Rat best = 0;
  for (std::size_t i = 0; i < l.values().size(); ++i) {
    Rat diff = abs(l.values()[i] - (ca * a.values()[i] - cb * b.values()[i]));
    if (diff > best) best = diff;
  }
  return best;
}

// --- line-oriented dump formats ---------------------------------------------

inline void dump_density(std::ostream& os, const Density& psi) {
  os << "rank " << psi.rank() << " depth " << psi.depth() << "\n";
  std::uint64_t idx = 0;
  visit_sphere(psi.rank(), psi.depth(), [&](std::span<const Letter> ls) {
    Word w(psi.rank(), std::vector<Letter>(ls.begin(), ls.end()));
    os << w.str() << " " << to_string(psi.value_at_index(idx)) << "\n";
    ++idx;
  });
}

inline Density parse_density(std::istream& is) {
  std::string tag1, tag2;
  int rank = 0, depth = -1;
  if (!(is >> tag1 >> rank >> tag2 >> depth) || tag1 != "rank" || tag2 != "depth")
    throw ParseError("density header must be 'rank r depth m'");
  std::uint64_t size = sphere_size_checked(rank, depth);
  std::vector<Rat> vals(static_cast<std::size_t>(size), rat(0));
  std::string word_text, value_text;
  for (std::uint64_t i = 0; i < size; ++i) {
    if (!(is >> word_text >> value_text)) throw ParseError("density table truncated");
    Word w = Word::parse(rank, word_text);
    if (w.size() != depth) throw ParseError("density entry at wrong depth: " + word_text);
    vals[static_cast<std::size_t>(sphere_index(w))] = parse_rat(value_text);
  }
  return Density(rank, depth, std::move(vals));
}

inline void dump_sphere_measure(std::ostream& os, const SphereMeasure& mu) {
  const SphereMeasure m = mu.materialized();
  os << "rank " << m.rank() << " radius " << m.radius() << "\n";
  for (const auto& [idx, w] : m.entries()) {
    Word g = word_at_sphere_index(m.rank(), m.radius(), idx);
    os << g.str() << " " << to_string(w) << "\n";
  }
}

inline SphereMeasure parse_sphere_measure(std::istream& is) {
  std::string tag1, tag2;
  int rank = 0, radius = -1;
  if (!(is >> tag1 >> rank >> tag2 >> radius) || tag1 != "rank" || tag2 != "radius")
    throw ParseError("sphere measure header must be 'rank r radius n'");
  std::map<std::uint64_t, Rat> w;
  std::string word_text, value_text;
  while (is >> word_text >> value_text) {
    Word g = Word::parse(rank, word_text);
    if (g.size() != radius) throw ParseError("measure entry off the sphere: " + word_text);
    w[sphere_index(g)] = parse_rat(value_text);
  }
  return SphereMeasure::explicit_measure(rank, radius, std::move(w));
}

}  // namespace fgb
