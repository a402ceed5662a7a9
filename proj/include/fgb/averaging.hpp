#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgb/action.hpp"
#include "fgb/boundary.hpp"
#include "fgb/density.hpp"
#include "fgb/error.hpp"
#include "fgb/rational.hpp"
#include "fgb/word.hpp"

namespace fgb {

namespace detail {

// Per-letter point maps indexed by letter code.
inline std::vector<std::vector<std::uint32_t>> letter_tables(const FiniteAction& a) {
  std::vector<std::vector<std::uint32_t>> t(static_cast<std::size_t>(2 * a.rank()));
  for (int c = 0; c < 2 * a.rank(); ++c) {
    t[static_cast<std::size_t>(c)].resize(a.size());
    for (std::uint32_t x = 0; x < a.size(); ++x)
      t[static_cast<std::size_t>(c)][x] = a.apply_letter(Letter(c), x);
  }
  return t;
}

struct ScaledObs {
  std::vector<Int> values;
  Int denom;
};

inline ScaledObs scale_to_int(const ObsRat& f) {
  ScaledObs s;
  s.denom = 1;
  for (const Rat& v : f) {
    Int l;
    mpz_lcm(l.get_mpz_t(), s.denom.get_mpz_t(), v.get_den().get_mpz_t());
    s.denom = l;
  }
  s.values.reserve(f.size());
  for (const Rat& v : f) s.values.push_back(Int(v.get_num() * (s.denom / v.get_den())));
  return s;
}

// Last-letter transfer-operator state. channels[c][x] holds the unnormalized
// sum of F(u^{-1} x) over the reduced words u of the current depth whose first
// letter has code c.
template <class Num>
struct DpState {
  std::vector<std::vector<Num>> channels;
  int depth = 0;
};

template <class Num>
DpState<Num> dp_init(const FiniteAction& a, const std::vector<Num>& fvals,
                     const std::vector<std::vector<std::uint32_t>>& tables) {
  DpState<Num> st;
  st.depth = 1;
  const int codes = 2 * a.rank();
  st.channels.assign(static_cast<std::size_t>(codes), std::vector<Num>(a.size()));
  for (int c = 0; c < codes; ++c) {
    const auto& inv_map = tables[static_cast<std::size_t>(Letter(c).inverse().code())];
    for (std::uint32_t x = 0; x < a.size(); ++x)
      st.channels[static_cast<std::size_t>(c)][x] = fvals[inv_map[x]];
  }
  return st;
}

template <class Num>
void dp_step(const FiniteAction& a, DpState<Num>& st,
             const std::vector<std::vector<std::uint32_t>>& tables) {
  const int codes = 2 * a.rank();
  std::vector<std::vector<Num>> next(static_cast<std::size_t>(codes), std::vector<Num>(a.size()));
  for (int t = 0; t < codes; ++t) {
    const int banned = Letter(t).inverse().code();
    const auto& pull = tables[static_cast<std::size_t>(Letter(t).inverse().code())];
    auto& out = next[static_cast<std::size_t>(t)];
    for (std::uint32_t x = 0; x < a.size(); ++x) {
      const std::uint32_t y = pull[x];
      Num acc{};
      for (int s = 0; s < codes; ++s) {
        if (s == banned) continue;
        acc += st.channels[static_cast<std::size_t>(s)][y];
      }
      out[x] = std::move(acc);
    }
  }
  st.channels = std::move(next);
  ++st.depth;
}

}  // namespace detail

// Uniform spherical averages for every radius 0..n_max, exact, via the
// transfer-operator recursion: cost O(n_max * N * (2r)^2), no sphere is ever
// enumerated.
inline std::vector<ObsRat> spherical_averages(const FiniteAction& a, const ObsRat& f, int n_max) {
  if (!a.ok()) throw InvalidParameter("spherical averages need a valid action");
  if (f.size() != a.size()) throw InvalidParameter("observable has wrong size");
  if (n_max < 0) throw InvalidParameter("negative n_max");
  auto tables = detail::letter_tables(a);
  auto scaled = detail::scale_to_int(f);
  std::vector<ObsRat> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  out.push_back(f);
  if (n_max == 0) return out;
  auto st = detail::dp_init<Int>(a, scaled.values, tables);
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) detail::dp_step(a, st, tables);
    const Int denom = scaled.denom * sphere_size(a.rank(), n);
    ObsRat row(a.size());
    for (std::uint32_t x = 0; x < a.size(); ++x) {
      Int sum = 0;
      for (const auto& ch : st.channels) sum += ch[x];
      row[x] = rat(sum, denom);
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline std::vector<ObsReal> spherical_averages_real(const FiniteAction& a, const ObsReal& f, int n_max) {
  if (!a.ok()) throw InvalidParameter("spherical averages need a valid action");
  if (f.size() != a.size()) throw InvalidParameter("observable has wrong size");
  auto tables = detail::letter_tables(a);
  std::vector<ObsReal> out;
  out.push_back(f);
  if (n_max == 0) return out;
  auto st = detail::dp_init<double>(a, f, tables);
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) detail::dp_step(a, st, tables);
    const double denom = mpf_class(sphere_size(a.rank(), n)).get_d();
    ObsReal row(a.size());
    for (std::uint32_t x = 0; x < a.size(); ++x) {
      double sum = 0;
      for (const auto& ch : st.channels) sum += ch[x];
      row[x] = sum / denom;
    }
    out.push_back(std::move(row));
  }
  return out;
}

// Ground truth by direct enumeration of S_n(e); the oracle for the DP.
inline ObsRat sphere_bruteforce(const FiniteAction& a, const ObsRat& f, int n,
                                std::uint64_t cap = kDefaultBruteCap) {
  if (!a.ok()) throw InvalidParameter("brute force needs a valid action");
  sphere_size_checked(a.rank(), n, cap);
  ObsRat sum(a.size(), rat(0));
  visit_sphere(a.rank(), n, [&](std::span<const Letter> ls) {
    Word g(a.rank(), std::vector<Letter>(ls.begin(), ls.end()));
    auto pm = a.point_map(invert(g));
    for (std::uint32_t x = 0; x < a.size(); ++x) sum[x] += f[pm[x]];
  });
  const Rat denom = rat(sphere_size(a.rank(), n), Int(1));
  for (auto& v : sum) v /= denom;
  return sum;
}

// Weighted sum over a sphere measure. Factored measures take the sector fast
// path: one transfer-operator run to depth radius-m, then per-prefix sums with
// the first letter after the prefix forbidden to cancel.
inline ObsRat weighted_average(const FiniteAction& a, const ObsRat& f, const SphereMeasure& mu,
                               std::uint64_t cap = kDefaultBruteCap) {
  if (!a.ok()) throw InvalidParameter("weighted average needs a valid action");
  if (a.rank() != mu.rank()) throw RankMismatch("action and measure rank differ");
  if (mu.kind() == SphereMeasure::Kind::Explicit) {
    ObsRat out(a.size(), rat(0));
    for (const auto& [idx, w] : mu.entries()) {
      Word g = word_at_sphere_index(a.rank(), mu.radius(), idx);
      auto pm = a.point_map(invert(g));
      for (std::uint32_t x = 0; x < a.size(); ++x) out[x] += w * f[pm[x]];
    }
    return out;
  }
  const Density& psi = mu.base();
  const int m = psi.depth();
  const int radius = mu.radius();
  sphere_size_checked(a.rank(), m, cap);  // prefixes are enumerated
  auto tables = detail::letter_tables(a);
  auto scaled = detail::scale_to_int(f);
  const int k = radius - m;
  std::optional<detail::DpState<Int>> st;
  if (k >= 1) {
    st = detail::dp_init<Int>(a, scaled.values, tables);
    for (int i = 2; i <= k; ++i) detail::dp_step(a, *st, tables);
  }
  ObsRat acc(a.size(), rat(0));
  const int codes = 2 * a.rank();
  visit_sphere(a.rank(), m, [&](std::span<const Letter> ls) {
    Word w(a.rank(), std::vector<Letter>(ls.begin(), ls.end()));
    const Rat& coeff = psi.value_on(w);
    if (coeff == 0) return;
    auto pm = a.point_map(invert(w));
    if (k == 0) {
      for (std::uint32_t x = 0; x < a.size(); ++x)
        if (f[pm[x]] != 0) acc[x] += coeff * f[pm[x]];
      return;
    }
    const int banned = m == 0 ? -1 : ls.back().inverse().code();
    for (std::uint32_t x = 0; x < a.size(); ++x) {
      Int sum = 0;
      const std::uint32_t y = pm[x];
      for (int c = 0; c < codes; ++c) {
        if (c == banned) continue;
        sum += st->channels[static_cast<std::size_t>(c)][y];
      }
      if (sum != 0) acc[x] += coeff * rat(sum, scaled.denom);
    }
  });
  const Rat denom = rat(sphere_size(a.rank(), radius), Int(1));
  for (auto& v : acc) v /= denom;
  return acc;
}

// Average of f over the horosphere sphere of the given even radius at xi.
inline ObsRat horospherical_average(const FiniteAction& a, const ObsRat& f, const Prefix& p,
                                    int radius) {
  if (!a.ok()) throw InvalidParameter("horospherical average needs a valid action");
  if (a.rank() != p.rank()) throw RankMismatch("action and prefix rank differ");
  auto elements = horosphere_elements(p, radius);
  ObsRat sum(a.size(), rat(0));
  for (const Word& h : elements) {
    auto pm = a.point_map(invert(h));
    for (std::uint32_t x = 0; x < a.size(); ++x) sum[x] += f[pm[x]];
  }
  const Rat denom = rat(static_cast<long>(elements.size()));
  for (auto& v : sum) v /= denom;
  return sum;
}

// Ball analogue: averages over H_xi within the ball of the given even radius,
// normalization (2r-1)^{radius/2}.
inline ObsRat horospherical_ball_average(const FiniteAction& a, const ObsRat& f, const Prefix& p,
                                         int radius) {
  if (!a.ok()) throw InvalidParameter("horospherical average needs a valid action");
  if (radius % 2 != 0) throw EvenRadiusRequired("ball averages use even radii");
  std::uint64_t count = 0;
  ObsRat sum(a.size(), rat(0));
  for (int rad = 0; rad <= radius; rad += 2) {
    for (const Word& h : horosphere_elements(p, rad)) {
      auto pm = a.point_map(invert(h));
      for (std::uint32_t x = 0; x < a.size(); ++x) sum[x] += f[pm[x]];
      ++count;
    }
  }
  const Rat denom = rat(Int(static_cast<unsigned long>(count)), Int(1));
  for (auto& v : sum) v /= denom;
  return sum;
}

struct BridgePair {
  ObsRat via_eta;        // sum_g f(g^{-1} x) eta_{2n}^psi(g)
  ObsRat via_cylinders;  // integral of the horospherical average against psi
};

// Both sides of the bridge identity, computed independently; they agree
// exactly in rational arithmetic.
inline BridgePair boundary_integrated_average(const FiniteAction& a, const ObsRat& f,
                                              const Density& psi, int n,
                                              std::uint64_t cap = kDefaultBruteCap) {
  if (n < 1) throw InvalidParameter("boundary integrated average needs n >= 1");
  BridgePair out{weighted_average(a, f, eta_from_density(psi, n), cap), {}};
  const int depth = std::max(n + 1, psi.depth());
  sphere_size_checked(a.rank(), depth, cap);
  ObsRat acc(a.size(), rat(0));
  visit_sphere(a.rank(), depth, [&](std::span<const Letter> ls) {
    Word w(a.rank(), std::vector<Letter>(ls.begin(), ls.end()));
    const Rat& coeff = psi.value_on(w);
    if (coeff == 0) return;
    ObsRat h = horospherical_average(a, f, Prefix(w), 2 * n);
    for (std::uint32_t x = 0; x < a.size(); ++x) acc[x] += coeff * h[x];
  });
  const Rat cell = rat(Int(1), sphere_size(a.rank(), depth));
  for (auto& v : acc) v *= cell;
  out.via_cylinders = std::move(acc);
  return out;
}

// Truncated maximal function: pointwise max of |A_n f| over the computed
// range. The truncation is the documented finite stand-in for the sup.
inline ObsRat maximal_profile(std::span<const ObsRat> tables) {
  if (tables.empty()) throw InvalidParameter("maximal profile of an empty range");
  ObsRat out(tables.front().size(), rat(0));
  for (const auto& t : tables)
    for (std::size_t x = 0; x < out.size(); ++x)
      if (abs(t[x]) > out[x]) out[x] = abs(t[x]);
  return out;
}

enum class AvgFamily { Spherical, Mu, Eta, Horospherical, Ball };

// One averaging family evaluated over a radius range; values[i] is the
// average at radius n_min + i*step.
struct AverageTable {
  AvgFamily family = AvgFamily::Spherical;
  int n_min = 1;
  int step = 1;
  std::vector<ObsRat> values;

  int radius_at(std::size_t i) const { return n_min + static_cast<int>(i) * step; }
};

inline AverageTable family_table(const FiniteAction& a, const ObsRat& f, AvgFamily family,
                                 const Density* psi, const Prefix* xi, int n_max,
                                 std::uint64_t cap = kDefaultBruteCap) {
  AverageTable table;
  table.family = family;
  switch (family) {
    case AvgFamily::Spherical: {
      auto all = spherical_averages(a, f, n_max);
      table.n_min = 1;
      table.step = 1;
      table.values.assign(all.begin() + 1, all.end());
      break;
    }
    case AvgFamily::Mu:
      if (!psi) throw InvalidParameter("mu family needs a density");
      table.n_min = 2;
      table.step = 2;
      for (int n = 2; n <= n_max; n += 2)
        table.values.push_back(weighted_average(a, f, mu_from_density(*psi, n), cap));
      break;
    case AvgFamily::Eta:
      if (!psi) throw InvalidParameter("eta family needs a density");
      table.n_min = 2;
      table.step = 2;
      for (int n = 2; n <= n_max; n += 2)
        table.values.push_back(weighted_average(a, f, eta_from_density(*psi, n / 2, cap), cap));
      break;
    case AvgFamily::Horospherical:
      if (!xi) throw InvalidParameter("horospherical family needs a boundary prefix");
      table.n_min = 2;
      table.step = 2;
      for (int n = 2; n <= n_max; n += 2)
        table.values.push_back(horospherical_average(a, f, *xi, n));
      break;
    case AvgFamily::Ball:
      if (!xi) throw InvalidParameter("ball family needs a boundary prefix");
      table.n_min = 2;
      table.step = 2;
      for (int n = 2; n <= n_max; n += 2)
        table.values.push_back(horospherical_ball_average(a, f, *xi, n));
      break;
  }
  return table;
}

inline ObsRat maximal_profile(const AverageTable& table) {
  return maximal_profile(std::span<const ObsRat>(table.values));
}

inline Rat level_set_mass(const FiniteAction& a, const ObsRat& values, const Rat& t) {
  Rat mass = 0;
  for (std::uint32_t x = 0; x < a.size(); ++x)
    if (values[x] > t) mass += a.weight(x);
  return mass;
}

// <pi'_partial(f_{x,radius}), psi> = sum_g f(g^{-1}x) * mu_radius^psi(g).
inline Rat weak_pairing(const FiniteAction& a, const ObsRat& f, std::uint32_t x,
                        const Density& psi, int radius, std::uint64_t cap = kDefaultBruteCap) {
  return weighted_average(a, f, mu_from_density(psi, radius), cap)[x];
}

enum class LiftKind { Omega, Phi, Psi };

struct Lift {
  std::uint32_t point;
  Prefix prefix;
};

// The Lemma 5.7 maps at a single fibered point (x, xi).
inline Lift lemma57_lift(const FiniteAction& a, std::uint32_t x, const Prefix& p, int n,
                         LiftKind which) {
  if (!a.ok()) throw InvalidParameter("lift needs a valid action");
  switch (which) {
    case LiftKind::Omega:
      return Lift{x, omega_map(p, n)};
    case LiftKind::Phi: {
      Word g1 = omega_witness(p, n);
      return Lift{a.apply_word(g1, x), boundary_action(g1, p).prefix};
    }
    case LiftKind::Psi: {
      Word g2 = prop56_witness(omega_inverse_map(p, n), n);
      return Lift{a.apply_word(g2, x), boundary_action(g2, p).prefix};
    }
  }
  throw InvalidParameter("unknown lift kind");
}

// --- convergence diagnostics --------------------------------------------------

inline AvgFamily parse_family(std::string_view s) {
  if (s == "spherical") return AvgFamily::Spherical;
  if (s == "mu") return AvgFamily::Mu;
  if (s == "eta") return AvgFamily::Eta;
  if (s == "horo") return AvgFamily::Horospherical;
  if (s == "ball") return AvgFamily::Ball;
  throw ParseError("unknown family: '" + std::string(s) + "'");
}

struct ConvergenceRow {
  int n = 0;
  Rat sup_err;
  Rat lp_err_pow;        // sum |A_n f - E f|^p dlambda, exact
  std::string lp_err;    // rendered norm: exact for p=1, shortest decimal otherwise
  long runtime_ms = 0;
};

struct ReportOptions {
  int p = 2;
  bool timings = false;
  bool even_only = false;  // restrict spherical rows to even radii
  std::uint64_t cap = kDefaultBruteCap;
};

namespace detail {

inline std::string shortest_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string render_lp_err(const Rat& pow_sum, int p) {
  if (p == 1) return to_string(pow_sum);
  mpf_class x(pow_sum, 128);
  return shortest_double(mpf_kth_root(x, static_cast<unsigned long>(p)).get_d());
}

}  // namespace detail

// Error table of an averaging family against E[f | F^2].
inline std::vector<ConvergenceRow> convergence_report(const FiniteAction& a, const ObsRat& f,
                                                      AvgFamily family, const Density* psi,
                                                      const Prefix* xi, int n_max,
                                                      const ReportOptions& opt = {}) {
  if (!a.ok()) throw InvalidParameter("convergence report needs a valid action");
  if (opt.p < 1) throw InvalidParameter("p must be >= 1");
  ObsRat target = cond_exp_even(a, f);
  std::vector<ConvergenceRow> rows;
  auto push_row = [&](int n, const ObsRat& avg, long ms) {
    ConvergenceRow row;
    row.n = n;
    row.runtime_ms = ms;
    Rat sup = 0, pow_sum = 0;
    for (std::uint32_t x = 0; x < a.size(); ++x) {
      Rat d = abs(avg[x] - target[x]);
      if (d > sup) sup = d;
      pow_sum += a.weight(x) * rat_pow(d, opt.p);
    }
    row.sup_err = sup;
    row.lp_err_pow = pow_sum;
    row.lp_err = detail::render_lp_err(pow_sum, opt.p);
    rows.push_back(std::move(row));
  };
  auto clock_ms = [&](auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    ObsRat v = fn();
    auto t1 = std::chrono::steady_clock::now();
    long ms = opt.timings
                  ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                  : 0;
    return std::pair<ObsRat, long>(std::move(v), ms);
  };
  switch (family) {
    case AvgFamily::Spherical: {
      auto t0 = std::chrono::steady_clock::now();
      auto tables = spherical_averages(a, f, n_max);
      auto t1 = std::chrono::steady_clock::now();
      long ms = opt.timings
                    ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                    : 0;
      for (int n = 1; n <= n_max; ++n) {
        if (opt.even_only && n % 2 != 0) continue;
        push_row(n, tables[static_cast<std::size_t>(n)], ms);
        ms = 0;  // whole-table cost charged to the first emitted row
      }
      break;
    }
    case AvgFamily::Mu:
      if (!psi) throw InvalidParameter("mu family needs a density");
      for (int n = 2; n <= n_max; n += 2) {
        auto [v, ms] = clock_ms([&] { return weighted_average(a, f, mu_from_density(*psi, n), opt.cap); });
        push_row(n, v, ms);
      }
      break;
    case AvgFamily::Eta:
      if (!psi) throw InvalidParameter("eta family needs a density");
      for (int n = 2; n <= n_max; n += 2) {
        auto [v, ms] = clock_ms(
            [&] { return weighted_average(a, f, eta_from_density(*psi, n / 2, opt.cap), opt.cap); });
        push_row(n, v, ms);
      }
      break;
    case AvgFamily::Horospherical:
      if (!xi) throw InvalidParameter("horospherical family needs a boundary prefix");
      for (int n = 2; n <= n_max; n += 2) {
        auto [v, ms] = clock_ms([&] { return horospherical_average(a, f, *xi, n); });
        push_row(n, v, ms);
      }
      break;
    case AvgFamily::Ball:
      if (!xi) throw InvalidParameter("ball family needs a boundary prefix");
      for (int n = 2; n <= n_max; n += 2) {
        auto [v, ms] = clock_ms([&] { return horospherical_ball_average(a, f, *xi, n); });
        push_row(n, v, ms);
      }
      break;
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
  os << "n,error_sup,error_lp,runtime_ms\n";
  for (const auto& r : rows)
    os << r.n << "," << to_string(r.sup_err) << "," << r.lp_err << "," << r.runtime_ms << "\n";
}

}  // namespace fgb
