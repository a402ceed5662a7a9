#pragma once

#include <cstdint>
#include <vector>

#include "fgb/fgb.hpp"

namespace fgbtest {

using namespace fgb;

// Random reduced word of exactly the given length.
inline Word random_word(Rng& rng, int rank, int length) {
  std::vector<Letter> ls;
  ls.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    for (;;) {
      Letter cand(static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * rank))));
      if (ls.empty() || cand != ls.back().inverse()) {
        ls.push_back(cand);
        break;
      }
    }
  }
  return Word(rank, std::move(ls));
}

inline Word random_word_upto(Rng& rng, int rank, int max_length) {
  return random_word(rng, rank, static_cast<int>(rng.below(static_cast<std::uint64_t>(max_length) + 1)));
}

inline Prefix random_prefix(Rng& rng, int rank, int depth) {
  return Prefix(random_word(rng, rank, depth));
}

// Random probability density at the given depth, with small integer structure.
inline Density random_density(Rng& rng, int rank, int depth) {
  std::uint64_t size = sphere_size_checked(rank, depth);
  std::vector<Rat> vals(static_cast<std::size_t>(size));
  Rat total = 0;
  for (auto& v : vals) {
    v = rat(static_cast<long>(rng.below(6)));
    total += v;
  }
  if (total == 0) {
    vals[0] = rat(1);
    total = rat(1);
  }
  const Rat norm = rat(sphere_size(rank, depth), Int(1)) / total;  // makes the integral 1
  for (auto& v : vals) v *= norm;
  return Density(rank, depth, std::move(vals));
}

inline ObsRat random_observable(Rng& rng, std::uint32_t n, long lo = -5, long hi = 5) {
  ObsRat f(n);
  for (auto& v : f) v = rat(rng.range(lo, hi));
  return f;
}

// An observable constant on the even orbits (so every even-radius average
// must fix it).
inline ObsRat invariant_observable(Rng& rng, const FiniteAction& a) {
  auto orbits = even_orbits(a);
  std::vector<Rat> orbit_value(orbits.count);
  for (auto& v : orbit_value) v = rat(rng.range(-4, 4));
  ObsRat f(a.size());
  for (std::uint32_t x = 0; x < a.size(); ++x) f[x] = orbit_value[orbits.id[x]];
  return f;
}

// Random class-preserving bijection: an independent shuffle of every class.
inline RelationAut random_relation_aut(Rng& rng, const FiniteRelation& rel) {
  std::vector<std::uint32_t> perm(rel.size());
  for (std::uint32_t cls = 0; cls < rel.num_classes(); ++cls) {
    std::vector<std::uint32_t> members = rel.members(cls);
    std::vector<std::uint32_t> images = members;
    rng.shuffle(images);
    for (std::size_t i = 0; i < members.size(); ++i) perm[members[i]] = images[i];
  }
  return RelationAut(rel, std::move(perm));
}

}  // namespace fgbtest
