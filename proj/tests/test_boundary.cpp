#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "helpers.hpp"

using namespace fgb;
using fgbtest::random_prefix;
using fgbtest::random_word;
using fgbtest::random_word_upto;

TEST_CASE("cylinder measures") {
  CHECK(cylinder_measure(Word::identity(2)) == 1);
  CHECK(cylinder_measure(Word::parse(2, "a1")) == rat(1, 4));
  CHECK(cylinder_measure(Word::parse(2, "a1a2")) == rat(1, 12));
  CHECK(cylinder_measure(Word::parse(3, "a1")) == rat(1, 6));

  // additivity over the reduced children of a1
  Rat children = 0;
  for (int c = 0; c < 4; ++c) {
    Letter l(c);
    if (l == Letter::make(1, true)) continue;
    std::vector<Letter> ls = {Letter::make(1, false), l};
    children += cylinder_measure(Word(2, ls));
  }
  CHECK(children == cylinder_measure(Word::parse(2, "a1")));

  // total mass 1 at several depths
  for (int r : {2, 3}) {
    for (int depth = 1; depth <= (r == 2 ? 8 : 5); ++depth) {
      Rat total = 0;
      visit_sphere(r, depth, [&](std::span<const Letter> ls) {
        total += cylinder_measure(Word(r, std::vector<Letter>(ls.begin(), ls.end())));
      });
      CHECK(total == 1);
    }
  }
}

TEST_CASE("annulus measure and membership") {
  Annulus a(Word::parse(2, "a1"), Letter::make(2, false));
  CHECK(annulus_measure(a) == rat(1, 6));  // 1/4 - 1/12
  CHECK(a.str() == "a1!a2");
  Annulus back = Annulus::parse(2, "a1a2!a1");
  CHECK(back.stem().str() == "a1a2");
  CHECK_THROWS_AS(Annulus(Word::parse(2, "a1"), Letter::make(1, true)), InvalidParameter);

  // stem splits into the annulus plus the excluded cylinder
  CHECK(annulus_measure(a) + cylinder_measure(a.excluded_child()) == cylinder_measure(a.stem()));

  // membership agrees with the horofunction vanishing: for g = stem * t with
  // |g| = 2n, xi in O'(g) iff h_xi(g) = 0
  Rng rng(2001);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(3));
    Word g = random_word(rng, 2, 2 * n);
    std::vector<Letter> stem_letters(g.letters().begin(), g.letters().begin() + n);
    Annulus ann(Word(2, std::move(stem_letters)), g.at(n));
    Prefix xi = random_prefix(rng, 2, 2 * n + 1);
    CHECK(annulus_contains(ann, xi) == (horofunction(xi, g) == 0));
  }
}

TEST_CASE("boundary action") {
  Prefix p(Word::parse(2, "a1a2a1"));
  auto idact = boundary_action(Word::identity(2), p);
  CHECK(idact.prefix == p);
  CHECK(idact.cancelled == 0);

  auto [q1, k1] = boundary_action(Word::parse(2, "A1"), p);
  CHECK(q1.str() == "a2a1");
  CHECK(k1 == 1);

  auto [q2, k2] = boundary_action(Word::parse(2, "a2"), Prefix(Word::parse(2, "a1a2")));
  CHECK(q2.str() == "a2a1a2");
  CHECK(k2 == 0);

  // whole prefix cancels while letters remain
  CHECK_THROWS_AS(boundary_action(Word::parse(2, "A2A1A1"), Prefix(Word::parse(2, "a1a1"))),
                  InsufficientDepth);

  // cancellation count and the contributed head depend only on the first |g|
  // letters of the prefix
  Rng rng(2002);
  for (int trial = 0; trial < 200; ++trial) {
    Word g = random_word_upto(rng, 2, 4);
    Prefix a = random_prefix(rng, 2, 9);
    std::vector<Letter> ls(a.word().letters().begin(), a.word().letters().end());
    for (int i = g.size() + 1; i < 9; ++i) {
      for (;;) {
        Letter cand(static_cast<int>(rng.below(4)));
        if (cand != ls[static_cast<std::size_t>(i - 1)].inverse()) {
          ls[static_cast<std::size_t>(i)] = cand;
          break;
        }
      }
    }
    Prefix b(Word(2, ls));
    auto ra = boundary_action(g, a);
    auto rb = boundary_action(g, b);
    CHECK(ra.cancelled == rb.cancelled);
    for (int i = 0; i < g.size() - ra.cancelled; ++i)
      CHECK(ra.prefix.at(i) == rb.prefix.at(i));
  }
}

TEST_CASE("radon-nikodym derivative and cocycle") {
  Prefix p(Word::parse(2, "a1a2a1a2"));
  CHECK(radon_nikodym(Word::parse(2, "A1"), p) == 3);
  CHECK(radon_nikodym(Word::parse(2, "a2"), p) == rat(1, 3));

  Rng rng(2003);
  int done = 0;
  while (done < 500) {
    Word g = random_word_upto(rng, 2, 3);
    Word h = random_word_upto(rng, 2, 3);
    Prefix xi = random_prefix(rng, 2, 12);
    try {
      Rat lhs = radon_nikodym(multiply(g, h).word, xi);
      Rat rhs = radon_nikodym(g, boundary_action(h, xi).prefix) * radon_nikodym(h, xi);
      CHECK(lhs == rhs);
      ++done;
    } catch (const InsufficientDepth&) {
      // depth-starved draw; take another sample
    }
  }
}

TEST_CASE("horofunction values") {
  Prefix p(Word::parse(2, "a1a2a1a2"));
  CHECK(horofunction(p, Word::identity(2)) == 0);
  CHECK(horofunction(p, Word::parse(2, "a1a2")) == -2);
  CHECK(horofunction(p, Word::parse(2, "a2")) == 1);
  CHECK_THROWS_AS(horofunction(Prefix(Word::parse(2, "a1")), Word::parse(2, "a2a1")),
                  InsufficientDepth);

  // h_xi(g) = -log_{2r-1} rn(g^{-1], xi) whenever both sides are defined
  Rng rng(2004);
  for (int trial = 0; trial < 300; ++trial) {
    const int r = 2 + static_cast<int>(rng.below(2));
    Word g = random_word_upto(rng, r, 4);
    Prefix xi = random_prefix(rng, r, 10);
    const int h = horofunction(xi, g);
    CHECK(radon_nikodym(invert(g), xi) == rat_pow(rat(2 * r - 1), -h));
  }
}

TEST_CASE("horosphere elements") {
  Prefix p(Word::parse(2, "a1a2a1a2a1a2a1"));
  auto els2 = horosphere_elements(p, 2);
  REQUIRE(els2.size() == 2);
  CHECK(els2[0].str() == "a1a1");
  CHECK(els2[1].str() == "a1A2");
  CHECK(horosphere_elements(p, 4).size() == 6);
  CHECK_THROWS_AS(horosphere_elements(p, 3), EvenRadiusRequired);
  CHECK_THROWS_AS(horosphere_elements(Prefix(Word::parse(2, "a1")), 2), InsufficientDepth);

  for (int n = 1; n <= 3; ++n) {
    auto els = horosphere_elements(p, 2 * n);
    CHECK(Int(static_cast<unsigned long>(els.size())) ==
          Int(2 * 2 - 2) * int_pow(2 * 2 - 1, static_cast<unsigned long>(n - 1)));
    std::set<std::vector<Letter>> member;
    for (const Word& h : els) {
      CHECK(horofunction(p, h) == 0);
      CHECK(radon_nikodym(invert(h), p) == 1);
      member.insert(h.letters());
    }
    // exhaustive: everything else in S_{2n} fails the membership test
    visit_sphere(2, 2 * n, [&](std::span<const Letter> ls) {
      Word g(2, std::vector<Letter>(ls.begin(), ls.end()));
      const bool in = member.count(g.letters()) > 0;
      CHECK(in == (horofunction(p, g) == 0));
    });
  }
}

TEST_CASE("folner sets: counts, ratio, nesting") {
  Rng rng(2005);
  for (int r : {2, 3}) {
    for (int n = 1; n <= (r == 2 ? 4 : 3); ++n) {
      const int depth = n + 2;
      Prefix p = random_prefix(rng, r, depth);
      auto ball = folner_set(p, n, FolnerKind::Ball, depth);
      auto sphere = folner_set(p, n, FolnerKind::Sphere, depth);
      CHECK(Int(static_cast<unsigned long>(ball.size())) == int_pow(2 * r - 1, static_cast<unsigned long>(n)));
      CHECK(Int(static_cast<unsigned long>(sphere.size())) ==
            Int(2 * r - 2) * int_pow(2 * r - 1, static_cast<unsigned long>(n - 1)));
      // ratio (2r-2)/(2r-1)
      CHECK(rat(static_cast<long>(sphere.size()), static_cast<long>(ball.size())) ==
            rat(2 * r - 2, 2 * r - 1));

      // oracle: filter all depth-L words by the Lemma 4.2 description
      std::set<std::vector<Letter>> expect_ball, expect_sphere;
      visit_sphere(r, depth, [&](std::span<const Letter> ls) {
        bool tail = true;
        for (int i = n; i < depth; ++i)
          if (ls[static_cast<std::size_t>(i)] != p.at(i)) tail = false;
        if (!tail) return;
        expect_ball.insert(std::vector<Letter>(ls.begin(), ls.end()));
        if (ls[static_cast<std::size_t>(n - 1)] != p.at(n - 1))
          expect_sphere.insert(std::vector<Letter>(ls.begin(), ls.end()));
      });
      std::set<std::vector<Letter>> got_ball, got_sphere;
      for (const Prefix& q : ball) got_ball.insert(q.word().letters());
      for (const Prefix& q : sphere) got_sphere.insert(q.word().letters());
      CHECK(got_ball == expect_ball);
      CHECK(got_sphere == expect_sphere);

      CHECK(got_ball.count(p.word().letters()) == 1);   // center in the ball
      CHECK(got_sphere.count(p.word().letters()) == 0); // not in the sphere
    }
  }

  // nesting: intersecting balls with m <= n are nested
  for (int trial = 0; trial < 100; ++trial) {
    const int depth = 6;
    Prefix p = random_prefix(rng, 2, depth);
    Prefix q = random_prefix(rng, 2, depth);
    const int n = 2 + static_cast<int>(rng.below(3));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (depth < n + 1) continue;
    auto big = folner_set(p, n, FolnerKind::Ball, depth);
    auto small = folner_set(q, m, FolnerKind::Ball, depth);
    std::set<std::vector<Letter>> big_set;
    for (const Prefix& w : big) big_set.insert(w.word().letters());
    bool meets = false;
    for (const Prefix& w : small)
      if (big_set.count(w.word().letters())) meets = true;
    if (meets)
      for (const Prefix& w : small) CHECK(big_set.count(w.word().letters()) == 1);
  }
}

TEST_CASE("boundary metric") {
  Prefix a(Word::parse(2, "a1a2a1"));
  Prefix b(Word::parse(2, "a2a2a1"));
  CHECK(boundary_metric(a, b) == 1);
  CHECK(boundary_metric(a, Prefix(Word::parse(2, "a1a2a2"))) == rat(1, 3));
  CHECK_THROWS_AS(boundary_metric(a, a), InsufficientDepth);

  Rng rng(2006);
  for (int n = 6; n <= 9; ++n) {
    Prefix p = random_prefix(rng, 2, n + 2);
    CHECK(boundary_metric(p, omega_map(p, n)) == rat(1, n));
  }
}

TEST_CASE("shift") {
  CHECK(shift(Prefix(Word::parse(2, "a1a2a1"))).str() == "a2a1");
  CHECK_THROWS_AS(shift(Prefix(Word::parse(2, "a1"))), InsufficientDepth);

  Rng rng(2007);
  for (int trial = 0; trial < 200; ++trial) {
    Prefix p = random_prefix(rng, 2, 8);
    // shift agrees with acting by xi_1^{-1}
    std::vector<Letter> one = {p.at(0).inverse()};
    CHECK(shift(p) == boundary_action(Word(2, one), p).prefix);
    // shift^2 agrees with acting by (xi_1 xi_2)^{-1}
    std::vector<Letter> two = {p.at(0), p.at(1)};
    CHECK(shift(shift(p)) == boundary_action(invert(Word(2, two)), p).prefix);
    // rn(xi_1^{-1}, p) = 2r - 1
    CHECK(radon_nikodym(Word(2, one), p) == 3);
  }
}

TEST_CASE("K derangement is a context-wise bijection off the banned letters") {
  for (int r : {2, 3}) {
    for (int prev = 0; prev < 2 * r; ++prev) {
      for (int next = 0; next < 2 * r; ++next) {
        std::set<int> image;
        int domain = 0;
        for (int mid = 0; mid < 2 * r; ++mid) {
          // reduced triple: mid != prev^{-1}, mid != next^{-1}
          if (mid == (prev ^ 1) || mid == (next ^ 1)) continue;
          ++domain;
          Letter out = fgb::detail::k_successor(r, Letter(prev), Letter(mid), Letter(next));
          CHECK(out.code() != (prev ^ 1));
          CHECK(out.code() != (next ^ 1));
          CHECK(out.code() != mid);
          image.insert(out.code());
          // inverse really inverts
          Letter back = fgb::detail::k_predecessor(r, Letter(prev), out, Letter(next));
          CHECK(back.code() == mid);
        }
        CHECK(static_cast<int>(image.size()) == domain);
      }
    }
  }
}

TEST_CASE("omega changes exactly coordinate n and permutes prefixes") {
  Rng rng(2008);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(5));
    Prefix p = random_prefix(rng, 2, n + 3);
    Prefix q = omega_map(p, n);
    REQUIRE(q.depth() == p.depth());
    for (int i = 0; i < p.depth(); ++i) {
      if (i == n - 1)
        CHECK(p.at(i) != q.at(i));
      else
        CHECK(p.at(i) == q.at(i));
    }
    CHECK(omega_inverse_map(q, n) == p);
  }
  CHECK_THROWS_AS(omega_map(random_prefix(rng, 2, 10), 5), InvalidParameter);
  CHECK_THROWS_AS(omega_map(Prefix(Word::parse(2, "a1a2a1a2a1a2")), 6), InsufficientDepth);

  // exhaustive permutation check at n = 6, depth 7
  const int n = 6, depth = 7;
  std::vector<bool> hit(sphere_size_checked(2, depth), false);
  std::uint64_t count = 0;
  visit_sphere(2, depth, [&](std::span<const Letter> ls) {
    Prefix p(Word(2, std::vector<Letter>(ls.begin(), ls.end())));
    std::uint64_t img = sphere_index(omega_map(p, n).word());
    CHECK_FALSE(hit[static_cast<std::size_t>(img)]);
    hit[static_cast<std::size_t>(img)] = true;
    ++count;
  });
  CHECK(Int(static_cast<unsigned long>(count)) == sphere_size(2, depth));
}

TEST_CASE("psi-omega formula, witnesses and fibers") {
  Rng rng(2009);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(5));
    Prefix p = random_prefix(rng, 2, n + 4);
    Prefix po = psi_omega_map(p, n);
    REQUIRE(po.depth() == p.depth());

    // coordinates >= n agree with omega's
    Prefix om = omega_map(p, n);
    for (int i = n - 1; i < p.depth(); ++i) CHECK(po.at(i) == om.at(i));

    // witness g: g xi = P^2 omega xi and g omega(xi) = psi omega(xi)
    Word g = prop56_witness(p, n);
    CHECK(g.in_even_subgroup());
    Prefix p2o = shift(shift(om));
    CHECK(boundary_action(g, p).prefix == p2o);
    CHECK(boundary_action(g, om).prefix == po);

    // the two images agree to 1/(n-1) exactly: the inserted pair
    // (s_n^{-1}, s'_n) starts at position n-1
    CHECK(boundary_metric(po, p2o) == rat(1, n - 1));
    CHECK(boundary_metric(p, om) == rat(1, n));

    // omega witness
    Word g1 = omega_witness(p, n);
    CHECK(boundary_action(g1, p).prefix == om);
    CHECK(multiply(invert(Word(2, {p.at(0), p.at(1)})), g1).word == g);
  }

  // psi o omega is at most (2r-1)^2-to-1: exhaustive count at n = 6, depth 9
  const int n = 6, depth = n + 3;
  std::map<std::vector<Letter>, int> fibers;
  visit_sphere(2, depth, [&](std::span<const Letter> ls) {
    Prefix p(Word(2, std::vector<Letter>(ls.begin(), ls.end())));
    fibers[psi_omega_map(p, n).word().letters()]++;
  });
  for (const auto& [img, count] : fibers) CHECK(count <= 9);
}

TEST_CASE("inner automorphism tables") {
  Rng rng(2010);
  Prefix p = random_prefix(rng, 2, 6);
  auto ident = build_inner_automorphism(p, p, 4);
  CHECK(ident.apply(p) == p);
  for (std::uint64_t i = 0; i < ident.table().size(); ++i) CHECK(ident.table()[i] == i);

  int done = 0;
  while (done < 100) {
    const int m = 2 + static_cast<int>(rng.below(3));
    Prefix a = random_prefix(rng, 2, m + 2);
    Prefix b = random_prefix(rng, 2, m + 2);
    if (a.at(m - 1) != b.at(m - 1)) {
      CHECK_THROWS_AS(build_inner_automorphism(a, b, m), IncompatiblePair);
      continue;
    }
    auto beta = build_inner_automorphism(a, b, m);
    CHECK(beta.order() == m);
    // beta(pi_m(a)) = pi_m(b)
    Prefix image = beta.apply(a);
    for (int i = 0; i < m; ++i) CHECK(image.at(i) == b.at(i));
    for (int i = m; i < a.depth(); ++i) CHECK(image.at(i) == a.at(i));
    // order m: equal depth-m projections give equal rewrites
    Prefix a2(Word(2, [&] {
      std::vector<Letter> ls(a.word().letters().begin(), a.word().letters().begin() + m);
      for (;;) {
        Letter cand(static_cast<int>(rng.below(4)));
        if (cand != ls.back().inverse()) {
          ls.push_back(cand);
          break;
        }
      }
      return ls;
    }()));
    Prefix i2 = beta.apply(a2);
    for (int i = 0; i < m; ++i) CHECK(i2.at(i) == image.at(i));
    ++done;
  }
}
