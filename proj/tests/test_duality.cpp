#include <doctest.h>

#include <algorithm>
#include <bit>
#include <random>

#include "mdual/duality.hpp"
#include "mdual/errors.hpp"
#include "mdual/lattices.hpp"
#include "mdual/poset.hpp"

using namespace mdual;

namespace {

Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

RationalMatrix from_rows(std::initializer_list<std::initializer_list<Rational>> rows) {
  RationalMatrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (const auto& v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

RationalMatrix uniform(std::size_t n) {
  RationalMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = frac(1, static_cast<long>(n));
  return m;
}

// Stochastic kernel with small random weights; some rows sparse.
RationalMatrix random_kernel(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> w(0, 3);
  RationalMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    Rational total = 0;
    for (std::size_t c = 0; c < n; ++c) total += (m(r, c) = w(rng));
    if (total == 0) m(r, r) = total = 1;
    for (std::size_t c = 0; c < n; ++c) m(r, c) /= total;
  }
  return m;
}

}  // namespace

TEST_CASE("kernel classification") {
  CHECK(classify_kernel(uniform(3)) == KernelKind::Stochastic);
  CHECK(classify_kernel(frac(1, 2) * uniform(3)) == KernelKind::Substochastic);
  CHECK(classify_kernel(Rational(2) * uniform(3)) == KernelKind::General);
  CHECK(classify_kernel(Rational(-1) * RationalMatrix::identity(2)) == KernelKind::General);
}

TEST_CASE("variant names round trip") {
  for (auto v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
  CHECK_THROWS_AS(parse_variant("siegmund"), ParseError);
}

TEST_CASE("h_dual examples") {
  const auto zp = moebius_matrix(chain_poset(2));
  const auto half = uniform(2);
  CHECK(h_dual(half, RationalMatrix::identity(2)) == half.transpose());
  CHECK(h_dual(half, zp.zeta) == from_rows({{0, frac(1, 2)}, {0, 1}}));
  CHECK(h_dual(RationalMatrix::identity(2), zp.zeta).is_identity());
  RationalMatrix singular(2, 2);
  singular(0, 0) = 1;
  CHECK_THROWS_AS(h_dual(half, singular), SingularMatrix);
  CHECK_THROWS_AS(h_dual(half, RationalMatrix::identity(3)), DimensionMismatch);
}

TEST_CASE("duality propagates to powers") {
  std::mt19937_64 rng(5);
  const auto zp = moebius_matrix(subset_lattice(2).poset());
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_kernel(rng, 4);
    for (auto v : kAllVariants) {
      const auto h = duality_matrix(zp, v);
      CHECK(duality_holds(p, h, h_dual(p, h), 4));
    }
  }
}

TEST_CASE("cone membership") {
  const auto lat = subset_lattice(2);
  const auto zp = moebius_matrix(lat.poset());
  const RationalVector ones(4, 1);
  const auto r = cone_membership(ones, zp, false);
  CHECK(r.member);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.image[i] == (lat.mask(i) == 0b11 ? 1 : 0));

  RationalVector card(4);
  for (std::size_t i = 0; i < 4; ++i) card[i] = std::popcount(lat.mask(i));
  // |J| grows along the order, so it sits in the transposed cone: (Z⁻¹)′g = (0, 1, 1, 0).
  const auto c = cone_membership(card, zp, true);
  CHECK(c.member);
  CHECK(c.image[lat.index(0b00)] == 0);
  CHECK(c.image[lat.index(0b01)] == 1);
  CHECK(c.image[lat.index(0b10)] == 1);
  CHECK(c.image[lat.index(0b11)] == 0);
  // Z⁻¹g(J) = Σ_{K⊇J} (-1)^{|K|-|J|} |K| = (0, -1, -1, 2).
  const auto up = cone_membership(card, zp, false);
  CHECK_FALSE(up.member);
  CHECK(up.image[lat.index(0b01)] == -1);
  CHECK(up.image[lat.index(0b11)] == 2);

  const RationalVector w = {frac(1, 3), 0, 2, frac(1, 7)};
  const auto g = zp.zeta.apply(w);
  const auto m = cone_membership(g, zp, false);
  CHECK(m.member);
  CHECK(m.image == w);

  const RationalVector bad = {1, 0, 0, 0};
  const auto neg = cone_membership(bad, zp, true);
  CHECK_FALSE(neg.member);
  CHECK(neg.first_negative.has_value());
}

TEST_CASE("cone images are never positive on a negative function") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<long> d(-3, 5);
  const auto zp = moebius_matrix(partition_lattice(3).poset());
  for (int trial = 0; trial < 300; ++trial) {
    RationalVector g(zp.size());
    for (auto& x : g) x = d(rng);
    for (bool t : {false, true}) {
      const auto r = cone_membership(g, zp, t);
      bool image_nonneg = true;
      for (const auto& x : r.image) image_nonneg = image_nonneg && x >= 0;
      CHECK(r.member == image_nonneg);
      if (r.member)
        for (const auto& x : g) CHECK(x >= 0);
    }
  }
}

TEST_CASE("positivity certificate examples") {
  const auto chain = moebius_matrix(chain_poset(2));
  const auto cert = positivity_certificate(Kernel(uniform(2)), chain, DualityVariant::Zeta);
  CHECK(cert.condition_i);
  CHECK(cert.q_nonnegative);
  CHECK(cert.agreement);
  CHECK(cert.images_match_q);

  const auto zp = moebius_matrix(subset_lattice(2).poset());
  for (auto v : kAllVariants) {
    const auto id = positivity_certificate(Kernel(RationalMatrix::identity(4)), zp, v);
    CHECK(id.condition_i);
    CHECK(id.q.is_identity());
  }

  RationalMatrix to_empty(4, 4);
  for (std::size_t r = 0; r < 4; ++r) to_empty(r, 0) = 1;
  const auto e = positivity_certificate(Kernel(to_empty), zp, DualityVariant::Zeta);
  CHECK(e.condition_i);
  CHECK(e.q_nonnegative);
}

TEST_CASE("condition (i) is equivalent to a nonnegative dual") {
  std::mt19937_64 rng(31);
  int yes = 0, no = 0;
  const auto zp = moebius_matrix(subset_lattice(2).poset());
  for (int trial = 0; trial < 60; ++trial) {
    const Kernel p(random_kernel(rng, 4));
    for (auto v : kAllVariants) {
      const auto cert = positivity_certificate(p, zp, v);
      CHECK(cert.agreement);
      CHECK(cert.images_match_q);
      CHECK(cert.condition_i == cert.q_nonnegative);
      CHECK(cert.witnesses.empty() == cert.condition_i);
      (cert.condition_i ? yes : no)++;
    }
  }
  CHECK(yes > 0);
  CHECK(no > 0);
}

TEST_CASE("strong condition") {
  const auto chain = moebius_matrix(chain_poset(2));
  const auto s = strong_condition_check(Kernel(RationalMatrix::identity(2)), chain, DualityVariant::Zeta);
  CHECK_FALSE(s.condition_ii);
  CHECK(s.failing_margins == std::vector<std::size_t>{1});
  CHECK(s.q.is_identity());

  const auto u = strong_condition_check(Kernel(uniform(2)), chain, DualityVariant::Zeta);
  CHECK(u.condition_ii);
  REQUIRE(u.monotone.has_value());
  CHECK(*u.monotone);
}

TEST_CASE("strong condition implies monotone duals on random cone kernels") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<long> w(0, 3);
  const auto zp = moebius_matrix(subset_lattice(2).poset());
  int checked = 0;
  for (auto v : kAllVariants) {
    const auto& d = describe(v);
    for (int trial = 0; trial < 40; ++trial) {
      // Margins built as Z w or Z′ w with w ≥ 0 lie in the cone by construction.
      RationalMatrix margins(4, 4);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) margins(r, c) = w(rng);
      const auto& gen = d.transposed_cone ? zp.zeta.transpose() : zp.zeta;
      RationalMatrix p = d.margin == Margin::Columns ? gen * margins : (gen * margins).transpose();
      const auto sums = p.row_sums();
      Rational top = 0;
      for (const auto& s : sums) top = std::max(top, s);
      if (top == 0) continue;
      p = (1 / top) * p;
      const auto s = strong_condition_check(Kernel(p), zp, v);
      CHECK(s.condition_ii);
      REQUIRE(s.monotone.has_value());
      CHECK(*s.monotone);
      CHECK_FALSE(monotonicity_violation(s.q, zp.poset, d.margin, d.monotone).has_value());
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("support implication") {
  const auto lat = subset_lattice(2);
  const auto zp = moebius_matrix(lat.poset());
  // Upper-triangular stochastic P: mass only on supersets.
  RationalMatrix up(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    const auto& ups = zp.poset.up_set(r);
    for (auto c : ups) up(r, c) = frac(1, static_cast<long>(ups.size()));
  }
  const auto q = h_dual(up, zp.zeta);
  CHECK(support_implication_check(up, q, zp.poset, SupportPattern::Up));
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t d = 0; d < 4; ++d)
      if (q(c, d) != 0) CHECK(zp.poset.leq(d, c));

  const auto id = RationalMatrix::identity(4);
  CHECK(support_implication_check(id, id, zp.poset, SupportPattern::Up));
  CHECK(support_implication_check(id, id, zp.poset, SupportPattern::Down));
  const auto full = uniform(4);
  CHECK(support_implication_check(full, h_dual(full, zp.zeta), zp.poset, SupportPattern::Up));

  std::mt19937_64 rng(3);
  for (auto v : kAllVariants) {
    const auto h = duality_matrix(zp, v);
    for (int trial = 0; trial < 20; ++trial) {
      auto p = random_kernel(rng, 4);
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 4; ++d) {
          const bool allowed = describe(v).support == SupportPattern::Up ? zp.poset.leq(c, d) : zp.poset.leq(d, c);
          if (!allowed) p(c, d) = 0;
        }
      CHECK(support_implication_check(p, h_dual(p, h), zp.poset, describe(v).support));
    }
  }
}

TEST_CASE("h-transform") {
  const auto q = from_rows({{frac(1, 2), frac(1, 2)}, {0, 1}});
  const auto same = h_transform(q, RationalVector{1, 1});
  CHECK(same.kernel.matrix == q);
  CHECK(same.stochastic);
  CHECK(h_transform(q, RationalVector{3, 3}).kernel.matrix == q);

  const auto t = h_transform(q, RationalVector{1, 2});
  CHECK(t.kernel.matrix == from_rows({{frac(1, 2), 1}, {0, 1}}));
  CHECK_FALSE(t.stochastic);
  CHECK_FALSE(t.h_harmonic);
  CHECK(q.apply(RationalVector{1, 2}) == RationalVector{frac(3, 2), 2});

  CHECK_THROWS_AS(h_transform(q, RationalVector{1, 0}), NonpositiveH);
  CHECK_THROWS_AS(h_transform(q, RationalVector{1, -2}), NonpositiveH);
}

TEST_CASE("representing measures") {
  const auto lat = subset_lattice(2);
  const auto zp = moebius_matrix(lat.poset());
  const auto m = representing_measure(RationalVector(4, 1), zp);
  for (std::size_t i = 0; i < 4; ++i) CHECK(m.weights[i] == (lat.mask(i) == 0b11 ? 1 : 0));
  CHECK(m.nonnegative);

  RationalVector pow2(4);
  for (std::size_t i = 0; i < 4; ++i) pow2[i] = 1 << std::popcount(lat.mask(i));
  const auto p = representing_measure(pow2, zp);
  // Oracle: Σ_{K⊇J} (-1)^{|K|-|J|} 2^{|K|} evaluated directly.
  for (std::size_t a = 0; a < 4; ++a) {
    Rational expected = 0;
    for (std::size_t b = 0; b < 4; ++b)
      if ((lat.mask(a) & ~lat.mask(b)) == 0) expected += SubsetLattice::moebius(lat.mask(a), lat.mask(b)) * pow2[b];
    CHECK(p.weights[a] == expected);
  }
  CHECK(p.weights[lat.index(0b00)] == 1);
  CHECK(p.weights[lat.index(0b01)] == -2);
  CHECK(p.weights[lat.index(0b11)] == 4);
  CHECK_FALSE(p.nonnegative);

  const auto plat = partition_lattice(3);
  const auto pzp = moebius_matrix(plat.poset());
  const auto top = representing_measure(RationalVector(plat.size(), 1), pzp);
  for (std::size_t i = 0; i < plat.size(); ++i) CHECK(top.weights[i] == (i == plat.top() ? 1 : 0));
}

TEST_CASE("representing measure is linear and matches cone membership") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<long> d(-4, 6);
  const auto zp = moebius_matrix(subset_lattice(3).poset());
  for (int trial = 0; trial < 50; ++trial) {
    RationalVector g1(zp.size()), g2(zp.size()), sum(zp.size());
    for (std::size_t i = 0; i < zp.size(); ++i) {
      g1[i] = frac(d(rng), 3);
      g2[i] = d(rng);
      sum[i] = g1[i] + g2[i];
    }
    for (bool t : {false, true}) {
      const auto a = representing_measure(g1, zp, t), b = representing_measure(g2, zp, t), c = representing_measure(sum, zp, t);
      for (std::size_t i = 0; i < zp.size(); ++i) CHECK(c.weights[i] == a.weights[i] + b.weights[i]);
      CHECK(a.nonnegative == cone_membership(g1, zp, t).member);
    }
  }
}

TEST_CASE("irreducibility and invariant distributions") {
  CHECK(invariant_distribution(RationalMatrix::identity(1)) == RationalVector{1});
  CHECK(invariant_distribution(uniform(2)) == RationalVector{frac(1, 2), frac(1, 2)});
  const auto p = from_rows({{frac(2, 3), frac(1, 3)}, {frac(1, 6), frac(5, 6)}});
  const auto rho = invariant_distribution(p);
  CHECK(rho == RationalVector{frac(1, 3), frac(2, 3)});
  CHECK(p.transpose().apply(rho) == rho);

  CHECK_FALSE(is_irreducible(RationalMatrix::identity(2)));
  CHECK(is_irreducible(p));
  CHECK_THROWS_AS(invariant_distribution(RationalMatrix::identity(2)), NotIrreducible);
}
