#include <doctest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <string>
#include <vector>

#include "mdual/errors.hpp"
#include "mdual/lattices.hpp"
#include "mdual/poset.hpp"

using namespace mdual;

namespace {

// Transitive closure of a random DAG on n vertices, labelled in shuffled order.
FinitePoset random_poset(std::mt19937_64& rng, std::size_t n, double density) {
  std::vector<std::vector<bool>> leq(n, std::vector<bool>(n, false));
  std::bernoulli_distribution edge(density);
  for (std::size_t i = 0; i < n; ++i) {
    leq[i][i] = true;
    for (std::size_t j = i + 1; j < n; ++j) leq[i][j] = edge(rng);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (leq[i][k] && leq[k][j]) leq[i][j] = true;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("v" + std::to_string(perm[i]));
  return build_poset(labels, [&](std::size_t a, std::size_t b) { return leq[perm[a]][perm[b]]; });
}

}  // namespace

TEST_CASE("chain keeps its order") {
  const auto c = chain_poset(3);
  REQUIRE(c.size() == 3);
  CHECK(c.label(0) == "0");
  CHECK(c.label(2) == "2");
  CHECK(c.leq(0, 2));
  CHECK_FALSE(c.leq(2, 0));
  const auto z = zeta_matrix(chain_poset(2));
  CHECK(z(0, 0) == 1);
  CHECK(z(0, 1) == 1);
  CHECK(z(1, 0) == 0);
}

TEST_CASE("antichain has identity zeta") {
  CHECK(zeta_matrix(antichain_poset(3)).is_identity());
  const auto p = build_poset({"a", "b"}, [](std::size_t x, std::size_t y) { return x == y; });
  CHECK(zeta_matrix(p).is_identity());
}

TEST_CASE("order violations carry witnesses") {
  try {
    build_poset({"a", "b", "c"}, [](std::size_t x, std::size_t y) { return x == y || (x == 0 && y == 1) || (x == 1 && y == 2); });
    FAIL("transitivity failure not detected");
  } catch (const PartialOrderViolation& e) {
    CHECK(e.kind() == PartialOrderViolation::Kind::Transitivity);
    CHECK(e.first() == "a");
    CHECK(e.second() == "b");
    CHECK(e.third() == "c");
  }
  CHECK_THROWS_AS(build_poset({"a", "b"}, [](std::size_t, std::size_t) { return true; }), PartialOrderViolation);
  CHECK_THROWS_AS(build_poset({"a"}, [](std::size_t, std::size_t) { return false; }), PartialOrderViolation);
}

TEST_CASE("Möbius function of a chain") {
  const auto zp = moebius_matrix(chain_poset(3));
  CHECK(zp.mu(0, 1) == -1);
  CHECK(zp.mu(0, 2) == 0);
  CHECK(zp.mu(1, 2) == -1);
  for (std::size_t a = 0; a < 3; ++a) CHECK(zp.mu(a, a) == 1);
}

TEST_CASE("subset lattice of two elements") {
  const auto lat = subset_lattice(2);
  const auto zp = moebius_matrix(lat.poset());
  const auto empty = lat.index(0b00), one = lat.index(0b01), full = lat.index(0b11);
  for (std::size_t k = 0; k < 4; ++k) CHECK(zp.zeta(empty, k) == 1);
  CHECK(zp.zeta(one, full) == 1);
  CHECK(zp.mu(empty, full) == 1);
}

TEST_CASE("recursion agrees with Gaussian elimination on random posets") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_poset(rng, 2 + static_cast<std::size_t>(trial % 11), 0.3);
    const auto zp = moebius_matrix(p);
    const auto z = zeta_matrix(p);
    CHECK(z.is_upper_triangular());
    CHECK(z.determinant() == 1);
    CHECK(zp.moebius == z.inverse());
    CHECK(zp.mu.to_rational() == zp.moebius);
    CHECK((z * zp.moebius).is_identity());
    // The index order is a linear extension.
    for (std::size_t a = 0; a < p.size(); ++a)
      for (std::size_t b = 0; b < p.size(); ++b)
        if (p.leq(a, b)) CHECK(a <= b);
  }
}

TEST_CASE("canonical order sorts by height then input position") {
  // Input order: top, then two atoms, then bottom.
  const auto p = build_poset({"t", "x", "y", "b"}, [](std::size_t a, std::size_t c) {
    if (a == c) return true;
    if (a == 3) return true;
    return c == 0;
  });
  CHECK(p.label(0) == "b");
  CHECK(p.label(1) == "x");
  CHECK(p.label(2) == "y");
  CHECK(p.label(3) == "t");
  CHECK(p.input_position(0) == 3);
  CHECK(p.from_input_position(0) == 3);
  CHECK(p.height(3) == 2);
}

TEST_CASE("product of posets") {
  const auto square = product_poset(chain_poset(2), chain_poset(2));
  REQUIRE(square.poset.size() == 4);
  const auto subsets = subset_lattice(2);
  // The square is isomorphic to the subsets of {1,2}: (x,y) ↦ {1 if x, 2 if y}.
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      const auto [a1, a2] = square.components[a];
      const auto [b1, b2] = square.components[b];
      const SubsetMask ma = static_cast<SubsetMask>(a1 | (a2 << 1)), mb = static_cast<SubsetMask>(b1 | (b2 << 1));
      CHECK(square.poset.leq(a, b) == subsets.poset().leq(subsets.index(ma), subsets.index(mb)));
    }
  const auto zp = moebius_matrix(square.poset);
  CHECK(zp.mu(square.index_of(0, 0), square.index_of(1, 1)) == 1);

  // Antichain factor gives disjoint copies.
  const auto copies = product_poset(antichain_poset(2), chain_poset(3));
  for (std::size_t a = 0; a < copies.poset.size(); ++a)
    for (std::size_t b = 0; b < copies.poset.size(); ++b)
      if (copies.components[a].first != copies.components[b].first) CHECK_FALSE(copies.poset.leq(a, b));
}

TEST_CASE("product Möbius factorises") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    const auto p1 = random_poset(rng, 3 + static_cast<std::size_t>(trial % 3), 0.5);
    const auto p2 = random_poset(rng, 2 + static_cast<std::size_t>(trial % 4), 0.5);
    const auto prod = product_poset(p1, p2);
    const auto z1 = moebius_matrix(p1), z2 = moebius_matrix(p2), z = moebius_matrix(prod.poset);
    for (std::size_t a = 0; a < prod.poset.size(); ++a)
      for (std::size_t b = 0; b < prod.poset.size(); ++b) {
        const auto [a1, a2] = prod.components[a];
        const auto [b1, b2] = prod.components[b];
        const std::int64_t expected = p1.leq(a1, b1) && p2.leq(a2, b2) ? z1.mu(a1, b1) * z2.mu(a2, b2) : 0;
        CHECK(z.mu(a, b) == expected);
      }
  }
}

TEST_CASE("product size cap") {
  CHECK_THROWS_AS(product_poset(chain_poset(100), chain_poset(100)), SizeOverflow);
}

TEST_CASE("transpose pair") {
  const auto [zt, zt_inv] = transpose_pair(moebius_matrix(chain_poset(2)));
  CHECK(zt(1, 0) == 1);
  CHECK(zt(0, 1) == 0);
  CHECK((zt_inv * zt).is_identity());

  const auto lat = subset_lattice(3);
  const auto [t, t_inv] = transpose_pair(moebius_matrix(lat.poset()));
  CHECK((t_inv * t).is_identity());
  for (std::size_t a = 0; a < lat.size(); ++a)
    for (std::size_t b = 0; b < lat.size(); ++b) {
      const auto j = lat.mask(a), k = lat.mask(b);
      const bool sub = (k & ~j) == 0;
      const int sign = (std::popcount(j) - std::popcount(k)) % 2 == 0 ? 1 : -1;
      CHECK(t_inv(a, b) == (sub ? sign : 0));
    }
}
