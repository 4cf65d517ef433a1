#include <doctest.h>

#include <algorithm>
#include <bit>
#include <numeric>

#include "mdual/cannings.hpp"
#include "mdual/errors.hpp"

using namespace mdual;

namespace {

Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

// Brute force over all N! permutations.
bool invariant_under_all(const OffspringLaw& law, bool relabel_children) {
  std::vector<int> perm(static_cast<std::size_t>(law.ground_size()));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (!invariant_under(law, perm, relabel_children)) return false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return true;
}

// ν_0 = everything with probability one: not exchangeable.
OffspringLaw dictator_law(int n) {
  std::vector<SubsetMask> nu(static_cast<std::size_t>(n), 0);
  nu[0] = static_cast<SubsetMask>((1u << n) - 1);
  return OffspringLaw::from_atoms(n, {{nu, Rational(1)}});
}

}  // namespace

TEST_CASE("Wright-Fisher law") {
  const auto wf2 = wright_fisher_law(2);
  CHECK(wf2.atoms().size() == 4);
  Rational both_to_first = 0;
  for (const auto& a : wf2.atoms())
    if (a.children[0] == 0b11) both_to_first += a.probability;
  CHECK(both_to_first == frac(1, 4));
  CHECK(wf2.exchangeable());
  CHECK(wf2.parent_exchangeable());

  const auto wf1 = wright_fisher_law(1);
  REQUIRE(wf1.atoms().size() == 1);
  CHECK(wf1.atoms()[0].children == std::vector<SubsetMask>{1});
  CHECK_THROWS_AS(wright_fisher_law(7), SizeOverflow);
}

TEST_CASE("Moran law") {
  const auto m2 = moran_law(2);
  REQUIRE(m2.atoms().size() == 2);
  for (const auto& a : m2.atoms()) {
    CHECK(a.probability == frac(1, 2));
    CHECK(std::popcount(a.children[0]) + std::popcount(a.children[1]) == 2);
    CHECK((a.children[0] == 0 || a.children[1] == 0));
  }
  const auto m3 = moran_law(3);
  CHECK(m3.atoms().size() == 6);
  for (const auto& a : m3.atoms()) {
    std::vector<int> sizes;
    for (auto c : a.children) sizes.push_back(std::popcount(c));
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{0, 1, 2});
  }
  CHECK(m3.exchangeable());
  CHECK_FALSE(m3.parent_exchangeable());
  CHECK(moran_law(2).parent_exchangeable());
  CHECK_THROWS_AS(moran_law(9), SizeOverflow);
}

TEST_CASE("generator-based exchangeability equals brute force over all permutations") {
  for (int n = 1; n <= 5; ++n) {
    std::vector<OffspringLaw> laws = {identity_law(n), dictator_law(n)};
    if (n <= 5) laws.push_back(wright_fisher_law(n));
    if (n >= 2) laws.push_back(moran_law(n));
    for (const auto& law : laws) {
      CHECK(law.exchangeable() == invariant_under_all(law, true));
      CHECK(law.parent_exchangeable() == invariant_under_all(law, false));
    }
  }
  CHECK_FALSE(dictator_law(3).exchangeable());
}

TEST_CASE("invalid laws are rejected") {
  CHECK_THROWS_AS(OffspringLaw::from_atoms(2, {{{0b01, 0b01}, Rational(1)}}), Error);  // overlap
  CHECK_THROWS_AS(OffspringLaw::from_atoms(2, {{{0b01, 0b00}, Rational(1)}}), Error);  // not covering
  CHECK_THROWS_AS(OffspringLaw::from_atoms(2, {{{0b01, 0b10}, frac(1, 2)}}), Error);   // mass 1/2
  // Repeated atoms merge.
  const auto merged = OffspringLaw::from_atoms(2, {{{0b01, 0b10}, frac(1, 2)}, {{0b01, 0b10}, frac(1, 2)}});
  CHECK(merged.atoms().size() == 1);
}

TEST_CASE("forward kernel") {
  const auto fk = forward_kernel(wright_fisher_law(2));
  const auto& l = fk.lattice;
  for (SubsetMask k = 0; k < 4; ++k) CHECK(fk.p.matrix(l.index(0b01), l.index(k)) == frac(1, 4));
  CHECK(fk.p.stochastic());
  for (const auto& law : {wright_fisher_law(3), moran_law(4), identity_law(3)}) {
    const auto f = forward_kernel(law);
    CHECK(f.p.stochastic());
    CHECK(f.p.matrix(0, 0) == 1);
    CHECK(f.p.matrix(f.lattice.size() - 1, f.lattice.size() - 1) == 1);
  }
}

TEST_CASE("backward kernel") {
  const auto bk = backward_kernel(wright_fisher_law(2));
  const auto& l = bk.lattice;
  const auto& q = bk.q.matrix;
  CHECK(q(l.index(0b01), l.index(0b01)) == frac(1, 2));
  CHECK(q(l.index(0b01), l.index(0b10)) == frac(1, 2));
  CHECK(q(l.index(0b11), l.index(0b11)) == frac(1, 2));
  CHECK(q(l.index(0b11), l.index(0b01)) == frac(1, 4));
  CHECK(q(l.index(0b11), l.index(0b10)) == frac(1, 4));
  CHECK(q(0, 0) == 1);
  for (const auto& law : {wright_fisher_law(4), moran_law(5)}) CHECK(backward_kernel(law).q.stochastic());
}

TEST_CASE("minimal cover") {
  const std::vector<SubsetMask> nu = {0b0011, 0, 0b1100, 0};
  CHECK(minimal_cover(nu, 0b0001) == 0b0001);
  CHECK(minimal_cover(nu, 0b0101) == 0b0101);
  CHECK(minimal_cover(nu, 0) == 0);
}

TEST_CASE("transpose zeta duality of the set chains") {
  for (const auto& law : {wright_fisher_law(2), moran_law(3), identity_law(3), wright_fisher_law(4), moran_law(4)}) {
    const auto fk = forward_kernel(law);
    const auto bk = backward_kernel(law);
    const auto check = verify_transpose_zeta_duality(fk, bk);
    CHECK(check.conjugation);
    CHECK(check.sylvester);
  }
  const auto id = identity_law(3);
  CHECK(forward_kernel(id).p.matrix.is_identity());
  CHECK(backward_kernel(id).q.matrix.is_identity());
}

TEST_CASE("coarse Cannings chain") {
  const auto law = wright_fisher_law(2);
  const auto c = coarsen_to_cannings(law, forward_kernel(law), backward_kernel(law));
  RationalMatrix expected_q(3, 3);
  expected_q(0, 0) = 1;
  expected_q(1, 1) = 1;
  expected_q(2, 1) = frac(1, 2);
  expected_q(2, 2) = frac(1, 2);
  CHECK(c.pipeline.q_hat.matrix == expected_q);
  CHECK(c.pipeline.p_coarse(1, 0) == frac(1, 4));
  CHECK(c.pipeline.p_coarse(1, 1) == frac(1, 2));
  CHECK(c.pipeline.p_coarse(1, 2) == frac(1, 4));
  CHECK(c.q_is_backward);
  CHECK(c.p_matches_direct);
  CHECK(c.h_hat_binomial);
  CHECK(c.h_hat_matches);
  CHECK(c.h_hat_inverse_matches);
  CHECK(c.q_matches_moment);

  const auto law3 = moran_law(3);
  const auto c3 = coarsen_to_cannings(law3, forward_kernel(law3), backward_kernel(law3));
  CHECK(c3.h_hat_closed(2, 1) == frac(2, 3));
  CHECK(c3.h_hat_inverse_closed(2, 1) == -6);
  CHECK(c3.pipeline.h_hat_coarse(2, 1) == frac(2, 3));
  CHECK(c3.pipeline.h_hat_coarse.inverse()(2, 1) == -6);

  for (int n = 2; n <= 4; ++n)
    for (const auto& l : {wright_fisher_law(n), moran_law(n)}) {
      const auto r = coarsen_to_cannings(l, forward_kernel(l), backward_kernel(l));
      CHECK(r.p_matches_direct);
      CHECK(r.q_matches_moment);
      CHECK(r.pipeline.hat_duality);
      CHECK(r.pipeline.q_hat.stochastic());
      CHECK(r.pipeline.p_coarse_kind == KernelKind::Stochastic);
      // Exact duality of powers on the coarse chains.
      for (unsigned k = 1; k <= 5; ++k)
        CHECK(r.pipeline.p_coarse.power(k) * r.pipeline.h_hat_coarse ==
              r.pipeline.h_hat_coarse * r.pipeline.q_hat.matrix.transpose().power(k));
    }

  const auto d = dictator_law(3);
  CHECK_THROWS_AS(coarsen_to_cannings(d, forward_kernel(d), backward_kernel(d)), NotExchangeable);
}

TEST_CASE("multi-allelic kernels") {
  const auto wf3 = wright_fisher_law(3);
  const auto ma = multiallelic_kernels(wf3, 3);
  CHECK(ma.size() == 64);
  CHECK(ma.covering.size() == 27);
  CHECK(ma.p_stochastic);
  CHECK(ma.covering_closed);
  CHECK(ma.q_substochastic);
  const auto check = verify_multiallelic_duality(ma);
  CHECK(check.identity);
  CHECK(check.sylvester);

  // Three singletons of distinct types keep their mass only when all parents differ.
  const std::uint64_t singles = (1u << 0) | (1u << (3 + 1)) | (1u << (6 + 2));
  const auto row = ma.index.at(singles);
  CHECK(ma.q.row_sum(row) == frac(6, 27));
  CHECK(ma.defect[row] == frac(21, 27));
  // Rows carrying one type only never lose mass.
  for (std::size_t s = 0; s < ma.size(); ++s) {
    int types_present = 0;
    for (int t = 0; t < 3; ++t) types_present += ma.component(s, t) != 0;
    if (types_present <= 1) CHECK(ma.q.row_sum(s) == 1);
  }

  const auto id = multiallelic_kernels(identity_law(2), 3);
  CHECK(id.p.dense().is_identity());
  for (auto s : id.covering) CHECK(id.q.entry(s, s) == 1);
  CHECK_THROWS_AS(multiallelic_kernels(wright_fisher_law(6), 5), SizeOverflow);
}

TEST_CASE("two types on covering states reduce to the haploid chain") {
  const auto law = wright_fisher_law(2);
  const auto ma = multiallelic_kernels(law, 2);
  const auto fk = forward_kernel(law);
  for (auto a : ma.covering)
    for (auto b : ma.covering) {
      const auto ja = ma.component(a, 0), jb = ma.component(b, 0);
      CHECK(ma.component(a, 1) == (fk.lattice.full_mask() & ~ja));
      CHECK(ma.p.entry(a, b) == fk.p.matrix(fk.lattice.index(ja), fk.lattice.index(jb)));
    }
}

TEST_CASE("coarse multi-allelic chain") {
  const auto law = wright_fisher_law(2);
  const auto c = coarsen_multiallelic(law, multiallelic_kernels(law, 2));
  const auto find = [&](std::vector<int> e) {
    return static_cast<std::size_t>(std::find(c.classes.begin(), c.classes.end(), e) - c.classes.begin());
  };
  CHECK(c.h_hat[find({1, 1})] == 2);
  CHECK(c.p_coarse(find({1, 1}), find({2, 0})) == frac(1, 4));
  for (std::size_t e = 0; e < c.classes.size(); ++e) {
    int total = 0;
    for (int x : c.classes[e]) total += x;
    if (total == 2) CHECK(c.h_hat_coarse(e, e) * c.h_hat[e] == 1);
  }
  CHECK(c.h_hat_multinomial);
  CHECK(c.h_hat_closed_form);
  CHECK(c.inverse_commutes);
  CHECK(c.coarse_duality);
  CHECK(c.hat_duality);
  CHECK(c.p_matches_direct);
  CHECK(c.q_hat_substochastic);
  CHECK(c.single_type_rows_stochastic);

  for (const auto& l : {wright_fisher_law(3), moran_law(3), moran_law(4)}) {
    const auto r = coarsen_multiallelic(l, multiallelic_kernels(l, 3));
    CHECK(r.hat_duality);
    CHECK(r.p_matches_direct);
    CHECK(r.q_hat_substochastic);
  }
}

TEST_CASE("Monte Carlo with no steps is exact") {
  MonteCarloOptions o;
  o.steps = 0;
  o.reps = 500;
  const auto r = monte_carlo_duality(wright_fisher_law(4), 2, 1, o);
  CHECK(r.exact == frac(1, 2));
  CHECK(r.forward.mean == r.exact);
  CHECK(r.backward.mean == r.exact);
  CHECK(r.forward.variance == 0);
  CHECK(r.backward.variance == 0);
}

TEST_CASE("Monte Carlo agrees with the exact value and is reproducible") {
  const auto law = wright_fisher_law(4);
  MonteCarloOptions o;
  o.steps = 1;
  o.reps = 100000;
  o.seed = 12345;
  const auto r = monte_carlo_duality(law, 2, 1, o);
  const auto c = coarsen_to_cannings(law, forward_kernel(law), backward_kernel(law));
  CHECK(r.exact == (c.pipeline.p_coarse * c.pipeline.h_hat_coarse)(2, 1));
  CHECK(r.forward.within_four_se);
  CHECK(r.backward.within_four_se);

  o.threads = 1;
  const auto single = monte_carlo_duality(law, 2, 1, o);
  o.threads = 3;
  const auto three = monte_carlo_duality(law, 2, 1, o);
  CHECK(single.forward.final_counts == r.forward.final_counts);
  CHECK(three.forward.final_counts == r.forward.final_counts);
  CHECK(three.backward.mean == single.backward.mean);

  // Against the whole set I: H̃_ĥ(i,N) = 1_{i=N}, so the forward mean estimates fixation.
  o.steps = 3;
  o.reps = 50000;
  const auto fix = monte_carlo_duality(moran_law(4), 2, 4, o);
  const auto m = coarsen_to_cannings(moran_law(4), forward_kernel(moran_law(4)), backward_kernel(moran_law(4)));
  CHECK(fix.exact == m.pipeline.p_coarse.power(3)(2, 4));
  CHECK(fix.forward.within_four_se);
  CHECK(fix.backward.within_four_se);
}
