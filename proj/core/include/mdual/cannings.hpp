#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mdual/coarse_graining.hpp"
#include "mdual/duality.hpp"
#include "mdual/lattices.hpp"
#include "mdual/matrix.hpp"

namespace mdual {

/// One outcome of the offspring map: children[i] = ν_i, the set of children
/// of parent i. The ν_i are pairwise disjoint and cover {1..N}.
struct OffspringAtom {
  std::vector<SubsetMask> children;
  Rational probability;
};

class OffspringLaw {
 public:
  /// Validates every atom, merges repeated atoms and requires total mass 1.
  /// Throws Error on an invalid law, SizeOverflow on too many atoms.
  static OffspringLaw from_atoms(int ground_size, std::vector<OffspringAtom> atoms);

  int ground_size() const noexcept { return ground_size_; }
  const std::vector<OffspringAtom>& atoms() const noexcept { return atoms_; }
  /// Common denominator of all atom probabilities, and each probability as
  /// a multiple of 1/denominator.
  std::int64_t denominator() const noexcept { return denominator_; }
  std::int64_t weight(std::size_t atom) const { return weights_[atom]; }

  /// Invariance under relabelling individuals, parents and children alike:
  /// ν ↦ (σ ν_{σ⁻¹(i)})_i. This is the symmetry the set chains need.
  bool exchangeable() const noexcept { return exchangeable_; }
  /// Invariance under permuting parent indices only: ν ↦ (ν_{π(i)})_i.
  bool parent_exchangeable() const noexcept { return parent_exchangeable_; }

 private:
  int ground_size_ = 0;
  std::vector<OffspringAtom> atoms_;
  std::vector<std::int64_t> weights_;
  std::int64_t denominator_ = 1;
  bool exchangeable_ = false;
  bool parent_exchangeable_ = false;
};

/// Each child picks a parent uniformly and independently. N^N atoms; N <= 6.
OffspringLaw wright_fisher_law(int n);
/// Ordered pair (b, d), b ≠ d, uniform: d dies, ν_b = {b, d}, ν_d = ∅, every
/// other ν_i = {i}. N(N-1) atoms for N >= 2; N <= 8.
OffspringLaw moran_law(int n);
/// ν_i = {i} with probability one.
OffspringLaw identity_law(int n);

/// Invariance of the law under one permutation (perm[i] = image of i).
bool invariant_under(const OffspringLaw& law, const std::vector<int>& perm, bool relabel_children);

struct ForwardSetKernel {
  SubsetLattice lattice;
  /// P(J,K) = ℙ(∪_{i∈J} ν_i = K).
  Kernel p;
};

struct BackwardSetKernel {
  SubsetLattice lattice;
  /// Q(J,K) = ℙ(K is the minimal set of parents whose children cover J).
  Kernel q;
};

ForwardSetKernel forward_kernel(const OffspringLaw& law);
BackwardSetKernel backward_kernel(const OffspringLaw& law);

/// {i : ν_i ∩ J ≠ ∅}; asserts that it covers J and that no proper subset does.
SubsetMask minimal_cover(const std::vector<SubsetMask>& children, SubsetMask j);

struct SetDualityCheck {
  /// Q′ = (Z′)⁻¹ P Z′.
  bool conjugation = false;
  /// Q(J,K) = Σ_{L⊆K} (-1)^{|K|-|L|} Σ_{M⊇J} P(L,M).
  bool sylvester = false;
  bool holds() const noexcept { return conjugation && sylvester; }
};

SetDualityCheck verify_transpose_zeta_duality(const ForwardSetKernel& fk, const BackwardSetKernel& bk);

struct CanningsCoarse {
  CoarseDualityResult pipeline;
  /// ℙ(Σ_{l≤i} |ν_l| = j).
  RationalMatrix p_direct;
  /// [C(N,j)/C(N,i)] Σ_{l₁..l_j ≥ 1, Σl = i} E[∏_r C(|ν_r|, l_r)].
  RationalMatrix q_moment;
  RationalMatrix h_hat_closed;          // C(i,j) / C(N,j)
  RationalMatrix h_hat_inverse_closed;  // (-1)^{i-j} C(i,j) C(N,i)

  bool q_is_backward = false;   // pipeline dual equals the backward kernel
  bool p_matches_direct = false;
  bool h_hat_binomial = false;  // ĥ(j) = C(N,j)
  bool h_hat_matches = false;
  bool h_hat_inverse_matches = false;
  bool q_matches_moment = false;
};

/// Runs the class-size pipeline with the cardinality relation and the
/// transpose zeta matrix. Throws NotExchangeable for a non-exchangeable law.
CanningsCoarse coarsen_to_cannings(const OffspringLaw& law, const ForwardSetKernel& fk, const BackwardSetKernel& bk);

/// Sparse kernel with entries that are multiples of 1/denominator.
struct SparseKernel {
  std::int64_t denominator = 1;
  /// rows[a] = (column, numerator), sorted by column, zeros omitted.
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  Rational entry(std::size_t a, std::size_t b) const;
  Rational row_sum(std::size_t a) const;
  RationalMatrix dense() const;
};

/// States are T-tuples of pairwise disjoint subsets, packed with bit t·N + i
/// for i ∈ J_{t+1}. Covering tuples form ℓP; all tuples form ℓS.
struct MultiAllelicKernels {
  int ground_size = 0;
  int types = 0;
  /// ℓS in (popcount, packed) order.
  std::vector<std::uint64_t> states;
  std::unordered_map<std::uint64_t, std::size_t> index;
  /// Indices of the covering tuples.
  std::vector<std::size_t> covering;
  /// P(J⃗,K⃗) = ℙ(∩_t {∪_{i∈J_t} ν_i = K_t}) on all of ℓS; ℓP is closed.
  SparseKernel p;
  /// Q(J⃗,K⃗) = ℙ(K_t = minimal cover of J_t for each t, pairwise disjoint).
  SparseKernel q;
  /// 1 - Σ_K Q(J,K) per state.
  RationalVector defect;

  bool p_stochastic = false;
  bool covering_closed = false;
  bool q_substochastic = false;

  std::size_t size() const noexcept { return states.size(); }
  SubsetMask component(std::size_t state, int t) const;
  std::string label(std::size_t state) const;
  /// (|J_1|, ..., |J_T|).
  std::vector<int> counts(std::size_t state) const;
};

/// Throws SizeOverflow when (T+1)^N exceeds the MultiAllelic cap.
MultiAllelicKernels multiallelic_kernels(const OffspringLaw& law, int types);

struct MultiAllelicDualityCheck {
  /// Z′Q′ = PZ′ on ℓS, i.e. Σ_{M⊆J} Q(K,M) = Σ_{M⊇K} P(J,M).
  bool identity = false;
  /// Q(J,K) = Σ_{L⊆K} (-1)^{|K|-|L|} Σ_{M⊇J} P(L,M).
  bool sylvester = false;
  bool holds() const noexcept { return identity && sylvester; }
};

MultiAllelicDualityCheck verify_multiallelic_duality(const MultiAllelicKernels& ma);

struct MultiAllelicCoarse {
  /// Count vectors e with Σe <= N, in the order of first appearance in ℓS.
  std::vector<std::vector<int>> classes;
  std::vector<std::string> labels;
  RationalVector h_hat;  // N! / (∏ e_t! (N - Σe)!)
  RationalMatrix h_coarse;
  RationalMatrix h_inverse_coarse;
  RationalMatrix p_coarse;
  RationalMatrix q_coarse;
  RationalMatrix h_hat_coarse;
  Kernel q_hat;
  RationalMatrix p_direct;

  bool h_hat_multinomial = false;
  bool h_hat_closed_form = false;  // ∏ C(d_t,e_t) / ĥ(e)
  bool inverse_commutes = false;
  bool coarse_duality = false;
  bool hat_duality = false;
  bool p_matches_direct = false;
  bool p_coarse_stochastic = false;
  bool q_hat_substochastic = false;
  /// Rows with at most one nonempty type keep all their mass.
  bool single_type_rows_stochastic = false;
};

/// Throws NotExchangeable or IncompatibleMatrix.
MultiAllelicCoarse coarsen_multiallelic(const OffspringLaw& law, const MultiAllelicKernels& ma);

struct MonteCarloOptions {
  unsigned steps = 1;
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct ChainEstimate {
  /// Exact sample mean and unbiased sample variance of the observed values.
  Rational mean;
  Rational variance;
  double standard_error = 0.0;
  /// (mean - exact)² <= 16·variance/reps, or mean == exact when the variance
  /// vanishes.
  bool within_four_se = false;
  /// Visits of each coarse state at the final step.
  std::vector<std::size_t> final_counts;
};

struct MonteCarloResult {
  int start = 0;       // |a|
  int dual_start = 0;  // |b|
  unsigned steps = 0;
  std::size_t reps = 0;
  /// (P̃ⁿ H̃_ĥ)(|a|,|b|), cross-checked against (H̃_ĥ (Q̃_ĥ′)ⁿ)(|a|,|b|).
  Rational exact;
  ChainEstimate forward;   // H̃_ĥ(|X_n|, |b|), X₀ = a
  ChainEstimate backward;  // H̃_ĥ(|a|, |Y_n|), Y₀ = b
};

/// Simulates the set chains X_{n+1} = ∪_{i∈X_n} ν_i and Y_{n+1} = minimal
/// cover of Y_n, each replica with its own generator seeded by (seed,
/// replica, stream). Output is independent of the thread count.
MonteCarloResult monte_carlo_duality(const OffspringLaw& law, int start, int dual_start,
                                     const MonteCarloOptions& options);

}  // namespace mdual
