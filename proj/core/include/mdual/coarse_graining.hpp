#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdual/duality.hpp"
#include "mdual/lattices.hpp"
#include "mdual/matrix.hpp"
#include "mdual/poset.hpp"

namespace mdual {

/// A partition of the element indices 0..n-1 into labelled classes.
class EquivalenceRelation {
 public:
  EquivalenceRelation() = default;
  /// class_of[i] in 0..labels.size()-1; every class must be nonempty.
  EquivalenceRelation(std::vector<std::size_t> class_of, std::vector<std::string> labels);

  static EquivalenceRelation trivial(std::size_t n);
  static EquivalenceRelation single_class(std::size_t n);

  std::size_t size() const noexcept { return class_of_.size(); }
  std::size_t class_count() const noexcept { return labels_.size(); }
  std::size_t class_of(std::size_t element) const { return class_of_[element]; }
  const std::string& label(std::size_t cls) const { return labels_[cls]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& members(std::size_t cls) const { return members_[cls]; }
  std::size_t class_size(std::size_t cls) const { return members_[cls].size(); }
  /// ĥ(ã) = |ã|.
  RationalVector class_sizes() const;

 private:
  std::vector<std::size_t> class_of_;
  std::vector<std::string> labels_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Classes {J : |J| = j}, labelled "0".."N".
EquivalenceRelation cardinality_relation(const SubsetLattice& lattice);
/// Classes by skeleton, in canonical Skeleton order, labelled "2+1".
EquivalenceRelation skeleton_relation(const PartitionLattice& lattice);
/// (a₁,a₂) ∼ (b₁,b₂) iff a₁ ∼₁ b₁ and a₂ ∼₂ b₂. Class (k₁,k₂) has index
/// k₁·|classes₂| + k₂.
EquivalenceRelation product_relation(const EquivalenceRelation& first, const EquivalenceRelation& second,
                                     const ProductPoset& product);

struct CompatibilityWitness {
  std::size_t first;
  std::size_t second;
  std::size_t target_class;
};

struct CoarseResult {
  bool compatible = false;
  std::optional<RationalMatrix> coarse;
  std::optional<CompatibilityWitness> witness;
};

/// Row convention: H̃(ã,b̃) = Σ_{c∈b̃} H(a,c), required to be the same for
/// every representative a of ã. Checked over all representatives.
CoarseResult check_compatibility(const RationalMatrix& h, const EquivalenceRelation& rel);

/// Same test for a matrix given by an integer entry function, for state
/// spaces too large to hold densely.
using IntegerEntry = std::function<std::int64_t(std::size_t, std::size_t)>;
CoarseResult check_compatibility(std::size_t n, const IntegerEntry& entry, const EquivalenceRelation& rel);

/// Column convention for the dual kernel: Q̃(ã,b̃) = Σ_{c∈ã} Q(c,b), required
/// to be the same for every representative b of b̃.
CoarseResult coarse_columns(const RationalMatrix& q, const EquivalenceRelation& rel);

struct CoarseSetMatrices {
  RationalMatrix zeta;                // C(N-j, k-j)
  RationalMatrix moebius;             // C(N-j, k-j) (-1)^{k-j}
  RationalMatrix zeta_transpose;      // C(j, k)
  RationalMatrix moebius_transpose;   // C(j, k) (-1)^{j-k}
};

/// Closed binomial forms on {0..N}. Throws SizeOverflow for N > 20.
CoarseSetMatrices coarse_set_matrices(int n);

/// The same four matrices obtained by coarse-graining the full subset lattice
/// under cardinality, entry by entry. Throws IncompatibleMatrix on failure.
CoarseSetMatrices coarse_set_matrices_by_enumeration(int n);

struct CoarsePartitionMatrices {
  std::vector<Skeleton> skeletons;
  /// Z̃(η,κ) = #{γ : <γ> = κ, α ⪯ γ} for a representative α with <α> = η.
  RationalMatrix zeta;
  /// Σ_{γ : <γ> = κ, α ⪯ γ} μ(α,γ).
  RationalMatrix moebius;
};

/// Computed from the first partition of each skeleton in RGS order and
/// re-derived from a second representative drawn with `seed`; a mismatch is a
/// logic_error. Throws SizeOverflow when Bell(n) exceeds the cap.
CoarsePartitionMatrices coarse_partition_matrices(int n, std::uint64_t seed = 0x5eed);

struct CoarseDualityResult {
  RationalMatrix h;
  RationalMatrix q;
  /// H̃ and the coarse-graining of H⁻¹.
  RationalMatrix h_coarse;
  RationalMatrix h_inverse_coarse;
  RationalMatrix p_coarse;
  /// Source-class column sums of Q.
  RationalMatrix q_coarse;
  /// ĥ(ã) = |ã|.
  RationalVector h_hat;
  /// H̃ D_ĥ⁻¹ and D_ĥ⁻¹ Q̃ D_ĥ.
  RationalMatrix h_hat_coarse;
  Kernel q_hat;

  /// (H̃)⁻¹ = (H⁻¹)~.
  bool inverse_commutes = false;
  /// Q̃′ = H̃⁻¹ P̃ H̃.
  bool coarse_duality = false;
  /// Q̃_ĥ′ = H̃_ĥ⁻¹ P̃ H̃_ĥ.
  bool hat_duality = false;
  KernelKind p_kind{};
  KernelKind q_kind{};
  KernelKind p_coarse_kind{};
  KernelKind q_hat_kind{};
  /// P stochastic ⇒ P̃ stochastic; Q stochastic ⇒ Q̃_ĥ stochastic; Q
  /// substochastic ⇒ Q̃_ĥ substochastic.
  bool kinds_preserved = false;
};

/// Throws IncompatibleMatrix naming "H", "H^-1" or "P" when a hypothesis
/// fails, and "Q" if the derived column compatibility of Q fails.
CoarseDualityResult coarse_duality_pipeline(const Kernel& p, const RationalMatrix& h, const EquivalenceRelation& rel);
CoarseDualityResult coarse_duality_pipeline(const Kernel& p, const ZetaPair& zp, DualityVariant v, const EquivalenceRelation& rel);

}  // namespace mdual
