#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mdual/poset.hpp"
#include "mdual/rational.hpp"

namespace mdual {

using SubsetMask = std::uint32_t;

/// "{}" for the empty set, otherwise "{1 3}" with 1-based members.
std::string format_subset(std::uint64_t mask);

/// Subsets of {1..N} ordered by inclusion. Index order is (popcount, mask).
class SubsetLattice {
 public:
  int ground_size() const noexcept { return ground_size_; }
  std::size_t size() const noexcept { return masks_.size(); }
  /// The order as a FinitePoset; only materialised when 2^N is within the
  /// ProductPoset cap (default 4096). Throws SizeOverflow otherwise.
  const FinitePoset& poset() const;
  bool has_poset() const noexcept { return poset_.size() == masks_.size(); }

  SubsetMask mask(std::size_t index) const { return masks_[index]; }
  std::size_t index(SubsetMask mask) const { return index_by_mask_[mask]; }
  SubsetMask full_mask() const noexcept { return static_cast<SubsetMask>((std::uint64_t{1} << ground_size_) - 1); }

  /// (-1)^{|K|-|J|} for J ⊆ K. Throws NotComparable otherwise.
  static std::int64_t moebius(SubsetMask j, SubsetMask k);

 private:
  friend SubsetLattice subset_lattice(int, bool);
  int ground_size_ = 0;
  FinitePoset poset_;
  std::vector<SubsetMask> masks_;
  std::vector<std::size_t> index_by_mask_;
};

/// Throws SizeOverflow when 2^N exceeds the SubsetLattice cap (default N <= 20).
/// With `with_poset` false only the index maps are built.
SubsetLattice subset_lattice(int ground_size, bool with_poset = true);

/// T-tuples of subsets of {1..N} with the componentwise order. Tuples are
/// packed by the map (J_t) -> ∪_t J_t × {t}: bit t·N + i holds i ∈ J_t.
class ProductSetLattice {
 public:
  int ground_size() const noexcept { return ground_size_; }
  int copies() const noexcept { return copies_; }
  std::size_t size() const noexcept { return packed_.size(); }
  const FinitePoset& poset() const noexcept { return poset_; }
  /// Image of element `index` under (J_t) -> ∪_t J_t × {t}, as a mask over
  /// the ground set of N·T elements.
  std::uint64_t as_subset_of_product(std::size_t index) const { return packed_[index]; }

  std::uint64_t packed(std::size_t index) const { return packed_[index]; }
  SubsetMask component(std::size_t index, int t) const;
  std::size_t index_of_packed(std::uint64_t packed) const { return index_by_packed_[packed]; }

  /// (-1)^{Σ_t (|K_t| - |J_t|)} for J⃗ ⊆ K⃗. Throws NotComparable otherwise.
  static std::int64_t moebius(std::uint64_t j, std::uint64_t k);

 private:
  friend ProductSetLattice product_set_lattice(int, int);
  int ground_size_ = 0;
  int copies_ = 0;
  FinitePoset poset_;
  std::vector<std::uint64_t> packed_;
  std::vector<std::size_t> index_by_packed_;
};

ProductSetLattice product_set_lattice(int ground_size, int copies);

/// A set partition of {1..n}, stored as its restricted-growth string: block
/// labels assigned in order of first appearance, starting at 0.
class Partition {
 public:
  Partition() = default;
  /// Throws ParseError when `rgs` is not a restricted-growth string.
  static Partition from_rgs(std::vector<std::uint8_t> rgs);
  /// Canonicalises an arbitrary block labelling.
  static Partition from_labels(const std::vector<int>& block_of);
  static Partition from_atoms(int n, const std::vector<std::vector<int>>& atoms);
  static Partition singletons(int n);
  static Partition single_block(int n);
  /// Accepts RGS digits "0,0,1" or atom notation "{1 2}{3}".
  static Partition parse(std::string_view text);

  int ground_size() const noexcept { return static_cast<int>(rgs_.size()); }
  int block_count() const noexcept { return blocks_; }
  const std::vector<std::uint8_t>& rgs() const noexcept { return rgs_; }
  int block_of(int element) const { return rgs_[static_cast<std::size_t>(element)]; }
  /// Atoms as 0-based element lists, in order of first element.
  std::vector<std::vector<int>> atoms() const;
  std::vector<SubsetMask> atom_masks() const;

  /// α ⪯ β: every atom of α lies inside an atom of β.
  bool refines(const Partition& coarser) const;

  std::string to_rgs_string() const;
  std::string to_atom_string() const;

  friend auto operator<=>(const Partition&, const Partition&) = default;

 private:
  std::vector<std::uint8_t> rgs_;
  int blocks_ = 0;
};

/// All partitions of {1..n} under refinement. Index order is
/// ([α] descending, RGS lexicographic); bottom = singletons, top = {I}.
class PartitionLattice {
 public:
  int ground_size() const noexcept { return ground_size_; }
  std::size_t size() const noexcept { return partitions_.size(); }
  const FinitePoset& poset() const noexcept { return poset_; }
  const Partition& partition(std::size_t index) const { return partitions_[index]; }
  const std::vector<Partition>& partitions() const noexcept { return partitions_; }
  std::size_t index_of(const Partition& p) const;
  std::size_t bottom() const noexcept { return 0; }
  std::size_t top() const noexcept { return partitions_.size() - 1; }

 private:
  friend PartitionLattice partition_lattice(int);
  int ground_size_ = 0;
  FinitePoset poset_;
  std::vector<Partition> partitions_;
};

/// Throws SizeOverflow when Bell(n) exceeds the PartitionLattice cap (n <= 8).
PartitionLattice partition_lattice(int n);

/// Restricted-growth strings of length n in lexicographic order.
std::vector<Partition> enumerate_partitions(int n);

std::uint64_t bell_number(int n);

/// μ(α,β) = (-1)^{[α]+[β]} ∏_{B∈β} (ℓ_B^α - 1)!, ℓ_B^α = #atoms of α inside B.
/// Throws NotComparable unless α ⪯ β.
std::int64_t partition_moebius_closed_form(const Partition& alpha, const Partition& beta);

/// Multiset of atom sizes, kept sorted in descending order.
class Skeleton {
 public:
  Skeleton() = default;
  /// Sorts `parts` descending. Throws InvalidSkeleton on a part < 1.
  explicit Skeleton(std::vector<int> parts);
  /// "2+1" format.
  static Skeleton parse(std::string_view text);

  const std::vector<int>& parts() const noexcept { return parts_; }
  int total() const noexcept;
  int part_count() const noexcept { return static_cast<int>(parts_.size()); }
  std::string to_string() const;

  friend bool operator==(const Skeleton&, const Skeleton&) = default;
  /// Canonical order on E_N: more parts first, then lexicographic.
  friend std::strong_ordering operator<=>(const Skeleton& a, const Skeleton& b);

 private:
  std::vector<int> parts_;
};

Skeleton skeleton(const Partition& alpha);

/// E_N: all integer partitions of N in canonical Skeleton order.
std::vector<Skeleton> skeletons_of(int total);

/// Number of set partitions of {1..N} with skeleton η:
/// N! / (∏ e_s! · ∏ (multiplicity of each part size)!).
/// Throws InvalidSkeleton when the parts do not sum to N.
Integer skeleton_count(const Skeleton& eta, int total);

/// η ⪯̃ κ: κ's parts arise from grouping η's parts and summing each group.
bool skeleton_order(const Skeleton& eta, const Skeleton& kappa);

}  // namespace mdual
