#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mdual/matrix.hpp"

namespace mdual {

struct PosetOptions {
  /// Order axioms are checked exhaustively up to this many elements.
  std::size_t verify_limit = 512;
  /// Opt-out for posets above verify_limit is implicit; this forces a check
  /// regardless of size.
  bool force_verify = false;
};

/// A finite partially ordered set. Elements are stored in a canonical linear
/// extension of the order, so a ⪯ b implies index(a) <= index(b) and the zeta
/// matrix is upper unitriangular.
class FinitePoset {
 public:
  FinitePoset() = default;

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  /// Position of element `i` in the sequence originally passed to build_poset.
  std::size_t input_position(std::size_t i) const { return input_pos_[i]; }
  /// Index of the element that was at `input_position` in the original input.
  std::size_t from_input_position(std::size_t position) const { return from_input_[position]; }

  bool leq(std::size_t a, std::size_t b) const { return order_[a * size() + b] != 0; }
  bool less(std::size_t a, std::size_t b) const { return a != b && leq(a, b); }

  /// {b : a ⪯ b} and {b : b ⪯ a}, both in ascending index order.
  const std::vector<std::size_t>& up_set(std::size_t a) const { return up_[a]; }
  const std::vector<std::size_t>& down_set(std::size_t a) const { return down_[a]; }

  /// Length of the longest chain ending at `a`.
  std::size_t height(std::size_t a) const { return height_[a]; }

 private:
  friend FinitePoset build_poset(std::vector<std::string>, const std::function<bool(std::size_t, std::size_t)>&,
                                 PosetOptions);

  std::vector<std::string> labels_;
  std::vector<std::uint8_t> order_;
  std::vector<std::vector<std::size_t>> up_, down_;
  std::vector<std::size_t> height_;
  std::vector<std::size_t> input_pos_, from_input_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Builds a poset from distinct labels and an order predicate on input
/// positions. The canonical index order sorts by (height, input position).
/// Throws PartialOrderViolation with a witness triple on reflexivity,
/// antisymmetry or transitivity failures.
FinitePoset build_poset(std::vector<std::string> labels,
                        const std::function<bool(std::size_t, std::size_t)>& leq,
                        PosetOptions options = {});

FinitePoset chain_poset(std::size_t length);
FinitePoset antichain_poset(std::size_t size);

RationalMatrix zeta_matrix(const FinitePoset& poset);

/// Möbius function by the recursion μ(a,a)=1, μ(a,b) = -Σ_{a⪯c≺b} μ(a,c).
/// Entry (a,b) is zero unless a ⪯ b.
IntegerMatrix moebius_function(const FinitePoset& poset);

struct ZetaPair {
  FinitePoset poset;
  RationalMatrix zeta;
  RationalMatrix moebius;
  IntegerMatrix mu;

  std::size_t size() const noexcept { return poset.size(); }
};

/// Zeta matrix, its inverse and μ. Verifies Z·Z⁻¹ = Z⁻¹·Z = I exactly.
ZetaPair moebius_matrix(const FinitePoset& poset);

struct ProductPoset {
  FinitePoset poset;
  /// components[i] = (index in first factor, index in second factor).
  std::vector<std::pair<std::size_t, std::size_t>> components;
  std::size_t second_size = 0;
  /// lookup[i1 * second_size + i2] = product index of (i1, i2).
  std::vector<std::size_t> lookup;

  std::size_t index_of(std::size_t first, std::size_t second) const { return lookup[first * second_size + second]; }
};

/// Cartesian product with the componentwise order. Throws SizeOverflow when
/// |I1|·|I2| exceeds the ProductPoset cap.
ProductPoset product_poset(const FinitePoset& first, const FinitePoset& second);

/// Z' and (Z')⁻¹ = (Z⁻¹)'; the inverse relation is re-verified.
std::pair<RationalMatrix, RationalMatrix> transpose_pair(const ZetaPair& zp);

}  // namespace mdual
