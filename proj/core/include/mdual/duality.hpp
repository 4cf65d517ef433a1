#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdual/matrix.hpp"
#include "mdual/poset.hpp"

namespace mdual {

enum class KernelKind { General, Substochastic, Stochastic };

std::string_view to_string(KernelKind kind) noexcept;

/// Stochastic: nonnegative with unit row sums. Substochastic: nonnegative with
/// row sums <= 1. Anything else is General.
KernelKind classify_kernel(const RationalMatrix& matrix);

/// A square matrix together with its exactly verified kind.
struct Kernel {
  RationalMatrix matrix;
  KernelKind kind = KernelKind::General;

  Kernel() = default;
  explicit Kernel(RationalMatrix m) : matrix(std::move(m)), kind(classify_kernel(matrix)) {}

  std::size_t size() const noexcept { return matrix.rows(); }
  bool stochastic() const noexcept { return kind == KernelKind::Stochastic; }
  bool substochastic() const noexcept { return kind != KernelKind::General; }
};

enum class DualityVariant { Zeta, ZetaTranspose, Moebius, MoebiusTranspose };

inline constexpr DualityVariant kAllVariants[] = {DualityVariant::Zeta, DualityVariant::ZetaTranspose,
                                                  DualityVariant::Moebius, DualityVariant::MoebiusTranspose};

/// "zeta", "zeta-transpose", "moebius", "moebius-transpose".
std::string_view to_string(DualityVariant v) noexcept;
/// Throws ParseError on an unknown name.
DualityVariant parse_variant(std::string_view name);

enum class Margin { Columns, Rows };
enum class Direction { Increasing, Decreasing };
/// Support pattern of P that forces a triangular Q.
/// Up:   P(c,d) > 0 ⇒ c ⪯ d  gives  Q(c,d) > 0 ⇒ d ⪯ c.
/// Down: P(c,d) > 0 ⇒ d ⪯ c  gives  Q(c,d) > 0 ⇒ c ⪯ d.
enum class SupportPattern { Up, Down };

/// Everything that distinguishes the four variants. One engine reads these.
struct VariantDescriptor {
  DualityVariant variant;
  /// Which margin of P the cone conditions act on.
  Margin margin;
  /// Cumulative sum over {d : d ⪯ x} (false) or {d : x ⪯ d} (true), where x
  /// is the free index of Q the condition is attached to.
  bool cumulative_up;
  /// F′₊ (image (Z⁻¹)′g) when true, F₊ (image Z⁻¹g) when false.
  bool transposed_cone;
  /// Monotonicity of Q in the free index under the strong condition.
  Direction monotone;
  SupportPattern support;
};

const VariantDescriptor& describe(DualityVariant v) noexcept;

/// H ∈ {Z, Z′, Z⁻¹, (Z⁻¹)′}.
RationalMatrix duality_matrix(const ZetaPair& zp, DualityVariant v);

/// Q with Q′ = H⁻¹PH. Re-verifies H·Q′ = P·H. Throws SingularMatrix when H is
/// singular and DimensionMismatch on shape errors.
RationalMatrix h_dual(const RationalMatrix& p, const RationalMatrix& h);
RationalMatrix h_dual(const Kernel& p, const RationalMatrix& h);

/// H·(Q′)ⁿ = Pⁿ·H for n = 0..max_power.
bool duality_holds(const RationalMatrix& p, const RationalMatrix& h, const RationalMatrix& q, unsigned max_power = 1);

struct ConeReport {
  bool member = false;
  /// Z⁻¹g, or (Z⁻¹)′g for the transposed cone.
  RationalVector image;
  std::optional<std::size_t> first_negative;
};

/// Membership in F₊ = {g ≥ 0 : Z⁻¹g ≥ 0} or F′₊. Nonnegativity of the image
/// alone forces g ≥ 0; that implication is asserted on every call.
ConeReport cone_membership(std::span<const Rational> g, const ZetaPair& zp, bool transposed);

/// Z⁻¹g or (Z⁻¹)′g evaluated through μ on the up or down sets.
RationalVector moebius_image(std::span<const Rational> g, const ZetaPair& zp, bool transposed);

struct ConeWitness {
  /// Index of Q the failing cumulative margin belongs to.
  std::size_t index;
  /// Element where the image is negative.
  std::size_t element;
  Rational value;
};

struct PositivityReport {
  DualityVariant variant{};
  /// cumulative[x]: cone test of the cumulative margin attached to x.
  std::vector<ConeReport> cumulative;
  bool condition_i = false;
  bool q_nonnegative = false;
  /// condition_i == q_nonnegative.
  bool agreement = false;
  /// The cone images reproduce the rows (column margins) or columns (row
  /// margins) of Q entry by entry.
  bool images_match_q = false;
  RationalMatrix q;
  std::vector<ConeWitness> witnesses;
};

/// Condition (i): Q ≥ 0 iff every cumulative margin lies in the cone.
PositivityReport positivity_certificate(const Kernel& p, const ZetaPair& zp, DualityVariant v);

struct MonotonicityViolation {
  /// The index held fixed.
  std::size_t fixed;
  /// lower ⪯ upper with the wrong inequality between the two entries.
  std::size_t lower;
  std::size_t upper;
};

/// Checks Q(x₁,·) vs Q(x₂,·) (Margin::Columns, free index is the row) or
/// Q(·,x₁) vs Q(·,x₂) (Margin::Rows, free index is the column) over all
/// comparable x₁ ⪯ x₂.
std::optional<MonotonicityViolation> monotonicity_violation(const RationalMatrix& q, const FinitePoset& poset,
                                                            Margin margin, Direction direction);

/// g(x₁) vs g(x₂) over all comparable pairs.
bool is_monotone(std::span<const Rational> g, const FinitePoset& poset, Direction direction);

struct StrongConditionReport {
  DualityVariant variant{};
  /// Every column (Zeta, ZetaTranspose) or row (Moebius, MoebiusTranspose) of
  /// P lies in the variant's cone.
  bool condition_ii = false;
  std::vector<std::size_t> failing_margins;
  /// Only evaluated when condition_ii holds.
  std::optional<bool> monotone;
  std::optional<MonotonicityViolation> violation;
  /// Row-margin variants only, when P is stochastic and irreducible: the
  /// invariant distribution of P lies in the cone.
  std::optional<bool> invariant_in_cone;
  /// Row-margin variants only, when Q is stochastic and irreducible: its
  /// invariant distribution has the monotonicity of Q in the column index.
  std::optional<bool> dual_invariant_monotone;
  RationalMatrix q;
};

StrongConditionReport strong_condition_check(const Kernel& p, const ZetaPair& zp, DualityVariant v);

/// True when P's support fails the pattern's hypothesis; otherwise whether Q's
/// support obeys the conclusion.
bool support_implication_check(const RationalMatrix& p, const RationalMatrix& q, const FinitePoset& poset,
                               SupportPattern pattern);

struct HTransformResult {
  Kernel kernel;
  /// Q_h 1 = 1, and independently Qh = h. These always agree.
  bool stochastic = false;
  bool h_harmonic = false;
};

/// D_h⁻¹ Q D_h. Throws NonpositiveH unless every h entry is > 0.
HTransformResult h_transform(const RationalMatrix& q, std::span<const Rational> h);

struct RepresentingMeasure {
  /// weights = Z⁻¹g (or (Z⁻¹)′g in the transposed form), possibly signed.
  RationalVector weights;
  bool nonnegative = false;
};

/// g(x) = Σ_{y ⪰ x} weights(y) (or Σ_{y ⪯ x} when transposed); the
/// reconstruction is verified before returning.
RepresentingMeasure representing_measure(std::span<const Rational> g, const ZetaPair& zp, bool transposed = false);

/// Every state reaches every other along positive entries.
bool is_irreducible(const RationalMatrix& p);

/// ρ′P = ρ′ with Σρ = 1, exactly. Throws NotIrreducible, or Error when P is
/// not stochastic.
RationalVector invariant_distribution(const RationalMatrix& p);

}  // namespace mdual
