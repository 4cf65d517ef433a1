#include "mdual/duality.hpp"

#include <algorithm>
#include <stdexcept>

#include "mdual/errors.hpp"

namespace mdual {

namespace {

constexpr VariantDescriptor kDescriptors[] = {
    {DualityVariant::Zeta, Margin::Columns, false, false, Direction::Increasing, SupportPattern::Up},
    {DualityVariant::ZetaTranspose, Margin::Columns, true, true, Direction::Decreasing, SupportPattern::Down},
    {DualityVariant::Moebius, Margin::Rows, true, true, Direction::Decreasing, SupportPattern::Up},
    {DualityVariant::MoebiusTranspose, Margin::Rows, false, false, Direction::Increasing, SupportPattern::Down},
};

void require_square(const RationalMatrix& m, std::size_t n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

bool ordered(const Rational& lo, const Rational& hi, Direction d) { return d == Direction::Increasing ? lo <= hi : lo >= hi; }

/// Cumulative margin attached to x: Σ over the cumulative set of columns or rows of P.
RationalVector cumulative_margin(const RationalMatrix& p, const FinitePoset& poset, const VariantDescriptor& d,
                                 std::size_t x) {
  const auto& set = d.cumulative_up ? poset.up_set(x) : poset.down_set(x);
  RationalVector g(p.rows());
  for (std::size_t c = 0; c < p.rows(); ++c) {
    Rational sum = 0;
    for (auto y : set) sum += d.margin == Margin::Columns ? p(c, y) : p(y, c);
    g[c] = sum;
  }
  return g;
}

RationalVector margin_vector(const RationalMatrix& p, Margin margin, std::size_t i) {
  if (margin == Margin::Columns) return p.column(i);
  auto row = p.row(i);
  return RationalVector(row.begin(), row.end());
}

}  // namespace

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::Stochastic: return "stochastic";
    case KernelKind::Substochastic: return "substochastic";
    case KernelKind::General: break;
  }
  return "general";
}

KernelKind classify_kernel(const RationalMatrix& matrix) {
  if (!matrix.square() || !matrix.nonnegative()) return KernelKind::General;
  bool all_one = true;
  for (const auto& s : matrix.row_sums()) {
    if (s > 1) return KernelKind::General;
    if (s != 1) all_one = false;
  }
  return all_one ? KernelKind::Stochastic : KernelKind::Substochastic;
}

std::string_view to_string(DualityVariant v) noexcept {
  switch (v) {
    case DualityVariant::Zeta: return "zeta";
    case DualityVariant::ZetaTranspose: return "zeta-transpose";
    case DualityVariant::Moebius: return "moebius";
    case DualityVariant::MoebiusTranspose: return "moebius-transpose";
  }
  return "zeta";
}

DualityVariant parse_variant(std::string_view name) {
  for (auto v : kAllVariants)
    if (to_string(v) == name) return v;
  throw ParseError("unknown duality variant \"" + std::string(name) +
                   "\" (expected zeta, zeta-transpose, moebius or moebius-transpose)");
}

const VariantDescriptor& describe(DualityVariant v) noexcept { return kDescriptors[static_cast<int>(v)]; }

RationalMatrix duality_matrix(const ZetaPair& zp, DualityVariant v) {
  switch (v) {
    case DualityVariant::Zeta: return zp.zeta;
    case DualityVariant::ZetaTranspose: return zp.zeta.transpose();
    case DualityVariant::Moebius: return zp.moebius;
    case DualityVariant::MoebiusTranspose: return zp.moebius.transpose();
  }
  return zp.zeta;
}

RationalMatrix h_dual(const RationalMatrix& p, const RationalMatrix& h) {
  require_square(p, p.rows(), "P");
  require_square(h, p.rows(), "H");
  const RationalMatrix q_transposed = h.inverse() * p * h;
  if (!(h * q_transposed == p * h)) throw std::logic_error("duality identity H·Q′ = P·H failed after conjugation");
  return q_transposed.transpose();
}

RationalMatrix h_dual(const Kernel& p, const RationalMatrix& h) { return h_dual(p.matrix, h); }

bool duality_holds(const RationalMatrix& p, const RationalMatrix& h, const RationalMatrix& q, unsigned max_power) {
  const RationalMatrix qt = q.transpose();
  RationalMatrix p_pow = RationalMatrix::identity(p.rows());
  RationalMatrix q_pow = RationalMatrix::identity(p.rows());
  for (unsigned n = 0; n <= max_power; ++n) {
    if (!(h * q_pow == p_pow * h)) return false;
    p_pow = p_pow * p;
    q_pow = q_pow * qt;
  }
  return true;
}

RationalVector moebius_image(std::span<const Rational> g, const ZetaPair& zp, bool transposed) {
  const auto& poset = zp.poset;
  if (g.size() != poset.size()) throw DimensionMismatch("function length differs from poset size");
  RationalVector image(g.size());
  for (std::size_t b = 0; b < g.size(); ++b) {
    Rational sum = 0;
    if (transposed) {
      for (auto c : poset.down_set(b)) sum += Rational(zp.mu(c, b)) * g[c];
    } else {
      for (auto c : poset.up_set(b)) sum += Rational(zp.mu(b, c)) * g[c];
    }
    image[b] = sum;
  }
  return image;
}

ConeReport cone_membership(std::span<const Rational> g, const ZetaPair& zp, bool transposed) {
  ConeReport report;
  report.image = moebius_image(g, zp, transposed);
  for (std::size_t i = 0; i < report.image.size(); ++i) {
    if (report.image[i] < 0) {
      report.first_negative = i;
      break;
    }
  }
  report.member = !report.first_negative.has_value();
  if (report.member && std::any_of(g.begin(), g.end(), [](const Rational& x) { return x < 0; }))
    throw std::logic_error("nonnegative Möbius image with a negative function value");
  return report;
}

PositivityReport positivity_certificate(const Kernel& p, const ZetaPair& zp, DualityVariant v) {
  const auto& d = describe(v);
  const std::size_t n = zp.size();
  require_square(p.matrix, n, "P");

  PositivityReport report;
  report.variant = v;
  report.q = h_dual(p, duality_matrix(zp, v));
  report.q_nonnegative = report.q.nonnegative();
  report.condition_i = true;
  report.images_match_q = true;
  report.cumulative.reserve(n);
  for (std::size_t x = 0; x < n; ++x) {
    const auto g = cumulative_margin(p.matrix, zp.poset, d, x);
    auto cone = cone_membership(g, zp, d.transposed_cone);
    if (!cone.member) {
      report.condition_i = false;
      report.witnesses.push_back({x, *cone.first_negative, cone.image[*cone.first_negative]});
    }
    for (std::size_t y = 0; y < n; ++y) {
      const Rational& entry = d.margin == Margin::Columns ? report.q(x, y) : report.q(y, x);
      if (entry != cone.image[y]) report.images_match_q = false;
    }
    report.cumulative.push_back(std::move(cone));
  }
  report.agreement = report.condition_i == report.q_nonnegative;
  return report;
}

std::optional<MonotonicityViolation> monotonicity_violation(const RationalMatrix& q, const FinitePoset& poset,
                                                            Margin margin, Direction direction) {
  const std::size_t n = poset.size();
  for (std::size_t lo = 0; lo < n; ++lo) {
    for (auto hi : poset.up_set(lo)) {
      if (hi == lo) continue;
      for (std::size_t fixed = 0; fixed < n; ++fixed) {
        const bool ok = margin == Margin::Columns ? ordered(q(lo, fixed), q(hi, fixed), direction)
                                                  : ordered(q(fixed, lo), q(fixed, hi), direction);
        if (!ok) return MonotonicityViolation{fixed, lo, hi};
      }
    }
  }
  return std::nullopt;
}

bool is_monotone(std::span<const Rational> g, const FinitePoset& poset, Direction direction) {
  for (std::size_t lo = 0; lo < poset.size(); ++lo)
    for (auto hi : poset.up_set(lo))
      if (!ordered(g[lo], g[hi], direction)) return false;
  return true;
}

StrongConditionReport strong_condition_check(const Kernel& p, const ZetaPair& zp, DualityVariant v) {
  const auto& d = describe(v);
  const std::size_t n = zp.size();
  require_square(p.matrix, n, "P");

  StrongConditionReport report;
  report.variant = v;
  report.q = h_dual(p, duality_matrix(zp, v));
  for (std::size_t i = 0; i < n; ++i)
    if (!cone_membership(margin_vector(p.matrix, d.margin, i), zp, d.transposed_cone).member)
      report.failing_margins.push_back(i);
  report.condition_ii = report.failing_margins.empty();
  if (!report.condition_ii) return report;

  report.violation = monotonicity_violation(report.q, zp.poset, d.margin, d.monotone);
  report.monotone = !report.violation.has_value();

  if (d.margin == Margin::Rows) {
    if (p.stochastic() && is_irreducible(p.matrix))
      report.invariant_in_cone = cone_membership(invariant_distribution(p.matrix), zp, d.transposed_cone).member;
    if (classify_kernel(report.q) == KernelKind::Stochastic && is_irreducible(report.q))
      report.dual_invariant_monotone = is_monotone(invariant_distribution(report.q), zp.poset, d.monotone);
  }
  return report;
}

bool support_implication_check(const RationalMatrix& p, const RationalMatrix& q, const FinitePoset& poset,
                               SupportPattern pattern) {
  const std::size_t n = poset.size();
  require_square(p, n, "P");
  require_square(q, n, "Q");
  auto allowed = [&](std::size_t c, std::size_t d, bool reversed) {
    return reversed ? poset.leq(d, c) : poset.leq(c, d);
  };
  const bool up = pattern == SupportPattern::Up;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < n; ++d)
      if (p(c, d) > 0 && !allowed(c, d, !up)) return true;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < n; ++d)
      if (q(c, d) > 0 && !allowed(c, d, up)) return false;
  return true;
}

HTransformResult h_transform(const RationalMatrix& q, std::span<const Rational> h) {
  require_square(q, h.size(), "Q");
  for (const auto& x : h)
    if (x <= 0) throw NonpositiveH("h-transform requires h > 0 everywhere");
  RationalMatrix out(q.rows(), q.cols());
  for (std::size_t a = 0; a < q.rows(); ++a)
    for (std::size_t b = 0; b < q.cols(); ++b)
      if (q(a, b) != 0) out(a, b) = q(a, b) * h[b] / h[a];

  HTransformResult result;
  const auto sums = out.row_sums();
  result.stochastic = std::all_of(sums.begin(), sums.end(), [](const Rational& s) { return s == 1; });
  const auto qh = q.apply(h);
  result.h_harmonic = std::equal(qh.begin(), qh.end(), h.begin(), h.end());
  if (result.stochastic != result.h_harmonic) throw std::logic_error("h-transform stochasticity disagrees with Qh = h");
  result.kernel = Kernel(std::move(out));
  return result;
}

RepresentingMeasure representing_measure(std::span<const Rational> g, const ZetaPair& zp, bool transposed) {
  RepresentingMeasure m;
  m.weights = moebius_image(g, zp, transposed);
  const auto& poset = zp.poset;
  for (std::size_t x = 0; x < g.size(); ++x) {
    Rational sum = 0;
    for (auto y : transposed ? poset.down_set(x) : poset.up_set(x)) sum += m.weights[y];
    if (sum != g[x]) throw std::logic_error("representing measure does not reconstruct g");
  }
  m.nonnegative = std::all_of(m.weights.begin(), m.weights.end(), [](const Rational& w) { return w >= 0; });
  return m;
}

bool is_irreducible(const RationalMatrix& p) {
  const std::size_t n = p.rows();
  if (n == 0) return false;
  auto reaches_all = [&](bool reverse) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        const bool edge = reverse ? p(b, a) > 0 : p(a, b) > 0;
        if (edge && !seen[b]) {
          seen[b] = 1;
          ++count;
          stack.push_back(b);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

RationalVector invariant_distribution(const RationalMatrix& p) {
  if (classify_kernel(p) != KernelKind::Stochastic) throw Error("invariant distribution needs a stochastic kernel");
  if (!is_irreducible(p)) throw NotIrreducible("kernel is not irreducible");
  const std::size_t n = p.rows();
  // (P′ - I)ρ = 0 with the last equation replaced by Σρ = 1.
  RationalMatrix a = p.transpose() - RationalMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) a(n - 1, c) = 1;
  RationalVector rhs(n, 0);
  rhs[n - 1] = 1;
  auto rho = a.solve(rhs);
  const auto check = p.transpose().apply(rho);
  if (check != rho) throw std::logic_error("invariant distribution failed ρ′P = ρ′");
  return rho;
}

}  // namespace mdual
