#include "mdual/coarse_graining.hpp"

#include <bit>
#include <map>
#include <random>
#include <stdexcept>

#include "mdual/errors.hpp"
#include "mdual/limits.hpp"

namespace mdual {

EquivalenceRelation::EquivalenceRelation(std::vector<std::size_t> class_of, std::vector<std::string> labels)
    : class_of_(std::move(class_of)), labels_(std::move(labels)), members_(labels_.size()) {
  for (std::size_t i = 0; i < class_of_.size(); ++i) {
    if (class_of_[i] >= labels_.size()) throw DimensionMismatch("class index out of range");
    members_[class_of_[i]].push_back(i);
  }
  for (std::size_t k = 0; k < members_.size(); ++k)
    if (members_[k].empty()) throw Error("equivalence class \"" + labels_[k] + "\" is empty");
}

EquivalenceRelation EquivalenceRelation::trivial(std::size_t n) {
  std::vector<std::size_t> cls(n);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    cls[i] = i;
    labels[i] = std::to_string(i);
  }
  return {std::move(cls), std::move(labels)};
}

EquivalenceRelation EquivalenceRelation::single_class(std::size_t n) {
  return {std::vector<std::size_t>(n, 0), std::vector<std::string>{"*"}};
}

RationalVector EquivalenceRelation::class_sizes() const {
  RationalVector out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.emplace_back(static_cast<unsigned long>(m.size()));
  return out;
}

EquivalenceRelation cardinality_relation(const SubsetLattice& lattice) {
  std::vector<std::size_t> cls(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) cls[i] = static_cast<std::size_t>(std::popcount(lattice.mask(i)));
  std::vector<std::string> labels;
  for (int j = 0; j <= lattice.ground_size(); ++j) labels.push_back(std::to_string(j));
  return {std::move(cls), std::move(labels)};
}

EquivalenceRelation skeleton_relation(const PartitionLattice& lattice) {
  const auto skeletons = skeletons_of(lattice.ground_size());
  std::map<Skeleton, std::size_t> position;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < skeletons.size(); ++k) {
    position.emplace(skeletons[k], k);
    labels.push_back(skeletons[k].to_string());
  }
  std::vector<std::size_t> cls(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) cls[i] = position.at(skeleton(lattice.partition(i)));
  return {std::move(cls), std::move(labels)};
}

EquivalenceRelation product_relation(const EquivalenceRelation& first, const EquivalenceRelation& second,
                                     const ProductPoset& product) {
  const std::size_t c2 = second.class_count();
  std::vector<std::size_t> cls(product.poset.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const auto [i1, i2] = product.components[i];
    cls[i] = first.class_of(i1) * c2 + second.class_of(i2);
  }
  std::vector<std::string> labels;
  for (std::size_t k1 = 0; k1 < first.class_count(); ++k1)
    for (std::size_t k2 = 0; k2 < c2; ++k2) labels.push_back("(" + first.label(k1) + "," + second.label(k2) + ")");
  return {std::move(cls), std::move(labels)};
}

CoarseResult check_compatibility(const RationalMatrix& h, const EquivalenceRelation& rel) {
  if (h.rows() != rel.size() || h.cols() != rel.size()) throw DimensionMismatch("matrix and relation sizes differ");
  const std::size_t k = rel.class_count();
  CoarseResult result;
  RationalMatrix coarse(k, k);
  RationalVector sums(k);
  for (std::size_t a_cls = 0; a_cls < k; ++a_cls) {
    const auto& members = rel.members(a_cls);
    for (std::size_t m = 0; m < members.size(); ++m) {
      std::fill(sums.begin(), sums.end(), Rational(0));
      for (std::size_t c = 0; c < rel.size(); ++c)
        if (h(members[m], c) != 0) sums[rel.class_of(c)] += h(members[m], c);
      for (std::size_t b_cls = 0; b_cls < k; ++b_cls) {
        if (m == 0) {
          coarse(a_cls, b_cls) = sums[b_cls];
        } else if (coarse(a_cls, b_cls) != sums[b_cls]) {
          result.witness = CompatibilityWitness{members[0], members[m], b_cls};
          return result;
        }
      }
    }
  }
  result.compatible = true;
  result.coarse = std::move(coarse);
  return result;
}

CoarseResult check_compatibility(std::size_t n, const IntegerEntry& entry, const EquivalenceRelation& rel) {
  if (n != rel.size()) throw DimensionMismatch("matrix and relation sizes differ");
  const std::size_t k = rel.class_count();
  CoarseResult result;
  std::vector<std::int64_t> reference(k), sums(k);
  RationalMatrix coarse(k, k);
  for (std::size_t a_cls = 0; a_cls < k; ++a_cls) {
    const auto& members = rel.members(a_cls);
    for (std::size_t m = 0; m < members.size(); ++m) {
      std::fill(sums.begin(), sums.end(), 0);
      for (std::size_t c = 0; c < n; ++c) sums[rel.class_of(c)] += entry(members[m], c);
      if (m == 0) {
        reference = sums;
        continue;
      }
      for (std::size_t b_cls = 0; b_cls < k; ++b_cls) {
        if (sums[b_cls] != reference[b_cls]) {
          result.witness = CompatibilityWitness{members[0], members[m], b_cls};
          return result;
        }
      }
    }
    for (std::size_t b_cls = 0; b_cls < k; ++b_cls) coarse(a_cls, b_cls) = Rational(static_cast<long>(reference[b_cls]));
  }
  result.compatible = true;
  result.coarse = std::move(coarse);
  return result;
}

CoarseResult coarse_columns(const RationalMatrix& q, const EquivalenceRelation& rel) {
  // Source-class column sums of Q are the row-convention coarse-graining of Q′.
  auto r = check_compatibility(q.transpose(), rel);
  if (r.coarse) r.coarse = r.coarse->transpose();
  return r;
}

CoarseSetMatrices coarse_set_matrices(int n) {
  if (n < 0 || n > 20) throw SizeOverflow("coarse set matrices N", static_cast<std::size_t>(std::max(n, 0)), 20);
  const std::size_t k = static_cast<std::size_t>(n) + 1;
  CoarseSetMatrices m{RationalMatrix(k, k), RationalMatrix(k, k), RationalMatrix(k, k), RationalMatrix(k, k)};
  for (long j = 0; j <= n; ++j) {
    for (long l = 0; l <= n; ++l) {
      const auto uj = static_cast<std::size_t>(j);
      const auto ul = static_cast<std::size_t>(l);
      if (j <= l) {
        const Integer c = binomial(n - j, l - j);
        m.zeta(uj, ul) = Rational(c);
        m.moebius(uj, ul) = Rational((l - j) % 2 == 0 ? c : Integer(-c));
      }
      if (l <= j) {
        const Integer c = binomial(j, l);
        m.zeta_transpose(uj, ul) = Rational(c);
        m.moebius_transpose(uj, ul) = Rational((j - l) % 2 == 0 ? c : Integer(-c));
      }
    }
  }
  return m;
}

CoarseSetMatrices coarse_set_matrices_by_enumeration(int n) {
  const auto lattice = subset_lattice(n, false);
  const auto rel = cardinality_relation(lattice);
  auto run = [&](const char* name, const IntegerEntry& entry) {
    auto r = check_compatibility(lattice.size(), entry, rel);
    if (!r.compatible) throw IncompatibleMatrix(name, r.witness->first, r.witness->second, r.witness->target_class);
    return std::move(*r.coarse);
  };
  auto subset = [&](std::size_t a, std::size_t b) { return (lattice.mask(a) & ~lattice.mask(b)) == 0; };
  auto sign = [&](std::size_t a, std::size_t b) -> std::int64_t {
    return (std::popcount(lattice.mask(a) ^ lattice.mask(b)) % 2 == 0) ? 1 : -1;
  };
  CoarseSetMatrices m;
  m.zeta = run("Z", [&](std::size_t a, std::size_t b) -> std::int64_t { return subset(a, b) ? 1 : 0; });
  m.moebius = run("Z^-1", [&](std::size_t a, std::size_t b) { return subset(a, b) ? sign(a, b) : 0; });
  m.zeta_transpose = run("Z'", [&](std::size_t a, std::size_t b) -> std::int64_t { return subset(b, a) ? 1 : 0; });
  m.moebius_transpose = run("(Z')^-1", [&](std::size_t a, std::size_t b) { return subset(b, a) ? sign(a, b) : 0; });
  return m;
}

CoarsePartitionMatrices coarse_partition_matrices(int n, std::uint64_t seed) {
  if (n < 1) throw SizeOverflow("partition skeleton matrices n", 0, 1);
  if (n > 20) throw SizeOverflow("partition skeleton matrices n", static_cast<std::size_t>(n), 20);
  enforce_cap(StateCap::PartitionLattice, bell_number(n), "partition lattice");
  const auto parts = enumerate_partitions(n);

  CoarsePartitionMatrices out;
  out.skeletons = skeletons_of(n);
  std::map<Skeleton, std::size_t> position;
  for (std::size_t k = 0; k < out.skeletons.size(); ++k) position.emplace(out.skeletons[k], k);
  std::vector<std::size_t> class_of(parts.size());
  std::vector<std::vector<std::size_t>> members(out.skeletons.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    class_of[i] = position.at(skeleton(parts[i]));
    members[class_of[i]].push_back(i);
  }

  const std::size_t k = out.skeletons.size();
  auto rows_from = [&](std::size_t alpha_index, RationalVector& zeta_row, RationalVector& moebius_row) {
    std::fill(zeta_row.begin(), zeta_row.end(), Rational(0));
    std::fill(moebius_row.begin(), moebius_row.end(), Rational(0));
    const auto& alpha = parts[alpha_index];
    for (std::size_t g = 0; g < parts.size(); ++g) {
      if (!alpha.refines(parts[g])) continue;
      zeta_row[class_of[g]] += 1;
      moebius_row[class_of[g]] += partition_moebius_closed_form(alpha, parts[g]);
    }
  };

  out.zeta = RationalMatrix(k, k);
  out.moebius = RationalMatrix(k, k);
  std::mt19937_64 rng(seed);
  RationalVector z1(k), m1(k), z2(k), m2(k);
  for (std::size_t eta = 0; eta < k; ++eta) {
    rows_from(members[eta].front(), z1, m1);
    std::uniform_int_distribution<std::size_t> pick(0, members[eta].size() - 1);
    rows_from(members[eta][pick(rng)], z2, m2);
    if (z1 != z2 || m1 != m2)
      throw std::logic_error("skeleton coarse-graining depends on the representative of " + out.skeletons[eta].to_string());
    for (std::size_t kappa = 0; kappa < k; ++kappa) {
      out.zeta(eta, kappa) = z1[kappa];
      out.moebius(eta, kappa) = m1[kappa];
    }
  }
  return out;
}

namespace {

RationalMatrix require_compatible(const RationalMatrix& m, const EquivalenceRelation& rel, const char* name) {
  auto r = check_compatibility(m, rel);
  if (!r.compatible) throw IncompatibleMatrix(name, r.witness->first, r.witness->second, r.witness->target_class);
  return std::move(*r.coarse);
}

bool implies(bool a, bool b) { return !a || b; }

}  // namespace

CoarseDualityResult coarse_duality_pipeline(const Kernel& p, const RationalMatrix& h, const EquivalenceRelation& rel) {
  CoarseDualityResult r;
  r.h = h;
  r.h_coarse = require_compatible(h, rel, "H");
  r.h_inverse_coarse = require_compatible(h.inverse(), rel, "H^-1");
  r.p_coarse = require_compatible(p.matrix, rel, "P");
  r.q = h_dual(p, h);

  auto qc = coarse_columns(r.q, rel);
  if (!qc.compatible) throw IncompatibleMatrix("Q", qc.witness->first, qc.witness->second, qc.witness->target_class);
  r.q_coarse = std::move(*qc.coarse);

  const auto h_coarse_inverse = r.h_coarse.try_inverse();
  r.inverse_commutes = h_coarse_inverse && *h_coarse_inverse == r.h_inverse_coarse;
  r.coarse_duality = h_coarse_inverse && (*h_coarse_inverse * r.p_coarse * r.h_coarse) == r.q_coarse.transpose();

  r.h_hat = rel.class_sizes();
  r.h_hat_coarse = r.h_coarse;
  for (std::size_t a = 0; a < r.h_hat_coarse.rows(); ++a)
    for (std::size_t b = 0; b < r.h_hat_coarse.cols(); ++b) r.h_hat_coarse(a, b) /= r.h_hat[b];
  r.q_hat = h_transform(r.q_coarse, r.h_hat).kernel;
  const auto hat_inverse = r.h_hat_coarse.try_inverse();
  r.hat_duality = hat_inverse && (*hat_inverse * r.p_coarse * r.h_hat_coarse) == r.q_hat.matrix.transpose();

  r.p_kind = p.kind;
  r.q_kind = classify_kernel(r.q);
  r.p_coarse_kind = classify_kernel(r.p_coarse);
  r.q_hat_kind = r.q_hat.kind;
  r.kinds_preserved = implies(r.p_kind == KernelKind::Stochastic, r.p_coarse_kind == KernelKind::Stochastic) &&
                      implies(r.q_kind == KernelKind::Stochastic, r.q_hat_kind == KernelKind::Stochastic) &&
                      implies(r.q_kind != KernelKind::General, r.q_hat_kind != KernelKind::General);
  return r;
}

CoarseDualityResult coarse_duality_pipeline(const Kernel& p, const ZetaPair& zp, DualityVariant v, const EquivalenceRelation& rel) {
  return coarse_duality_pipeline(p, duality_matrix(zp, v), rel);
}

}  // namespace mdual
