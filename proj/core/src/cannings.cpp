#include "mdual/cannings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "mdual/errors.hpp"
#include "mdual/limits.hpp"

namespace mdual {

namespace {

__extension__ typedef unsigned __int128 Wide;

using AtomKey = std::vector<SubsetMask>;

SubsetMask full_mask(int n) { return static_cast<SubsetMask>((std::uint64_t{1} << n) - 1); }

/// parent[c] = the unique i with c ∈ ν_i.
std::vector<int> parents_of(const std::vector<SubsetMask>& children) {
  std::vector<int> parent(children.size(), -1);
  for (std::size_t i = 0; i < children.size(); ++i)
    for (SubsetMask m = children[i]; m != 0; m &= m - 1) parent[static_cast<std::size_t>(std::countr_zero(m))] = static_cast<int>(i);
  return parent;
}

AtomKey transform(const AtomKey& nu, const std::vector<int>& perm, bool relabel_children) {
  AtomKey out(nu.size(), 0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    SubsetMask image = nu[i];
    if (relabel_children) {
      image = 0;
      for (SubsetMask m = nu[i]; m != 0; m &= m - 1) image |= SubsetMask{1} << perm[static_cast<std::size_t>(std::countr_zero(m))];
    }
    out[static_cast<std::size_t>(perm[i])] = image;
  }
  return out;
}

Rational ratio(std::int64_t num, std::int64_t den) {
  Rational r(static_cast<long>(num), static_cast<unsigned long>(den));
  r.canonicalize();
  return r;
}

std::int64_t checked_pow(std::int64_t base, int exp, std::size_t limit, const char* what) {
  std::int64_t v = 1;
  for (int k = 0; k < exp; ++k) {
    v *= base;
    // Stops at the first partial product past the cap, so the reported count is a lower bound.
    if (static_cast<std::size_t>(v) > limit)
      throw SizeOverflow(std::string(what) + (k + 1 < exp ? " (at least)" : ""), static_cast<std::size_t>(v), limit);
  }
  return v;
}

/// P̃(i,j) = ℙ(Σ_{l<i} |ν_l| = j) and the moment formula for Q̃_ĥ.
struct CoarseDirect {
  RationalMatrix p;
  RationalMatrix q;
};

CoarseDirect coarse_direct(const OffspringLaw& law) {
  const int n = law.ground_size();
  const auto k = static_cast<std::size_t>(n) + 1;
  const auto& atoms = law.atoms();
  std::vector<std::vector<int>> sizes(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (auto m : atoms[a].children) sizes[a].push_back(std::popcount(m));

  CoarseDirect out{RationalMatrix(k, k), RationalMatrix(k, k)};
  std::vector<std::int64_t> acc(k);
  for (int i = 0; i <= n; ++i) {
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      int total = 0;
      for (int l = 0; l < i; ++l) total += sizes[a][static_cast<std::size_t>(l)];
      acc[static_cast<std::size_t>(total)] += law.weight(a);
    }
    for (std::size_t j = 0; j < k; ++j) out.p(static_cast<std::size_t>(i), j) = ratio(acc[j], law.denominator());
  }

  // Compositions (l_1..l_j) of i with every l_r >= 1.
  std::vector<std::vector<std::int64_t>> choose(static_cast<std::size_t>(n) + 1);
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= a; ++b) choose[static_cast<std::size_t>(a)].push_back(binomial(a, b).get_si());
  auto c = [&](int a, int b) -> std::int64_t {
    return b > a ? 0 : choose[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  };
  std::vector<int> parts;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      Wide sum = 0;
      auto rec = [&](auto&& self, int remaining, int slots) -> void {
        if (slots == 0) {
          if (remaining != 0) return;
          for (std::size_t a = 0; a < atoms.size(); ++a) {
            Wide prod = static_cast<Wide>(law.weight(a));
            for (std::size_t r = 0; r < parts.size() && prod != 0; ++r) prod *= static_cast<Wide>(c(sizes[a][r], parts[r]));
            sum += prod;
          }
          return;
        }
        for (int l = 1; l <= remaining - (slots - 1); ++l) {
          parts.push_back(l);
          self(self, remaining - l, slots - 1);
          parts.pop_back();
        }
      };
      rec(rec, i, j);
      Integer num = static_cast<unsigned long>(sum >> 64);
      num <<= 64;
      num += static_cast<unsigned long>(sum & ~std::uint64_t{0});
      Rational moment(num, Integer(law.denominator()));
      moment.canonicalize();
      out.q(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          moment * Rational(binomial(n, j)) / Rational(binomial(n, i));
    }
  }
  return out;
}

RationalMatrix hypergeometric(int n) {
  const auto k = static_cast<std::size_t>(n) + 1;
  RationalMatrix h(k, k);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j)
      h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = Rational(binomial(i, j), binomial(n, j));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) h(a, b).canonicalize();
  return h;
}

RationalMatrix hypergeometric_inverse(int n) {
  const auto k = static_cast<std::size_t>(n) + 1;
  RationalMatrix h(k, k);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) {
      Integer v = binomial(i, j) * binomial(n, i);
      if ((i - j) % 2) v = -v;
      h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = Rational(v);
    }
  return h;
}

}  // namespace

// ------------------------------------------------------------------ laws

OffspringLaw OffspringLaw::from_atoms(int ground_size, std::vector<OffspringAtom> atoms) {
  if (ground_size < 1 || ground_size > 30) throw Error("offspring law needs 1 <= N <= 30");
  enforce_cap(StateCap::OffspringAtoms, atoms.size(), "offspring law support");
  const SubsetMask all = full_mask(ground_size);
  std::map<AtomKey, Rational> merged;
  for (auto& atom : atoms) {
    if (atom.children.size() != static_cast<std::size_t>(ground_size)) throw Error("offspring atom has the wrong length");
    SubsetMask seen = 0;
    for (auto m : atom.children) {
      if ((m & ~all) != 0) throw Error("offspring atom names a child outside {1..N}");
      if ((seen & m) != 0) throw Error("offspring sets are not disjoint");
      seen |= m;
    }
    if (seen != all) throw Error("offspring sets do not cover {1..N}");
    if (atom.probability < 0) throw Error("negative offspring probability");
    if (atom.probability == 0) continue;
    merged[atom.children] += atom.probability;
  }

  OffspringLaw law;
  law.ground_size_ = ground_size;
  Rational total = 0;
  Integer lcm = 1;
  for (auto& [key, p] : merged) {
    total += p;
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), p.get_den_mpz_t());
    law.atoms_.push_back({key, p});
  }
  if (total != 1) throw Error("offspring probabilities sum to " + format_rational(total) + ", not 1");
  if (!lcm.fits_slong_p() || lcm > Integer(1) << 40) throw Error("offspring probabilities need a common denominator below 2^40");
  law.denominator_ = lcm.get_si();
  for (const auto& atom : law.atoms_) {
    Rational scaled = atom.probability * Rational(lcm);
    law.weights_.push_back(Integer(scaled.get_num()).get_si());
  }

  // The symmetric group is generated by a transposition and the full cycle.
  std::vector<std::vector<int>> generators;
  if (ground_size >= 2) {
    std::vector<int> swap(static_cast<std::size_t>(ground_size)), cycle(static_cast<std::size_t>(ground_size));
    std::iota(swap.begin(), swap.end(), 0);
    std::swap(swap[0], swap[1]);
    for (int i = 0; i < ground_size; ++i) cycle[static_cast<std::size_t>(i)] = (i + 1) % ground_size;
    generators = {swap, cycle};
  }
  law.exchangeable_ = law.parent_exchangeable_ = true;
  for (const auto& g : generators) {
    law.exchangeable_ = law.exchangeable_ && invariant_under(law, g, true);
    law.parent_exchangeable_ = law.parent_exchangeable_ && invariant_under(law, g, false);
  }
  return law;
}

bool invariant_under(const OffspringLaw& law, const std::vector<int>& perm, bool relabel_children) {
  std::map<AtomKey, std::int64_t> table;
  for (std::size_t a = 0; a < law.atoms().size(); ++a) table.emplace(law.atoms()[a].children, law.weight(a));
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    auto it = table.find(transform(law.atoms()[a].children, perm, relabel_children));
    if (it == table.end() || it->second != law.weight(a)) return false;
  }
  return true;
}

OffspringLaw wright_fisher_law(int n) {
  if (n < 1) throw Error("Wright-Fisher law needs N >= 1");
  const auto count = checked_pow(n, n, state_cap(StateCap::OffspringAtoms), "Wright-Fisher support N^N");
  std::vector<OffspringAtom> atoms;
  atoms.reserve(static_cast<std::size_t>(count));
  const Rational p(1, static_cast<unsigned long>(count));
  std::vector<int> choice(static_cast<std::size_t>(n), 0);
  for (std::int64_t code = 0; code < count; ++code) {
    std::int64_t c = code;
    AtomKey nu(static_cast<std::size_t>(n), 0);
    for (int child = 0; child < n; ++child) {
      nu[static_cast<std::size_t>(c % n)] |= SubsetMask{1} << child;
      c /= n;
    }
    atoms.push_back({std::move(nu), p});
  }
  return OffspringLaw::from_atoms(n, std::move(atoms));
}

OffspringLaw moran_law(int n) {
  if (n < 2) throw Error("Moran law needs N >= 2");
  if (n > 8) throw SizeOverflow("Moran population size", static_cast<std::size_t>(n), 8);
  std::vector<OffspringAtom> atoms;
  const Rational p(1, static_cast<unsigned long>(n * (n - 1)));
  for (int b = 0; b < n; ++b) {
    for (int d = 0; d < n; ++d) {
      if (b == d) continue;
      AtomKey nu(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) nu[static_cast<std::size_t>(i)] = SubsetMask{1} << i;
      nu[static_cast<std::size_t>(b)] |= SubsetMask{1} << d;
      nu[static_cast<std::size_t>(d)] = 0;
      atoms.push_back({std::move(nu), p});
    }
  }
  return OffspringLaw::from_atoms(n, std::move(atoms));
}

OffspringLaw identity_law(int n) {
  AtomKey nu(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nu[static_cast<std::size_t>(i)] = SubsetMask{1} << i;
  return OffspringLaw::from_atoms(n, {{std::move(nu), Rational(1)}});
}

// ------------------------------------------------------------ set kernels

SubsetMask minimal_cover(const std::vector<SubsetMask>& children, SubsetMask j) {
  SubsetMask k = 0;
  for (std::size_t i = 0; i < children.size(); ++i)
    if ((children[i] & j) != 0) k |= SubsetMask{1} << i;
  auto covered = [&](SubsetMask parents) {
    SubsetMask u = 0;
    for (SubsetMask m = parents; m != 0; m &= m - 1) u |= children[static_cast<std::size_t>(std::countr_zero(m))];
    return (j & ~u) == 0;
  };
  if (!covered(k)) throw std::logic_error("offspring sets do not cover the sampled set");
  // Disjointness makes every parent in k indispensable; checked, not assumed.
  for (SubsetMask m = k; m != 0; m &= m - 1)
    if (covered(k & ~(m & -m))) throw std::logic_error("cover is not minimal");
  return k;
}

ForwardSetKernel forward_kernel(const OffspringLaw& law) {
  const int n = law.ground_size();
  auto lattice = subset_lattice(n);
  enforce_cap(StateCap::DenseMatrix, lattice.size(), "forward set kernel");
  const std::size_t s = lattice.size();
  std::vector<std::int64_t> acc(s * s, 0);
  std::vector<SubsetMask> image(s);
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    const auto& nu = law.atoms()[a].children;
    image[0] = 0;
    for (SubsetMask j = 1; j < s; ++j) image[j] = image[j & (j - 1)] | nu[static_cast<std::size_t>(std::countr_zero(j))];
    for (SubsetMask j = 0; j < s; ++j) acc[lattice.index(j) * s + lattice.index(image[j])] += law.weight(a);
  }
  RationalMatrix p(s, s);
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t c = 0; c < s; ++c)
      if (acc[r * s + c] != 0) p(r, c) = ratio(acc[r * s + c], law.denominator());
  ForwardSetKernel fk{std::move(lattice), Kernel(std::move(p))};
  if (!fk.p.stochastic()) throw std::logic_error("forward set kernel is not stochastic");
  return fk;
}

BackwardSetKernel backward_kernel(const OffspringLaw& law) {
  const int n = law.ground_size();
  auto lattice = subset_lattice(n);
  enforce_cap(StateCap::DenseMatrix, lattice.size(), "backward set kernel");
  const std::size_t s = lattice.size();
  std::vector<std::int64_t> acc(s * s, 0);
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    const auto& nu = law.atoms()[a].children;
    for (SubsetMask j = 0; j < s; ++j) acc[lattice.index(j) * s + lattice.index(minimal_cover(nu, j))] += law.weight(a);
  }
  RationalMatrix q(s, s);
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t c = 0; c < s; ++c)
      if (acc[r * s + c] != 0) q(r, c) = ratio(acc[r * s + c], law.denominator());
  BackwardSetKernel bk{std::move(lattice), Kernel(std::move(q))};
  if (!bk.q.stochastic()) throw std::logic_error("haploid backward kernel is not stochastic");
  return bk;
}

SetDualityCheck verify_transpose_zeta_duality(const ForwardSetKernel& fk, const BackwardSetKernel& bk) {
  const auto& lat = fk.lattice;
  const std::size_t s = lat.size();
  SetDualityCheck check;
  const auto zp = moebius_matrix(lat.poset());
  check.conjugation = h_dual(fk.p, zp.zeta.transpose()) == bk.q.matrix;

  // up[L][J] = Σ_{M⊇J} P(L,M), indexed by masks.
  std::vector<Rational> up(s * s);
  for (SubsetMask l = 0; l < s; ++l)
    for (SubsetMask m = 0; m < s; ++m) {
      const Rational& v = fk.p.matrix(lat.index(l), lat.index(m));
      if (v == 0) continue;
      for (SubsetMask j = m;; j = (j - 1) & m) {
        up[l * s + j] += v;
        if (j == 0) break;
      }
    }
  check.sylvester = true;
  for (SubsetMask j = 0; j < s && check.sylvester; ++j)
    for (SubsetMask k = 0; k < s; ++k) {
      Rational sum = 0;
      for (SubsetMask l = k;; l = (l - 1) & k) {
        if (std::popcount(k ^ l) % 2) sum -= up[l * s + j];
        else sum += up[l * s + j];
        if (l == 0) break;
      }
      if (sum != bk.q.matrix(lat.index(j), lat.index(k))) {
        check.sylvester = false;
        break;
      }
    }
  return check;
}

CanningsCoarse coarsen_to_cannings(const OffspringLaw& law, const ForwardSetKernel& fk, const BackwardSetKernel& bk) {
  if (!law.exchangeable()) throw NotExchangeable("coarse-graining to the Cannings chain needs an exchangeable law");
  const int n = law.ground_size();
  const auto zp = moebius_matrix(fk.lattice.poset());
  CanningsCoarse out;
  out.pipeline = coarse_duality_pipeline(fk.p, zp, DualityVariant::ZetaTranspose, cardinality_relation(fk.lattice));
  out.q_is_backward = out.pipeline.q == bk.q.matrix;

  auto direct = coarse_direct(law);
  out.p_direct = std::move(direct.p);
  out.q_moment = std::move(direct.q);
  out.h_hat_closed = hypergeometric(n);
  out.h_hat_inverse_closed = hypergeometric_inverse(n);

  out.p_matches_direct = out.pipeline.p_coarse == out.p_direct;
  out.h_hat_binomial = true;
  for (int j = 0; j <= n; ++j)
    if (out.pipeline.h_hat[static_cast<std::size_t>(j)] != Rational(binomial(n, j))) out.h_hat_binomial = false;
  out.h_hat_matches = out.pipeline.h_hat_coarse == out.h_hat_closed;
  const auto inv = out.pipeline.h_hat_coarse.try_inverse();
  out.h_hat_inverse_matches = inv && *inv == out.h_hat_inverse_closed;
  out.q_matches_moment = out.pipeline.q_hat.matrix == out.q_moment;
  return out;
}

// --------------------------------------------------------- multi-allelic

Rational SparseKernel::entry(std::size_t a, std::size_t b) const {
  const auto& row = rows[a];
  auto it = std::lower_bound(row.begin(), row.end(), b, [](const auto& e, std::size_t c) { return e.first < c; });
  if (it == row.end() || it->first != b) return 0;
  return ratio(it->second, denominator);
}

Rational SparseKernel::row_sum(std::size_t a) const {
  std::int64_t s = 0;
  for (const auto& [c, v] : rows[a]) s += v;
  return ratio(s, denominator);
}

RationalMatrix SparseKernel::dense() const {
  enforce_cap(StateCap::DenseMatrix, rows.size(), "dense copy of a sparse kernel");
  RationalMatrix m(rows.size(), rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (const auto& [c, v] : rows[a]) m(a, c) = ratio(v, denominator);
  return m;
}

SubsetMask MultiAllelicKernels::component(std::size_t state, int t) const {
  return static_cast<SubsetMask>((states[state] >> (t * ground_size)) & full_mask(ground_size));
}

std::string MultiAllelicKernels::label(std::size_t state) const {
  std::string out = "(";
  for (int t = 0; t < types; ++t) {
    if (t) out += ",";
    out += format_subset(component(state, t));
  }
  return out + ")";
}

std::vector<int> MultiAllelicKernels::counts(std::size_t state) const {
  std::vector<int> e(static_cast<std::size_t>(types));
  for (int t = 0; t < types; ++t) e[static_cast<std::size_t>(t)] = std::popcount(component(state, t));
  return e;
}

MultiAllelicKernels multiallelic_kernels(const OffspringLaw& law, int types) {
  const int n = law.ground_size();
  if (types < 2) throw Error("the multi-allelic model needs T >= 2");
  if (n * types > 64) throw SizeOverflow("multi-allelic N*T", static_cast<std::size_t>(n * types), 64);
  const auto base = static_cast<std::size_t>(types) + 1;
  const auto count = static_cast<std::size_t>(checked_pow(static_cast<std::int64_t>(base), n,
                                                          state_cap(StateCap::MultiAllelic), "multi-allelic states (T+1)^N"));

  MultiAllelicKernels ma;
  ma.ground_size = n;
  ma.types = types;
  // code = Σ_i a_i (T+1)^i with a_i ∈ {0..T}; a_i = t+1 means i ∈ J_{t+1}.
  std::vector<std::uint64_t> packed_of_code(count);
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    std::uint64_t packed = 0;
    for (int i = 0; i < n; ++i, c /= base)
      if (c % base) packed |= std::uint64_t{1} << ((c % base - 1) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i));
    packed_of_code[code] = packed;
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = packed_of_code[a], pb = packed_of_code[b];
    return std::popcount(pa) != std::popcount(pb) ? std::popcount(pa) < std::popcount(pb) : pa < pb;
  });
  std::vector<std::size_t> index_of_code(count);
  for (std::size_t k = 0; k < count; ++k) {
    index_of_code[order[k]] = k;
    ma.states.push_back(packed_of_code[order[k]]);
    ma.index.emplace(packed_of_code[order[k]], k);
    if (std::popcount(packed_of_code[order[k]]) == n) ma.covering.push_back(k);
  }

  std::vector<std::vector<int>> digits(count, std::vector<int>(static_cast<std::size_t>(n)));
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t c = order[k];
    for (int i = 0; i < n; ++i, c /= base) digits[k][static_cast<std::size_t>(i)] = static_cast<int>(c % base);
  }
  std::vector<std::size_t> pow(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pow[static_cast<std::size_t>(i)] = i ? pow[static_cast<std::size_t>(i - 1)] * base : 1;

  std::vector<std::unordered_map<std::size_t, std::int64_t>> p_rows(count), q_rows(count);
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    const auto parent = parents_of(law.atoms()[a].children);
    const auto w = law.weight(a);
    for (std::size_t k = 0; k < count; ++k) {
      const auto& d = digits[k];
      // Forward: child c inherits the type of its parent.
      std::size_t fwd = 0;
      for (int c = 0; c < n; ++c) fwd += static_cast<std::size_t>(d[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])]) * pow[static_cast<std::size_t>(c)];
      p_rows[k][index_of_code[fwd]] += w;
      // Backward: parent i takes the type of its sampled children, if unique.
      std::vector<int> anc(static_cast<std::size_t>(n), 0);
      bool clash = false;
      for (int c = 0; c < n && !clash; ++c) {
        const int t = d[static_cast<std::size_t>(c)];
        if (!t) continue;
        int& slot = anc[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])];
        if (slot && slot != t) clash = true;
        slot = t;
      }
      if (clash) continue;
      std::size_t bwd = 0;
      for (int i = 0; i < n; ++i) bwd += static_cast<std::size_t>(anc[static_cast<std::size_t>(i)]) * pow[static_cast<std::size_t>(i)];
      q_rows[k][index_of_code[bwd]] += w;
    }
  }
  auto to_sparse = [&](std::vector<std::unordered_map<std::size_t, std::int64_t>>& rows) {
    SparseKernel sk;
    sk.denominator = law.denominator();
    sk.rows.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      sk.rows[k].assign(rows[k].begin(), rows[k].end());
      std::sort(sk.rows[k].begin(), sk.rows[k].end());
    }
    return sk;
  };
  ma.p = to_sparse(p_rows);
  ma.q = to_sparse(q_rows);

  ma.p_stochastic = ma.q_substochastic = ma.covering_closed = true;
  ma.defect.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (ma.p.row_sum(k) != 1) ma.p_stochastic = false;
    ma.defect[k] = 1 - ma.q.row_sum(k);
    if (ma.defect[k] < 0) ma.q_substochastic = false;
  }
  for (auto k : ma.covering)
    for (const auto& [c, v] : ma.p.rows[k])
      if (std::popcount(ma.states[c]) != n) ma.covering_closed = false;
  return ma;
}

MultiAllelicDualityCheck verify_multiallelic_duality(const MultiAllelicKernels& ma) {
  const std::size_t s = ma.size();
  auto idx = [&](std::uint64_t packed) { return ma.index.at(packed); };
  auto for_submasks = [](std::uint64_t m, auto&& f) {
    for (std::uint64_t x = m;; x = (x - 1) & m) {
      f(x);
      if (x == 0) break;
    }
  };
  // Columns of Q: qt[M] = (K, Q(K,M)).
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> qt(s);
  for (std::size_t k = 0; k < s; ++k)
    for (const auto& [m, v] : ma.q.rows[k]) qt[m].push_back({k, v});

  MultiAllelicDualityCheck check;
  check.identity = true;
  std::vector<std::int64_t> f(s), g(s);
  for (std::size_t j = 0; j < s && check.identity; ++j) {
    std::fill(f.begin(), f.end(), 0);
    std::fill(g.begin(), g.end(), 0);
    for (const auto& [m, v] : ma.p.rows[j]) for_submasks(ma.states[m], [&](std::uint64_t k) { f[idx(k)] += v; });
    for_submasks(ma.states[j], [&](std::uint64_t m) {
      for (const auto& [k, v] : qt[idx(m)]) g[k] += v;
    });
    check.identity = f == g;
  }

  // table[L][J] = Σ_{M⊇J} P(L,M), then Möbius-inverted in L along each bit.
  std::vector<std::int64_t> table(s * s, 0);
  for (std::size_t l = 0; l < s; ++l)
    for (const auto& [m, v] : ma.p.rows[l]) for_submasks(ma.states[m], [&](std::uint64_t j) { table[l * s + idx(j)] += v; });
  const int bits = ma.ground_size * ma.types;
  for (int b = 0; b < bits; ++b) {
    const std::uint64_t bit = std::uint64_t{1} << b;
    for (std::size_t l = 0; l < s; ++l) {
      if (!(ma.states[l] & bit)) continue;
      const std::size_t lower = idx(ma.states[l] ^ bit);
      for (std::size_t j = 0; j < s; ++j) table[l * s + j] -= table[lower * s + j];
    }
  }
  check.sylvester = true;
  std::vector<std::int64_t> row(s);
  for (std::size_t j = 0; j < s && check.sylvester; ++j) {
    std::fill(row.begin(), row.end(), 0);
    for (const auto& [k, v] : ma.q.rows[j]) row[k] = v;
    for (std::size_t k = 0; k < s; ++k)
      if (table[k * s + j] != row[k]) {
        check.sylvester = false;
        break;
      }
  }
  return check;
}

MultiAllelicCoarse coarsen_multiallelic(const OffspringLaw& law, const MultiAllelicKernels& ma) {
  if (!law.exchangeable()) throw NotExchangeable("multi-allelic coarse-graining needs an exchangeable law");
  const int n = ma.ground_size;
  const int types = ma.types;
  const std::size_t s = ma.size();

  MultiAllelicCoarse out;
  std::map<std::vector<int>, std::size_t> class_id;
  std::vector<std::size_t> class_of(s);
  for (std::size_t k = 0; k < s; ++k) {
    auto e = ma.counts(k);
    auto [it, inserted] = class_id.emplace(e, out.classes.size());
    if (inserted) {
      std::string label = "(";
      for (std::size_t t = 0; t < e.size(); ++t) label += (t ? "," : "") + std::to_string(e[t]);
      out.labels.push_back(label + ")");
      out.classes.push_back(std::move(e));
    }
    class_of[k] = it->second;
  }
  const std::size_t nc = out.classes.size();
  std::vector<std::vector<std::size_t>> members(nc);
  for (std::size_t k = 0; k < s; ++k) members[class_of[k]].push_back(k);

  // Row-convention coarse-graining of a matrix given row by row as class sums.
  auto coarse_rows = [&](const char* name, std::int64_t den, auto&& fill_row) {
    RationalMatrix m(nc, nc);
    std::vector<std::int64_t> ref(nc), sums(nc);
    for (std::size_t a = 0; a < nc; ++a) {
      for (std::size_t r = 0; r < members[a].size(); ++r) {
        std::fill(sums.begin(), sums.end(), 0);
        fill_row(members[a][r], sums);
        if (r == 0) {
          ref = sums;
        } else if (sums != ref) {
          std::size_t b = 0;
          while (sums[b] == ref[b]) ++b;
          throw IncompatibleMatrix(name, members[a][0], members[a][r], b);
        }
      }
      for (std::size_t b = 0; b < nc; ++b) m(a, b) = ratio(ref[b], den);
    }
    return m;
  };
  auto for_submasks = [](std::uint64_t m, auto&& f) {
    for (std::uint64_t x = m;; x = (x - 1) & m) {
      f(x);
      if (x == 0) break;
    }
  };
  out.h_coarse = coarse_rows("H", 1, [&](std::size_t j, std::vector<std::int64_t>& sums) {
    for_submasks(ma.states[j], [&](std::uint64_t m) { ++sums[class_of[ma.index.at(m)]]; });
  });
  out.h_inverse_coarse = coarse_rows("H^-1", 1, [&](std::size_t j, std::vector<std::int64_t>& sums) {
    for_submasks(ma.states[j], [&](std::uint64_t m) {
      sums[class_of[ma.index.at(m)]] += std::popcount(ma.states[j] ^ m) % 2 ? -1 : 1;
    });
  });
  out.p_coarse = coarse_rows("P", ma.p.denominator, [&](std::size_t j, std::vector<std::int64_t>& sums) {
    for (const auto& [m, v] : ma.p.rows[j]) sums[class_of[m]] += v;
  });
  // Q̃(d,e) = Σ_{c∈d} Q(c,b) for any b ∈ e.
  {
    std::vector<std::int64_t> acc(s * nc, 0);
    for (std::size_t c = 0; c < s; ++c)
      for (const auto& [b, v] : ma.q.rows[c]) acc[b * nc + class_of[c]] += v;
    out.q_coarse = RationalMatrix(nc, nc);
    for (std::size_t e = 0; e < nc; ++e) {
      const std::size_t rep = members[e][0];
      for (auto b : members[e])
        for (std::size_t d = 0; d < nc; ++d)
          if (acc[b * nc + d] != acc[rep * nc + d]) throw IncompatibleMatrix("Q", rep, b, d);
      for (std::size_t d = 0; d < nc; ++d) out.q_coarse(d, e) = ratio(acc[rep * nc + d], ma.q.denominator);
    }
  }

  out.h_hat = RationalVector(nc);
  out.h_hat_multinomial = true;
  out.h_hat_closed_form = true;
  for (std::size_t e = 0; e < nc; ++e) {
    Integer multinomial = factorial(n);
    int used = 0;
    for (int v : out.classes[e]) {
      multinomial /= factorial(v);
      used += v;
    }
    multinomial /= factorial(n - used);
    out.h_hat[e] = Rational(static_cast<unsigned long>(members[e].size()));
    if (out.h_hat[e] != Rational(multinomial)) out.h_hat_multinomial = false;
  }
  out.h_hat_coarse = RationalMatrix(nc, nc);
  for (std::size_t d = 0; d < nc; ++d)
    for (std::size_t e = 0; e < nc; ++e) {
      out.h_hat_coarse(d, e) = out.h_coarse(d, e) / out.h_hat[e];
      Integer prod = 1;
      for (int t = 0; t < types; ++t)
        prod *= binomial(out.classes[d][static_cast<std::size_t>(t)], out.classes[e][static_cast<std::size_t>(t)]);
      if (out.h_hat_coarse(d, e) != Rational(prod) / out.h_hat[e]) out.h_hat_closed_form = false;
    }
  out.q_hat = h_transform(out.q_coarse, out.h_hat).kernel;

  const auto h_inv = out.h_coarse.try_inverse();
  out.inverse_commutes = h_inv && *h_inv == out.h_inverse_coarse;
  out.coarse_duality = h_inv && (*h_inv * out.p_coarse * out.h_coarse) == out.q_coarse.transpose();
  const auto hat_inv = out.h_hat_coarse.try_inverse();
  out.hat_duality = hat_inv && (*hat_inv * out.p_coarse * out.h_hat_coarse) == out.q_hat.matrix.transpose();

  // P̃(d,e) = ℙ(∩_t {Σ_{l in block t} |ν_l| = e_t}), blocks of sizes d_1, d_2, ...
  out.p_direct = RationalMatrix(nc, nc);
  for (std::size_t d = 0; d < nc; ++d) {
    std::vector<std::int64_t> acc(nc, 0);
    for (std::size_t a = 0; a < law.atoms().size(); ++a) {
      const auto& nu = law.atoms()[a].children;
      std::vector<int> e(static_cast<std::size_t>(types), 0);
      std::size_t l = 0;
      for (int t = 0; t < types; ++t)
        for (int r = 0; r < out.classes[d][static_cast<std::size_t>(t)]; ++r, ++l) e[static_cast<std::size_t>(t)] += std::popcount(nu[l]);
      acc[class_id.at(e)] += law.weight(a);
    }
    for (std::size_t e = 0; e < nc; ++e) out.p_direct(d, e) = ratio(acc[e], law.denominator());
  }
  out.p_matches_direct = out.p_direct == out.p_coarse;
  out.p_coarse_stochastic = classify_kernel(out.p_coarse) == KernelKind::Stochastic;
  out.q_hat_substochastic = out.q_hat.kind != KernelKind::General;
  out.single_type_rows_stochastic = true;
  for (std::size_t k = 0; k < s; ++k) {
    const auto e = ma.counts(k);
    if (std::count_if(e.begin(), e.end(), [](int v) { return v > 0; }) <= 1 && ma.defect[k] != 0)
      out.single_type_rows_stochastic = false;
  }
  return out;
}

// ------------------------------------------------------------ Monte Carlo

namespace {

/// Index of the atom drawn by a 64-bit uniform: the first atom whose
/// cumulative weight exceeds ⌊u·D / 2^64⌋.
std::size_t draw_atom(std::uint64_t u, const std::vector<std::int64_t>& cumulative, std::int64_t den) {
  const auto x = static_cast<std::int64_t>((static_cast<Wide>(u) * static_cast<std::uint64_t>(den)) >> 64);
  return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
}

/// SplitMix64 finaliser over (seed, replica, stream): distinct, well-mixed
/// seeds for independent per-replica engines.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replica, std::uint64_t stream) {
  std::uint64_t z = seed;
  for (std::uint64_t word : {replica, stream}) {
    z += 0x9e3779b97f4a7c15ULL + word;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
  }
  return z;
}

ChainEstimate summarize(const std::vector<std::uint8_t>& finals, const std::vector<Rational>& value_of_state,
                        const Rational& exact) {
  ChainEstimate est;
  est.final_counts.assign(value_of_state.size(), 0);
  for (auto f : finals) ++est.final_counts[f];
  const auto reps = static_cast<long>(finals.size());
  Rational sum = 0;
  for (std::size_t k = 0; k < value_of_state.size(); ++k)
    sum += Rational(static_cast<long>(est.final_counts[k])) * value_of_state[k];
  est.mean = sum / Rational(reps);
  Rational ss = 0;
  for (std::size_t k = 0; k < value_of_state.size(); ++k) {
    const Rational dev = value_of_state[k] - est.mean;
    ss += Rational(static_cast<long>(est.final_counts[k])) * dev * dev;
  }
  est.variance = reps > 1 ? Rational(ss / Rational(reps - 1)) : Rational(0);
  const Rational se2 = est.variance / Rational(reps);
  est.standard_error = std::sqrt(se2.get_d());
  const Rational gap = est.mean - exact;
  est.within_four_se = gap * gap <= 16 * se2;
  return est;
}

}  // namespace

MonteCarloResult monte_carlo_duality(const OffspringLaw& law, int start, int dual_start,
                                     const MonteCarloOptions& options) {
  if (!law.exchangeable()) throw NotExchangeable("the coarse duality estimator needs an exchangeable law");
  const int n = law.ground_size();
  if (start < 0 || start > n || dual_start < 0 || dual_start > n) throw Error("start sizes must lie in 0..N");
  if (options.reps == 0) throw Error("Monte Carlo needs at least one replica");

  const auto direct = coarse_direct(law);
  const auto h = hypergeometric(n);
  const auto i = static_cast<std::size_t>(start);
  const auto j = static_cast<std::size_t>(dual_start);
  MonteCarloResult res;
  res.start = start;
  res.dual_start = dual_start;
  res.steps = options.steps;
  res.reps = options.reps;
  res.exact = (direct.p.power(options.steps) * h)(i, j);
  if ((h * direct.q.transpose().power(options.steps))(i, j) != res.exact)
    throw std::logic_error("coarse duality fails for the matrix-power expectation");

  const auto& atoms = law.atoms();
  std::vector<std::int64_t> cumulative;
  std::int64_t running = 0;
  for (std::size_t a = 0; a < atoms.size(); ++a) cumulative.push_back(running += law.weight(a));
  std::vector<std::vector<int>> parent(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) parent[a] = parents_of(atoms[a].children);

  const SubsetMask a_mask = full_mask(start);
  const SubsetMask b_mask = full_mask(dual_start);
  std::vector<std::uint8_t> fwd(options.reps), bwd(options.reps);
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      std::mt19937_64 fe(stream_seed(options.seed, r, 0));
      SubsetMask x = a_mask;
      for (unsigned step = 0; step < options.steps; ++step) {
        const auto& nu = atoms[draw_atom(fe(), cumulative, law.denominator())].children;
        SubsetMask next = 0;
        for (SubsetMask m = x; m != 0; m &= m - 1) next |= nu[static_cast<std::size_t>(std::countr_zero(m))];
        x = next;
      }
      fwd[r] = static_cast<std::uint8_t>(std::popcount(x));

      std::mt19937_64 be(stream_seed(options.seed, r, 1));
      SubsetMask y = b_mask;
      for (unsigned step = 0; step < options.steps; ++step) {
        const auto& par = parent[draw_atom(be(), cumulative, law.denominator())];
        SubsetMask next = 0;
        for (SubsetMask m = y; m != 0; m &= m - 1) next |= SubsetMask{1} << par[static_cast<std::size_t>(std::countr_zero(m))];
        y = next;
      }
      bwd[r] = static_cast<std::uint8_t>(std::popcount(y));
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, options.reps));
  if (threads <= 1) {
    run_range(0, options.reps);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (options.reps + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk, hi = std::min(options.reps, lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<Rational> fwd_values(static_cast<std::size_t>(n) + 1), bwd_values(static_cast<std::size_t>(n) + 1);
  for (std::size_t k = 0; k <= static_cast<std::size_t>(n); ++k) {
    fwd_values[k] = h(k, j);
    bwd_values[k] = h(i, k);
  }
  res.forward = summarize(fwd, fwd_values, res.exact);
  res.backward = summarize(bwd, bwd_values, res.exact);
  return res;
}

}  // namespace mdual
