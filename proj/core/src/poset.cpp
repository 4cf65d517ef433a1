#include "mdual/poset.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "mdual/errors.hpp"
#include "mdual/limits.hpp"

namespace mdual {

namespace {

using Kind = PartialOrderViolation::Kind;

class BitRows {
 public:
  explicit BitRows(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  void set(std::size_t r, std::size_t c) { bits_[r * words_ + c / 64] |= std::uint64_t{1} << (c % 64); }
  bool get(std::size_t r, std::size_t c) const { return (bits_[r * words_ + c / 64] >> (c % 64)) & 1u; }

  /// First column set in row `from` but not in row `into`, if any.
  std::optional<std::size_t> first_missing(std::size_t from, std::size_t into) const {
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t missing = bits_[from * words_ + w] & ~bits_[into * words_ + w];
      if (missing != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(missing));
    }
    return std::nullopt;
  }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

void verify_order_axioms(const BitRows& rel, std::size_t n, const std::vector<std::string>& labels) {
  for (std::size_t a = 0; a < n; ++a) {
    if (!rel.get(a, a)) throw PartialOrderViolation(Kind::Reflexivity, labels[a], labels[a], labels[a]);
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (rel.get(a, b) && rel.get(b, a)) throw PartialOrderViolation(Kind::Antisymmetry, labels[a], labels[b], labels[a]);
  // a ⪯ b requires up(b) ⊆ up(a).
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || !rel.get(a, b)) continue;
      if (auto c = rel.first_missing(b, a)) throw PartialOrderViolation(Kind::Transitivity, labels[a], labels[b], labels[*c]);
    }
}

}  // namespace

std::optional<std::size_t> FinitePoset::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FinitePoset build_poset(std::vector<std::string> labels, const std::function<bool(std::size_t, std::size_t)>& leq,
                        PosetOptions options) {
  const std::size_t n = labels.size();
  {
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
      if (!seen.insert(l).second) throw Error("duplicate poset label \"" + l + "\"");
  }

  BitRows rel(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (leq(a, b)) rel.set(a, b);

  if (n <= options.verify_limit || options.force_verify) verify_order_axioms(rel, n, labels);

  // Heights by Kahn's algorithm on the strict relation.
  std::vector<std::size_t> indegree(n, 0), height(n, 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && rel.get(a, b)) ++indegree[b];
  std::vector<std::size_t> queue;
  queue.reserve(n);
  for (std::size_t a = 0; a < n; ++a)
    if (indegree[a] == 0) queue.push_back(a);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t a = queue[head];
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || !rel.get(a, b)) continue;
      height[b] = std::max(height[b], height[a] + 1);
      if (--indegree[b] == 0) queue.push_back(b);
    }
  }
  if (queue.size() != n) {
    auto it = std::find_if(indegree.begin(), indegree.end(), [](std::size_t d) { return d != 0; });
    const auto& l = labels[static_cast<std::size_t>(it - indegree.begin())];
    throw PartialOrderViolation(Kind::Cycle, l, l, l);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return height[x] < height[y]; });

  FinitePoset p;
  p.labels_.resize(n);
  p.input_pos_ = order;
  p.from_input_.assign(n, 0);
  p.height_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.from_input_[order[i]] = i;
    p.labels_[i] = std::move(labels[order[i]]);
    p.height_[i] = height[order[i]];
    p.index_.emplace(p.labels_[i], i);
  }
  p.order_.assign(n * n, 0);
  p.up_.assign(n, {});
  p.down_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rel.get(order[i], order[j])) {
        p.order_[i * n + j] = 1;
        p.up_[i].push_back(j);
        p.down_[j].push_back(i);
      }
  return p;
}

FinitePoset chain_poset(std::size_t length) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < length; ++i) labels.push_back(std::to_string(i));
  return build_poset(std::move(labels), [](std::size_t a, std::size_t b) { return a <= b; });
}

FinitePoset antichain_poset(std::size_t size) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < size; ++i) labels.push_back("a" + std::to_string(i));
  return build_poset(std::move(labels), [](std::size_t a, std::size_t b) { return a == b; });
}

RationalMatrix zeta_matrix(const FinitePoset& poset) {
  const std::size_t n = poset.size();
  enforce_cap(StateCap::DenseMatrix, n, "zeta matrix");
  RationalMatrix z(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b : poset.up_set(a)) z(a, b) = 1;
  return z;
}

IntegerMatrix moebius_function(const FinitePoset& poset) {
  const std::size_t n = poset.size();
  IntegerMatrix mu(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& up = poset.up_set(a);
    // up is ascending in index order, a linear extension, so every c ≺ b
    // with a ⪯ c appears before b.
    for (std::size_t pos = 0; pos < up.size(); ++pos) {
      const std::size_t b = up[pos];
      if (b == a) {
        mu(a, b) = 1;
        continue;
      }
      std::int64_t sum = 0;
      for (std::size_t q = 0; q < pos; ++q) {
        const std::size_t c = up[q];
        if (poset.leq(c, b)) sum += mu(a, c);
      }
      mu(a, b) = -sum;
    }
  }
  return mu;
}

ZetaPair moebius_matrix(const FinitePoset& poset) {
  const std::size_t n = poset.size();
  ZetaPair zp{poset, zeta_matrix(poset), {}, moebius_function(poset)};
  zp.moebius = zp.mu.to_rational();
  // Z·M = I and M·Z = I, in integer arithmetic over the comparable pairs.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      std::int64_t zm = 0, mz = 0;
      for (std::size_t c : poset.up_set(a)) zm += zp.mu(c, b);
      for (std::size_t c : poset.down_set(b)) mz += zp.mu(a, c);
      const std::int64_t expected = a == b ? 1 : 0;
      if (zm != expected || mz != expected) throw std::logic_error("Möbius recursion does not invert the zeta matrix");
    }
  return zp;
}

ProductPoset product_poset(const FinitePoset& first, const FinitePoset& second) {
  const std::size_t n1 = first.size(), n2 = second.size();
  enforce_cap(StateCap::ProductPoset, n1 * n2, "product poset");
  std::vector<std::string> labels;
  labels.reserve(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) labels.push_back("(" + first.label(i) + "," + second.label(j) + ")");
  ProductPoset out;
  out.poset = build_poset(std::move(labels), [&](std::size_t x, std::size_t y) {
    return first.leq(x / n2, y / n2) && second.leq(x % n2, y % n2);
  });
  out.second_size = n2;
  out.components.resize(n1 * n2);
  out.lookup.resize(n1 * n2);
  for (std::size_t i = 0; i < n1 * n2; ++i) {
    const std::size_t pos = out.poset.input_position(i);
    out.components[i] = {pos / n2, pos % n2};
    out.lookup[pos] = i;
  }
  return out;
}

std::pair<RationalMatrix, RationalMatrix> transpose_pair(const ZetaPair& zp) {
  RationalMatrix zt = zp.zeta.transpose();
  RationalMatrix mt = zp.moebius.transpose();
  if (!(mt * zt).is_identity() || !(zt * mt).is_identity())
    throw std::logic_error("transpose Möbius matrix is not the inverse of the transpose zeta matrix");
  return {std::move(zt), std::move(mt)};
}

}  // namespace mdual
