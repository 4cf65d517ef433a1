#include "mdual/lattices.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mdual/errors.hpp"
#include "mdual/limits.hpp"

namespace mdual {

namespace {

std::vector<int> parse_int_list(std::string_view text, char separator_extra) {
  std::vector<int> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    for (char ch : token)
      if (!std::isdigit(static_cast<unsigned char>(ch))) throw ParseError("expected an integer, got \"" + token + "\"");
    out.push_back(std::stoi(token));
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == separator_extra || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return out;
}

void materialize_check(std::size_t size, const char* what) { enforce_cap(StateCap::ProductPoset, size, what); }

}  // namespace

std::string format_subset(std::uint64_t mask) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (!(mask & 1u)) continue;
    if (!first) out += ' ';
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

// ---------------------------------------------------------------- subsets

const FinitePoset& SubsetLattice::poset() const {
  if (!has_poset()) throw SizeOverflow("subset lattice poset", masks_.size(), state_cap(StateCap::ProductPoset));
  return poset_;
}

std::int64_t SubsetLattice::moebius(SubsetMask j, SubsetMask k) {
  if ((j & ~k) != 0) throw NotComparable(format_subset(j) + " is not a subset of " + format_subset(k));
  return (std::popcount(k) - std::popcount(j)) % 2 == 0 ? 1 : -1;
}

SubsetLattice subset_lattice(int ground_size, bool with_poset) {
  if (ground_size < 0 || ground_size > 30) throw SizeOverflow("subset lattice ground size", static_cast<std::size_t>(ground_size), 30);
  const std::size_t n = std::size_t{1} << ground_size;
  enforce_cap(StateCap::SubsetLattice, n, "subset lattice");
  SubsetLattice lat;
  lat.ground_size_ = ground_size;
  lat.masks_.resize(n);
  std::iota(lat.masks_.begin(), lat.masks_.end(), SubsetMask{0});
  std::stable_sort(lat.masks_.begin(), lat.masks_.end(),
                   [](SubsetMask a, SubsetMask b) { return std::popcount(a) < std::popcount(b); });
  lat.index_by_mask_.resize(n);
  for (std::size_t i = 0; i < n; ++i) lat.index_by_mask_[lat.masks_[i]] = i;

  if (with_poset && n <= state_cap(StateCap::ProductPoset)) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (auto m : lat.masks_) labels.push_back(format_subset(m));
    const auto& masks = lat.masks_;
    lat.poset_ = build_poset(std::move(labels), [&](std::size_t a, std::size_t b) { return (masks[a] & ~masks[b]) == 0; });
  }
  return lat;
}

// ---------------------------------------------------------- product of sets

SubsetMask ProductSetLattice::component(std::size_t index, int t) const {
  const std::uint64_t word = packed_[index] >> (static_cast<unsigned>(t) * static_cast<unsigned>(ground_size_));
  return static_cast<SubsetMask>(word & ((std::uint64_t{1} << ground_size_) - 1));
}

std::int64_t ProductSetLattice::moebius(std::uint64_t j, std::uint64_t k) {
  if ((j & ~k) != 0) throw NotComparable("tuple is not componentwise contained in the other");
  return (std::popcount(k) - std::popcount(j)) % 2 == 0 ? 1 : -1;
}

ProductSetLattice product_set_lattice(int ground_size, int copies) {
  if (ground_size < 0 || copies < 1 || ground_size * copies > 30)
    throw SizeOverflow("product-of-sets lattice N*T", static_cast<std::size_t>(std::max(0, ground_size * copies)), 30);
  const int bits = ground_size * copies;
  const std::size_t n = std::size_t{1} << bits;
  materialize_check(n, "product-of-sets lattice");

  ProductSetLattice lat;
  lat.ground_size_ = ground_size;
  lat.copies_ = copies;
  lat.packed_.resize(n);
  std::iota(lat.packed_.begin(), lat.packed_.end(), std::uint64_t{0});
  std::stable_sort(lat.packed_.begin(), lat.packed_.end(),
                   [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) < std::popcount(b); });
  lat.index_by_packed_.resize(n);
  for (std::size_t i = 0; i < n; ++i) lat.index_by_packed_[lat.packed_[i]] = i;

  std::vector<std::string> labels;
  labels.reserve(n);
  const std::uint64_t low = (std::uint64_t{1} << ground_size) - 1;
  for (auto p : lat.packed_) {
    std::string label = "(";
    for (int t = 0; t < copies; ++t) {
      if (t) label += ",";
      label += format_subset((p >> (t * ground_size)) & low);
    }
    labels.push_back(label + ")");
  }
  // The componentwise order written per coordinate, not through the packed
  // image, so the isomorphism with the subset lattice stays a checked fact.
  const auto& packed = lat.packed_;
  lat.poset_ = build_poset(std::move(labels), [&](std::size_t a, std::size_t b) {
    for (int t = 0; t < copies; ++t) {
      const std::uint64_t ja = (packed[a] >> (t * ground_size)) & low;
      const std::uint64_t jb = (packed[b] >> (t * ground_size)) & low;
      if ((ja & ~jb) != 0) return false;
    }
    return true;
  });
  return lat;
}

// ------------------------------------------------------------- partitions

Partition Partition::from_rgs(std::vector<std::uint8_t> rgs) {
  int next = 0;
  for (auto v : rgs) {
    if (v > next) throw ParseError("not a restricted-growth string");
    if (v == next) ++next;
  }
  Partition p;
  p.rgs_ = std::move(rgs);
  p.blocks_ = next;
  return p;
}

Partition Partition::from_labels(const std::vector<int>& block_of) {
  std::map<int, std::uint8_t> relabel;
  std::vector<std::uint8_t> rgs;
  rgs.reserve(block_of.size());
  for (int b : block_of) {
    auto [it, inserted] = relabel.emplace(b, static_cast<std::uint8_t>(relabel.size()));
    rgs.push_back(it->second);
  }
  return from_rgs(std::move(rgs));
}

Partition Partition::from_atoms(int n, const std::vector<std::vector<int>>& atoms) {
  std::vector<int> block(static_cast<std::size_t>(n), -1);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (atoms[a].empty()) throw ParseError("partition atoms must be nonempty");
    for (int e : atoms[a]) {
      if (e < 0 || e >= n) throw ParseError("partition element out of range");
      if (block[static_cast<std::size_t>(e)] != -1) throw ParseError("partition atoms overlap");
      block[static_cast<std::size_t>(e)] = static_cast<int>(a);
    }
  }
  for (int b : block)
    if (b == -1) throw ParseError("partition atoms do not cover the ground set");
  return from_labels(block);
}

Partition Partition::singletons(int n) {
  std::vector<std::uint8_t> rgs(static_cast<std::size_t>(n));
  std::iota(rgs.begin(), rgs.end(), std::uint8_t{0});
  return from_rgs(std::move(rgs));
}

Partition Partition::single_block(int n) { return from_rgs(std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)); }

Partition Partition::parse(std::string_view text) {
  if (text.find('{') != std::string_view::npos) {
    std::vector<std::vector<int>> atoms;
    int max_element = 0;
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
      const auto close = text.find('}', pos);
      if (close == std::string_view::npos) throw ParseError("unterminated atom in \"" + std::string(text) + "\"");
      std::vector<int> atom;
      for (int e : parse_int_list(text.substr(pos + 1, close - pos - 1), ' ')) {
        if (e < 1) throw ParseError("partition elements are 1-based");
        atom.push_back(e - 1);
        max_element = std::max(max_element, e);
      }
      atoms.push_back(std::move(atom));
      pos = close + 1;
    }
    return from_atoms(max_element, atoms);
  }
  std::vector<std::uint8_t> rgs;
  for (int v : parse_int_list(text, ' ')) {
    if (v > 255) throw ParseError("block label too large");
    rgs.push_back(static_cast<std::uint8_t>(v));
  }
  if (rgs.empty()) throw ParseError("empty partition");
  return from_rgs(std::move(rgs));
}

std::vector<std::vector<int>> Partition::atoms() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(blocks_));
  for (std::size_t i = 0; i < rgs_.size(); ++i) out[rgs_[i]].push_back(static_cast<int>(i));
  return out;
}

std::vector<SubsetMask> Partition::atom_masks() const {
  std::vector<SubsetMask> out(static_cast<std::size_t>(blocks_), 0);
  for (std::size_t i = 0; i < rgs_.size(); ++i) out[rgs_[i]] |= SubsetMask{1} << i;
  return out;
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.rgs_.size() != rgs_.size()) return false;
  std::vector<int> image(static_cast<std::size_t>(blocks_), -1);
  for (std::size_t i = 0; i < rgs_.size(); ++i) {
    int& img = image[rgs_[i]];
    if (img == -1) {
      img = coarser.rgs_[i];
    } else if (img != coarser.rgs_[i]) {
      return false;
    }
  }
  return true;
}

std::string Partition::to_rgs_string() const {
  std::string out;
  for (std::size_t i = 0; i < rgs_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(rgs_[i]);
  }
  return out;
}

std::string Partition::to_atom_string() const {
  std::string out;
  for (const auto& atom : atoms()) {
    out += '{';
    for (std::size_t k = 0; k < atom.size(); ++k) {
      if (k) out += ' ';
      out += std::to_string(atom[k] + 1);
    }
    out += '}';
  }
  return out;
}

std::vector<Partition> enumerate_partitions(int n) {
  std::vector<Partition> out;
  if (n <= 0) return out;
  std::vector<std::uint8_t> rgs(static_cast<std::size_t>(n), 0);
  // Iterative lexicographic successor of restricted-growth strings.
  std::vector<std::uint8_t> prefix_max(static_cast<std::size_t>(n), 0);
  while (true) {
    out.push_back(Partition::from_rgs(rgs));
    int i = n - 1;
    while (i > 0 && rgs[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) break;
    ++rgs[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] =
        std::max(prefix_max[static_cast<std::size_t>(i - 1)], rgs[static_cast<std::size_t>(i)]);
    for (int k = i + 1; k < n; ++k) {
      rgs[static_cast<std::size_t>(k)] = 0;
      prefix_max[static_cast<std::size_t>(k)] = prefix_max[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

std::uint64_t bell_number(int n) {
  if (n < 0) return 0;
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

std::size_t PartitionLattice::index_of(const Partition& p) const {
  const auto idx = poset_.index_of(p.to_atom_string());
  if (!idx) throw NotComparable("partition " + p.to_atom_string() + " is not in this lattice");
  return *idx;
}

PartitionLattice partition_lattice(int n) {
  if (n < 1) throw SizeOverflow("partition lattice ground size", 0, 1);
  if (n > 20) throw SizeOverflow("partition lattice ground size", static_cast<std::size_t>(n), 20);
  enforce_cap(StateCap::PartitionLattice, bell_number(n), "partition lattice");
  auto parts = enumerate_partitions(n);
  std::vector<std::string> labels;
  labels.reserve(parts.size());
  for (const auto& p : parts) labels.push_back(p.to_atom_string());

  PartitionLattice lat;
  lat.ground_size_ = n;
  lat.poset_ = build_poset(std::move(labels), [&](std::size_t a, std::size_t b) { return parts[a].refines(parts[b]); });
  lat.partitions_.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) lat.partitions_.push_back(parts[lat.poset_.input_position(i)]);
  return lat;
}

std::int64_t partition_moebius_closed_form(const Partition& alpha, const Partition& beta) {
  if (!alpha.refines(beta))
    throw NotComparable(alpha.to_atom_string() + " does not refine " + beta.to_atom_string());
  std::vector<std::set<int>> inside(static_cast<std::size_t>(beta.block_count()));
  for (int i = 0; i < alpha.ground_size(); ++i) inside[static_cast<std::size_t>(beta.block_of(i))].insert(alpha.block_of(i));
  std::int64_t value = (alpha.block_count() + beta.block_count()) % 2 == 0 ? 1 : -1;
  for (const auto& blocks : inside)
    for (std::int64_t f = 2; f < static_cast<std::int64_t>(blocks.size()); ++f) value *= f;
  return value;
}

// -------------------------------------------------------------- skeletons

Skeleton::Skeleton(std::vector<int> parts) : parts_(std::move(parts)) {
  for (int p : parts_)
    if (p < 1) throw InvalidSkeleton("skeleton parts must be positive");
  std::sort(parts_.begin(), parts_.end(), std::greater<>());
}

Skeleton Skeleton::parse(std::string_view text) {
  auto parts = parse_int_list(text, '+');
  if (parts.empty()) throw ParseError("empty skeleton");
  return Skeleton(std::move(parts));
}

int Skeleton::total() const noexcept { return std::accumulate(parts_.begin(), parts_.end(), 0); }

std::string Skeleton::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(parts_[i]);
  }
  return out;
}

std::strong_ordering operator<=>(const Skeleton& a, const Skeleton& b) {
  if (a.parts_.size() != b.parts_.size()) return b.parts_.size() <=> a.parts_.size();
  return a.parts_ <=> b.parts_;
}

Skeleton skeleton(const Partition& alpha) {
  std::vector<int> sizes(static_cast<std::size_t>(alpha.block_count()), 0);
  for (int i = 0; i < alpha.ground_size(); ++i) ++sizes[static_cast<std::size_t>(alpha.block_of(i))];
  return Skeleton(std::move(sizes));
}

std::vector<Skeleton> skeletons_of(int total) {
  std::vector<Skeleton> out;
  if (total < 1) return out;
  std::vector<int> current;
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.emplace_back(current);
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      current.push_back(p);
      self(self, remaining - p, p);
      current.pop_back();
    }
  };
  rec(rec, total, total);
  std::sort(out.begin(), out.end());
  return out;
}

Integer skeleton_count(const Skeleton& eta, int total) {
  if (eta.total() != total)
    throw InvalidSkeleton("skeleton " + eta.to_string() + " does not sum to " + std::to_string(total));
  Integer count = factorial(total);
  std::map<int, long> multiplicity;
  for (int e : eta.parts()) {
    count /= factorial(e);
    ++multiplicity[e];
  }
  for (const auto& [part, m] : multiplicity) count /= factorial(m);
  return count;
}

bool skeleton_order(const Skeleton& eta, const Skeleton& kappa) {
  if (eta.total() != kappa.total() || eta.part_count() < kappa.part_count()) return false;
  const auto& parts = eta.parts();
  std::set<std::pair<std::size_t, std::vector<int>>> dead;
  auto place = [&](auto&& self, std::size_t s, std::vector<int> room) -> bool {
    if (s == parts.size()) return std::all_of(room.begin(), room.end(), [](int r) { return r == 0; });
    std::sort(room.begin(), room.end());
    if (dead.count({s, room})) return false;
    for (std::size_t r = 0; r < room.size(); ++r) {
      if (room[r] < parts[s] || (r > 0 && room[r] == room[r - 1])) continue;
      auto next = room;
      next[r] -= parts[s];
      if (self(self, s + 1, std::move(next))) return true;
    }
    dead.insert({s, std::move(room)});
    return false;
  };
  return place(place, 0, kappa.parts());
}

}  // namespace mdual
