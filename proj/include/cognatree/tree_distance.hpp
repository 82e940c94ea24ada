#pragma once

// Normalized Robinson-Foulds distance and generalized quartet distance.
//
// GQ is defined here as (# quartets resolved in both trees with conflicting
// butterflies) / (# quartets resolved in both trees). A binary tree that
// refines a polytomous reference therefore has distance 0. When the inferred
// tree is binary, "resolved in both" equals "resolved in the reference".

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "cognatree/error.hpp"
#include "cognatree/phylogeny.hpp"
#include "cognatree/sparse_table.hpp"

namespace cognatree {

enum class Metric { rf, gq };

inline const char* to_string(Metric m) { return m == Metric::rf ? "rf" : "gq"; }

struct DistanceResult {
  double value = 0.0;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  Metric metric = Metric::rf;

  // Exact rational comparison; display values are never compared.
  friend bool same_value(const DistanceResult& a, const DistanceResult& b) {
    return static_cast<unsigned __int128>(a.numerator) * b.denominator ==
           static_cast<unsigned __int128>(b.numerator) * a.denominator;
  }
  friend bool less_value(const DistanceResult& a, const DistanceResult& b) {
    return static_cast<unsigned __int128>(a.numerator) * b.denominator <
           static_cast<unsigned __int128>(b.numerator) * a.denominator;
  }
};

inline DistanceResult make_distance(Metric m, std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw DataError("distance denominator is zero");
  return {static_cast<double>(num) / static_cast<double>(den), num, den, m};
}

namespace detail {

inline void require_same_leaves(const Phylogeny& a, const Phylogeny& b) {
  auto la = a.leaf_labels();
  auto lb = b.leaf_labels();
  if (la == lb) return;
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  std::set_difference(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(only_a));
  std::set_difference(lb.begin(), lb.end(), la.begin(), la.end(), std::back_inserter(only_b));
  std::string msg = "leaf sets differ";
  if (!only_a.empty()) msg += "; only in first tree: " + only_a.front();
  if (!only_b.empty()) msg += "; only in second tree: " + only_b.front();
  if (only_a.size() + only_b.size() > 2) msg += " (and more)";
  throw DataError(msg);
}

}  // namespace detail

inline DistanceResult rf_distance(const Phylogeny& t1, const Phylogeny& t2) {
  detail::require_same_leaves(t1, t2);
  const std::size_t n = t1.leaf_count();
  if (n < 4) throw DataError("RF distance needs at least 4 taxa");
  if (!t1.is_binary() || !t2.is_binary())
    throw DataError("RF distance is only defined here for strictly binary trees");
  const auto s1 = splits(t1);
  const auto s2 = splits(t2);
  std::vector<Bitset> diff;
  std::set_symmetric_difference(s1.splits.begin(), s1.splits.end(), s2.splits.begin(),
                                s2.splits.end(), std::back_inserter(diff));
  return make_distance(Metric::rf, diff.size(), 2 * (n - 3));
}

// Lowest common ancestor queries via Euler tour + sparse table.
class LcaIndex {
 public:
  explicit LcaIndex(const Phylogeny& t) {
    const std::size_t count = t.node_count();
    depth_.assign(count, 0);
    first_.assign(count, 0);
    std::vector<std::uint32_t> tour_depth;
    tour_depth.reserve(2 * count);
    tour_.reserve(2 * count);
    std::vector<std::pair<int, std::size_t>> stack{{t.root(), 0}};
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto& ch = t.node(v).children;
      if (next == 0) first_[static_cast<std::size_t>(v)] = tour_.size();
      tour_.push_back(v);
      tour_depth.push_back(depth_[static_cast<std::size_t>(v)]);
      if (next < ch.size()) {
        int c = ch[next++];
        depth_[static_cast<std::size_t>(c)] = depth_[static_cast<std::size_t>(v)] + 1;
        stack.emplace_back(c, 0);
      } else {
        stack.pop_back();
      }
    }
    table_ = SparseTable<std::uint32_t>(std::move(tour_depth));
  }

  int lca(int a, int b) const {
    auto fa = first_[static_cast<std::size_t>(a)];
    auto fb = first_[static_cast<std::size_t>(b)];
    if (fa > fb) std::swap(fa, fb);
    return tour_[table_.arg_min(fa, fb)];
  }

  std::uint32_t depth(int v) const { return depth_[static_cast<std::size_t>(v)]; }

 private:
  std::vector<std::uint32_t> depth_;
  std::vector<std::size_t> first_;
  std::vector<int> tour_;
  SparseTable<std::uint32_t> table_;
};

enum class QuartetTopology { ab_cd, ac_bd, ad_bc, unresolved };

inline const char* to_string(QuartetTopology q) {
  switch (q) {
    case QuartetTopology::ab_cd: return "ab|cd";
    case QuartetTopology::ac_bd: return "ac|bd";
    case QuartetTopology::ad_bc: return "ad|bc";
    case QuartetTopology::unresolved: return "unresolved";
  }
  return "?";
}

namespace detail {

// Four-point condition on LCA depths: the pairing whose two meeting points
// are jointly deepest is the butterfly; if all three pairings tie, the four
// paths meet at one node.
inline QuartetTopology classify(std::uint32_t ab_cd, std::uint32_t ac_bd, std::uint32_t ad_bc) {
  if (ab_cd > ac_bd && ab_cd > ad_bc) return QuartetTopology::ab_cd;
  if (ac_bd > ab_cd && ac_bd > ad_bc) return QuartetTopology::ac_bd;
  if (ad_bc > ab_cd && ad_bc > ac_bd) return QuartetTopology::ad_bc;
  return QuartetTopology::unresolved;
}

}  // namespace detail

inline QuartetTopology quartet_topology(const Phylogeny& t, const std::array<std::string, 4>& q) {
  std::array<int, 4> leaf{};
  for (std::size_t i = 0; i < 4; ++i) {
    auto id = t.find_leaf(q[i]);
    if (!id) throw DataError("quartet_topology: unknown taxon '" + q[i] + "'");
    leaf[i] = *id;
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      if (leaf[i] == leaf[j]) throw DataError("quartet_topology: repeated taxon");
  LcaIndex index(t);
  auto d = [&](std::size_t i, std::size_t j) { return index.depth(index.lca(leaf[i], leaf[j])); };
  return detail::classify(d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2));
}

// Depth of the LCA for every pair of taxa, row-major over the frozen taxon
// index (sorted leaf labels).
template <typename Depth>
std::vector<Depth> pairwise_lca_depths(const Phylogeny& t, const std::vector<std::string>& taxa) {
  const std::size_t n = taxa.size();
  std::unordered_map<std::string_view, int> leaf_of;
  for (std::size_t i = 0; i < t.node_count(); ++i)
    if (t.is_leaf(static_cast<int>(i))) leaf_of.emplace(t.node(static_cast<int>(i)).label, static_cast<int>(i));
  std::vector<int> leaf(n);
  for (std::size_t i = 0; i < n; ++i) leaf[i] = leaf_of.at(taxa[i]);
  LcaIndex index(t);
  std::vector<Depth> out(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = static_cast<Depth>(index.depth(leaf[i]));
    for (std::size_t j = i + 1; j < n; ++j) {
      auto v = static_cast<Depth>(index.depth(index.lca(leaf[i], leaf[j])));
      out[i * n + j] = v;
      out[j * n + i] = v;
    }
  }
  return out;
}

struct QuartetCounts {
  std::uint64_t resolved_both = 0;
  std::uint64_t conflicting = 0;
  std::uint64_t resolved_reference = 0;

  QuartetCounts& operator+=(const QuartetCounts& o) {
    resolved_both += o.resolved_both;
    conflicting += o.conflicting;
    resolved_reference += o.resolved_reference;
    return *this;
  }
};

namespace detail {

// Butterfly code for one quartet: 0 unresolved, 1/2/3 for the three pairings.
template <typename Sum>
inline unsigned butterfly(Sum s1, Sum s2, Sum s3) {
  const unsigned c1 = (s1 > s2) & (s1 > s3);
  const unsigned c2 = (s2 > s1) & (s2 > s3);
  const unsigned c3 = (s3 > s1) & (s3 > s2);
  return c1 | (c2 << 1) | (c3 * 3u);
}

// Counts all quartets whose smallest taxon index is `a`.
template <typename Depth>
QuartetCounts count_quartets_from(std::size_t a, std::size_t n, const Depth* x, const Depth* y) {
  using Sum = std::int32_t;
  QuartetCounts out;
  const Depth* xa = x + a * n;
  const Depth* ya = y + a * n;
  for (std::size_t b = a + 1; b < n; ++b) {
    const Depth* xb = x + b * n;
    const Depth* yb = y + b * n;
    const Sum xab = xa[b];
    const Sum yab = ya[b];
    for (std::size_t c = b + 1; c < n; ++c) {
      const Depth* xc = x + c * n;
      const Depth* yc = y + c * n;
      const Sum xac = xa[c], xbc = xb[c];
      const Sum yac = ya[c], ybc = yb[c];
      std::uint32_t both = 0, conflict = 0, ref = 0;
      for (std::size_t d = c + 1; d < n; ++d) {
        const unsigned tx = butterfly<Sum>(xab + xc[d], xac + xb[d], xbc + xa[d]);
        const unsigned ty = butterfly<Sum>(yab + yc[d], yac + yb[d], ybc + ya[d]);
        const unsigned resolved = (tx != 0) & (ty != 0);
        both += resolved;
        conflict += resolved & (tx != ty);
        ref += (ty != 0);
      }
      out.resolved_both += both;
      out.conflicting += conflict;
      out.resolved_reference += ref;
    }
  }
  return out;
}

template <typename Depth>
QuartetCounts count_quartets(const Phylogeny& first, const Phylogeny& reference,
                             const std::vector<std::string>& taxa, unsigned threads) {
  const std::size_t n = taxa.size();
  const auto x = pairwise_lca_depths<Depth>(first, taxa);
  const auto y = pairwise_lca_depths<Depth>(reference, taxa);
  if (n < 4) return {};
  // Work is partitioned by the smallest taxon index of each quartet; the
  // partial counts are integers, so the total does not depend on scheduling.
  const std::size_t chunks = n - 3;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  std::vector<QuartetCounts> partial(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t a; (a = next.fetch_add(1)) < chunks;)
      partial[a] = count_quartets_from<Depth>(a, n, x.data(), y.data());
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  QuartetCounts total;
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace detail

inline unsigned default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Quartet tallies between `first` and `reference` over their common leaf set.
inline QuartetCounts quartet_counts(const Phylogeny& first, const Phylogeny& reference,
                                    unsigned threads = default_thread_count()) {
  detail::require_same_leaves(first, reference);
  const auto taxa = first.leaf_labels();
  const std::size_t max_nodes = std::max(first.node_count(), reference.node_count());
  // Sums of two depths must fit the kernel's signed 32-bit accumulator.
  if (max_nodes < std::numeric_limits<std::uint16_t>::max())
    return detail::count_quartets<std::uint16_t>(first, reference, taxa, threads);
  return detail::count_quartets<std::uint32_t>(first, reference, taxa, threads);
}

inline DistanceResult gq_distance(const Phylogeny& inferred, const Phylogeny& reference,
                                  unsigned threads = default_thread_count()) {
  detail::require_same_leaves(inferred, reference);
  if (inferred.leaf_count() < 5) throw DataError("GQ distance needs more than 4 taxa");
  if (!inferred.is_binary()) throw DataError("GQ distance expects a strictly binary inferred tree");
  const auto counts = quartet_counts(inferred, reference, threads);
  if (counts.resolved_both == 0)
    throw DataError("GQ distance undefined: reference resolves no quartet (star topology)");
  return make_distance(Metric::gq, counts.conflicting, counts.resolved_both);
}

}  // namespace cognatree
