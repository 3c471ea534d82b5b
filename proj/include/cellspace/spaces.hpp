#pragma once

// Generators for the standard example spaces. Infinite spaces are truncated
// at a finite depth L: two points of the truncation are distinct exactly when
// the infinite points they stand for separate at a level below L, so every
// quantity that only involves such pairs is represented exactly.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cellspace/laminar.hpp"
#include "cellspace/rational.hpp"

namespace cellspace {

/// Random numbers used by every generator: std::mt19937_64 seeded with the
/// 64-bit seed, bounded integers drawn by rejection (see `uniform_below`).
/// Both are fully specified, so a seed pins the output on every platform.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

/// Integer in [lo, hi].
inline std::uint64_t uniform_between(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + uniform_below(rng, hi - lo + 1);
}

/// Alphabet sizes (n_1, ..., n_L) of a finite product X_1 × ... × X_L.
struct ProductSpec {
  std::vector<std::size_t> sizes;

  [[nodiscard]] std::size_t depth() const noexcept { return sizes.size(); }
};

namespace detail {

inline constexpr std::size_t kMaxGeneratedPoints = std::size_t{1} << 25;

// Coordinates are written as digits when every alphabet fits in one digit,
// otherwise dot-separated.
inline std::string coordinate_label(std::span<const std::size_t> coords, bool compact) {
  std::string out;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!compact && i != 0) out += '.';
    out += std::to_string(coords[i]);
  }
  return out;
}

}  // namespace detail

/// Product cellular structure: the cells at depth l are the sets N_l(x) of
/// points agreeing with x in the first l coordinates. Points are listed in
/// lexicographic order of their coordinates.
inline CellTree product_space(const ProductSpec& spec) {
  if (spec.sizes.empty()) throw Error(Errc::bad_alphabet_size, "a product needs at least one factor");
  std::size_t points = 1;
  for (std::size_t i = 0; i < spec.sizes.size(); ++i) {
    if (spec.sizes[i] < 2)
      throw Error(Errc::bad_alphabet_size,
                  "factor " + std::to_string(i + 1) + " has " + std::to_string(spec.sizes[i]) + " elements", {i});
    if (points > detail::kMaxGeneratedPoints / spec.sizes[i])
      throw Error(Errc::invalid_argument, "product has too many points");
    points *= spec.sizes[i];
  }
  const bool compact = std::all_of(spec.sizes.begin(), spec.sizes.end(), [](std::size_t s) { return s <= 10; });

  detail::RawTree raw;
  raw.add(detail::kNone);
  std::size_t level_base = 0;
  std::size_t level_count = 1;
  for (std::size_t l = 0; l < spec.sizes.size(); ++l) {
    const bool last = l + 1 == spec.sizes.size();
    const std::size_t next_base = raw.parent.size();
    for (std::size_t j = 0; j < level_count * spec.sizes[l]; ++j)
      raw.add(static_cast<std::uint32_t>(level_base + j / spec.sizes[l]),
              last ? static_cast<std::uint32_t>(j) : detail::kNone);
    level_base = next_base;
    level_count *= spec.sizes[l];
  }

  std::vector<std::string> labels(points);
  std::vector<std::size_t> coords(spec.sizes.size());
  for (std::size_t j = 0; j < points; ++j) {
    std::size_t rest = j;
    for (std::size_t l = spec.sizes.size(); l-- > 0;) {
      coords[l] = rest % spec.sizes[l];
      rest /= spec.sizes[l];
    }
    labels[j] = detail::coordinate_label(coords, compact);
  }
  return detail::build_canonical(std::move(labels), raw);
}

/// Complete `arity`-ary tree of the given depth.
inline AbstractTree complete_tree(std::size_t arity, std::size_t depth) {
  AbstractTree t;
  t.add_vertex();
  std::vector<std::size_t> level{0};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::size_t> next;
    for (std::size_t v : level)
      for (std::size_t k = 0; k < arity; ++k) {
        const std::size_t w = t.add_vertex();
        t.add_edge(v, w);
        next.push_back(w);
      }
    level = std::move(next);
  }
  return t;
}

/// Space of rays of a finite rooted tree: one point per maximal path from
/// the root, one cell per vertex (the rays through it). Rays are labelled by
/// the child positions along the path, in the same style as product
/// coordinates, so the complete n-ary tree of depth L yields exactly
/// product_space((n, ..., n)).
inline CellTree ray_space(const AbstractTree& tree) {
  auto [raw, leaves] = detail::raw_from_abstract(tree);
  bool compact = true;
  for (const auto& kids : tree.children) compact = compact && kids.size() <= 10;

  std::vector<std::vector<std::size_t>> path(tree.vertex_count());
  std::vector<std::size_t> stack{tree.root};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t k = 0; k < tree.children[v].size(); ++k) {
      const std::size_t w = tree.children[v][k];
      path[w] = path[v];
      path[w].push_back(k);
      stack.push_back(w);
    }
  }
  std::vector<std::string> labels;
  labels.reserve(leaves.size());
  for (std::size_t v : leaves) {
    raw.point[v] = static_cast<std::uint32_t>(labels.size());
    labels.push_back(detail::coordinate_label(path[v], compact));
  }
  return detail::build_canonical(std::move(labels), raw);
}

struct Interval {
  Rational left;
  Rational right;

  [[nodiscard]] Rational length() const { return right - left; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Real-line realization of a binary split construction: one closed interval
/// per leaf (indexed by point) and the gap proportion used at each stage.
struct IntervalEmbedding {
  std::vector<Interval> leaves;
  std::vector<Rational> theta;
};

struct EmbeddedSpace {
  CellTree tree;
  IntervalEmbedding embedding;
};

/// Convex hull of the leaf intervals of `c`.
inline Interval hull(const CellTree& t, const IntervalEmbedding& e, CellId c) {
  const auto pts = t.points(c);
  return {e.leaves[pts.front()].left, e.leaves[pts.back()].right};
}

/// Checks that leaf intervals are nonempty, pairwise disjoint, and laid out
/// left to right in leaf order.
inline void validate_embedding(const CellTree& t, const IntervalEmbedding& e) {
  if (e.leaves.size() != t.point_count())
    throw Error(Errc::invalid_argument, "embedding has " + std::to_string(e.leaves.size()) + " intervals for " +
                                            std::to_string(t.point_count()) + " points");
  const auto order = t.leaf_order();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Interval& iv = e.leaves[order[k]];
    if (iv.right < iv.left) throw Error(Errc::invalid_argument, "interval of " + t.label(order[k]) + " is reversed", {order[k]});
    if (k > 0 && !(e.leaves[order[k - 1]].right < iv.left))
      throw Error(Errc::invalid_argument,
                  "intervals of " + t.label(order[k - 1]) + " and " + t.label(order[k]) + " are not disjoint and ordered",
                  {order[k - 1], order[k]});
  }
}

/// Position used for each point in Euclidean distance tables: the endpoint
/// of its leaf interval that faces the neighbouring sibling (right endpoint
/// for a first child, left endpoint otherwise). These endpoints survive in
/// the limit set.
inline std::vector<Rational> anchor_points(const CellTree& t, const IntervalEmbedding& e) {
  std::vector<Rational> out(t.point_count());
  for (PointIndex p = 0; p < t.point_count(); ++p) {
    const CellId c = t.leaf(p);
    const auto parent = t.parent(c);
    const bool first_child = parent && t.children(*parent).front() == c;
    out[p] = first_child ? e.leaves[p].right : e.leaves[p].left;
  }
  return out;
}

/// Binary split construction on [0, 1]: at stage n every interval of length
/// L is replaced by its two end pieces of length (1 - θ_n) L / 2, leaving a
/// middle gap of length θ_n L.
inline EmbeddedSpace split_construction(std::size_t depth, std::vector<Rational> theta) {
  if (depth == 0) throw Error(Errc::invalid_argument, "depth must be at least 1");
  if (theta.size() != depth)
    throw Error(Errc::bad_proportion,
                "need one proportion per stage (" + std::to_string(depth) + "), got " + std::to_string(theta.size()));
  for (std::size_t n = 0; n < theta.size(); ++n)
    if (theta[n] <= 0 || theta[n] >= 1)
      throw Error(Errc::bad_proportion, "stage " + std::to_string(n) + " proportion " + to_string(theta[n]) + " is not in (0,1)", {n});

  CellTree tree = product_space(ProductSpec{std::vector<std::size_t>(depth, 2)});
  std::vector<Interval> level{{Rational(0), Rational(1)}};
  for (std::size_t n = 0; n < depth; ++n) {
    std::vector<Interval> next;
    next.reserve(level.size() * 2);
    for (const Interval& iv : level) {
      const Rational piece = (1 - theta[n]) * iv.length() / 2;
      next.push_back({iv.left, iv.left + piece});
      next.push_back({iv.right - piece, iv.right});
    }
    level = std::move(next);
  }
  // product_space lists points in lexicographic order, which is left to right.
  return {std::move(tree), IntervalEmbedding{std::move(level), std::move(theta)}};
}

/// Middle-thirds Cantor set truncated at `depth`.
inline EmbeddedSpace cantor(std::size_t depth) {
  return split_construction(depth, std::vector<Rational>(depth, Rational(1, 3)));
}

/// θ_n = 2^-(n+2): gaps shrink to zero while the lengths keep a positive
/// product, so the limit set has positive measure.
inline std::vector<Rational> default_fat_theta(std::size_t depth) {
  std::vector<Rational> theta;
  theta.reserve(depth);
  for (std::size_t n = 0; n < depth; ++n) theta.push_back(Rational(1) / pow(Rational(2), n + 2));
  return theta;
}

inline EmbeddedSpace fat_cantor(std::size_t depth, std::vector<Rational> theta = {}) {
  if (theta.empty()) theta = default_fat_theta(depth);
  return split_construction(depth, std::move(theta));
}

struct RandomLaminarParams {
  std::uint64_t seed = 0;
  std::size_t max_branch = 3;
  std::size_t max_depth = 4;
  std::size_t points = 16;
};

/// Random canonical cell tree: points "p0".."p{n-1}" are shuffled, then the
/// space is split recursively into between 2 and max_branch parts, never
/// deeper than max_depth. Requires points <= max_branch^max_depth.
inline CellTree random_laminar(const RandomLaminarParams& params) {
  if (params.max_branch < 2) throw Error(Errc::invalid_argument, "max_branch must be at least 2");
  if (params.max_depth < 1) throw Error(Errc::invalid_argument, "max_depth must be at least 1");
  if (params.points < 1) throw Error(Errc::invalid_argument, "need at least one point");
  if (params.points > detail::kMaxGeneratedPoints) throw Error(Errc::invalid_argument, "too many points");

  // capacity[d] = most leaves a subtree rooted at depth d can hold
  std::vector<std::size_t> capacity(params.max_depth + 1, 1);
  for (std::size_t d = params.max_depth; d-- > 0;)
    capacity[d] = std::min(capacity[d + 1] * params.max_branch, detail::kMaxGeneratedPoints);
  if (params.points > capacity[0])
    throw Error(Errc::invalid_argument, std::to_string(params.points) + " points do not fit in a tree of depth " +
                                            std::to_string(params.max_depth) + " and branching " +
                                            std::to_string(params.max_branch));

  Rng rng(params.seed);
  std::vector<std::uint32_t> order(params.points);
  std::iota(order.begin(), order.end(), 0U);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);

  detail::RawTree raw;
  struct Task {
    std::size_t begin, end, depth;
    std::uint32_t parent;
  };
  std::vector<Task> stack{{0, params.points, 0, detail::kNone}};
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> open;
  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    const std::size_t count = task.end - task.begin;
    if (count == 1) {
      raw.add(task.parent, order[task.begin]);
      continue;
    }
    const std::uint32_t vertex = raw.add(task.parent);
    const std::size_t room = capacity[task.depth + 1];
    const std::size_t lo = std::max<std::size_t>(2, (count + room - 1) / room);
    const std::size_t hi = std::min(params.max_branch, count);
    const std::size_t branches = uniform_between(rng, lo, hi);
    sizes.assign(branches, 1);
    open.resize(branches);
    std::iota(open.begin(), open.end(), 0);
    for (std::size_t extra = count - branches; extra > 0; --extra) {
      const std::size_t pick = uniform_below(rng, open.size());
      if (++sizes[open[pick]] == room) {
        open[pick] = open.back();
        open.pop_back();
      }
    }
    std::size_t at = task.begin;
    std::vector<Task> kids;
    for (std::size_t s : sizes) {
      kids.push_back({at, at + s, task.depth + 1, vertex});
      at += s;
    }
    for (auto k = kids.rbegin(); k != kids.rend(); ++k) stack.push_back(*k);
  }

  std::vector<std::string> labels(params.points);
  for (std::size_t i = 0; i < params.points; ++i) labels[i] = "p" + std::to_string(i);
  return detail::build_canonical(std::move(labels), raw);
}

}  // namespace cellspace
