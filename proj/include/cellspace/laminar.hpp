#pragma once

// Finite cellular structures. A laminar family of point sets that contains
// the whole space and every singleton is the same thing as a rooted tree
// whose leaves are the points; CellTree stores that tree in a canonical form:
//
//   * every internal cell has at least two children (equal point sets are
//     one cell),
//   * children are ordered by their smallest point index,
//   * cells are numbered in preorder, so the root is CellId{0} and every
//     cell's leaves occupy a contiguous range of `leaf_order()`.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cellspace/errors.hpp"

namespace cellspace {

enum class CellId : std::uint32_t {};

constexpr std::size_t index(CellId c) noexcept { return static_cast<std::size_t>(c); }
constexpr CellId cell_id(std::size_t i) noexcept { return static_cast<CellId>(i); }

using PointIndex = std::size_t;

/// Whether `validate_family` rejects a family that lacks some singleton
/// (strict) or inserts the missing singletons (lenient).
enum class BaseMode { strict, lenient };

/// A plain rooted tree, used as the interchange form for tree/cell duality
/// and as input to `ray_space`. Labels are only read on leaves.
struct AbstractTree {
  std::vector<std::vector<std::size_t>> children;
  std::vector<std::optional<std::string>> labels;
  std::size_t root = 0;

  [[nodiscard]] std::size_t vertex_count() const noexcept { return children.size(); }

  std::size_t add_vertex(std::optional<std::string> label = std::nullopt) {
    children.emplace_back();
    labels.push_back(std::move(label));
    return children.size() - 1;
  }

  void add_edge(std::size_t parent, std::size_t child) { children.at(parent).push_back(child); }
};

class CellTree;

namespace detail {

inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Rooted tree given by parent pointers. Leaves carry a point index; vertices
// without points below them are discarded and unary chains are collapsed.
struct RawTree {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> point;
  std::uint32_t root = 0;

  std::uint32_t add(std::uint32_t parent_vertex, std::uint32_t point_index = kNone) {
    parent.push_back(parent_vertex);
    point.push_back(point_index);
    return static_cast<std::uint32_t>(parent.size() - 1);
  }
};

CellTree build_canonical(std::vector<std::string> labels, const RawTree& raw);

}  // namespace detail

class CellTree {
 public:
  [[nodiscard]] std::size_t point_count() const noexcept { return d_->labels.size(); }
  [[nodiscard]] std::size_t cell_count() const noexcept { return d_->parent.size(); }

  [[nodiscard]] std::span<const std::string> labels() const noexcept { return d_->labels; }
  [[nodiscard]] const std::string& label(PointIndex p) const { return d_->labels.at(p); }

  [[nodiscard]] std::optional<PointIndex> find(std::string_view label) const {
    for (std::size_t i = 0; i < d_->labels.size(); ++i)
      if (d_->labels[i] == label) return i;
    return std::nullopt;
  }

  [[nodiscard]] static constexpr CellId root() noexcept { return CellId{0}; }

  [[nodiscard]] std::optional<CellId> parent(CellId c) const {
    const std::uint32_t p = d_->parent[index(c)];
    if (p == detail::kNone) return std::nullopt;
    return cell_id(p);
  }

  /// Maximal proper sub-cells, ordered by smallest point index.
  [[nodiscard]] std::span<const CellId> children(CellId c) const {
    const std::size_t i = index(c);
    return std::span<const CellId>(d_->child_ids).subspan(d_->child_begin[i],
                                                          d_->child_begin[i + 1] - d_->child_begin[i]);
  }

  [[nodiscard]] std::size_t depth(CellId c) const { return d_->depth[index(c)]; }
  [[nodiscard]] std::size_t height() const noexcept { return d_->height; }
  [[nodiscard]] bool is_leaf(CellId c) const { return children(c).empty(); }

  /// The singleton cell {p}.
  [[nodiscard]] CellId leaf(PointIndex p) const { return d_->leaf_of_point.at(p); }

  /// The single point of a leaf cell.
  [[nodiscard]] PointIndex point_of(CellId leaf_cell) const {
    return d_->leaf_order[d_->leaf_begin[index(leaf_cell)]];
  }

  /// Points of `c`, in leaf order (left to right in the canonical tree).
  [[nodiscard]] std::span<const PointIndex> points(CellId c) const {
    const std::size_t i = index(c);
    return std::span<const PointIndex>(d_->leaf_order).subspan(d_->leaf_begin[i], d_->leaf_end[i] - d_->leaf_begin[i]);
  }

  [[nodiscard]] std::size_t size(CellId c) const {
    return d_->leaf_end[index(c)] - d_->leaf_begin[index(c)];
  }

  [[nodiscard]] std::span<const PointIndex> leaf_order() const noexcept { return d_->leaf_order; }

  /// Position of `p` in `leaf_order()`.
  [[nodiscard]] std::size_t leaf_rank(PointIndex p) const { return d_->leaf_begin[index(leaf(p))]; }

  /// Half-open range of `leaf_order()` occupied by `c`.
  [[nodiscard]] std::pair<std::size_t, std::size_t> leaf_range(CellId c) const {
    return {d_->leaf_begin[index(c)], d_->leaf_end[index(c)]};
  }

  [[nodiscard]] bool contains(CellId c, PointIndex p) const {
    const std::size_t r = leaf_rank(p);
    return d_->leaf_begin[index(c)] <= r && r < d_->leaf_end[index(c)];
  }

  /// True when `inner` is a subset of `outer` (including equality).
  [[nodiscard]] bool contains(CellId outer, CellId inner) const {
    return d_->leaf_begin[index(outer)] <= d_->leaf_begin[index(inner)] &&
           d_->leaf_end[index(inner)] <= d_->leaf_end[index(outer)];
  }

  [[nodiscard]] bool disjoint(CellId a, CellId b) const { return !contains(a, b) && !contains(b, a); }

  /// Ancestor of `c` at the given depth (must not exceed depth(c)).
  [[nodiscard]] CellId ancestor_at(CellId c, std::size_t target_depth) const {
    while (depth(c) > target_depth) c = cell_id(d_->parent[index(c)]);
    return c;
  }

  /// Lowest common ancestor of two cells.
  [[nodiscard]] CellId meet(CellId a, CellId b) const {
    while (depth(a) > depth(b)) a = cell_id(d_->parent[index(a)]);
    while (depth(b) > depth(a)) b = cell_id(d_->parent[index(b)]);
    while (a != b) {
      a = cell_id(d_->parent[index(a)]);
      b = cell_id(d_->parent[index(b)]);
    }
    return a;
  }

  friend bool operator==(const CellTree& a, const CellTree& b) {
    if (a.d_ == b.d_) return true;
    return a.d_->labels == b.d_->labels && a.d_->parent == b.d_->parent && a.d_->leaf_order == b.d_->leaf_order;
  }

 private:
  struct Data {
    std::vector<std::string> labels;
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> depth;
    std::vector<std::uint32_t> child_begin;
    std::vector<CellId> child_ids;
    std::vector<std::uint32_t> leaf_begin;
    std::vector<std::uint32_t> leaf_end;
    std::vector<PointIndex> leaf_order;
    std::vector<CellId> leaf_of_point;
    std::uint32_t height = 0;
  };

  explicit CellTree(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  friend CellTree detail::build_canonical(std::vector<std::string> labels, const detail::RawTree& raw);

  std::shared_ptr<const Data> d_;
};

/// Human-readable point set of a cell, e.g. "{00,01}".
inline std::string describe(const CellTree& t, CellId c, std::size_t max_points = 8) {
  std::string out = "{";
  const auto pts = t.points(c);
  for (std::size_t i = 0; i < pts.size() && i < max_points; ++i) {
    if (i != 0) out += ",";
    out += t.label(pts[i]);
  }
  if (pts.size() > max_points) out += ",...";
  return out + "}";
}

namespace detail {

inline void check_labels(const std::vector<std::string>& labels) {
  if (labels.empty()) throw Error(Errc::invalid_argument, "a cellular space needs at least one point");
  if (labels.size() >= kNone) throw Error(Errc::invalid_argument, "too many points");
  std::unordered_map<std::string_view, std::size_t> seen;
  seen.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = seen.emplace(labels[i], i);
    if (!inserted)
      throw Error(Errc::duplicate_label, "point label '" + labels[i] + "' is used twice", {it->second, i});
  }
}

inline CellTree build_canonical(std::vector<std::string> labels, const RawTree& raw) {
  const std::size_t n = labels.size();
  const std::size_t nv = raw.parent.size();
  if (nv == 0 || raw.point.size() != nv || raw.root >= nv)
    throw Error(Errc::invalid_argument, "malformed tree");

  // Children in CSR form, in the order vertices were given.
  std::vector<std::uint32_t> begin(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    if (v == raw.root) {
      if (raw.parent[v] != kNone) throw Error(Errc::invalid_argument, "root has a parent");
      continue;
    }
    if (raw.parent[v] >= nv) throw Error(Errc::invalid_argument, "vertex without a valid parent");
    ++begin[raw.parent[v] + 1];
  }
  std::partial_sum(begin.begin(), begin.end(), begin.begin());
  std::vector<std::uint32_t> kids(nv == 0 ? 0 : nv - 1);
  {
    std::vector<std::uint32_t> fill(begin.begin(), begin.end() - 1);
    for (std::size_t v = 0; v < nv; ++v)
      if (v != raw.root) kids[fill[raw.parent[v]]++] = static_cast<std::uint32_t>(v);
  }

  // Breadth-first order; anything unreached means a cycle or a second root.
  std::vector<std::uint32_t> order;
  order.reserve(nv);
  order.push_back(raw.root);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::uint32_t v = order[i];
    for (std::uint32_t k = begin[v]; k < begin[v + 1]; ++k) order.push_back(kids[k]);
  }
  if (order.size() != nv) throw Error(Errc::invalid_argument, "parent pointers do not form a rooted tree");

  std::vector<std::uint32_t> count(nv, 0);
  std::vector<std::uint32_t> min_point(nv, kNone);
  std::vector<std::uint32_t> kept_children(nv, 0);
  std::vector<std::uint32_t> rep(nv, kNone);
  std::vector<std::uint8_t> point_seen(n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::uint32_t v = *it;
    if (raw.point[v] != kNone) {
      if (begin[v] != begin[v + 1]) throw Error(Errc::invalid_argument, "a vertex with children carries a point");
      const std::uint32_t p = raw.point[v];
      if (p >= n) throw Error(Errc::invalid_argument, "point index out of range");
      if (point_seen[p]) throw Error(Errc::duplicate_leaf_label, "point '" + labels[p] + "' sits on two leaves", {p});
      point_seen[p] = 1;
      count[v] = 1;
      min_point[v] = p;
      rep[v] = v;
      continue;
    }
    std::uint32_t single = kNone;
    for (std::uint32_t k = begin[v]; k < begin[v + 1]; ++k) {
      const std::uint32_t c = kids[k];
      if (count[c] == 0) continue;
      count[v] += count[c];
      min_point[v] = std::min(min_point[v], min_point[c]);
      ++kept_children[v];
      single = c;
    }
    if (count[v] != 0) rep[v] = kept_children[v] == 1 ? rep[single] : v;
  }
  if (count[raw.root] != n) {
    for (std::size_t p = 0; p < n; ++p)
      if (!point_seen[p]) throw Error(Errc::invalid_argument, "point '" + labels[p] + "' is on no leaf", {p});
  }

  auto data = std::make_shared<CellTree::Data>();
  data->labels = std::move(labels);
  data->leaf_of_point.assign(n, CellId{0});
  data->leaf_order.reserve(n);

  // Preorder numbering with children sorted by smallest point.
  struct Frame {
    std::uint32_t vertex;
    std::uint32_t parent_id;
    std::uint32_t depth;
  };
  std::vector<Frame> stack{{rep[raw.root], kNone, 0}};
  std::vector<std::uint32_t> sorted_kids;
  std::vector<std::uint32_t> vertex_of_id;
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const auto id = static_cast<std::uint32_t>(data->parent.size());
    data->parent.push_back(f.parent_id);
    data->depth.push_back(f.depth);
    data->leaf_begin.push_back(static_cast<std::uint32_t>(data->leaf_order.size()));
    data->height = std::max(data->height, f.depth);
    vertex_of_id.push_back(f.vertex);
    if (raw.point[f.vertex] != kNone) {
      data->leaf_of_point[raw.point[f.vertex]] = cell_id(id);
      data->leaf_order.push_back(raw.point[f.vertex]);
      continue;
    }
    sorted_kids.clear();
    for (std::uint32_t k = begin[f.vertex]; k < begin[f.vertex + 1]; ++k)
      if (count[kids[k]] != 0) sorted_kids.push_back(rep[kids[k]]);
    std::sort(sorted_kids.begin(), sorted_kids.end(),
              [&](std::uint32_t a, std::uint32_t b) { return min_point[a] < min_point[b]; });
    for (auto k = sorted_kids.rbegin(); k != sorted_kids.rend(); ++k) stack.push_back({*k, id, f.depth + 1});
  }

  const std::size_t cells = data->parent.size();
  data->child_begin.assign(cells + 1, 0);
  for (std::size_t c = 1; c < cells; ++c) ++data->child_begin[data->parent[c] + 1];
  std::partial_sum(data->child_begin.begin(), data->child_begin.end(), data->child_begin.begin());
  data->child_ids.resize(cells - 1);
  {
    std::vector<std::uint32_t> fill(data->child_begin.begin(), data->child_begin.end() - 1);
    for (std::size_t c = 1; c < cells; ++c) data->child_ids[fill[data->parent[c]]++] = cell_id(c);
  }
  data->leaf_end.assign(cells, 0);
  for (std::size_t c = cells; c-- > 0;) {
    const std::uint32_t b = data->child_begin[c];
    const std::uint32_t e = data->child_begin[c + 1];
    data->leaf_end[c] = b == e ? data->leaf_begin[c] + 1 : data->leaf_end[index(data->child_ids[e - 1])];
  }
  return CellTree(std::move(data));
}

}  // namespace detail

/// Checks that `subsets` (point indices into `labels`) form a cellular
/// structure and returns its canonical tree. Duplicate sets are merged.
inline CellTree validate_family(std::vector<std::string> labels, std::vector<std::vector<PointIndex>> subsets,
                                BaseMode mode = BaseMode::strict) {
  detail::check_labels(labels);
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    auto& s = subsets[i];
    if (s.empty()) throw Error(Errc::empty_cell, "subset #" + std::to_string(i) + " is empty", {i});
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.back() >= n) throw Error(Errc::invalid_argument, "subset #" + std::to_string(i) + " names an unknown point");
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  subsets.erase(std::unique(subsets.begin(), subsets.end()), subsets.end());
  if (subsets.empty() || subsets.front().size() != n)
    throw Error(Errc::missing_root, "the family does not contain the whole point set");

  auto render = [&](const std::vector<PointIndex>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size() && i < 8; ++i) out += (i ? "," : "") + labels[s[i]];
    return out + (s.size() > 8 ? ",...}" : "}");
  };

  // Sets in decreasing size; owner[p] is the smallest set seen so far that
  // contains p. A laminar family sends every point of a set to one owner.
  std::vector<std::uint32_t> owner(n, 0);
  std::vector<std::uint32_t> parent(subsets.size(), detail::kNone);
  std::vector<std::uint8_t> in_set(n, 0);
  for (std::uint32_t si = 1; si < subsets.size(); ++si) {
    const auto& s = subsets[si];
    const std::uint32_t host = owner[s.front()];
    for (PointIndex p : s) {
      if (owner[p] == host) continue;
      const std::uint32_t other_owner = owner[p];
      const bool host_has_p = std::binary_search(subsets[host].begin(), subsets[host].end(), p);
      const std::uint32_t other = host_has_p ? other_owner : host;
      const PointIndex common = host_has_p ? p : s.front();
      const PointIndex only_here = host_has_p ? s.front() : p;
      for (PointIndex q : s) in_set[q] = 1;
      PointIndex only_there = 0;
      for (PointIndex q : subsets[other])
        if (!in_set[q]) {
          only_there = q;
          break;
        }
      throw Error(Errc::overlap,
                  render(s) + " and " + render(subsets[other]) + " overlap without nesting (both contain " +
                      labels[common] + "; " + labels[only_here] + " is only in the first, " + labels[only_there] +
                      " only in the second)",
                  {common, only_here, only_there});
    }
    parent[si] = host;
    for (PointIndex p : s) owner[p] = si;
  }

  std::vector<std::uint8_t> has_singleton(n, 0);
  for (const auto& s : subsets)
    if (s.size() == 1) has_singleton[s.front()] = 1;

  detail::RawTree raw;
  raw.root = 0;
  for (std::uint32_t si = 0; si < subsets.size(); ++si)
    raw.add(parent[si], subsets[si].size() == 1 ? static_cast<std::uint32_t>(subsets[si].front()) : detail::kNone);
  for (std::size_t p = 0; p < n; ++p) {
    if (has_singleton[p]) continue;
    if (mode == BaseMode::strict)
      throw Error(Errc::not_a_base, "singleton {" + labels[p] + "} is not a cell", {p});
    raw.add(owner[p], static_cast<std::uint32_t>(p));
  }
  return detail::build_canonical(std::move(labels), raw);
}

/// Maximal proper sub-cells of `c` (empty for a leaf).
inline std::vector<CellId> children(const CellTree& t, CellId c) {
  const auto kids = t.children(c);
  return {kids.begin(), kids.end()};
}

/// The strictly increasing chain of cells above `c`, nearest first.
inline std::vector<CellId> ancestors(const CellTree& t, CellId c) {
  std::vector<CellId> chain;
  chain.reserve(t.depth(c));
  for (auto p = t.parent(c); p; p = t.parent(*p)) chain.push_back(*p);
  return chain;
}

/// Smallest cell containing both points; the leaf {x} when x == y.
inline CellId minimal_cell(const CellTree& t, PointIndex x, PointIndex y) { return t.meet(t.leaf(x), t.leaf(y)); }

/// The cells maximal among those contained in `subset`; they are pairwise
/// disjoint and their union is `subset`. Listed in preorder.
inline std::vector<CellId> decompose_clopen(const CellTree& t, std::span<const PointIndex> subset) {
  const std::size_t n = t.point_count();
  std::vector<std::uint8_t> member(n, 0);
  for (PointIndex p : subset) {
    if (p >= n) throw Error(Errc::invalid_argument, "point index out of range", {p});
    member[p] = 1;
  }
  // prefix[k] = members among the first k points in leaf order
  std::vector<std::size_t> prefix(n + 1, 0);
  const auto order = t.leaf_order();
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + member[order[k]];

  std::vector<CellId> out;
  std::vector<CellId> stack{t.root()};
  while (!stack.empty()) {
    const CellId c = stack.back();
    stack.pop_back();
    const auto [b, e] = t.leaf_range(c);
    const std::size_t inside = prefix[e] - prefix[b];
    if (inside == 0) continue;
    if (inside == e - b) {
      out.push_back(c);
      continue;
    }
    const auto kids = t.children(c);
    for (auto k = kids.rbegin(); k != kids.rend(); ++k) stack.push_back(*k);
  }
  return out;
}

/// Extends pairwise-disjoint cells to a partition of the space into cells.
inline std::vector<CellId> complete_partition(const CellTree& t, std::span<const CellId> cells) {
  std::vector<CellId> sorted(cells.begin(), cells.end());
  for (CellId c : sorted)
    if (index(c) >= t.cell_count()) throw Error(Errc::invalid_argument, "unknown cell", {index(c)});
  std::sort(sorted.begin(), sorted.end(),
            [&](CellId a, CellId b) { return t.leaf_range(a).first < t.leaf_range(b).first; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const CellId a = sorted[i - 1];
    const CellId b = sorted[i];
    if (t.leaf_range(b).first < t.leaf_range(a).second)
      throw Error(Errc::not_disjoint,
                  describe(t, a) + " and " + describe(t, b) + " share point " + t.label(t.points(b).front()),
                  {index(a), index(b), t.points(b).front()});
  }
  std::vector<std::uint8_t> covered(t.point_count(), 0);
  for (CellId c : sorted)
    for (PointIndex p : t.points(c)) covered[p] = 1;
  std::vector<PointIndex> rest;
  for (PointIndex p = 0; p < t.point_count(); ++p)
    if (!covered[p]) rest.push_back(p);
  std::vector<CellId> out = decompose_clopen(t, rest);
  out.insert(out.end(), sorted.begin(), sorted.end());
  std::sort(out.begin(), out.end());
  return out;
}

/// The induced structure {C ∩ Y : C ∩ Y nonempty} on a nonempty subset Y.
/// Points keep their labels and relative order.
inline CellTree induced_substructure(const CellTree& t, std::span<const PointIndex> subset) {
  if (subset.empty()) throw Error(Errc::empty_subset, "the induced structure needs a nonempty subset");
  std::vector<std::uint32_t> new_index(t.point_count(), detail::kNone);
  for (PointIndex p : subset) {
    if (p >= t.point_count()) throw Error(Errc::invalid_argument, "point index out of range", {p});
    new_index[p] = 0;
  }
  std::vector<std::string> labels;
  for (PointIndex p = 0; p < t.point_count(); ++p)
    if (new_index[p] != detail::kNone) {
      new_index[p] = static_cast<std::uint32_t>(labels.size());
      labels.push_back(t.label(p));
    }
  detail::RawTree raw;
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const auto parent = t.parent(cell_id(c));
    const std::uint32_t pv = parent ? static_cast<std::uint32_t>(index(*parent)) : detail::kNone;
    const std::uint32_t pt = t.is_leaf(cell_id(c)) ? new_index[t.point_of(cell_id(c))] : detail::kNone;
    raw.add(pv, pt);
  }
  return detail::build_canonical(std::move(labels), raw);
}

/// The rooted tree whose vertices are the cells (vertex i is CellId{i}).
inline AbstractTree tree_of(const CellTree& t) {
  AbstractTree out;
  out.children.resize(t.cell_count());
  out.labels.resize(t.cell_count());
  out.root = index(t.root());
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    for (CellId k : t.children(cell_id(c))) out.children[c].push_back(index(k));
    if (t.is_leaf(cell_id(c))) out.labels[c] = t.label(t.point_of(cell_id(c)));
  }
  return out;
}

namespace detail {

// Parent array and a depth-first list of leaves; throws unless `tree` is a
// tree rooted at tree.root.
inline std::pair<RawTree, std::vector<std::size_t>> raw_from_abstract(const AbstractTree& tree) {
  const std::size_t nv = tree.vertex_count();
  if (nv == 0 || tree.root >= nv) throw Error(Errc::invalid_argument, "empty tree");
  if (nv >= kNone) throw Error(Errc::invalid_argument, "tree too large");
  RawTree raw;
  raw.parent.assign(nv, kNone);
  raw.point.assign(nv, kNone);
  raw.root = static_cast<std::uint32_t>(tree.root);
  std::vector<std::size_t> leaves;
  std::vector<std::uint8_t> seen(nv, 0);
  std::vector<std::size_t> stack{tree.root};
  seen[tree.root] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (tree.children[v].empty()) leaves.push_back(v);
    for (auto k = tree.children[v].rbegin(); k != tree.children[v].rend(); ++k) {
      if (*k >= nv || seen[*k]) throw Error(Errc::invalid_argument, "not a tree (vertex reached twice)", {*k});
      seen[*k] = 1;
      raw.parent[*k] = static_cast<std::uint32_t>(v);
      stack.push_back(*k);
    }
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (!seen[v]) throw Error(Errc::invalid_argument, "vertex unreachable from the root", {v});
  return {std::move(raw), std::move(leaves)};
}

}  // namespace detail

/// Cells of a leaf-labelled rooted tree: each vertex becomes the set of
/// leaf labels below it. Points are ordered depth-first.
inline CellTree cells_of(const AbstractTree& tree) {
  auto [raw, leaves] = detail::raw_from_abstract(tree);
  std::vector<std::string> labels;
  labels.reserve(leaves.size());
  std::unordered_map<std::string_view, std::size_t> first_vertex;
  for (std::size_t v : leaves) {
    if (tree.labels.size() <= v || !tree.labels[v])
      throw Error(Errc::invalid_argument, "leaf vertex " + std::to_string(v) + " has no label", {v});
    auto [it, inserted] = first_vertex.emplace(*tree.labels[v], v);
    if (!inserted)
      throw Error(Errc::duplicate_leaf_label, "leaf label '" + *tree.labels[v] + "' appears twice", {it->second, v});
    raw.point[v] = static_cast<std::uint32_t>(labels.size());
    labels.push_back(*tree.labels[v]);
  }
  return detail::build_canonical(std::move(labels), raw);
}

/// True when both trees have the same labels and the same cells as label
/// sets, regardless of point order.
inline bool equivalent(const CellTree& a, const CellTree& b) {
  if (a.point_count() != b.point_count() || a.cell_count() != b.cell_count()) return false;
  std::unordered_map<std::string_view, std::size_t> to_b;
  for (std::size_t p = 0; p < b.point_count(); ++p) to_b.emplace(b.label(p), p);
  auto family = [](const CellTree& t, auto&& map_point) {
    std::vector<std::vector<std::size_t>> sets;
    sets.reserve(t.cell_count());
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
      std::vector<std::size_t> s;
      for (PointIndex p : t.points(cell_id(c))) s.push_back(map_point(p));
      std::sort(s.begin(), s.end());
      sets.push_back(std::move(s));
    }
    std::sort(sets.begin(), sets.end());
    return sets;
  };
  for (std::size_t p = 0; p < a.point_count(); ++p)
    if (!to_b.contains(a.label(p))) return false;
  const auto fa = family(a, [&](PointIndex p) { return to_b.at(a.label(p)); });
  const auto fb = family(b, [](PointIndex p) { return p; });
  return fa == fb;
}

/// Unlabelled rooted-tree isomorphism (AHU canonical numbering).
inline bool isomorphic(const CellTree& a, const CellTree& b) {
  if (a.cell_count() != b.cell_count() || a.point_count() != b.point_count()) return false;
  std::map<std::vector<std::size_t>, std::size_t> shapes;
  auto encode = [&](const CellTree& t) {
    std::vector<std::size_t> code(t.cell_count());
    for (std::size_t c = t.cell_count(); c-- > 0;) {
      std::vector<std::size_t> key;
      for (CellId k : t.children(cell_id(c))) key.push_back(code[index(k)]);
      std::sort(key.begin(), key.end());
      code[c] = shapes.emplace(std::move(key), shapes.size()).first->second;
    }
    return code[0];
  };
  return encode(a) == encode(b);
}

}  // namespace cellspace
