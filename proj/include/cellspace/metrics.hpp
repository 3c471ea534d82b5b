#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cellspace/laminar.hpp"
#include "cellspace/rational.hpp"
#include "cellspace/spaces.hpp"

namespace cellspace {

/// Weight ρ on the cells of a tree: zero exactly on leaves and strictly
/// decreasing from every cell to each of its children.
class WeightFn {
 public:
  static WeightFn make(const CellTree& t, std::vector<Rational> values) {
    if (values.size() != t.cell_count())
      throw Error(Errc::invalid_weight, std::to_string(values.size()) + " weights for " +
                                            std::to_string(t.cell_count()) + " cells");
    for (std::size_t c = 0; c < values.size(); ++c) {
      const CellId id = cell_id(c);
      if (t.is_leaf(id) && values[c] != 0)
        throw Error(Errc::invalid_weight, "leaf " + describe(t, id) + " has weight " + to_string(values[c]), {c});
      if (!t.is_leaf(id) && values[c] <= 0)
        throw Error(Errc::invalid_weight, "cell " + describe(t, id) + " has nonpositive weight " + to_string(values[c]), {c});
      if (auto p = t.parent(id); p && !(values[c] < values[index(*p)]))
        throw Error(Errc::invalid_weight,
                    "weight does not decrease from " + describe(t, *p) + " to " + describe(t, id), {index(*p), c});
    }
    return WeightFn(std::move(values));
  }

  [[nodiscard]] const Rational& operator()(CellId c) const { return values_.at(index(c)); }
  [[nodiscard]] std::span<const Rational> values() const noexcept { return values_; }

 private:
  explicit WeightFn(std::vector<Rational> values) : values_(std::move(values)) {}
  std::vector<Rational> values_;
};

namespace detail {

// Sorted distinct values plus the position of every input value among them.
inline std::pair<std::vector<Rational>, std::vector<std::uint32_t>> intern(const std::vector<Rational>& raw) {
  std::vector<double> approx(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) approx[i] = to_double(raw[i]);
  std::vector<std::uint32_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0U);
  // Doubles decide whenever they are clearly apart; exact comparison otherwise.
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const double da = approx[a];
    const double db = approx[b];
    const double scale = std::max(std::abs(da), std::abs(db));
    if (std::abs(da - db) > 1e-9 * scale) return da < db;
    return raw[a] < raw[b];
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<Rational> values;
  std::vector<std::uint32_t> rank(raw.size());
  for (std::uint32_t i : order) {
    if (values.empty() || values.back() != raw[i]) values.push_back(raw[i]);
    rank[i] = static_cast<std::uint32_t>(values.size() - 1);
  }
  return {std::move(values), std::move(rank)};
}

}  // namespace detail

/// Symmetric distance matrix over labelled points. Distances are stored as
/// ranks into the sorted list of distinct values, so order comparisons are
/// integer comparisons; `values()[0]` is always 0.
class MetricTable {
 public:
  /// Row-major n×n entries. Rejects a nonzero diagonal, asymmetry, or a
  /// nonpositive off-diagonal entry, each beyond `tolerance`. The upper
  /// triangle is kept. The triangle inequality is checked separately by
  /// `validate_metric`.
  static MetricTable from_dense(std::vector<std::string> labels, const std::vector<Rational>& entries,
                                const Rational& tolerance = 0) {
    detail::check_labels(labels);
    const std::size_t n = labels.size();
    if (entries.size() != n * n) throw Error(Errc::invalid_metric, "matrix is not " + std::to_string(n) + "x" + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (abs(entries[i * n + i]) > tolerance)
        throw Error(Errc::invalid_metric, "d(" + labels[i] + "," + labels[i] + ") is not zero", {i, i});
      for (std::size_t j = i + 1; j < n; ++j) {
        if (abs(entries[i * n + j] - entries[j * n + i]) > tolerance)
          throw Error(Errc::invalid_metric, "d(" + labels[i] + "," + labels[j] + ") is not symmetric", {i, j});
        if (entries[i * n + j] <= tolerance)
          throw Error(Errc::invalid_metric, "d(" + labels[i] + "," + labels[j] + ") is not positive", {i, j});
      }
    }
    std::vector<Rational> upper;
    upper.reserve(n * (n - 1) / 2 + 1);
    upper.emplace_back(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) upper.push_back(entries[i * n + j]);
    return from_upper(std::move(labels), upper);
  }

  /// `upper` holds 0 followed by d(i,j) for i < j in row order.
  static MetricTable from_upper(std::vector<std::string> labels, const std::vector<Rational>& upper) {
    const std::size_t n = labels.size();
    auto [values, rank] = detail::intern(upper);
    if (values.front() != 0) throw Error(Errc::invalid_metric, "negative distance");
    std::vector<std::uint32_t> ranks(n * n, 0);
    std::size_t k = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++k) ranks[i * n + j] = ranks[j * n + i] = rank[k];
    return MetricTable(std::move(labels), std::move(values), std::move(ranks));
  }

  /// Direct construction from ranks; `values` must be sorted, distinct, and
  /// start with 0.
  static MetricTable from_ranks(std::vector<std::string> labels, std::vector<Rational> values,
                                std::vector<std::uint32_t> ranks) {
    const std::size_t n = labels.size();
    if (ranks.size() != n * n || values.empty() || values.front() != 0)
      throw Error(Errc::invalid_metric, "malformed rank table");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i - 1] < values[i])) throw Error(Errc::invalid_metric, "distance values are not sorted");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint32_t r = ranks[i * n + j];
        if (r >= values.size() || r != ranks[j * n + i] || (i == j) != (r == 0))
          throw Error(Errc::invalid_metric, "malformed rank table", {i, j});
      }
    return MetricTable(std::move(labels), std::move(values), std::move(ranks));
  }

  [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
  [[nodiscard]] std::span<const std::string> labels() const noexcept { return labels_; }
  [[nodiscard]] const Rational& at(std::size_t i, std::size_t j) const { return values_[rank(i, j)]; }
  [[nodiscard]] std::uint32_t rank(std::size_t i, std::size_t j) const { return ranks_[i * size() + j]; }
  [[nodiscard]] std::span<const Rational> values() const noexcept { return values_; }

  /// Number of distinct values <= r; d(i,j) <= r iff rank(i,j) < count_at_most(r).
  [[nodiscard]] std::uint32_t count_at_most(const Rational& r) const {
    return static_cast<std::uint32_t>(std::upper_bound(values_.begin(), values_.end(), r) - values_.begin());
  }

  [[nodiscard]] MetricTable scaled(const Rational& factor) const {
    if (factor <= 0) throw Error(Errc::invalid_argument, "scale factor must be positive");
    std::vector<Rational> values = values_;
    for (auto& v : values) v *= factor;
    return MetricTable(labels_, std::move(values), ranks_);
  }

  /// Same metric with points listed in the order of `labels`.
  [[nodiscard]] MetricTable reordered(std::span<const std::string> labels) const {
    if (labels.size() != size()) throw Error(Errc::point_set_mismatch, "point counts differ");
    std::unordered_map<std::string_view, std::size_t> where;
    for (std::size_t i = 0; i < size(); ++i) where.emplace(labels_[i], i);
    std::vector<std::size_t> from(size());
    for (std::size_t i = 0; i < size(); ++i) {
      auto it = where.find(labels[i]);
      if (it == where.end()) throw Error(Errc::point_set_mismatch, "no point labelled '" + labels[i] + "'");
      from[i] = it->second;
    }
    std::vector<std::uint32_t> ranks(ranks_.size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) ranks[i * size() + j] = rank(from[i], from[j]);
    return MetricTable(std::vector<std::string>(labels.begin(), labels.end()), values_, std::move(ranks));
  }

 private:
  MetricTable(std::vector<std::string> labels, std::vector<Rational> values, std::vector<std::uint32_t> ranks)
      : labels_(std::move(labels)), values_(std::move(values)), ranks_(std::move(ranks)) {}

  std::vector<std::string> labels_;
  std::vector<Rational> values_;
  std::vector<std::uint32_t> ranks_;
};

/// A violated three-point inequality: d(a,b) exceeds the bound through `via`
/// by `slack`.
struct TripleViolation {
  PointIndex a = 0;
  PointIndex b = 0;
  PointIndex via = 0;
  Rational slack;
};

struct TripleVerdict {
  bool ok = true;
  std::optional<TripleViolation> witness;
};

/// Checks d(a,b) <= max(d(a,m), d(m,b)) (+ tolerance) for all triples. The
/// witness is the lexicographically smallest violating (a, b, m) with a < b.
inline TripleVerdict validate_ultrametric(const MetricTable& m, const Rational& tolerance = 0) {
  const std::size_t n = m.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t v = 0; v < n; ++v) {
        if (v == a || v == b) continue;
        const std::uint32_t bound = std::max(m.rank(a, v), m.rank(v, b));
        if (m.rank(a, b) <= bound) continue;
        const Rational slack = m.at(a, b) - m.values()[bound];
        if (slack <= tolerance) continue;
        return {false, TripleViolation{a, b, v, slack}};
      }
  return {};
}

/// Triangle inequality d(a,b) <= d(a,m) + d(m,b) (+ tolerance).
inline TripleVerdict validate_metric(const MetricTable& m, const Rational& tolerance = 0) {
  const std::size_t n = m.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t v = 0; v < n; ++v) {
        if (v == a || v == b) continue;
        // d(a,b) <= max(..) already implies the triangle inequality
        if (m.rank(a, b) <= std::max(m.rank(a, v), m.rank(v, b))) continue;
        const Rational slack = m.at(a, b) - (m.at(a, v) + m.at(v, b));
        if (slack > tolerance) return {false, TripleViolation{a, b, v, slack}};
      }
  return {};
}

/// ρ(C) = rho[depth(C)] on internal cells of a product-space tree (every leaf
/// at the same depth L). `rho` holds ρ_0 = 1 > ρ_1 > ... and needs L or L+1
/// terms; a final ρ_L is accepted but unused since leaves weigh 0.
inline WeightFn weight_from_sequence(const CellTree& t, std::span<const Rational> rho) {
  const std::size_t depth = t.height();
  for (PointIndex p = 0; p < t.point_count(); ++p)
    if (t.depth(t.leaf(p)) != depth)
      throw Error(Errc::depth_mismatch, "leaf " + t.label(p) + " is not at depth " + std::to_string(depth), {p});
  if (rho.size() != depth && rho.size() != depth + 1)
    throw Error(Errc::depth_mismatch, "tree of depth " + std::to_string(depth) + " needs " + std::to_string(depth) +
                                          " or " + std::to_string(depth + 1) + " terms, got " + std::to_string(rho.size()));
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] <= 0) throw Error(Errc::not_decreasing, "term " + std::to_string(i) + " is not positive", {i});
    if (i > 0 && !(rho[i] < rho[i - 1]))
      throw Error(Errc::not_decreasing, "term " + std::to_string(i) + " does not decrease", {i - 1, i});
  }
  if (!rho.empty() && rho[0] != 1) throw Error(Errc::invalid_argument, "the sequence must start with 1");
  std::vector<Rational> values(t.cell_count());
  for (std::size_t c = 0; c < t.cell_count(); ++c)
    if (!t.is_leaf(cell_id(c))) values[c] = rho[t.depth(cell_id(c))];
  return WeightFn::make(t, std::move(values));
}

/// d(x,y) = ρ(minimal cell containing x and y), d(x,x) = 0.
inline MetricTable ultrametric_from_weight(const CellTree& t, const WeightFn& w) {
  const std::size_t n = t.point_count();
  std::vector<Rational> values{Rational(0)};
  for (std::size_t c = 0; c < t.cell_count(); ++c)
    if (!t.is_leaf(cell_id(c))) values.push_back(w(cell_id(c)));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<std::uint32_t> ranks(n * n, 0);
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const CellId id = cell_id(c);
    if (t.is_leaf(id)) continue;
    const auto r = static_cast<std::uint32_t>(std::lower_bound(values.begin(), values.end(), w(id)) - values.begin());
    const auto kids = t.children(id);
    for (std::size_t i = 0; i < kids.size(); ++i)
      for (std::size_t j = i + 1; j < kids.size(); ++j)
        for (PointIndex x : t.points(kids[i]))
          for (PointIndex y : t.points(kids[j])) ranks[x * n + y] = ranks[y * n + x] = r;
  }
  return MetricTable::from_ranks(std::vector<std::string>(t.labels().begin(), t.labels().end()), std::move(values),
                                 std::move(ranks));
}

/// Euclidean distances between the anchor points of an interval embedding.
inline MetricTable euclidean_table(const CellTree& t, const IntervalEmbedding& e) {
  validate_embedding(t, e);
  const auto anchors = anchor_points(t, e);
  const std::size_t n = t.point_count();
  std::vector<Rational> upper;
  upper.reserve(n * (n - 1) / 2 + 1);
  upper.emplace_back(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(abs(anchors[i] - anchors[j]));
  return MetricTable::from_upper(std::vector<std::string>(t.labels().begin(), t.labels().end()), upper);
}

namespace detail {

// Rank of the largest distance inside each cell, computed bottom-up.
inline std::vector<std::uint32_t> diameter_ranks(const CellTree& t, const MetricTable& m) {
  std::vector<std::uint32_t> diam(t.cell_count(), 0);
  for (std::size_t c = t.cell_count(); c-- > 0;) {
    const auto kids = t.children(cell_id(c));
    std::uint32_t best = 0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      best = std::max(best, diam[index(kids[i])]);
      for (std::size_t j = i + 1; j < kids.size(); ++j)
        for (PointIndex x : t.points(kids[i]))
          for (PointIndex y : t.points(kids[j])) best = std::max(best, m.rank(x, y));
    }
    diam[c] = best;
  }
  return diam;
}

inline void require_same_points(const CellTree& t, const MetricTable& m) {
  if (m.size() != t.point_count()) throw Error(Errc::point_set_mismatch, "metric and tree have different point counts");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.labels()[i] != t.label(i))
      throw Error(Errc::point_set_mismatch, "point " + std::to_string(i) + " is '" + t.label(i) + "' in the tree but '" +
                                                m.labels()[i] + "' in the metric", {i});
}

}  // namespace detail

/// A point metric on the points of a cell tree together with exact cell
/// diameters and separations. Three sources:
///   * table:       diameters/separations are max/min over point pairs,
///   * interval:    hull lengths and hull gaps of an interval embedding
///                  (point distances use the anchor points),
///   * ultrametric: d = ρ(minimal cell), evaluated on demand without a table.
class Geometry {
 public:
  enum class Kind { table, interval, ultrametric };

  static Geometry from_table(CellTree t, MetricTable m) {
    MetricTable ordered = m.reordered(t.labels());
    Geometry g(std::move(t), Kind::table);
    const auto ranks = detail::diameter_ranks(g.tree_, ordered);
    g.diameter_.reserve(ranks.size());
    for (std::uint32_t r : ranks) g.diameter_.push_back(ordered.values()[r]);
    g.table_ = std::move(ordered);
    return g;
  }

  static Geometry from_intervals(CellTree t, IntervalEmbedding e) {
    MetricTable m = euclidean_table(t, e);
    Geometry g(std::move(t), Kind::interval);
    g.hull_.reserve(g.tree_.cell_count());
    g.diameter_.reserve(g.tree_.cell_count());
    for (std::size_t c = 0; c < g.tree_.cell_count(); ++c) {
      g.hull_.push_back(hull(g.tree_, e, cell_id(c)));
      g.diameter_.push_back(g.hull_.back().length());
    }
    g.table_ = std::move(m);
    g.embedding_ = std::move(e);
    return g;
  }

  static Geometry from_weight(CellTree t, WeightFn w) {
    if (w.values().size() != t.cell_count()) throw Error(Errc::invalid_weight, "weight does not match the tree");
    Geometry g(std::move(t), Kind::ultrametric);
    g.diameter_.assign(w.values().begin(), w.values().end());
    g.weight_ = std::move(w);
    return g;
  }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const CellTree& tree() const noexcept { return tree_; }
  [[nodiscard]] bool has_table() const noexcept { return table_.has_value(); }

  [[nodiscard]] const MetricTable& table() const {
    if (!table_) throw Error(Errc::invalid_argument, "this geometry has no distance table");
    return *table_;
  }
  [[nodiscard]] const WeightFn& weight() const {
    if (!weight_) throw Error(Errc::invalid_argument, "this geometry has no weight function");
    return *weight_;
  }
  [[nodiscard]] const IntervalEmbedding& embedding() const {
    if (!embedding_) throw Error(Errc::invalid_argument, "this geometry has no interval embedding");
    return *embedding_;
  }

  [[nodiscard]] Rational distance(PointIndex x, PointIndex y) const {
    if (table_) return table_->at(x, y);
    if (x == y) return 0;
    return (*weight_)(minimal_cell(tree_, x, y));
  }

  [[nodiscard]] const Rational& diameter(CellId c) const { return diameter_.at(index(c)); }

  [[nodiscard]] Rational separation(CellId a, CellId b) const {
    if (!tree_.disjoint(a, b))
      throw Error(Errc::overlapping_cells, describe(tree_, a) + " and " + describe(tree_, b) + " intersect",
                  {index(a), index(b)});
    switch (kind_) {
      case Kind::ultrametric:
        return (*weight_)(tree_.meet(a, b));
      case Kind::interval: {
        const Interval& ha = hull_[index(a)];
        const Interval& hb = hull_[index(b)];
        return ha.right <= hb.left ? Rational(hb.left - ha.right) : Rational(ha.left - hb.right);
      }
      case Kind::table:
        break;
    }
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    for (PointIndex x : tree_.points(a))
      for (PointIndex y : tree_.points(b)) best = std::min(best, table_->rank(x, y));
    return table_->values()[best];
  }

 private:
  Geometry(CellTree t, Kind kind) : tree_(std::move(t)), kind_(kind) {}

  CellTree tree_;
  Kind kind_;
  std::optional<MetricTable> table_;
  std::optional<WeightFn> weight_;
  std::optional<IntervalEmbedding> embedding_;
  std::vector<Rational> diameter_;
  std::vector<Interval> hull_;
};

inline const Rational& cell_diameter(const Geometry& g, CellId c) { return g.diameter(c); }
inline Rational cell_separation(const Geometry& g, CellId a, CellId b) { return g.separation(a, b); }

struct BallCellVerdict {
  bool ok = true;
  /// (C, x): the closed ball around x ∈ C of radius diam C is not C.
  std::optional<std::pair<CellId, PointIndex>> cell_witness;
  /// (x, r): the closed ball B̄(x, r) is not a cell.
  std::optional<std::pair<PointIndex, Rational>> ball_witness;
};

/// Checks both directions of the ball/cell correspondence:
///  (a) every cell C equals B̄(x, diam C) for each x ∈ C;
///  (b) every closed ball of positive radius is a cell.
/// For (b) only the distances realized from each center matter: a ball of
/// radius r equals the ball whose radius is the largest realized distance
/// <= r, and radii below the smallest positive distance give {x}.
inline BallCellVerdict balls_equal_cells(const CellTree& t, const MetricTable& m) {
  detail::require_same_points(t, m);
  const std::size_t n = t.point_count();
  BallCellVerdict verdict;
  const auto diam = detail::diameter_ranks(t, m);

  std::vector<std::pair<std::uint32_t, PointIndex>> row(n);
  for (PointIndex x = 0; x < n; ++x) {
    for (PointIndex y = 0; y < n; ++y) row[y] = {m.rank(x, y), y};
    std::sort(row.begin(), row.end());

    for (std::optional<CellId> c = t.leaf(x); c; c = t.parent(*c)) {
      const std::uint32_t r = diam[index(*c)];
      const auto ball_size = static_cast<std::size_t>(
          std::upper_bound(row.begin(), row.end(), std::make_pair(r, std::numeric_limits<PointIndex>::max())) -
          row.begin());
      if (ball_size != t.size(*c)) {
        const std::pair<CellId, PointIndex> w{*c, x};
        if (!verdict.cell_witness || w < *verdict.cell_witness) verdict.cell_witness = w;
      }
    }

    if (verdict.ball_witness) continue;
    const CellId leaf = t.leaf(x);
    std::size_t shallowest = t.depth(leaf);
    for (std::size_t k = 1; k < n;) {
      const std::uint32_t r = row[k].first;
      for (; k < n && row[k].first == r; ++k)
        shallowest = std::min(shallowest, t.depth(t.meet(leaf, t.leaf(row[k].second))));
      if (t.size(t.ancestor_at(leaf, shallowest)) != k) {
        verdict.ball_witness = std::make_pair(x, m.values()[r]);
        break;
      }
    }
  }
  verdict.ok = !verdict.cell_witness && !verdict.ball_witness;
  return verdict;
}

struct EdgeVerdict {
  bool ok = true;
  /// (parent, child) of the first failing edge in preorder.
  std::optional<std::pair<CellId, CellId>> witness;
};

/// diam C' < diam C along every parent→child edge.
inline EdgeVerdict strict_diameter_monotonicity(const Geometry& g) {
  const CellTree& t = g.tree();
  for (std::size_t c = 1; c < t.cell_count(); ++c) {
    const CellId child = cell_id(c);
    const CellId parent = *t.parent(child);
    if (!(g.diameter(child) < g.diameter(parent))) return {false, std::make_pair(parent, child)};
  }
  return {};
}

}  // namespace cellspace
