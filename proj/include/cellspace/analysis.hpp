#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cellspace/laminar.hpp"
#include "cellspace/metrics.hpp"
#include "cellspace/rational.hpp"
#include "cellspace/spaces.hpp"

namespace cellspace {

/// Strictly positive point masses; μ(C) is the sum over the points of C.
class MeasureAtoms {
 public:
  static MeasureAtoms make(std::vector<Rational> atoms) {
    if (atoms.empty()) throw Error(Errc::invalid_argument, "a measure needs at least one atom");
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i] <= 0) throw Error(Errc::invalid_argument, "atom " + std::to_string(i) + " is not positive", {i});
    return MeasureAtoms(std::move(atoms));
  }

  static MeasureAtoms uniform(std::size_t n) { return make(std::vector<Rational>(n, Rational(1, static_cast<long>(n)))); }

  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] const Rational& atom(PointIndex p) const { return atoms_.at(p); }
  [[nodiscard]] std::span<const Rational> atoms() const noexcept { return atoms_; }

  [[nodiscard]] Rational total() const {
    Rational sum = 0;
    for (const auto& a : atoms_) sum += a;
    return sum;
  }

  [[nodiscard]] MeasureAtoms normalized() const {
    const Rational sum = total();
    std::vector<Rational> atoms = atoms_;
    for (auto& a : atoms) a /= sum;
    return MeasureAtoms(std::move(atoms));
  }

 private:
  explicit MeasureAtoms(std::vector<Rational> atoms) : atoms_(std::move(atoms)) {}
  std::vector<Rational> atoms_;
};

/// μ(C) for every cell, indexed by CellId.
inline std::vector<Rational> cell_masses(const CellTree& t, const MeasureAtoms& mu) {
  if (mu.size() != t.point_count()) throw Error(Errc::point_set_mismatch, "measure and tree have different point counts");
  std::vector<Rational> mass(t.cell_count());
  for (std::size_t c = t.cell_count(); c-- > 0;) {
    const CellId id = cell_id(c);
    if (t.is_leaf(id)) {
      mass[c] = mu.atom(t.point_of(id));
      continue;
    }
    for (CellId k : t.children(id)) mass[c] += mass[index(k)];
  }
  return mass;
}

/// Atoms of ∏ μ_i on the points of `product_space(spec)`: a point's atom is
/// the product of the weights of its coordinates.
inline MeasureAtoms product_measure(const ProductSpec& spec, const std::vector<std::vector<Rational>>& level_weights) {
  if (level_weights.size() != spec.sizes.size())
    throw Error(Errc::not_probability, std::to_string(level_weights.size()) + " weight vectors for " +
                                           std::to_string(spec.sizes.size()) + " levels");
  for (std::size_t i = 0; i < level_weights.size(); ++i) {
    if (level_weights[i].size() != spec.sizes[i])
      throw Error(Errc::not_probability, "level " + std::to_string(i) + " needs " + std::to_string(spec.sizes[i]) + " weights", {i});
    Rational sum = 0;
    for (const auto& w : level_weights[i]) {
      if (w <= 0) throw Error(Errc::not_probability, "level " + std::to_string(i) + " has a nonpositive weight", {i});
      sum += w;
    }
    if (sum != 1) throw Error(Errc::not_probability, "level " + std::to_string(i) + " sums to " + to_string(sum), {i});
  }
  std::vector<Rational> atoms{Rational(1)};
  for (const auto& level : level_weights) {
    std::vector<Rational> next;
    next.reserve(atoms.size() * level.size());
    for (const auto& a : atoms)
      for (const auto& w : level) next.push_back(a * w);
    atoms = std::move(next);
  }
  return MeasureAtoms::make(std::move(atoms));
}

struct CellDoubling {
  std::size_t k1 = 0;
  std::optional<CellId> witness;  // first cell in preorder with k1 children
};

/// Largest number of maximal proper sub-cells of any cell (0 for one point).
inline CellDoubling cell_doubling_constant(const CellTree& t) {
  CellDoubling result;
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const std::size_t k = t.children(cell_id(c)).size();
    if (k > result.k1) result = {k, cell_id(c)};
  }
  return result;
}

struct MeasureCellDoubling {
  Rational k2 = 1;
  std::optional<std::pair<CellId, CellId>> witness;  // (parent, child)
};

/// k2 = max over edges of μ(parent)/μ(child), so μ(C) <= k2·μ(C') for every
/// maximal proper sub-cell C' of C. 1 for a one-point space.
inline MeasureCellDoubling measure_cell_doubling(const CellTree& t, const MeasureAtoms& mu) {
  const auto mass = cell_masses(t, mu);
  MeasureCellDoubling result;
  for (std::size_t c = 1; c < t.cell_count(); ++c) {
    const CellId child = cell_id(c);
    const CellId parent = *t.parent(child);
    Rational ratio = mass[index(parent)] / mass[c];
    const auto at = std::make_pair(parent, child);
    if (!result.witness || ratio > result.k2 || (ratio == result.k2 && at < *result.witness))
      result = {std::move(ratio), at};
  }
  return result;
}

namespace detail {

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  [[nodiscard]] bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  [[nodiscard]] bool subset_of(const Bits& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }
  [[nodiscard]] std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  [[nodiscard]] bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  [[nodiscard]] std::optional<std::size_t> first() const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
    return std::nullopt;
  }
  Bits& operator-=(const Bits& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~o.words_[w];
    return *this;
  }
  Bits& operator&=(const Bits& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
    return *this;
  }
  bool operator==(const Bits&) const = default;
  auto operator<=>(const Bits&) const = default;

 private:
  std::vector<std::uint64_t> words_;
};

// Branch on the lowest uncovered element; every cover must use one of the
// sets containing it.
inline void exact_cover_search(const std::vector<Bits>& sets, const Bits& uncovered, std::size_t used,
                               std::size_t& best) {
  const auto e = uncovered.first();
  if (!e) {
    best = std::min(best, used);
    return;
  }
  if (used + 1 >= best) return;
  for (const Bits& s : sets) {
    if (!s.test(*e)) continue;
    Bits rest = uncovered;
    rest -= s;
    exact_cover_search(sets, rest, used + 1, best);
  }
}

inline constexpr std::size_t kExactCoverLimit = 20;

// Minimum number of `sets` covering `target` (each set already ⊆ target).
// Exact up to kExactCoverLimit undominated candidates, greedy beyond.
inline std::pair<std::size_t, bool> min_cover(std::vector<Bits> sets, const Bits& target) {
  std::erase_if(sets, [](const Bits& b) { return b.none(); });
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<Bits> kept;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < sets.size() && !dominated; ++j)
      dominated = j != i && sets[i].subset_of(sets[j]);
    if (!dominated) kept.push_back(sets[i]);
  }
  if (kept.size() <= kExactCoverLimit) {
    std::size_t best = kept.size() + 1;
    exact_cover_search(kept, target, 0, best);
    return {best, true};
  }
  Bits uncovered = target;
  std::size_t used = 0;
  while (!uncovered.none()) {
    std::size_t pick = 0;
    std::size_t gain = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      Bits overlap = kept[i];
      overlap &= uncovered;
      if (const std::size_t g = overlap.count(); g > gain) {
        gain = g;
        pick = i;
      }
    }
    uncovered -= kept[pick];
    ++used;
  }
  return {used, false};
}

// Radii probed around a center whose positive distances are `ds` (sorted,
// distinct): ds ∪ 2·ds, midpoints between consecutive values, and twice the
// largest. Every distinct ball B̄(x,r) and half-ball B̄(x,r/2) appears.
inline std::vector<Rational> probe_radii(const std::vector<Rational>& ds) {
  std::vector<Rational> s;
  for (const auto& d : ds) {
    s.push_back(d);
    s.push_back(2 * d);
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.empty()) return s;
  std::vector<Rational> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(s[i]);
    if (i + 1 < s.size()) out.push_back((s[i] + s[i + 1]) / 2);
  }
  out.push_back(2 * s.back());
  return out;
}

inline std::vector<Rational> positive_distances_from(const MetricTable& m, PointIndex x) {
  std::vector<std::uint32_t> ranks;
  for (PointIndex y = 0; y < m.size(); ++y)
    if (y != x) ranks.push_back(m.rank(x, y));
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  std::vector<Rational> ds;
  ds.reserve(ranks.size());
  for (auto r : ranks) ds.push_back(m.values()[r]);
  return ds;
}

// Maximal cells strictly inside `a` whose weight is at most `bound`.
template <class Visit>
void maximal_subcells_below(const CellTree& t, const WeightFn& w, CellId a, const Rational& bound, Visit&& visit) {
  std::vector<CellId> stack(t.children(a).rbegin(), t.children(a).rend());
  while (!stack.empty()) {
    const CellId c = stack.back();
    stack.pop_back();
    if (w(c) <= bound) {
      visit(c);
      continue;
    }
    const auto kids = t.children(c);
    stack.insert(stack.end(), kids.rbegin(), kids.rend());
  }
}

}  // namespace detail

struct MetricDoubling {
  std::size_t value = 1;
  bool exact = true;  // false when some ball fell back to a greedy cover
  PointIndex center = 0;
  Rational radius = 0;
};

/// Max over centers x and critical radii r of the fewest closed balls of
/// radius r/2 covering B̄(x, r). For weight-defined ultrametrics balls are
/// cells and the maximum sits at r = ρ(A) for some cell A, where the answer is
/// the number of maximal sub-cells of A with ρ <= ρ(A)/2.
inline MetricDoubling metric_doubling_constant(const Geometry& g) {
  const CellTree& t = g.tree();
  MetricDoubling result;
  if (g.kind() == Geometry::Kind::ultrametric) {
    const WeightFn& w = g.weight();
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
      const CellId a = cell_id(c);
      if (t.is_leaf(a)) continue;
      const Rational half = w(a) / 2;
      std::size_t count = 0;
      detail::maximal_subcells_below(t, w, a, half, [&](CellId) { ++count; });
      if (count > result.value) result = {count, true, t.points(a).front(), w(a)};
    }
    return result;
  }

  const MetricTable& m = g.table();
  const std::size_t n = m.size();
  for (PointIndex x = 0; x < n; ++x) {
    for (const Rational& r : detail::probe_radii(detail::positive_distances_from(m, x))) {
      const std::uint32_t full = m.count_at_most(r);
      const std::uint32_t half = m.count_at_most(r / 2);
      detail::Bits ball(n);
      for (PointIndex y = 0; y < n; ++y)
        if (m.rank(x, y) < full) ball.set(y);
      std::vector<detail::Bits> pieces;
      pieces.reserve(n);
      for (PointIndex c = 0; c < n; ++c) {
        detail::Bits piece(n);
        for (PointIndex y = 0; y < n; ++y)
          if (m.rank(c, y) < half && ball.test(y)) piece.set(y);
        pieces.push_back(std::move(piece));
      }
      auto [count, exact] = detail::min_cover(std::move(pieces), ball);
      result.exact = result.exact && exact;
      if (count > result.value) {
        result.value = count;
        result.center = x;
        result.radius = r;
      }
    }
  }
  return result;
}

struct MeasureDoubling {
  Rational value = 1;
  PointIndex center = 0;
  Rational radius = 0;
};

/// Max over centers and critical radii of μ(B̄(x,r)) / μ(B̄(x,r/2)).
inline MeasureDoubling measure_metric_doubling(const Geometry& g, const MeasureAtoms& mu) {
  const CellTree& t = g.tree();
  if (mu.size() != t.point_count()) throw Error(Errc::point_set_mismatch, "measure and space have different point counts");
  MeasureDoubling result;
  if (g.kind() == Geometry::Kind::ultrametric) {
    const WeightFn& w = g.weight();
    const auto mass = cell_masses(t, mu);
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
      const CellId a = cell_id(c);
      if (t.is_leaf(a)) continue;
      std::optional<CellId> lightest;
      detail::maximal_subcells_below(t, w, a, w(a) / 2, [&](CellId s) {
        if (!lightest || mass[index(s)] < mass[index(*lightest)]) lightest = s;
      });
      Rational ratio = mass[c] / mass[index(*lightest)];
      if (ratio > result.value) result = {std::move(ratio), t.points(*lightest).front(), w(a)};
    }
    return result;
  }

  const MetricTable& m = g.table();
  const std::size_t n = m.size();
  std::vector<std::pair<std::uint32_t, PointIndex>> row(n);
  std::vector<Rational> prefix(n + 1);
  std::vector<std::uint32_t> sorted_ranks(n);
  for (PointIndex x = 0; x < n; ++x) {
    for (PointIndex y = 0; y < n; ++y) row[y] = {m.rank(x, y), y};
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < n; ++i) {
      prefix[i + 1] = prefix[i] + mu.atom(row[i].second);
      sorted_ranks[i] = row[i].first;
    }
    auto ball_mass = [&](const Rational& r) -> const Rational& {
      const auto k = std::lower_bound(sorted_ranks.begin(), sorted_ranks.end(), m.count_at_most(r)) - sorted_ranks.begin();
      return prefix[static_cast<std::size_t>(k)];
    };
    for (const Rational& r : detail::probe_radii(detail::positive_distances_from(m, x))) {
      Rational ratio = ball_mass(r) / ball_mass(r / 2);
      if (ratio > result.value) result = {std::move(ratio), x, r};
    }
  }
  return result;
}

struct SequenceRegularity {
  Rational a;
  Rational b;
  bool pass = false;
};

/// a = min ρ_{i+1}/ρ_i and b = max of the same ratios. `bounds` = (lo, hi)
/// additionally requires lo <= a and b <= hi.
inline SequenceRegularity sequence_regularity(std::span<const Rational> rho,
                                              const std::optional<std::pair<Rational, Rational>>& bounds = {}) {
  if (rho.size() < 2) throw Error(Errc::invalid_argument, "need at least two terms");
  SequenceRegularity result;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] <= 0) throw Error(Errc::not_decreasing, "term " + std::to_string(i) + " is not positive", {i});
    if (i == 0) continue;
    if (!(rho[i] < rho[i - 1]))
      throw Error(Errc::not_decreasing, "term " + std::to_string(i) + " does not decrease", {i - 1, i});
    Rational q = rho[i] / rho[i - 1];
    if (i == 1 || q < result.a) result.a = q;
    if (i == 1 || q > result.b) result.b = q;
  }
  result.pass = result.b < 1 && (!bounds || (bounds->first <= result.a && result.b <= bounds->second));
  return result;
}

struct RegularityReport {
  /// Extremes of diam(child)/diam(parent) over edges whose child has positive
  /// diameter; empty when no such edge exists.
  std::optional<Rational> alpha;
  std::optional<Rational> beta;
  /// Min of dist(C',C'')/diam(C) over sibling pairs; empty without siblings.
  std::optional<Rational> gamma;
  /// Min of dist(C',C'')/max(diam C', diam C''); informational only.
  std::optional<Rational> sibling_ratio;
  std::optional<std::pair<CellId, CellId>> alpha_witness;  // (parent, child)
  std::optional<std::pair<CellId, CellId>> beta_witness;
  std::optional<std::pair<CellId, CellId>> gamma_witness;  // (C', C'')
  std::optional<std::pair<CellId, CellId>> sibling_witness;
  bool pass = true;
};

/// α, β, γ over the cells of `g`. Witnesses are the lexicographically
/// smallest cell pairs attaining each extreme.
inline RegularityReport metric_regularity(const Geometry& g) {
  const CellTree& t = g.tree();
  RegularityReport report;
  auto better = [](std::optional<Rational>& best, std::optional<std::pair<CellId, CellId>>& witness, Rational value,
                   std::pair<CellId, CellId> at, bool minimize) {
    const bool improves = !best || (minimize ? value < *best : value > *best);
    if (improves || (value == *best && at < *witness)) {
      best = std::move(value);
      witness = at;
    }
  };

  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const CellId parent = cell_id(c);
    if (t.is_leaf(parent)) continue;
    const Rational& dp = g.diameter(parent);
    if (dp <= 0) throw Error(Errc::zero_diameter_internal_cell, describe(t, parent) + " has zero diameter", {c});
    const auto kids = t.children(parent);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const Rational& dc = g.diameter(kids[i]);
      if (dc > 0) {
        const Rational q = dc / dp;
        better(report.alpha, report.alpha_witness, q, {parent, kids[i]}, true);
        better(report.beta, report.beta_witness, q, {parent, kids[i]}, false);
      }
      for (std::size_t j = i + 1; j < kids.size(); ++j) {
        const Rational sep = g.separation(kids[i], kids[j]);
        better(report.gamma, report.gamma_witness, sep / dp, {kids[i], kids[j]}, true);
        const Rational larger = std::max(dc, g.diameter(kids[j]));
        if (larger > 0) better(report.sibling_ratio, report.sibling_witness, sep / larger, {kids[i], kids[j]}, true);
      }
    }
  }
  report.pass = (!report.alpha || (*report.alpha > 0 && *report.beta < 1)) && (!report.gamma || *report.gamma > 0);
  return report;
}

/// ρ(C) = β^depth(C) on internal cells, 0 on leaves.
inline WeightFn synthesize_regular_weight(const CellTree& t, const Rational& beta) {
  if (!(beta > 0 && beta < 1)) throw Error(Errc::invalid_argument, "beta must lie in (0,1), got " + to_string(beta));
  std::vector<Rational> powers{Rational(1)};
  for (std::size_t d = 1; d <= t.height(); ++d) powers.push_back(powers.back() * beta);
  std::vector<Rational> values(t.cell_count());
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const CellId id = cell_id(c);
    // Canonical trees never have a unary cell; kept as a guard.
    if (t.children(id).size() == 1) throw Error(Errc::isolated_point, describe(t, id) + " has a single sub-cell", {c});
    if (!t.is_leaf(id)) values[c] = powers[t.depth(id)];
  }
  return WeightFn::make(t, std::move(values));
}

}  // namespace cellspace
