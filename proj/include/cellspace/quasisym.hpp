#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cellspace/laminar.hpp"
#include "cellspace/metrics.hpp"
#include "cellspace/rational.hpp"
#include "cellspace/spaces.hpp"

namespace cellspace {

/// (x, y, z) with x != y and x != z.
using Triple = std::array<PointIndex, 3>;

struct ProfilePoint {
  Rational r;  // d(x,y) / d(x,z)
  Rational s;  // d̃(x,y) / d̃(x,z)
  std::uint64_t count = 0;
  Triple witness{};  // lexicographically smallest triple giving (r, s)
};

struct EnvelopeStep {
  Rational t;  // a realized r
  Rational h;  // max s over pairs with r <= t
  Triple witness{};
};

struct DistortionProfile {
  std::vector<ProfilePoint> points;  // sorted by (r, s), distinct
  std::vector<EnvelopeStep> envelope;
  bool sampled = false;
  std::uint64_t triples = 0;
};

struct ProfileOptions {
  /// All triples are enumerated while Σ_x g_x² stays within this budget, g_x
  /// being the number of distinct (d, d̃) distance pairs seen from x.
  std::uint64_t max_exact_pairs = std::uint64_t{1} << 22;
  std::uint64_t seed = 0;
  /// Sampling strata: y is grouped by the depth of its minimal common cell
  /// with x. Without a tree, by rank of d(x,y) in 32 quantile bands.
  std::optional<CellTree> levels;
};

namespace detail {

struct QuadKey {
  std::uint32_t ai, aj, bi, bj;
  bool operator==(const QuadKey&) const = default;
};

struct QuadHash {
  std::size_t operator()(const QuadKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{k.ai} << 32 | k.aj) * 0x9E3779B97F4A7C15ULL;
    h ^= (std::uint64_t{k.bi} << 32 | k.bj) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct QuadValue {
  std::uint64_t count = 0;
  Triple witness{};
};

// One representative per class of y sharing (rank d, rank d̃) from x.
struct Group {
  std::uint32_t a;
  std::uint32_t b;
  PointIndex first;
  std::uint64_t size;
};

inline std::vector<Group> groups_from(const MetricTable& d, const MetricTable& dt, PointIndex x) {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, PointIndex>> ys;
  ys.reserve(d.size());
  for (PointIndex y = 0; y < d.size(); ++y)
    if (y != x) ys.emplace_back(d.rank(x, y), dt.rank(x, y), y);
  std::sort(ys.begin(), ys.end());
  std::vector<Group> out;
  for (const auto& [a, b, y] : ys) {
    if (!out.empty() && out.back().a == a && out.back().b == b) {
      ++out.back().size;
      continue;
    }
    out.push_back({a, b, y, 1});
  }
  return out;
}

inline std::vector<Group> sampled_from(const MetricTable& d, const MetricTable& dt, PointIndex x,
                                       const ProfileOptions& options, Rng& rng) {
  const std::size_t n = d.size();
  std::map<std::size_t, std::vector<PointIndex>> shells;
  if (options.levels) {
    const CellTree& t = *options.levels;
    const CellId lx = t.leaf(x);
    for (PointIndex y = 0; y < n; ++y)
      if (y != x) shells[t.depth(t.meet(lx, t.leaf(y)))].push_back(y);
  } else {
    const std::size_t bands = 32;
    const std::size_t v = d.values().size();
    for (PointIndex y = 0; y < n; ++y)
      if (y != x) shells[d.rank(x, y) * bands / v].push_back(y);
  }
  std::vector<PointIndex> picks;
  for (const auto& [level, ys] : shells) {
    auto by = [&](const MetricTable& m) {
      return [&m, x](PointIndex p, PointIndex q) { return std::pair(m.rank(x, p), p) < std::pair(m.rank(x, q), q); };
    };
    picks.push_back(*std::min_element(ys.begin(), ys.end(), by(d)));
    picks.push_back(*std::max_element(ys.begin(), ys.end(), by(d)));
    picks.push_back(*std::min_element(ys.begin(), ys.end(), by(dt)));
    picks.push_back(*std::max_element(ys.begin(), ys.end(), by(dt)));
    picks.push_back(ys[uniform_below(rng, ys.size())]);
  }
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  std::vector<Group> out;
  out.reserve(picks.size());
  for (PointIndex y : picks) out.push_back({d.rank(x, y), dt.rank(x, y), y, 1});
  return out;
}

// Total order on nonnegative rationals with a double fast path.
struct ApproxLess {
  bool operator()(double da, const Rational& a, double db, const Rational& b) const {
    const double scale = std::max(da, db);
    if (std::abs(da - db) > 1e-9 * scale) return da < db;
    return a < b;
  }
};

}  // namespace detail

/// Ratio pairs (r, s) over ordered triples (x, y, z) with y != x and z != x
/// (y = z allowed). Exact enumeration groups the y's around each x by their
/// (d, d̃) distance ranks, so the work is Σ_x g_x² rather than n³.
inline DistortionProfile distortion_profile(const MetricTable& d, const MetricTable& dt, const ProfileOptions& options = {}) {
  if (d.size() != dt.size()) throw Error(Errc::point_set_mismatch, "metrics have different point counts");
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.labels()[i] != dt.labels()[i])
      throw Error(Errc::point_set_mismatch, "point " + std::to_string(i) + " is '" + d.labels()[i] + "' vs '" +
                                                dt.labels()[i] + "'", {i});
  if (options.levels && options.levels->point_count() != d.size())
    throw Error(Errc::point_set_mismatch, "level tree has a different point count");
  const std::size_t n = d.size();

  std::vector<std::vector<detail::Group>> groups(n);
  std::uint64_t budget = 0;
  for (PointIndex x = 0; x < n; ++x) {
    groups[x] = detail::groups_from(d, dt, x);
    budget += static_cast<std::uint64_t>(groups[x].size()) * groups[x].size();
  }
  DistortionProfile profile;
  if (budget > options.max_exact_pairs) {
    profile.sampled = true;
    Rng rng(options.seed);
    for (PointIndex x = 0; x < n; ++x) groups[x] = detail::sampled_from(d, dt, x, options, rng);
  }

  std::unordered_map<detail::QuadKey, detail::QuadValue, detail::QuadHash> quads;
  for (PointIndex x = 0; x < n; ++x) {
    for (const auto& gi : groups[x])
      for (const auto& gj : groups[x]) {
        auto& v = quads[{gi.a, gj.a, gi.b, gj.b}];
        const Triple w{x, gi.first, gj.first};
        if (v.count == 0 || w < v.witness) v.witness = w;
        v.count += gi.size * gj.size;
      }
    groups[x].clear();
    groups[x].shrink_to_fit();
  }

  struct Raw {
    double rd, sd;
    Rational r, s;
    detail::QuadValue v;
  };
  std::vector<Raw> raw;
  raw.reserve(quads.size());
  for (const auto& [k, v] : quads) {
    Rational r = d.values()[k.ai] / d.values()[k.aj];
    Rational s = dt.values()[k.bi] / dt.values()[k.bj];
    const double rd = to_double(r);
    const double sd = to_double(s);
    raw.push_back({rd, sd, std::move(r), std::move(s), v});
  }
  quads = {};
  const detail::ApproxLess less;
  std::sort(raw.begin(), raw.end(), [&](const Raw& p, const Raw& q) {
    if (less(p.rd, p.r, q.rd, q.r)) return true;
    if (less(q.rd, q.r, p.rd, p.r)) return false;
    if (less(p.sd, p.s, q.sd, q.s)) return true;
    if (less(q.sd, q.s, p.sd, p.s)) return false;
    return p.v.witness < q.v.witness;
  });
  for (auto& item : raw) {
    profile.triples += item.v.count;
    if (!profile.points.empty() && profile.points.back().r == item.r && profile.points.back().s == item.s) {
      profile.points.back().count += item.v.count;  // sorted by witness, so the first one stays smallest
      continue;
    }
    profile.points.push_back({std::move(item.r), std::move(item.s), item.v.count, item.v.witness});
  }

  for (const auto& p : profile.points) {
    if (!profile.envelope.empty() && profile.envelope.back().t == p.r) {
      if (p.s > profile.envelope.back().h) profile.envelope.back() = {p.r, p.s, p.witness};
      continue;
    }
    if (profile.envelope.empty() || p.s > profile.envelope.back().h)
      profile.envelope.push_back({p.r, p.s, p.witness});
    else
      profile.envelope.push_back({p.r, profile.envelope.back().h, profile.envelope.back().witness});
  }
  return profile;
}

struct EnvelopeValue {
  Rational t;
  std::optional<Rational> h;  // empty when no realized ratio is <= t
  std::optional<Triple> witness;
};

/// H(t) = max { s : r <= t } at each grid value.
inline std::vector<EnvelopeValue> envelope_eval(const DistortionProfile& p, std::span<const Rational> grid) {
  std::vector<EnvelopeValue> out;
  out.reserve(grid.size());
  for (const Rational& t : grid) {
    if (t <= 0) throw Error(Errc::invalid_argument, "grid values must be positive");
    auto it = std::upper_bound(p.envelope.begin(), p.envelope.end(), t,
                               [](const Rational& v, const EnvelopeStep& e) { return v < e.t; });
    if (it == p.envelope.begin()) {
      out.push_back({t, std::nullopt, std::nullopt});
      continue;
    }
    --it;
    out.push_back({t, it->h, it->witness});
  }
  return out;
}

/// 2^-k, ..., 1/2, 1, 2, ..., 2^k.
inline std::vector<Rational> pow2_grid(std::size_t k) {
  std::vector<Rational> grid;
  for (std::size_t i = k; i > 0; --i) grid.push_back(Rational(1) / pow(Rational(2), i));
  for (std::size_t i = 0; i <= k; ++i) grid.push_back(pow(Rational(2), i));
  return grid;
}

struct QsVerdict {
  bool pass = true;
  std::string reason;
  std::optional<Rational> offending_t;
  std::optional<Triple> witness;
  std::optional<Rational> witness_r;
  std::optional<Rational> witness_s;
  std::vector<EnvelopeValue> eta;  // deepest envelope on the grid
};

/// Cross-depth verdict. `profiles` are ordered by increasing truncation depth.
///  * decay: on the deepest envelope, take the (up to) three smallest grid
///    values t < 1 where H is defined; H must strictly decrease as t does,
///    and stay below 1. Failure is reported at the smaller t of the first
///    offending pair.
///  * stability: H_deepest(t) <= H_previous(t') + tol, t' being the next grid
///    value above t, wherever both exist and t' does not exceed the largest
///    ratio realized at the previous depth (beyond it the shallower envelope
///    is flat only because it is truncated). The one-step slack absorbs the
///    staircase refining as new ratios appear; growth faster than one grid
///    step per depth pair fails.
inline QsVerdict qs_verdict(std::span<const DistortionProfile> profiles, std::span<const Rational> grid,
                            const Rational& tol) {
  if (profiles.size() < 2) throw Error(Errc::invalid_argument, "a verdict needs profiles at two or more depths");
  if (tol <= 0) throw Error(Errc::invalid_argument, "tolerance must be positive");
  std::vector<Rational> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (std::count_if(sorted.begin(), sorted.end(), [](const Rational& t) { return t < 1; }) < 3)
    throw Error(Errc::grid_too_coarse, "the grid needs at least three values below 1");

  const DistortionProfile& deep = profiles.back();
  const DistortionProfile& prev = profiles[profiles.size() - 2];
  QsVerdict verdict;
  verdict.eta = envelope_eval(deep, sorted);
  const auto before = envelope_eval(prev, sorted);

  auto fail = [&](std::string reason, const EnvelopeValue& at) {
    verdict.pass = false;
    verdict.reason = std::move(reason);
    verdict.offending_t = at.t;
    verdict.witness = at.witness;
    if (at.witness) {
      for (const auto& p : deep.points)
        if (p.witness == *at.witness && p.s == *at.h) {
          verdict.witness_r = p.r;
          verdict.witness_s = p.s;
          break;
        }
    }
    return verdict;
  };

  std::vector<const EnvelopeValue*> small;
  for (const auto& v : verdict.eta)
    if (v.t < 1 && v.h && small.size() < 3) small.push_back(&v);
  if (small.empty()) {
    verdict.pass = false;
    verdict.reason = "no realized ratio below 1";
    return verdict;
  }
  for (std::size_t i = 0; i + 1 < small.size(); ++i)
    if (!(*small[i]->h < *small[i + 1]->h)) return fail("envelope does not decay toward 0", *small[i]);
  if (!(*small.front()->h < 1)) return fail("envelope does not decay toward 0", *small.front());

  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (!verdict.eta[i].h || !before[i + 1].h || sorted[i + 1] > prev.envelope.back().t) continue;
    if (*verdict.eta[i].h > *before[i + 1].h + tol) return fail("envelope grows across depths", verdict.eta[i]);
  }
  return verdict;
}

}  // namespace cellspace
