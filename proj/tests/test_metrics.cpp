#include <gtest/gtest.h>

#include <functional>

#include "corpus.hpp"
#include "oracles.hpp"

using namespace cellspace;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

MetricTable line(std::vector<long> xs) {
  std::vector<std::string> labels;
  std::vector<Rational> entries;
  for (std::size_t i = 0; i < xs.size(); ++i) labels.push_back(std::to_string(i));
  for (long a : xs)
    for (long b : xs) entries.push_back(q(a > b ? a - b : b - a));
  return MetricTable::from_dense(labels, entries);
}

}  // namespace

TEST(WeightFromSequence, Examples) {
  const CellTree t = product_space({{2, 2, 2}});
  const WeightFn w = weight_from_sequence(t, corpus::geometric(q(1, 3), 3));
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const CellId id = cell_id(c);
    const Rational expected = t.is_leaf(id) ? q(0) : pow(q(1, 3), t.depth(id));
    EXPECT_EQ(w(id), expected);
  }
  EXPECT_EQ(w(CellTree::root()), q(1));

  const CellTree t2 = product_space({{2, 2}});
  const std::vector<Rational> rho{q(1), q(1, 2), q(1, 4)};
  const WeightFn w2 = weight_from_sequence(t2, rho);
  EXPECT_EQ(w2(CellTree::root()), q(1));
  EXPECT_EQ(w2(t2.children(CellTree::root())[0]), q(1, 2));
  EXPECT_EQ(w2(t2.leaf(0)), q(0));

  EXPECT_EQ(error_of([&] { weight_from_sequence(t2, std::vector<Rational>{q(1), q(1, 2), q(3, 5)}); }),
            Errc::not_decreasing);
  EXPECT_EQ(error_of([&] { weight_from_sequence(t2, std::vector<Rational>{q(1)}); }), Errc::depth_mismatch);
  const CellTree ragged = validate_family({"a", "b", "c"}, {{0, 1, 2}, {0, 1}, {0}, {1}, {2}});
  EXPECT_EQ(error_of([&] { weight_from_sequence(ragged, std::vector<Rational>{q(1), q(1, 2)}); }), Errc::depth_mismatch);
}

TEST(WeightFn, RejectsInvalidWeights) {
  const CellTree t = product_space({{2, 2}});
  std::vector<Rational> w(t.cell_count(), q(0));
  w[0] = 1;
  for (CellId k : t.children(CellTree::root())) w[index(k)] = 1;  // not strictly smaller
  EXPECT_EQ(error_of([&] { WeightFn::make(t, w); }), Errc::invalid_weight);
  for (CellId k : t.children(CellTree::root())) w[index(k)] = q(1, 2);
  w[index(t.leaf(0))] = q(1, 8);  // leaf must weigh 0
  EXPECT_EQ(error_of([&] { WeightFn::make(t, w); }), Errc::invalid_weight);
}

TEST(UltrametricFromWeight, ProductFormula) {
  const CellTree t = product_space({{2, 2, 2}});
  const MetricTable m = ultrametric_from_weight(t, weight_from_sequence(t, corpus::geometric(q(1, 3), 3)));
  // agree in exactly the first two coordinates
  EXPECT_EQ(m.at(*t.find("010"), *t.find("011")), q(1, 9));
  EXPECT_EQ(m.at(*t.find("010"), *t.find("000")), q(1, 3));
  EXPECT_EQ(m.at(*t.find("010"), *t.find("110")), q(1));
  for (PointIndex x = 0; x < t.point_count(); ++x) EXPECT_EQ(m.at(x, x), 0);
  EXPECT_TRUE(validate_ultrametric(m).ok);
}

TEST(UltrametricFromWeight, MatchesSmallestCellOracle) {
  Rng rng(21);
  for (const auto& s : corpus::spaces(48)) {
    const WeightFn w = corpus::random_weight(s.tree, rng);
    const auto expected = oracle::weight_distances(s.tree, w.values());
    EXPECT_EQ(oracle::dense(ultrametric_from_weight(s.tree, w)), expected) << s.name;
  }
}

TEST(ValidateUltrametric, CollinearWitness) {
  const auto v = validate_ultrametric(line({0, 1, 2}));
  ASSERT_FALSE(v.ok);
  EXPECT_EQ(v.witness->a, 0U);
  EXPECT_EQ(v.witness->b, 2U);
  EXPECT_EQ(v.witness->via, 1U);
  EXPECT_EQ(v.witness->slack, q(1));
}

TEST(ValidateUltrametric, MiddleThirdsIsNotUltrametric) {
  const auto c = cantor(2);
  const auto v = validate_ultrametric(euclidean_table(c.tree, c.embedding));
  EXPECT_FALSE(v.ok);
  EXPECT_TRUE(v.witness.has_value());
}

TEST(ValidateMetric, TriangleInequality) {
  EXPECT_TRUE(validate_metric(line({0, 1, 5, 7})).ok);
  // 0-1: 1, 1-2: 1, 0-2: 3 breaks the triangle inequality
  const MetricTable bad = MetricTable::from_dense({"a", "b", "c"}, {q(0), q(1), q(3), q(1), q(0), q(1), q(3), q(1), q(0)});
  const auto v = validate_metric(bad);
  ASSERT_FALSE(v.ok);
  EXPECT_EQ(v.witness->a, 0U);
  EXPECT_EQ(v.witness->b, 2U);
  EXPECT_EQ(v.witness->slack, q(1));
}

TEST(MetricTable, RejectsMalformedMatrices) {
  EXPECT_EQ(error_of([] { MetricTable::from_dense({"a", "b"}, {q(0), q(1), q(2), q(0)}); }), Errc::invalid_metric);
  EXPECT_EQ(error_of([] { MetricTable::from_dense({"a", "b"}, {q(1), q(1), q(1), q(0)}); }), Errc::invalid_metric);
  EXPECT_EQ(error_of([] { MetricTable::from_dense({"a", "b"}, {q(0), q(0), q(0), q(0)}); }), Errc::invalid_metric);
  // within tolerance
  const auto m = MetricTable::from_dense({"a", "b"}, {q(0), q(1), q(1001, 1000), q(0)}, q(1, 100));
  EXPECT_EQ(m.at(0, 1), q(1));
}

TEST(Geometry, DiameterAndSeparation) {
  const auto c = cantor(2);
  const Geometry g = Geometry::from_intervals(c.tree, c.embedding);
  EXPECT_EQ(cell_diameter(g, CellTree::root()), q(1));
  const auto kids = c.tree.children(CellTree::root());
  EXPECT_EQ(cell_separation(g, kids[0], kids[1]), q(1, 3));
  EXPECT_EQ(error_of([&] { cell_separation(g, CellTree::root(), kids[0]); }), Errc::overlapping_cells);

  const CellTree t = product_space({{3, 2, 2}});
  const WeightFn w = weight_from_sequence(t, corpus::geometric(q(2, 5), 3));
  const Geometry table = Geometry::from_table(t, ultrametric_from_weight(t, w));
  const Geometry direct = Geometry::from_weight(t, w);
  for (std::size_t i = 0; i < t.cell_count(); ++i) {
    EXPECT_EQ(cell_diameter(table, cell_id(i)), w(cell_id(i)));
    EXPECT_EQ(cell_diameter(direct, cell_id(i)), w(cell_id(i)));
  }
}

TEST(Geometry, TableAcceptsPermutedLabels) {
  const CellTree t = product_space({{2, 2}});
  const MetricTable m = ultrametric_from_weight(t, weight_from_sequence(t, corpus::geometric(q(1, 2), 2)));
  const std::vector<std::string> reversed{"11", "10", "01", "00"};
  const Geometry g = Geometry::from_table(t, m.reordered(reversed));
  EXPECT_EQ(g.distance(0, 1), q(1, 2));
  EXPECT_EQ(error_of([&] { Geometry::from_table(product_space({{2}}), m); }), Errc::point_set_mismatch);
}

TEST(BallsEqualCells, WeightMetricsPass) {
  Rng rng(4);
  for (const auto& s : corpus::spaces(64)) {
    const WeightFn w = corpus::random_weight(s.tree, rng);
    const auto v = balls_equal_cells(s.tree, ultrametric_from_weight(s.tree, w));
    EXPECT_TRUE(v.ok) << s.name;
  }
}

TEST(BallsEqualCells, FatCantorFailsWithGapBall) {
  for (std::size_t depth = 3; depth <= 6; ++depth) {
    const auto f = fat_cantor(depth);
    const MetricTable m = euclidean_table(f.tree, f.embedding);
    const auto v = balls_equal_cells(f.tree, m);
    ASSERT_FALSE(v.ok) << depth;
    ASSERT_TRUE(v.ball_witness.has_value()) << depth;
    // Independently: the witness ball is not one of the cells.
    const auto [x, r] = *v.ball_witness;
    const auto ball = oracle::ball(oracle::dense(m), x, r);
    const auto cells = oracle::family(f.tree);
    EXPECT_EQ(std::find(cells.begin(), cells.end(), ball), cells.end()) << depth;
    EXPECT_GT(r, 0);
  }
}

TEST(BallsEqualCells, MatchesBruteForce) {
  // Exhaustive check of direction (b) over all realized radii and midpoints.
  auto brute = [](const CellTree& t, const MetricTable& m) {
    const auto d = oracle::dense(m);
    const auto cells = oracle::family(t);
    for (PointIndex x = 0; x < t.point_count(); ++x)
      for (const auto& r : oracle::radii(d, x)) {
        const auto b = oracle::ball(d, x, r);
        if (std::find(cells.begin(), cells.end(), b) == cells.end()) return false;
      }
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
      const auto& cell = cells[c];
      Rational diam = 0;
      for (auto a : cell)
        for (auto b : cell) diam = std::max(diam, d[a][b]);
      for (auto x : cell)
        if (oracle::ball(d, x, diam) != cell) return false;
    }
    return true;
  };
  for (std::size_t depth = 1; depth <= 4; ++depth) {
    for (const auto& s : {cantor(depth), fat_cantor(depth)}) {
      const MetricTable m = euclidean_table(s.tree, s.embedding);
      EXPECT_EQ(balls_equal_cells(s.tree, m).ok, brute(s.tree, m)) << depth;
    }
  }
  EXPECT_TRUE(balls_equal_cells(validate_family({"p"}, {{0}}), MetricTable::from_dense({"p"}, {q(0)})).ok);
}

TEST(StrictDiameterMonotonicity, Examples) {
  const CellTree t = product_space({{2, 3}});
  EXPECT_TRUE(strict_diameter_monotonicity(Geometry::from_weight(t, weight_from_sequence(t, corpus::geometric(q(1, 2), 2)))).ok);
  const auto c = cantor(4);
  EXPECT_TRUE(strict_diameter_monotonicity(Geometry::from_intervals(c.tree, c.embedding)).ok);
  // a table metric where a child is as wide as its parent
  const CellTree flat = validate_family({"a", "b", "c"}, {{0, 1, 2}, {0, 1}, {0}, {1}, {2}});
  const MetricTable m = MetricTable::from_dense({"a", "b", "c"}, {q(0), q(2), q(2), q(2), q(0), q(2), q(2), q(2), q(0)});
  const auto v = strict_diameter_monotonicity(Geometry::from_table(flat, m));
  ASSERT_FALSE(v.ok);
  EXPECT_EQ(v.witness->first, CellTree::root());
}

TEST(WeightMetrics, SiblingMaximumIdentity) {
  Rng rng(8);
  for (const auto& s : corpus::spaces(64)) {
    const CellTree& t = s.tree;
    const WeightFn w = corpus::random_weight(t, rng);
    const Geometry g = Geometry::from_table(t, ultrametric_from_weight(t, w));
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
      const auto kids = t.children(cell_id(c));
      for (std::size_t i = 0; i < kids.size(); ++i)
        for (std::size_t j = i + 1; j < kids.size(); ++j) {
          const Rational top = std::max({g.diameter(kids[i]), g.diameter(kids[j]), g.separation(kids[i], kids[j])});
          EXPECT_EQ(top, g.diameter(cell_id(c))) << s.name;
          for (PointIndex x : t.points(kids[i]))
            for (PointIndex y : t.points(kids[j])) EXPECT_LE(g.distance(x, y), top);
        }
    }
  }
}
