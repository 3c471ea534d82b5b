#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "corpus.hpp"
#include "oracles.hpp"

using namespace cellspace;

namespace {

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

std::vector<std::string> sizes_of(const CellTree& t, std::span<const CellId> cells) {
  std::vector<std::string> out;
  for (CellId c : cells) out.push_back(describe(t, c));
  return out;
}

CellTree binary2() { return product_space({{2, 2}}); }

std::vector<PointIndex> indices(const CellTree& t, std::initializer_list<const char*> labels) {
  std::vector<PointIndex> out;
  for (const char* l : labels) out.push_back(*t.find(l));
  return out;
}

}  // namespace

TEST(ValidateFamily, AcceptsNestedFamily) {
  const CellTree t = validate_family({"1", "2", "3"}, {{0, 1, 2}, {0, 1}, {0}, {1}, {2}});
  EXPECT_EQ(t.cell_count(), 5U);
  const auto kids = t.children(CellTree::root());
  ASSERT_EQ(kids.size(), 2U);
  EXPECT_EQ(describe(t, kids[0]), "{1,2}");
  EXPECT_EQ(describe(t, kids[1]), "{3}");
  EXPECT_EQ(sizes_of(t, t.children(kids[0])), (std::vector<std::string>{"{1}", "{2}"}));
}

TEST(ValidateFamily, RejectsOverlapWithWitness) {
  try {
    validate_family({"1", "2", "3"}, {{0, 1, 2}, {0, 1}, {1, 2}, {0}, {1}, {2}});
    FAIL() << "expected Overlap";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::overlap);
    ASSERT_EQ(e.witness().size(), 3U);
    // a shared point, one only in the first set, one only in the second
    EXPECT_EQ(e.witness()[0], 1U);
    EXPECT_EQ(std::set<std::size_t>({e.witness()[1], e.witness()[2]}), (std::set<std::size_t>{0, 2}));
  }
}

TEST(ValidateFamily, SinglePoint) {
  const CellTree t = validate_family({"1"}, {{0}});
  EXPECT_EQ(t.cell_count(), 1U);
  EXPECT_TRUE(t.is_leaf(CellTree::root()));
}

TEST(ValidateFamily, Errors) {
  EXPECT_EQ(error_of([] { validate_family({"1", "2"}, {{0, 1}, {}, {0}, {1}}); }), Errc::empty_cell);
  EXPECT_EQ(error_of([] { validate_family({"1", "2"}, {{0}, {1}}); }), Errc::missing_root);
  EXPECT_EQ(error_of([] { validate_family({"1", "2"}, {{0, 1}, {0}}); }), Errc::not_a_base);
  EXPECT_EQ(error_of([] { validate_family({"1", "1"}, {{0, 1}, {0}, {1}}); }), Errc::duplicate_label);
}

TEST(ValidateFamily, LenientModeInsertsSingletons) {
  const CellTree t = validate_family({"1", "2", "3"}, {{0, 1, 2}, {0, 1}}, BaseMode::lenient);
  EXPECT_EQ(t.cell_count(), 5U);
  const CellTree strict = validate_family({"1", "2", "3"}, {{0, 1, 2}, {0, 1}, {0}, {1}, {2}});
  EXPECT_EQ(t, strict);
}

TEST(ValidateFamily, DuplicatesAndUnaryChainsCollapse) {
  const CellTree t = validate_family({"a", "b"}, {{0, 1}, {1, 0}, {0}, {1}, {0}});
  EXPECT_EQ(t.cell_count(), 3U);
}

TEST(Children, Examples) {
  const CellTree t = binary2();
  EXPECT_EQ(sizes_of(t, children(t, CellTree::root())), (std::vector<std::string>{"{00,01}", "{10,11}"}));
  EXPECT_TRUE(children(t, t.leaf(0)).empty());

  const CellTree p = product_space({{3, 2}});
  const auto kids = children(p, CellTree::root());
  ASSERT_EQ(kids.size(), 3U);
  for (CellId k : kids) EXPECT_EQ(p.size(k), 2U);
}

TEST(Ancestors, Examples) {
  const CellTree t = product_space({{2, 2, 2}});
  EXPECT_TRUE(ancestors(t, CellTree::root()).empty());
  const auto chain = ancestors(t, t.leaf(*t.find("010")));
  ASSERT_EQ(chain.size(), 3U);
  EXPECT_EQ(t.size(chain[0]), 2U);
  EXPECT_EQ(t.size(chain[1]), 4U);
  EXPECT_EQ(t.size(chain[2]), 8U);
}

TEST(Ancestors, ChainsAreTotallyOrdered) {
  for (const auto& s : corpus::spaces(64)) {
    const CellTree& t = s.tree;
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
      const auto chain = ancestors(t, cell_id(c));
      EXPECT_EQ(chain.size(), t.depth(cell_id(c))) << s.name;
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        EXPECT_TRUE(t.contains(chain[i + 1], chain[i])) << s.name;
        EXPECT_LT(t.size(chain[i]), t.size(chain[i + 1])) << s.name;
      }
    }
  }
}

TEST(MinimalCell, Examples) {
  const CellTree t = binary2();
  EXPECT_EQ(describe(t, minimal_cell(t, *t.find("00"), *t.find("01"))), "{00,01}");
  EXPECT_EQ(minimal_cell(t, 2, 2), t.leaf(2));
}

TEST(MinimalCell, ProductDepthIsCommonPrefixLength) {
  const CellTree t = product_space({{3, 2, 3, 2}});
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const PointIndex x = uniform_below(rng, t.point_count());
    const PointIndex y = uniform_below(rng, t.point_count());
    const std::string& a = t.label(x);
    const std::string& b = t.label(y);
    std::size_t prefix = 0;
    while (prefix < a.size() && a[prefix] == b[prefix]) ++prefix;
    EXPECT_EQ(t.depth(minimal_cell(t, x, y)), prefix) << a << " " << b;
  }
}

TEST(MinimalCell, MatchesSmallestContainingCell) {
  for (const auto& s : corpus::spaces(40)) {
    const auto cells = oracle::family(s.tree);
    for (PointIndex x = 0; x < s.tree.point_count(); ++x)
      for (PointIndex y = 0; y < s.tree.point_count(); ++y)
        EXPECT_EQ(index(minimal_cell(s.tree, x, y)), oracle::smallest_cell_containing(cells, x, y)) << s.name;
  }
}

TEST(DecomposeClopen, Examples) {
  const CellTree t = binary2();
  const auto a = indices(t, {"00", "01", "10"});
  EXPECT_EQ(sizes_of(t, decompose_clopen(t, a)), (std::vector<std::string>{"{00,01}", "{10}"}));
  EXPECT_TRUE(decompose_clopen(t, {}).empty());
  const auto all = indices(t, {"00", "01", "10", "11"});
  EXPECT_EQ(decompose_clopen(t, all), std::vector<CellId>{CellTree::root()});
}

TEST(DecomposeClopen, Properties) {
  Rng rng(5);
  for (const auto& s : corpus::spaces(64)) {
    const CellTree& t = s.tree;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<PointIndex> a;
      for (PointIndex p = 0; p < t.point_count(); ++p)
        if (uniform_below(rng, 2)) a.push_back(p);
      const auto cells = decompose_clopen(t, a);
      std::vector<PointIndex> covered;
      for (CellId c : cells) covered.insert(covered.end(), t.points(c).begin(), t.points(c).end());
      std::sort(covered.begin(), covered.end());
      EXPECT_EQ(covered, a) << s.name;  // disjoint (no repeats) and exact union
      const std::set<PointIndex> in(a.begin(), a.end());
      for (CellId c : cells) {
        // minimality: the parent is not inside A
        if (auto p = t.parent(c)) {
          bool inside = true;
          for (PointIndex q : t.points(*p)) inside = inside && in.count(q);
          EXPECT_FALSE(inside) << s.name;
        }
      }
    }
  }
}

TEST(CompletePartition, Examples) {
  const CellTree t = binary2();
  const std::vector<CellId> one{t.leaf(*t.find("00"))};
  EXPECT_EQ(sizes_of(t, complete_partition(t, one)), (std::vector<std::string>{"{00}", "{01}", "{10,11}"}));
  const std::vector<CellId> root{CellTree::root()};
  EXPECT_EQ(complete_partition(t, root), root);
  EXPECT_EQ(complete_partition(t, {}), root);
}

TEST(CompletePartition, RejectsOverlappingInput) {
  const CellTree t = binary2();
  const std::vector<CellId> bad{t.children(CellTree::root())[0], t.leaf(0)};
  try {
    complete_partition(t, bad);
    FAIL() << "expected NotDisjoint";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_disjoint);
    EXPECT_FALSE(e.witness().empty());
  }
}

TEST(CompletePartition, OutputIsPartitionContainingInput) {
  Rng rng(9);
  for (const auto& s : corpus::spaces(64)) {
    const CellTree& t = s.tree;
    for (int trial = 0; trial < 20; ++trial) {
      // a random disjoint family: decomposition of a random subset
      std::vector<PointIndex> a;
      for (PointIndex p = 0; p < t.point_count(); ++p)
        if (uniform_below(rng, 3) == 0) a.push_back(p);
      const auto given = decompose_clopen(t, a);
      const auto parts = complete_partition(t, given);
      for (CellId c : given) EXPECT_NE(std::find(parts.begin(), parts.end(), c), parts.end());
      std::vector<std::size_t> hits(t.point_count(), 0);
      for (CellId c : parts)
        for (PointIndex p : t.points(c)) ++hits[p];
      EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](std::size_t h) { return h == 1; })) << s.name;
    }
  }
}

TEST(InducedSubstructure, Examples) {
  const CellTree t = binary2();
  const CellTree y = induced_substructure(t, indices(t, {"00", "01", "11"}));
  const CellTree expected = validate_family({"00", "01", "11"}, {{0, 1, 2}, {0, 1}, {0}, {1}, {2}});
  EXPECT_EQ(y, expected);

  const std::vector<PointIndex> one{2};
  EXPECT_EQ(induced_substructure(t, one).cell_count(), 1U);
  const std::vector<PointIndex> all{0, 1, 2, 3};
  EXPECT_EQ(induced_substructure(t, all), t);
  EXPECT_EQ(error_of([&] { induced_substructure(t, {}); }), Errc::empty_subset);
}

TEST(InducedSubstructure, CellsAreNonemptyIntersections) {
  Rng rng(3);
  for (const auto& s : corpus::spaces(64)) {
    const CellTree& t = s.tree;
    std::vector<PointIndex> y;
    for (PointIndex p = 0; p < t.point_count(); ++p)
      if (uniform_below(rng, 2)) y.push_back(p);
    if (y.empty()) y.push_back(0);
    std::set<std::set<std::string>> expected;
    for (const auto& cell : oracle::family(t)) {
      std::set<std::string> inter;
      for (PointIndex p : y)
        if (cell.count(p)) inter.insert(t.label(p));
      if (!inter.empty()) expected.insert(inter);
    }
    const CellTree sub = induced_substructure(t, y);
    std::set<std::set<std::string>> got;
    for (const auto& cell : oracle::family(sub)) {
      std::set<std::string> labels;
      for (PointIndex p : cell) labels.insert(sub.label(p));
      got.insert(labels);
    }
    EXPECT_EQ(got, expected) << s.name;
    EXPECT_EQ(got.size(), sub.cell_count()) << s.name;
  }
}

TEST(TreeDuality, RoundTrip) {
  const CellTree t = binary2();
  EXPECT_EQ(cells_of(tree_of(t)), t);

  AbstractTree single;
  single.add_vertex("only");
  EXPECT_EQ(cells_of(single).point_count(), 1U);

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const CellTree r = random_laminar({seed, 2 + seed % 4, 6, 1 + seed % 40});
    const CellTree back = cells_of(tree_of(r));
    EXPECT_TRUE(equivalent(back, r));
    EXPECT_TRUE(isomorphic(back, r));
  }
}

TEST(TreeDuality, DuplicateLeafLabel) {
  AbstractTree tree;
  const auto root = tree.add_vertex();
  tree.add_edge(root, tree.add_vertex("a"));
  tree.add_edge(root, tree.add_vertex("a"));
  EXPECT_EQ(error_of([&] { cells_of(tree); }), Errc::duplicate_leaf_label);
}

TEST(LaminarInvariants, HoldOnCorpus) {
  for (const auto& s : corpus::spaces(128)) {
    const auto cells = oracle::family(s.tree);
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = 0; j < cells.size(); ++j) {
        const auto& a = cells[i];
        const auto& b = cells[j];
        const bool disjoint = std::none_of(a.begin(), a.end(), [&](PointIndex p) { return b.count(p); });
        const bool a_in_b = std::includes(b.begin(), b.end(), a.begin(), a.end());
        const bool b_in_a = std::includes(a.begin(), a.end(), b.begin(), b.end());
        EXPECT_TRUE(disjoint || a_in_b || b_in_a) << s.name;
      }
    EXPECT_LE(s.tree.cell_count(), 2 * s.tree.point_count() - 1) << s.name;
    for (PointIndex p = 0; p < s.tree.point_count(); ++p) {
      const std::size_t containing =
          static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [&](const auto& c) { return c.count(p) > 0; }));
      EXPECT_EQ(containing, s.tree.depth(s.tree.leaf(p)) + 1) << s.name;
    }
  }
}
