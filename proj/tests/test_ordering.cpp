#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace d3m;
using d3m::testing::Rng;

namespace {

std::vector<Index> unit(Index n) { return std::vector<Index>(static_cast<std::size_t>(n), 1); }

}  // namespace

TEST(Reorder, EdgelessGraphKeepsIndexOrder) {
  const CliqueGraph g(6);
  const Ordering ord = reorder(g, {4, 1, 3, 1, 5, 9});
  EXPECT_EQ(ord.perm, (std::vector<Index>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(ord.source, OrderingSource::kBuiltin);
}

TEST(Reorder, PathHasNoFill) {
  const CliqueGraph g = d3m::testing::path_graph(5);
  const Ordering ord = reorder(g, unit(5));
  EXPECT_TRUE(is_permutation_of(ord.perm, 5));
  EXPECT_EQ(d3m::testing::game_fill(g, ord.perm), 0);
  EXPECT_EQ(fill_blocks(g, symbolic_factor(g, ord, unit(5))), 0);
}

TEST(Reorder, StarCenterGoesLast) {
  const CliqueGraph g = d3m::testing::star_graph(4);  // center 0, leaves 1..4
  const Ordering ord = reorder(g, unit(5));
  // Once a single leaf is left it ties with the center, and the lower index
  // (the center) wins; either way no fill.
  EXPECT_EQ(ord.perm, (std::vector<Index>{1, 2, 3, 0, 4}));
  EXPECT_EQ(d3m::testing::game_fill(g, ord.perm), 0);

  // Center first: the four leaves become a clique.
  const Ordering bad{{0, 1, 2, 3, 4}, OrderingSource::kExternalFile};
  EXPECT_EQ(d3m::testing::game_fill(g, bad.perm), 6);
  EXPECT_EQ(fill_blocks(g, symbolic_factor(g, bad, unit(5))), 6);
}

TEST(Reorder, UniformTreesHaveNoFill) {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<Index> nd(1, 20);
    const Index n = nd(rng);
    const CliqueGraph g = d3m::testing::random_tree(n, rng);
    const Ordering ord = reorder(g, unit(n));
    EXPECT_EQ(d3m::testing::game_fill(g, ord.perm), 0) << "trial " << t;
  }
}

TEST(Reorder, NoWorseThanIdentityOnRandomGraphs) {
  Rng rng(2024);
  int worse = 0;
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<Index> nd(1, 12);
    std::uniform_real_distribution<double> pd(0.1, 0.6);
    const Index n = nd(rng);
    const CliqueGraph g = d3m::testing::random_graph(n, pd(rng), rng);
    const Ordering ord = reorder(g, unit(n));
    ASSERT_TRUE(is_permutation_of(ord.perm, n));
    const Index ordered = fill_blocks(g, symbolic_factor(g, ord, unit(n)));
    const Index identity = fill_blocks(g, symbolic_factor(g, Ordering::identity(n), unit(n)));
    if (ordered > identity) ++worse;
  }
  EXPECT_EQ(worse, 0);
}

TEST(Reorder, WeightsSteerTheChoice) {
  // Path 0-1-2: d0 = d2 = w1, d1 = w0 + w2.
  const CliqueGraph g = d3m::testing::path_graph(3);
  EXPECT_EQ(reorder(g, {1, 1, 1}).perm.front(), 0);
  EXPECT_EQ(reorder(g, {1, 10, 1}).perm.front(), 1);
}

TEST(Reorder, RejectsWrongWeightCount) {
  EXPECT_THROW(reorder(CliqueGraph(3), {1, 1}), DimensionError);
}

TEST(LoadOrdering, ValidFile) {
  std::istringstream is("2\n0\n\n1\n");
  const Ordering ord = load_ordering(is, 3);
  EXPECT_EQ(ord.perm, (std::vector<Index>{2, 0, 1}));
  EXPECT_EQ(ord.source, OrderingSource::kExternalFile);
}

TEST(LoadOrdering, RejectsNonPermutations) {
  std::istringstream dup("0\n0\n1\n");
  EXPECT_THROW(load_ordering(dup, 3), ConfigError);
  std::istringstream short_list("0\n1\n");
  EXPECT_THROW(load_ordering(short_list, 3), ConfigError);
  std::istringstream out_of_range("0\n1\n3\n");
  EXPECT_THROW(load_ordering(out_of_range, 3), ConfigError);
  std::istringstream garbage("0\nx\n1\n");
  EXPECT_THROW(load_ordering(garbage, 3), ConfigError);
}

TEST(ComputeOrdering, Dispatch) {
  const CliqueGraph g = d3m::testing::path_graph(4);
  EXPECT_EQ(compute_ordering("builtin", g, unit(4)).source, OrderingSource::kBuiltin);
  EXPECT_THROW(compute_ordering("metis", g, unit(4)), ConfigError);
  EXPECT_THROW(compute_ordering("file:/nonexistent/ordering.txt", g, unit(4)), ConfigError);
}
