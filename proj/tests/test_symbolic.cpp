#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace d3m;
using d3m::testing::Rng;

namespace {

std::vector<Index> unit(Index n) { return std::vector<Index>(static_cast<std::size_t>(n), 1); }

std::int64_t entries_by_formula(const EliminationPlan& plan) {
  std::int64_t total = 0;
  for (Index j = 0; j < plan.num_blocks(); ++j) {
    const std::int64_t nj = plan.sizes[j];
    total += nj * (nj + 1) / 2;
    for (Index i : plan.pattern[j]) total += nj * plan.sizes[i];
  }
  return total;
}

}  // namespace

TEST(Symbolic, EdgelessGraph) {
  const std::vector<Index> sizes{3, 1, 4};
  const EliminationPlan plan = symbolic_factor(CliqueGraph(3), Ordering::identity(3), sizes);
  for (Index j = 0; j < 3; ++j) {
    EXPECT_TRUE(plan.pattern[j].empty());
    EXPECT_EQ(plan.etree_parent[j], -1);
  }
  EXPECT_EQ(plan.total_factor_entries, 6 + 1 + 10);
}

TEST(Symbolic, FourCycleNaturalOrder) {
  const CliqueGraph g = CliqueGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const EliminationPlan plan = symbolic_factor(g, Ordering::identity(4), unit(4));
  EXPECT_EQ(plan.pattern[0], (std::vector<Index>{1, 3}));
  EXPECT_EQ(plan.pattern[1], (std::vector<Index>{2, 3}));
  EXPECT_EQ(plan.pattern[2], (std::vector<Index>{3}));
  EXPECT_TRUE(plan.pattern[3].empty());
  EXPECT_EQ(plan.etree_parent, (std::vector<Index>{1, 2, 3, -1}));
  EXPECT_EQ(fill_blocks(g, plan), 1);
}

TEST(Symbolic, MatchesEliminationGameOnRandomGraphs) {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<Index> nd(1, 12);
    std::uniform_real_distribution<double> pd(0.05, 0.7);
    const Index n = nd(rng);
    const CliqueGraph g = d3m::testing::random_graph(n, pd(rng), rng);
    Ordering ord = Ordering::identity(n);
    std::shuffle(ord.perm.begin(), ord.perm.end(), rng);
    std::vector<Index> sizes(static_cast<std::size_t>(n));
    std::uniform_int_distribution<Index> sd(1, 9);
    for (auto& s : sizes) s = sd(rng);

    const EliminationPlan plan = symbolic_factor(g, ord, sizes);
    const auto game = d3m::testing::elimination_game(g, ord.perm);
    for (Index j = 0; j < n; ++j) {
      const std::vector<Index> expect(game[j].begin(), game[j].end());
      ASSERT_EQ(plan.pattern[j], expect) << "trial " << t << " column " << j;
      EXPECT_EQ(plan.etree_parent[j], expect.empty() ? -1 : expect.front());
      EXPECT_EQ(plan.sizes[j], sizes[ord.perm[j]]);
    }
    EXPECT_EQ(plan.total_factor_entries, entries_by_formula(plan));
    // Every original edge lands in the pattern.
    for (Index v = 0; v < n; ++v) {
      for (Index u : g.neighbors(v)) {
        const Index a = plan.inverse[u], b = plan.inverse[v];
        EXPECT_TRUE(plan.in_pattern(std::max(a, b), std::min(a, b)));
      }
    }
  }
}

TEST(Symbolic, FillIsMonotoneInTheGraph) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<Index> nd(2, 12);
    const Index n = nd(rng);
    const CliqueGraph super = d3m::testing::random_graph(n, 0.4, rng);
    CliqueGraph sub(n);
    std::bernoulli_distribution keep(0.6);
    for (Index v = 0; v < n; ++v) {
      for (Index u : super.neighbors(v)) {
        if (u > v && keep(rng)) sub.add_edge(u, v);
      }
    }
    Ordering ord = Ordering::identity(n);
    std::shuffle(ord.perm.begin(), ord.perm.end(), rng);
    const EliminationPlan ps = symbolic_factor(sub, ord, unit(n));
    const EliminationPlan pp = symbolic_factor(super, ord, unit(n));
    for (Index j = 0; j < n; ++j) {
      EXPECT_TRUE(std::includes(pp.pattern[j].begin(), pp.pattern[j].end(), ps.pattern[j].begin(),
                                ps.pattern[j].end()));
    }
  }
}

TEST(Symbolic, RejectsBadInput) {
  const CliqueGraph g = d3m::testing::path_graph(3);
  EXPECT_THROW(symbolic_factor(g, Ordering::identity(3), {1, 1}), DimensionError);
  EXPECT_THROW(symbolic_factor(g, Ordering{{0, 0, 1}, OrderingSource::kBuiltin}, unit(3)), ConfigError);
}

TEST(Symbolic, PrintsEveryColumn) {
  const CliqueGraph g = d3m::testing::path_graph(3);
  std::ostringstream os;
  print_symbolic(os, symbolic_factor(g, Ordering::identity(3), {2, 2, 2}));
  const std::string s = os.str();
  EXPECT_NE(s.find("col 0"), std::string::npos);
  EXPECT_NE(s.find("col 2"), std::string::npos);
  EXPECT_NE(s.find("predicted factor entries: 17"), std::string::npos);
}
