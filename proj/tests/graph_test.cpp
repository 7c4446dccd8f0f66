#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "isl/graph.hpp"
#include "isl/graph_io.hpp"
#include "oracles.hpp"

using namespace isl;

namespace {

Graph clique_graph(int s, int d) {
    std::vector<int> p(s);
    std::iota(p.begin(), p.end(), 0);
    return build_pattern(GraphFamily::clique(s), d, p);
}

Graph triangle(int d = 3) { return Graph(d, {{0, 1}, {1, 2}, {0, 2}}); }

}  // namespace

TEST(Arboricity, EmptyGraphIsZero) {
    EXPECT_EQ(arboricity(Graph::empty(7)), 0);
    EXPECT_EQ(arboricity_exact(Graph::empty(7)), 0);
}

TEST(Arboricity, NamedExamples) {
    EXPECT_EQ(arboricity(clique_graph(5, 5)), 3);
    EXPECT_EQ(arboricity(build_pattern(GraphFamily::star(6), 8, {0, 1, 2, 3, 4, 5})), 1);
    std::vector<int> p(20);
    std::iota(p.begin(), p.end(), 0);
    EXPECT_EQ(arboricity_exact(build_pattern(GraphFamily::community(5, 4), 20, p)), 3);
    EXPECT_EQ(arboricity(GraphFamily::community(5, 4)), 3);
}

TEST(Arboricity, ExactEnumerationMatchesCliqueClosedForm) {
    for (int s = 2; s <= 12; ++s) EXPECT_EQ(arboricity_exact(clique_graph(s, s + 2)), (s + 1) / 2) << s;
}

TEST(Arboricity, CommunityClosedFormSmallSizes) {
    for (int k = 1; k <= 4; ++k)
        for (int l = 1; l <= 5; ++l) {
            if (k * l > 20) continue;
            auto f = GraphFamily::community(k, l);
            std::vector<int> p(f.s);
            std::iota(p.begin(), p.end(), 0);
            EXPECT_EQ(arboricity_exact(build_pattern(f, f.s, p)), arboricity(f)) << k << "," << l;
        }
}

TEST(Arboricity, TooLargeWithoutClosedFormThrows) {
    // A 25-vertex graph containing a cycle and not a clique.
    std::vector<Edge> e;
    for (int i = 0; i + 1 < 25; ++i) e.push_back({i, i + 1});
    e.push_back({0, 24});
    e.push_back({0, 12});
    EXPECT_THROW(arboricity(Graph(25, e)), SizeExceeded);
}

TEST(Arboricity, CommunityClosedFormBeyondEnumeration) {
    // Past 24 vertices: the closed form is both attained and necessary.
    for (auto [k, l] : {std::pair{5, 5}, std::pair{6, 5}, std::pair{4, 7}}) {
        auto f = GraphFamily::community(k, l);
        std::vector<int> p(f.s);
        std::iota(p.begin(), p.end(), 0);
        Graph g = build_pattern(f, f.s, p);
        const int a = arboricity(f);
        auto parts = detail::forest_partition(g, a);
        ASSERT_TRUE(parts.has_value()) << k << "," << l;
        for (const auto& part : *parts) EXPECT_TRUE(oracle::edges_acyclic(g.d(), {part.begin(), part.end()}));
        EXPECT_FALSE(detail::forest_partition(g, a - 1).has_value());
    }
}

TEST(ForestPartition, Examples) {
    EXPECT_TRUE(forest_partition_check(triangle(), 2));
    EXPECT_FALSE(forest_partition_check(triangle(), 1));
    EXPECT_TRUE(forest_partition_check(clique_graph(4, 4), 2));
    EXPECT_FALSE(forest_partition_check(clique_graph(4, 4), 1));
    EXPECT_THROW(forest_partition_check(Graph::empty(17), 1), SizeExceeded);
}

TEST(ForestPartition, AgreesWithExhaustiveAssignment) {
    std::mt19937_64 rng(17);
    int checked = 0;
    while (checked < 60) {
        Graph g = oracle::random_graph(4 + checked % 4, 0.6, rng);
        if (g.num_edges() > 11) continue;
        for (int c = 0; c <= 3; ++c) EXPECT_EQ(forest_partition_check(g, c), oracle::forest_assignment_exists(g, c));
        ++checked;
    }
}

TEST(ForestPartition, DenseCliquesAreTight) {
    for (int s = 4; s <= 16; ++s) {
        EXPECT_TRUE(forest_partition_check(clique_graph(s, s), (s + 1) / 2)) << s;
        EXPECT_FALSE(forest_partition_check(clique_graph(s, s), (s + 1) / 2 - 1)) << s;
    }
}

TEST(ForestPartition, LeastCountEqualsArboricity) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        int d = 2 + rep % 9;
        Graph g = oracle::random_graph(d, 0.15 + 0.8 * (rep % 5) / 4.0, rng);
        int least = 0;
        while (!forest_partition_check(g, least)) ++least;
        EXPECT_EQ(least, arboricity(g));
    }
}

TEST(BuildPattern, Examples) {
    Graph e = build_pattern(GraphFamily::single_edge(), 10, {1, 6});
    ASSERT_EQ(e.num_edges(), 1u);
    EXPECT_TRUE(e.has_edge(1, 6));
    EXPECT_EQ(build_pattern(GraphFamily::clique(3), 3, {0, 1, 2}), triangle());
    Graph c = build_pattern(GraphFamily::community(2, 2), 4, {0, 1, 2, 3}, {0, 2});
    EXPECT_EQ(c, Graph(4, {{0, 1}, {2, 3}, {0, 2}}));
}

TEST(BuildPattern, BadPlacements) {
    EXPECT_THROW(build_pattern(GraphFamily::clique(3), 5, {0, 0, 1}), BadPlacement);
    EXPECT_THROW(build_pattern(GraphFamily::clique(3), 5, {0, 1, 5}), BadPlacement);
    EXPECT_THROW(build_pattern(GraphFamily::clique(3), 5, {0, 1}), BadPlacement);
    EXPECT_THROW(build_pattern(GraphFamily::community(2, 2), 4, {0, 1, 2, 3}, {0, 1}), BadPlacement);
}

TEST(Placements, Counts) {
    EXPECT_EQ(enumerate_placements(GraphFamily::clique(2), 4, 100).size(), 6u);
    EXPECT_EQ(enumerate_placements(GraphFamily::clique(3), 5, 100).size(), 10u);
    EXPECT_EQ(enumerate_placements(GraphFamily::star(3), 3, 100).size(), 3u);
    EXPECT_EQ(enumerate_placements(GraphFamily::star(4), 5, 100).size(), 20u);
    // A 1-star is an edge: centers coincide and copies are not double counted.
    EXPECT_EQ(enumerate_placements(GraphFamily::star(2), 5, 100).size(), 10u);
    // Community: C(d,s)·s!/((k!)^l l!) block partitions.
    EXPECT_EQ(enumerate_placements(GraphFamily::community(2, 2), 5, 1000).size(), 5u * 3u);
    EXPECT_EQ(enumerate_placements(GraphFamily::community(2, 3), 6, 1000).size(), 15u);
}

TEST(Placements, StarCountMatchesBruteForceIsomorphs) {
    // Brute force: all graphs on d vertices with s-1 edges sharing one center.
    for (int d = 3; d <= 6; ++d)
        for (int s = 3; s <= d; ++s) {
            std::set<Graph> brute;
            for (int c = 0; c < d; ++c) {
                std::vector<int> others;
                for (int v = 0; v < d; ++v)
                    if (v != c) others.push_back(v);
                detail::for_each_subset(d - 1, s - 1, [&](const std::vector<int>& idx) {
                    std::vector<Edge> e;
                    for (int x : idx) e.push_back({c, others[x]});
                    brute.insert(Graph(d, e));
                });
            }
            EXPECT_EQ(enumerate_placements(GraphFamily::star(s), d, 100000).size(), brute.size());
        }
}

TEST(Placements, LexicographicAndDeterministic) {
    auto a = enumerate_placements(GraphFamily::clique(3), 6, 100);
    auto b = enumerate_placements(GraphFamily::clique(3), 6, 100);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.front().support(), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(a.back().support(), (std::vector<int>{3, 4, 5}));
}

TEST(Placements, TooManyErrors) {
    EXPECT_THROW(enumerate_placements(GraphFamily::clique(3), 10, 119), TooMany);
    EXPECT_NO_THROW(enumerate_placements(GraphFamily::clique(3), 10, 120));
    EXPECT_THROW(enumerate_placements(GraphFamily::custom(triangle()), 5, 10), BadInputs);
}

TEST(WitnessingSet, Examples) {
    auto w = witnessing_set(GraphFamily::single_edge(), 10, 1000);
    EXPECT_EQ(w.members.size(), 45u);
    EXPECT_EQ(w.m, 2);
    EXPECT_DOUBLE_EQ(w.Mcap, std::log(45.0) / 2);

    auto t = witnessing_set(GraphFamily::clique(3), 6, 1000);
    EXPECT_EQ(t.members.size(), 20u);
    EXPECT_EQ(t.m, 3);

    auto s = witnessing_set(GraphFamily::star(4), 5, 1000);
    EXPECT_EQ(s.members.size(), 20u);
}

TEST(WitnessingSet, MembersPassPredicate) {
    for (auto f : {GraphFamily::single_edge(), GraphFamily::clique(4), GraphFamily::star(3),
                   GraphFamily::community(2, 3), GraphFamily::community(3, 2)}) {
        auto w = witnessing_set(f, 7, 100000);
        for (const auto& h : w.members) EXPECT_GE(density_ceiling(h), arboricity(f));
    }
}

TEST(Overlap, Examples) {
    auto tri = overlap_stats(triangle(6), triangle(6));
    EXPECT_EQ(tri.shared_vertices, 3);
    EXPECT_EQ(tri.shared_edges, 3);
    EXPECT_EQ(tri.cross_triangles, 6);  // 8 triangles in the doubled triangle minus the 2 pure ones

    Graph a(6, {{0, 1}, {1, 2}, {0, 2}}), b(6, {{3, 4}, {4, 5}, {3, 5}});
    EXPECT_EQ(overlap_stats(a, b), (OverlapStats{0, 0, 0}));

    Graph g(3, {{0, 1}}), h(3, {{1, 2}, {0, 2}});
    EXPECT_EQ(overlap_stats(g, h), (OverlapStats{2, 0, 1}));
}

TEST(Overlap, SymmetricAndDeltaBounded) {
    std::mt19937_64 rng(3);
    const std::vector<GraphFamily> fams = {GraphFamily::clique(3), GraphFamily::clique(4), GraphFamily::star(4),
                                           GraphFamily::community(2, 2), GraphFamily::single_edge()};
    for (int rep = 0; rep < 200; ++rep) {
        const auto& f = fams[rep % fams.size()];
        int d = 5 + rep % 4;
        Graph g = oracle::random_pattern(f, d, rng), h = oracle::random_pattern(f, d, rng);
        auto gh = overlap_stats(g, h), hg = overlap_stats(h, g);
        EXPECT_EQ(gh, hg);
        EXPECT_LE(gh.cross_triangles, 2LL * gh.shared_vertices * arboricity(f) * family_max_degree(f));
    }
}

TEST(GraphIo, EdgeListRoundTrip) {
    std::istringstream in("5\n# comment\n1 2\n2 3\n\n4 5\n");
    Graph g = read_edge_list(in);
    EXPECT_EQ(g.d(), 5);
    EXPECT_EQ(g.num_edges(), 3u);
    std::ostringstream out;
    write_edge_list(out, g);
    std::istringstream again(out.str());
    EXPECT_EQ(read_edge_list(again), g);
    EXPECT_EQ(graph_from_json(to_json(g)), g);
}

TEST(GraphIo, RejectsMalformed) {
    std::istringstream loop("3\n1 1\n");
    EXPECT_THROW(read_edge_list(loop), BadInputs);
    std::istringstream dup("3\n1 2\n2 1\n");
    EXPECT_THROW(read_edge_list(dup), BadInputs);
    std::istringstream range("3\n1 4\n");
    EXPECT_THROW(read_edge_list(range), BadInputs);
}
