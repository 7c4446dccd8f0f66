#include <gtest/gtest.h>

#include <random>

#include "isl/eulerian.hpp"
#include "isl/ising.hpp"
#include "oracles.hpp"

using namespace isl;

namespace {

Graph triangle(int d = 3) { return Graph(d, {{0, 1}, {1, 2}, {0, 2}}); }

Graph complete(int s, int d) {
    std::vector<Edge> e;
    for (int i = 0; i < s; ++i)
        for (int j = i + 1; j < s; ++j) e.push_back({i, j});
    return Graph(d, e);
}

Multigraph random_multigraph(std::mt19937_64& rng, int max_total) {
    std::uniform_int_distribution<int> dim(3, 7), mult(1, 3);
    const int d = dim(rng);
    Multigraph g(d);
    std::uniform_int_distribution<int> vert(0, d - 1);
    int total = 0;
    for (int tries = 0; tries < 20 && total < max_total; ++tries) {
        int i = vert(rng), j = vert(rng);
        if (i == j) continue;
        int m = std::min(mult(rng), max_total - total);
        g.add(i, j, m);
        total += m;
    }
    return g;
}

std::vector<int> shared_support(const Graph& g, const Graph& h) {
    std::vector<int> out;
    std::set_intersection(g.support().begin(), g.support().end(), h.support().begin(), h.support().end(),
                          std::back_inserter(out));
    return out;
}

}  // namespace

TEST(CountEulerian, Triangle) {
    Multigraph t(triangle());
    EXPECT_EQ(count_eulerian(t, 0), 1);
    EXPECT_EQ(count_eulerian(t, 1), 0);
    EXPECT_EQ(count_eulerian(t, 2), 0);
    EXPECT_EQ(count_eulerian(t, 3), 1);
}

TEST(CountEulerian, K4) {
    Multigraph k4(complete(4, 4));
    EXPECT_EQ(count_eulerian(k4, 3), 4);
    EXPECT_EQ(count_eulerian(k4, 4), 3);
    EXPECT_EQ(count_eulerian(k4, 6), 0);
    EXPECT_EQ(count_eulerian_connected(k4, 4), 3);
}

TEST(CountEulerian, DoubleEdgeIsATwoCycle) {
    Multigraph g(2);
    g.add(0, 1, 2);
    EXPECT_EQ(count_eulerian(g, 2), 1);
    EXPECT_EQ(count_eulerian(g, 1), 0);
}

TEST(CountEulerian, ConnectedExamples) {
    EXPECT_EQ(count_eulerian_connected(Multigraph(triangle()), 3), 1);
    Graph two(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    EXPECT_EQ(count_eulerian_connected(Multigraph(two), 3), 2);
    EXPECT_EQ(count_eulerian_connected(Multigraph(two), 6), 0);
    EXPECT_EQ(count_eulerian(Multigraph(two), 6), 1);
}

TEST(CountEulerian, SizeLimit) {
    Multigraph g(3);
    g.add(0, 1, 13);
    g.add(1, 2, 12);
    EXPECT_THROW(eulerian_counts(g), SizeExceeded);
}

TEST(CountEulerian, MatchesSubsetEnumeration) {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 80; ++rep) {
        auto g = random_multigraph(rng, 14);
        auto census = oracle::eulerian_census(g);
        auto counts = eulerian_counts(g);
        ASSERT_EQ(counts.size(), census.all.size());
        for (std::size_t k = 0; k < counts.size(); ++k) {
            EXPECT_EQ(counts[k], census.all[k]);
            EXPECT_EQ(count_eulerian(g, static_cast<int>(k)), census.all[k]);
            if (k > 0) {
                EXPECT_EQ(count_eulerian_connected(g, static_cast<int>(k)), census.connected[k]);
            }
        }
        EXPECT_EQ(counts[0], 1);
    }
}

TEST(CountEulerian, FrobeniusPowerBounds) {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 80; ++rep) {
        auto g = random_multigraph(rng, 12);
        const double fro = g.frobenius();
        for (int k = 2; k <= g.total_multiplicity(); ++k) {
            EXPECT_LE(double(count_eulerian(g, k)), std::pow(2.0 * fro, k));
            EXPECT_LE(double(count_eulerian_connected(g, k)), std::pow(fro, k));
        }
    }
}

TEST(FPoly, Examples) {
    EXPECT_EQ(f_poly(Graph::empty(5)).coeffs, (std::vector<std::int64_t>{1}));
    EXPECT_EQ(f_poly(triangle()).coeffs, (std::vector<std::int64_t>{1, 0, 0, 1}));
    EXPECT_EQ(f_poly(complete(4, 4)).coeffs, (std::vector<std::int64_t>{1, 0, 0, 4, 3, 0, 0}));
}

TEST(FPoly, EqualsProductExpectation) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 3 + rep % 10;
        Graph g = oracle::random_graph(d, 0.35, rng);
        if (g.num_edges() > 20) continue;
        auto f = f_poly(g);
        for (double t : {-0.9, -0.3, 0.1, 0.55, 0.9}) EXPECT_NEAR(f.eval(t), oracle::product_expectation(g, t), 1e-10);
    }
}

TEST(UCoefficients, Examples) {
    Graph a(6, {{0, 1}, {1, 2}, {0, 2}}), b(6, {{3, 4}, {4, 5}, {3, 5}});
    for (auto c : u_coefficients(a, b).coeffs) EXPECT_EQ(c, 0);

    Graph e(2, {{0, 1}});
    auto u = u_coefficients(e, e);
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(u[k], k == 2 ? 1 : 0) << k;

    Graph g(3, {{0, 1}}), h(3, {{1, 2}, {0, 2}});
    EXPECT_EQ(u_coefficients(g, h)[3], 1);

    EXPECT_EQ(u_coefficients(triangle(), triangle())[3], 6);
}

TEST(UCoefficients, LowOrderIdentities) {
    std::mt19937_64 rng(24);
    const std::vector<GraphFamily> fams = {GraphFamily::clique(3), GraphFamily::clique(4), GraphFamily::star(4),
                                           GraphFamily::community(2, 2), GraphFamily::single_edge()};
    for (int rep = 0; rep < 60; ++rep) {
        const auto& f = fams[rep % fams.size()];
        const int d = 5 + rep % 3;
        Graph g = oracle::random_pattern(f, d, rng), h = oracle::random_pattern(f, d, rng);
        auto u = u_coefficients(g, h);
        auto stats = overlap_stats(g, h);
        EXPECT_EQ(u[0], 0);
        EXPECT_EQ(u[1], 0);
        EXPECT_EQ(u[2], stats.shared_edges);
        EXPECT_EQ(u[3], stats.cross_triangles);
    }
}

TEST(UCoefficients, BoundedByMarkedCount) {
    std::mt19937_64 rng(25);
    const std::vector<GraphFamily> fams = {GraphFamily::clique(4), GraphFamily::star(4), GraphFamily::community(2, 2),
                                           GraphFamily::clique(3)};
    for (int rep = 0; rep < 40; ++rep) {
        const auto& f = fams[rep % fams.size()];
        Graph g = oracle::random_pattern(f, 6, rng), h = oracle::random_pattern(f, 6, rng);
        auto u = u_coefficients(g, h);
        Multigraph gh = Multigraph(g) + Multigraph(h);
        auto marked = shared_support(g, h);
        auto census = oracle::eulerian_census(gh, marked);
        for (std::size_t k = 4; k < u.size(); ++k) {
            EXPECT_EQ(q_count(gh, marked, static_cast<int>(k)), census.q[k]);
            EXPECT_LE(u[k], census.q[k]) << k;
        }
    }
}

namespace {

void expect_qp_bounds(const Multigraph& g, const std::vector<int>& marked) {
    const double fro = g.frobenius(), l1 = g.l1_norm(), V = double(marked.size());
    for (int k = 2; k <= g.total_multiplicity(); ++k) {
        const double q = double(q_count(g, marked, k)), p = double(p_count(g, marked, k));
        const double qb = std::min(std::pow(2.0, k) * V * std::pow(fro, k),
                                   k * std::pow(2.0, k - 2) * V * V * std::pow(std::max(l1, fro), k - 2));
        EXPECT_LE(q, qb) << k;
        EXPECT_LE(p, (k - 1) * V * V * std::pow(l1, k - 2)) << k;
    }
}

std::vector<int> random_marks(int d, std::mt19937_64& rng) {
    std::vector<int> marked;
    for (int v = 0; v < d; ++v)
        if (rng() % 2) marked.push_back(v);
    return marked;
}

}  // namespace

TEST(QPCounts, MatchCensus) {
    std::mt19937_64 rng(26);
    for (int rep = 0; rep < 60; ++rep) {
        auto g = random_multigraph(rng, 12);
        auto marked = random_marks(g.d(), rng);
        auto census = oracle::eulerian_census(g, marked);
        for (int k = 2; k <= g.total_multiplicity(); ++k) {
            EXPECT_EQ(q_count(g, marked, k), census.q[k]);
            EXPECT_EQ(p_count(g, marked, k), census.p[k]);
        }
    }
}

TEST(QPCounts, BoundsOnSimpleGraphs) {
    std::mt19937_64 rng(28);
    for (int rep = 0; rep < 300; ++rep) {
        Graph g = oracle::random_graph(3 + rep % 5, 0.6, rng);
        if (g.num_edges() > 12) continue;
        expect_qp_bounds(Multigraph(g), random_marks(g.d(), rng));
    }
}

TEST(QPCounts, BoundsOnPatternSums) {
    std::mt19937_64 rng(29);
    const std::vector<GraphFamily> fams = {GraphFamily::clique(3), GraphFamily::clique(4), GraphFamily::star(5),
                                           GraphFamily::community(2, 3), GraphFamily::single_edge()};
    for (int rep = 0; rep < 150; ++rep) {
        const auto& f = fams[rep % fams.size()];
        const int d = std::max(f.s, 3) + rep % 3;
        Graph g = oracle::random_pattern(f, d, rng), h = oracle::random_pattern(f, d, rng);
        expect_qp_bounds(Multigraph(g) + Multigraph(h), shared_support(g, h));
    }
}

// With four parallel copies of one edge, the six 2-cycles exceed the
// walk-count bound (k−1)|V|²‖A‖₁^{k−2} = 4: the bound counts vertex
// sequences, not edge choices.
TEST(QPCounts, ParallelEdgesExceedWalkBound) {
    Multigraph g(2);
    g.add(0, 1, 4);
    EXPECT_EQ(p_count(g, {0, 1}, 2), 6);
    EXPECT_GT(6.0, (2 - 1) * 4.0 * std::pow(g.l1_norm(), 0));
}

TEST(ChiSquarePair, TrivialCases) {
    Graph e(4, {{0, 1}});
    EXPECT_DOUBLE_EQ(chi_square_pair(e, e, 0.0, 5), 1.0);
    Graph a(4, {{0, 1}}), b(4, {{2, 3}});
    EXPECT_NEAR(chi_square_pair(a, b, 0.3, 7), 1.0, 1e-15);
}

TEST(ChiSquarePair, MatchesStateEnumeration) {
    Graph e(4, {{0, 1}});
    EXPECT_NEAR(chi_square_pair(e, e, 0.2, 3) / oracle::chi_square_pair_states(e, e, 0.2, 3), 1.0, 1e-10);
    std::mt19937_64 rng(27);
    for (int rep = 0; rep < 20; ++rep) {
        Graph g = oracle::random_pattern(GraphFamily::clique(3), 6, rng);
        Graph h = oracle::random_pattern(GraphFamily::star(4), 6, rng);
        const double th = 0.05 + 0.02 * rep;
        const int n = 1 + rep % 5;
        EXPECT_NEAR(chi_square_pair(g, h, th, n) / oracle::chi_square_pair_states(g, h, th, n), 1.0, 1e-10);
    }
}

TEST(ChiSquareDivergence, NullIsZero) {
    EXPECT_NEAR(chi_square_divergence(GraphFamily::clique(3), 6, 0.0, 10, 1000), 0.0, 1e-14);
}

TEST(ChiSquareDivergence, MatchesMixtureEnumeration) {
    const int d = 4;
    const double th = 0.1;
    const auto placements = enumerate_placements(GraphFamily::single_edge(), d, 100);
    std::vector<std::vector<double>> pmfs;
    for (const auto& g : placements)
        pmfs.push_back(oracle::boltzmann_pmf(IsingModel::from_graph(g, th, IsingModel::Mode::unrestricted)));
    const std::size_t S = std::size_t{1} << d;
    const double p0 = 1.0 / (S * S);
    double chi = 0;
    for (std::size_t x1 = 0; x1 < S; ++x1)
        for (std::size_t x2 = 0; x2 < S; ++x2) {
            double mix = 0;
            for (const auto& p : pmfs) mix += p[x1] * p[x2];
            mix /= pmfs.size();
            chi += mix * mix / p0;
        }
    EXPECT_NEAR(chi_square_divergence(GraphFamily::single_edge(), d, th, 2, 100), chi - 1.0, 1e-9);
}

TEST(ChiSquareDivergence, NondecreasingInSampleSize) {
    for (auto f : {GraphFamily::single_edge(), GraphFamily::clique(3), GraphFamily::star(3)}) {
        double prev = -1;
        for (int n : {1, 2, 5, 10, 50, 200}) {
            double v = chi_square_divergence(f, 7, 0.15, n, 1000);
            EXPECT_GE(v, prev - 1e-12);
            prev = v;
        }
    }
}

TEST(ChiSquareDivergence, ThreadCountDoesNotChangeResult) {
    auto f = GraphFamily::clique(3);
    EXPECT_EQ(chi_square_divergence(f, 8, 0.2, 20, 1000, 1), chi_square_divergence(f, 8, 0.2, 20, 1000, 3));
}

TEST(ChiSquareDivergence, TooManyPlacements) {
    EXPECT_THROW(chi_square_divergence(GraphFamily::clique(3), 10, 0.1, 1, 50), TooMany);
}

TEST(ChiSquareDivergence, SmallBelowThresholdLargeAbove) {
    auto f = GraphFamily::single_edge();
    const int d = 12;
    auto in = lower_bound_inputs(f, d);
    for (int n : {10, 100, 1000}) {
        const double th = lower_bound_theta(in, n);
        const double low = chi_square_divergence(f, d, th, n, 1000);
        const double high = chi_square_divergence(f, d, std::min(10 * th, 0.5), n, 1000);
        EXPECT_LT(low, 1.0) << n;
        EXPECT_GT(high, 10 * low) << n;
    }
}

TEST(RiskLowerBound, RangeProperties) {
    for (double D : {0.0, 0.01, 0.5, 1.0, 3.99, 4.0}) {
        EXPECT_LE(risk_lower_bound(D), 1.0);
        EXPECT_GE(risk_lower_bound(D), 0.0);
    }
    EXPECT_DOUBLE_EQ(risk_lower_bound(0.0), 1.0);
    EXPECT_LT(risk_lower_bound(9.0), 0.0);
}

TEST(LowerBoundTheta, SingleEdgeExample) {
    for (int d : {8, 50, 1000})
        for (int n : {10, 1000, 100000}) {
            auto in = lower_bound_inputs(GraphFamily::single_edge(), d);
            EXPECT_DOUBLE_EQ(in.B(), 2048.0);
            const double expect = std::min(std::sqrt(std::log(d / 4.0) / (6.0 * n)), 1.0 / (32 * std::sqrt(2.0)));
            EXPECT_NEAR(lower_bound_theta(in, n), expect, 1e-15);
        }
}

TEST(LowerBoundTheta, CliqueEnvelope) {
    for (int s : {3, 4, 5, 8})
        for (int n : {10, 1000, 100000}) {
            const int d = 20 * s * s;
            auto in = lower_bound_inputs(GraphFamily::clique(s), d);
            EXPECT_GE(in.R, s / 2.0);
            EXPECT_LE(in.R, s);
            EXPECT_LE(in.B(), 512.0 * s * s * s);
            const double env = std::min(std::sqrt(std::log(double(d) / (s * s)) / (6.0 * n * s)), 1.0 / (32 * s));
            EXPECT_GE(lower_bound_theta(in, n), env);
        }
}

TEST(LowerBoundTheta, CollapsesAsOverlapApproachesOne) {
    LowerBoundInputs in{1, std::sqrt(2.0), 1, 2, 1 - 1e-12};
    EXPECT_LT(lower_bound_theta(in, 100), 1e-6);
    in.N = 1.0;
    EXPECT_THROW(lower_bound_theta(in, 100), BadInputs);
    in.N = 0.5;
    in.R = 0.5;
    EXPECT_THROW(lower_bound_theta(in, 100), BadInputs);
}

TEST(MeanOverlap, Examples) {
    EXPECT_DOUBLE_EQ(mean_overlap(GraphFamily::single_edge(), 8), 0.5);
    EXPECT_DOUBLE_EQ(mean_overlap(GraphFamily::clique(3), 9), 1.0);
}

TEST(MeanOverlap, EnumerationEqualsClosedForm) {
    for (int d = 3; d <= 8; ++d)
        for (auto f : {GraphFamily::single_edge(), GraphFamily::clique(3), GraphFamily::star(3)}) {
            if (f.s > d) continue;
            auto r = mean_overlap_exact(f, d, 100000);
            EXPECT_EQ(r.num * d, std::int64_t(f.s) * f.s * r.den) << f.name() << " d=" << d;
        }
}

TEST(NegativeAssociation, Examples) {
    EXPECT_DOUBLE_EQ(negative_association_bound(0.3, 1, 0.0, 50), std::exp(0.3));
    EXPECT_DOUBLE_EQ(negative_association_bound(0.01, 1, 0.05, 100), std::exp(0.01 * std::exp(0.75)));
}

TEST(NegativeAssociation, DominatesPairSum) {
    for (int d = 4; d <= 8; ++d) {
        const auto ps = enumerate_placements(GraphFamily::single_edge(), d, 1000);
        const double N = mean_overlap(GraphFamily::single_edge(), d);
        for (int n : {1, 10, 100})
            for (double th : {0.01, 0.05, 0.1}) {
                double lhs = 0;
                for (const auto& g : ps)
                    for (const auto& h : ps) lhs += std::exp(3.0 * n * th * th * shared_support(g, h).size());
                lhs /= double(ps.size()) * ps.size();
                EXPECT_LE(lhs, negative_association_bound(N, 1, th, n)) << d << " " << n << " " << th;
            }
    }
}
