#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "isl/scan.hpp"
#include "oracles.hpp"

using namespace isl;

namespace {

SampleMatrix null_samples(int d, std::size_t n, std::uint64_t seed) {
    return sample_exact(IsingModel::null_model(d), n, seed);
}

Graph edge_graph(int d, int i, int j) { return Graph(d, {{i, j}}); }

}  // namespace

TEST(WStatistic, AllOnesGivesOne) {
    SampleMatrix s(7, 5, 0, Sampler::exact_enum);
    EXPECT_DOUBLE_EQ(w_statistic(s, build_pattern(GraphFamily::clique(4), 5, {0, 1, 3, 4})), 1.0);
    EXPECT_DOUBLE_EQ(w_statistic(s, edge_graph(5, 2, 3)), 1.0);
}

TEST(WStatistic, SingleOpposedRow) {
    SampleMatrix s(1, 4, 0, Sampler::exact_enum);
    s(0, 1) = -1;
    EXPECT_DOUBLE_EQ(w_statistic(s, edge_graph(4, 0, 1)), -1.0);
}

TEST(WStatistic, EmptyWitnessThrows) {
    SampleMatrix s(3, 4, 0, Sampler::exact_enum);
    EXPECT_THROW(w_statistic(s, Graph::empty(4)), EmptyWitness);
}

TEST(WStatistic, NullSingleEdgeConcentrates) {
    const std::size_t n = 100000;
    auto s = null_samples(4, n, 11);
    EXPECT_LE(std::fabs(w_statistic(s, edge_graph(4, 0, 3))), 5.0 / std::sqrt(double(n)));
}

TEST(WStatistic, BitsetRouteMatchesDirectSum) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 3 + trial % 6;
        std::size_t n = 1 + rng() % 200;
        auto g = oracle::random_graph(d, 0.5, rng);
        if (g.num_edges() == 0) continue;
        auto model = IsingModel::from_graph(g, 0.05);
        auto s = sample_exact(model, n, rng());
        CompiledWitness w(make_witnessing_set({g}));
        EXPECT_NEAR(w.max_w(SpinColumns::from_samples(s)).first, w_statistic(s, g), 1e-15);
    }
}

TEST(WStatistic, GlobalFlipInvariance) {
    auto s = sample_exact(IsingModel::from_graph(build_pattern(GraphFamily::clique(3), 6, {0, 2, 5}), 0.2), 500, 3);
    auto flipped = s;
    for (auto& v : flipped.spins) v = static_cast<std::int8_t>(-v);
    auto h = build_pattern(GraphFamily::star(4), 6, {1, 0, 4, 5});
    EXPECT_DOUBLE_EQ(w_statistic(s, h), w_statistic(flipped, h));
}

TEST(WStatistic, NullMeanWithinFourSe) {
    auto h = build_pattern(GraphFamily::clique(3), 5, {0, 1, 2});
    const int reps = 4000;
    std::vector<double> w(reps);
    for (int r = 0; r < reps; ++r) w[r] = w_statistic(null_samples(5, 20, derive_seed(99, r)), h);
    double mean = std::accumulate(w.begin(), w.end(), 0.0) / reps;
    double var = 0;
    for (double x : w) var += (x - mean) * (x - mean);
    double se = std::sqrt(var / (reps - 1) / reps);
    EXPECT_LE(std::fabs(mean), 4 * se);
}

TEST(WStatistic, GriffithsLowerBoundByEnumeration) {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        int d = 4 + trial % 9;
        double theta = 0.02 + 0.1 * uniform01(rng);
        auto g = oracle::random_graph(d, 0.4, rng);
        if (g.num_edges() < 2) continue;
        // Witness h: a random nonempty subgraph of g.
        std::vector<Edge> he;
        for (auto e : g.edges())
            if (rng() & 1) he.push_back(e);
        if (he.empty()) he.push_back(g.edges()[0]);
        Graph h(d, he);
        ExactDistribution dist(IsingModel::from_graph(g, theta, IsingModel::Mode::unrestricted));
        double ew = 0;
        for (auto [i, j] : h.edges()) ew += dist.pair_moment(i, j);
        ew /= double(h.num_edges());
        EXPECT_GE(ew, std::tanh(theta) - 1e-12) << "trial " << trial;
    }
}

TEST(ScanTest, StrictInequalityAtThreshold) {
    SampleMatrix s(4, 3, 0, Sampler::exact_enum);
    auto ws = make_witnessing_set({edge_graph(3, 0, 1)});
    CompiledWitness w(ws);
    auto cols = SpinColumns::from_samples(s);
    EXPECT_EQ(scan_test(cols, w, 1.0), 0);
    EXPECT_EQ(scan_test(cols, w, std::nextafter(1.0, 0.0)), 1);
}

TEST(ScanTest, RelabelInvariance) {
    const int d = 7;
    auto f = GraphFamily::clique(3);
    auto s = sample_exact(IsingModel::from_graph(build_pattern(f, d, {1, 4, 6}), 0.15), 300, 21);
    auto cfg = make_scan_config(f, d, 300, 1.0);
    std::vector<int> perm = {3, 0, 6, 1, 5, 2, 4};
    SampleMatrix ps = s;
    for (std::size_t r = 0; r < s.n; ++r)
        for (int v = 0; v < d; ++v) ps(r, perm[v]) = s(r, v);
    std::vector<Graph> relabeled;
    for (const auto& h : cfg.witnessing.members) {
        std::vector<Edge> e;
        for (auto [i, j] : h.edges()) e.push_back({perm[i], perm[j]});
        relabeled.emplace_back(d, e);
    }
    ScanConfig pcfg{make_witnessing_set(relabeled), cfg.kappa, cfg.R, cfg.n};
    CompiledWitness w(cfg.witnessing), pw(pcfg.witnessing);
    EXPECT_DOUBLE_EQ(w.max_w(SpinColumns::from_samples(s)).first, pw.max_w(SpinColumns::from_samples(ps)).first);
    for (double k : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        cfg.kappa = pcfg.kappa = k;
        EXPECT_EQ(scan_test(s, cfg), scan_test(ps, pcfg));
    }
}

TEST(ScanTest, RejectsStrongEmbeddedClique) {
    const int d = 10, sz = 4;
    auto f = GraphFamily::clique(sz);
    auto model = IsingModel::from_graph(build_pattern(f, d, {2, 3, 7, 9}), 0.4 / std::sqrt(double(sz)),
                                        IsingModel::Mode::unrestricted);
    auto cfg = make_scan_config(f, d, 400, 0.0);
    cfg.kappa = calibrate_kappa(f, d, 400, 0.1, 400, 8).kappa;
    int rejects = 0;
    for (int r = 0; r < 50; ++r) rejects += scan_test(sample_exact(model, 400, derive_seed(3, r)), cfg);
    EXPECT_GE(rejects, 48);
}

TEST(ScanConfig, ThresholdFormula) {
    auto cfg = make_scan_config(GraphFamily::clique(3), 12, 400, 7.0);
    EXPECT_EQ(cfg.R, 2);
    EXPECT_EQ(cfg.witnessing.members.size(), 220u);
    EXPECT_NEAR(cfg.witnessing.Mcap, std::log(220.0) / 3, 1e-15);
    EXPECT_NEAR(cfg.threshold(), 7.0 / 4 * std::sqrt(std::log(220.0) / 3 / 800), 1e-15);
}

TEST(CalibrateKappa, AlphaOneAllowsZero) {
    EXPECT_EQ(calibrate_kappa(GraphFamily::clique(3), 6, 50, 1.0, 100, 1).kappa, 0.0);
}

TEST(CalibrateKappa, NullRateWithinHalfAlpha) {
    auto f = GraphFamily::clique(3);
    auto cal = calibrate_kappa(f, 8, 100, 0.1, 2000, 4);
    EXPECT_LE(cal.null_rate, 0.05);
    EXPECT_GT(cal.kappa, 0.0);
    // One grid step lower must exceed α/2, otherwise κ was not the smallest.
    auto cfg = make_scan_config(f, 8, 100, cal.kappa - cal.grid_step);
    CompiledWitness w(cfg.witnessing);
    auto stats = detail::null_max_w(w, 8, 100, 2000, derive_seed(4, 0), 1);
    double rate = std::count_if(stats.begin(), stats.end(), [&](double t) { return t > cfg.threshold(); }) / 2000.0;
    EXPECT_GT(rate, 0.05);
}

TEST(CalibrateKappa, StableAcrossSampleSize) {
    auto f = GraphFamily::clique(3);
    double k1 = calibrate_kappa(f, 8, 200, 0.1, 2000, 5).kappa;
    double k2 = calibrate_kappa(f, 8, 800, 0.1, 2000, 5).kappa;
    EXPECT_NEAR(k1, k2, 0.15 * k1);
}

TEST(CalibrateKappa, ThreadCountIndependent) {
    auto f = GraphFamily::star(3);
    EXPECT_EQ(calibrate_kappa(f, 7, 60, 0.2, 500, 12, 1).kappa, calibrate_kappa(f, 7, 60, 0.2, 500, 12, 3).kappa);
}

TEST(RiskCurve, CoincidentHypothesesGiveUnitRisk) {
    auto f = GraphFamily::clique(3);
    auto cfg = make_scan_config(f, 6, 100, 2.0);
    RiskCurveOptions opt;
    opt.reps = 1000;
    opt.seed = 2;
    auto rc = risk_curve(f, 6, {0.0}, cfg, opt);
    ASSERT_EQ(rc.size(), 1u);
    EXPECT_NEAR(rc[0].total, 1.0, 4 * rc[0].se_total + 0.05);
    EXPECT_GE(rc[0].total, 1.0 - 4 * rc[0].se_total);
    EXPECT_DOUBLE_EQ(rc[0].total, rc[0].type_I + rc[0].worst_type_II);
    EXPECT_EQ(rc[0].placements_checked, 20u);
    EXPECT_FALSE(rc[0].placement_subset);
}

TEST(RiskCurve, DeterministicAcrossThreads) {
    auto f = GraphFamily::clique(3);
    auto cfg = make_scan_config(f, 7, 80, 3.0);
    RiskCurveOptions opt;
    opt.reps = 200;
    opt.seed = 9;
    auto a = risk_curve(f, 7, {0.1, 0.3}, cfg, opt);
    opt.threads = 4;
    auto b = risk_curve(f, 7, {0.1, 0.3}, cfg, opt);
    for (std::size_t t = 0; t < a.size(); ++t) {
        EXPECT_EQ(a[t].type_I, b[t].type_I);
        EXPECT_EQ(a[t].worst_type_II, b[t].worst_type_II);
    }
}

TEST(RiskCurve, PlacementSubsetFlagged) {
    auto f = GraphFamily::clique(2);
    auto cfg = make_scan_config(f, 8, 40, 3.0);
    RiskCurveOptions opt;
    opt.reps = 50;
    opt.max_placements = 10;
    auto rc = risk_curve(f, 8, {0.2}, cfg, opt);
    EXPECT_TRUE(rc[0].placement_subset);
    EXPECT_EQ(rc[0].placements_checked, 10u);
}

TEST(RiskCurve, TooManyPlacements) {
    auto f = GraphFamily::clique(3);
    auto cfg = make_scan_config(f, 6, 40, 3.0);
    RiskCurveOptions opt;
    opt.enumerate_limit = 5;
    EXPECT_THROW(risk_curve(f, 6, {0.2}, cfg, opt), TooMany);
}

TEST(Psi1, NullSingleEdgeExactMgf) {
    auto rep = psi1_tail_check(IsingModel::null_model(2), {edge_graph(2, 0, 1)}, 1000, 1);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_NEAR(rep.rows[0].exact_mgf, std::cosh(std::sqrt(2.0) / 8), 1e-15);
    EXPECT_TRUE(rep.rows[0].mgf_within_e);
}

TEST(Psi1, NullTriangleExactMgf) {
    auto tri = build_pattern(GraphFamily::clique(3), 3, {0, 1, 2});
    auto rep = psi1_tail_check(IsingModel::null_model(3), {tri}, 1000, 1);
    // W ∈ {1, −1/3}: all-equal states (2 of 8) give 1, the rest give −1/3.
    const double lam = std::sqrt(6.0) / 8;
    EXPECT_NEAR(rep.rows[0].exact_mgf, 0.25 * std::exp(lam) + 0.75 * std::exp(-lam / 3), 1e-15);
    EXPECT_TRUE(rep.rows[0].mgf_within_e);
}

TEST(Psi1, MgfBoundOnHighTemperatureModels) {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        int d = 3 + trial % 8;
        auto g = oracle::random_graph(d, 0.6, rng);
        if (g.num_edges() == 0) continue;
        double theta = 0.5 / std::sqrt(2.0 * double(g.num_edges()));
        std::vector<Edge> he;
        for (auto e : g.edges())
            if (rng() % 3) he.push_back(e);
        Graph h = he.empty() ? g : Graph(d, he);
        auto rep = psi1_tail_check(IsingModel::from_graph(g, theta), {h, g}, 10, rng());
        for (const auto& r : rep.rows) {
            EXPECT_TRUE(r.mgf_within_e) << r.exact_mgf;
            EXPECT_LE(std::log(r.exact_mgf), 9.0 / 16 + 1e-12);
        }
    }
}

TEST(Psi1, NormScalesAsInverseRootEdges) {
    const int d = 17;
    std::vector<Graph> stars;
    for (int k : {1, 2, 4, 8, 16}) {
        std::vector<int> place = {0};
        for (int j = 1; j <= k; ++j) place.push_back(j);
        stars.push_back(build_pattern(GraphFamily::star(k + 1), d, place));
    }
    auto rep = psi1_tail_check(IsingModel::null_model(d), stars, 200000, 31);
    EXPECT_NEAR(rep.slope, -0.5, 0.08);
}
