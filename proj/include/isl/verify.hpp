#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isl/error.hpp"
#include "isl/eulerian.hpp"
#include "isl/moments.hpp"
#include "isl/reduction.hpp"
#include "isl/scan.hpp"
#include "isl/sqoracle.hpp"

namespace isl {

struct VerifyItem {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    // Test hook: rewrites the recursion value of P_{2m}(s) before comparison.
    std::function<BigInt(int m, int s, const BigInt&)> perturb_moment;
};

namespace detail {

inline Graph verify_random_graph(int d, double p, Rng& rng) {
    std::bernoulli_distribution coin(p);
    std::vector<Edge> e;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (coin(rng)) e.push_back({i, j});
    return Graph(d, e);
}

// Even-degree edge subsets of g, by size, over all 2^|E| subsets.
inline std::vector<std::int64_t> eulerian_subsets(const Graph& g) {
    const auto& E = g.edges();
    std::vector<std::int64_t> c(E.size() + 1, 0);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << E.size()); ++x) {
        std::uint64_t odd = 0;
        for (std::size_t e = 0; e < E.size(); ++e)
            if ((x >> e) & 1) odd ^= (std::uint64_t{1} << E[e].first) ^ (std::uint64_t{1} << E[e].second);
        if (!odd) ++c[std::popcount(x)];
    }
    return c;
}

// E₀[(P_G/P₀)(P_H/P₀)]^n by summing over all 2^d states.
inline double chi_square_pair_states(const Graph& g, const Graph& h, double theta, std::int64_t n) {
    ExactDistribution pg(IsingModel::from_graph(g, theta, IsingModel::Mode::unrestricted));
    ExactDistribution ph(IsingModel::from_graph(h, theta, IsingModel::Mode::unrestricted));
    const double p0 = std::ldexp(1.0, -g.d());
    double s = 0;
    for (std::size_t x = 0; x < pg.probs().size(); ++x) s += pg[x] * ph[x] / p0;
    return std::pow(s, static_cast<double>(n));
}

}  // namespace detail

inline std::vector<VerifyItem> verify_eulerian(const VerifyOptions& opt = {}) {
    std::vector<VerifyItem> out;
    Rng rng(opt.seed);
    {
        std::string bad;
        for (int t = 0; t < 60 && bad.empty(); ++t) {
            auto g = detail::verify_random_graph(4 + t % 5, 0.5, rng);
            if (g.num_edges() > 16) continue;
            auto want = detail::eulerian_subsets(g);
            auto got = eulerian_counts(Multigraph(g));
            for (std::size_t k = 0; k < want.size(); ++k)
                if ((k < got.size() ? got[k] : 0) != want[k]) bad = "instance " + std::to_string(t) + ", k=" + std::to_string(k);
        }
        out.push_back({"eulerian", "Eulerian counts vs edge-subset enumeration", bad.empty(), bad});
    }
    {
        double worst = 0;
        for (int t = 0; t < 40; ++t) {
            int d = 4 + t % 5;
            auto g = detail::verify_random_graph(d, 0.4, rng), h = detail::verify_random_graph(d, 0.4, rng);
            double theta = 0.05 + 0.1 * uniform01(rng);
            std::int64_t n = 1 + t % 4;
            if (g.num_edges() + h.num_edges() > kEulerianMultiplicityLimit) continue;
            double a = chi_square_pair(g, h, theta, n), b = detail::chi_square_pair_states(g, h, theta, n);
            worst = std::max(worst, std::fabs(a - b) / b);
        }
        std::ostringstream os;
        os << "max relative error " << worst;
        out.push_back({"eulerian", "chi-square pair vs state enumeration", worst <= 1e-9, os.str()});
    }
    {
        double v = chi_square_divergence(GraphFamily::clique(3), 7, 0.0, 10, 100000);
        out.push_back({"eulerian", "chi-square divergence at theta=0 is 0", v == 0.0, "value " + std::to_string(v)});
    }
    {
        std::string bad;
        for (int t = 0; t < 40 && bad.empty(); ++t) {
            int d = 5 + t % 4;
            auto g = detail::verify_random_graph(d, 0.5, rng), h = detail::verify_random_graph(d, 0.5, rng);
            if (g.num_edges() + h.num_edges() > kEulerianMultiplicityLimit) continue;
            auto u = u_coefficients(g, h);
            std::vector<Edge> common;
            std::set_intersection(g.edges().begin(), g.edges().end(), h.edges().begin(), h.edges().end(),
                                  std::back_inserter(common));
            if (u[0] != 0 || u[1] != 0 || u[2] != static_cast<std::int64_t>(common.size()))
                bad = "instance " + std::to_string(t);
        }
        out.push_back({"eulerian", "u_0 = u_1 = 0 and u_2 = |E(G) ∩ E(G')|", bad.empty(), bad});
    }
    return out;
}

inline std::vector<VerifyItem> verify_moments(const VerifyOptions& opt = {}) {
    std::vector<VerifyItem> out;
    {
        auto polys = moment_polys(8);
        std::string bad;
        for (int m = 0; m <= 8 && bad.empty(); ++m)
            for (int s = 0; s <= 20 && bad.empty(); ++s) {
                BigInt v = polys[m].eval(s);
                if (opt.perturb_moment) v = opt.perturb_moment(m, s, v);
                if (v != moment_bruteforce(m, s)) bad = "mismatch at (m,s)=(" + std::to_string(m) + "," + std::to_string(s) + ")";
            }
        out.push_back({"moments", "P_2m recursion vs brute force", bad.empty(), bad});
    }
    {
        auto E = tangent_numbers(4);
        bool ok = E == std::vector<BigInt>{1, 2, 16, 272};
        out.push_back({"moments", "tangent numbers 1, 2, 16, 272", ok, ok ? "" : "unexpected values"});
    }
    {
        std::string bad;
        for (int m = 0; m <= 8 && bad.empty(); ++m)
            for (int s = 0; s <= 20 && bad.empty(); ++s)
                for (int l = 0; 2 * l <= m && bad.empty(); ++l)
                    if (!truncation_bounds_check(m, s, l))
                        bad = "(m,s,l)=(" + std::to_string(m) + "," + std::to_string(s) + "," + std::to_string(l) + ")";
        out.push_back({"moments", "truncation bounds, m <= 8, s <= 20", bad.empty(), bad});
    }
    {
        bool ok = true;
        for (int m = 1; m <= 30; ++m) {
            auto lc = leading_coefficients(m);
            ok &= lc.a0 == odd_double_factorial(m) && lc.a1 == a1_closed(m);
        }
        out.push_back({"moments", "leading coefficients match (2m-1)!! closed forms", ok, ""});
    }
    {
        auto bad = scalar_inequalities_check(-10, 10, 0.01);
        std::size_t v = 0;
        for (const auto& r : bad) v += r.violations;
        out.push_back({"moments", "scalar inequalities on |x| <= 10, step 0.01", v == 0, std::to_string(v) + " violations"});
    }
    return out;
}

inline std::vector<VerifyItem> verify_reduction(const VerifyOptions& = {}) {
    std::vector<VerifyItem> out;
    {
        double worst = 0;
        for (double sigma : {0.1, 0.5, 2.0})
            for (int s : {3, 6, 10}) {
                double t = 0;
                for (int k = 0; k <= s; ++k) t += binomial(s, k) * sign_pmf_by_count(sigma, s, k);
                worst = std::max(worst, std::fabs(t - 1));
            }
        out.push_back({"reduction", "sign PMF sums to 1", worst <= 1e-10, "max error " + std::to_string(worst)});
    }
    {
        double worst = 0;
        for (double sigma : {0.05, 0.5, 3.0}) {
            double rho = sigma / (1 + sigma);
            worst = std::max(worst, std::fabs(sign_pmf_by_count(sigma, 2, 2) - (0.25 + std::asin(rho) / (2 * std::numbers::pi))));
        }
        out.push_back({"reduction", "two-coordinate sign PMF vs orthant formula", worst <= 1e-12, ""});
    }
    {
        double worst = 0;
        for (int s = 2; s <= 12; s += 2)
            for (double st : {0.1, 0.25, 0.4}) {
                CurieWeissParams p{s, st / s};
                for (int k = 0; k <= s; ++k)
                    worst = std::max(worst, binomial(s, k) * std::fabs(cw_conditional_marginal(p, k) - curie_weiss_pmf_by_count(p, k)));
            }
        out.push_back({"reduction", "Curie-Weiss conditional-iid route vs direct PMF", worst <= 1e-8, ""});
    }
    {
        bool ok = true;
        for (int s = 3; s <= 8; ++s) ok &= reduction_certificate(make_reduction_params(0.0, s), 10).exact_tv_one == 0.0;
        out.push_back({"reduction", "exact support TV is 0 at theta=0", ok, ""});
    }
    return out;
}

inline std::vector<VerifyItem> verify_scan(const VerifyOptions& opt = {}) {
    std::vector<VerifyItem> out;
    Rng rng(opt.seed);
    {
        double worst = 0;
        for (int t = 0; t < 20; ++t) {
            int d = 4 + t % 5;
            auto g = detail::verify_random_graph(d, 0.5, rng);
            if (g.num_edges() == 0) continue;
            auto s = sample_exact(IsingModel::from_graph(g, 0.05), 1 + rng() % 150, rng());
            worst = std::max(worst, std::fabs(CompiledWitness(make_witnessing_set({g})).max_w(SpinColumns::from_samples(s)).first -
                                              w_statistic(s, g)));
        }
        out.push_back({"scan", "bitset statistic vs direct sum", worst <= 1e-15, ""});
    }
    {
        bool ok = true;
        for (int t = 0; t < 20; ++t) {
            int d = 4 + t % 6;
            auto g = detail::verify_random_graph(d, 0.5, rng);
            if (g.num_edges() == 0) continue;
            double theta = 0.02 + 0.1 * uniform01(rng);
            ExactDistribution dist(IsingModel::from_graph(g, theta, IsingModel::Mode::unrestricted));
            double ew = 0;
            for (auto [i, j] : g.edges()) ew += dist.pair_moment(i, j);
            ok &= ew / g.num_edges() >= std::tanh(theta) - 1e-12;
        }
        out.push_back({"scan", "E W_H >= tanh(theta) by enumeration", ok, ""});
    }
    {
        auto rep = psi1_tail_check(IsingModel::from_graph(build_pattern(GraphFamily::clique(4), 6, {0, 1, 2, 3}), 0.1),
                                   {build_pattern(GraphFamily::clique(3), 6, {0, 1, 2})}, 100, opt.seed);
        out.push_back({"scan", "MGF of W_H at sqrt(2|E|)/8 is at most e", rep.rows[0].mgf_within_e,
                       "value " + std::to_string(rep.rows[0].exact_mgf)});
    }
    return out;
}

inline std::vector<VerifyItem> verify_oracle(const VerifyOptions& = {}) {
    std::vector<VerifyItem> out;
    {
        bool ok = true;
        for (int d = 2; d <= 12; ++d)
            for (int s = 1; s <= d; ++s) {
                double t = 0;
                for (double m : overlap_counts(s, d)) t += m;
                ok &= t == binomial(d, s);
            }
        out.push_back({"oracle", "overlap counts sum to C(d,s)", ok, ""});
    }
    {
        const int d = 8;
        std::vector<Query> q;
        for (int j = 1; j < d; ++j) q.push_back(pair_query(d, 0, j));
        auto alg = fixed_sequence_algorithm(q, 2, std::vector<double>(q.size(), 0.0), 0.05);
        auto rep = adversarial_oracle(GraphFamily::clique(2), d, 0.3, alg, 400, 0.1);
        out.push_back({"oracle", "adversarial oracle forces total risk 1", rep.risk == 1.0 && rep.band_ok,
                       "fooled placement index " + std::to_string(rep.fooled_index)});
    }
    {
        auto t = oracle_threshold(4, 100, 1, 10);
        out.push_back({"oracle", "oracle threshold caps at 1/(16s)", t.threshold == 1.0 / 64, ""});
    }
    return out;
}

inline std::vector<VerifyItem> verify_suite(const std::string& suite, const VerifyOptions& opt = {}) {
    if (suite == "eulerian") return verify_eulerian(opt);
    if (suite == "moments") return verify_moments(opt);
    if (suite == "reduction") return verify_reduction(opt);
    if (suite == "scan") return verify_scan(opt);
    if (suite == "oracle") return verify_oracle(opt);
    if (suite == "all") {
        std::vector<VerifyItem> all;
        for (const char* s : {"eulerian", "moments", "reduction", "scan", "oracle"}) {
            auto part = verify_suite(s, opt);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    throw UnknownSuite("unknown suite '" + suite + "' (expected eulerian, moments, reduction, scan, oracle or all)");
}

}  // namespace isl
