#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "isl/error.hpp"
#include "isl/ising.hpp"
#include "isl/moments.hpp"
#include "isl/numeric.hpp"
#include "isl/parallel.hpp"
#include "isl/random.hpp"

namespace isl {

// Spiked covariance I + σ·1_I 1_Iᵀ on d coordinates, support I (0-based, sorted).
struct SpikedModel {
    int d = 0;
    double sigma = 0;
    std::vector<int> support;

    SpikedModel() = default;
    SpikedModel(int d_, double sigma_, std::vector<int> support_) : d(d_), sigma(sigma_), support(std::move(support_)) {
        require(d >= 1, "dimension must be >= 1");
        require(sigma >= 0 && std::isfinite(sigma), "spike strength must be finite and >= 0");
        std::sort(support.begin(), support.end());
        require(std::adjacent_find(support.begin(), support.end()) == support.end(), "duplicate support index");
        for (int v : support) require(v >= 0 && v < d, "support index out of range");
    }

    int s() const { return static_cast<int>(support.size()); }
};

struct RealMatrix {
    std::size_t n = 0;
    int d = 0;
    std::vector<double> values;  // row-major

    RealMatrix() = default;
    RealMatrix(std::size_t n_, int d_) : n(n_), d(d_), values(n_ * static_cast<std::size_t>(d_), 0.0) {}
    double operator()(std::size_t r, int c) const { return values[r * d + c]; }
    double& operator()(std::size_t r, int c) { return values[r * d + c]; }
};

// W = Z + √σ·Y·1_I with Z ~ N(0, I_d), Y ~ N(0, 1). Block b of 4096 rows uses stream (seed, b).
inline RealMatrix sample_spiked(const SpikedModel& m, std::size_t n, std::uint64_t seed, int threads = 1) {
    RealMatrix out(n, m.d);
    const double a = std::sqrt(m.sigma);
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
        Rng rng = make_rng(seed, b);
        std::normal_distribution<double> g;
        for (std::size_t r = b * kSampleBlock; r < std::min(n, (b + 1) * kSampleBlock); ++r) {
            for (int c = 0; c < m.d; ++c) out(r, c) = g(rng);
            const double y = g(rng);
            for (int c : m.support) out(r, c) += a * y;
        }
    });
    return out;
}

// Entrywise sign, with sign(0) = +1.
inline SampleMatrix sign_reduce(const RealMatrix& w, std::uint64_t seed = 0) {
    SampleMatrix s(w.n, w.d, seed, Sampler::sign_of_gaussian);
    for (std::size_t i = 0; i < w.values.size(); ++i) s.spins[i] = w.values[i] >= 0 ? 1 : -1;
    return s;
}

constexpr int kSignPmfLimit = 14;

// P(U = u) for any u with `plus` entries equal to +1, where U = sign(Z + √σ·Y·1):
// ∫ Φ(√σ y)^plus (1 − Φ(√σ y))^(s−plus) φ(y) dy.
inline double sign_pmf_by_count(double sigma, int s, int plus) {
    require(s >= 1 && s <= kSignPmfLimit, "sign_pmf_exact supports 1 <= s <= 14");
    require(plus >= 0 && plus <= s, "plus count out of range");
    require(sigma >= 0, "sigma must be >= 0");
    if (sigma == 0) return std::ldexp(1.0, -s);
    const double a = std::sqrt(sigma);
    auto f = [&](double y) {
        double z = a * y;
        double lp = std::log(normal_cdf(z)), lm = std::log(normal_cdf(-z));
        double l = -0.5 * y * y - 0.5 * std::log(2 * std::numbers::pi);
        if (plus > 0) l += plus * lp;
        if (plus < s) l += (s - plus) * lm;
        return std::exp(l);
    };
    const double inf = std::numeric_limits<double>::infinity();
    return integrate(f, -inf, 0, 1e-12, 1e-12).value + integrate(f, 0, inf, 1e-12, 1e-12).value;
}

inline double sign_pmf_exact(const SpikedModel& m, std::span<const std::int8_t> u) {
    require(static_cast<int>(u.size()) == m.s(), "sign vector length must equal the support size");
    int plus = 0;
    for (auto x : u) plus += x > 0;
    return sign_pmf_by_count(m.sigma, m.s(), plus);
}

// Full PMF over {±1}^s (bit v of the index ⇔ u_v = +1) from per-count values.
inline std::vector<double> pmf_table_from_counts(int s, const std::vector<double>& by_count) {
    std::vector<double> t(std::size_t{1} << s);
    for (std::size_t x = 0; x < t.size(); ++x) t[x] = by_count[std::popcount(x)];
    return t;
}

inline std::vector<double> sign_pmf_table(double sigma, int s) {
    std::vector<double> c(s + 1);
    for (int k = 0; k <= s; ++k) c[k] = sign_pmf_by_count(sigma, s, k);
    return pmf_table_from_counts(s, c);
}

inline std::vector<double> curie_weiss_pmf_table(double theta, int s) {
    require(s <= kSignPmfLimit, "table supports s <= 14");
    std::vector<double> c(s + 1);
    for (int k = 0; k <= s; ++k) c[k] = curie_weiss_pmf_by_count({s, theta}, k);
    return pmf_table_from_counts(s, c);
}

inline double tv_exact(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "PMFs must share a support");
    require(a.size() <= (std::size_t{1} << kSignPmfLimit), "tv_exact supports s <= 14");
    KahanSum t;
    for (std::size_t i = 0; i < a.size(); ++i) t.add(std::fabs(a[i] - b[i]));
    return 0.5 * t.value();
}

// Exchangeable laws: TV from per-count probabilities weighted by C(s,k).
inline double tv_by_count(int s, const std::vector<double>& a, const std::vector<double>& b) {
    KahanSum t;
    for (int k = 0; k <= s; ++k) t.add(binomial(s, k) * std::fabs(a[k] - b[k]));
    return 0.5 * t.value();
}

struct ReductionParams {
    double theta = 0;
    int s = 1;
    double sigma = 0;        // πθ/(1 − 2sθ)
    double kappa_const = 0;  // πθ
};

inline ReductionParams make_reduction_params(double theta, int s) {
    require(s >= 1, "support size must be >= 1");
    if (!(theta >= 0) || s * theta >= 0.5) throw DomainError("reduction needs theta >= 0 and s*theta < 1/2");
    const double pi = std::numbers::pi;
    return {theta, s, pi * theta / (1 - 2 * s * theta), pi * theta};
}

struct ReductionCertificate {
    ReductionParams params;
    std::int64_t n = 0;
    double gaussian_term = 0;     // CWN vs rescaled Gaussian bound
    double conditional_term = 0;  // √(n s κ³ / (1 − 2sθ)³)
    double total_bound = 0;
    bool exact_available = false;
    double exact_tv_one = NAN;    // TV(sign law, Curie-Weiss law) on the support, one sample
    double hellinger_sq = NAN;    // one-sample squared Hellinger, 1 − BC
    double exact_tv_n_lower = NAN;
    double exact_tv_n_upper = NAN;
    bool exact_below_bound = false;
};

// Both analytic terms, plus exact one-sample TV and an n-sample bracket from
// the Bhattacharyya coefficient: 1 − BC^n ≤ TV_n ≤ √(1 − BC^{2n}), TV_n ≤ n·TV_1.
inline ReductionCertificate reduction_certificate(const ReductionParams& p, std::int64_t n, double tv_constant = 1.0) {
    require(n >= 1, "n must be >= 1");
    if (p.s * p.theta >= 0.5) throw DomainError("reduction needs s*theta < 1/2");
    ReductionCertificate c;
    c.params = p;
    c.n = n;
    const double x = 1 - 2 * p.s * p.theta;
    c.gaussian_term = tv_bound_cwn_gaussian(p.theta, p.s, n, tv_constant);
    c.conditional_term = std::sqrt(static_cast<double>(n) * p.s * std::pow(p.kappa_const, 3) / std::pow(x, 3));
    c.total_bound = c.gaussian_term + c.conditional_term;
    if (p.s <= kSignPmfLimit) {
        c.exact_available = true;
        std::vector<double> a(p.s + 1), b(p.s + 1);
        for (int k = 0; k <= p.s; ++k) {
            a[k] = sign_pmf_by_count(p.sigma, p.s, k);
            b[k] = curie_weiss_pmf_by_count({p.s, p.theta}, k);
        }
        c.exact_tv_one = tv_by_count(p.s, a, b);
        KahanSum bc;
        for (int k = 0; k <= p.s; ++k) bc.add(binomial(p.s, k) * std::sqrt(a[k] * b[k]));
        const double BC = std::min(1.0, bc.value());
        c.hellinger_sq = 1 - BC;
        const double nd = static_cast<double>(n);
        c.exact_tv_n_lower = std::max(c.exact_tv_one, -std::expm1(nd * std::log(BC)));
        c.exact_tv_n_upper = std::min({1.0, nd * c.exact_tv_one, std::sqrt(-std::expm1(2 * nd * std::log(BC)))});
        c.exact_below_bound = c.exact_tv_n_upper <= c.total_bound;
    }
    return c;
}

struct TvSweepRow {
    double theta = 0;
    double tv = 0;
};

struct TvSweep {
    std::vector<TvSweepRow> rows;
    bool monotone = true;  // reported, not asserted
};

// Exact one-sample TV between the sign-reduced and Curie-Weiss support laws over a θ grid.
inline TvSweep tv_sweep(int s, const std::vector<double>& thetas) {
    TvSweep sw;
    for (double t : thetas) {
        auto c = reduction_certificate(make_reduction_params(t, s), 1);
        sw.rows.push_back({t, c.exact_tv_one});
    }
    auto sorted = sw.rows;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.theta < b.theta; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].tv < sorted[i - 1].tv - 1e-13) sw.monotone = false;
    return sw;
}

struct ReductionOutput {
    ReductionParams params;
    std::vector<int> support;
    RealMatrix pca;
    SampleMatrix signs;  // sign_reduce(pca)
    SampleMatrix ising;  // Curie-Weiss(θ) on the support, independent Rademacher elsewhere
};

// Spiked Gaussian draws with σ(θ), their signs, and a companion Ising-clique sample.
// The support is a seeded uniform s-subset; streams: support (seed, 0), Gaussian
// (seed, 1), Ising (seed, 2), off-support Rademacher (seed, 3).
inline ReductionOutput end_to_end_reduction(double theta, int s, int d, std::size_t n, std::uint64_t seed,
                                            int threads = 1) {
    require(s >= 1 && s <= d, "need 1 <= s <= d");
    ReductionOutput out;
    out.params = make_reduction_params(theta, s);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    Rng pick = make_rng(seed, 0);
    std::shuffle(perm.begin(), perm.end(), pick);
    out.support.assign(perm.begin(), perm.begin() + s);
    std::sort(out.support.begin(), out.support.end());

    SpikedModel m(d, out.params.sigma, out.support);
    out.pca = sample_spiked(m, n, derive_seed(seed, 1), threads);
    out.signs = sign_reduce(out.pca, seed);

    auto cw = sample_curie_weiss({s, theta}, n, derive_seed(seed, 2), threads);
    out.ising = SampleMatrix(n, d, seed, Sampler::curie_weiss_cond_iid);
    std::vector<int> on(d, -1);
    for (int k = 0; k < s; ++k) on[out.support[k]] = k;
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
        Rng rng = make_rng(derive_seed(seed, 3), b);
        for (std::size_t r = b * kSampleBlock; r < std::min(n, (b + 1) * kSampleBlock); ++r)
            for (int c = 0; c < d; ++c)
                out.ising(r, c) = on[c] >= 0 ? cw(r, on[c]) : static_cast<std::int8_t>(rademacher(rng));
    });
    return out;
}

// E[U_i U_j] for sign-reduced support coordinates: (2/π)·arcsin(σ/(1+σ)).
inline double sign_pair_correlation(double sigma) { return 2 / std::numbers::pi * std::asin(sigma / (1 + sigma)); }

// E[V_i V_j] under Curie-Weiss(θ) on s spins, from E[(ΣV)²] = s + s(s−1)·E[V_iV_j].
inline double curie_weiss_pair_correlation(double theta, int s) {
    require(s >= 2, "pair correlation needs s >= 2");
    KahanSum m2;
    for (int k = 0; k <= s; ++k) {
        double m = 2.0 * k - s;
        m2.add(std::exp(log_binomial(s, k) + std::log(curie_weiss_pmf_by_count({s, theta}, k))) * m * m);
    }
    return (m2.value() - s) / (static_cast<double>(s) * (s - 1));
}

// Mean of X_i X_j over rows and over all pairs drawn from `cols`.
inline double empirical_pair_correlation(const SampleMatrix& x, const std::vector<int>& cols) {
    require(cols.size() >= 2 && x.n >= 1, "need two columns and one row");
    double acc = 0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < cols.size(); ++a)
        for (std::size_t b = a + 1; b < cols.size(); ++b, ++pairs)
            for (std::size_t r = 0; r < x.n; ++r) acc += x(r, cols[a]) * x(r, cols[b]);
    return acc / (static_cast<double>(pairs) * static_cast<double>(x.n));
}

struct TwoSampleResult {
    double accuracy = 0.5;  // k-fold cross-validated
    std::size_t features = 0;
};

// L2-regularised logistic classifier on pairwise products X_iX_j (marginals are
// symmetric under both laws, so single-spin features carry no signal).
inline TwoSampleResult two_sample_accuracy(const SampleMatrix& a, const SampleMatrix& b, std::uint64_t seed,
                                           int folds = 5, double l2 = 1e-2, int iters = 300) {
    require(a.d == b.d && a.n >= static_cast<std::size_t>(folds) && b.n >= static_cast<std::size_t>(folds),
            "two-sample test needs matching d and n >= folds per class");
    const int d = a.d;
    std::vector<std::pair<int, int>> feats;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) feats.push_back({i, j});
    const std::size_t F = feats.size() + 1;
    const std::size_t N = a.n + b.n;
    std::vector<std::int8_t> X(N * F);
    std::vector<double> y(N);
    for (std::size_t r = 0; r < N; ++r) {
        const SampleMatrix& src = r < a.n ? a : b;
        std::size_t row = r < a.n ? r : r - a.n;
        X[r * F] = 1;
        for (std::size_t f = 0; f < feats.size(); ++f) X[r * F + f + 1] = src(row, feats[f].first) * src(row, feats[f].second);
        y[r] = r < a.n ? 1.0 : 0.0;
    }
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t correct = 0;
    for (int k = 0; k < folds; ++k) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < N; ++i) (static_cast<int>(i % folds) == k ? test : train).push_back(order[i]);
        std::vector<double> w(F, 0.0), grad(F);
        // Features are ±1, so the loss Hessian is bounded by (F/4)·I; step 4/F is safe.
        const double step = 4.0 / static_cast<double>(F);
        for (int it = 0; it < iters; ++it) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (auto r : train) {
                double z = 0;
                for (std::size_t f = 0; f < F; ++f) z += w[f] * X[r * F + f];
                double e = 1 / (1 + std::exp(-z)) - y[r];
                for (std::size_t f = 0; f < F; ++f) grad[f] += e * X[r * F + f];
            }
            for (std::size_t f = 0; f < F; ++f) w[f] -= step * (grad[f] / static_cast<double>(train.size()) + (f ? l2 * w[f] : 0));
        }
        for (auto r : test) {
            double z = 0;
            for (std::size_t f = 0; f < F; ++f) z += w[f] * X[r * F + f];
            correct += (z > 0) == (y[r] > 0.5);
        }
    }
    return {static_cast<double>(correct) / static_cast<double>(N), F - 1};
}

}  // namespace isl
