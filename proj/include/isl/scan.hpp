#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "isl/error.hpp"
#include "isl/graph.hpp"
#include "isl/ising.hpp"
#include "isl/parallel.hpp"
#include "isl/random.hpp"

namespace isl {

// Column-major bitsets of an n × d spin sample: bit r of column v is set iff X_{r,v} = +1.
class SpinColumns {
public:
    SpinColumns(int d, std::size_t n) : d_(d), n_(n), words_((n + 63) / 64), bits_(static_cast<std::size_t>(d) * words_, 0) {}

    static SpinColumns from_samples(const SampleMatrix& s) {
        SpinColumns c(s.d, s.n);
        for (std::size_t r = 0; r < s.n; ++r)
            for (int v = 0; v < s.d; ++v)
                if (s(r, v) > 0) c.bits_[v * c.words_ + r / 64] |= std::uint64_t{1} << (r % 64);
        return c;
    }

    int d() const { return d_; }
    std::size_t n() const { return n_; }

    void clear() { std::fill(bits_.begin(), bits_.end(), 0); }

    // Row r from a state mask (bit v ⇔ x_v = +1); rows must be set on a cleared matrix.
    void set_row(std::size_t r, std::uint64_t mask) {
        const std::uint64_t bit = std::uint64_t{1} << (r % 64);
        const std::size_t w = r / 64;
        while (mask) {
            int v = std::countr_zero(mask);
            bits_[v * words_ + w] |= bit;
            mask &= mask - 1;
        }
    }

    // I.i.d. uniform spins: the null law.
    void randomize(Rng& rng) {
        const std::uint64_t tail = (n_ % 64) ? (std::uint64_t{1} << (n_ % 64)) - 1 : ~std::uint64_t{0};
        for (int v = 0; v < d_; ++v)
            for (std::size_t w = 0; w < words_; ++w) bits_[v * words_ + w] = rng() & (w + 1 == words_ ? tail : ~std::uint64_t{0});
    }

    // Σ_r X_{r,i} X_{r,j}.
    std::int64_t pair_sum(int i, int j) const {
        const std::uint64_t* a = &bits_[i * words_];
        const std::uint64_t* b = &bits_[j * words_];
        std::int64_t diff = 0;
        for (std::size_t w = 0; w < words_; ++w) diff += std::popcount(a[w] ^ b[w]);
        return static_cast<std::int64_t>(n_) - 2 * diff;
    }

private:
    int d_;
    std::size_t n_, words_;
    std::vector<std::uint64_t> bits_;
};

// Ŵ_H = (1/n) Σ_l (1/|E(H)|) Σ_{(i,j)∈E(H)} X_{l,i} X_{l,j}.
inline double w_statistic(const SampleMatrix& s, const Graph& h) {
    if (h.num_edges() == 0) throw EmptyWitness("witness graph has no edges");
    require(h.d() == s.d, "witness dimension differs from samples");
    require(s.n >= 1, "need at least one sample");
    std::int64_t total = 0;
    for (std::size_t r = 0; r < s.n; ++r)
        for (auto [i, j] : h.edges()) total += s(r, i) * s(r, j);
    return static_cast<double>(total) / (static_cast<double>(s.n) * static_cast<double>(h.num_edges()));
}

// Witnessing set flattened to the distinct vertex pairs it touches.
class CompiledWitness {
public:
    explicit CompiledWitness(const WitnessingSet& w) {
        std::vector<Edge> all;
        for (const auto& h : w.members) {
            if (h.num_edges() == 0) throw EmptyWitness("witness graph has no edges");
            all.insert(all.end(), h.edges().begin(), h.edges().end());
        }
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        pairs_ = std::move(all);
        for (const auto& h : w.members) {
            std::vector<std::uint32_t> idx;
            for (Edge e : h.edges())
                idx.push_back(static_cast<std::uint32_t>(std::lower_bound(pairs_.begin(), pairs_.end(), e) - pairs_.begin()));
            members_.push_back(std::move(idx));
        }
    }

    std::size_t size() const { return members_.size(); }

    // max_H Ŵ_H over the set, with the index of a maximizer.
    std::pair<double, std::size_t> max_w(const SpinColumns& c) const {
        std::vector<std::int64_t> sums(pairs_.size());
        for (std::size_t p = 0; p < pairs_.size(); ++p) sums[p] = c.pair_sum(pairs_[p].first, pairs_[p].second);
        double best = -INFINITY;
        std::size_t arg = 0;
        for (std::size_t m = 0; m < members_.size(); ++m) {
            std::int64_t t = 0;
            for (auto p : members_[m]) t += sums[p];
            double w = static_cast<double>(t) / (static_cast<double>(c.n()) * static_cast<double>(members_[m].size()));
            if (w > best) {
                best = w;
                arg = m;
            }
        }
        return {best, arg};
    }

private:
    std::vector<Edge> pairs_;
    std::vector<std::vector<std::uint32_t>> members_;
};

struct ScanConfig {
    WitnessingSet witnessing;
    double kappa = 1.0;
    int R = 1;
    std::int64_t n = 1;

    double threshold() const { return threshold_for(kappa); }
    double threshold_for(double k) const {
        require(R >= 1 && n >= 1, "scan config needs R >= 1 and n >= 1");
        return k / 4.0 * std::sqrt(witnessing.Mcap / (static_cast<double>(R) * static_cast<double>(n)));
    }
};

inline ScanConfig make_scan_config(const GraphFamily& f, int d, std::int64_t n, double kappa, std::size_t limit = 1000000) {
    return ScanConfig{witnessing_set(f, d, limit), kappa, std::max(1, arboricity(f)), n};
}

// ψ = 1 iff max_H Ŵ_H exceeds the threshold strictly.
inline int scan_test(const SpinColumns& c, const CompiledWitness& w, double threshold) {
    return w.max_w(c).first > threshold ? 1 : 0;
}

inline int scan_test(const SampleMatrix& s, const ScanConfig& cfg) {
    require(s.n == static_cast<std::size_t>(cfg.n), "sample count differs from the configured n");
    return scan_test(SpinColumns::from_samples(s), CompiledWitness(cfg.witnessing), cfg.threshold());
}

namespace detail {

constexpr std::size_t kNullChunk = 64;

// Null replications of max_H Ŵ_H; replication r uses stream (stream_seed, r / 64).
inline std::vector<double> null_max_w(const CompiledWitness& w, int d, std::int64_t n, std::size_t reps,
                                      std::uint64_t stream_seed, int threads) {
    std::vector<double> out(reps);
    const std::size_t chunks = (reps + kNullChunk - 1) / kNullChunk;
    parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
        Rng rng = make_rng(stream_seed, c);
        SpinColumns cols(d, static_cast<std::size_t>(n));
        for (std::size_t r = c * kNullChunk; r < std::min(reps, (c + 1) * kNullChunk); ++r) {
            cols.randomize(rng);
            out[r] = w.max_w(cols).first;
        }
    });
    return out;
}

}  // namespace detail

struct KappaCalibration {
    double kappa = 0;
    double null_rate = 0;  // empirical rejection rate at kappa
    double grid_step = 0.01;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
};

// Smallest κ on the grid {0, step, 2·step, ...} whose null rejection rate is ≤ α/2.
inline KappaCalibration calibrate_kappa(const GraphFamily& f, int d, std::int64_t n, double alpha, std::size_t reps,
                                        std::uint64_t seed, int threads = 1, double step = 0.01) {
    require(reps >= 100, "calibration needs reps >= 100");
    require(alpha > 0, "alpha must be positive");
    require(step > 0, "grid step must be positive");
    KappaCalibration cal{0.0, 1.0, step, reps, seed};
    if (alpha >= 1) return cal;
    ScanConfig cfg = make_scan_config(f, d, n, 1.0);
    CompiledWitness w(cfg.witnessing);
    auto stats = detail::null_max_w(w, d, n, reps, derive_seed(seed, 0), threads);
    std::sort(stats.begin(), stats.end());
    auto rate = [&](double k) {
        auto above = stats.end() - std::upper_bound(stats.begin(), stats.end(), cfg.threshold_for(k));
        return static_cast<double>(above) / static_cast<double>(reps);
    };
    // Every Ŵ_H ≤ 1, so the grid ends once the threshold reaches 1.
    const auto last = static_cast<std::int64_t>(std::ceil(4.0 / std::sqrt(cfg.witnessing.Mcap / (cfg.R * double(n))) / step)) + 1;
    std::int64_t lo = 0, hi = last;
    while (lo < hi) {
        std::int64_t mid = (lo + hi) / 2;
        if (rate(mid * step) <= alpha / 2) hi = mid;
        else lo = mid + 1;
    }
    cal.kappa = lo * step;
    cal.null_rate = rate(cal.kappa);
    return cal;
}

struct RiskEstimate {
    double theta = 0;
    double type_I = 0;
    double worst_type_II = 0;
    double total = 0;
    std::size_t reps = 0;
    double se_type_I = 0, se_type_II = 0, se_total = 0;
    std::size_t placements_checked = 0;
    bool placement_subset = false;  // worst case taken over a seeded random subset
    std::size_t worst_placement = 0;
};

struct RiskCurveOptions {
    std::size_t reps = 2000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::size_t max_placements = 2000;
    std::size_t enumerate_limit = 1000000;
    GibbsOptions gibbs{};
};

namespace detail {

inline double binomial_se(double p, std::size_t reps) { return std::sqrt(std::max(p * (1 - p), 0.0) / static_cast<double>(reps)); }

// Acceptance count of ψ under the alternative Θ = θ·A_g.
inline std::size_t alternative_accepts(const Graph& g, double theta, std::int64_t n, const CompiledWitness& w,
                                       double threshold, std::size_t reps, Rng& rng, const GibbsOptions& gibbs) {
    const auto model = IsingModel::from_graph(g, theta, IsingModel::Mode::unrestricted);
    std::size_t accepts = 0;
    if (g.d() <= kExactPmfLimit) {
        ExactDistribution dist(model);
        AliasTable table(dist.probs());
        SpinColumns cols(g.d(), static_cast<std::size_t>(n));
        for (std::size_t r = 0; r < reps; ++r) {
            cols.clear();
            for (std::int64_t row = 0; row < n; ++row) cols.set_row(static_cast<std::size_t>(row), table.draw(rng));
            accepts += scan_test(cols, w, threshold) == 0;
        }
    } else {
        for (std::size_t r = 0; r < reps; ++r) {
            auto s = sample_gibbs(model, static_cast<std::size_t>(n), gibbs, rng(), 1);
            accepts += scan_test(SpinColumns::from_samples(s), w, threshold) == 0;
        }
    }
    return accepts;
}

}  // namespace detail

// Empirical type-I error and worst-case type-II error of ψ over family placements,
// for each θ. Placement p at grid index t draws from stream (seed_t, p) with
// seed_t = derive_seed(seed, t + 1); null replications use derive_seed(seed, 0).
inline std::vector<RiskEstimate> risk_curve(const GraphFamily& f, int d, const std::vector<double>& thetas,
                                            const ScanConfig& cfg, const RiskCurveOptions& opt) {
    require(opt.reps >= 1, "reps must be >= 1");
    const std::int64_t n = cfg.n;
    CompiledWitness w(cfg.witnessing);
    const double thr = cfg.threshold();

    auto placements = enumerate_placements(f, d, opt.enumerate_limit);
    bool subset = false;
    if (placements.size() > opt.max_placements) {
        Rng pick = make_rng(opt.seed, 0xC0FFEE);
        std::shuffle(placements.begin(), placements.end(), pick);
        placements.resize(opt.max_placements);
        subset = true;
    }

    auto null_stats = detail::null_max_w(w, d, n, opt.reps, derive_seed(opt.seed, 0), opt.threads);
    const double type1 =
        static_cast<double>(std::count_if(null_stats.begin(), null_stats.end(), [&](double t) { return t > thr; })) /
        static_cast<double>(opt.reps);

    std::vector<RiskEstimate> out;
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        const std::uint64_t seed_t = derive_seed(opt.seed, t + 1);
        std::vector<std::size_t> accepts(placements.size());
        parallel_for(placements.size(), resolve_threads(opt.threads), [&](std::size_t p) {
            Rng rng = make_rng(seed_t, p);
            accepts[p] = detail::alternative_accepts(placements[p], thetas[t], n, w, thr, opt.reps, rng, opt.gibbs);
        });
        auto worst = std::max_element(accepts.begin(), accepts.end());
        RiskEstimate e;
        e.theta = thetas[t];
        e.type_I = type1;
        e.worst_type_II = static_cast<double>(*worst) / static_cast<double>(opt.reps);
        e.total = e.type_I + e.worst_type_II;
        e.reps = opt.reps;
        e.se_type_I = detail::binomial_se(e.type_I, opt.reps);
        e.se_type_II = detail::binomial_se(e.worst_type_II, opt.reps);
        e.se_total = std::hypot(e.se_type_I, e.se_type_II);
        e.placements_checked = placements.size();
        e.placement_subset = subset;
        e.worst_placement = static_cast<std::size_t>(worst - accepts.begin());
        out.push_back(e);
    }
    return out;
}

struct Psi1Row {
    std::size_t edges = 0;
    double exact_mgf = NAN;      // E_Θ exp(√(2|E(H)|)/8 · W_H) by enumeration (d ≤ 20)
    bool mgf_within_e = false;   // exact_mgf ≤ e
    double psi1_estimate = NAN;  // inf{t : Ê exp(|W_H|/t) ≤ 2}
};

struct Psi1Report {
    std::vector<Psi1Row> rows;
    double slope = NAN;  // least-squares slope of log ψ̂₁ on log |E(H)|
};

// Sub-exponential tail check of W_H = |E(H)|⁻¹ Σ_{(i,j)∈E(H)} X_i X_j for each witness h.
inline Psi1Report psi1_tail_check(const IsingModel& m, const std::vector<Graph>& hs, std::size_t reps, std::uint64_t seed,
                                  int threads = 1) {
    require(reps >= 1, "reps must be >= 1");
    Psi1Report rep;
    std::optional<ExactDistribution> dist;
    if (m.d() <= kExactPmfLimit) dist.emplace(m);
    SampleMatrix s = dist ? sample_from_table(*dist, reps, seed, threads) : sample_gibbs(m, reps, {}, seed, threads);
    for (const auto& h : hs) {
        if (h.num_edges() == 0) throw EmptyWitness("witness graph has no edges");
        require(h.d() == m.d(), "witness dimension differs from model");
        Psi1Row row;
        row.edges = h.num_edges();
        const double E = static_cast<double>(h.num_edges());
        auto w_of = [&](auto&& spin) {
            double t = 0;
            for (auto [i, j] : h.edges()) t += spin(i) * spin(j);
            return t / E;
        };
        if (dist) {
            const double lam = std::sqrt(2 * E) / 8;
            row.exact_mgf = dist->expectation([&](std::uint64_t x) { return std::exp(lam * w_of([&](int v) { return spin_of(x, v); })); });
            row.mgf_within_e = row.exact_mgf <= std::numbers::e;
        }
        std::vector<double> w(reps);
        for (std::size_t r = 0; r < reps; ++r) w[r] = std::fabs(w_of([&](int v) { return double(s(r, v)); }));
        auto mean_exp = [&](double t) {
            double acc = 0;
            for (double x : w) acc += std::exp(x / t);
            return acc / static_cast<double>(reps);
        };
        double lo = 1e-3, hi = 1e3;
        for (int it = 0; it < 100; ++it) {
            double mid = std::sqrt(lo * hi);
            (mean_exp(mid) <= 2 ? hi : lo) = mid;
        }
        row.psi1_estimate = hi;
        rep.rows.push_back(row);
    }
    if (rep.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double k = static_cast<double>(rep.rows.size());
        for (const auto& r : rep.rows) {
            double x = std::log(static_cast<double>(r.edges)), y = std::log(r.psi1_estimate);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        rep.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    }
    return rep;
}

}  // namespace isl
