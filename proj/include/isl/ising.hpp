#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "isl/error.hpp"
#include "isl/graph.hpp"
#include "isl/numeric.hpp"
#include "isl/parallel.hpp"
#include "isl/random.hpp"

namespace isl {

struct Coupling {
    int i, j;  // i < j
    double theta;
};

// Zero-field ferromagnetic model with one coupling per unordered edge:
// P(x) ∝ exp(Σ_{(i,j)∈E} θ_ij x_i x_j).
class IsingModel {
public:
    enum class Mode { high_temperature, unrestricted };

    IsingModel() = default;

    IsingModel(int d, std::vector<Coupling> couplings, Mode mode = Mode::high_temperature)
        : d_(d), mode_(mode) {
        require(d >= 1, "model dimension must be >= 1");
        std::vector<std::pair<Edge, double>> sorted;
        for (auto c : couplings) {
            if (c.i > c.j) std::swap(c.i, c.j);
            require(c.i >= 0 && c.j < d && c.i != c.j, "coupling indices out of range");
            require(c.theta >= 0 && std::isfinite(c.theta), "couplings must be finite and nonnegative");
            if (c.theta > 0) sorted.push_back({{c.i, c.j}, c.theta});
        }
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t x = 1; x < sorted.size(); ++x)
            require(sorted[x].first != sorted[x - 1].first, "duplicate coupling");
        nbrs_.assign(d, {});
        for (auto& [e, th] : sorted) {
            couplings_.push_back({e.first, e.second, th});
            nbrs_[e.first].push_back({e.second, th});
            nbrs_[e.second].push_back({e.first, th});
        }
        if (mode_ == Mode::high_temperature && frobenius() > 0.5 + 1e-12)
            throw DomainError("||Theta||_F = " + std::to_string(frobenius()) +
                              " exceeds 1/2; construct with Mode::unrestricted to allow it");
    }

    static IsingModel null_model(int d) { return IsingModel(d, {}); }

    static IsingModel from_graph(const Graph& g, double theta, Mode mode = Mode::high_temperature) {
        std::vector<Coupling> c;
        for (auto [i, j] : g.edges()) c.push_back({i, j, theta});
        return IsingModel(g.d(), std::move(c), mode);
    }

    static IsingModel from_matrix(const std::vector<std::vector<double>>& m, Mode mode = Mode::high_temperature) {
        int d = static_cast<int>(m.size());
        std::vector<Coupling> c;
        for (int i = 0; i < d; ++i) {
            require(static_cast<int>(m[i].size()) == d, "theta matrix must be square");
            require(m[i][i] == 0, "theta diagonal must be zero");
            for (int j = i + 1; j < d; ++j) {
                require(m[i][j] == m[j][i], "theta matrix must be symmetric");
                c.push_back({i, j, m[i][j]});
            }
        }
        return IsingModel(d, std::move(c), mode);
    }

    int d() const { return d_; }
    Mode mode() const { return mode_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }
    const std::vector<std::pair<int, double>>& neighbors(int i) const { return nbrs_[i]; }

    double theta(int i, int j) const {
        for (auto [k, th] : nbrs_[i])
            if (k == j) return th;
        return 0.0;
    }

    // Frobenius norm of the full symmetric matrix (each edge counted twice).
    double frobenius() const {
        double s = 0;
        for (const auto& c : couplings_) s += 2 * c.theta * c.theta;
        return std::sqrt(s);
    }

    // Σ_{edges} θ_ij x_i x_j for a state mask (bit v set ⇔ x_v = +1).
    double energy(std::uint64_t mask) const {
        double e = 0;
        for (const auto& c : couplings_) e += (((mask >> c.i) ^ (mask >> c.j)) & 1) ? -c.theta : c.theta;
        return e;
    }

private:
    int d_ = 0;
    Mode mode_ = Mode::high_temperature;
    std::vector<Coupling> couplings_;
    std::vector<std::vector<std::pair<int, double>>> nbrs_;
};

enum class Sampler : std::uint8_t { exact_enum = 0, gibbs = 1, curie_weiss_cond_iid = 2, sign_of_gaussian = 3 };

inline std::string sampler_name(Sampler s) {
    switch (s) {
        case Sampler::exact_enum: return "exact_enum";
        case Sampler::gibbs: return "gibbs";
        case Sampler::curie_weiss_cond_iid: return "curie_weiss_cond_iid";
        case Sampler::sign_of_gaussian: return "sign_of_gaussian";
    }
    return "?";
}

struct SampleMatrix {
    std::size_t n = 0;
    int d = 0;
    std::vector<std::int8_t> spins;  // row-major n × d, entries ±1
    std::uint64_t seed = 0;
    Sampler sampler = Sampler::exact_enum;

    SampleMatrix() = default;
    SampleMatrix(std::size_t n_, int d_, std::uint64_t seed_, Sampler s)
        : n(n_), d(d_), spins(n_ * static_cast<std::size_t>(d_), 1), seed(seed_), sampler(s) {}

    std::int8_t operator()(std::size_t r, int c) const { return spins[r * d + c]; }
    std::int8_t& operator()(std::size_t r, int c) { return spins[r * d + c]; }
    std::span<const std::int8_t> row(std::size_t r) const { return {spins.data() + r * d, static_cast<std::size_t>(d)}; }

    friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;
};

inline std::uint64_t state_mask(std::span<const std::int8_t> x) {
    std::uint64_t m = 0;
    for (std::size_t v = 0; v < x.size(); ++v)
        if (x[v] > 0) m |= std::uint64_t{1} << v;
    return m;
}

inline int spin_of(std::uint64_t mask, int v) { return ((mask >> v) & 1) ? 1 : -1; }

constexpr int kExactPmfLimit = 20;

// Full PMF table over {±1}^d from the product form Π(1 + t_ij x_i x_j),
// t_ij = tanh θ_ij, normalized by its sum.
class ExactDistribution {
public:
    explicit ExactDistribution(const IsingModel& m) : d_(m.d()) {
        if (d_ > kExactPmfLimit)
            throw SizeExceeded("exact PMF supports d <= " + std::to_string(kExactPmfLimit) + ", got " + std::to_string(d_));
        const auto& cs = m.couplings();
        std::vector<double> lp(cs.size()), lm(cs.size());
        for (std::size_t e = 0; e < cs.size(); ++e) {
            double t = std::tanh(cs[e].theta);
            lp[e] = std::log1p(t);
            lm[e] = std::log1p(-t);
        }
        const std::size_t states = std::size_t{1} << d_;
        std::vector<double> logw(states);
        double mx = -INFINITY;
        for (std::size_t s = 0; s < states; ++s) {
            double lw = 0;
            for (std::size_t e = 0; e < cs.size(); ++e) lw += (((s >> cs[e].i) ^ (s >> cs[e].j)) & 1) ? lm[e] : lp[e];
            logw[s] = lw;
            mx = std::max(mx, lw);
        }
        p_.resize(states);
        KahanSum z;
        for (std::size_t s = 0; s < states; ++s) {
            p_[s] = std::exp(logw[s] - mx);
            z.add(p_[s]);
        }
        const double inv = 1.0 / z.value();
        for (auto& v : p_) v *= inv;
    }

    int d() const { return d_; }
    const std::vector<double>& probs() const { return p_; }
    double operator[](std::uint64_t mask) const { return p_[mask]; }
    double pmf(std::span<const std::int8_t> x) const { return p_[state_mask(x)]; }

    double expectation(const std::function<double(std::uint64_t)>& f) const {
        KahanSum s;
        for (std::size_t m = 0; m < p_.size(); ++m) s.add(p_[m] * f(m));
        return s.value();
    }

    double pair_moment(int i, int j) const {
        return expectation([&](std::uint64_t m) { return double(spin_of(m, i) * spin_of(m, j)); });
    }

private:
    int d_;
    std::vector<double> p_;
};

inline double pmf_exact(const IsingModel& m, std::span<const std::int8_t> x) {
    require(static_cast<int>(x.size()) == m.d(), "spin vector length must equal d");
    return ExactDistribution(m).pmf(x);
}

// Vose alias table over a discrete distribution.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& p) : prob_(p.size()), alias_(p.size()) {
        const std::size_t K = p.size();
        std::vector<double> scaled(K);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < K; ++i) {
            scaled[i] = p[i] * static_cast<double>(K);
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            auto s = small.back(), l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
        for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
    }

    std::size_t draw(Rng& rng) const {
        double u = uniform01(rng) * static_cast<double>(prob_.size());
        auto i = static_cast<std::size_t>(u);
        if (i >= prob_.size()) i = prob_.size() - 1;
        return (u - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Rows are produced in fixed blocks, block b drawing from stream (seed, b), so
// the output does not depend on the thread count.
constexpr std::size_t kSampleBlock = 4096;

template <class RowFn>
void fill_blocks(SampleMatrix& out, int threads, RowFn&& row_fn) {
    const std::size_t blocks = (out.n + kSampleBlock - 1) / kSampleBlock;
    parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
        Rng rng = make_rng(out.seed, b);
        const std::size_t hi = std::min(out.n, (b + 1) * kSampleBlock);
        for (std::size_t r = b * kSampleBlock; r < hi; ++r)
            row_fn(rng, std::span<std::int8_t>(out.spins.data() + r * out.d, static_cast<std::size_t>(out.d)));
    });
}

inline SampleMatrix sample_from_table(const ExactDistribution& dist, std::size_t n, std::uint64_t seed, int threads = 1) {
    SampleMatrix out(n, dist.d(), seed, Sampler::exact_enum);
    AliasTable table(dist.probs());
    fill_blocks(out, threads, [&](Rng& rng, std::span<std::int8_t> row) {
        auto s = table.draw(rng);
        for (std::size_t v = 0; v < row.size(); ++v) row[v] = static_cast<std::int8_t>(spin_of(s, static_cast<int>(v)));
    });
    return out;
}

inline SampleMatrix sample_exact(const IsingModel& m, std::size_t n, std::uint64_t seed, int threads = 1) {
    return sample_from_table(ExactDistribution(m), n, seed, threads);
}

struct GibbsOptions {
    int burn_in = -1;  // sweeps; -1 selects 50·d
    int thin = 5;      // sweeps between retained draws
};

// Systematic-scan Gibbs sampler. One chain per worker; worker c draws from
// stream (seed, c) and fills a contiguous slice of rows.
inline SampleMatrix sample_gibbs(const IsingModel& m, std::size_t n, GibbsOptions opt, std::uint64_t seed,
                                 int threads = 1) {
    const int d = m.d();
    if (opt.burn_in < 0) opt.burn_in = 50 * d;
    require(opt.burn_in >= 1 && opt.thin >= 1, "burn_in and thin must be >= 1");
    require(d <= 10000, "gibbs sampler supports d <= 10^4");
    SampleMatrix out(n, d, seed, Sampler::gibbs);
    const int chains = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::size_t>(n, 1))));
    parallel_for(static_cast<std::size_t>(chains), chains, [&](std::size_t c) {
        Rng rng = make_rng(seed, c);
        std::vector<int> x(d);
        for (auto& v : x) v = rademacher(rng);
        auto sweep = [&] {
            for (int i = 0; i < d; ++i) {
                double h = 0;
                for (auto [j, th] : m.neighbors(i)) h += th * x[j];
                double p = 1.0 / (1.0 + std::exp(-2.0 * h));
                x[i] = uniform01(rng) < p ? 1 : -1;
            }
        };
        for (int b = 0; b < opt.burn_in; ++b) sweep();
        const std::size_t lo = n * c / chains, hi = n * (c + 1) / chains;
        for (std::size_t r = lo; r < hi; ++r) {
            for (int t = 0; t < opt.thin; ++t) sweep();
            for (int v = 0; v < d; ++v) out(r, v) = static_cast<std::int8_t>(x[v]);
        }
    });
    return out;
}

// Curie-Weiss model P(v) ∝ exp(θ(Σ v_i)²) on s spins.
struct CurieWeissParams {
    int s = 2;
    double theta = 0;
};

// Per-edge model with the same law: each pair appears twice in (Σ v)², so the
// edge coupling is 2θ.
inline IsingModel cw_to_edge_coupling(const CurieWeissParams& p) {
    require(p.s >= 1, "Curie-Weiss size must be >= 1");
    std::vector<Coupling> c;
    for (int i = 0; i < p.s; ++i)
        for (int j = i + 1; j < p.s; ++j) c.push_back({i, j, 2 * p.theta});
    return IsingModel(p.s, std::move(c), IsingModel::Mode::unrestricted);
}

// log Σ_k C(s,k) exp(θ(2k−s)²) − s·log 2, i.e. log(Z_{Y'}/√(2π)).
inline double cw_log_c(const CurieWeissParams& p) {
    std::vector<double> terms;
    for (int k = 0; k <= p.s; ++k) {
        double m = 2.0 * k - p.s;
        terms.push_back(log_binomial(p.s, k) + p.theta * m * m);
    }
    return log_sum_exp(terms) - p.s * std::numbers::ln2;
}

// Probability of one configuration with `plus` coordinates equal to +1.
inline double curie_weiss_pmf_by_count(const CurieWeissParams& p, int plus) {
    require(p.s <= 60, "curie_weiss_pmf_exact supports s <= 60");
    require(plus >= 0 && plus <= p.s, "plus count out of range");
    if (p.theta == 0) return std::ldexp(1.0, -p.s);
    double m = 2.0 * plus - p.s;
    return std::exp(p.theta * m * m - cw_log_c(p) - p.s * std::numbers::ln2);
}

inline double curie_weiss_pmf_exact(const CurieWeissParams& p, std::span<const std::int8_t> v) {
    require(static_cast<int>(v.size()) == p.s, "sign vector length must equal s");
    int plus = 0;
    for (auto x : v) plus += x > 0;
    return curie_weiss_pmf_by_count(p, plus);
}

inline double cwn_log_density(const CurieWeissParams& p, double y) {
    const double a = std::sqrt(2.0 * p.theta);
    return p.s * log_cosh(a * y) - 0.5 * y * y - 0.5 * std::log(2.0 * std::numbers::pi) - cw_log_c(p);
}

inline double cwn_density(const CurieWeissParams& p, double y) { return std::exp(cwn_log_density(p, y)); }

// Half-width of the window holding all but a negligible tail of the CWN law.
inline double cwn_window(const CurieWeissParams& p) { return std::sqrt(2.0 * p.theta) * p.s + 12.0; }

// P(V = v) for a configuration with `plus` (+1)'s, via the conditional-i.i.d.
// representation: ∫ g(ay)^plus (1 − g(ay))^(s−plus) p_{Y'}(y) dy, a = √(2θ).
inline double cw_conditional_marginal(const CurieWeissParams& p, int plus) {
    const double a = std::sqrt(2.0 * p.theta);
    const double lc = cw_log_c(p);
    const double L = cwn_window(p);
    auto f = [&](double y) {
        double z = a * y;
        // log g(z) = −log(1 + e^{−2z}); log(1 − g(z)) = −log(1 + e^{2z})
        double lg = -std::log1p(std::exp(-2 * z)), lh = -std::log1p(std::exp(2 * z));
        if (z > 30) lh = -2 * z;
        if (z < -30) lg = 2 * z;
        double ld = p.s * log_cosh(z) - 0.5 * y * y - 0.5 * std::log(2.0 * std::numbers::pi) - lc;
        return std::exp(plus * lg + (p.s - plus) * lh + ld);
    };
    return integrate(f, -L, 0.0, 1e-14, 1e-15).value + integrate(f, 0.0, L, 1e-14, 1e-15).value;
}

// Inverse-CDF sampler for the CWN law on a 2^14-point tabulated grid.
class CwnSampler {
public:
    explicit CwnSampler(const CurieWeissParams& p, int points = 1 << 14) : p_(p) {
        const double L = cwn_window(p);
        y_.resize(points);
        cdf_.assign(points, 0.0);
        std::vector<double> dens(points);
        for (int i = 0; i < points; ++i) {
            y_[i] = -L + 2 * L * i / (points - 1);
            dens[i] = cwn_density(p, y_[i]);
        }
        for (int i = 1; i < points; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (y_[i] - y_[i - 1]);
        const double total = cdf_.back();
        for (auto& c : cdf_) c /= total;
    }

    double draw(Rng& rng) const {
        double u = uniform01(rng);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.begin()) return y_.front();
        if (it == cdf_.end()) return y_.back();
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        double w = (u - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
        return y_[i - 1] + w * (y_[i] - y_[i - 1]);
    }

private:
    CurieWeissParams p_;
    std::vector<double> y_, cdf_;
};

inline SampleMatrix sample_curie_weiss(const CurieWeissParams& p, std::size_t n, std::uint64_t seed, int threads = 1) {
    require(p.theta >= 0, "Curie-Weiss theta must be >= 0");
    SampleMatrix out(n, p.s, seed, Sampler::curie_weiss_cond_iid);
    CwnSampler cwn(p);
    const double a = std::sqrt(2.0 * p.theta);
    fill_blocks(out, threads, [&](Rng& rng, std::span<std::int8_t> row) {
        double y = cwn.draw(rng);
        double prob = 1.0 / (1.0 + std::exp(-2.0 * a * y));
        for (auto& v : row) v = uniform01(rng) < prob ? 1 : -1;
    });
    return out;
}

}  // namespace isl
