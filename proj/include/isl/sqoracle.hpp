#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isl/error.hpp"
#include "isl/eulerian.hpp"
#include "isl/graph.hpp"
#include "isl/ising.hpp"
#include "isl/numeric.hpp"
#include "isl/parallel.hpp"
#include "isl/random.hpp"

namespace isl {

struct Query {
    std::string id;
    std::function<double(std::span<const std::int8_t>)> eval;
    double psi1_null = 0;  // ψ₁ norm of q(X) under the null
};

namespace detail {

inline std::vector<std::int8_t> mask_spins(std::uint64_t mask, int d) {
    std::vector<std::int8_t> x(d);
    for (int v = 0; v < d; ++v) x[v] = static_cast<std::int8_t>(spin_of(mask, v));
    return x;
}

// q evaluated on every state of {±1}^d.
inline std::vector<double> query_table(const Query& q, int d) {
    require(d <= kExactPmfLimit, "query tables need d <= 20");
    std::vector<double> t(std::size_t{1} << d);
    for (std::size_t m = 0; m < t.size(); ++m) t[m] = q.eval(mask_spins(m, d));
    return t;
}

// inf{t > 0 : Σ_x p(x) exp(|v(x)|/t) ≤ 2}.
inline double orlicz_psi1(const std::vector<double>& values, const std::vector<double>& probs) {
    double vmax = 0;
    for (double v : values) vmax = std::max(vmax, std::fabs(v));
    if (vmax == 0) return 0;
    auto mgf = [&](double t) {
        KahanSum s;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (probs[i] > 0) s.add(probs[i] * std::exp(std::fabs(values[i]) / t));
        return s.value();
    };
    // exp(|v|/t) ≤ exp(vmax/t) ≤ 2 once t ≥ vmax/ln2.
    double lo = vmax * 1e-6, hi = vmax / std::numbers::ln2;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (mgf(mid) <= 2 ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

// Exact ψ₁ norm of q(X) under `m` by enumeration.
inline double psi1_norm_exact(const IsingModel& m, const Query& q) {
    ExactDistribution dist(m);
    return detail::orlicz_psi1(detail::query_table(q, m.d()), dist.probs());
}

// sup_{k ≤ 64} √k·‖k⁻¹ Σ_{i≤k} ε_i‖_{ψ₁} for i.i.d. Rademacher ε: the constant C in
// ‖W_H‖_{ψ₁} ≤ C|E(H)|^{−1/2} for star witnesses under the null (attained at k = 1).
inline double psi1_pair_constant() {
    static const double c = [] {
        double best = 0;
        for (int k = 1; k <= 64; ++k) {
            std::vector<double> v(k + 1), p(k + 1);
            for (int j = 0; j <= k; ++j) {
                v[j] = (2.0 * j - k) / k;
                p[j] = std::exp(log_binomial(k, j) - k * std::numbers::ln2);
            }
            best = std::max(best, std::sqrt(double(k)) * detail::orlicz_psi1(v, p));
        }
        return best;
    }();
    return c;
}

// W_H(X) = |E(H)|⁻¹ Σ_{(i,j)∈E(H)} X_i X_j, with the calibrated ψ₁ bound.
inline Query witness_query(const Graph& h, std::string id = {}) {
    if (h.num_edges() == 0) throw EmptyWitness("query graph has no edges");
    if (id.empty()) {
        for (auto [i, j] : h.edges()) id += (id.empty() ? "W:" : ",") + std::to_string(i + 1) + "-" + std::to_string(j + 1);
    }
    auto edges = h.edges();
    const double E = static_cast<double>(edges.size());
    return {std::move(id),
            [edges, E](std::span<const std::int8_t> x) {
                double s = 0;
                for (auto [i, j] : edges) s += x[i] * x[j];
                return s / E;
            },
            psi1_pair_constant() / std::sqrt(E)};
}

inline Query pair_query(int d, int i, int j) { return witness_query(Graph(d, {{i, j}})); }

inline Query constant_query(double c) {
    return {"const:" + std::to_string(c), [c](std::span<const std::int8_t>) { return c; }, std::fabs(c) / std::numbers::ln2};
}

struct TranscriptEntry {
    int round = 0;
    std::string query_id;
    double value = 0;
};

class OracleSession {
public:
    // Finite query space: η(𝓠) = log|𝓠|.
    OracleSession(std::vector<Query> space, std::int64_t n, double xi)
        : OracleSession(std::move(space), n, xi, std::nan("")) {}

    OracleSession(std::vector<Query> space, std::int64_t n, double xi, double capacity)
        : space_(std::move(space)), n_(n), xi_(xi) {
        require(!space_.empty(), "query space is empty");
        require(n >= 1, "n must be >= 1");
        require(xi > 0 && xi < 1, "xi must lie in (0, 1)");
        eta_ = std::isnan(capacity) ? std::log(static_cast<double>(space_.size())) : capacity;
        require(eta_ >= 0, "capacity must be >= 0");
        for (std::size_t i = 0; i < space_.size(); ++i) index_[space_[i].id] = i;
        require(index_.size() == space_.size(), "query ids must be unique");
    }

    double capacity() const { return eta_; }
    double xi() const { return xi_; }
    std::int64_t n() const { return n_; }
    const std::vector<Query>& space() const { return space_; }

    // max{η'/n, √(2η'/n)} with η' = η + log(1/ξ).
    double tau() const {
        const double e = (eta_ + std::log(1 / xi_)) / static_cast<double>(n_);
        return std::max(e, std::sqrt(2 * e));
    }

    std::size_t index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw BadInputs("query '" + id + "' is not registered in the session");
        return it->second;
    }

    std::vector<TranscriptEntry> transcript;

private:
    std::vector<Query> space_;
    std::map<std::string, std::size_t> index_;
    std::int64_t n_;
    double xi_;
    double eta_ = 0;
};

// Answers each query with the mean of q over n fresh draws from the model.
// Round t of the session draws from stream (seed, t).
class HonestOracle {
public:
    HonestOracle(const IsingModel& m, std::uint64_t seed) : model_(m), seed_(seed) {
        if (m.d() <= kExactPmfLimit) {
            dist_.emplace(m);
            table_.emplace(dist_->probs());
        }
    }

    double answer(OracleSession& s, const Query& q) {
        s.index_of(q.id);
        const int round = static_cast<int>(s.transcript.size());
        Rng rng = make_rng(seed_, static_cast<std::uint64_t>(round));
        KahanSum acc;
        if (table_) {
            auto& cache = tables_[q.id];
            if (cache.empty()) cache = detail::query_table(q, model_.d());
            for (std::int64_t r = 0; r < s.n(); ++r) acc.add(cache[table_->draw(rng)]);
        } else {
            auto x = sample_gibbs(model_, static_cast<std::size_t>(s.n()), {}, rng(), 1);
            for (std::size_t r = 0; r < x.n; ++r) acc.add(q.eval(x.row(r)));
        }
        const double v = acc.value() / static_cast<double>(s.n());
        s.transcript.push_back({round, q.id, v});
        return v;
    }

private:
    IsingModel model_;
    std::uint64_t seed_;
    std::optional<ExactDistribution> dist_;
    std::optional<AliasTable> table_;
    std::map<std::string, std::vector<double>> tables_;
};

inline double honest_oracle(const IsingModel& m, OracleSession& s, const Query& q, std::uint64_t seed) {
    HonestOracle o(m, seed);
    return o.answer(s, q);
}

struct CoverageResult {
    double coverage = 0;
    double se = 0;
    double target = 0;  // 1 − 2ξ
    std::size_t sessions = 0;
};

// Fraction of sessions in which every query in the space is answered within
// ‖q‖_{ψ₁}·τ of E[q(X)]; norms and means are exact under `m`. Session k uses seed (seed, k).
inline CoverageResult honest_coverage(const IsingModel& m, const std::vector<Query>& space, std::int64_t n, double xi,
                                      std::size_t sessions, std::uint64_t seed, int threads = 1) {
    require(m.d() <= kExactPmfLimit, "coverage needs exact expectations (d <= 20)");
    ExactDistribution dist(m);
    const double tau = OracleSession(space, n, xi).tau();
    std::vector<double> mean(space.size()), band(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        auto t = detail::query_table(space[i], m.d());
        mean[i] = dist.expectation([&](std::uint64_t x) { return t[x]; });
        band[i] = detail::orlicz_psi1(t, dist.probs()) * tau;
    }
    std::vector<std::uint8_t> ok(sessions);
    parallel_for(sessions, resolve_threads(threads), [&](std::size_t k) {
        OracleSession s(space, n, xi);
        HonestOracle o(m, derive_seed(seed, k));
        bool all = true;
        for (std::size_t i = 0; i < space.size(); ++i) all &= std::fabs(o.answer(s, space[i]) - mean[i]) <= band[i];
        ok[k] = all;
    });
    CoverageResult r;
    r.sessions = sessions;
    r.coverage = static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / static_cast<double>(sessions);
    r.se = std::sqrt(std::max(r.coverage * (1 - r.coverage), 0.0) / static_cast<double>(sessions));
    r.target = 1 - 2 * xi;
    return r;
}

// Deterministic adaptive algorithm over a finite query space. `next` returns the
// index of the next query (the first call, on an empty transcript, gives q_init)
// or nullopt to halt; `decide` maps the final transcript to {0,1}.
struct SQAlgorithm {
    std::vector<Query> queries;
    int T = 1;
    std::function<std::optional<std::size_t>(const std::vector<TranscriptEntry>&)> next;
    std::function<int(const std::vector<TranscriptEntry>&)> decide;
};

// Asks the first T queries in order; rejects iff some |answer − null mean| exceeds `cut`.
inline SQAlgorithm fixed_sequence_algorithm(std::vector<Query> queries, int T, std::vector<double> null_means, double cut) {
    require(T >= 1 && static_cast<std::size_t>(T) <= queries.size(), "T must be in 1..|queries|");
    SQAlgorithm a;
    a.queries = std::move(queries);
    a.T = T;
    a.next = [T](const std::vector<TranscriptEntry>& tr) -> std::optional<std::size_t> {
        if (static_cast<int>(tr.size()) >= T) return std::nullopt;
        return tr.size();
    };
    a.decide = [null_means = std::move(null_means), cut](const std::vector<TranscriptEntry>& tr) {
        for (std::size_t t = 0; t < tr.size(); ++t)
            if (std::fabs(tr[t].value - null_means[t]) > cut) return 1;
        return 0;
    };
    return a;
}

// Runs `alg` for at most T rounds; `answer(i)` returns the oracle value for query i.
inline std::pair<std::vector<TranscriptEntry>, int> run_algorithm(const SQAlgorithm& alg,
                                                                  const std::function<double(std::size_t)>& answer) {
    std::vector<TranscriptEntry> tr;
    for (int t = 0; t < alg.T; ++t) {
        auto q = alg.next(tr);
        if (!q) break;
        require(*q < alg.queries.size(), "algorithm chose a query outside its space");
        tr.push_back({t, alg.queries[*q].id, answer(*q)});
    }
    return {tr, alg.decide(tr)};
}

struct AdversaryReport {
    Graph fooled;
    std::size_t fooled_index = 0;
    std::size_t placements = 0;                // |𝓖*|
    std::vector<TranscriptEntry> transcript;   // identical under P₀ and P_{Θ₀}
    std::vector<std::size_t> covered;          // |𝓖(q_t)| per asked query
    std::size_t max_covered = 0;               // max over the whole query space
    bool covering_condition = false;           // T·max|𝓖(q)| < |𝓖*|
    bool answers_from_theta0 = true;           // else the null means were returned
    bool band_ok = false;                      // |E_{Θ₀}q − E₀q| ≤ ψ₁τ on every asked query
    int decision = 0;
    double risk = 0;                           // P₀(ψ=1) + P_{Θ₀}(ψ=0)
    double tau = 0;
};

// Worst-case oracle: finds G₀ ∉ ∪_t 𝓖(q_t) and answers E_{Θ₀}[q_t] under both hypotheses.
// 𝓖(q) = {G : |E_Θ q − E₀ q| ≥ ‖q‖_{ψ₁,0}·τ} from exact expectations.
inline AdversaryReport adversarial_oracle(const GraphFamily& f, int d, double theta, const SQAlgorithm& alg,
                                          std::int64_t n, double xi, std::size_t limit = 100000) {
    require(d <= 12, "adversarial oracle enumerates states; needs d <= 12");
    const auto placements = enumerate_placements(f, d, limit);
    const std::size_t P = placements.size();
    const std::size_t Q = alg.queries.size();
    OracleSession session(alg.queries, n, xi);
    const double tau = session.tau();

    std::vector<std::vector<double>> tables(Q);
    for (std::size_t i = 0; i < Q; ++i) tables[i] = detail::query_table(alg.queries[i], d);
    auto mean_under = [&](const ExactDistribution& dist, std::size_t i) {
        return dist.expectation([&](std::uint64_t x) { return tables[i][x]; });
    };
    ExactDistribution null_dist(IsingModel::null_model(d));
    std::vector<double> e0(Q);
    for (std::size_t i = 0; i < Q; ++i) e0[i] = mean_under(null_dist, i);
    // eg[p][i] = E_{Θ_p} q_i
    std::vector<std::vector<double>> eg(P, std::vector<double>(Q));
    for (std::size_t p = 0; p < P; ++p) {
        ExactDistribution dist(IsingModel::from_graph(placements[p], theta, IsingModel::Mode::unrestricted));
        for (std::size_t i = 0; i < Q; ++i) eg[p][i] = mean_under(dist, i);
    }
    auto covers = [&](std::size_t i, std::size_t p) { return std::fabs(eg[p][i] - e0[i]) >= alg.queries[i].psi1_null * tau; };

    AdversaryReport rep;
    rep.placements = P;
    rep.tau = tau;
    for (std::size_t i = 0; i < Q; ++i) {
        std::size_t c = 0;
        for (std::size_t p = 0; p < P; ++p) c += covers(i, p);
        rep.max_covered = std::max(rep.max_covered, c);
    }
    rep.covering_condition = static_cast<std::size_t>(alg.T) * rep.max_covered < P;

    // Pass 1: answer with null means, which fit the band of every uncovered G,
    // so the query sequence does not depend on G₀ yet.
    std::vector<std::size_t> asked;
    auto [tr0, dec0] = run_algorithm(alg, [&](std::size_t i) {
        asked.push_back(i);
        return e0[i];
    });
    std::vector<bool> alive(P, true);
    for (auto i : asked)
        for (std::size_t p = 0; p < P; ++p)
            if (covers(i, p)) alive[p] = false;
    auto it = std::find(alive.begin(), alive.end(), true);
    if (it == alive.end())
        throw NoUncoveredGraph("every placement is covered by the " + std::to_string(asked.size()) + " queries asked");
    const std::size_t g0 = static_cast<std::size_t>(it - alive.begin());

    // Pass 2: answer E_{Θ₀}q directly. Kept if every query it
    // induces is still uncovered by G₀; otherwise pass 1 stands.
    std::vector<std::size_t> asked2;
    auto [tr1, dec1] = run_algorithm(alg, [&](std::size_t i) {
        asked2.push_back(i);
        return eg[g0][i];
    });
    bool pass2 = std::none_of(asked2.begin(), asked2.end(), [&](std::size_t i) { return covers(i, g0); });
    rep.answers_from_theta0 = pass2;
    rep.transcript = pass2 ? tr1 : tr0;
    rep.decision = pass2 ? dec1 : dec0;
    const auto& used = pass2 ? asked2 : asked;
    for (auto i : used) {
        std::size_t c = 0;
        for (std::size_t p = 0; p < P; ++p) c += covers(i, p);
        rep.covered.push_back(c);
    }
    rep.band_ok = std::none_of(used.begin(), used.end(), [&](std::size_t i) { return covers(i, g0); });
    rep.fooled = placements[g0];
    rep.fooled_index = g0;
    // The answer channel is deterministic and identical under both hypotheses,
    // so the decision is shared: P₀(ψ=1) + P_{Θ₀}(ψ=0) = ψ + (1 − ψ).
    rep.risk = rep.decision + (1 - rep.decision);
    return rep;
}

// m_j = C(s, s−j)·C(d−s, j): clique placements sharing exactly s − j vertices with a fixed one.
inline std::vector<double> overlap_counts(int s, int d) {
    require(s >= 1 && s <= d, "need 1 <= s <= d");
    std::vector<double> m(s + 1);
    for (int j = 0; j <= s; ++j) m[j] = binomial(s, s - j) * binomial(d - s, j);
    return m;
}

// ζ = min_{0 ≤ j ≤ s−1} m_{j+1}/m_j; zero ratios (d < 2s) make ζ = 0.
inline double overlap_zeta(int s, int d) {
    auto m = overlap_counts(s, d);
    double z = INFINITY;
    for (int j = 0; j < s; ++j) z = std::min(z, m[j] > 0 ? m[j + 1] / m[j] : 0.0);
    return z;
}

struct OracleThreshold {
    double threshold = 0;
    double kappa = 0;
    bool budget_ok = false;  // T ≤ d^p
};

// κ√(1/n) ∧ 1/(16s), κ defaulting to [√2(2 + p/η)]⁻¹.
inline OracleThreshold oracle_threshold(int s, int d, std::int64_t n, double T, double p = 1, double eta = 0.5,
                                        std::optional<double> kappa = std::nullopt) {
    require(s >= 1 && n >= 1 && eta > 0 && p > 0, "oracle_threshold needs s, n >= 1 and p, eta > 0");
    OracleThreshold r;
    r.kappa = kappa ? *kappa : 1 / (std::numbers::sqrt2 * (2 + p / eta));
    r.threshold = std::min(r.kappa / std::sqrt(static_cast<double>(n)), 1.0 / (16.0 * s));
    r.budget_ok = T <= std::pow(static_cast<double>(d), p);
    return r;
}

struct ChiSquareLowerBoundCheck {
    std::size_t g_plus = 0;  // |𝓖⁺(q)|
    double average = NAN;    // |𝓖⁺|⁻² Σ_{G,G'∈𝓖⁺} E₀[(dP_Θ/dP₀)(dP_Θ'/dP₀)]
    double bound = 0;        // 1 + 1/n
    bool holds = false;
};

// 𝓖⁺(q) = {G : E_Θ q − E₀ q > ‖q‖_{ψ₁,0}·τ}, thresholded on exact expectations; the
// pair terms are the single-sample χ² pair values.
inline ChiSquareLowerBoundCheck chi_square_lower_bound_check(const GraphFamily& f, int d, double theta, const Query& q,
                                                             const OracleSession& session, std::size_t limit = 100000) {
    require(d <= 12, "needs d <= 12");
    const auto placements = enumerate_placements(f, d, limit);
    auto t = detail::query_table(q, d);
    ExactDistribution null_dist(IsingModel::null_model(d));
    const double e0 = null_dist.expectation([&](std::uint64_t x) { return t[x]; });
    std::vector<Graph> plus;
    for (const auto& g : placements) {
        ExactDistribution dist(IsingModel::from_graph(g, theta, IsingModel::Mode::unrestricted));
        if (dist.expectation([&](std::uint64_t x) { return t[x]; }) - e0 > q.psi1_null * session.tau()) plus.push_back(g);
    }
    ChiSquareLowerBoundCheck r;
    r.g_plus = plus.size();
    r.bound = 1 + 1 / static_cast<double>(session.n());
    if (plus.empty()) return r;
    KahanSum s;
    for (const auto& a : plus)
        for (const auto& b : plus) s.add(chi_square_pair(a, b, theta, 1));
    r.average = s.value() / static_cast<double>(plus.size() * plus.size());
    r.holds = r.average > r.bound;
    return r;
}

}  // namespace isl
