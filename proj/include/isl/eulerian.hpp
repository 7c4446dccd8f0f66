#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "isl/error.hpp"
#include "isl/graph.hpp"
#include "isl/numeric.hpp"
#include "isl/parallel.hpp"

namespace isl {

constexpr int kEulerianMultiplicityLimit = 24;

// Integer-coefficient polynomial in t, ascending degree.
struct IntPolynomial {
    std::vector<std::int64_t> coeffs;

    std::int64_t operator[](std::size_t k) const { return k < coeffs.size() ? coeffs[k] : 0; }
    std::size_t size() const { return coeffs.size(); }

    double eval(double t) const {
        double r = 0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * t + static_cast<double>(*it);
        return r;
    }
};

inline IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
    IntPolynomial r;
    if (a.coeffs.empty() || b.coeffs.empty()) return r;
    r.coeffs.assign(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    return r;
}

inline IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) {
    IntPolynomial r;
    r.coeffs.assign(std::max(a.size(), b.size()), 0);
    for (std::size_t k = 0; k < r.size(); ++k) r.coeffs[k] = a[k] - b[k];
    return r;
}

// One chosen sub-multiset: copies[c] edges taken from edge class c.
struct EulerianLeaf {
    const std::vector<std::pair<Edge, int>>& classes;
    const std::vector<int>& copies;
    int edges;
    std::int64_t weight;  // Π C(m_c, copies[c]): parallel edges are distinguishable
};

// Visits every even-degree sub-multiset of g with at most `max_k` edges.
// Edge classes are processed as a mixed-radix counter; a vertex whose last
// incident class has been decided must already have even degree.
template <class Fn>
void for_each_eulerian(const Multigraph& g, int max_k, Fn&& fn) {
    if (g.total_multiplicity() > kEulerianMultiplicityLimit)
        throw SizeExceeded("Eulerian enumeration supports total multiplicity <= " +
                           std::to_string(kEulerianMultiplicityLimit) + ", got " +
                           std::to_string(g.total_multiplicity()));
    if (g.d() > 64) throw SizeExceeded("Eulerian enumeration supports d <= 64");
    const auto classes = g.edge_classes();
    const std::size_t C = classes.size();
    // closed[c]: vertices with no incident class at index >= c.
    std::vector<std::uint64_t> closed(C + 1, 0);
    {
        std::vector<int> last(g.d(), -1);
        for (std::size_t c = 0; c < C; ++c) {
            last[classes[c].first.first] = static_cast<int>(c);
            last[classes[c].first.second] = static_cast<int>(c);
        }
        for (std::size_t c = 0; c <= C; ++c)
            for (int v = 0; v < g.d(); ++v)
                if (last[v] < static_cast<int>(c)) closed[c] |= std::uint64_t{1} << v;
    }
    std::vector<int> copies(C, 0);
    auto rec = [&](auto&& self, std::size_t c, std::uint64_t parity, int edges, std::int64_t weight) -> void {
        if (parity & closed[c]) return;
        if (c == C) {
            fn(EulerianLeaf{classes, copies, edges, weight});
            return;
        }
        auto [e, mult] = classes[c];
        const std::uint64_t flip = (std::uint64_t{1} << e.first) | (std::uint64_t{1} << e.second);
        std::int64_t binom = 1;
        for (int x = 0; x <= mult && edges + x <= max_k; ++x) {
            copies[c] = x;
            self(self, c + 1, (x & 1) ? parity ^ flip : parity, edges + x, weight * binom);
            binom = binom * (mult - x) / (x + 1);
        }
        copies[c] = 0;
    };
    rec(rec, 0, 0, 0, 1);
}

namespace detail {

// Union-find over the vertices touched by a leaf; returns component labels
// (−1 for untouched vertices).
inline std::vector<int> leaf_components(int d, const EulerianLeaf& leaf) {
    UnionFind uf(d);
    std::vector<char> touched(d, 0);
    for (std::size_t c = 0; c < leaf.classes.size(); ++c) {
        if (leaf.copies[c] == 0) continue;
        auto [i, j] = leaf.classes[c].first;
        uf.unite(i, j);
        touched[i] = touched[j] = 1;
    }
    std::vector<int> comp(d, -1);
    for (int v = 0; v < d; ++v)
        if (touched[v]) comp[v] = uf.find(v);
    return comp;
}

inline bool single_component(const std::vector<int>& comp) {
    int label = -1;
    for (int c : comp) {
        if (c < 0) continue;
        if (label < 0) label = c;
        if (c != label) return false;
    }
    return label >= 0;
}

}  // namespace detail

// counts[k] = |𝓔(k, g)| for k = 0..total multiplicity.
inline std::vector<std::int64_t> eulerian_counts(const Multigraph& g) {
    std::vector<std::int64_t> counts(g.total_multiplicity() + 1, 0);
    for_each_eulerian(g, g.total_multiplicity(), [&](const EulerianLeaf& leaf) { counts[leaf.edges] += leaf.weight; });
    return counts;
}

inline std::int64_t count_eulerian(const Multigraph& g, int k) {
    if (k < 0 || k > g.total_multiplicity()) return 0;
    std::int64_t total = 0;
    for_each_eulerian(g, k, [&](const EulerianLeaf& leaf) {
        if (leaf.edges == k) total += leaf.weight;
    });
    return total;
}

// Connected Eulerian subgraphs with k >= 1 edges (the empty subgraph is not counted).
inline std::int64_t count_eulerian_connected(const Multigraph& g, int k) {
    if (k <= 0 || k > g.total_multiplicity()) return 0;
    std::int64_t total = 0;
    for_each_eulerian(g, k, [&](const EulerianLeaf& leaf) {
        if (leaf.edges != k) return;
        if (detail::single_component(detail::leaf_components(g.d(), leaf))) total += leaf.weight;
    });
    return total;
}

// Eulerian k-subgraphs in which two distinct vertices of `marked` share a component.
inline std::int64_t q_count(const Multigraph& g, const std::vector<int>& marked, int k) {
    std::int64_t total = 0;
    for_each_eulerian(g, k, [&](const EulerianLeaf& leaf) {
        if (leaf.edges != k) return;
        auto comp = detail::leaf_components(g.d(), leaf);
        for (std::size_t a = 0; a < marked.size(); ++a)
            for (std::size_t b = a + 1; b < marked.size(); ++b)
                if (comp[marked[a]] >= 0 && comp[marked[a]] == comp[marked[b]]) {
                    total += leaf.weight;
                    return;
                }
    });
    return total;
}

// Connected Eulerian k-subgraphs containing at least two distinct marked vertices.
inline std::int64_t p_count(const Multigraph& g, const std::vector<int>& marked, int k) {
    std::int64_t total = 0;
    for_each_eulerian(g, k, [&](const EulerianLeaf& leaf) {
        if (leaf.edges != k || k == 0) return;
        auto comp = detail::leaf_components(g.d(), leaf);
        if (!detail::single_component(comp)) return;
        int hits = 0;
        for (int v : marked) hits += comp[v] >= 0;
        if (hits >= 2) total += leaf.weight;
    });
    return total;
}

constexpr int kFPolyEdgeLimit = 24;

inline IntPolynomial f_poly(const Multigraph& g) { return {eulerian_counts(g)}; }

inline IntPolynomial f_poly(const Graph& g) {
    if (g.num_edges() > kFPolyEdgeLimit) throw SizeExceeded("f_poly supports |E| <= 24");
    return f_poly(Multigraph(g));
}

// u_k = c_k − Σ a_{k1} b_{k2}: coefficients of f_{g⊕h} − f_g·f_h.
inline IntPolynomial u_coefficients(const Graph& g, const Graph& h) {
    require(g.d() == h.d(), "graphs must share d");
    Multigraph gh = Multigraph(g) + Multigraph(h);
    return f_poly(gh) - f_poly(g) * f_poly(h);
}

// E_0[(P_Θ/P_0)(P_Θ'/P_0)] over n samples with Θ = θA_g, Θ' = θA_h.
inline double chi_square_pair_from_polys(const IntPolynomial& fg, const IntPolynomial& fh, const IntPolynomial& fgh,
                                         double theta, std::int64_t n) {
    const double t = std::tanh(theta);
    const double base = fgh.eval(t) / (fg.eval(t) * fh.eval(t));
    if (base > 1e3) return std::exp(static_cast<double>(n) * std::log(base));
    return std::pow(base, static_cast<double>(n));
}

inline double chi_square_pair(const Graph& g, const Graph& h, double theta, std::int64_t n) {
    require(g.d() == h.d(), "graphs must share d");
    require(n >= 1, "n must be >= 1");
    return chi_square_pair_from_polys(f_poly(g), f_poly(h), f_poly(Multigraph(g) + Multigraph(h)), theta, n);
}

// χ² divergence between the uniform placement mixture and the null, n samples.
inline double chi_square_divergence(const GraphFamily& f, int d, double theta, std::int64_t n, std::size_t limit,
                                    int threads = 1) {
    require(n >= 1, "n must be >= 1");
    const auto placements = enumerate_placements(f, d, limit);
    const std::size_t P = placements.size();
    std::vector<IntPolynomial> fp(P);
    for (std::size_t a = 0; a < P; ++a) fp[a] = f_poly(placements[a]);
    std::vector<double> rows(P, 0.0);
    parallel_for(P, resolve_threads(threads), [&](std::size_t a) {
        KahanSum s;
        const Multigraph ma(placements[a]);
        for (std::size_t b = 0; b < P; ++b) {
            auto fab = f_poly(ma + Multigraph(placements[b]));
            s.add(chi_square_pair_from_polys(fp[a], fp[b], fab, theta, n));
        }
        rows[a] = s.value();
    });
    KahanSum total;
    for (double r : rows) total.add(r);
    return total.value() / (static_cast<double>(P) * static_cast<double>(P)) - 1.0;
}

// Le Cam: 1 − ½√D lower-bounds the minimax risk.
inline double risk_lower_bound(double divergence) { return 1.0 - 0.5 * std::sqrt(std::max(divergence, 0.0)); }

struct LowerBoundInputs {
    double R = 1;       // arboricity
    double Lambda = 0;  // max ‖A_G‖_F
    double Gamma = 0;   // max ‖A_G‖_1
    double Vmax = 0;    // max |V(G)|
    double N = 0;       // mean overlap N(𝓖*)

    double B() const {
        const double gl = std::max(Gamma, Lambda);
        return 512.0 * std::min(std::pow(Lambda, 4), Vmax * gl * gl);
    }
};

inline LowerBoundInputs lower_bound_inputs(const GraphFamily& f, int d) {
    f.check_dimension(d);
    std::vector<int> slots(f.tag == FamilyTag::single_edge ? 2 : f.s);
    std::iota(slots.begin(), slots.end(), 0);
    Graph g = f.tag == FamilyTag::custom ? *f.pattern : build_pattern(f, static_cast<int>(slots.size()), slots);
    LowerBoundInputs in;
    in.R = arboricity(f);
    in.Lambda = std::sqrt(2.0 * static_cast<double>(g.num_edges()));
    in.Gamma = g.max_degree();
    in.Vmax = static_cast<double>(g.support().size());
    in.N = in.Vmax * in.Vmax / d;
    return in;
}

inline double lower_bound_theta(const LowerBoundInputs& in, std::int64_t n) {
    if (!(in.N > 0 && in.N < 1)) throw BadInputs("lower bound requires 0 < N < 1, got N=" + std::to_string(in.N));
    if (in.R < 1) throw BadInputs("lower bound requires R >= 1");
    require(n >= 1, "n must be >= 1");
    const double t1 = std::sqrt(std::log(1.0 / in.N) / (6.0 * static_cast<double>(n) * in.R));
    const double t2 = std::sqrt(in.R / in.B());
    const double t3 = 1.0 / (8.0 * std::max(in.Lambda, in.Gamma));
    return std::min({t1, t2, t3});
}

struct Rational {
    std::int64_t num = 0, den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// max_G E_{G'~U}|V(G) ∩ V(G')| by enumeration, as an unreduced fraction.
inline Rational mean_overlap_exact(const GraphFamily& f, int d, std::size_t limit) {
    const auto ps = enumerate_placements(f, d, limit);
    std::int64_t best = -1;
    for (const auto& g : ps) {
        std::int64_t sum = 0;
        for (const auto& h : ps) {
            std::vector<int> shared;
            std::set_intersection(g.support().begin(), g.support().end(), h.support().begin(), h.support().end(),
                                  std::back_inserter(shared));
            sum += static_cast<std::int64_t>(shared.size());
        }
        best = std::max(best, sum);
    }
    return {best, static_cast<std::int64_t>(ps.size())};
}

inline double mean_overlap(const GraphFamily& f, int d) {
    f.check_dimension(d);
    if (f.tag == FamilyTag::custom) throw BadInputs("mean_overlap needs a placement family");
    const double s = f.tag == FamilyTag::single_edge ? 2 : f.s;
    return s * s / d;
}

inline double negative_association_bound(double N, double R, double theta, std::int64_t n) {
    require(N > 0, "N must be positive");
    return std::exp(N * std::exp(3.0 * static_cast<double>(n) * R * theta * theta));
}

}  // namespace isl
