#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "isl/error.hpp"

// Vertices are 0-based in the C++ API; text formats and the CLI use 1-based.
namespace isl {

using Edge = std::pair<int, int>;

class Graph {
public:
    Graph() = default;

    Graph(int d, std::vector<Edge> edges) : d_(d), edges_(std::move(edges)) {
        require(d >= 0, "graph dimension must be nonnegative");
        for (auto& [i, j] : edges_) {
            if (i < 0 || j < 0 || i >= d || j >= d)
                throw BadInputs("edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                ") outside 1.." + std::to_string(d));
            if (i == j) throw BadInputs("self-loop at vertex " + std::to_string(i + 1));
            if (i > j) std::swap(i, j);
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw BadInputs("duplicate edge");
        nbrs_.assign(d_, {});
        for (auto [i, j] : edges_) {
            nbrs_[i].push_back(j);
            nbrs_[j].push_back(i);
        }
        for (auto& nb : nbrs_) std::sort(nb.begin(), nb.end());
        for (int v = 0; v < d_; ++v)
            if (!nbrs_[v].empty()) support_.push_back(v);
    }

    static Graph empty(int d) { return Graph(d, {}); }

    int d() const { return d_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t num_edges() const { return edges_.size(); }
    // V(G): the non-isolated vertices, ascending.
    const std::vector<int>& support() const { return support_; }
    const std::vector<int>& neighbors(int v) const { return nbrs_[v]; }
    int degree(int v) const { return static_cast<int>(nbrs_[v].size()); }

    int max_degree() const {
        int m = 0;
        for (const auto& nb : nbrs_) m = std::max(m, static_cast<int>(nb.size()));
        return m;
    }

    bool has_edge(int i, int j) const {
        if (i > j) std::swap(i, j);
        return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.d_ == b.d_ && a.edges_ == b.edges_;
    }
    friend bool operator<(const Graph& a, const Graph& b) {
        return std::tie(a.d_, a.edges_) < std::tie(b.d_, b.edges_);
    }

private:
    int d_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> nbrs_;
    std::vector<int> support_;
};

// Symmetric adjacency with nonnegative integer multiplicities.
class Multigraph {
public:
    Multigraph() = default;
    explicit Multigraph(int d) : d_(d), adj_(static_cast<std::size_t>(d) * d, 0) {}

    explicit Multigraph(const Graph& g) : Multigraph(g.d()) {
        for (auto [i, j] : g.edges()) add(i, j, 1);
    }

    int d() const { return d_; }
    int operator()(int i, int j) const { return adj_[static_cast<std::size_t>(i) * d_ + j]; }

    void add(int i, int j, int mult) {
        require(i != j, "multigraph self-loop");
        require(i >= 0 && j >= 0 && i < d_ && j < d_, "multigraph vertex out of range");
        adj_[static_cast<std::size_t>(i) * d_ + j] += mult;
        adj_[static_cast<std::size_t>(j) * d_ + i] += mult;
        require((*this)(i, j) >= 0, "negative multiplicity");
    }

    // Adjacency sum (G ⊕ H).
    friend Multigraph operator+(const Multigraph& a, const Multigraph& b) {
        require(a.d_ == b.d_, "multigraph dimensions differ");
        Multigraph r(a.d_);
        for (std::size_t x = 0; x < a.adj_.size(); ++x) r.adj_[x] = a.adj_[x] + b.adj_[x];
        return r;
    }

    // Distinct vertex pairs with positive multiplicity, (i<j, mult).
    std::vector<std::pair<Edge, int>> edge_classes() const {
        std::vector<std::pair<Edge, int>> out;
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j)
                if ((*this)(i, j) > 0) out.push_back({{i, j}, (*this)(i, j)});
        return out;
    }

    int total_multiplicity() const {
        int t = 0;
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j) t += (*this)(i, j);
        return t;
    }

    double frobenius() const {
        double s = 0;
        for (int x : adj_) s += double(x) * x;
        return std::sqrt(s);
    }

    // ℓ1 operator norm: max column sum.
    double l1_norm() const {
        int best = 0;
        for (int j = 0; j < d_; ++j) {
            int c = 0;
            for (int i = 0; i < d_; ++i) c += (*this)(i, j);
            best = std::max(best, c);
        }
        return best;
    }

private:
    int d_ = 0;
    std::vector<int> adj_;
};

enum class FamilyTag { single_edge, clique, star, community, custom };

struct GraphFamily {
    FamilyTag tag = FamilyTag::single_edge;
    int s = 2;  // pattern vertex count (community: k*l)
    int k = 0;
    int l = 0;
    std::optional<Graph> pattern;  // custom only; vertices are pattern slots

    static GraphFamily single_edge() { return {FamilyTag::single_edge, 2, 0, 0, {}}; }
    static GraphFamily clique(int s) {
        require(s >= 2, "clique size must be >= 2");
        return {FamilyTag::clique, s, 0, 0, {}};
    }
    // (s-1)-star: one center plus s-1 leaves.
    static GraphFamily star(int s) {
        require(s >= 2, "star size must be >= 2");
        return {FamilyTag::star, s, 0, 0, {}};
    }
    static GraphFamily community(int k, int l) {
        require(k >= 1 && l >= 1, "community sizes must be >= 1");
        return {FamilyTag::community, k * l, k, l, {}};
    }
    static GraphFamily custom(Graph g) {
        int s = g.d();
        return {FamilyTag::custom, s, 0, 0, std::move(g)};
    }

    std::string name() const {
        switch (tag) {
            case FamilyTag::single_edge: return "single_edge";
            case FamilyTag::clique: return "clique";
            case FamilyTag::star: return "star";
            case FamilyTag::community: return "community";
            case FamilyTag::custom: return "custom";
        }
        return "?";
    }

    void check_dimension(int d) const {
        if (s > d)
            throw BadInputs(name() + " pattern has " + std::to_string(s) + " vertices but d=" +
                            std::to_string(d));
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent, rank;
    explicit UnionFind(int n) : parent(n), rank(n, 0) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
        return true;
    }
};

// Union-find without path compression so unions can be rolled back.
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace detail

inline bool is_forest(const Graph& g) {
    detail::UnionFind uf(g.d());
    for (auto [i, j] : g.edges())
        if (!uf.unite(i, j)) return false;
    return true;
}

inline bool is_clique_on_support(const Graph& g) {
    auto n = static_cast<std::int64_t>(g.support().size());
    return n >= 2 && static_cast<std::int64_t>(g.num_edges()) == n * (n - 1) / 2;
}

// ceil(|E(H)| / (|V(H)| - 1)) over the support of h; 0 for the empty graph.
inline int density_ceiling(const Graph& h) {
    auto v = static_cast<std::int64_t>(h.support().size());
    if (v < 2) return 0;
    return static_cast<int>(detail::ceil_div(static_cast<std::int64_t>(h.num_edges()), v - 1));
}

constexpr int kArboricityExactLimit = 24;

// Exact arboricity by maximizing over vertex subsets of V(G) in Gray-code order.
inline int arboricity_exact(const Graph& g) {
    const auto& sup = g.support();
    const int n = static_cast<int>(sup.size());
    if (n == 0) return 0;
    if (n > kArboricityExactLimit)
        throw SizeExceeded("exact arboricity supports at most " + std::to_string(kArboricityExactLimit) +
                           " non-isolated vertices, got " + std::to_string(n));
    std::vector<int> local(g.d(), -1);
    for (int x = 0; x < n; ++x) local[sup[x]] = x;
    std::vector<std::uint32_t> adj(n, 0);
    for (auto [i, j] : g.edges()) {
        adj[local[i]] |= 1u << local[j];
        adj[local[j]] |= 1u << local[i];
    }
    std::int64_t best = 0;
    std::uint32_t mask = 0;
    std::int64_t edges = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        int v = std::countr_zero(step);
        std::uint32_t bit = 1u << v;
        if (mask & bit) {
            mask ^= bit;
            edges -= std::popcount(adj[v] & mask);
        } else {
            edges += std::popcount(adj[v] & mask);
            mask ^= bit;
        }
        int size = std::popcount(mask);
        if (size >= 2) best = std::max(best, detail::ceil_div(edges, size - 1));
    }
    return static_cast<int>(best);
}

inline int arboricity(const Graph& g) {
    if (g.num_edges() == 0) return 0;
    if (is_clique_on_support(g)) return static_cast<int>((g.support().size() + 1) / 2);
    if (is_forest(g)) return 1;
    return arboricity_exact(g);
}

inline int arboricity(const GraphFamily& f) {
    switch (f.tag) {
        case FamilyTag::single_edge: return 1;
        case FamilyTag::clique: return (f.s + 1) / 2;
        case FamilyTag::star: return 1;
        case FamilyTag::community:
            if (f.k * f.l == 1) return 0;
            return (std::max(f.k, f.l) + 1) / 2;
        case FamilyTag::custom: return arboricity(*f.pattern);
    }
    return 0;
}

constexpr int kForestPartitionLimit = 16;

namespace detail {

// Path between u and v in a forest given as an edge set, or empty if disconnected.
inline std::vector<Edge> forest_path(int d, const std::set<Edge>& forest, int u, int v) {
    std::vector<std::vector<int>> adj(d);
    for (auto [a, b] : forest) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> prev(d, -2);
    std::vector<int> queue{u};
    prev[u] = -1;
    for (std::size_t head = 0; head < queue.size() && prev[v] == -2; ++head)
        for (int y : adj[queue[head]])
            if (prev[y] == -2) {
                prev[y] = queue[head];
                queue.push_back(y);
            }
    std::vector<Edge> path;
    if (prev[v] == -2) return path;
    for (int x = v; prev[x] != -1; x = prev[x]) path.push_back({std::min(x, prev[x]), std::max(x, prev[x])});
    return path;
}

// Matroid partition: each edge is inserted along a shortest exchange path.
// Returns std::nullopt once some edge cannot be inserted into `count` forests.
inline std::optional<std::vector<std::set<Edge>>> forest_partition(const Graph& g, int count) {
    std::vector<std::set<Edge>> forests(count);
    std::map<Edge, int> home;
    for (Edge e : g.edges()) {
        std::map<Edge, std::pair<Edge, int>> parent;
        std::set<Edge> seen{e};
        std::vector<Edge> queue{e};
        bool placed = false;
        for (std::size_t head = 0; head < queue.size() && !placed; ++head) {
            const Edge x = queue[head];
            for (int f = 0; f < count && !placed; ++f) {
                auto it = home.find(x);
                if (it != home.end() && it->second == f) continue;
                auto path = forest_path(g.d(), forests[f], x.first, x.second);
                if (path.empty()) {
                    Edge cur = x;
                    int target = f;
                    while (true) {
                        if (auto h = home.find(cur); h != home.end()) forests[h->second].erase(cur);
                        forests[target].insert(cur);
                        home[cur] = target;
                        if (cur == e) break;
                        std::tie(cur, target) = parent.at(cur);
                    }
                    placed = true;
                    break;
                }
                for (Edge z : path)
                    if (seen.insert(z).second) {
                        parent[z] = {x, f};
                        queue.push_back(z);
                    }
            }
        }
        if (!placed) return std::nullopt;
    }
    return forests;
}

}  // namespace detail

// Builds a partition of E(g) into `count` forests and verifies each part is acyclic.
inline bool forest_partition_check(const Graph& g, int count) {
    if (g.d() > kForestPartitionLimit)
        throw SizeExceeded("forest_partition_check supports d <= " + std::to_string(kForestPartitionLimit));
    require(count >= 0, "forest count must be nonnegative");
    if (g.num_edges() == 0) return true;
    if (count == 0) return false;
    auto parts = detail::forest_partition(g, count);
    if (!parts) return false;
    std::size_t total = 0;
    for (const auto& part : *parts) {
        detail::UnionFind uf(g.d());
        for (auto [i, j] : part)
            if (!uf.unite(i, j)) return false;
        total += part.size();
    }
    return total == g.num_edges();
}

// Embeds a family pattern on the given 0-based vertices. Community placements
// list the l blocks of k vertices consecutively; reps default to block minima.
inline Graph build_pattern(const GraphFamily& f, int d, const std::vector<int>& placement,
                           std::vector<int> reps = {}) {
    const int arity = f.tag == FamilyTag::single_edge ? 2 : f.s;
    if (static_cast<int>(placement.size()) != arity)
        throw BadPlacement("placement has " + std::to_string(placement.size()) + " vertices, " +
                           f.name() + " needs " + std::to_string(arity));
    std::set<int> seen;
    for (int v : placement) {
        if (v < 0 || v >= d) throw BadPlacement("placement vertex " + std::to_string(v + 1) + " outside 1.." + std::to_string(d));
        if (!seen.insert(v).second) throw BadPlacement("duplicate placement vertex " + std::to_string(v + 1));
    }
    std::vector<Edge> e;
    switch (f.tag) {
        case FamilyTag::single_edge:
            e.push_back({placement[0], placement[1]});
            break;
        case FamilyTag::clique:
            for (int a = 0; a < arity; ++a)
                for (int b = a + 1; b < arity; ++b) e.push_back({placement[a], placement[b]});
            break;
        case FamilyTag::star:
            for (int a = 1; a < arity; ++a) e.push_back({placement[0], placement[a]});
            break;
        case FamilyTag::community: {
            if (reps.empty()) {
                for (int b = 0; b < f.l; ++b)
                    reps.push_back(*std::min_element(placement.begin() + b * f.k, placement.begin() + (b + 1) * f.k));
            }
            if (static_cast<int>(reps.size()) != f.l) throw BadPlacement("community needs one representative per block");
            for (int b = 0; b < f.l; ++b) {
                auto first = placement.begin() + b * f.k, last = first + f.k;
                if (std::find(first, last, reps[b]) == last)
                    throw BadPlacement("representative " + std::to_string(reps[b] + 1) + " not in its block");
                for (auto x = first; x != last; ++x)
                    for (auto y = x + 1; y != last; ++y) e.push_back({*x, *y});
            }
            for (int a = 0; a < f.l; ++a)
                for (int b = a + 1; b < f.l; ++b) e.push_back({reps[a], reps[b]});
            break;
        }
        case FamilyTag::custom:
            for (auto [i, j] : f.pattern->edges()) e.push_back({placement[i], placement[j]});
            break;
    }
    return Graph(d, std::move(e));
}

namespace detail {

// Calls fn(subset) for every sorted size-s subset of {0..d-1}, lexicographically.
template <class Fn>
void for_each_subset(int d, int s, Fn&& fn) {
    if (s > d || s < 0) return;
    std::vector<int> c(s);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        fn(c);
        int i = s - 1;
        while (i >= 0 && c[i] == d - s + i) --i;
        if (i < 0) return;
        ++c[i];
        for (int j = i + 1; j < s; ++j) c[j] = c[j - 1] + 1;
    }
}

// Partitions of sorted `vs` into blocks of size k; each block starts with its
// smallest remaining element, so blocks appear ordered by their minima.
template <class Fn>
void for_each_block_partition(const std::vector<int>& vs, int k, Fn&& fn) {
    std::vector<int> out;
    std::vector<char> taken(vs.size(), 0);
    auto rec = [&](auto&& self) -> void {
        std::size_t first = 0;
        while (first < vs.size() && taken[first]) ++first;
        if (first == vs.size()) {
            fn(out);
            return;
        }
        taken[first] = 1;
        out.push_back(vs[first]);
        std::vector<std::size_t> rest;
        for (std::size_t x = first + 1; x < vs.size(); ++x)
            if (!taken[x]) rest.push_back(x);
        auto pick = [&](auto&& pself, std::size_t from, int need) -> void {
            if (need == 0) {
                self(self);
                return;
            }
            for (std::size_t x = from; x + need <= rest.size(); ++x) {
                taken[rest[x]] = 1;
                out.push_back(vs[rest[x]]);
                pself(pself, x + 1, need - 1);
                out.pop_back();
                taken[rest[x]] = 0;
            }
        };
        pick(pick, 0, k - 1);
        out.pop_back();
        taken[first] = 0;
    };
    rec(rec);
}

}  // namespace detail

// Calls fn(placement) on every placement vertex list in the documented order:
// sorted vertex tuples lexicographically, then center / block choice.
template <class Fn>
void for_each_placement(const GraphFamily& f, int d, Fn&& fn) {
    switch (f.tag) {
        case FamilyTag::single_edge:
        case FamilyTag::clique:
            detail::for_each_subset(d, f.tag == FamilyTag::single_edge ? 2 : f.s, fn);
            break;
        case FamilyTag::star:
            detail::for_each_subset(d, f.s, [&](const std::vector<int>& c) {
                std::vector<int> p(c.size());
                for (std::size_t center = 0; center < c.size(); ++center) {
                    p[0] = c[center];
                    std::size_t w = 1;
                    for (std::size_t x = 0; x < c.size(); ++x)
                        if (x != center) p[w++] = c[x];
                    fn(p);
                }
            });
            break;
        case FamilyTag::community:
            detail::for_each_subset(d, f.s, [&](const std::vector<int>& c) {
                detail::for_each_block_partition(c, f.k, fn);
            });
            break;
        case FamilyTag::custom:
            throw BadInputs("placement enumeration is not available for custom patterns");
    }
}

// All distinct embedded copies of the family pattern; TooMany past `limit`.
inline std::vector<Graph> enumerate_placements(const GraphFamily& f, int d, std::size_t limit) {
    f.check_dimension(d);
    std::vector<Graph> out;
    std::set<Graph> seen;
    for_each_placement(f, d, [&](const std::vector<int>& p) {
        Graph g = build_pattern(f, d, p);
        if (!seen.insert(g).second) return;
        if (out.size() == limit)
            throw TooMany(f.name() + " placements in d=" + std::to_string(d) + " exceed limit " + std::to_string(limit));
        out.push_back(std::move(g));
    });
    return out;
}

struct WitnessingSet {
    std::vector<Graph> members;
    int m = 0;          // min |V(H)|
    double Mcap = 0.0;  // log|H| / m
};

inline GraphFamily witness_family(const GraphFamily& f) {
    switch (f.tag) {
        case FamilyTag::community: return GraphFamily::clique(std::max(f.k, f.l));
        case FamilyTag::custom: throw BadInputs("no witnessing set is defined for custom patterns");
        default: return f;
    }
}

inline WitnessingSet make_witnessing_set(std::vector<Graph> members) {
    if (members.empty()) throw EmptyWitness("witnessing set is empty");
    WitnessingSet w;
    w.m = static_cast<int>(members.front().support().size());
    for (const auto& h : members) w.m = std::min(w.m, static_cast<int>(h.support().size()));
    w.Mcap = std::log(static_cast<double>(members.size())) / w.m;
    w.members = std::move(members);
    return w;
}

inline WitnessingSet witnessing_set(const GraphFamily& f, int d, std::size_t limit) {
    GraphFamily wf = witness_family(f);
    const int R = arboricity(f);
    auto members = enumerate_placements(wf, d, limit);
    for (const auto& h : members)
        if (density_ceiling(h) < R) throw BadInputs("witness fails the density predicate");
    return make_witnessing_set(std::move(members));
}

struct OverlapStats {
    int shared_vertices = 0;
    int shared_edges = 0;
    long long cross_triangles = 0;
    friend bool operator==(const OverlapStats&, const OverlapStats&) = default;
};

// Triangles of g ⊕ h that use at least one g-edge and one h-edge.
inline long long cross_triangles(const Graph& g, const Graph& h) {
    require(g.d() == h.d(), "graphs must share d");
    const int d = g.d();
    auto mult = [&](const Graph& x, int i, int j) { return x.has_edge(i, j) ? 1LL : 0LL; };
    long long total = 0;
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            for (int c = b + 1; c < d; ++c) {
                long long g1 = mult(g, a, b), g2 = mult(g, b, c), g3 = mult(g, a, c);
                long long h1 = mult(h, a, b), h2 = mult(h, b, c), h3 = mult(h, a, c);
                total += (g1 + h1) * (g2 + h2) * (g3 + h3) - g1 * g2 * g3 - h1 * h2 * h3;
            }
    return total;
}

inline OverlapStats overlap_stats(const Graph& g, const Graph& h) {
    require(g.d() == h.d(), "graphs must share d");
    OverlapStats o;
    std::vector<int> shared;
    std::set_intersection(g.support().begin(), g.support().end(), h.support().begin(), h.support().end(),
                          std::back_inserter(shared));
    o.shared_vertices = static_cast<int>(shared.size());
    std::vector<Edge> se;
    std::set_intersection(g.edges().begin(), g.edges().end(), h.edges().begin(), h.edges().end(),
                          std::back_inserter(se));
    o.shared_edges = static_cast<int>(se.size());
    o.cross_triangles = cross_triangles(g, h);
    return o;
}

// Max degree of the family pattern (Γ); equals the ℓ1 operator norm of A_G.
inline int family_max_degree(const GraphFamily& f) {
    switch (f.tag) {
        case FamilyTag::single_edge: return 1;
        case FamilyTag::clique: return f.s - 1;
        case FamilyTag::star: return f.s - 1;
        case FamilyTag::community:
            return f.l > 1 ? f.k - 1 + f.l - 1 : f.k - 1;
        case FamilyTag::custom: return f.pattern->max_degree();
    }
    return 0;
}

}  // namespace isl
