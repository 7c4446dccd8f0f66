#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isl/cli/config.hpp"
#include "isl/eulerian.hpp"
#include "isl/graph.hpp"
#include "isl/graph_io.hpp"
#include "isl/ising.hpp"
#include "isl/moments.hpp"
#include "isl/parallel.hpp"
#include "isl/reduction.hpp"
#include "isl/sample_io.hpp"
#include "isl/scan.hpp"
#include "isl/sqoracle.hpp"
#include "isl/verify.hpp"

namespace isl::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSize = 3;

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string config_comment(const ExperimentConfig& c) { return "config: " + to_json(c).dump(); }

// Parses the "# config: {...}" line of a CSV artifact back into a config.
inline ExperimentConfig config_from_artifact(std::istream& in) {
    std::string line;
    const std::string tag = "# config: ";
    while (std::getline(in, line))
        if (line.rfind(tag, 0) == 0) return config_from_json(nlohmann::json::parse(line.substr(tag.size())));
    throw BadInputs("artifact has no embedded config line");
}

// Multigraph edge list: same text format as graphs, repeated pairs allowed.
inline Multigraph read_multigraph_file(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return Multigraph(read_edge_list_file(path));
    std::ifstream in(path);
    if (!in) throw BadInputs("cannot open graph file " + path);
    std::string line;
    int d = -1, lineno = 0;
    std::vector<std::pair<int, int>> pairs;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        if (d < 0) {
            if (!(ls >> d) || d < 0) throw BadInputs("line " + std::to_string(lineno) + ": expected vertex count");
            continue;
        }
        int i = 0, j = 0;
        if (!(ls >> i >> j)) throw BadInputs("line " + std::to_string(lineno) + ": expected 'i j'");
        if (i < 1 || j < 1 || i > d || j > d || i == j)
            throw BadInputs("line " + std::to_string(lineno) + ": edge must join two distinct vertices in 1.." +
                            std::to_string(d));
        pairs.push_back({i - 1, j - 1});
    }
    if (d < 0) throw BadInputs("edge list is empty");
    Multigraph g(d);
    for (auto [i, j] : pairs) g.add(i, j, 1);
    return g;
}

namespace detail {

// Output sink: the --out file when given, else the caller's stream.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw BadInputs("cannot write " + path);
        }
    }
    std::ostream& stream(std::ostream& fallback) { return file_.is_open() ? file_ : fallback; }

private:
    std::ofstream file_;
};

inline void require_cli(bool ok, const std::string& msg) {
    if (!ok) throw BadInputs(msg);
}

inline Graph pattern_graph(const ExperimentConfig& c) {
    auto f = make_family(c);
    require_cli(c.d >= 1, "--d is required");
    std::vector<int> placement = parse_placement(c.placement);
    if (placement.empty()) {
        const int slots = f.tag == FamilyTag::single_edge ? 2 : f.s;
        for (int v = 0; v < slots; ++v) placement.push_back(v);
    }
    return build_pattern(f, c.d, placement);
}

inline double resolve_kappa(const ExperimentConfig& c, const GraphFamily& f, int threads) {
    if (c.kappa) return *c.kappa;
    return calibrate_kappa(f, c.d, c.n, c.alpha, c.reps, c.seed, threads).kappa;
}

inline int cmd_arboricity(const ExperimentConfig& c, std::ostream& out) {
    if (!c.graph.empty() && c.family != "custom") out << arboricity(read_edge_list_file(c.graph)) << '\n';
    else out << arboricity(make_family(c)) << '\n';
    return kExitOk;
}

inline int cmd_euler_count(const ExperimentConfig& c, std::ostream& out) {
    require_cli(!c.graph.empty(), "euler-count needs --graph");
    require_cli(c.max_k >= 0, "--max-k must be >= 0");
    auto counts = eulerian_counts(read_multigraph_file(c.graph));
    Sink sink(c.out);
    auto& os = sink.stream(out);
    os << "# " << config_comment(c) << '\n' << "k,count\n";
    for (int k = 0; k <= c.max_k; ++k)
        os << k << ',' << (k < static_cast<int>(counts.size()) ? counts[k] : 0) << '\n';
    return kExitOk;
}

inline int cmd_chisq(const ExperimentConfig& c, std::ostream& out, int threads) {
    require_cli(c.n >= 1, "--n must be >= 1");
    auto f = make_family(c);
    auto thetas = c.theta_grid.empty() ? std::vector<double>{c.theta} : parse_theta_grid(c.theta_grid);
    Sink sink(c.out);
    auto& os = sink.stream(out);
    os << "# " << config_comment(c) << '\n' << "theta,n,divergence,risk_lower_bound\n";
    for (double t : thetas) {
        const double chi = chi_square_divergence(f, c.d, t, c.n, 1'000'000, threads);
        os << fmt(t) << ',' << c.n << ',' << fmt(chi) << ',' << fmt(risk_lower_bound(chi)) << '\n';
    }
    return kExitOk;
}

inline int cmd_lower_bound(const ExperimentConfig& c, std::ostream& out) {
    require_cli(c.n >= 1, "--n must be >= 1");
    auto in = lower_bound_inputs(make_family(c), c.d);
    nlohmann::json j;
    j["R"] = in.R;
    j["Lambda"] = in.Lambda;
    j["Gamma"] = in.Gamma;
    j["Vmax"] = in.Vmax;
    j["N"] = in.N;
    j["B"] = in.B();
    j["n"] = c.n;
    j["theta_lower"] = lower_bound_theta(in, c.n);
    j["config"] = to_json(c);
    Sink sink(c.out);
    sink.stream(out) << j.dump() << '\n';
    return kExitOk;
}

inline int cmd_sample(const ExperimentConfig& c, std::ostream& out, int threads) {
    require_cli(!c.out.empty(), "sample needs --out");
    require_cli(c.n >= 1, "--n must be >= 1");
    SampleMatrix s;
    if (c.sampler == "cw") {
        require_cli(c.family == "clique" && c.d == c.s, "--sampler cw needs --family clique with d == s");
        s = sample_curie_weiss({c.s, c.theta}, static_cast<std::size_t>(c.n), c.seed, threads);
    } else {
        auto m = IsingModel::from_graph(pattern_graph(c), c.theta, IsingModel::Mode::unrestricted);
        const bool exact = c.sampler == "exact" || (c.sampler == "auto" && c.d <= kExactPmfLimit);
        if (c.sampler != "auto" && c.sampler != "exact" && c.sampler != "gibbs")
            throw BadInputs("unknown sampler '" + c.sampler + "' (auto, exact, gibbs, cw)");
        s = exact ? sample_exact(m, static_cast<std::size_t>(c.n), c.seed, threads)
                  : sample_gibbs(m, static_cast<std::size_t>(c.n), {}, c.seed, threads);
    }
    save_samples(c.out, s, config_comment(c));
    out << "wrote " << s.n << " samples (d=" << s.d << ", " << sampler_name(s.sampler) << ") to " << c.out << '\n';
    return kExitOk;
}

inline int cmd_scan_test(ExperimentConfig c, std::ostream& out, int threads) {
    require_cli(!c.samples.empty(), "scan-test needs --samples");
    auto s = load_samples(c.samples);
    c.d = s.d;
    c.n = static_cast<std::int64_t>(s.n);
    auto f = make_family(c);
    const double kappa = resolve_kappa(c, f, threads);
    auto cfg = make_scan_config(f, c.d, c.n, kappa);
    CompiledWitness w(cfg.witnessing);
    auto [stat, arg] = w.max_w(SpinColumns::from_samples(s));
    nlohmann::json j;
    j["reject"] = stat > cfg.threshold();
    j["max_w"] = stat;
    std::vector<std::array<int, 2>> edges;
    for (auto [a, b] : cfg.witnessing.members[arg].edges()) edges.push_back({a + 1, b + 1});
    j["argmax_edges"] = edges;
    j["threshold"] = cfg.threshold();
    j["kappa"] = kappa;
    j["config"] = to_json(c);
    Sink sink(c.out);
    sink.stream(out) << j.dump() << '\n';
    return kExitOk;
}

inline int cmd_risk_curve(const ExperimentConfig& c, std::ostream& out, int threads) {
    require_cli(c.n >= 1, "--n must be >= 1");
    require_cli(!c.theta_grid.empty(), "risk-curve needs --theta-grid");
    auto thetas = parse_theta_grid(c.theta_grid);
    auto f = make_family(c);
    const double kappa = resolve_kappa(c, f, threads);
    auto cfg = make_scan_config(f, c.d, c.n, kappa);
    RiskCurveOptions opt;
    opt.reps = c.reps;
    opt.seed = c.seed;
    opt.threads = threads;
    auto rows = risk_curve(f, c.d, thetas, cfg, opt);
    Sink sink(c.out);
    auto& os = sink.stream(out);
    os << "# " << config_comment(c) << '\n' << "theta,type1,type2_worst,total,se_total,kappa,threshold\n";
    for (const auto& r : rows)
        os << fmt(r.theta) << ',' << fmt(r.type_I) << ',' << fmt(r.worst_type_II) << ',' << fmt(r.total) << ','
           << fmt(r.se_total) << ',' << fmt(kappa) << ',' << fmt(cfg.threshold()) << '\n';
    return kExitOk;
}

inline int cmd_calibrate(const ExperimentConfig& c, std::ostream& out, int threads) {
    require_cli(c.n >= 1, "--n must be >= 1");
    auto f = make_family(c);
    auto cal = calibrate_kappa(f, c.d, c.n, c.alpha, c.reps, c.seed, threads);
    const auto members = witnessing_set(f, c.d, 1'000'000).members.size();
    nlohmann::json j;
    j["kappa"] = cal.kappa;
    j["null_rate"] = cal.null_rate;
    j["grid_step"] = cal.grid_step;
    j["reps"] = cal.reps;
    j["seed"] = cal.seed;
    j["witness_size"] = members;
    j["witness_size_ok"] = static_cast<double>(members) >= 2.0 / c.alpha;
    j["config"] = to_json(c);
    Sink sink(c.out);
    sink.stream(out) << j.dump() << '\n';
    return kExitOk;
}

inline int cmd_moments(const ExperimentConfig& c, std::ostream& out) {
    Sink sink(c.out);
    auto& os = sink.stream(out);
    os << "# " << config_comment(c) << '\n';
    if (c.report == "table") {
        require_cli(c.max_m >= 1 && c.s >= 1, "moments needs --max-m >= 1 and --s >= 1");
        auto polys = moment_polys(c.max_m);
        os << "m,s,P_2m\n";
        for (int m = 1; m <= c.max_m; ++m)
            for (int s = 1; s <= c.s; ++s) os << m << ',' << s << ',' << polys[m].eval(s).str() << '\n';
    } else if (c.report == "inequalities") {
        double lo = -10, hi = 10, step = 1e-2;
        if (!c.theta_grid.empty()) {
            auto g = parse_theta_grid(c.theta_grid);
            require_cli(g.size() >= 2, "inequality grid needs lo:hi:step");
            lo = g.front(), hi = g.back(), step = g[1] - g[0];
        }
        os << "name,points,violations,max_violation,argmax\n";
        auto res = c.C ? scalar_inequalities_check(lo, hi, step, *c.C) : scalar_inequalities_check(lo, hi, step);
        for (const auto& r : res)
            os << r.name << ',' << r.points << ',' << r.violations << ',' << fmt(r.max_violation) << ','
               << fmt(r.argmax) << '\n';
    } else {
        throw BadInputs("--report must be table or inequalities");
    }
    return kExitOk;
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw BadInputs("cannot write " + path);
    fn(f);
}

inline int cmd_reduce(const ExperimentConfig& c, std::ostream& out, int threads) {
    require_cli(c.n >= 1, "--n must be >= 1");
    require_cli(c.d >= c.s && c.s >= 1, "reduce needs 1 <= s <= d");
    auto r = end_to_end_reduction(c.theta, c.s, c.d, static_cast<std::size_t>(c.n), c.seed, threads);
    auto cert = reduction_certificate(r.params, c.n);
    const auto comment = config_comment(c);
    write_file(c.out_prefix + "signs.csv", [&](std::ostream& f) { write_samples_csv(f, r.signs, comment); });
    write_file(c.out_prefix + "ising.csv", [&](std::ostream& f) { write_samples_csv(f, r.ising, comment); });

    nlohmann::json j;
    j["theta"] = r.params.theta;
    j["sigma"] = r.params.sigma;
    j["bounds"] = {{"gaussian_term", cert.gaussian_term},
                   {"conditional_term", cert.conditional_term},
                   {"total", cert.total_bound}};
    if (cert.exact_available)
        j["exact_tv_support"] = {{"one_sample", cert.exact_tv_one},
                                 {"n_lower", cert.exact_tv_n_lower},
                                 {"n_upper", cert.exact_tv_n_upper},
                                 {"below_bound", cert.exact_below_bound}};
    else
        j["exact_tv_support"] = nullptr;
    j["proxy_accuracy"] = two_sample_accuracy(r.signs, r.ising, c.seed).accuracy;
    std::vector<int> support;
    for (int v : r.support) support.push_back(v + 1);
    j["support"] = support;
    j["config"] = to_json(c);
    write_file(c.out_prefix + "certificate.json", [&](std::ostream& f) { f << j.dump(2) << '\n'; });
    out << j.dump() << '\n';
    return kExitOk;
}

inline int cmd_sq_demo(const ExperimentConfig& c, std::ostream& out) {
    require_cli(c.n >= 1, "--n must be >= 1");
    require_cli(c.T >= 1, "--T must be >= 1");
    std::vector<Query> space;
    for (int i = 0; i < c.d; ++i)
        for (int j = i + 1; j < c.d; ++j) space.push_back(pair_query(c.d, i, j));
    const int T = std::min<int>(c.T, static_cast<int>(space.size()));
    auto alg = fixed_sequence_algorithm(space, T, std::vector<double>(space.size(), 0.0), std::tanh(c.theta) / 2);
    Sink sink(c.out);
    auto& os = sink.stream(out);
    try {
        auto rep = adversarial_oracle(GraphFamily::clique(c.s), c.d, c.theta, alg, c.n, c.xi);
        for (const auto& e : rep.transcript)
            os << nlohmann::json{{"round", e.round + 1}, {"query_id", e.query_id}, {"value", e.value}}.dump() << '\n';
        std::vector<int> placement;
        for (int v : rep.fooled.support()) placement.push_back(v + 1);
        nlohmann::json j{{"fooled_placement", placement},
                         {"risk", rep.risk},
                         {"decision", rep.decision},
                         {"covering_condition", rep.covering_condition},
                         {"band_ok", rep.band_ok},
                         {"tau", rep.tau},
                         {"config", to_json(c)}};
        os << j.dump() << '\n';
    } catch (const NoUncoveredGraph&) {
        os << nlohmann::json{{"no_uncovered_graph", true}, {"config", to_json(c)}}.dump() << '\n';
    }
    return kExitOk;
}

inline int cmd_verify(const ExperimentConfig& c, std::ostream& out, const VerifyOptions& vopt) {
    auto items = verify_suite(c.suite, vopt);
    bool ok = true;
    for (const auto& it : items) {
        out << it.name << ": " << (it.pass ? "PASS" : "FAIL");
        if (!it.pass && !it.detail.empty()) out << " (" << it.detail << ")";
        out << '\n';
        ok = ok && it.pass;
    }
    return ok ? kExitOk : kExitFailure;
}

inline std::string find_config_path(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

}  // namespace detail

// Parses argv, runs one subcommand, and maps errors to exit codes.
// `vopt` lets tests inject faults into the verify suites.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
               const VerifyOptions& vopt = {}) {
    ExperimentConfig c;
    try {
        if (auto path = detail::find_config_path(argc, argv); !path.empty()) load_config_file(c, path);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    CLI::App app{"Ising structure detection experiments"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "key = value config file; flags override it");
    app.add_option("--threads", c.threads, "worker threads (0: ISL_THREADS or 1)");
    app.add_option("--seed", c.seed, "RNG seed (recorded in every artifact)");

    auto family_opts = [&](CLI::App* s) {
        s->add_option("--family", c.family, "single_edge, clique, star, community, custom");
        s->add_option("--s", c.s, "pattern size");
        s->add_option("--k", c.k, "community: first clique size");
        s->add_option("--l", c.l, "community: second clique size");
        s->add_option("--graph", c.graph, "edge-list file");
        s->add_option("--d", c.d, "dimension");
    };
    auto n_opt = [&](CLI::App* s) { s->add_option("--n", c.n, "sample size"); };
    auto out_opt = [&](CLI::App* s) { s->add_option("--out", c.out, "output file (default stdout)"); };
    auto kappa_opts = [&](CLI::App* s) {
        s->add_option_function<double>("--kappa", [&](const double& v) { c.kappa = v; }, "fixed κ (else calibrated)");
        s->add_option("--alpha", c.alpha, "target total risk for calibration");
        s->add_option("--reps", c.reps, "Monte Carlo repetitions");
    };

    std::map<CLI::App*, std::string> names;
    auto sub = [&](const char* name, const char* desc) {
        auto* s = app.add_subcommand(name, desc);
        names[s] = name;
        return s;
    };

    auto* arb = sub("arboricity", "arboricity of a graph file or family pattern");
    family_opts(arb);

    auto* eul = sub("euler-count", "Eulerian subgraph counts by edge number");
    eul->add_option("--graph", c.graph, "edge-list file (repeated pairs are parallel edges)");
    eul->add_option("--max-k", c.max_k, "largest edge count to report");
    out_opt(eul);

    auto* chi = sub("chisq", "χ² divergence of the uniform mixture against the null");
    family_opts(chi);
    n_opt(chi);
    chi->add_option("--theta", c.theta, "coupling");
    chi->add_option("--theta-grid", c.theta_grid, "lo:hi:step or comma list");
    out_opt(chi);

    auto* lb = sub("lower-bound", "minimax lower-bound coupling");
    family_opts(lb);
    n_opt(lb);
    out_opt(lb);

    auto* smp = sub("sample", "draw Ising samples");
    family_opts(smp);
    n_opt(smp);
    out_opt(smp);
    smp->add_option("--theta", c.theta, "edge coupling (cw: Curie-Weiss θ)");
    smp->add_option("--placement", c.placement, "1-based vertices for the pattern");
    smp->add_option("--sampler", c.sampler, "auto, exact, gibbs, cw");

    auto* sc = sub("scan-test", "run the scan test on a sample file");
    family_opts(sc);
    kappa_opts(sc);
    out_opt(sc);
    sc->add_option("--samples", c.samples, "sample file (.csv or .bin)");

    auto* rc = sub("risk-curve", "empirical scan-test risk over a θ grid");
    family_opts(rc);
    n_opt(rc);
    kappa_opts(rc);
    out_opt(rc);
    rc->add_option("--theta-grid", c.theta_grid, "lo:hi:step or comma list");

    auto* cal = sub("calibrate", "calibrate κ for the scan test");
    family_opts(cal);
    n_opt(cal);
    kappa_opts(cal);
    out_opt(cal);

    auto* mom = sub("moments", "Rademacher moment table or scalar inequality report");
    mom->add_option("--max-m", c.max_m, "largest m");
    mom->add_option("--s", c.s, "largest s");
    mom->add_option("--report", c.report, "table or inequalities");
    mom->add_option("--theta-grid", c.theta_grid, "inequality grid lo:hi:step");
    mom->add_option_function<double>("--C", [&](const double& v) { c.C = v; }, "constant for the C-bearing bounds");
    out_opt(mom);

    auto* red = sub("reduce", "sparse-PCA sign reduction with TV certificate");
    red->add_option("--theta", c.theta, "Curie-Weiss θ");
    red->add_option("--s", c.s, "support size");
    red->add_option("--d", c.d, "dimension");
    n_opt(red);
    red->add_option("--out-prefix", c.out_prefix, "prefix for signs.csv, ising.csv, certificate.json");

    auto* sq = sub("sq-demo", "adversarial SQ oracle against a fixed pair-query algorithm");
    sq->add_option("--d", c.d, "dimension (<= 12)");
    sq->add_option("--s", c.s, "clique size");
    sq->add_option("--theta", c.theta, "edge coupling");
    n_opt(sq);
    sq->add_option("--xi", c.xi, "oracle failure probability");
    sq->add_option("--T", c.T, "query budget");
    out_opt(sq);

    auto* ver = sub("verify", "run an identity/oracle suite");
    ver->add_option("suite", c.suite, "eulerian, moments, reduction, scan, oracle, all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
    }

    for (auto* s : app.get_subcommands()) c.subcommand = names[s];
    const int threads = resolve_threads(c.threads);

    try {
        const auto& name = c.subcommand;
        if (name == "arboricity") return detail::cmd_arboricity(c, out);
        if (name == "euler-count") return detail::cmd_euler_count(c, out);
        if (name == "chisq") return detail::cmd_chisq(c, out, threads);
        if (name == "lower-bound") return detail::cmd_lower_bound(c, out);
        if (name == "sample") return detail::cmd_sample(c, out, threads);
        if (name == "scan-test") return detail::cmd_scan_test(c, out, threads);
        if (name == "risk-curve") return detail::cmd_risk_curve(c, out, threads);
        if (name == "calibrate") return detail::cmd_calibrate(c, out, threads);
        if (name == "moments") return detail::cmd_moments(c, out);
        if (name == "reduce") return detail::cmd_reduce(c, out, threads);
        if (name == "sq-demo") return detail::cmd_sq_demo(c, out);
        if (name == "verify") return detail::cmd_verify(c, out, vopt);
        err << "error: no subcommand\n";
        return kExitValidation;
    } catch (const SizeExceeded& e) {
        err << "error (size): " << e.what() << '\n';
        return kExitSize;
    } catch (const TooMany& e) {
        err << "error (size): " << e.what() << '\n';
        return kExitSize;
    } catch (const QuadratureFail& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "error: bad numeric value (" << e.what() << ")\n";
        return kExitValidation;
    }
}

}  // namespace isl::cli
