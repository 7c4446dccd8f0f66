#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isl/error.hpp"
#include "isl/graph.hpp"
#include "isl/graph_io.hpp"

namespace isl::cli {

struct ExperimentConfig {
    std::string subcommand;
    std::string family = "clique";
    int s = 3;
    int k = 0;
    int l = 0;
    std::string graph;      // edge-list path
    std::string placement;  // 1-based comma list
    int d = 0;
    std::int64_t n = 0;
    double theta = 0;
    std::string theta_grid;  // "lo:hi:step" or "a,b,c"
    std::size_t reps = 2000;
    std::uint64_t seed = 0;
    std::string sampler = "auto";
    std::string samples;
    std::string out;
    std::string out_prefix;
    std::optional<double> kappa;
    std::optional<double> C;
    double alpha = 0.1;
    double xi = 0.1;
    int T = 1;
    int max_k = 8;
    int max_m = 8;
    int threads = 0;
    std::string suite = "all";
    std::string report = "table";  // moments: table | inequalities

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["subcommand"] = c.subcommand;
    j["family"] = c.family;
    j["s"] = c.s;
    j["k"] = c.k;
    j["l"] = c.l;
    j["graph"] = c.graph;
    j["placement"] = c.placement;
    j["d"] = c.d;
    j["n"] = c.n;
    j["theta"] = c.theta;
    j["theta-grid"] = c.theta_grid;
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    j["sampler"] = c.sampler;
    j["samples"] = c.samples;
    j["out"] = c.out;
    j["out-prefix"] = c.out_prefix;
    j["kappa"] = c.kappa ? nlohmann::json(*c.kappa) : nlohmann::json(nullptr);
    j["C"] = c.C ? nlohmann::json(*c.C) : nlohmann::json(nullptr);
    j["alpha"] = c.alpha;
    j["xi"] = c.xi;
    j["T"] = c.T;
    j["max-k"] = c.max_k;
    j["max-m"] = c.max_m;
    j["threads"] = c.threads;
    j["suite"] = c.suite;
    j["report"] = c.report;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key) && !j[key].is_null()) j[key].get_to(field);
    };
    get("subcommand", c.subcommand);
    get("family", c.family);
    get("s", c.s);
    get("k", c.k);
    get("l", c.l);
    get("graph", c.graph);
    get("placement", c.placement);
    get("d", c.d);
    get("n", c.n);
    get("theta", c.theta);
    get("theta-grid", c.theta_grid);
    get("reps", c.reps);
    get("seed", c.seed);
    get("sampler", c.sampler);
    get("samples", c.samples);
    get("out", c.out);
    get("out-prefix", c.out_prefix);
    if (j.contains("kappa") && !j["kappa"].is_null()) c.kappa = j["kappa"].get<double>();
    if (j.contains("C") && !j["C"].is_null()) c.C = j["C"].get<double>();
    get("alpha", c.alpha);
    get("xi", c.xi);
    get("T", c.T);
    get("max-k", c.max_k);
    get("max-m", c.max_m);
    get("threads", c.threads);
    get("suite", c.suite);
    get("report", c.report);
    return c;
}

// key = value lines; '#' starts a comment. Keys use the flag spellings.
inline void apply_config_text(ExperimentConfig& c, std::istream& in) {
    nlohmann::json j = to_json(c);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto eq = line.find('=');
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) throw BadInputs("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!j.contains(key) || key == "subcommand") throw BadInputs("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        try {
            if (j[key].is_string()) j[key] = value;
            else if (key == "kappa" || key == "C" || j[key].is_number_float()) j[key] = std::stod(value);
            else if (j[key].is_number_unsigned()) j[key] = std::stoull(value);
            else j[key] = std::stoll(value);
        } catch (const std::logic_error&) {
            throw BadInputs("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    c = config_from_json(j);
}

inline void load_config_file(ExperimentConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputs("cannot open config file " + path);
    apply_config_text(c, in);
}

inline std::vector<double> parse_theta_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi, step;
        char c1, c2;
        std::istringstream is(spec);
        if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo)
            throw BadInputs("theta grid must be lo:hi:step with step > 0 and hi >= lo");
        const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    } else {
        std::istringstream is(spec);
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!tok.empty()) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw BadInputs("theta grid is empty");
    return out;
}

inline GraphFamily make_family(const ExperimentConfig& c) {
    if (c.family == "single_edge" || c.family == "edge") return GraphFamily::single_edge();
    if (c.family == "clique") return GraphFamily::clique(c.s);
    if (c.family == "star") return GraphFamily::star(c.s);
    if (c.family == "community") return GraphFamily::community(c.k, c.l);
    if (c.family == "custom") {
        if (c.graph.empty()) throw BadInputs("custom family needs --graph");
        return GraphFamily::custom(read_edge_list_file(c.graph));
    }
    throw BadInputs("unknown family '" + c.family + "' (single_edge, clique, star, community, custom)");
}

inline std::vector<int> parse_placement(const std::string& spec) {
    std::vector<int> out;
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        int v = std::stoi(tok);
        if (v < 1) throw BadPlacement("placement vertices are 1-based");
        out.push_back(v - 1);
    }
    return out;
}

}  // namespace isl::cli
