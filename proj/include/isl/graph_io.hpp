#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "isl/graph.hpp"

namespace isl {

// Edge-list text: `d` on the first line, then one 1-based `i j` pair per line.
// Blank lines and lines starting with '#' are ignored.
inline Graph read_edge_list(std::istream& in) {
    std::string line;
    int d = -1;
    std::vector<Edge> edges;
    int lineno = 0;
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
        edges.push_back({i - 1, j - 1});
    }
    if (d < 0) throw BadInputs("edge list is empty");
    return Graph(d, std::move(edges));
}

inline Graph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputs("cannot open graph file " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        nlohmann::json j;
        in >> j;
        int d = j.at("d").get<int>();
        std::vector<Edge> e;
        for (const auto& p : j.at("edges")) e.push_back({p.at(0).get<int>() - 1, p.at(1).get<int>() - 1});
        return Graph(d, std::move(e));
    }
    return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
    out << g.d() << '\n';
    for (auto [i, j] : g.edges()) out << i + 1 << ' ' << j + 1 << '\n';
}

inline nlohmann::json to_json(const Graph& g) {
    nlohmann::json e = nlohmann::json::array();
    for (auto [i, j] : g.edges()) e.push_back({i + 1, j + 1});
    return {{"d", g.d()}, {"edges", e}};
}

inline Graph graph_from_json(const nlohmann::json& j) {
    std::vector<Edge> e;
    for (const auto& p : j.at("edges")) e.push_back({p.at(0).get<int>() - 1, p.at(1).get<int>() - 1});
    return Graph(j.at("d").get<int>(), std::move(e));
}

}  // namespace isl
