#include "padpd/problems.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "padpd/errors.hpp"
#include "padpd/solver.hpp"

namespace padpd {

using json = nlohmann::ordered_json;

BlockProblem example1() {
    Eigen::MatrixXd A1(3, 2);
    A1 << 1, 1, 1, 1, 1, 1;
    Eigen::MatrixXd A2(3, 1);
    A2 << 1, 1, 2;
    Eigen::MatrixXd A3(3, 1);
    A3 << 1, 2, 2;

    // f1(x1, x2) = x1^2 / 2; the other blocks carry no objective.
    Eigen::VectorXd curvature(2);
    curvature << 1, 0;

    BlockProblem problem;
    problem.c = Eigen::VectorXd::Zero(3);
    problem.blocks.push_back({std::move(A1), quadratic_function(curvature)});
    problem.blocks.push_back({std::move(A2), zero_function(1)});
    problem.blocks.push_back({std::move(A3), zero_function(1)});
    problem.validate();
    return problem;
}

GeneratedProblem random_qp(const RandomQpSpec& spec) {
    if (spec.q < 1 || spec.p < 1) throw ConfigError("random_qp: q and p must be positive");
    if (static_cast<Eigen::Index>(spec.dims.size()) != spec.q)
        throw ConfigError("random_qp: dims must list one dimension per block");
    for (Eigen::Index d : spec.dims)
        if (d < 1) throw ConfigError("random_qp: block dimensions must be positive");

    for (int attempt = 0; attempt < 8; ++attempt) {
        DetRng rng(spec.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt));

        Eigen::VectorXd y_star(spec.p);
        for (Eigen::Index r = 0; r < spec.p; ++r) y_star[r] = rng.uniform(-1.0, 1.0);

        GeneratedProblem out;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(spec.p);
        std::vector<Eigen::VectorXd> x_blocks;
        for (Eigen::Index i = 0; i < spec.q; ++i) {
            const Eigen::Index n_i = spec.dims[static_cast<std::size_t>(i)];
            Eigen::MatrixXd A(spec.p, n_i);
            for (Eigen::Index r = 0; r < spec.p; ++r)
                for (Eigen::Index s = 0; s < n_i; ++s) A(r, s) = rng.uniform(-1.0, 1.0);
            Eigen::VectorXd a(n_i), x_i(n_i);
            for (Eigen::Index s = 0; s < n_i; ++s) a[s] = rng.uniform(0.5, 2.0);
            for (Eigen::Index s = 0; s < n_i; ++s) x_i[s] = rng.uniform(-1.0, 1.0);

            // Stationarity a.*(x_i - b_i) + A^T y* = 0 pins the target.
            const Eigen::VectorXd b = x_i + (A.transpose() * y_star).cwiseQuotient(a);
            c += A * x_i;
            out.problem.blocks.push_back({std::move(A), quadratic_function(a, b)});
            x_blocks.push_back(std::move(x_i));
        }
        out.problem.c = c;
        out.problem.validate();

        out.x_star.resize(out.problem.primal_dim());
        Eigen::Index off = 0;
        for (const auto& x_i : x_blocks) {
            out.x_star.segment(off, x_i.size()) = x_i;
            off += x_i.size();
        }
        out.y_star = y_star;

        Eigen::VectorXd Pi(out.problem.stacked_dim());
        Pi << out.x_star, out.y_star;
        if (kkt_residual(out.problem, Pi, 1.0) < 1e-10) return out;
    }
    throw GeneratorError("random_qp: could not construct a verified KKT point in 8 attempts");
}

namespace {

// ---- JSON helpers -------------------------------------------------------

[[noreturn]] void fail_parse(const std::string& source, const std::string& text,
                             std::size_t byte, const std::string& reason) {
    // nlohmann reports byte offsets; convert to line:column for anchoring.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": " << reason;
    throw ParseError(msg.str());
}

const json& require_field(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError("problem file: missing required field \"" + key + "\" in " + where);
    return *it;
}

std::vector<double> as_number_list(const json& node, const std::string& where) {
    std::vector<double> out;
    if (node.is_number()) {
        out.push_back(node.get<double>());
        return out;
    }
    if (!node.is_array())
        throw ValidationError("problem file: " + where + " must be a number or array of numbers");
    for (const auto& v : node) {
        if (!v.is_number())
            throw ValidationError("problem file: " + where + " must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

Eigen::VectorXd as_vector(const json& node, const std::string& where) {
    const auto values = as_number_list(node, where);
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd as_matrix(const json& node, const std::string& where) {
    if (!node.is_array() || node.empty())
        throw ValidationError("problem file: " + where + " must be a non-empty array of rows");
    const auto first = as_number_list(node.front(), where + " row 0");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(node.size()),
                      static_cast<Eigen::Index>(first.size()));
    for (std::size_t r = 0; r < node.size(); ++r) {
        const auto row = as_number_list(node[r], where + " row " + std::to_string(r));
        if (row.size() != first.size())
            throw ValidationError("problem file: " + where + " rows have unequal lengths");
        for (std::size_t s = 0; s < row.size(); ++s)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = row[s];
    }
    return M;
}

ProxSpec parse_function_spec(const json& node, const std::string& where) {
    if (!node.is_object())
        throw ValidationError("problem file: " + where + " must be an object with a \"tag\"");
    ProxSpec spec;
    spec.tag = require_field(node, "tag", where).get<std::string>();
    if (auto it = node.find("params"); it != node.end()) {
        if (!it->is_object())
            throw ValidationError("problem file: " + where + ".params must be an object");
        for (const auto& [key, value] : it->items())
            spec.params[key] = as_number_list(value, where + ".params." + key);
    }
    return spec;
}

json function_spec_to_json(const ProxSpec& spec) {
    json node;
    node["tag"] = spec.tag;
    if (!spec.params.empty()) {
        json params = json::object();
        for (const auto& [key, values] : spec.params) params[key] = values;
        node["params"] = params;
    }
    return node;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index s = 0; s < M.cols(); ++s) row.push_back(M(r, s));
        rows.push_back(row);
    }
    return rows;
}

BlockProblem parse_block_problem(const json& doc) {
    BlockProblem problem;
    problem.c = as_vector(require_field(doc, "c", "document"), "c");
    const json& blocks = require_field(doc, "blocks", "document");
    if (!blocks.is_array() || blocks.empty())
        throw ValidationError("problem file: \"blocks\" must be a non-empty array");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string where = "blocks[" + std::to_string(i) + "]";
        const json& entry = blocks[i];
        if (!entry.is_object())
            throw ValidationError("problem file: " + where + " must be an object");
        Eigen::MatrixXd A = as_matrix(require_field(entry, "A", where), where + ".A");
        const ProxSpec spec = parse_function_spec(require_field(entry, "f", where), where + ".f");
        ProxFunction f = make_prox_function(spec, A.cols());
        problem.blocks.push_back({std::move(A), std::move(f)});
    }
    problem.validate();
    return problem;
}

Graph parse_graph(const json& node) {
    if (!node.is_object())
        throw ValidationError("problem file: \"graph\" must be an object");
    Graph g;
    g.nodes = require_field(node, "nodes", "graph").get<Eigen::Index>();
    if (auto it = node.find("generator"); it != node.end()) {
        const std::string name = it->get<std::string>();
        if (name == "cycle") return cycle_graph(g.nodes);
        if (name == "path") return path_graph(g.nodes);
        if (name == "complete") return complete_graph(g.nodes);
        if (name == "star") return star_graph(g.nodes);
        throw ValidationError("problem file: unknown graph generator \"" + name +
                              "\" (expected cycle, path, complete, or star)");
    }
    const json& edges = require_field(node, "edges", "graph");
    if (!edges.is_array())
        throw ValidationError("problem file: graph.edges must be an array of [i, j] pairs");
    for (const auto& e : edges) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
            throw ValidationError("problem file: graph.edges entries must be [i, j] pairs");
        Eigen::Index a = e[0].get<Eigen::Index>();
        Eigen::Index b = e[1].get<Eigen::Index>();
        if (a > b) std::swap(a, b);
        g.edges.emplace_back(a, b);
    }
    g.validate();
    return g;
}

ConsensusProblem parse_consensus_problem(const json& doc) {
    ConsensusProblem problem;
    problem.local_dim = require_field(doc, "local_dim", "document").get<Eigen::Index>();
    problem.graph = parse_graph(require_field(doc, "graph", "document"));
    if (auto it = doc.find("weights"); it != doc.end())
        problem.weights = as_matrix(*it, "weights");
    else
        problem.weights = metropolis_weights(problem.graph);

    const json& costs = require_field(doc, "costs", "document");
    if (!costs.is_array())
        throw ValidationError("problem file: \"costs\" must be an array");
    for (std::size_t i = 0; i < costs.size(); ++i) {
        const std::string where = "costs[" + std::to_string(i) + "]";
        problem.costs.push_back(
            make_prox_function(parse_function_spec(costs[i], where), problem.local_dim));
    }
    problem.validate();
    return problem;
}

}  // namespace

Problem parse_problem(const std::string& text, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail_parse(source_name, text, e.byte, e.what());
    }
    if (!doc.is_object()) throw ValidationError("problem file: top level must be an object");
    const json& schema = require_field(doc, "schema", "document");
    if (!schema.is_number_integer() || schema.get<int>() != 1)
        throw ValidationError("problem file: unsupported schema version (expected \"schema\": 1)");
    const std::string kind = require_field(doc, "kind", "document").get<std::string>();
    if (kind == "block") return parse_block_problem(doc);
    if (kind == "consensus") return parse_consensus_problem(doc);
    throw ValidationError("problem file: unknown kind \"" + kind +
                          "\" (expected \"block\" or \"consensus\")");
}

Problem load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_problem(buffer.str(), path);
}

std::string serialize_problem(const Problem& problem) {
    json doc;
    doc["schema"] = 1;
    if (const auto* block = std::get_if<BlockProblem>(&problem)) {
        doc["kind"] = "block";
        doc["c"] = vector_to_json(block->c);
        json blocks = json::array();
        for (const auto& b : block->blocks) {
            json entry;
            entry["A"] = matrix_to_json(b.A);
            entry["f"] = function_spec_to_json(b.f.spec());
            blocks.push_back(entry);
        }
        doc["blocks"] = blocks;
    } else {
        const auto& consensus = std::get<ConsensusProblem>(problem);
        doc["kind"] = "consensus";
        doc["local_dim"] = consensus.local_dim;
        json graph;
        graph["nodes"] = consensus.graph.nodes;
        json edges = json::array();
        for (const auto& [a, b] : consensus.graph.edges) edges.push_back(json::array({a, b}));
        graph["edges"] = edges;
        doc["graph"] = graph;
        doc["weights"] = matrix_to_json(consensus.weights);
        json costs = json::array();
        for (const auto& f : consensus.costs) costs.push_back(function_spec_to_json(f.spec()));
        doc["costs"] = costs;
    }
    return doc.dump(2) + "\n";
}

namespace {

ConsensusProblem consensus_least_squares_5(const Graph& graph) {
    // Five scattered targets whose average (1, 0.6) is the consensus optimum.
    const double targets[5][2] = {{1, 2}, {-1, 0.5}, {3, -1}, {0, 0}, {2, 1.5}};
    ConsensusProblem problem;
    problem.graph = graph;
    problem.weights = metropolis_weights(graph);
    problem.local_dim = 2;
    for (const auto& t : targets) {
        Eigen::VectorXd b(2);
        b << t[0], t[1];
        problem.costs.push_back(quadratic_function(Eigen::VectorXd::Ones(2), b));
    }
    problem.validate();
    return problem;
}

}  // namespace

std::vector<std::string> builtin_problem_names() {
    return {"example1", "consensus-ls-5cycle", "consensus-ls-5complete", "random-qp"};
}

bool is_builtin_problem(const std::string& name) {
    const auto names = builtin_problem_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

Problem make_builtin_problem(const std::string& name, std::uint64_t seed) {
    if (name == "example1") return example1();
    if (name == "consensus-ls-5cycle") return consensus_least_squares_5(cycle_graph(5));
    if (name == "consensus-ls-5complete") return consensus_least_squares_5(complete_graph(5));
    if (name == "random-qp") {
        RandomQpSpec spec;
        spec.q = 3;
        spec.p = 4;
        spec.dims = {2, 2, 2};
        spec.seed = seed;
        return random_qp(spec).problem;
    }
    throw ConfigError("unknown built-in problem \"" + name + "\"");
}

}  // namespace padpd
