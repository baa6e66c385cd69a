#include "mppctl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mppctl/errors.hpp"

namespace mppctl {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Flattens nested arrays of the given depth into `out`, checking every row length.
void flatten(const json& node, const std::vector<std::size_t>& dims, std::size_t level,
             std::vector<double>& out, const char* field) {
    if (level == dims.size()) {
        if (!node.is_number()) throw ParseError(std::string(field) + ": expected a number");
        out.push_back(node.get<double>());
        return;
    }
    if (!node.is_array() || node.size() != dims[level])
        throw ParseError(std::string(field) + ": wrong array shape");
    for (const auto& child : node) flatten(child, dims, level + 1, out, field);
}

json nest(const std::vector<double>& flat, const std::vector<std::size_t>& dims, std::size_t level,
          std::size_t& pos) {
    json arr = json::array();
    for (std::size_t i = 0; i < dims[level]; ++i) {
        if (level + 1 == dims.size())
            arr.push_back(flat[pos++]);
        else
            arr.push_back(nest(flat, dims, level + 1, pos));
    }
    return arr;
}

json nest(const std::vector<double>& flat, const std::vector<std::size_t>& dims) {
    std::size_t pos = 0;
    return nest(flat, dims, 0, pos);
}

std::size_t state_index(const ModelSpec& model, const json& v) {
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        for (std::size_t k = 0; k < model.n_states(); ++k)
            if (model.states[k] == name) return k;
        throw ParseError("unknown state '" + name + "'");
    }
    if (v.is_number_unsigned() && v.get<std::size_t>() < model.n_states()) return v.get<std::size_t>();
    throw ParseError("state must be a known name or index");
}

}  // namespace

json model_to_json(const ModelSpec& m) {
    const std::size_t c = m.n_cells();
    const std::size_t k = m.n_states();
    const std::size_t u = m.n_actions();
    json doc;
    doc["schema"] = kModelSchema;
    doc["states"] = m.states;
    doc["actions"] = m.actions;
    doc["horizon"] = m.horizon;
    doc["time_grid"] = m.time_grid;
    doc["base_rate"] = m.base_rate;
    doc["mark_dist"] = nest(m.mark_dist, {c, k});
    doc["rate_modifier"] = nest(m.rate_modifier, {c, k, u});
    doc["running_cost"] = nest(m.running_cost, {c, k, u});
    doc["terminal_cost"] = m.terminal_cost;
    doc["C_r"] = m.C_r;
    doc["C_l"] = m.C_l;
    return doc;
}

ModelSpec model_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("model document must be an object");
    if (doc.value("schema", std::string()) != kModelSchema)
        throw ParseError(std::string("model schema must be \"") + kModelSchema + "\"");
    ModelSpec m;
    try {
        m.states = doc.at("states").get<std::vector<std::string>>();
        m.actions = doc.at("actions").get<std::vector<std::string>>();
        m.horizon = doc.at("horizon").get<double>();
        m.time_grid = doc.at("time_grid").get<std::vector<double>>();
        m.base_rate = doc.at("base_rate").get<std::vector<double>>();
        m.terminal_cost = doc.at("terminal_cost").get<std::vector<double>>();
        m.C_r = doc.at("C_r").get<double>();
        m.C_l = doc.at("C_l").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    const std::size_t c = m.base_rate.size();
    const std::size_t k = m.states.size();
    const std::size_t u = m.actions.size();
    for (const char* f : {"mark_dist", "rate_modifier", "running_cost"})
        if (!doc.contains(f)) throw ParseError(std::string("model: missing field ") + f);
    flatten(doc["mark_dist"], {c, k}, 0, m.mark_dist, "mark_dist");
    flatten(doc["rate_modifier"], {c, k, u}, 0, m.rate_modifier, "rate_modifier");
    flatten(doc["running_cost"], {c, k, u}, 0, m.running_cost, "running_cost");
    return validate_model(std::move(m));
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model_from_json(doc);
}

void save_model(const std::string& path, const ModelSpec& model) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << dump(model_to_json(model));
}

json trajectory_to_json(const ModelSpec& model, const Trajectory& traj) {
    json jumps = json::array();
    for (const auto& j : traj.jumps) jumps.push_back(json::array({j.time, model.states[j.mark]}));
    return json{{"stream", traj.stream},
                {"t0", traj.start_time},
                {"x0", model.states[traj.start_state]},
                {"jumps", jumps}};
}

Trajectory trajectory_from_json(const ModelSpec& model, const json& doc) {
    Trajectory t;
    try {
        t.stream = doc.at("stream").get<std::uint64_t>();
        t.start_time = doc.at("t0").get<double>();
        t.start_state = state_index(model, doc.at("x0"));
        for (const auto& j : doc.at("jumps")) {
            if (!j.is_array() || j.size() != 2) throw ParseError("jump must be [t, mark]");
            t.jumps.push_back({j[0].get<double>(), state_index(model, j[1])});
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("trajectory: ") + e.what());
    }
    return t;
}

void write_value_csv(std::ostream& os, const ModelSpec& model, const ValueField& v) {
    os << "t,state,v\n";
    for (std::size_t n = 0; n < v.n_nodes(); ++n)
        for (std::size_t x = 0; x < v.n_states(); ++x)
            os << fmt(v.times()[n]) << ',' << model.states[x] << ',' << fmt(v(n, x)) << '\n';
}

void write_oracle_csv(std::ostream& os, const BruteForceResult& res) {
    os << "policy_id,start_state,cost\n";
    const auto& m = res.fine_model;
    for (std::size_t id = 0; id < res.n_policies; ++id)
        for (std::size_t x = 0; x < m.n_states(); ++x)
            os << id << ',' << m.states[x] << ',' << fmt(res.cost(id, x)) << '\n';
}

json to_json(const ConvergenceReport& rep) {
    return json{{"deltas", rep.deltas},       {"ratio", rep.ratio}, {"iterations", rep.iterations},
                {"beta", rep.beta},           {"c1", rep.c1},       {"c2", rep.c2},
                {"theoretical_ratio", rep.theoretical_ratio}};
}

json to_json(const CostEstimate& est) {
    return json{{"estimate", est.estimate},
                {"std_error", est.std_error},
                {"n_paths", est.n_paths},
                {"route", route_name(est.route)}};
}

json verification_json(const std::string& check, double lhs, double rhs, double tolerance, bool pass) {
    return json{{"check", check}, {"lhs", lhs}, {"rhs", rhs}, {"tolerance", tolerance}, {"pass", pass}};
}

std::string dump(const json& doc) {
    // Non-finite values have no JSON form; nlohmann writes them as null.
    return doc.dump(2) + "\n";
}

}  // namespace mppctl
