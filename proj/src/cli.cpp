#include "mppctl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mppctl/bsde_verify.hpp"
#include "mppctl/control_eval.hpp"
#include "mppctl/errors.hpp"
#include "mppctl/girsanov.hpp"
#include "mppctl/hamiltonian.hpp"
#include "mppctl/hjb.hpp"
#include "mppctl/instances.hpp"
#include "mppctl/io.hpp"
#include "mppctl/parallel.hpp"
#include "mppctl/rng.hpp"

namespace mppctl {

using nlohmann::json;

namespace {

struct Options {
    std::string model_path;
    std::string out_path;
    std::uint64_t seed = 1;
    std::size_t paths = 10000;
    double beta = 0.0;  // 0: pick the relevant threshold
    double tol = 1e-7;
    std::size_t substeps = 1;
    std::size_t coarse_cells = 2;
    std::size_t threads = 0;
    std::size_t cells = 2;
    std::size_t max_iter = 1000;
    double delta = 0.1;
    int action = -1;  // -1: the HJB feedback policy
    std::string instance;
    std::string check;
};

/// Config problems that should map to exit code 2.
struct UsageError : Error {
    using Error::Error;
};

/// Writes to --out if given, else to the command stream.
void emit(const Options& opt, std::ostream& out, const std::string& text) {
    if (opt.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f) throw UsageError("cannot write --out " + opt.out_path);
    f << text;
}

ModelSpec require_model(const Options& opt) {
    if (opt.model_path.empty()) throw UsageError("--model is required");
    return load_model(opt.model_path);
}

ModelSpec fine_model(const ModelSpec& model, const Options& opt) {
    if (opt.substeps == 0) throw UsageError("--substeps must be positive");
    return refine_model(model, opt.substeps);
}

/// Policy used by the Monte Carlo commands: the HJB feedback or a constant action.
Policy chosen_policy(const ModelSpec& fine, const Options& opt) {
    if (opt.action >= 0) {
        if (static_cast<std::size_t>(opt.action) >= fine.n_actions()) throw UsageError("--action out of range");
        return Policy::constant(fine, static_cast<std::size_t>(opt.action));
    }
    return policy_from_value(fine, hjb_march(fine));
}

int cmd_instance(const Options& opt, std::ostream& out) {
    ModelSpec m;
    if (opt.instance == "d1")
        m = instance_d1(opt.cells);
    else if (opt.instance == "d2")
        m = instance_d2(opt.cells);
    else
        throw UsageError("unknown instance " + opt.instance);
    emit(opt, out, dump(model_to_json(m)));
    return 0;
}

int cmd_solve(const Options& opt, std::ostream& out) {
    const auto fine = fine_model(require_model(opt), opt);
    std::ostringstream csv;
    write_value_csv(csv, fine, hjb_march(fine));
    emit(opt, out, csv.str());
    return 0;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
    const auto model = require_model(opt);
    const std::uint64_t s = derive_seed(opt.seed, 2);
    std::vector<Trajectory> paths(opt.paths);
    if (opt.action >= 0) {
        const auto policy = chosen_policy(model, opt);
        parallel_for(opt.paths, [&](std::size_t i) { paths[i] = simulate_controlled(model, policy, 0.0, 0, i, s); });
    } else {
        parallel_for(opt.paths, [&](std::size_t i) { paths[i] = simulate_reference(model, 0.0, 0, i, s); });
    }
    std::string text;
    for (const auto& p : paths) text += trajectory_to_json(model, p).dump() + "\n";
    emit(opt, out, text);
    return 0;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
    const auto fine = fine_model(require_model(opt), opt);
    const auto v = hjb_march(fine);
    const auto policy = chosen_policy(fine, opt);
    json report = json::array();
    bool pass = true;
    for (std::size_t x = 0; x < fine.n_states(); ++x) {
        const auto direct = mc_cost_direct(fine, policy, 0.0, x, opt.paths, opt.seed);
        const auto rew = mc_cost_reweighted(fine, policy, 0.0, x, opt.paths, opt.seed);
        const double pooled = std::hypot(direct.std_error, rew.std_error);
        const bool routes = std::abs(direct.estimate - rew.estimate) <= 3.0 * pooled + 1e-12;
        // v(0,x) <= J(u) for every policy, equality for the HJB feedback.
        const double slack = 3.0 * direct.std_error + 1e-3;
        const bool relation = opt.action >= 0 ? v(0, x) <= direct.estimate + slack
                                              : std::abs(direct.estimate - v(0, x)) <= slack;
        pass = pass && routes && relation;
        report.push_back(json{{"start_state", fine.states[x]},
                              {"value", v(0, x)},
                              {"direct", to_json(direct)},
                              {"reweighted", to_json(rew)},
                              {"routes_agree", routes},
                              {"fundamental_relation", relation}});
    }
    emit(opt, out, dump(json{{"check", "evaluate"}, {"results", report}, {"pass", pass}}));
    return pass ? 0 : 1;
}

int cmd_oracle(const Options& opt, std::ostream& out) {
    const auto model = require_model(opt);
    const auto res = brute_force_value(model, opt.coarse_cells);
    const auto v = hjb_march(res.fine_model);
    const std::size_t restricted = restrict_policy(res.fine_model, policy_from_value(res.fine_model, v), opt.coarse_cells);
    json summary;
    summary["n_policies"] = res.n_policies;
    summary["coarse_cells"] = res.coarse_cells;
    summary["fine_cells"] = res.fine_model.n_cells();
    summary["restricted_policy"] = restricted;
    bool pass = true;
    json per_state = json::array();
    for (std::size_t x = 0; x < model.n_states(); ++x) {
        const bool above = res.min_cost[x] >= v(0, x) - 1e-3;
        const bool attained = std::abs(res.cost(restricted, x) - res.min_cost[x]) <= 1e-3;
        pass = pass && above && attained;
        per_state.push_back(json{{"start_state", model.states[x]},
                                 {"min", res.min_cost[x]},
                                 {"argmin", res.argmin[x]},
                                 {"hjb_value", v(0, x)},
                                 {"restricted_cost", res.cost(restricted, x)},
                                 {"min_above_value", above},
                                 {"attained", attained}});
    }
    summary["states"] = per_state;
    summary["pass"] = pass;
    if (opt.out_path.empty()) {
        out << dump(summary);
    } else {
        std::ostringstream csv;
        write_oracle_csv(csv, res);
        emit(opt, out, csv.str());
        out << dump(summary);
    }
    return pass ? 0 : 1;
}

json check_girsanov(const ModelSpec& model, const Options& opt) {
    const auto policy = chosen_policy(model, opt);
    const auto norm = verify_normalization(model, policy, opt.paths, opt.seed);
    const auto moment = verify_moment_bound(model, policy, opt.paths, opt.seed);
    const auto comp = empirical_compensator_check(model, policy, opt.paths, opt.seed);
    const double tol = 3.0 * norm.std_error;
    const bool pass = std::abs(norm.estimate - 1.0) <= tol &&
                      moment.estimate_L2 <= moment.bound + 3.0 * moment.std_error && comp.z_max <= 3.0;
    json j = verification_json("girsanov", norm.estimate, 1.0, tol, pass);
    j["estimate"] = norm.estimate;
    j["std_error"] = norm.std_error;
    j["bound"] = moment.bound;
    j["second_moment"] = moment.estimate_L2;
    j["z_max"] = comp.z_max;
    return j;
}

json check_ito(const ModelSpec& model, const Options& opt) {
    const std::uint64_t field_seed = derive_seed(opt.seed, 3);
    const std::uint64_t path_seed = derive_seed(opt.seed, 2);
    std::vector<double> worst(opt.paths);
    parallel_for(opt.paths, [&](std::size_t i) {
        const auto f = random_ito_fields(model, i, field_seed);
        const auto traj = simulate_reference(model, 0.0, 0, i, path_seed);
        const auto r = ito_identity_check(model, f.fhat, f.V, f.v0, traj);
        worst[i] = std::max(r.residual_prima, r.residual_seconda) / (1.0 + static_cast<double>(r.jumps));
    });
    const double w = opt.paths ? *std::max_element(worst.begin(), worst.end()) : 0.0;
    return verification_json("ito", w, 0.0, 1e-9, w <= 1e-9);
}

json check_bsde(const ModelSpec& model, const Options& opt) {
    const auto fine = fine_model(model, opt);
    const auto v = hjb_march(fine);
    const std::uint64_t s = derive_seed(opt.seed, 2);
    std::vector<double> res(opt.paths), ratio(opt.paths);
    parallel_for(opt.paths, [&](std::size_t i) {
        const auto traj = simulate_reference(fine, 0.0, 0, i, s);
        res[i] = bsde_residual(fine, v, traj);
        ratio[i] = res[i] / bsde_residual_tolerance(fine, traj.jumps.size());
    });
    double mean = 0.0;
    for (double r : res) mean += r;
    mean /= std::max<std::size_t>(opt.paths, 1);
    const double worst = opt.paths ? *std::max_element(ratio.begin(), ratio.end()) : 0.0;
    json j = verification_json("bsde", worst, 0.0, 1.0, worst <= 1.0);
    j["mean_residual"] = mean;
    j["cells"] = fine.n_cells();
    return j;
}

json check_energy(const ModelSpec& model, const Options& opt) {
    DriftField fhat(model.n_cells(), model.n_states());
    for (std::size_t j = 0; j < model.n_cells(); ++j)
        for (std::size_t x = 0; x < model.n_states(); ++x) fhat(j, x) = model.l(j, x, 0);
    const double beta = opt.beta > 0.0 ? opt.beta : beta_thresholds(model).beta_bsde;
    const auto rep = energy_identity_check(model, fhat, beta, opt.paths, opt.seed);
    const double tol = 3.0 * rep.combined_se + 1e-3;
    const bool identity = std::abs(rep.lhs - rep.rhs) <= tol;
    const bool estimate = rep.estimate_lhs <= rep.estimate_rhs + 3.0 * rep.estimate_se + 1e-3;
    json j = verification_json("energy", rep.lhs, rep.rhs, tol, identity && estimate);
    j["beta"] = beta;
    j["combined_se"] = rep.combined_se;
    j["estimate_lhs"] = rep.estimate_lhs;
    j["estimate_rhs"] = rep.estimate_rhs;
    j["c1"] = rep.c1;
    j["c2"] = rep.c2;
    return j;
}

ModelSpec perturb_cost(ModelSpec model, double delta) {
    for (auto& l : model.running_cost) l += delta;
    return validate_model(std::move(model));
}

json check_apriori(const ModelSpec& model, const Options& opt) {
    const auto fine = fine_model(model, opt);
    const double beta = opt.beta > 0.0 ? opt.beta : beta_thresholds(fine).beta_bsde;
    const auto rep = apriori_check(fine, perturb_cost(fine, opt.delta), beta, opt.paths, opt.seed);
    const bool pass = rep.y_holds && rep.z_holds;
    json j = verification_json("apriori", rep.y_norm, rep.y_bound, 3.0 * rep.y_gap_se, pass);
    j["beta"] = beta;
    j["z_norm"] = rep.z_norm;
    j["z_bound"] = rep.z_bound;
    j["xi_term"] = rep.xi_term;
    j["f_term"] = rep.f_term;
    return j;
}

json check_contraction(const ModelSpec& model, const Options& opt) {
    const auto fine = fine_model(model, opt);
    const double beta = opt.beta > 0.0 ? opt.beta : beta_thresholds(fine).beta_hjb;
    const auto [vp, rep] = hjb_picard(fine, beta, opt.tol, opt.max_iter);
    const double gap = sup_distance(vp, hjb_march(fine));
    const double limit = 1.1 * rep.theoretical_ratio;
    json j = verification_json("contraction", rep.ratio, rep.theoretical_ratio, limit, rep.ratio <= limit);
    j["report"] = to_json(rep);
    j["march_gap"] = gap;
    return j;
}

int cmd_verify(const Options& opt, std::ostream& out) {
    const auto model = require_model(opt);
    json j;
    if (opt.check == "girsanov")
        j = check_girsanov(model, opt);
    else if (opt.check == "ito")
        j = check_ito(model, opt);
    else if (opt.check == "bsde")
        j = check_bsde(model, opt);
    else if (opt.check == "energy")
        j = check_energy(model, opt);
    else if (opt.check == "apriori")
        j = check_apriori(model, opt);
    else if (opt.check == "contraction")
        j = check_contraction(model, opt);
    else
        throw UsageError("unknown check " + opt.check);
    emit(opt, out, dump(j));
    return j["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Optimal control of marked point processes: solvers and checks", "mppctl"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--model", opt.model_path, "model JSON file");
        sub->add_option("--out", opt.out_path, "output file (default: standard output)");
        sub->add_option("--seed", opt.seed, "master seed (MPPCTL_SEED overrides)");
        sub->add_option("--paths", opt.paths, "number of Monte Carlo paths")->check(CLI::PositiveNumber);
        sub->add_option("--beta", opt.beta, "weight exponent")->check(CLI::PositiveNumber);
        sub->add_option("--tol", opt.tol, "Picard tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--substeps", opt.substeps, "refinement of every model cell")->check(CLI::PositiveNumber);
        sub->add_option("--coarse-cells", opt.coarse_cells, "oracle policy cells")->check(CLI::PositiveNumber);
        sub->add_option("--threads", opt.threads, "worker threads (0: hardware)");
        sub->add_option("--action", opt.action, "constant action index instead of the HJB feedback");
    };

    auto* instance = app.add_subcommand("instance", "write a built-in model (d1 or d2)");
    instance->add_option("name", opt.instance)->required()->check(CLI::IsMember({"d1", "d2"}));
    instance->add_option("--cells", opt.cells, "number of grid cells")->check(CLI::PositiveNumber);
    instance->add_option("--out", opt.out_path, "output file");

    auto* solve = app.add_subcommand("solve", "HJB solution by backward marching, CSV t,state,v");
    auto* simulate = app.add_subcommand("simulate", "reference or controlled trajectories as JSON lines");
    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo cost by both routes against v(0,x)");
    auto* oracle = app.add_subcommand("oracle", "exhaustive coarse-policy search");
    auto* verify = app.add_subcommand("verify", "run one verification suite");
    verify->add_option("check", opt.check)
        ->required()
        ->check(CLI::IsMember({"girsanov", "ito", "bsde", "energy", "apriori", "contraction"}));
    verify->add_option("--delta", opt.delta, "running cost perturbation for apriori");
    verify->add_option("--max-iter", opt.max_iter, "Picard iteration cap")->check(CLI::PositiveNumber);
    for (auto* sub : {solve, simulate, evaluate, oracle, verify}) common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "mppctl: " << e.what() << "\n";
        return 2;
    }

    if (const char* env = std::getenv("MPPCTL_SEED"); env && *env) {
        try {
            opt.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "mppctl: MPPCTL_SEED is not an unsigned integer\n";
            return 2;
        }
    }
    set_thread_count(opt.threads ? static_cast<unsigned>(opt.threads) : std::thread::hardware_concurrency());

    try {
        if (instance->parsed()) return cmd_instance(opt, out);
        if (solve->parsed()) return cmd_solve(opt, out);
        if (simulate->parsed()) return cmd_simulate(opt, out);
        if (evaluate->parsed()) return cmd_evaluate(opt, out);
        if (oracle->parsed()) return cmd_oracle(opt, out);
        if (verify->parsed()) return cmd_verify(opt, out);
    } catch (const NoConvergence& e) {
        err << "mppctl: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "mppctl: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace mppctl
