#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mppctl/bsde_verify.hpp"
#include "mppctl/control_eval.hpp"
#include "mppctl/girsanov.hpp"
#include "mppctl/hjb.hpp"
#include "mppctl/model.hpp"
#include "mppctl/simulate.hpp"

namespace mppctl {

inline constexpr const char* kModelSchema = "mpp-control/model/v1";

nlohmann::json model_to_json(const ModelSpec& model);
/// Parses and validates. Throws ParseError on malformed documents.
ModelSpec model_from_json(const nlohmann::json& doc);

ModelSpec load_model(const std::string& path);
void save_model(const std::string& path, const ModelSpec& model);

/// One JSON-lines record: {"stream", "t0", "x0", "jumps": [[t, mark], ...]}, states by name.
nlohmann::json trajectory_to_json(const ModelSpec& model, const Trajectory& traj);
Trajectory trajectory_from_json(const ModelSpec& model, const nlohmann::json& doc);

/// CSV with header "t,state,v", one row per node and state.
void write_value_csv(std::ostream& os, const ModelSpec& model, const ValueField& v);
/// Rows "policy_id,start_state,cost".
void write_oracle_csv(std::ostream& os, const BruteForceResult& res);

nlohmann::json to_json(const ConvergenceReport& rep);
nlohmann::json to_json(const CostEstimate& est);

/// {"check", "lhs", "rhs", "tolerance", "pass"} plus any extra fields.
nlohmann::json verification_json(const std::string& check, double lhs, double rhs, double tolerance,
                                 bool pass);

/// Fixed-format dump: sorted keys as given by nlohmann, 2-space indent, trailing newline.
std::string dump(const nlohmann::json& doc);

}  // namespace mppctl
