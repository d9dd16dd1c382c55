#pragma once

#include "strongmin/harness.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace strongmin {

/// Matrices in files are nested arrays of rows; operator payloads follow the
/// documented per-kind schema; indices are 0-based.
Mat matrix_from_json(const nlohmann::json& j, const char* what);
nlohmann::json matrix_to_json(const Mat& a);

LinOp operator_from_json(const nlohmann::json& j);
nlohmann::json operator_to_json(const LinOp& op);

ProblemInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const ProblemInstance& inst);

CertifyOptions options_from_json(const nlohmann::json& j);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const CertifyReport& rep);
nlohmann::json solve_result_to_json(const SolveResult& res);
nlohmann::json fixture_results_to_json(const std::vector<FixtureResult>& results);

/// Wrappers that parse text and map json exceptions onto ErrorKind::Parse.
nlohmann::json parse_json_text(const std::string& text, const char* what);

}  // namespace strongmin
