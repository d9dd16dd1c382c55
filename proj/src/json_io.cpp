#include "strongmin/json_io.hpp"

#include <nlohmann/json.hpp>

namespace strongmin {

using nlohmann::json;

json parse_json_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorKind::Parse, std::string(what) + ": malformed JSON");
  return j;
}

Mat matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw Error(ErrorKind::Parse, std::string(what) + ": expected array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  Mat a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error(ErrorKind::Parse, std::string(what) + ": ragged rows");
    for (Index k = 0; k < cols; ++k) {
      const auto& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number())
        throw Error(ErrorKind::Parse, std::string(what) + ": non-numeric entry");
      a(i, k) = cell.get<double>();
    }
  }
  require_finite(a, what);
  return a;
}

json matrix_to_json(const Mat& a) {
  json rows = json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Vec vector_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw Error(ErrorKind::Parse, std::string(what) + ": expected array");
  Vec v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    const auto& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number())
      throw Error(ErrorKind::Parse, std::string(what) + ": non-numeric entry");
    v(i) = cell.get<double>();
  }
  return v;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

void thresholds_from_json(const json& j, Thresholds& th) {
  th.recovery = j.value("recovery", th.recovery);
  th.tau_sharp = j.value("tau_sharp", th.tau_sharp);
  th.rho_sharp = j.value("rho_sharp", th.rho_sharp);
  th.zeta_strong = j.value("zeta_strong", th.zeta_strong);
  th.rho_band_lo = j.value("rho_band_lo", th.rho_band_lo);
  th.rho_band_hi = j.value("rho_band_hi", th.rho_band_hi);
  th.tol_p = j.value("tol_p", th.tol_p);
  th.geometric_margin = j.value("geometric_margin", th.geometric_margin);
}

json thresholds_to_json(const Thresholds& th) {
  return json{{"recovery", th.recovery},
              {"tau_sharp", th.tau_sharp},
              {"rho_sharp", th.rho_sharp},
              {"zeta_strong", th.zeta_strong},
              {"rho_band_lo", th.rho_band_lo},
              {"rho_band_hi", th.rho_band_hi},
              {"tol_p", th.tol_p},
              {"geometric_margin", th.geometric_margin}};
}

void solver_from_json(const json& j, SolverConfig& s) {
  s.tol_primal = j.value("tol_primal", s.tol_primal);
  s.tol_dual = j.value("tol_dual", s.tol_dual);
  s.max_iter = j.value("max_iter", s.max_iter);
  s.step = j.value("step", s.step);
  if (s.tol_primal <= 0 || s.tol_dual <= 0 || s.max_iter <= 0 || s.step <= 0)
    throw Error(ErrorKind::Parse, "solver config: all fields must be positive");
}

}  // namespace

LinOp operator_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  const auto n1 = static_cast<Index>(j.value("n1", 0));
  const auto n2 = static_cast<Index>(j.value("n2", 0));
  if (n1 <= 0 || n2 <= 0)
    throw Error(ErrorKind::Parse, "operator: n1/n2 must be positive");
  if (!j.contains("payload"))
    throw Error(ErrorKind::Parse, "operator: missing payload");
  const json& p = j.at("payload");
  auto check_m = [&](const LinOp& op) {
    if (j.contains("m") && j.at("m").get<Index>() != op.m())
      throw Error(ErrorKind::Parse, "operator: declared m disagrees with payload");
    return op;
  };

  if (kind == "dense") {
    Mat a = matrix_from_json(p, "operator.payload");
    return check_m(LinOp::dense(std::move(a), n1, n2));
  }
  if (kind == "entry_mask") {
    if (!p.is_array()) throw Error(ErrorKind::Parse, "entry_mask: payload");
    std::vector<std::pair<Index, Index>> omega;
    for (const auto& e : p) {
      if (!e.is_array() || e.size() != 2)
        throw Error(ErrorKind::Parse, "entry_mask: expected [i,j] pairs");
      omega.emplace_back(e[0].get<Index>(), e[1].get<Index>());
    }
    return check_m(LinOp::entry_mask(std::move(omega), n1, n2));
  }
  if (kind == "left_mult") {
    Mat l = matrix_from_json(p, "operator.payload");
    return check_m(LinOp::left_mult(std::move(l), n1, n2));
  }
  if (kind == "inner_family") {
    if (!p.is_array()) throw Error(ErrorKind::Parse, "inner_family: payload");
    std::vector<Mat> mats;
    for (const auto& e : p) mats.push_back(matrix_from_json(e, "inner_family"));
    return check_m(LinOp::inner_family(std::move(mats), n1, n2));
  }
  throw Error(ErrorKind::Parse, "operator: unknown kind '" + kind + "'");
}

json operator_to_json(const LinOp& op) {
  json j{{"n1", op.n1()}, {"n2", op.n2()}, {"m", op.m()}};
  switch (op.kind()) {
    case OpKind::Dense:
      j["kind"] = "dense";
      j["payload"] = matrix_to_json(op.dense_matrix());
      break;
    case OpKind::EntryMask: {
      j["kind"] = "entry_mask";
      json idx = json::array();
      for (auto [a, b] : op.mask()) idx.push_back(json::array({a, b}));
      j["payload"] = idx;
      break;
    }
    case OpKind::LeftMult:
      j["kind"] = "left_mult";
      j["payload"] = matrix_to_json(op.left_factor());
      break;
    case OpKind::InnerFamily: {
      j["kind"] = "inner_family";
      json mats = json::array();
      for (const Mat& a : op.family()) mats.push_back(matrix_to_json(a));
      j["payload"] = mats;
      break;
    }
  }
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  if (!j.contains("operator") || !j.contains("x0") || !j.contains("m0"))
    throw Error(ErrorKind::Parse, "instance: operator, x0 and m0 are required");
  ProblemInstance inst{operator_from_json(j.at("operator")),
                       matrix_from_json(j.at("x0"), "x0"),
                       vector_from_json(j.at("m0"), "m0"), std::nullopt};
  if (j.contains("mu") && !j.at("mu").is_null())
    inst.mu = j.at("mu").get<double>();
  inst.validate();
  return inst;
}

json instance_to_json(const ProblemInstance& inst) {
  json j{{"operator", operator_to_json(inst.op)},
         {"x0", matrix_to_json(inst.x0)},
         {"m0", vector_to_json(inst.m0)}};
  if (inst.mu) j["mu"] = *inst.mu;
  return j;
}

CertifyOptions options_from_json(const json& j) {
  CertifyOptions opts;
  if (j.is_null()) return opts;
  if (j.contains("thresholds")) thresholds_from_json(j.at("thresholds"), opts.thresholds);
  if (j.contains("solver")) solver_from_json(j.at("solver"), opts.solver);
  opts.retry_certificates = j.value("retry_certificates", false);
  return opts;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  const std::string ens = j.value("ensemble", "gaussian");
  if (ens == "gaussian")
    cfg.ensemble = Ensemble::Gaussian;
  else if (ens == "completion")
    cfg.ensemble = Ensemble::Completion;
  else
    throw Error(ErrorKind::Parse, "config: ensemble must be gaussian|completion");
  cfg.n = j.value("n", cfg.n);
  if (j.contains("rank_list"))
    cfg.rank_list = j.at("rank_list").get<std::vector<int>>();
  if (j.contains("m_grid")) cfg.m_grid = j.at("m_grid").get<std::vector<int>>();
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("thresholds")) thresholds_from_json(j.at("thresholds"), cfg.thresholds);
  if (j.contains("solver")) solver_from_json(j.at("solver"), cfg.solver);
  cfg.output_path = j.value("output_path", cfg.output_path);
  cfg.validate();
  return cfg;
}

json report_to_json(const CertifyReport& rep) {
  json retries = json::array();
  for (const auto& rr : rep.experimental_retries)
    retries.push_back(json{{"theta", rr.theta},
                           {"p", rr.p},
                           {"strong_ri", rr.strong_ri},
                           {"zeta", optional_to_json(rr.zeta)}});
  return json{
      {"recovered", rep.recovered},
      {"ri", rep.ri},
      {"strict_ri", rep.strict_ri},
      {"strong_ri", rep.strong_ri},
      {"ssc", rep.ssc},
      {"tau", optional_to_json(rep.tau)},
      {"rho", optional_to_json(rep.rho)},
      {"zeta", optional_to_json(rep.zeta)},
      {"gamma", optional_to_json(rep.gamma)},
      {"ic", optional_to_json(rep.ic)},
      {"p_of_y0", rep.p_of_y0},
      {"label", label_name(rep.label)},
      {"label_experiment", label_name(rep.label_experiment)},
      {"dual_certificate", rep.dual_certificate_valid
                               ? matrix_to_json(rep.dual_certificate)
                               : json(nullptr)},
      {"dual_certificate_valid", rep.dual_certificate_valid},
      {"geometric_check", rep.geometric},
      {"q_heuristic", rep.q_heuristic},
      {"q_heuristic_provenance", rep.q_heuristic_provenance},
      {"recovery_error", rep.recovery_error},
      {"solver",
       json{{"iterations", rep.solver_iterations},
            {"converged", rep.solver_converged},
            {"kkt_violation", rep.solver_kkt_violation}}},
      {"thresholds", thresholds_to_json(rep.thresholds)},
      {"experimental_retries", retries}};
}

json solve_result_to_json(const SolveResult& res) {
  return json{{"x_opt", matrix_to_json(res.x_opt)},
              {"objective", res.objective},
              {"primal_residual", res.primal_residual},
              {"dual_residual", res.dual_residual},
              {"iterations", res.iterations},
              {"converged", res.converged},
              {"kkt_violation", res.kkt_violation}};
}

json fixture_results_to_json(const std::vector<FixtureResult>& results) {
  json out = json::array();
  for (const auto& r : results)
    out.push_back(json{{"name", r.name}, {"pass", r.pass}, {"details", r.details}});
  return out;
}

}  // namespace strongmin
