// Command-line front end; talks to the shared library through the C API only.

#include "strongmin.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssert = 1;
constexpr int kExitUsage = 2;

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

int fail(sm_status st) {
  std::cerr << "error: " << sm_last_error() << "\n";
  return st == SM_ERR_ASSERTION ? kExitAssert : kExitUsage;
}

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { sm_string_free(s); }
};

int run_on_instance(const std::string& path, const std::string& options,
                    bool do_certify) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitUsage;
  }
  sm_instance* inst = nullptr;
  sm_status st = sm_instance_parse_json(text.c_str(), &inst);
  if (st != SM_OK) return fail(st);
  OwnedString out;
  st = do_certify
           ? sm_instance_certify(inst, options.empty() ? nullptr : options.c_str(),
                                 &out.s)
           : sm_instance_solve(inst, options.empty() ? nullptr : options.c_str(),
                               &out.s);
  sm_instance_free(inst);
  if (st != SM_OK) return fail(st);
  std::cout << out.s << "\n";
  return kExitOk;
}

int run_experiment(const std::string& config_path, const char* ensemble,
                   const std::string& output_override) {
  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "error: cannot read " << config_path << "\n";
    return kExitUsage;
  }
  OwnedString csv, summary;
  sm_status st = sm_experiment_run(text.c_str(), ensemble, &csv.s, &summary.s);
  if (st != SM_OK) return fail(st);

  std::string out_path = output_override;
  if (out_path.empty()) {
    // fall back to output_path from the config; cheap scan avoids a json dep here
    const std::string key = "\"output_path\"";
    auto pos = text.find(key);
    if (pos != std::string::npos) {
      auto open = text.find('"', text.find(':', pos));
      auto close = open == std::string::npos ? std::string::npos
                                             : text.find('"', open + 1);
      if (close != std::string::npos)
        out_path = text.substr(open + 1, close - open - 1);
    }
  }
  if (out_path.empty()) {
    std::cout << csv.s;
    return kExitOk;
  }
  if (!write_file(out_path, csv.s) ||
      !write_file(out_path + ".summary.json", summary.s)) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return kExitUsage;
  }
  std::cout << "wrote " << out_path << " and " << out_path << ".summary.json\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certificates and experiments for nuclear-norm minimizers"};
  app.require_subcommand(1);

  std::string instance_path, options_json, config_path, output_path;

  auto* certify = app.add_subcommand("certify", "Certify an instance file");
  certify->add_option("instance", instance_path, "instance JSON file")->required();
  certify->add_option("--options", options_json, "options JSON string");

  auto* solve = app.add_subcommand("solve", "Solve an instance file");
  solve->add_option("instance", instance_path, "instance JSON file")->required();
  solve->add_option("--options", options_json, "options JSON string");

  auto* exp1 = app.add_subcommand("exp1", "Gaussian-ensemble sweep (CSV)");
  exp1->add_option("--config", config_path, "experiment config JSON")->required();
  exp1->add_option("--output", output_path, "CSV output path override");

  auto* exp2 = app.add_subcommand("exp2", "Entry-mask completion sweep (CSV)");
  exp2->add_option("--config", config_path, "experiment config JSON")->required();
  exp2->add_option("--output", output_path, "CSV output path override");

  int n = 6, r = 2, q = 1, n1 = 2, n2 = 2;
  unsigned long long seed = 1;
  auto* demo_min = app.add_subcommand(
      "demo-minimal", "Minimal-measurement recovery scenario");
  demo_min->add_option("--n", n, "matrix size");
  demo_min->add_option("--r", r, "rank");
  demo_min->add_option("--seed", seed, "seed");

  auto* demo_lrr = app.add_subcommand(
      "demo-lrr", "Left-multiplication representation scenario");
  demo_lrr->add_option("--q", q, "rows of L");
  demo_lrr->add_option("--n1", n1, "rows of X");
  demo_lrr->add_option("--n2", n2, "cols of X");
  demo_lrr->add_option("--r", r, "rank of the consistent right-hand side");
  demo_lrr->add_option("--seed", seed, "seed");

  auto* fixtures = app.add_subcommand("fixtures", "Run the golden instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (certify->parsed()) return run_on_instance(instance_path, options_json, true);
  if (solve->parsed()) return run_on_instance(instance_path, options_json, false);
  if (exp1->parsed()) return run_experiment(config_path, "gaussian", output_path);
  if (exp2->parsed()) return run_experiment(config_path, "completion", output_path);

  if (demo_min->parsed() || demo_lrr->parsed()) {
    OwnedString report;
    sm_status st = demo_min->parsed()
                       ? sm_demo_minimal(n, r, seed, &report.s)
                       : sm_demo_lrr(q, n1, n2, r, seed, &report.s);
    if (st != SM_OK) return fail(st);
    std::cout << report.s << "\n";
    return kExitOk;
  }

  if (fixtures->parsed()) {
    OwnedString results;
    sm_status st = sm_fixtures_run(&results.s);
    if (st != SM_OK && st != SM_ERR_ASSERTION) return fail(st);
    // one line per fixture
    std::string text = results.s ? results.s : "";
    bool all_pass = st == SM_OK;
    std::size_t pos = 0;
    while ((pos = text.find("\"name\"", pos)) != std::string::npos) {
      auto open = text.find('"', text.find(':', pos));
      auto close = text.find('"', open + 1);
      std::string name = text.substr(open + 1, close - open - 1);
      auto ppos = text.find("\"pass\"", close);
      bool pass = text.compare(text.find(':', ppos) + 2, 4, "true") == 0;
      std::cout << (pass ? "PASS " : "FAIL ") << name << "\n";
      pos = close;
    }
    return all_pass ? kExitOk : kExitAssert;
  }

  return kExitUsage;
}
