// mourre-lab <experiment> --config <path> [--out <dir>] [--threads N]
//
// Exit status: 0 every verdict passed, 1 a verdict failed, 2 configuration or execution error.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mourre/experiment.hpp"

namespace {

namespace ex = mourre::experiment;

int run(const std::string& tag, const std::string& config_path, const std::string& out_dir, unsigned threads_flag) {
  const auto kind = ex::kind_from_string(tag);
  const ex::Json root = ex::load_json_file(config_path);
  const unsigned threads = threads_flag > 0 ? threads_flag : mourre::resolve_thread_count(1);

  if (tag == "export") {
    const ex::Config cfg = ex::parse_config(root);
    for (const auto& f : ex::export_operators(cfg, out_dir)) std::cout << "wrote " << f.string() << "\n";
    return 0;
  }
  if (!kind) throw ex::ConfigError("<experiment>", "unknown experiment '" + tag + "'");
  const ex::Config cfg = ex::parse_config(root, kind);
  const ex::Outcome outcome = ex::run(cfg, out_dir, threads);
  for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << "\n";
  std::cout << outcome.summary << "\n";
  std::cout << "verdict: " << (outcome.verdict ? "PASS" : "FAIL") << "\n";
  return outcome.verdict ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mourre-estimate laboratory for 1D steplike Schroedinger operators"};
  std::string experiment;
  std::string config;
  std::string out = "out";
  unsigned threads = 0;
  app.add_option("experiment", experiment, "rho-scan | transfer | hypotheses | scatter | completeness | export")
      ->required();
  app.add_option("--config,-c", config, "JSON config file")->required();
  app.add_option("--out,-o", out, "output directory")->capture_default_str();
  app.add_option("--threads,-j", threads, "worker threads (default: $MOURRE_LAB_THREADS or 1)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(experiment, config, out, threads);
  } catch (const ex::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
