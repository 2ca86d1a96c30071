#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "dampedwave/config.hpp"
#include "dampedwave/error.hpp"
#include "dampedwave/experiments.hpp"
#include "dampedwave/output.hpp"

namespace dw = dampedwave;

namespace {

int run_cli(int argc, char** argv) {
  CLI::App app{"Mixed finite element solver and experiments for the 1D damped wave system"};
  app.set_help_flag("--help", "print this help and exit");
  std::string experiment;
  std::string config_path;
  app.add_option("experiment", experiment, "decay-table | convergence | cn-demo | arate | stationary | simulate")
      ->required()
      ->check(CLI::IsMember(dw::experiment_names()));
  app.add_option("--config", config_path, "flat key = value file");
  std::map<std::string, std::string> overrides;
  for (const auto& key : dw::known_keys()) {
    app.add_option_function<std::string>(
        std::string("--") + key.name, [&overrides, name = std::string(key.name)](const std::string& v) { overrides[name] = v; },
        key.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const dw::ConfigMap file = config_path.empty() ? dw::ConfigMap{} : dw::parse_config_file(config_path);
    const dw::ExperimentConfig cfg = dw::resolve_config(experiment, file, overrides);
    const dw::ExperimentResult result = dw::run_experiment(cfg);

    const std::string out = cfg.text("out");
    if (out == "-") {
      dw::write_csv(std::cout, cfg.header_line(), result.table);
    } else {
      std::ofstream os(out);
      if (!os) throw dw::ConfigError("cannot write '" + out + "'");
      dw::write_csv(os, cfg.header_line(), result.table);
    }
    if (cfg.has("svg")) {
      std::ofstream os(cfg.text("svg"));
      if (!os) throw dw::ConfigError("cannot write '" + cfg.text("svg") + "'");
      dw::write_svg(os, result.plot);
    }
  } catch (const dw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const dw::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const dw::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
