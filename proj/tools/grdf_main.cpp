#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "grdf/experiment.hpp"
#include "grdf/site.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulation experiments for the generalized random directed forest"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials, horizon;
  std::optional<int> workers;

  for (const auto& name : grdf::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--p", p, "Open-site probability");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--trials", trials, "Number of trials");
    sub->add_option("--workers", workers, "Worker threads");
    sub->add_option("--horizon", horizon, "Time horizon");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : grdf::kExitConfigError;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  grdf::ExperimentConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw grdf::ConfigError("config", "cannot open '" + config_path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw grdf::ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("experiment") && j["experiment"] != experiment)
      throw grdf::ConfigError("experiment", "config names a different experiment");
    if (j.is_object()) j["experiment"] = experiment;
    cfg = grdf::ExperimentConfig::from_json(j);
  } catch (const grdf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return grdf::kExitConfigError;
  }
  if (p) cfg.env.p = *p;
  if (seed) cfg.env.seed = *seed;
  if (trials) cfg.trials = *trials;
  if (workers) cfg.workers = *workers;
  if (horizon) cfg.horizon = *horizon;
  return grdf::run(cfg, std::cerr);
}
