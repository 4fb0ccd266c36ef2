// blockprop command-line front end.
#include "blockprop/error.hpp"
#include "blockprop/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Blocking-behaviour prediction pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::string quantiles, seed, definition, tox_mode, jobs;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Flat key = value config file");
  app.add_option("--quantiles", quantiles, "Comma-separated quantile grid");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--definition", definition, "Target definition (raw, norm or raw,norm)");
  app.add_option("--tox-mode", tox_mode, "Toxicity source")->check(CLI::IsMember({"sidecar", "lexicon"}));
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--set", overrides, "Override any config key (key=value), repeatable");

  for (const auto& name : blockprop::command_names()) app.add_subcommand(name, "Run the " + name + " stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto config = config_path.empty() ? blockprop::RunConfig{} : blockprop::RunConfig::load(config_path);
    if (!quantiles.empty()) config.set("quantiles", quantiles);
    if (!seed.empty()) config.set("seed", seed);
    if (!definition.empty()) config.set("definitions", definition);
    if (!tox_mode.empty()) config.set("tox_mode", tox_mode);
    if (!jobs.empty()) config.set("jobs", jobs);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw blockprop::ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    blockprop::run_command(app.get_subcommands().front()->get_name(), config);
  } catch (const std::exception& e) {
    std::cerr << "blockprop: " << e.what() << "\n";
    return blockprop::exit_code_for(e);
  }
  return 0;
}
