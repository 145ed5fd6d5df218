// circlelab: run registered experiments from JSON configuration files.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "circlelab/errors.hpp"
#include "circlelab/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

void add_flags(CLI::App* cmd, Flags& flags, bool with_out) {
  cmd->add_option("--config", flags.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "seed overriding the configuration");
  cmd->add_option("--threads", flags.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  if (with_out) cmd->add_option("--out", flags.out, "output directory")->required();
}

int run(const std::string& expected, const Flags& flags) {
  const auto config = circlelab::load_config(flags.config);
  const auto result = circlelab::run_experiment(config, expected, {flags.seed, flags.threads});
  circlelab::write_outputs(result, flags.out);
  std::cout << result.summary();
  return result.passed() ? 0 : 1;
}

int validate(const Flags& flags) {
  const auto config = circlelab::load_config(flags.config);
  const auto resolved = circlelab::validate_config(config, "", {flags.seed, flags.threads});
  std::cout << "valid: " << resolved.at("experiment").get<std::string>() << '\n' << resolved.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circlelab: random circle diffeomorphisms and matrix cocycles near rotations"};
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const auto& info : circlelab::experiment_registry()) {
    auto* cmd = app.add_subcommand(info.name, info.description);
    add_flags(cmd, flags, true);
    cmd->callback([&chosen, name = info.name] { chosen = name; });
  }
  auto* val = app.add_subcommand("validate", "check a configuration without running it");
  add_flags(val, flags, false);
  val->callback([&chosen] { chosen = "validate"; });
  app.add_subcommand("list", "list registered experiments")->callback([&chosen] { chosen = "list"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (chosen == "list") {
      for (const auto& info : circlelab::experiment_registry()) std::cout << info.name << "  " << info.description << '\n';
      return 0;
    }
    if (chosen == "validate") return validate(flags);
    return run(chosen, flags);
  } catch (const circlelab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const circlelab::ResonanceError& e) {
    std::cerr << "resonance at q = " << e.mode() << " (divisor " << e.divisor() << "): " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
