#include "dynlaw/errors.hpp"
#include "dynlaw/harness.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const dynlaw::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return dynlaw::kExitNumerical;
  } catch (const dynlaw::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dynlaw::kExitConfig;
  } catch (const dynlaw::DimensionError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dynlaw::kExitConfig;
  } catch (const dynlaw::InputError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dynlaw::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover dynamical laws as block-sparse tensor trains"};
  app.require_subcommand(1);

  dynlaw::CommandArgs args;
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("--config", config, "Experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the master seed");
  auto* out_opt = app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--threads", args.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", args.quiet, "Suppress progress output");

  std::string dataset;
  std::string model;
  auto* generate = app.add_subcommand("generate", "Sample a dataset");
  generate->add_flag("--csv", args.csv, "Also write dataset.csv");
  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  train->add_option("--dataset", dataset, "Dataset file (default <out-dir>/dataset.json)");
  auto* evaluate = app.add_subcommand("evaluate", "Residuum of a trained model");
  evaluate->add_option("--model", model, "Model file (default <out-dir>/model.json)");
  auto* sweep = app.add_subcommand("sweep", "Run the M x sigma x restart grid");
  auto* exact = app.add_subcommand("exact", "Exact tensor-train witnesses");
  auto* diagnose = app.add_subcommand("diagnose", "Interface spectra of a model");
  diagnose->add_option("--model", model, "Model file (default <out-dir>/model.json)");

  for (auto* sub : {generate, train, evaluate, sweep, exact, diagnose}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dynlaw::kExitConfig;
  }

  args.config = config;
  if (*seed_opt) args.seed = seed;
  if (*out_opt) args.out_dir = out_dir;
  args.dataset = dataset;
  args.model = model;

  if (generate->parsed()) return guarded([&] { return dynlaw::cmd_generate(args); });
  if (train->parsed()) return guarded([&] { return dynlaw::cmd_train(args); });
  if (evaluate->parsed()) return guarded([&] { return dynlaw::cmd_evaluate(args); });
  if (sweep->parsed()) return guarded([&] { return dynlaw::cmd_sweep(args); });
  if (exact->parsed()) return guarded([&] { return dynlaw::cmd_exact(args); });
  return guarded([&] { return dynlaw::cmd_diagnose(args); });
}
