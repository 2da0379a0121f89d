#include <CLI11.hpp>

#include "arterial/commands.hpp"

namespace {

using arterial::cli::CommandOptions;

void add_common(CLI::App* app, CommandOptions& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--seed", o.seed, "Seed for every random stream");
  app->add_option("--out", o.out, "Output directory");
  app->add_flag("--quiet", o.quiet, "Suppress progress notes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crash-risk modelling on signalized arterials"};
  app.require_subcommand(1);
  CommandOptions o;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corridor, logs and crash labels");
  add_common(simulate, o);

  auto* prepare = app.add_subcommand("prepare", "Build the matched case-control dataset");
  add_common(prepare, o);
  prepare->add_option("--logs", o.logs, "Directory with the five log CSVs");
  prepare->add_option("--crashes", o.crashes, "Crash log CSV");

  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler on the training split");
  add_common(fit, o);
  fit->add_option("--dataset", o.dataset, "dataset.csv");
  fit->add_option("--model", o.model, "model.json");
  fit->add_option("--sampler", o.sampler, "sampler.json");
  fit->add_option("--slice", o.slice, "Time slice 1..4")->check(CLI::Range(1, 4));
  fit->add_option("--threads", o.threads, "Chains run in parallel")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "DIC, AUC and ROC for a fitted model");
  add_common(evaluate, o);
  evaluate->add_option("--dataset", o.dataset, "dataset.csv");
  evaluate->add_option("--summary", o.summary, "summary.json from fit");
  evaluate->add_option("--chains", o.chains, "chains.csv from fit (fixed-parameter models)");
  evaluate->add_option("--model", o.model, "model.json, needed with --chains");
  evaluate->add_option("--slice", o.slice, "Time slice 1..4")->check(CLI::Range(1, 4));

  auto* sweep = app.add_subcommand("sweep", "Compare fixed/random coefficient combinations");
  add_common(sweep, o);
  sweep->add_option("--dataset", o.dataset, "dataset.csv");
  sweep->add_option("--model", o.model, "Base model.json");
  sweep->add_option("--sampler", o.sampler, "sampler.json");
  sweep->add_option("--slice", o.slice, "Time slice 1..4")->check(CLI::Range(1, 4));
  sweep->add_option("--threads", o.threads, "Chains run in parallel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return arterial::cli::kExitConfig;
  }

  using namespace arterial::cli;
  if (simulate->parsed()) return guarded([&] { cmd_simulate(o); });
  if (prepare->parsed()) return guarded([&] { cmd_prepare(o); });
  if (fit->parsed()) return guarded([&] { cmd_fit(o); });
  if (evaluate->parsed()) return guarded([&] { cmd_evaluate(o); });
  if (sweep->parsed()) return guarded([&] { cmd_sweep(o); });
  return kExitConfig;
}
