// Command-line front end: train, evaluate, sweep, pipeline.

#include <iostream>

#include "CLI11.hpp"
#include "flann/cli.hpp"
#include "flann/io.hpp"

namespace {

void AddTrainingFlags(CLI::App* cmd, flann::TrainingConfig* config) {
  cmd->add_option("--eta", config->eta, "LMS learning rate in (0, 1]")->capture_default_str();
  cmd->add_option("--max-epochs", config->max_epochs, "Epoch budget")->capture_default_str();
  cmd->add_option("--threshold", config->mse_threshold,
                  "Stop once the epoch cost falls below this (normalized units)")
      ->capture_default_str();
  cmd->add_flag("--shuffle", config->shuffle, "Shuffle sample order each epoch");
  cmd->add_option("--seed", config->rng_seed, "Shuffle seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace flann::cli;

  CLI::App app{"FLANN sensor linearizer with an 18-bit float pipeline emulator"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a compensator by LMS");
  train_cmd->add_option("--dataset", train.dataset, "CSV file or 'lvdt_table1'")->required();
  train_cmd->add_option("--harmonics,-K", train.harmonics, "Harmonics K (P = 2K + 1)")
      ->capture_default_str();
  AddTrainingFlags(train_cmd, &train.training);
  train_cmd->add_option("--out", train.model_out, "Model file to write")->required();
  train_cmd->add_option("--report", train.report_out, "Convergence report (JSON)");
  train_cmd->add_option("--tolerance", train.tolerance_mm, "Linearity tolerance, mm")
      ->capture_default_str();

  EvaluateOptions evaluate;
  bool raw = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Linearity of a model or of the raw sensor");
  eval_cmd->add_option("--dataset", evaluate.dataset, "CSV file or 'lvdt_table1'")->required();
  auto* model_opt = eval_cmd->add_option("--model", evaluate.model, "Model file");
  auto* raw_flag = eval_cmd->add_flag("--raw", raw, "Evaluate the uncompensated sensor");
  model_opt->excludes(raw_flag);
  eval_cmd->add_option("--tolerance", evaluate.tolerance_mm, "Linearity tolerance, mm")
      ->capture_default_str();
  eval_cmd->add_option("--report", evaluate.report_out, "Report file (JSON)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Linearity versus expansion count");
  sweep_cmd->add_option("--dataset", sweep.dataset, "CSV file or 'lvdt_table1'")->required();
  sweep_cmd->add_option("--harmonics,-K", sweep.harmonics, "Comma-separated K values")
      ->delimiter(',')
      ->capture_default_str();
  AddTrainingFlags(sweep_cmd, &sweep.training);
  sweep_cmd->add_option("--tolerance", sweep.tolerance_mm, "Linearity tolerance, mm")
      ->capture_default_str();
  sweep_cmd->add_option("--sensitivity", sweep.sensitivity_tolerances,
                        "Tolerances for the sensitivity table, mm")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--report", sweep.report_out, "Report file (JSON)");

  PipelineOptions pipeline;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run inference through the Q18 pipeline");
  pipe_cmd->add_option("--dataset", pipeline.dataset, "CSV file or 'lvdt_table1'")->required();
  pipe_cmd->add_option("--model", pipeline.model, "Model file (K = 25)")->required();
  pipe_cmd->add_option("--trace", pipeline.trace_out, "Golden trace output")->required();
  pipe_cmd->add_option("--report", pipeline.report_out, "Error-curve report (JSON)");
  pipe_cmd->add_option("--voltage", pipeline.voltages, "Only run these lookup keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (train_cmd->parsed()) return cmd_train(train, std::cout, std::cerr);
  if (eval_cmd->parsed()) {
    if (!raw && !evaluate.model) {
      std::cerr << "evaluate: pass --model or --raw\n";
      return kUsage;
    }
    return cmd_evaluate(evaluate, std::cout, std::cerr);
  }
  if (sweep_cmd->parsed()) return cmd_sweep(sweep, std::cout, std::cerr);
  return cmd_pipeline(pipeline, std::cout, std::cerr);
}
