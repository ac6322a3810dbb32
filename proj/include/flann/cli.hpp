#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flann/metrics.hpp"
#include "flann/training.hpp"

namespace flann::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParseFailure = 2,
  kNumericFailure = 3,
  kNotConverged = 4,
  kLookupMiss = 5,
  kIoFailure = 6,
};

struct TrainOptions {
  std::string dataset;
  int harmonics = 25;
  TrainingConfig training;
  std::filesystem::path model_out;
  // Defaults to <model_out>.convergence.json.
  std::optional<std::filesystem::path> report_out;
  double tolerance_mm = kDefaultToleranceMm;
};

struct EvaluateOptions {
  std::string dataset;
  std::optional<std::filesystem::path> model;  // absent: raw sensor on its fitted line
  double tolerance_mm = kDefaultToleranceMm;
  std::optional<std::filesystem::path> report_out;
};

struct SweepOptions {
  std::string dataset;
  std::vector<int> harmonics = {5, 12, 25, 30};
  TrainingConfig training;
  double tolerance_mm = kDefaultToleranceMm;
  std::vector<double> sensitivity_tolerances = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  std::optional<std::filesystem::path> report_out;
  bool parallel = true;
};

struct PipelineOptions {
  std::string dataset;
  std::filesystem::path model;
  std::filesystem::path trace_out;
  std::optional<std::filesystem::path> report_out;
  // Voltages to run; empty runs every dataset voltage.
  std::vector<double> voltages;
};

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_pipeline(const PipelineOptions& options, std::ostream& out, std::ostream& err);

/// Runs `body`, mapping library exceptions to exit codes and printing them to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace flann::cli
