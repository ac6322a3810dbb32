#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flann/model.hpp"

namespace flann {

struct TrainingConfig {
  double eta = 0.06;
  int max_epochs = 100;
  // Training stops once the epoch cost drops below this (normalized units).
  double mse_threshold = 1e-6;
  bool shuffle = false;
  std::uint64_t rng_seed = 0;

  void Validate() const;
};

struct TrainingTrace {
  // Sum of squared normalized errors over the dataset after each epoch.
  std::vector<double> mse_per_epoch;
  int epochs_run = 0;
  bool converged = false;
  std::vector<double> final_weights;
};

struct TrainingResult {
  FlannModel model;
  TrainingTrace trace;
};

std::vector<double> init_weights(const ExpansionSpec& spec);

struct LmsUpdate {
  std::vector<double> weights;
  double error = 0.0;
};

/// One LMS update: error = desired - <feature, weights>, w += eta * error * feature.
LmsUpdate lms_step(std::span<const double> weights, std::span<const double> feature,
                   double desired, double eta);

TrainingResult train_lms(const CalibrationDataset& dataset, const ExpansionSpec& spec,
                         const TrainingConfig& config = {});

/// Minimum-norm least-squares weights over the normalized data.
FlannModel solve_least_squares(const CalibrationDataset& dataset, const ExpansionSpec& spec);

/// Sum of squared errors of the model over the dataset, in normalized units.
double normalized_sse(const CalibrationDataset& dataset, const FlannModel& model);

}  // namespace flann
