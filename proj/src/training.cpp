#include "flann/training.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "flann/error.hpp"

namespace flann {

namespace {

struct NormalizedData {
  Normalizer input_norm;
  Normalizer output_norm;
  std::vector<FeatureVector> features;
  std::vector<double> targets;
};

NormalizedData Prepare(const CalibrationDataset& dataset, const ExpansionSpec& spec) {
  const auto volts = dataset.voltages();
  const auto mm = dataset.displacements();
  NormalizedData data{Normalizer::FitMaxAbs(volts), Normalizer::FitMaxAbs(mm), {}, {}};
  data.features.reserve(dataset.size());
  data.targets.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    data.features.push_back(expand(normalize(volts[i], data.input_norm), spec));
    data.targets.push_back(normalize(mm[i], data.output_norm));
  }
  return data;
}

double Sse(const NormalizedData& data, std::span<const double> weights) {
  double sse = 0.0;
  for (std::size_t j = 0; j < data.features.size(); ++j) {
    const double err = data.targets[j] - weighted_sum(data.features[j], weights);
    sse += err * err;
  }
  return sse;
}

}  // namespace

void TrainingConfig::Validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw InvalidInputError("learning rate must lie in (0, 1]");
  }
  if (max_epochs < 1) throw InvalidInputError("max_epochs must be at least 1");
  if (!(mse_threshold >= 0.0) || !std::isfinite(mse_threshold)) {
    throw InvalidInputError("mse_threshold must be a finite non-negative number");
  }
}

std::vector<double> init_weights(const ExpansionSpec& spec) {
  return std::vector<double>(spec.width(), 1.0);
}

LmsUpdate lms_step(std::span<const double> weights, std::span<const double> feature,
                   double desired, double eta) {
  LmsUpdate out;
  out.error = desired - weighted_sum(feature, weights);
  out.weights.assign(weights.begin(), weights.end());
  const double gain = eta * out.error;
  for (std::size_t p = 0; p < feature.size(); ++p) out.weights[p] += gain * feature[p];
  return out;
}

TrainingResult train_lms(const CalibrationDataset& dataset, const ExpansionSpec& spec,
                         const TrainingConfig& config) {
  config.Validate();
  const NormalizedData data = Prepare(dataset, spec);

  std::vector<double> weights = init_weights(spec);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.rng_seed);

  TrainingTrace trace;
  trace.mse_per_epoch.reserve(static_cast<std::size_t>(config.max_epochs));
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j : order) {
      weights = lms_step(weights, data.features[j], data.targets[j], config.eta).weights;
    }
    const double sse = Sse(data, weights);
    if (!std::isfinite(sse)) {
      throw DivergenceError("LMS diverged at epoch " + std::to_string(epoch) +
                            " (eta too large for width " + std::to_string(spec.width()) + ")");
    }
    trace.mse_per_epoch.push_back(sse);
    trace.epochs_run = epoch;
    if (sse < config.mse_threshold) {
      trace.converged = true;
      break;
    }
  }
  trace.final_weights = weights;

  FlannModel model{spec, std::move(weights), data.input_norm, data.output_norm};
  model.Validate();
  return {std::move(model), std::move(trace)};
}

FlannModel solve_least_squares(const CalibrationDataset& dataset, const ExpansionSpec& spec) {
  const NormalizedData data = Prepare(dataset, spec);
  const auto rows = static_cast<Eigen::Index>(data.features.size());
  const auto cols = static_cast<Eigen::Index>(spec.width());
  Eigen::MatrixXd s(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index p = 0; p < cols; ++p) s(i, p) = data.features[i][p];
    y(i) = data.targets[i];
  }
  const Eigen::VectorXd w = s.completeOrthogonalDecomposition().solve(y);

  FlannModel model{spec, std::vector<double>(w.data(), w.data() + w.size()), data.input_norm,
                   data.output_norm};
  model.Validate();
  return model;
}

double normalized_sse(const CalibrationDataset& dataset, const FlannModel& model) {
  model.Validate();
  double sse = 0.0;
  for (const auto& s : dataset.samples()) {
    const double u = normalize(s.voltage, model.input_norm);
    const double err = normalize(s.displacement, model.output_norm) -
                       weighted_sum(expand(u, model.spec), model.weights);
    sse += err * err;
  }
  return sse;
}

}  // namespace flann
