#include "flann/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flann/error.hpp"

namespace flann {

CalibrationDataset::CalibrationDataset(std::vector<CalibrationSample> samples)
    : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw InvalidInputError("calibration dataset needs at least 2 samples, got " +
                            std::to_string(samples_.size()));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.displacement) || !std::isfinite(s.voltage)) {
      throw InvalidInputError("sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(s.displacement > samples_[i - 1].displacement)) {
      throw InvalidInputError("sample " + std::to_string(i) +
                              ": displacements must be strictly increasing");
    }
  }
}

std::vector<double> CalibrationDataset::voltages() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.voltage);
  return out;
}

std::vector<double> CalibrationDataset::displacements() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.displacement);
  return out;
}

ExpansionSpec::ExpansionSpec(int harmonics) : harmonics_(harmonics) {
  if (harmonics < 1) {
    throw InvalidInputError("expansion needs at least one harmonic, got " +
                            std::to_string(harmonics));
  }
}

Normalizer::Normalizer(double scale) : scale_(scale) {
  if (!std::isfinite(scale) || !(scale > 0.0)) {
    throw InvalidInputError("normalizer scale must be positive and finite");
  }
}

Normalizer Normalizer::FitMaxAbs(std::span<const double> values) {
  double peak = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInputError("normalizer fit on non-finite value");
    peak = std::max(peak, std::abs(v));
  }
  if (peak == 0.0) {
    throw DegenerateDataError("cannot normalize: every value is zero");
  }
  return Normalizer(peak);
}

void FlannModel::Validate() const {
  if (weights.size() != spec.width()) {
    throw DimensionError("model has " + std::to_string(weights.size()) +
                         " weights, expansion width is " + std::to_string(spec.width()));
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i])) {
      throw InvalidInputError("weight " + std::to_string(i) + " is not finite");
    }
  }
}

double normalize(double value, const Normalizer& norm) {
  if (!std::isfinite(value)) throw InvalidInputError("normalize: non-finite input");
  return value / norm.scale();
}

FeatureVector expand(double u, const ExpansionSpec& spec) {
  FeatureVector out(spec.width());
  out[0] = u;
  for (int m = 1; m <= spec.harmonics(); ++m) {
    const double arg = m * std::numbers::pi * u;
    out[2 * m - 1] = std::sin(arg);
    out[2 * m] = std::cos(arg);
  }
  return out;
}

double weighted_sum(std::span<const double> feature, std::span<const double> weights) {
  if (feature.size() != weights.size()) {
    throw DimensionError("feature length " + std::to_string(feature.size()) +
                         " != weight length " + std::to_string(weights.size()));
  }
  double acc = 0.0;
  for (std::size_t p = 0; p < feature.size(); ++p) acc += feature[p] * weights[p];
  return acc;
}

double forward(double v_raw, const FlannModel& model) {
  if (!std::isfinite(v_raw)) throw InvalidInputError("forward: non-finite voltage");
  const double u = normalize(v_raw, model.input_norm);
  return model.output_norm.scale() * weighted_sum(expand(u, model.spec), model.weights);
}

double output_in_sensor_volts(double output_mm, const FlannModel& model) {
  return output_mm / model.output_norm.scale() * model.input_norm.scale();
}

std::vector<ResponsePoint> forward_batch(std::span<const CalibrationSample> samples,
                                         const FlannModel& model) {
  model.Validate();
  std::vector<ResponsePoint> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      out.push_back({samples[i].displacement, forward(samples[i].voltage, model)});
    } catch (const InvalidInputError& e) {
      throw InvalidInputError("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace flann
