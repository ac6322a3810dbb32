#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flann {

/// One calibration reading: actuator displacement (mm) and sensor voltage (V).
struct CalibrationSample {
  double displacement = 0.0;
  double voltage = 0.0;

  friend bool operator==(const CalibrationSample&, const CalibrationSample&) = default;
};

/// Ordered calibration sweep. At least two samples, finite values, strictly
/// increasing displacement.
class CalibrationDataset {
 public:
  explicit CalibrationDataset(std::vector<CalibrationSample> samples);

  std::span<const CalibrationSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const CalibrationSample& operator[](std::size_t i) const { return samples_[i]; }

  std::vector<double> voltages() const;
  std::vector<double> displacements() const;

 private:
  std::vector<CalibrationSample> samples_;
};

/// Trigonometric basis with K harmonics: width P = 2K + 1.
class ExpansionSpec {
 public:
  explicit ExpansionSpec(int harmonics);

  int harmonics() const { return harmonics_; }
  std::size_t width() const { return 2 * static_cast<std::size_t>(harmonics_) + 1; }

  friend bool operator==(const ExpansionSpec&, const ExpansionSpec&) = default;

 private:
  int harmonics_;
};

/// One expanded row: [u, sin(pi u), cos(pi u), ..., sin(K pi u), cos(K pi u)].
using FeatureVector = std::vector<double>;

/// Maps a raw value w to u = w / scale.
class Normalizer {
 public:
  explicit Normalizer(double scale);

  /// Scale = max |w| over the values. Throws DegenerateDataError when that is zero.
  static Normalizer FitMaxAbs(std::span<const double> values);

  double scale() const { return scale_; }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  double scale_;
};

struct FlannModel {
  ExpansionSpec spec{1};
  std::vector<double> weights;
  Normalizer input_norm{1.0};
  Normalizer output_norm{1.0};

  // Throws DimensionError / InvalidInputError when the invariants fail.
  void Validate() const;
};

/// Forward output paired with its ground-truth displacement.
struct ResponsePoint {
  double truth = 0.0;
  double output = 0.0;
};

double normalize(double value, const Normalizer& norm);

FeatureVector expand(double u, const ExpansionSpec& spec);

/// Sum of feature * weight. Lengths must match.
double weighted_sum(std::span<const double> feature, std::span<const double> weights);

/// Compensated displacement (mm) for a raw sensor voltage.
double forward(double v_raw, const FlannModel& model);

// Compensated output expressed on the sensor's voltage full scale: the
// normalized output multiplied by the input normalizer's scale.
double output_in_sensor_volts(double output_mm, const FlannModel& model);

std::vector<ResponsePoint> forward_batch(std::span<const CalibrationSample> samples,
                                         const FlannModel& model);

}  // namespace flann
