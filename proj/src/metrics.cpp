#include "flann/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flann/error.hpp"

namespace flann {

LinearityReport linearity(std::span<const ResponsePoint> pairs, double tolerance_mm) {
  if (pairs.empty()) throw InvalidInputError("linearity of an empty point list");
  if (!std::isfinite(tolerance_mm) || !(tolerance_mm > 0.0)) {
    throw InvalidInputError("linearity tolerance must be positive and finite");
  }
  LinearityReport report;
  report.total_points = static_cast<int>(pairs.size());
  report.tolerance_mm = tolerance_mm;
  report.per_point_residuals.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double residual = p.output - p.truth;
    report.per_point_residuals.push_back(residual);
    if (std::abs(residual) <= tolerance_mm) ++report.linear_points;
  }
  report.percent_linear = 100.0 * report.linear_points / report.total_points;
  return report;
}

SensorLine fit_sensor_line(std::span<const CalibrationSample> samples) {
  if (samples.empty()) throw InvalidInputError("sensor line of an empty dataset");
  const double n = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_v = 0.0;
  for (const auto& s : samples) {
    mean_x += s.displacement;
    mean_v += s.voltage;
  }
  mean_x /= n;
  mean_v /= n;
  if (samples.size() == 1) {
    // A single reading is on any line through it; pick the one through the origin.
    if (samples[0].displacement == 0.0) return {1.0, samples[0].voltage};
    return {samples[0].voltage / samples[0].displacement, 0.0};
  }
  double sxx = 0.0;
  double sxv = 0.0;
  for (const auto& s : samples) {
    sxx += (s.displacement - mean_x) * (s.displacement - mean_x);
    sxv += (s.displacement - mean_x) * (s.voltage - mean_v);
  }
  if (sxx == 0.0) throw DegenerateDataError("sensor line: displacements do not vary");
  const double slope = sxv / sxx;
  if (slope == 0.0) throw DegenerateDataError("sensor line: voltages do not vary");
  return {slope, mean_v - slope * mean_x};
}

LinearityReport raw_sensor_linearity(std::span<const CalibrationSample> samples,
                                     double tolerance_mm) {
  const SensorLine line = fit_sensor_line(samples);
  std::vector<ResponsePoint> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) {
    pairs.push_back({s.displacement, line.displacement_for(s.voltage)});
  }
  return linearity(pairs, tolerance_mm);
}

ErrorCurve error_curve(std::span<const CurvePoint> reference,
                       std::span<const CurvePoint> candidate) {
  if (reference.size() != candidate.size()) {
    throw AlignmentError("error curve: " + std::to_string(reference.size()) +
                         " reference points vs " + std::to_string(candidate.size()) +
                         " candidate points");
  }
  ErrorCurve curve;
  curve.points.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (reference[i].displacement != candidate[i].displacement) {
      throw AlignmentError("error curve: displacement mismatch at point " + std::to_string(i));
    }
    const double err = candidate[i].value - reference[i].value;
    curve.points.push_back({reference[i].displacement, err});
    curve.max_abs_error = std::max(curve.max_abs_error, std::abs(err));
    if (i > 0 && i + 1 < reference.size()) {
      curve.max_abs_interior_error = std::max(curve.max_abs_interior_error, std::abs(err));
    }
  }
  return curve;
}

}  // namespace flann
