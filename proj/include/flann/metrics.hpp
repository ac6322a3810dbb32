#pragma once

#include <span>
#include <vector>

#include "flann/model.hpp"

namespace flann {

// Linearity tolerance in millimetres. Calibrated on the bundled lvdt_table1
// fixture: the raw sensor's sorted residuals against its least-squares line
// are 0.307, 0.538, 0.956, ... mm, and this value sits strictly between the
// second and third so that exactly two raw points count as linear.
inline constexpr double kDefaultToleranceMm = 0.75;

struct LinearityReport {
  int total_points = 0;
  int linear_points = 0;
  double percent_linear = 0.0;
  double tolerance_mm = 0.0;
  std::vector<double> per_point_residuals;  // output - truth, mm
};

struct CurvePoint {
  double displacement = 0.0;
  double value = 0.0;
};

struct ErrorCurve {
  std::vector<CurvePoint> points;  // candidate - reference
  double max_abs_error = 0.0;
  // First and last points excluded.
  double max_abs_interior_error = 0.0;
};

/// A point is linear iff |output - truth| <= tolerance_mm.
LinearityReport linearity(std::span<const ResponsePoint> pairs, double tolerance_mm);

/// Straight line v = slope * x + offset fitted by least squares to the sensor data.
struct SensorLine {
  double slope = 0.0;
  double offset = 0.0;

  double displacement_for(double voltage) const { return (voltage - offset) / slope; }
};

SensorLine fit_sensor_line(std::span<const CalibrationSample> samples);

/// Linearity of the uncompensated sensor: every voltage is mapped back to a
/// displacement through the fitted line and compared with the truth.
LinearityReport raw_sensor_linearity(std::span<const CalibrationSample> samples,
                                     double tolerance_mm = kDefaultToleranceMm);

ErrorCurve error_curve(std::span<const CurvePoint> reference,
                       std::span<const CurvePoint> candidate);

}  // namespace flann
