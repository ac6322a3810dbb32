#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flann/metrics.hpp"
#include "flann/model.hpp"
#include "flann/pipeline.hpp"
#include "flann/training.hpp"

namespace flann::io {

inline constexpr std::string_view kDatasetHeader = "displacement_mm,voltage_v";
inline constexpr std::string_view kBundledFixtureName = "lvdt_table1";
inline constexpr int kModelFormatVersion = 1;

/// The 13 rows of the experimentally measured LVDT sweep.
CalibrationDataset lvdt_table1();

/// Parses "displacement_mm,voltage_v" delimited text. Errors name the line.
CalibrationDataset parse_dataset(std::istream& in, std::string_view source = "<stream>");

/// Reads a dataset file; the bundled fixture name resolves without touching disk.
CalibrationDataset load_dataset(const std::string& path_or_name);

std::string format_dataset(const CalibrationDataset& dataset);

struct TrainingSummary {
  double eta = 0.0;
  int epochs = 0;
  double final_mse = 0.0;
  bool converged = false;
  int max_epochs = 0;
  double mse_threshold = 0.0;
  bool shuffle = false;
  std::uint64_t seed = 0;
};

struct ModelFile {
  FlannModel model;
  std::optional<TrainingSummary> training;
};

nlohmann::json model_to_json(const ModelFile& file);
ModelFile model_from_json(const nlohmann::json& doc);

/// Serializes and re-parses before writing; throws IoError unless the
/// round trip reproduces every float64 bit.
std::string serialize_model(const ModelFile& file);
ModelFile parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

// Report tables: {"columns": [...], "rows": [[...], ...]}.
nlohmann::json table(std::vector<std::string> columns, nlohmann::json rows);
nlohmann::json linearity_to_json(const LinearityReport& report,
                                 std::span<const ResponsePoint> points);
nlohmann::json convergence_to_json(const TrainingTrace& trace);
nlohmann::json error_curve_to_json(const ErrorCurve& curve, std::string_view unit);

void write_text(const std::filesystem::path& path, std::string_view text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// Golden trace text: one block per inference.
std::string format_trace(const PipelineTrace& trace);
std::string format_traces(std::span<const PipelineTrace> traces);
std::vector<PipelineTrace> parse_traces(std::string_view text);

}  // namespace flann::io
