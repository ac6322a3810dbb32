#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "flann/model.hpp"
#include "flann/q18.hpp"

namespace flann {

// Fixed geometry of the emulated three-stage inference: 25 harmonics,
// 51 lanes in five expansion/multiplier sub-blocks, 50 two-input adders.
inline constexpr int kPipelineHarmonics = 25;
inline constexpr std::size_t kPipelineLanes = 2 * kPipelineHarmonics + 1;
inline constexpr std::size_t kPipelineAdders = kPipelineLanes - 1;
inline constexpr std::array<std::size_t, 5> kSubBlockPartition = {10, 10, 10, 10, 11};

using LaneArray = std::array<Q18, kPipelineLanes>;
using PartialSums = std::array<Q18, kPipelineAdders>;

/// Input stage: exact voltage key -> Q18 pattern.
class LookupTable {
 public:
  /// Throws DuplicateKeyError on a repeated key.
  void insert(double key, Q18 value);
  /// Throws LookupMissError when the key is absent.
  Q18 fetch(double key) const;
  bool contains(double key) const { return entries_.count(key) != 0; }
  std::size_t size() const { return entries_.size(); }
  const std::map<double, Q18>& entries() const { return entries_; }

 private:
  std::map<double, Q18> entries_;
};

struct PipelineConfig {
  ExpansionSpec spec{kPipelineHarmonics};
  std::array<Q18, kPipelineLanes> weights_q18{};
  std::array<std::size_t, 5> sub_block_partition = kSubBlockPartition;
  Normalizer input_norm{1.0};
  Normalizer output_norm{1.0};
  // Quantized 1 / input scale and output scale used inside the pipeline.
  Q18 input_reciprocal{};
  Q18 output_scale{};

  void Validate() const;
};

struct PipelineTrace {
  double key = 0.0;
  Q18 input{};
  Q18 normalized{};
  LaneArray expanded{};
  LaneArray products{};
  PartialSums partial_sums{};
  Q18 output{};  // normalized sum, equals partial_sums.back()
  Q18 output_mm{};
};

struct PipelineResult {
  double output_mm = 0.0;
  PipelineTrace trace;
};

LookupTable build_lookup(const CalibrationDataset& dataset);

/// Quantizes a trained K=25 model (one nearest-even rounding per value).
PipelineConfig quantize_model(const FlannModel& model, const Q18Config& q = {});

/// Lane range [first, last) of expansion/multiplier sub-block `block` (0..4).
std::pair<std::size_t, std::size_t> sub_block_lanes(std::size_t block);

LaneArray stage_expand(Q18 u, const PipelineConfig& config);
LaneArray stage_multiply(const LaneArray& lanes, const PipelineConfig& config);

struct ReduceResult {
  Q18 output{};
  PartialSums partials{};
};

/// Sequential left fold: ((p0 + p1) + p2) + ... + p50.
ReduceResult stage_reduce(const LaneArray& products);

PipelineResult pipeline_infer(double v_raw, const PipelineConfig& config,
                              const LookupTable& lut);

/// Same stage structure with float64 in place of Q18 and unquantized weights.
double pipeline_infer_exact(double v_raw, const FlannModel& model);

}  // namespace flann
