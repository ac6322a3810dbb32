#include "flann/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "flann/error.hpp"

namespace flann {

namespace {

// Arithmetic back-ends for the shared stage definitions.
struct Q18Arithmetic {
  using Value = Q18;
  Q18Config config;

  Value from_real(double x) const { return q18_from_real(x, config); }
  double to_real(Value v) const { return q18_to_real(v); }
  Value mul(Value a, Value b) const { return q18_mul(a, b, config); }
  Value add(Value a, Value b) const { return q18_add(a, b, config); }
};

struct ExactArithmetic {
  using Value = double;

  Value from_real(double x) const { return x; }
  double to_real(Value v) const { return v; }
  Value mul(Value a, Value b) const { return a * b; }
  Value add(Value a, Value b) const { return a + b; }
};

std::string LaneContext(const char* stage, std::size_t index) {
  return std::string(stage) + " " + std::to_string(index);
}

// Each lane is evaluated in real arithmetic and converted once.
template <typename Arith>
std::array<typename Arith::Value, kPipelineLanes> ExpandLanes(const Arith& arith,
                                                              typename Arith::Value u) {
  const double x = arith.to_real(u);
  std::array<typename Arith::Value, kPipelineLanes> lanes{};
  lanes[0] = u;
  for (int m = 1; m <= kPipelineHarmonics; ++m) {
    const double arg = m * std::numbers::pi * x;
    lanes[2 * m - 1] = arith.from_real(std::sin(arg));
    lanes[2 * m] = arith.from_real(std::cos(arg));
  }
  return lanes;
}

template <typename Arith>
std::array<typename Arith::Value, kPipelineLanes> MultiplyLanes(
    const Arith& arith, const std::array<typename Arith::Value, kPipelineLanes>& lanes,
    std::span<const typename Arith::Value> weights) {
  std::array<typename Arith::Value, kPipelineLanes> products{};
  for (std::size_t j = 0; j < kPipelineLanes; ++j) {
    try {
      products[j] = arith.mul(lanes[j], weights[j]);
    } catch (const RangeError& e) {
      throw RangeError(LaneContext("multiplier lane", j) + ": " + e.what());
    }
  }
  return products;
}

template <typename Arith>
typename Arith::Value ReduceLanes(const Arith& arith,
                                  const std::array<typename Arith::Value, kPipelineLanes>& p,
                                  std::array<typename Arith::Value, kPipelineAdders>* partials) {
  typename Arith::Value acc = p[0];
  for (std::size_t node = 0; node < kPipelineAdders; ++node) {
    try {
      acc = arith.add(acc, p[node + 1]);
    } catch (const RangeError& e) {
      throw RangeError(LaneContext("adder node", node) + ": " + e.what());
    }
    if (partials != nullptr) (*partials)[node] = acc;
  }
  return acc;
}

}  // namespace

void LookupTable::insert(double key, Q18 value) {
  if (!entries_.emplace(key, value).second) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "duplicate lookup key " << key << " V";
    throw DuplicateKeyError(msg.str());
  }
}

Q18 LookupTable::fetch(double key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "voltage " << key << " V is not in the lookup table";
    throw LookupMissError(msg.str());
  }
  return it->second;
}

void PipelineConfig::Validate() const {
  if (spec.harmonics() != kPipelineHarmonics) {
    throw DimensionError("pipeline is built for 25 harmonics, got " +
                         std::to_string(spec.harmonics()));
  }
  if (std::accumulate(sub_block_partition.begin(), sub_block_partition.end(), std::size_t{0}) !=
      kPipelineLanes) {
    throw DimensionError("sub-block partition must cover 51 lanes");
  }
  for (std::size_t j = 0; j < kPipelineLanes; ++j) {
    if (!weights_q18[j].is_finite()) {
      throw InvalidInputError("quantized weight " + std::to_string(j) + " is not finite");
    }
  }
}

LookupTable build_lookup(const CalibrationDataset& dataset) {
  LookupTable lut;
  for (const auto& s : dataset.samples()) lut.insert(s.voltage, q18_from_real(s.voltage));
  return lut;
}

PipelineConfig quantize_model(const FlannModel& model, const Q18Config& q) {
  model.Validate();
  if (model.spec.harmonics() != kPipelineHarmonics) {
    throw DimensionError("pipeline needs a model with 25 harmonics (51 expansions), got " +
                         std::to_string(model.spec.harmonics()));
  }
  PipelineConfig config;
  config.input_norm = model.input_norm;
  config.output_norm = model.output_norm;
  for (std::size_t j = 0; j < kPipelineLanes; ++j) {
    try {
      config.weights_q18[j] = q18_from_real(model.weights[j], q);
    } catch (const RangeError& e) {
      throw RangeError("weight " + std::to_string(j) + ": " + e.what());
    }
  }
  config.input_reciprocal = q18_from_real(1.0 / model.input_norm.scale(), q);
  config.output_scale = q18_from_real(model.output_norm.scale(), q);
  return config;
}

std::pair<std::size_t, std::size_t> sub_block_lanes(std::size_t block) {
  if (block >= kSubBlockPartition.size()) {
    throw InvalidInputError("sub-block index " + std::to_string(block) + " out of range");
  }
  std::size_t first = 0;
  for (std::size_t b = 0; b < block; ++b) first += kSubBlockPartition[b];
  return {first, first + kSubBlockPartition[block]};
}

LaneArray stage_expand(Q18 u, const PipelineConfig& config) {
  config.Validate();
  return ExpandLanes(Q18Arithmetic{}, u);
}

LaneArray stage_multiply(const LaneArray& lanes, const PipelineConfig& config) {
  return MultiplyLanes<Q18Arithmetic>(Q18Arithmetic{}, lanes, config.weights_q18);
}

ReduceResult stage_reduce(const LaneArray& products) {
  ReduceResult out;
  out.output = ReduceLanes(Q18Arithmetic{}, products, &out.partials);
  return out;
}

PipelineResult pipeline_infer(double v_raw, const PipelineConfig& config,
                              const LookupTable& lut) {
  config.Validate();
  const Q18Arithmetic arith;
  PipelineResult result;
  PipelineTrace& trace = result.trace;
  trace.key = v_raw;
  trace.input = lut.fetch(v_raw);
  trace.normalized = arith.mul(trace.input, config.input_reciprocal);
  trace.expanded = stage_expand(trace.normalized, config);
  trace.products = stage_multiply(trace.expanded, config);
  const ReduceResult reduced = stage_reduce(trace.products);
  trace.partial_sums = reduced.partials;
  trace.output = reduced.output;
  trace.output_mm = arith.mul(trace.output, config.output_scale);
  result.output_mm = q18_to_real(trace.output_mm);
  return result;
}

double pipeline_infer_exact(double v_raw, const FlannModel& model) {
  model.Validate();
  if (model.spec.harmonics() != kPipelineHarmonics) {
    throw DimensionError("pipeline needs a model with 25 harmonics");
  }
  if (!std::isfinite(v_raw)) throw InvalidInputError("pipeline input is not finite");
  const ExactArithmetic arith;
  const double u = arith.mul(v_raw, 1.0 / model.input_norm.scale());
  const auto lanes = ExpandLanes(arith, u);
  const auto products = MultiplyLanes<ExactArithmetic>(arith, lanes, model.weights);
  const double sum = ReduceLanes<ExactArithmetic>(arith, products, nullptr);
  return arith.mul(sum, model.output_norm.scale());
}

}  // namespace flann
