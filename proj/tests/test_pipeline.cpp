#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "flann/error.hpp"
#include "flann/io.hpp"
#include "flann/pipeline.hpp"
#include "flann/training.hpp"

using namespace flann;

namespace {

Q18 Enc(double x) { return q18_from_real(x); }

// Weights used by tests/golden/make_synthetic_trace.py.
FlannModel SyntheticModel() {
  std::vector<double> w(kPipelineLanes);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = (j % 2 ? -1.0 : 1.0) * (j + 1) / 37.0;
  return {ExpansionSpec(25), w, Normalizer(5.276), Normalizer(30.0)};
}

PipelineConfig UnitConfig(double weight) {
  FlannModel m{ExpansionSpec(25), std::vector<double>(51, weight), Normalizer(1.0), Normalizer(1.0)};
  return quantize_model(m);
}

const FlannModel& TrainedModel() {
  static const FlannModel model = train_lms(io::lvdt_table1(), ExpansionSpec(25)).model;
  return model;
}

}  // namespace

TEST_CASE("lookup table") {
  const LookupTable lut = build_lookup(io::lvdt_table1());
  CHECK(lut.size() == 13);
  CHECK(std::abs(q18_to_real(lut.fetch(0.001)) - 0.001) <= std::ldexp(0.001, -12));
  for (const auto& [key, q] : lut.entries()) CHECK(q == Enc(key));
  CHECK_THROWS_AS(lut.fetch(0.5), LookupMissError);

  LookupTable dup;
  dup.insert(1.0, Enc(1.0));
  CHECK_THROWS_AS(dup.insert(1.0, Enc(1.0)), DuplicateKeyError);
  CHECK_THROWS_AS(build_lookup(CalibrationDataset({{0, 1.0}, {1, 1.0}})), DuplicateKeyError);
}

TEST_CASE("sub-block partition") {
  std::size_t total = 0;
  for (std::size_t b = 0; b < 5; ++b) {
    const auto [first, last] = sub_block_lanes(b);
    CHECK(first == total);
    CHECK(last - first == (b < 4 ? 10u : 11u));
    total = last;
  }
  CHECK(total == kPipelineLanes);
  CHECK_THROWS_AS(sub_block_lanes(5), InvalidInputError);
}

TEST_CASE("stage_expand") {
  const PipelineConfig config = UnitConfig(1.0);
  const LaneArray zero = stage_expand(Enc(0.0), config);
  CHECK(zero[0].bits() == 0u);
  for (int m = 1; m <= 25; ++m) {
    CHECK(zero[2 * m - 1].bits() == 0u);
    CHECK(zero[2 * m] == Enc(1.0));
  }

  const double u = q18_to_real(Enc(0.3));
  const LaneArray lanes = stage_expand(Enc(0.3), config);
  // E1 carries u, sin(pi u), cos(pi u), ..., cos(4 pi u), sin(5 pi u).
  CHECK(lanes[0] == Enc(0.3));
  CHECK(lanes[1] == Enc(std::sin(M_PI * u)));
  CHECK(lanes[2] == Enc(std::cos(M_PI * u)));
  CHECK(lanes[9] == Enc(std::sin(5 * M_PI * u)));
  // E2 opens with cos(5 pi u); E5 closes with cos(25 pi u).
  CHECK(lanes[sub_block_lanes(1).first] == Enc(std::cos(5 * M_PI * u)));
  CHECK(lanes[50] == Enc(std::cos(25 * M_PI * u)));
}

TEST_CASE("stage_multiply") {
  LaneArray lanes{};
  for (std::size_t j = 0; j < lanes.size(); ++j) lanes[j] = Enc(std::sin(0.37 * j) * 1.7);
  CHECK(stage_multiply(lanes, UnitConfig(1.0)) == lanes);
  for (Q18 p : stage_multiply(lanes, UnitConfig(0.0))) CHECK(p.bits() == 0u);

  PipelineConfig half = UnitConfig(0.0);
  half.weights_q18[7] = Enc(0.5);
  LaneArray quarter{};
  quarter[7] = Enc(0.25);
  CHECK(stage_multiply(quarter, half)[7] == Enc(0.125));

  PipelineConfig huge = UnitConfig(0.0);
  huge.weights_q18[3] = Enc(1e9);
  LaneArray big{};
  big[3] = Enc(1e9);
  try {
    stage_multiply(big, huge);
    FAIL("expected overflow");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("lane 3") != std::string::npos);
  }
}

TEST_CASE("stage_reduce") {
  LaneArray zeros{};
  const auto z = stage_reduce(zeros);
  CHECK(z.output.bits() == 0u);
  for (Q18 p : z.partials) CHECK(p.bits() == 0u);

  LaneArray cancel{};
  cancel[0] = Enc(1.0);
  cancel[1] = Enc(-1.0);
  const auto c = stage_reduce(cancel);
  for (Q18 p : c.partials) CHECK(p.bits() == 0u);

  LaneArray ones;
  ones.fill(Enc(1.0));
  const auto r = stage_reduce(ones);
  CHECK(r.output == Enc(51.0));
  CHECK(q18_to_real(r.output) == 51.0);
  CHECK(r.partials.back() == r.output);
  for (std::size_t node = 0; node < r.partials.size(); ++node) {
    CHECK(q18_to_real(r.partials[node]) == static_cast<double>(node + 2));
  }
}

TEST_CASE("fold order is part of the contract") {
  // Reordering the same multiset of products changes the rounded sum.
  LaneArray forward{};
  forward[0] = Enc(2048.0);
  for (std::size_t j = 1; j < forward.size(); ++j) forward[j] = Enc(0.5);
  LaneArray reversed{};
  for (std::size_t j = 0; j + 1 < forward.size(); ++j) reversed[j] = Enc(0.5);
  reversed[50] = Enc(2048.0);
  CHECK(q18_to_real(stage_reduce(forward).output) == 2048.0);
  CHECK(q18_to_real(stage_reduce(reversed).output) == 2073.0);
}

TEST_CASE("pipeline_infer on the trained model") {
  const auto table = io::lvdt_table1();
  const PipelineConfig config = quantize_model(TrainedModel());
  const LookupTable lut = build_lookup(table);

  const auto null_result = pipeline_infer(0.001, config, lut);
  CHECK(std::abs(null_result.output_mm) <= 0.75);
  CHECK(null_result.trace.partial_sums.back() == null_result.trace.output);

  CHECK_THROWS_AS(pipeline_infer(0.002, config, lut), LookupMissError);

  for (const auto& s : table.samples()) {
    const auto a = pipeline_infer(s.voltage, config, lut);
    const auto b = pipeline_infer(s.voltage, config, lut);
    CHECK(io::format_trace(a.trace) == io::format_trace(b.trace));
    CHECK(std::abs(pipeline_infer_exact(s.voltage, TrainedModel()) -
                   forward(s.voltage, TrainedModel())) <= 1e-9);
  }
}

TEST_CASE("quantize_model") {
  const PipelineConfig config = quantize_model(TrainedModel());
  for (std::size_t j = 0; j < kPipelineLanes; ++j) {
    CHECK(config.weights_q18[j] == Enc(TrainedModel().weights[j]));
  }
  CHECK(config.input_reciprocal == Enc(1.0 / 5.276));
  CHECK(config.output_scale == Enc(30.0));
  FlannModel small{ExpansionSpec(5), std::vector<double>(11, 1.0), Normalizer(1), Normalizer(1)};
  CHECK_THROWS_AS(quantize_model(small), DimensionError);
}

TEST_CASE("golden trace from the independent rational-arithmetic reference") {
  std::ifstream in(FLANN_GOLDEN_DIR "/synthetic.trace");
  REQUIRE(in);
  std::stringstream golden;
  golden << in.rdbuf();

  const FlannModel model = SyntheticModel();
  const PipelineConfig config = quantize_model(model);
  LookupTable lut;
  const std::vector<double> keys = {-5.185, -1.494, 0.001, 1.462, 5.276};
  for (double v : keys) lut.insert(v, Enc(v));
  std::vector<PipelineTrace> traces;
  for (double v : keys) traces.push_back(pipeline_infer(v, config, lut).trace);
  CHECK(io::format_traces(traces) == golden.str());

  const auto parsed = io::parse_traces(golden.str());
  REQUIRE(parsed.size() == keys.size());
  CHECK(io::format_traces(parsed) == golden.str());
}
