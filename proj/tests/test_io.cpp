#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "flann/error.hpp"
#include "flann/io.hpp"

using namespace flann;

namespace {

CalibrationDataset Parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_dataset(in, "test.csv");
}

std::string ParseErrorOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("bundled fixture matches the shipped csv") {
  const auto from_file = io::load_dataset(FLANN_DATA_DIR "/lvdt_table1.csv");
  const auto bundled = io::load_dataset("lvdt_table1");
  REQUIRE(from_file.size() == 13);
  for (std::size_t i = 0; i < 13; ++i) CHECK(from_file[i] == bundled[i]);
  CHECK(bundled[6] == CalibrationSample{0.0, 0.001});
  CHECK(bundled[0] == CalibrationSample{-30.0, -5.185});
  CHECK(bundled[12] == CalibrationSample{30.0, 5.276});
}

TEST_CASE("dataset parsing") {
  const auto ds = Parse("displacement_mm,voltage_v\r\n-1,-0.5\r\n1,0.5\r\n\r\n");
  CHECK(ds.size() == 2);
  CHECK(io::format_dataset(ds) == "displacement_mm,voltage_v\n-1,-0.5\n1,0.5\n");

  CHECK(ParseErrorOf("displacement_mm,voltage_v\n0,1\nabc,1.0\n").find("test.csv:3") !=
        std::string::npos);
  CHECK(ParseErrorOf("displacement_mm,voltage_v\n0,1\nabc,1.0\n").find("abc,1.0") !=
        std::string::npos);
  CHECK(ParseErrorOf("x,v\n0,1\n1,2\n").find("header") != std::string::npos);
  CHECK(ParseErrorOf("displacement_mm,voltage_v\n0,1\n1,2,3\n").find(":3") != std::string::npos);
  CHECK(ParseErrorOf("displacement_mm,voltage_v\n0,1\n0,2\n").find(":3") != std::string::npos);
  CHECK(ParseErrorOf("displacement_mm,voltage_v\n0,1\n1,nan\n").find(":3") != std::string::npos);
  CHECK_FALSE(ParseErrorOf("displacement_mm,voltage_v\n0,1\n").empty());
  CHECK_FALSE(ParseErrorOf("").empty());
  CHECK_THROWS_AS(io::load_dataset("/nonexistent/file.csv"), IoError);
}

TEST_CASE("model files round-trip every float64 bit") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int trial = 0; trial < 200; ++trial) {
    const ExpansionSpec spec(1 + trial % 30);
    std::vector<double> w(spec.width());
    for (double& x : w) {
      do {
        const std::uint64_t b = bits(rng);
        std::memcpy(&x, &b, sizeof x);
      } while (!std::isfinite(x));
    }
    io::ModelFile file{{spec, w, Normalizer(5.276), Normalizer(30.0)}, std::nullopt};
    if (trial % 2 == 0) file.training = io::TrainingSummary{0.06, 65, 9.1e-7, true, 100, 1e-6, false, 7};
    const io::ModelFile back = io::parse_model(io::serialize_model(file));
    REQUIRE(std::memcmp(back.model.weights.data(), w.data(), w.size() * sizeof(double)) == 0);
    CHECK(back.model.spec == spec);
    CHECK(back.training.has_value() == file.training.has_value());
  }
}

TEST_CASE("model file validation") {
  const io::ModelFile file{{ExpansionSpec(1), {1, 2, 3}, Normalizer(2), Normalizer(3)}, std::nullopt};
  auto doc = io::model_to_json(file);
  CHECK(doc["expansion"]["width"] == 3);

  auto wrong_width = doc;
  wrong_width["weights"] = {1, 2};
  CHECK_THROWS_AS(io::model_from_json(wrong_width), ParseError);
  auto wrong_version = doc;
  wrong_version["version"] = 99;
  CHECK_THROWS_AS(io::model_from_json(wrong_version), ParseError);
  auto zero_scale = doc;
  zero_scale["input_scale"] = 0.0;
  CHECK_THROWS_AS(io::model_from_json(zero_scale), ParseError);
  CHECK_THROWS_AS(io::parse_model("{not json"), ParseError);
  CHECK_THROWS_AS(io::parse_model("{}"), ParseError);
}

TEST_CASE("trace parsing rejects malformed blocks") {
  CHECK_THROWS_AS(io::parse_traces("input 0_000000_00000000000\n"), ParseError);
  CHECK_THROWS_AS(io::parse_traces("trace key=1\ninput 0_000000_00000000000\n"), ParseError);
  CHECK_THROWS_AS(io::parse_traces("trace key=1\nexpanded 0_000000_00000000000\nend\n"), ParseError);
  CHECK_THROWS_AS(io::parse_traces("trace key=abc\nend\n"), ParseError);
  CHECK(io::parse_traces("# only a comment\n").empty());
}

TEST_CASE("report tables are self-describing") {
  const auto t = io::table({"a", "b"}, nlohmann::json::array({{1, 2}}));
  CHECK(t["columns"][0] == "a");
  CHECK(t["rows"][0][1] == 2);
  TrainingTrace trace;
  trace.mse_per_epoch = {0.5, 0.25};
  trace.epochs_run = 2;
  const auto conv = io::convergence_to_json(trace);
  CHECK(conv["mse"]["columns"][1] == "mse");
  CHECK(conv["mse"]["rows"][1][0] == 2);
}
