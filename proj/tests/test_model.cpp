#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "flann/error.hpp"
#include "flann/io.hpp"
#include "flann/model.hpp"

using namespace flann;
using doctest::Approx;

TEST_CASE("normalize") {
  const Normalizer norm(5.276);
  CHECK(normalize(5.276, norm) == 1.0);
  CHECK(normalize(0.001, norm) == Approx(1.8954e-4).epsilon(1e-4));
  CHECK(normalize(-5.185, norm) == -5.185 / 5.276);
  CHECK(normalize(-5.185, norm) == Approx(-0.98275).epsilon(1e-5));
  CHECK_THROWS_AS(normalize(NAN, norm), InvalidInputError);
  CHECK_THROWS_AS(normalize(INFINITY, norm), InvalidInputError);
}

TEST_CASE("normalizer construction") {
  CHECK_THROWS_AS(Normalizer(0.0), InvalidInputError);
  CHECK_THROWS_AS(Normalizer(-1.0), InvalidInputError);
  const std::vector<double> volts = {-5.185, 0.001, 5.276};
  CHECK(Normalizer::FitMaxAbs(volts).scale() == 5.276);
  const std::vector<double> zeros = {0.0, 0.0};
  CHECK_THROWS_AS(Normalizer::FitMaxAbs(zeros), DegenerateDataError);
}

TEST_CASE("expansion spec") {
  CHECK(ExpansionSpec(1).width() == 3);
  CHECK(ExpansionSpec(25).width() == 51);
  CHECK_THROWS_AS(ExpansionSpec(0), InvalidInputError);
}

TEST_CASE("expand examples") {
  CHECK(expand(0.0, ExpansionSpec(2)) == FeatureVector{0, 0, 1, 0, 1});

  const auto at_one = expand(1.0, ExpansionSpec(1));
  CHECK(at_one[0] == 1.0);
  CHECK(std::abs(at_one[1]) < 1e-15);
  CHECK(at_one[2] == -1.0);

  const auto half = expand(0.5, ExpansionSpec(2));
  const FeatureVector expected = {0.5, 1, 0, 0, -1};
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(half[i] == Approx(expected[i]).epsilon(1e-15));
  CHECK(std::abs(half[2]) < 1e-15);
  CHECK(std::abs(half[3]) < 1e-15);
}

TEST_CASE("expand properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  std::uniform_int_distribution<int> harmonics(1, 30);
  for (int trial = 0; trial < 500; ++trial) {
    const double u = dist(rng);
    const ExpansionSpec spec(harmonics(rng));
    const auto s = expand(u, spec);
    REQUIRE(s.size() == spec.width());
    CHECK(s == expand(u, spec));
    CHECK(s[0] == u);
    const auto shifted = expand(u + 2.0, spec);
    for (int m = 1; m <= spec.harmonics(); ++m) {
      const double sn = s[2 * m - 1], cs = s[2 * m];
      CHECK(std::abs(sn) <= 1.0);
      CHECK(std::abs(cs) <= 1.0);
      CHECK(std::abs(sn * sn + cs * cs - 1.0) <= 1e-12);
      CHECK(std::abs(shifted[2 * m - 1] - sn) <= 1e-12);
      CHECK(std::abs(shifted[2 * m] - cs) <= 1e-12);
    }
  }
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(CalibrationDataset({{0, 0}}), InvalidInputError);
  CHECK_THROWS_AS(CalibrationDataset({{1, 0}, {0, 1}}), InvalidInputError);
  CHECK_THROWS_AS(CalibrationDataset({{0, 0}, {0, 1}}), InvalidInputError);
  CHECK_THROWS_AS(CalibrationDataset({{0, NAN}, {1, 1}}), InvalidInputError);
  CHECK(io::lvdt_table1().size() == 13);
}

TEST_CASE("forward examples") {
  FlannModel zero{ExpansionSpec(3), std::vector<double>(7, 0.0), Normalizer(5.276), Normalizer(30)};
  CHECK(forward(2.896, zero) == 0.0);
  CHECK(forward(-5.185, zero) == 0.0);

  const double c = 0.37;
  FlannModel cosines{ExpansionSpec(3), {0, 0, c, 0, c, 0, c}, Normalizer(5.276), Normalizer(30)};
  CHECK(forward(0.0, cosines) == Approx(30 * 3 * c).epsilon(1e-15));

  CHECK_THROWS_AS(forward(NAN, zero), InvalidInputError);
}

TEST_CASE("forward is linear in the weights") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  const ExpansionSpec spec(25);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w1(spec.width()), w2(spec.width()), mix(spec.width());
    const double a = gauss(rng), b = gauss(rng);
    for (std::size_t p = 0; p < spec.width(); ++p) {
      w1[p] = gauss(rng);
      w2[p] = gauss(rng);
      mix[p] = a * w1[p] + b * w2[p];
    }
    const Normalizer in(5.276), out(30);
    for (const auto& s : io::lvdt_table1().samples()) {
      const double lhs = forward(s.voltage, {spec, mix, in, out});
      const double rhs = a * forward(s.voltage, {spec, w1, in, out}) +
                         b * forward(s.voltage, {spec, w2, in, out});
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
      CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("forward_batch") {
  const auto table = io::lvdt_table1();
  FlannModel zero{ExpansionSpec(25), std::vector<double>(51, 0.0), Normalizer(5.276), Normalizer(30)};
  const auto pairs = forward_batch(table.samples(), zero);
  REQUIRE(pairs.size() == 13);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].truth == table[i].displacement);
    CHECK(pairs[i].output == 0.0);
  }
  const CalibrationSample one{5.0, 1.462};
  CHECK(forward_batch(std::span(&one, 1), zero).size() == 1);

  const std::vector<CalibrationSample> bad = {{0, 1}, {1, NAN}};
  try {
    forward_batch(bad, zero);
    FAIL("expected an error");
  } catch (const InvalidInputError& e) {
    CHECK(std::string(e.what()).find("sample 1") != std::string::npos);
  }

  FlannModel short_weights{ExpansionSpec(25), std::vector<double>(50, 0.0), Normalizer(1), Normalizer(1)};
  CHECK_THROWS_AS(forward_batch(table.samples(), short_weights), DimensionError);
}
