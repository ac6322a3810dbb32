#include "flann/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flann/error.hpp"

namespace flann::io {

namespace {

using nlohmann::json;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool ParseDouble(std::string_view text, double* out) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(*out);
}

std::string ShortestDecimal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool SameBits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool ModelsBitEqual(const FlannModel& a, const FlannModel& b) {
  if (!(a.spec == b.spec) || a.weights.size() != b.weights.size()) return false;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (!SameBits(a.weights[i], b.weights[i])) return false;
  }
  return SameBits(a.input_norm.scale(), b.input_norm.scale()) &&
         SameBits(a.output_norm.scale(), b.output_norm.scale());
}

}  // namespace

CalibrationDataset lvdt_table1() {
  return CalibrationDataset({{-30, -5.185},
                             {-25, -5.017},
                             {-20, -4.717},
                             {-15, -4.039},
                             {-10, -2.896},
                             {-5, -1.494},
                             {0, 0.001},
                             {5, 1.462},
                             {10, 1.810},
                             {15, 3.962},
                             {20, 4.799},
                             {25, 5.225},
                             {30, 5.276}});
}

CalibrationDataset parse_dataset(std::istream& in, std::string_view source) {
  const std::string where(source);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<CalibrationSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = Trim(line);
    if (!have_header) {
      if (row != kDatasetHeader) {
        throw ParseError(where + ":" + std::to_string(line_no) + ": expected header '" +
                         std::string(kDatasetHeader) + "'");
      }
      have_header = true;
      continue;
    }
    if (row.empty()) continue;
    const auto comma = row.find(',');
    CalibrationSample s;
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": expected 2 columns in row '" +
                       std::string(row) + "'");
    }
    if (!ParseDouble(row.substr(0, comma), &s.displacement) ||
        !ParseDouble(row.substr(comma + 1), &s.voltage)) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": malformed row '" +
                       std::string(row) + "'");
    }
    if (!samples.empty() && !(s.displacement > samples.back().displacement)) {
      throw ParseError(where + ":" + std::to_string(line_no) +
                       ": displacement must increase strictly from the previous row");
    }
    samples.push_back(s);
  }
  if (!have_header) throw ParseError(where + ": empty file, header row required");
  if (samples.size() < 2) {
    throw ParseError(where + ": need at least 2 data rows, found " +
                     std::to_string(samples.size()));
  }
  return CalibrationDataset(std::move(samples));
}

CalibrationDataset load_dataset(const std::string& path_or_name) {
  if (path_or_name == kBundledFixtureName) return lvdt_table1();
  std::ifstream in(path_or_name);
  if (!in) throw IoError("cannot open dataset '" + path_or_name + "'");
  return parse_dataset(in, path_or_name);
}

std::string format_dataset(const CalibrationDataset& dataset) {
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& s : dataset.samples()) {
    out += ShortestDecimal(s.displacement) + ',' + ShortestDecimal(s.voltage) + '\n';
  }
  return out;
}

json model_to_json(const ModelFile& file) {
  const FlannModel& m = file.model;
  json doc;
  doc["format"] = "flann-model";
  doc["version"] = kModelFormatVersion;
  doc["expansion"] = {{"harmonics", m.spec.harmonics()}, {"width", m.spec.width()}};
  doc["input_scale"] = m.input_norm.scale();
  doc["output_scale"] = m.output_norm.scale();
  doc["weights"] = m.weights;
  if (file.training) {
    const TrainingSummary& t = *file.training;
    doc["training"] = {{"eta", t.eta},
                       {"epochs", t.epochs},
                       {"final_mse", t.final_mse},
                       {"converged", t.converged},
                       {"max_epochs", t.max_epochs},
                       {"mse_threshold", t.mse_threshold},
                       {"shuffle", t.shuffle},
                       {"seed", t.seed}};
  }
  return doc;
}

ModelFile model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "flann-model") {
      throw ParseError("not a flann-model document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("unsupported model format version " + std::to_string(version));
    }
    const ExpansionSpec spec(doc.at("expansion").at("harmonics").get<int>());
    if (doc.at("expansion").contains("width") &&
        doc.at("expansion").at("width").get<std::size_t>() != spec.width()) {
      throw ParseError("expansion width does not equal 2 * harmonics + 1");
    }
    ModelFile file{FlannModel{spec, doc.at("weights").get<std::vector<double>>(),
                              Normalizer(doc.at("input_scale").get<double>()),
                              Normalizer(doc.at("output_scale").get<double>())},
                   std::nullopt};
    file.model.Validate();
    if (doc.contains("training")) {
      const json& t = doc.at("training");
      file.training = TrainingSummary{t.at("eta").get<double>(),
                                      t.at("epochs").get<int>(),
                                      t.at("final_mse").get<double>(),
                                      t.at("converged").get<bool>(),
                                      t.at("max_epochs").get<int>(),
                                      t.at("mse_threshold").get<double>(),
                                      t.at("shuffle").get<bool>(),
                                      t.at("seed").get<std::uint64_t>()};
    }
    return file;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  } catch (const InvalidInputError& e) {
    throw ParseError(std::string("model file: ") + e.what());
  } catch (const DimensionError& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

std::string serialize_model(const ModelFile& file) {
  std::string text = model_to_json(file).dump(2) + "\n";
  if (!ModelsBitEqual(parse_model(text).model, file.model)) {
    throw IoError("model serialization does not round-trip exactly");
  }
  return text;
}

ModelFile parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  return model_from_json(doc);
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  write_text(path, serialize_model(file));
}

ModelFile load_model(const std::filesystem::path& path) { return parse_model(ReadFile(path)); }

json table(std::vector<std::string> columns, json rows) {
  return json{{"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

json linearity_to_json(const LinearityReport& report, std::span<const ResponsePoint> points) {
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double residual = report.per_point_residuals.at(i);
    rows.push_back({points[i].truth, points[i].output, residual,
                    std::abs(residual) <= report.tolerance_mm});
  }
  return json{{"total_points", report.total_points},
              {"linear_points", report.linear_points},
              {"percent_linear", report.percent_linear},
              {"tolerance_mm", report.tolerance_mm},
              {"points", table({"displacement_mm", "output_mm", "residual_mm", "linear"},
                               std::move(rows))}};
}

json convergence_to_json(const TrainingTrace& trace) {
  json rows = json::array();
  for (std::size_t k = 0; k < trace.mse_per_epoch.size(); ++k) {
    rows.push_back({k + 1, trace.mse_per_epoch[k]});
  }
  return json{{"epochs_run", trace.epochs_run},
              {"converged", trace.converged},
              {"mse", table({"epoch", "mse"}, std::move(rows))}};
}

json error_curve_to_json(const ErrorCurve& curve, std::string_view unit) {
  json rows = json::array();
  for (const auto& p : curve.points) rows.push_back({p.displacement, p.value});
  return json{{"unit", std::string(unit)},
              {"max_abs_error", curve.max_abs_error},
              {"max_abs_interior_error", curve.max_abs_interior_error},
              {"points", table({"displacement_mm", "error_" + std::string(unit)},
                               std::move(rows))}};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string format_trace(const PipelineTrace& trace) {
  std::string out = "trace key=" + ShortestDecimal(trace.key) + "\n";
  const auto line = [&out](std::string_view label, std::span<const Q18> values) {
    out += label;
    for (Q18 q : values) out += ' ' + to_bit_string(q);
    out += '\n';
  };
  line("input", std::span(&trace.input, 1));
  line("normalized", std::span(&trace.normalized, 1));
  line("expanded", trace.expanded);
  line("products", trace.products);
  line("partials", trace.partial_sums);
  line("output", std::span(&trace.output, 1));
  line("output_mm", std::span(&trace.output_mm, 1));
  out += "end\n";
  return out;
}

std::string format_traces(std::span<const PipelineTrace> traces) {
  std::string out = "# q18 pipeline trace v1\n";
  for (const auto& t : traces) out += format_trace(t);
  return out;
}

std::vector<PipelineTrace> parse_traces(std::string_view text) {
  std::vector<PipelineTrace> traces;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  PipelineTrace* current = nullptr;
  const auto fail = [&line_no](const std::string& what) {
    throw ParseError("trace line " + std::to_string(line_no) + ": " + what);
  };
  const auto read_patterns = [&](std::istringstream& fields, std::span<Q18> dest) {
    std::string token;
    for (Q18& q : dest) {
      if (!(fields >> token)) fail("too few patterns");
      q = q18_from_bit_string(token);
    }
    if (fields >> token) fail("too many patterns");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string label;
    fields >> label;
    if (label == "trace") {
      std::string key;
      fields >> key;
      traces.emplace_back();
      current = &traces.back();
      if (key.rfind("key=", 0) != 0 || !ParseDouble(key.substr(4), &current->key)) {
        fail("bad key field");
      }
      continue;
    }
    if (current == nullptr) fail("field outside a trace block");
    if (label == "input") {
      read_patterns(fields, std::span(&current->input, 1));
    } else if (label == "normalized") {
      read_patterns(fields, std::span(&current->normalized, 1));
    } else if (label == "expanded") {
      read_patterns(fields, current->expanded);
    } else if (label == "products") {
      read_patterns(fields, current->products);
    } else if (label == "partials") {
      read_patterns(fields, current->partial_sums);
    } else if (label == "output") {
      read_patterns(fields, std::span(&current->output, 1));
    } else if (label == "output_mm") {
      read_patterns(fields, std::span(&current->output_mm, 1));
    } else if (label == "end") {
      current = nullptr;
    } else {
      fail("unknown field '" + label + "'");
    }
  }
  if (current != nullptr) fail("unterminated trace block");
  return traces;
}

}  // namespace flann::io
