#include "flann/cli.hpp"

#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>

#include "flann/error.hpp"
#include "flann/io.hpp"
#include "flann/pipeline.hpp"

namespace flann::cli {

namespace {

using nlohmann::json;

void RequireTolerance(double tolerance_mm) {
  if (!std::isfinite(tolerance_mm) || !(tolerance_mm > 0.0)) {
    throw InvalidInputError("tolerance must be a positive finite number of millimetres");
  }
}

io::TrainingSummary Summarize(const TrainingConfig& config, const TrainingTrace& trace) {
  return {config.eta,
          trace.epochs_run,
          trace.mse_per_epoch.empty() ? 0.0 : trace.mse_per_epoch.back(),
          trace.converged,
          config.max_epochs,
          config.mse_threshold,
          config.shuffle,
          config.rng_seed};
}

std::filesystem::path WithSuffix(const std::filesystem::path& base, const std::string& suffix) {
  std::filesystem::path out = base;
  out += suffix;
  return out;
}

struct SweepRow {
  int harmonics = 0;
  TrainingResult result;
  std::vector<ResponsePoint> points;
};

}  // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseFailure;
  } catch (const LookupMissError& e) {
    err << "lookup miss: " << e.what() << '\n';
    return kLookupMiss;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const InvalidInputError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericFailure;
  }
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  return run_guarded(
      [&] {
        RequireTolerance(options.tolerance_mm);
        const CalibrationDataset dataset = io::load_dataset(options.dataset);
        const ExpansionSpec spec(options.harmonics);
        const TrainingResult result = train_lms(dataset, spec, options.training);
        const auto points = forward_batch(dataset.samples(), result.model);
        const LinearityReport report = linearity(points, options.tolerance_mm);

        io::save_model(options.model_out,
                       {result.model, Summarize(options.training, result.trace)});
        json doc{{"kind", "train"},
                 {"harmonics", spec.harmonics()},
                 {"expansions", spec.width()},
                 {"eta", options.training.eta},
                 {"mse_threshold", options.training.mse_threshold},
                 {"convergence", io::convergence_to_json(result.trace)},
                 {"linearity", io::linearity_to_json(report, points)}};
        io::write_json(options.report_out.value_or(WithSuffix(options.model_out, ".convergence.json")),
                       doc);

        out << "expansions " << spec.width() << ", epochs " << result.trace.epochs_run
            << ", final mse " << std::setprecision(6) << result.trace.mse_per_epoch.back()
            << (result.trace.converged ? " (converged)" : " (not converged)") << '\n';
        out << "linearity " << std::fixed << std::setprecision(2) << report.percent_linear
            << "% (" << report.linear_points << "/" << report.total_points << " within "
            << report.tolerance_mm << " mm)" << std::defaultfloat << '\n';
        return result.trace.converged ? kOk : kNotConverged;
      },
      err);
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
  return run_guarded(
      [&] {
        RequireTolerance(options.tolerance_mm);
        const CalibrationDataset dataset = io::load_dataset(options.dataset);
        std::vector<ResponsePoint> points;
        std::string mode;
        if (options.model) {
          const io::ModelFile file = io::load_model(*options.model);
          points = forward_batch(dataset.samples(), file.model);
          mode = "model";
        } else {
          const SensorLine line = fit_sensor_line(dataset.samples());
          for (const auto& s : dataset.samples()) {
            points.push_back({s.displacement, line.displacement_for(s.voltage)});
          }
          mode = "raw";
        }
        const LinearityReport report = linearity(points, options.tolerance_mm);
        if (options.report_out) {
          io::write_json(*options.report_out, json{{"kind", "evaluate"},
                                                   {"mode", mode},
                                                   {"linearity", io::linearity_to_json(report, points)}});
        }
        out << mode << " linearity " << std::fixed << std::setprecision(2)
            << report.percent_linear << "% (" << report.linear_points << "/"
            << report.total_points << " within " << report.tolerance_mm << " mm)"
            << std::defaultfloat << '\n';
        return kOk;
      },
      err);
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  return run_guarded(
      [&] {
        RequireTolerance(options.tolerance_mm);
        for (double t : options.sensitivity_tolerances) RequireTolerance(t);
        if (options.harmonics.empty()) throw InvalidInputError("sweep needs at least one K");
        options.training.Validate();
        const CalibrationDataset dataset = io::load_dataset(options.dataset);

        const auto run_one = [&dataset, &options](int k) {
          SweepRow row;
          row.harmonics = k;
          row.result = train_lms(dataset, ExpansionSpec(k), options.training);
          row.points = forward_batch(dataset.samples(), row.result.model);
          return row;
        };
        std::vector<SweepRow> rows;
        if (options.parallel) {
          std::vector<std::future<SweepRow>> jobs;
          for (int k : options.harmonics) jobs.push_back(std::async(std::launch::async, run_one, k));
          for (auto& job : jobs) rows.push_back(job.get());
        } else {
          for (int k : options.harmonics) rows.push_back(run_one(k));
        }

        json main_rows = json::array();
        out << std::setw(6) << "P" << std::setw(12) << "linear %" << std::setw(9) << "epochs"
            << std::setw(11) << "converged" << std::setw(14) << "final mse" << '\n';
        for (const auto& row : rows) {
          const LinearityReport report = linearity(row.points, options.tolerance_mm);
          const TrainingTrace& trace = row.result.trace;
          const double final_mse = trace.mse_per_epoch.back();
          main_rows.push_back({row.harmonics, row.result.model.spec.width(), report.percent_linear,
                               report.linear_points, trace.epochs_run, trace.converged, final_mse});
          out << std::setw(6) << row.result.model.spec.width() << std::setw(12) << std::fixed
              << std::setprecision(2) << report.percent_linear << std::setw(9)
              << trace.epochs_run << std::setw(11) << (trace.converged ? "yes" : "no")
              << std::setw(14) << std::scientific << std::setprecision(3) << final_mse
              << std::defaultfloat << '\n';
        }

        std::vector<std::string> sens_columns = {"tolerance_mm"};
        for (const auto& row : rows) {
          sens_columns.push_back("P=" + std::to_string(row.result.model.spec.width()));
        }
        json sens_rows = json::array();
        for (double tol : options.sensitivity_tolerances) {
          json r = json::array({tol});
          for (const auto& row : rows) r.push_back(linearity(row.points, tol).percent_linear);
          sens_rows.push_back(std::move(r));
        }

        if (options.report_out) {
          io::write_json(*options.report_out,
                         json{{"kind", "sweep"},
                              {"tolerance_mm", options.tolerance_mm},
                              {"eta", options.training.eta},
                              {"max_epochs", options.training.max_epochs},
                              {"mse_threshold", options.training.mse_threshold},
                              {"sweep", io::table({"harmonics", "expansions", "percent_linear",
                                                   "linear_points", "epochs_run", "converged",
                                                   "final_mse"},
                                                  std::move(main_rows))},
                              {"tolerance_sensitivity",
                               io::table(std::move(sens_columns), std::move(sens_rows))}});
        }
        return kOk;
      },
      err);
}

int cmd_pipeline(const PipelineOptions& options, std::ostream& out, std::ostream& err) {
  return run_guarded(
      [&] {
        const CalibrationDataset dataset = io::load_dataset(options.dataset);
        const io::ModelFile file = io::load_model(options.model);
        const PipelineConfig config = quantize_model(file.model);
        const LookupTable lut = build_lookup(dataset);

        std::vector<CalibrationSample> inputs;
        if (options.voltages.empty()) {
          inputs.assign(dataset.samples().begin(), dataset.samples().end());
        } else {
          for (double v : options.voltages) {
            double truth = std::nan("");
            for (const auto& s : dataset.samples()) {
              if (s.voltage == v) truth = s.displacement;
            }
            inputs.push_back({truth, v});
          }
        }

        std::vector<PipelineTrace> traces;
        std::vector<CurvePoint> ref_mm, cand_mm, ref_v, cand_v;
        json rows = json::array();
        for (const auto& s : inputs) {
          const PipelineResult r = pipeline_infer(s.voltage, config, lut);
          const double reference = forward(s.voltage, file.model);
          traces.push_back(r.trace);
          ref_mm.push_back({s.displacement, reference});
          cand_mm.push_back({s.displacement, r.output_mm});
          ref_v.push_back({s.displacement, output_in_sensor_volts(reference, file.model)});
          cand_v.push_back({s.displacement, output_in_sensor_volts(r.output_mm, file.model)});
          rows.push_back({s.displacement, s.voltage, reference, r.output_mm});
        }
        io::write_text(options.trace_out, io::format_traces(traces));

        const ErrorCurve curve_v = error_curve(ref_v, cand_v);
        const ErrorCurve curve_mm = error_curve(ref_mm, cand_mm);
        if (options.report_out) {
          io::write_json(*options.report_out,
                         json{{"kind", "pipeline"},
                              {"outputs", io::table({"displacement_mm", "voltage_v",
                                                     "reference_mm", "pipeline_mm"},
                                                    std::move(rows))},
                              {"error_curve", io::error_curve_to_json(curve_v, "v")},
                              {"error_curve_mm", io::error_curve_to_json(curve_mm, "mm")}});
        }
        out << "pipeline over " << inputs.size() << " inputs: interior max |error| "
            << std::setprecision(4) << curve_v.max_abs_interior_error << " V ("
            << curve_mm.max_abs_interior_error << " mm), overall max " << curve_v.max_abs_error
            << " V\n";
        return kOk;
      },
      err);
}

}  // namespace flann::cli
