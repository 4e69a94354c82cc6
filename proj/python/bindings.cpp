#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sqrdln/commands.hpp"
#include "sqrdln/config.hpp"
#include "sqrdln/evaluation.hpp"
#include "sqrdln/forecast.hpp"
#include "sqrdln/lattice.hpp"
#include "sqrdln/loss.hpp"
#include "sqrdln/metrics.hpp"
#include "sqrdln/projection.hpp"

namespace py = pybind11;
using namespace sqrdln;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

json to_cpp(const py::object& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj).cast<std::string>());
}

py::object to_py(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

// y is [N, h] and forecasts [N, Q, h]; returns h after checking shapes.
std::size_t check_quantile_shapes(const Array& y, const Array& f, std::size_t q) {
  if (y.ndim() != 2 || f.ndim() != 3) {
    throw std::invalid_argument("expected y of shape [N, h] and forecasts of shape [N, Q, h]");
  }
  if (f.shape(0) != y.shape(0) || f.shape(2) != y.shape(1) ||
      static_cast<std::size_t>(f.shape(1)) != q) {
    throw std::invalid_argument("forecast shape does not match y and taus");
  }
  return static_cast<std::size_t>(y.shape(1));
}

py::list curve_to_py(const Curve& curve) {
  py::list out;
  for (const auto& [a, b] : curve) out.append(py::make_tuple(a, b));
  return out;
}

RunConfig run_config(const py::object& config) {
  return parse_config(config.is_none() ? json::object() : to_cpp(config));
}

struct PyDataset {
  std::shared_ptr<SeriesDataset> ds;
};

struct PyModel {
  std::shared_ptr<Model> model;
};

PyModel make_model(const PyDataset& data, const py::dict& model_section, std::uint64_t seed) {
  json doc = {{"model", to_cpp(model_section)}, {"seed", seed}};
  const RunConfig cfg = parse_config(doc);
  return {std::make_shared<Model>(resolve_model_config(cfg, *data.ds, cfg.head, cfg.seed))};
}

// The metric report as a dict; evaluation warnings go through Python's
// warnings module so the dict keeps to the report schema.
py::object report_to_py(const Evaluation& ev) {
  const auto warn = py::module_::import("warnings").attr("warn");
  for (const auto& w : ev.warnings) warn(w, py::module_::import("builtins").attr("UserWarning"), 2);
  return to_py(to_json(ev.report));
}

py::array_t<double> batch_to_array(const ForecastBatch& b) {
  py::array_t<double> out({b.quantiles(), b.horizon});
  std::copy(b.values.begin(), b.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(sqrdln, m) {
  m.doc() = "LSTM deep lattice network quantile forecaster";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("default_quantile_grid", &default_quantile_grid);

  m.def(
      "pinball_loss",
      [](const Array& y, const Array& y_hat, double tau) {
        return pinball_loss(flat(y), flat(y_hat), tau);
      },
      py::arg("y"), py::arg("y_hat"), py::arg("tau"));

  m.def(
      "crps",
      [](const Array& y, const Array& f, const std::vector<double>& taus) {
        const auto h = check_quantile_shapes(y, f, taus.size());
        return crps_approx(flat(y), flat(f), taus, h);
      },
      py::arg("y"), py::arg("forecasts"), py::arg("taus"),
      "Mean pinball loss summed over the quantile grid. y is [N, h], forecasts [N, Q, h].");

  m.def(
      "picp",
      [](const Array& y, const Array& f, const std::vector<double>& taus) {
        const auto h = check_quantile_shapes(y, f, taus.size());
        return curve_to_py(picp(flat(y), flat(f), taus, h));
      },
      py::arg("y"), py::arg("forecasts"), py::arg("taus"));

  m.def(
      "ace",
      [](const Array& y, const Array& f, const std::vector<double>& taus) {
        const auto h = check_quantile_shapes(y, f, taus.size());
        return ace(picp(flat(y), flat(f), taus, h));
      },
      py::arg("y"), py::arg("forecasts"), py::arg("taus"));

  m.def(
      "reliability",
      [](const Array& y, const Array& f, const std::vector<double>& taus) {
        const auto h = check_quantile_shapes(y, f, taus.size());
        return curve_to_py(reliability(flat(y), flat(f), taus, h));
      },
      py::arg("y"), py::arg("forecasts"), py::arg("taus"));

  m.def(
      "crossover_rate",
      [](const Array& f, const std::vector<double>& taus) {
        if (f.ndim() != 3 || static_cast<std::size_t>(f.shape(1)) != taus.size()) {
          throw std::invalid_argument("forecasts must be [N, Q, h] with Q = len(taus)");
        }
        const auto n = static_cast<std::size_t>(f.shape(0));
        const auto h = static_cast<std::size_t>(f.shape(2));
        std::vector<ForecastBatch> batches(n);
        for (std::size_t i = 0; i < n; ++i) {
          batches[i].taus = taus;
          batches[i].horizon = h;
          batches[i].values.assign(f.data() + i * taus.size() * h, f.data() + (i + 1) * taus.size() * h);
        }
        return crossover_rate(batches);
      },
      py::arg("forecasts"), py::arg("taus"));

  m.def(
      "isotonic_regression",
      [](const std::vector<double>& y) { return isotonic_regression(y); }, py::arg("y"));

  m.def(
      "lattice_forward",
      [](const std::vector<double>& theta, std::size_t dims, std::size_t keypoints,
         const std::vector<double>& x) {
        Lattice l("lattice", dims, keypoints, {});
        l.theta().assign(theta);
        return l.forward(x);
      },
      py::arg("theta"), py::arg("dims"), py::arg("keypoints"), py::arg("x"),
      "Multilinear lattice on [0, 1]^dims; theta is row-major with dimension 0 most significant.");

  m.def("metric_report_schema", [] { return to_py(metric_report_schema()); });

  py::class_<PyDataset>(m, "Dataset")
      .def(py::init([](const py::dict& config) {
             return PyDataset{std::make_shared<SeriesDataset>(load_dataset(run_config(config)))};
           }),
           py::arg("config"), "Loads the dataset described by the 'data' section of a config.")
      .def_static(
          "synthetic",
          [](const std::string& kind, std::size_t length, std::uint64_t seed, std::size_t window,
             std::size_t horizon) {
            DataConfig d;
            d.window = window;
            d.horizon = horizon;
            return PyDataset{std::make_shared<SeriesDataset>(
                synth_generate(synth_kind_from_string(kind), length, seed, d))};
          },
          py::arg("kind") = "heteroscedastic-sine", py::arg("length") = 5000, py::arg("seed") = 1,
          py::arg("window") = 96, py::arg("horizon") = 36)
      .def_property_readonly("rows", [](const PyDataset& d) { return d.ds->rows(); })
      .def_property_readonly("columns", [](const PyDataset& d) { return d.ds->columns(); })
      .def_property_readonly("window", [](const PyDataset& d) { return d.ds->window(); })
      .def_property_readonly("horizon", [](const PyDataset& d) { return d.ds->horizon(); })
      .def("sample_count", [](const PyDataset& d, const std::string& split) {
        return d.ds->sample_count(split_from_string(split));
      });

  py::class_<PyModel>(m, "Model")
      .def(py::init(&make_model), py::arg("dataset"), py::arg("model") = py::dict(),
           py::arg("seed") = 1,
           "Builds a model for the dataset from a 'model' config section.")
      .def_static(
          "load", [](const std::filesystem::path& path) { return PyModel{Model::load(path)}; },
          py::arg("path"))
      .def("save", [](PyModel& self, const std::filesystem::path& path) { self.model->save(path); })
      .def_property_readonly("head", [](const PyModel& self) {
        return to_string(self.model->head().kind());
      })
      .def_property_readonly("parameter_count",
                             [](PyModel& self) { return self.model->parameter_count(); })
      .def_property_readonly("embed_calls", [](const PyModel& self) { return self.model->embed_calls(); })
      .def(
          "train",
          [](PyModel& self, const PyDataset& data, const py::dict& train_section,
             std::uint64_t seed) {
            json doc = {{"train", to_cpp(train_section)}};
            const RunConfig cfg = parse_config(doc);
            const auto tc = resolve_train_config(cfg, self.model->head().kind(), seed);
            TrainResult r;
            {
              py::gil_scoped_release release;
              r = train(*self.model, *data.ds, tc);
            }
            py::list log;
            for (const auto& e : r.epochs) {
              py::dict row;
              row["epoch"] = e.epoch;
              row["train_loss"] = e.train_loss;
              row["validation_crps"] = e.validation_crps;
              row["learning_rate"] = e.learning_rate;
              log.append(row);
            }
            return log;
          },
          py::arg("dataset"), py::arg("train") = py::dict(), py::arg("seed") = 1,
          "Trains in place and returns the per-epoch log.")
      .def(
          "evaluate",
          [](const PyModel& self, const PyDataset& data, const std::string& split,
             std::optional<std::vector<double>> taus) {
            const auto grid = taus.value_or(default_quantile_grid());
            Evaluation ev;
            {
              py::gil_scoped_release release;
              ev = evaluate(*self.model, *data.ds, split_from_string(split), grid);
            }
            return report_to_py(ev);
          },
          py::arg("dataset"), py::arg("split") = "test", py::arg("taus") = py::none())
      .def(
          "forecast",
          [](const PyModel& self, const PyDataset& data, const std::string& split,
             std::size_t index, std::optional<std::vector<double>> taus) {
            const auto grid = taus.value_or(default_quantile_grid());
            const Split s = split_from_string(split);
            if (index >= data.ds->sample_count(s)) throw py::index_error("sample index out of range");
            const auto start = data.ds->sample_start(s, index);
            auto batch = exploit(*self.model, data.ds->window_at(start), grid, start);
            for (double& v : batch.values) v = data.ds->inverse_scale(v);
            return batch_to_array(batch);
          },
          py::arg("dataset"), py::arg("split") = "test", py::arg("index") = 0,
          py::arg("taus") = py::none(),
          "Quantile forecast [Q, h] in physical units for one window of a split.")
      .def("reset_embed_calls", [](PyModel& self) { self.model->reset_embed_calls(); });

  m.def(
      "run_train",
      [](const py::dict& config, const std::filesystem::path& out_dir) {
        const RunConfig cfg = run_config(config);
        TrainOutcome r;
        {
          py::gil_scoped_release release;
          r = cmd_train(cfg, out_dir);
        }
        return py::make_tuple(r.checkpoint, r.log);
      },
      py::arg("config"), py::arg("out_dir"),
      "Same as the train subcommand; returns (checkpoint path, log path).");

  m.def(
      "run_eval",
      [](const std::filesystem::path& checkpoint, const py::dict& config, const std::string& split,
         std::optional<std::vector<double>> taus, const std::filesystem::path& out_dir) {
        const RunConfig cfg = run_config(config);
        Evaluation ev;
        {
          py::gil_scoped_release release;
          ev = cmd_eval(checkpoint, cfg, split_from_string(split),
                        taus.value_or(cfg.eval.taus), out_dir);
        }
        return report_to_py(ev);
      },
      py::arg("checkpoint"), py::arg("config"), py::arg("split") = "test",
      py::arg("taus") = py::none(), py::arg("out_dir") = ".");

  m.def(
      "run_experiment",
      [](const py::dict& config, const std::vector<std::uint64_t>& seeds,
         const std::filesystem::path& out_dir) {
        const RunConfig cfg = run_config(config);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = cmd_experiment(cfg, seeds.empty() ? cfg.experiment.seeds : seeds, out_dir);
        }
        return py::make_tuple(r.exit_code, r.failures);
      },
      py::arg("config"), py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("out_dir") = ".",
      "Writes experiment.csv and runs.jsonl; returns (exit code, failure messages).");
}
