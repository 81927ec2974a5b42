#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "lgcf/checkpoint.hpp"
#include "lgcf/errors.hpp"
#include "lgcf/geometry.hpp"
#include "lgcf/run.hpp"
#include "lgcf/synthetic.hpp"

namespace py = pybind11;
namespace geo = lgcf::geometry;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> as_span(const Array& a) {
    if (a.ndim() != 1) throw lgcf::DimensionError("expected a 1-d array");
    return {a.data(), static_cast<std::size_t>(a.size())};
}

Array to_array(std::span<const double> v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Array matrix_to_array(const lgcf::EmbeddingMatrix& e) {
    Array out({static_cast<py::ssize_t>(e.rows()), static_cast<py::ssize_t>(e.width())});
    std::copy(e.data().begin(), e.data().end(), out.mutable_data());
    return out;
}

lgcf::RunConfig make_config(const py::dict& settings) {
    lgcf::RunConfig config;
    for (const auto& [key, value] : settings) {
        config.set(py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
    }
    return config;
}

py::dict report_to_dict(const lgcf::EvalReport& r) {
    py::dict d;
    for (std::size_t c = 0; c < r.cutoffs.size(); ++c) {
        d[py::str("recall@" + std::to_string(r.cutoffs[c]))] = r.recall[c];
        d[py::str("ndcg@" + std::to_string(r.cutoffs[c]))] = r.ndcg[c];
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_lgcf, m) {
    m.doc() = "Lorentz graph convolution for collaborative filtering";

    py::register_exception<lgcf::Error>(m, "Error", PyExc_ValueError);

    m.def(
        "lorentz_inner", [](const Array& x, const Array& y) { return geo::lorentz_inner(as_span(x), as_span(y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "distance", [](const Array& x, const Array& y) { return geo::lorentz_distance(as_span(x), as_span(y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "to_klein",
        [](const Array& x) {
            std::vector<double> out(as_span(x).size() - 1);
            geo::to_klein(as_span(x), out);
            return to_array(out);
        },
        py::arg("x"));
    m.def(
        "from_klein",
        [](const Array& k) {
            std::vector<double> out(as_span(k).size() + 1);
            geo::from_klein(as_span(k), out);
            return to_array(out);
        },
        py::arg("k"));
    m.def(
        "exp_map",
        [](const Array& x, const Array& v) {
            std::vector<double> out(as_span(x).size());
            geo::exp_map(as_span(x), as_span(v), out);
            return to_array(out);
        },
        py::arg("x"), py::arg("v"));
    m.def(
        "log_map",
        [](const Array& x, const Array& y) {
            std::vector<double> out(as_span(x).size());
            geo::log_map(as_span(x), as_span(y), out);
            return to_array(out);
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "generate_tree_benchmark",
        [](const std::filesystem::path& path, std::uint64_t seed) {
            const auto data = lgcf::make_tree_benchmark({}, seed);
            std::ofstream out(path);
            if (!out) throw lgcf::Error("cannot write '" + path.string() + "'");
            lgcf::write_interactions(out, data.set, data.ids);
            return data.set.size();
        },
        py::arg("path"), py::arg("seed") = 0, "Writes the synthetic tree benchmark; returns the pair count.");

    m.def(
        "train",
        [](const std::filesystem::path& data, const py::dict& settings) {
            auto config = make_config(settings);
            config.data = data;
            config.validate();
            lgcf::TrainOutcome outcome;
            lgcf::EvalReport report;
            {
                py::gil_scoped_release release;
                const auto prepared = lgcf::prepare_data(config);
                outcome = lgcf::run_training(config, prepared);
                report = lgcf::run_evaluation(config, prepared, outcome.embeddings);
            }
            py::dict result;
            result["embeddings"] = matrix_to_array(outcome.embeddings);
            result["losses"] = outcome.epoch_losses;
            result["metrics"] = report_to_dict(report);
            return result;
        },
        py::arg("data"), py::arg("settings") = py::dict(),
        "Trains on an interaction file and evaluates on its held-out split. `settings` takes the same keys as the "
        "command-line flags, e.g. {'dim': 16, 'epochs': 50}.");

    m.def(
        "load_checkpoint",
        [](const std::filesystem::path& path) {
            const auto ckpt = lgcf::load_checkpoint(path);
            py::dict d;
            d["n_users"] = ckpt.header.n_users;
            d["n_items"] = ckpt.header.n_items;
            d["dim"] = ckpt.header.dim;
            d["layers"] = ckpt.header.layers;
            d["mode"] = std::string(lgcf::to_string(ckpt.header.mode));
            d["seed"] = ckpt.header.seed;
            d["embeddings"] = matrix_to_array(ckpt.embeddings);
            return d;
        },
        py::arg("path"));
}
