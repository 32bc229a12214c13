#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "cwrgeom/embedding_store.hpp"
#include "cwrgeom/error.hpp"
#include "cwrgeom/geometry_metrics.hpp"
#include "cwrgeom/isotropy_transform.hpp"
#include "cwrgeom/numerics.hpp"
#include "cwrgeom/report.hpp"
#include "cwrgeom/sts_eval.hpp"
#include "cwrgeom/synth.hpp"

namespace py = pybind11;
using namespace cwrgeom;

namespace {

py::object to_python(const Json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_cwrgeom, m) {
    m.doc() = "Embedding-space geometry analysis and cluster-based isotropy enhancement";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    // -- store ---------------------------------------------------------------
    py::class_<TokenMeta>(m, "TokenMeta")
        .def(py::init([](std::string token, std::int64_t word, std::int64_t sent,
                         std::optional<double> freq) {
                 return TokenMeta{std::move(token), word, sent, freq};
             }),
             py::arg("token") = "", py::arg("word") = -1, py::arg("sent") = 0,
             py::arg("freq") = py::none())
        .def_readwrite("token", &TokenMeta::token)
        .def_readwrite("word", &TokenMeta::word_index)
        .def_readwrite("sent", &TokenMeta::sentence_index)
        .def_readwrite("freq", &TokenMeta::frequency_per_million)
        .def("__repr__", [](const TokenMeta& t) {
            return "TokenMeta(token='" + t.token + "', word=" + std::to_string(t.word_index) +
                   ", sent=" + std::to_string(t.sentence_index) + ")";
        });

    py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
        .def(py::init([](Matrix data, std::optional<std::vector<TokenMeta>> meta,
                         std::string language, std::string model_id) {
                 auto rows = static_cast<std::size_t>(data.rows());
                 return EmbeddingMatrix(std::move(data),
                                        meta ? std::move(*meta)
                                             : EmbeddingMatrix::placeholder_meta(rows),
                                        std::move(language), std::move(model_id));
             }),
             py::arg("data"), py::arg("meta") = py::none(), py::arg("language") = "",
             py::arg("model_id") = "")
        .def_property_readonly("data", [](const EmbeddingMatrix& e) { return e.data(); })
        .def_property_readonly("rows", &EmbeddingMatrix::rows)
        .def_property_readonly("dims", &EmbeddingMatrix::dims)
        .def_property_readonly("meta", &EmbeddingMatrix::meta)
        .def_property_readonly("language", &EmbeddingMatrix::language)
        .def_property_readonly("model_id", &EmbeddingMatrix::model_id)
        .def_property_readonly("provenance",
                               [](const EmbeddingMatrix& e) { return to_python(e.provenance()); });

    m.def("load_matrix", &load_matrix, py::arg("path"));
    m.def("save_matrix", &save_matrix, py::arg("matrix"), py::arg("path"));
    m.def("load_frequency_table", &load_frequency_table, py::arg("path"));
    m.def(
        "attach_frequencies",
        [](const EmbeddingMatrix& e, const FrequencyTable& table) {
            auto r = attach_frequencies(e, table);
            return py::make_tuple(r.matrix, r.coverage(), r.unmatched);
        },
        py::arg("matrix"), py::arg("table"),
        "Returns (matrix, coverage, unmatched words).");

    py::class_<StsDataset>(m, "StsDataset")
        .def_property_readonly("pairs",
                               [](const StsDataset& ds) {
                                   py::list out;
                                   for (const auto& p : ds.pairs) {
                                       out.append(py::make_tuple(
                                           py::make_tuple(p.first.start, p.first.end),
                                           py::make_tuple(p.second.start, p.second.end), p.gold));
                                   }
                                   return out;
                               })
        .def("__len__", &StsDataset::size);
    m.def("load_sts", &load_sts, py::arg("path"), py::arg("matrix"));

    // -- numerics ------------------------------------------------------------
    py::class_<PcaResult>(m, "PcaResult")
        .def_readonly("mean", &PcaResult::mean)
        .def_readonly("components", &PcaResult::components)
        .def_readonly("eigenvalues", &PcaResult::eigenvalues)
        .def_readonly("near_degenerate", &PcaResult::near_degenerate);
    m.def("pca", &pca, py::arg("data"), py::arg("center"), py::arg("r"));

    py::class_<KMeansResult>(m, "KMeansResult")
        .def_readonly("centroids", &KMeansResult::centroids)
        .def_readonly("assignments", &KMeansResult::assignments)
        .def_readonly("inertia", &KMeansResult::inertia)
        .def_readonly("iterations", &KMeansResult::iterations)
        .def_readonly("converged", &KMeansResult::converged);
    m.def(
        "kmeans",
        [](const Matrix& data, std::size_t k, std::uint64_t seed, std::size_t max_iter,
           double tol) { return kmeans(data, k, seed, KMeansOptions{max_iter, tol}); },
        py::arg("data"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300,
        py::arg("tol") = 1e-6);
    m.def(
        "spearman",
        [](const std::vector<double>& a, const std::vector<double>& b) { return spearman(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "sample_pairs",
        [](std::size_t rows, std::size_t n, std::uint64_t seed) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto& p : sample_pairs(rows, n, seed)) out.emplace_back(p.first, p.second);
            return out;
        },
        py::arg("rows"), py::arg("n"), py::arg("seed") = 0);
    m.def("log_partition", &log_partition, py::arg("u"), py::arg("data"));

    // -- metrics -------------------------------------------------------------
    m.def("isotropy_cos", &isotropy_cos, py::arg("matrix"), py::arg("n_pairs") = kDefaultPairs,
          py::arg("seed") = 0);
    m.def(
        "isotropy_pc", [](const EmbeddingMatrix& e) { return to_python(to_json(isotropy_pc(e))); },
        py::arg("matrix"));
    m.def(
        "isotropy_report",
        [](const EmbeddingMatrix& e, std::size_t n_pairs, std::uint64_t seed, std::size_t top_k) {
            return to_python(to_json(isotropy_report(e, n_pairs, seed, top_k)));
        },
        py::arg("matrix"), py::arg("n_pairs") = kDefaultPairs, py::arg("seed") = 0,
        py::arg("top_k") = kDefaultTopK);
    m.def(
        "dimension_contributions",
        [](const EmbeddingMatrix& e, std::size_t n_pairs, std::uint64_t seed, std::size_t top_k) {
            return to_python(to_json(dimension_contributions(e, n_pairs, seed, top_k)));
        },
        py::arg("matrix"), py::arg("n_pairs") = kDefaultPairs, py::arg("seed") = 0,
        py::arg("top_k") = kDefaultTopK);
    m.def(
        "detect_outliers",
        [](const EmbeddingMatrix& e, std::size_t n_samples, std::uint64_t seed, double threshold) {
            return to_python(to_json(detect_outliers(e, n_samples, seed, threshold)));
        },
        py::arg("matrix"), py::arg("n_samples") = kDefaultOutlierSamples, py::arg("seed") = 0,
        py::arg("threshold_sigmas") = kDefaultThresholdSigmas);
    m.def(
        "frequency_bias_export",
        [](const EmbeddingMatrix& e) {
            std::vector<std::tuple<std::string, double, double, double>> out;
            for (const auto& r : frequency_bias_export(e).records) {
                out.emplace_back(r.word, r.frequency_per_million, r.pc1, r.pc2);
            }
            return out;
        },
        py::arg("matrix"));

    // -- transform -----------------------------------------------------------
    py::class_<IsotropyTransform>(m, "IsotropyTransform")
        .def_property_readonly("k", &IsotropyTransform::k)
        .def_readonly("dims", &IsotropyTransform::dims)
        .def_readonly("d_remove", &IsotropyTransform::d_remove)
        .def_property_readonly("centroids",
                               [](const IsotropyTransform& t) {
                                   std::vector<Vector> out;
                                   for (const auto& c : t.clusters) out.push_back(c.centroid);
                                   return out;
                               })
        .def_property_readonly("components",
                               [](const IsotropyTransform& t) {
                                   std::vector<Matrix> out;
                                   for (const auto& c : t.clusters) out.push_back(c.components);
                                   return out;
                               })
        .def_property_readonly("provenance",
                               [](const IsotropyTransform& t) { return to_python(t.provenance); });
    m.def(
        "fit_transform",
        [](const EmbeddingMatrix& e, std::size_t k, std::size_t d_remove, std::uint64_t seed) {
            FitOptions f;
            f.k = k;
            f.d_remove = d_remove;
            f.seed = seed;
            return fit_transform(e, f);
        },
        py::arg("matrix"), py::arg("k") = kDefaultClusters, py::arg("d_remove") = kDefaultRemove,
        py::arg("seed") = 0);
    m.def("apply_transform", &apply_transform, py::arg("transform"), py::arg("matrix"));
    m.def("save_transform", &save_transform, py::arg("transform"), py::arg("path"));
    m.def("load_transform", &load_transform, py::arg("path"));

    // -- sts -----------------------------------------------------------------
    m.def("pool_sentence",
          [](const EmbeddingMatrix& e, std::size_t start, std::size_t end) {
              return pool_sentence(e, RowRange{start, end});
          },
          py::arg("matrix"), py::arg("start"), py::arg("end"));
    m.def("score_pairs", &score_pairs, py::arg("matrix"), py::arg("dataset"));
    m.def(
        "evaluate_sts",
        [](const EmbeddingMatrix& e, const StsDataset& ds, const IsotropyTransform* t,
           const std::string& setting) {
            auto r = evaluate_sts(e, ds, t, parse_setting(setting));
            auto out = to_python(to_json(r));
            out["scores"] = r.scores;
            return out;
        },
        py::arg("matrix"), py::arg("dataset"), py::arg("transform") = nullptr,
        py::arg("setting") = "baseline");

    // -- synthetic fixtures --------------------------------------------------
    auto s = m.def_submodule("synth", "Seeded synthetic fixtures");
    s.def("isotropic", &synth::isotropic, py::arg("rows"), py::arg("dims"), py::arg("seed") = 0,
          py::arg("noise_scale") = 1.0, py::arg("language") = "synthetic");
    s.def("offset", &synth::offset, py::arg("matrix"), py::arg("per_coordinate"));
    s.def(
        "anisotropic",
        [](std::size_t rows, std::size_t dims, std::size_t clusters, std::uint64_t structure_seed,
           std::uint64_t sample_seed, std::vector<std::size_t> outlier_dims, std::string language) {
            synth::AnisotropicParams p;
            p.rows = rows;
            p.dims = dims;
            p.clusters = clusters;
            p.structure_seed = structure_seed;
            p.sample_seed = sample_seed;
            p.outlier_dims = std::move(outlier_dims);
            p.language = std::move(language);
            auto c = synth::anisotropic(p);
            return py::make_tuple(c.matrix, c.frequencies);
        },
        py::arg("rows") = 7000, py::arg("dims") = 64, py::arg("clusters") = 7,
        py::arg("structure_seed") = 1, py::arg("sample_seed") = 2,
        py::arg("outlier_dims") = std::vector<std::size_t>{}, py::arg("language") = "synthetic",
        "Returns (matrix, frequency table).");
    s.def(
        "planted_outliers",
        [](std::size_t rows, std::size_t dims, std::vector<std::size_t> outlier_dims,
           double magnitude_sigmas, std::uint64_t seed) {
            synth::OutlierParams p;
            p.rows = rows;
            p.dims = dims;
            p.outlier_dims = std::move(outlier_dims);
            p.magnitude_sigmas = magnitude_sigmas;
            p.seed = seed;
            return synth::planted_outliers(p);
        },
        py::arg("rows") = 5000, py::arg("dims") = 128,
        py::arg("outlier_dims") = std::vector<std::size_t>{5}, py::arg("magnitude_sigmas") = 10.0,
        py::arg("seed") = 1);
    s.def(
        "sts_benchmark",
        [](std::size_t pairs, std::size_t dims, bool monotone, std::uint64_t structure_seed,
           std::uint64_t seed) {
            synth::StsParams p;
            p.pairs = pairs;
            p.dims = dims;
            p.monotone = monotone;
            p.structure_seed = structure_seed;
            p.seed = seed;
            auto b = synth::sts_benchmark(p);
            return py::make_tuple(b.matrix, b.dataset);
        },
        py::arg("pairs") = 300, py::arg("dims") = 128, py::arg("monotone") = false,
        py::arg("structure_seed") = 1, py::arg("seed") = 2, "Returns (matrix, dataset).");
}
