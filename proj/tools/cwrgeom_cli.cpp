// cwrgeom: embedding-space geometry reports, isotropy transforms and STS
// evaluation from the command line.
//
// Exit codes: 0 ok, 1 I/O failure, 2 validation failure, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cwrgeom/embedding_store.hpp"
#include "cwrgeom/error.hpp"
#include "cwrgeom/geometry_metrics.hpp"
#include "cwrgeom/isotropy_transform.hpp"
#include "cwrgeom/report.hpp"
#include "cwrgeom/sts_eval.hpp"
#include "cwrgeom/synth.hpp"

namespace {

using namespace cwrgeom;

enum ExitCode : int { kOk = 0, kIo = 1, kValidation = 2, kNumeric = 3 };

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return kIo;
        case ErrorKind::Numeric: return kNumeric;
        default: return kValidation;
    }
}

struct Options {
    std::string input;
    std::string output;
    std::uint64_t seed = 0;
    std::size_t pairs = kDefaultPairs;
    std::size_t samples = kDefaultOutlierSamples;
    std::size_t clusters = kDefaultClusters;
    std::size_t remove = kDefaultRemove;
    double threshold_sigmas = kDefaultThresholdSigmas;
    std::string transform;
    std::string sts;
    std::string setting = "baseline";
    std::string freq_table;
    std::size_t top_k = kDefaultTopK;
    std::size_t max_iter = 300;
    double tol = 1e-6;

    // synth only
    std::string kind = "isotropic";
    std::size_t rows = 10000;
    std::size_t dims = 32;
    double offset = 0.0;
    std::vector<std::size_t> outlier_dims;
    double magnitude = 10.0;
    std::uint64_t structure_seed = 1;
    std::string language = "synthetic";
    bool monotone = false;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

void emit_json(const std::string& path, const Json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path.empty()) {
        std::cout << text;
    } else {
        write_file(path, text);
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ArgumentError(message);
}

Json common_parameters(const Options& o) {
    Json p;
    p["input"] = o.input;
    p["seed"] = o.seed;
    return p;
}

// ---------------------------------------------------------------------------

int cmd_metrics(const Options& o) {
    require(o.pairs > 0, "--pairs must be positive");
    const auto m = load_matrix(o.input);
    const auto report = isotropy_report(m, o.pairs, o.seed, o.top_k);
    Json doc;
    doc["command"] = "metrics";
    auto params = common_parameters(o);
    params["pairs"] = o.pairs;
    params["top_k"] = o.top_k;
    doc["parameters"] = std::move(params);
    doc["matrix"] = describe(m);
    doc["report"] = to_json(report);
    emit_json(o.output, doc);
    return kOk;
}

int cmd_outliers(const Options& o) {
    require(o.samples > 0, "--samples must be positive");
    require(o.threshold_sigmas > 0.0, "--threshold-sigmas must be positive");
    const auto m = load_matrix(o.input);
    const auto report = detect_outliers(m, o.samples, o.seed, o.threshold_sigmas);
    Json doc;
    doc["command"] = "outliers";
    auto params = common_parameters(o);
    params["samples"] = o.samples;
    params["threshold_sigmas"] = o.threshold_sigmas;
    doc["parameters"] = std::move(params);
    doc["matrix"] = describe(m);
    doc["report"] = to_json(report);
    emit_json(o.output, doc);
    return kOk;
}

int cmd_freqbias(const Options& o) {
    require(!o.output.empty(), "--output is required");
    auto m = load_matrix(o.input);
    Json doc;
    doc["command"] = "freqbias";
    Json params;
    params["input"] = o.input;
    params["freq_table"] = o.freq_table;
    doc["parameters"] = std::move(params);
    if (!o.freq_table.empty()) {
        const auto attached = attach_frequencies(m, load_frequency_table(o.freq_table));
        m = attached.matrix;
        Json cov;
        cov["words"] = attached.n_words;
        cov["matched"] = attached.n_matched;
        cov["coverage"] = attached.coverage();
        cov["distinct_unmatched"] = attached.unmatched.size();
        doc["coverage"] = std::move(cov);
        std::cerr << "frequency coverage: " << attached.n_matched << "/" << attached.n_words
                  << " word occurrences\n";
    }
    const auto exported = frequency_bias_export(m);
    Json basis;
    basis["components"] = exported.pca_basis.components.rows();
    std::vector<double> ev(exported.pca_basis.eigenvalues.data(),
                           exported.pca_basis.eigenvalues.data() +
                               exported.pca_basis.eigenvalues.size());
    basis["eigenvalues"] = std::move(ev);
    basis["centered"] = true;
    doc["pca"] = std::move(basis);
    doc["records"] = exported.records.size();
    write_file(o.output, to_tsv(exported));
    emit_json(o.output + ".json", doc);
    return kOk;
}

FitOptions fit_options(const Options& o) {
    FitOptions f;
    f.k = o.clusters;
    f.d_remove = o.remove;
    f.seed = o.seed;
    f.kmeans.max_iter = o.max_iter;
    f.kmeans.tol = o.tol;
    return f;
}

int cmd_fit(const Options& o) {
    require(!o.output.empty(), "--output is required");
    require(o.clusters >= 1, "--clusters must be at least 1");
    require(o.max_iter >= 1, "--max-iter must be at least 1");
    require(o.tol >= 0.0, "--tol must be non-negative");
    const auto m = load_matrix(o.input);
    auto t = fit_transform(m, fit_options(o));
    t.provenance["input"] = o.input;
    save_transform(t, o.output);
    return kOk;
}

int cmd_apply(const Options& o) {
    require(!o.output.empty(), "--output is required");
    require(!o.transform.empty(), "--transform is required");
    const auto t = load_transform(o.transform);
    const auto m = load_matrix(o.input);
    auto out = apply_transform(t, m);
    Json prov = out.provenance();
    prov["isotropy_transform"]["transform_file"] = o.transform;
    prov["isotropy_transform"]["input"] = o.input;
    save_matrix(out.with_provenance(std::move(prov)), o.output);
    return kOk;
}

int cmd_sts(const Options& o) {
    require(!o.sts.empty(), "--sts is required");
    const auto setting = parse_setting(o.setting);
    if (setting == StsSetting::Baseline) {
        require(o.transform.empty(), "--transform is not used with --setting baseline");
    }
    if (setting == StsSetting::ZeroShot) {
        require(!o.transform.empty(), "--setting zero-shot requires --transform");
    }
    require(o.clusters >= 1, "--clusters must be at least 1");

    const auto m = load_matrix(o.input);
    const auto ds = load_sts(o.sts, m);
    std::optional<IsotropyTransform> t;
    if (!o.transform.empty()) {
        t = load_transform(o.transform);
    } else if (setting == StsSetting::Individual) {
        t = fit_transform(m, fit_options(o));
    }
    const auto result = evaluate_sts(m, ds, t ? &*t : nullptr, setting);

    Json doc;
    doc["command"] = "sts";
    auto params = common_parameters(o);
    params["sts"] = o.sts;
    params["setting"] = o.setting;
    params["transform"] = o.transform;
    if (setting == StsSetting::Individual && o.transform.empty()) {
        params["clusters"] = o.clusters;
        params["remove"] = o.remove;
    }
    doc["parameters"] = std::move(params);
    doc["result"] = to_json(result);
    emit_json(o.output, doc);
    if (!o.output.empty()) write_file(o.output + ".pairs.tsv", pairs_tsv(result));
    return kOk;
}

int cmd_synth(const Options& o) {
    require(!o.output.empty(), "--output is required");
    require(o.rows > 0 && o.dims > 0, "--rows and --dims must be positive");
    Json prov;
    prov["generator"] = o.kind;
    prov["seed"] = o.seed;
    if (o.kind == "isotropic") {
        auto m = synth::isotropic(o.rows, o.dims, o.seed, 1.0, o.language);
        if (o.offset != 0.0) m = synth::offset(m, o.offset);
        prov["rows"] = o.rows;
        prov["dims"] = o.dims;
        prov["offset_per_coordinate"] = o.offset;
        save_matrix(m.with_provenance(prov), o.output);
    } else if (o.kind == "anisotropic") {
        synth::AnisotropicParams p;
        p.rows = o.rows;
        p.dims = o.dims;
        p.clusters = o.clusters;
        p.outlier_dims = o.outlier_dims;
        p.structure_seed = o.structure_seed;
        p.sample_seed = o.seed;
        p.language = o.language;
        require(p.dominant_per_cluster < p.dims, "--dims too small for the anisotropic generator");
        require(p.clusters <= p.rows, "--clusters exceeds --rows");
        auto corpus = synth::anisotropic(p);
        prov["rows"] = o.rows;
        prov["dims"] = o.dims;
        prov["clusters"] = o.clusters;
        prov["structure_seed"] = o.structure_seed;
        prov["outlier_dims"] = o.outlier_dims;
        save_matrix(corpus.matrix.with_provenance(prov), o.output);
        save_frequency_table(corpus.frequencies, o.output + ".freq.tsv");
    } else if (o.kind == "outliers") {
        synth::OutlierParams p;
        p.rows = o.rows;
        p.dims = o.dims;
        p.outlier_dims = o.outlier_dims;
        p.magnitude_sigmas = o.magnitude;
        p.seed = o.seed;
        p.language = o.language;
        require(p.dims >= 2, "--dims must be at least 2");
        for (auto d : p.outlier_dims) require(d < p.dims, "--outlier-dims entry exceeds --dims");
        prov["rows"] = o.rows;
        prov["dims"] = o.dims;
        prov["outlier_dims"] = o.outlier_dims;
        prov["magnitude_sigmas"] = o.magnitude;
        save_matrix(synth::planted_outliers(p).with_provenance(prov), o.output);
    } else if (o.kind == "sts") {
        synth::StsParams p;
        p.pairs = o.pairs;
        p.dims = o.dims;
        p.monotone = o.monotone;
        p.structure_seed = o.structure_seed;
        p.seed = o.seed;
        p.language = o.language;
        require(p.pairs >= 2, "--pairs must be at least 2");
        require(p.signal_dims + p.dominant_dirs <= p.dims, "--dims too small for the STS generator");
        auto bench = synth::sts_benchmark(p);
        prov["pairs"] = o.pairs;
        prov["dims"] = o.dims;
        prov["monotone"] = o.monotone;
        prov["structure_seed"] = o.structure_seed;
        save_matrix(bench.matrix.with_provenance(prov), o.output);
        save_sts(bench.dataset, o.output + ".sts.tsv");
    } else {
        throw ArgumentError("unknown --kind " + o.kind);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embedding-space geometry analysis and cluster-based isotropy enhancement"};
    app.require_subcommand(1);
    Options o;

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--input", o.input, "Embedding file (EMB1)")->required();
    };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "RNG seed"); };
    auto add_fit = [&](CLI::App* sub) {
        sub->add_option("--clusters", o.clusters, "k-means cluster count")->capture_default_str();
        sub->add_option("--remove", o.remove, "Dominant directions removed per cluster")
            ->capture_default_str();
        sub->add_option("--max-iter", o.max_iter, "k-means iteration budget")->capture_default_str();
        sub->add_option("--tol", o.tol, "k-means centroid movement tolerance")->capture_default_str();
    };

    auto* metrics = app.add_subcommand("metrics", "I_Cos, I_PC and per-dimension contributions");
    add_input(metrics);
    add_seed(metrics);
    metrics->add_option("--output", o.output, "Report JSON (stdout if omitted)");
    metrics->add_option("--pairs", o.pairs, "Sampled pairs")->capture_default_str();
    metrics->add_option("--top-k", o.top_k, "Dimensions listed in the report")->capture_default_str();

    auto* outliers = app.add_subcommand("outliers", "Outlier dimensions of the mean representation");
    add_input(outliers);
    add_seed(outliers);
    outliers->add_option("--output", o.output, "Report JSON (stdout if omitted)");
    outliers->add_option("--samples", o.samples, "Rows averaged")->capture_default_str();
    outliers->add_option("--threshold-sigmas", o.threshold_sigmas, "Outlier threshold in sigmas")
        ->capture_default_str();

    auto* freqbias = app.add_subcommand("freqbias", "Export word frequency vs top-2 PC coordinates");
    add_input(freqbias);
    freqbias->add_option("--output", o.output, "TSV word/freq/pc1/pc2")->required();
    freqbias->add_option("--freq-table", o.freq_table, "word<TAB>per_million table");

    auto* fit = app.add_subcommand("fit", "Fit a cluster-based isotropy transform");
    add_input(fit);
    add_seed(fit);
    fit->add_option("--output", o.output, "Transform file")->required();
    add_fit(fit);

    auto* apply = app.add_subcommand("apply", "Apply a fitted transform to an embedding file");
    add_input(apply);
    apply->add_option("--transform", o.transform, "Transform file")->required();
    apply->add_option("--output", o.output, "Output embedding file")->required();

    auto* sts = app.add_subcommand("sts", "Evaluate STS pairs by pooled cosine similarity");
    add_input(sts);
    add_seed(sts);
    sts->add_option("--sts", o.sts, "Pair file s1_start/s1_end/s2_start/s2_end/score")->required();
    sts->add_option("--setting", o.setting, "baseline | individual | zero-shot")
        ->check(CLI::IsMember({"baseline", "individual", "zero-shot"}))
        ->capture_default_str();
    sts->add_option("--transform", o.transform, "Fitted transform (required for zero-shot)");
    sts->add_option("--output", o.output, "Result JSON (stdout if omitted)");
    add_fit(sts);

    auto* synth = app.add_subcommand("synth", "Generate seeded synthetic fixtures");
    add_seed(synth);
    synth->add_option("--output", o.output, "Output embedding file")->required();
    synth->add_option("--kind", o.kind, "isotropic | anisotropic | outliers | sts")
        ->check(CLI::IsMember({"isotropic", "anisotropic", "outliers", "sts"}))
        ->capture_default_str();
    synth->add_option("--rows", o.rows, "Rows (default depends on --kind)");
    synth->add_option("--dims", o.dims, "Dimensions (default depends on --kind)");
    synth->add_option("--clusters", o.clusters, "Generating clusters (anisotropic)")
        ->capture_default_str();
    synth->add_option("--offset", o.offset, "Per-coordinate offset (isotropic)");
    synth->add_option("--outlier-dims", o.outlier_dims, "Planted outlier dimensions");
    synth->add_option("--magnitude", o.magnitude, "Outlier magnitude in sigmas")
        ->capture_default_str();
    synth->add_option("--structure-seed", o.structure_seed, "Seed of the shared geometry")
        ->capture_default_str();
    synth->add_option("--pairs", o.pairs, "Sentence pairs (sts)");
    synth->add_option("--language", o.language, "Language tag")->capture_default_str();
    synth->add_flag("--monotone", o.monotone, "Gold scores follow pooled cosine exactly (sts)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    if (synth->parsed()) {
        // Shape defaults depend on the generator.
        if (synth->count("--pairs") == 0) o.pairs = 300;
        if (synth->count("--rows") == 0) {
            o.rows = o.kind == "anisotropic" ? 7000 : o.kind == "outliers" ? 5000 : 10000;
        }
        if (synth->count("--dims") == 0) {
            o.dims = o.kind == "anisotropic" ? 64 : o.kind == "isotropic" ? 32 : 128;
        }
    }

    try {
        if (metrics->parsed()) return cmd_metrics(o);
        if (outliers->parsed()) return cmd_outliers(o);
        if (freqbias->parsed()) return cmd_freqbias(o);
        if (fit->parsed()) return cmd_fit(o);
        if (apply->parsed()) return cmd_apply(o);
        if (sts->parsed()) return cmd_sts(o);
        if (synth->parsed()) return cmd_synth(o);
    } catch (const Error& e) {
        std::cerr << "cwrgeom: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "cwrgeom: " << e.what() << "\n";
        return kNumeric;
    }
    return kValidation;
}
