#include "cwrgeom/isotropy_transform.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cwrgeom/error.hpp"

namespace cwrgeom {

namespace {

constexpr double kOrthonormalTol = 1e-8;
constexpr std::string_view kFormatName = "cwrgeom.isotropy-transform";

void append_hex(std::string& out, double value) {
    static constexpr char kDigits[] = "0123456789abcdef";
    auto bits = std::bit_cast<std::uint64_t>(value);
    for (int byte = 0; byte < 8; ++byte) {
        const auto b = static_cast<unsigned>(bits & 0xFFu);
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xFu]);
        bits >>= 8;
    }
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::vector<double> decode_hex(const std::string& text) {
    if (text.size() % 16 != 0) throw FormatError("hex block length is not a multiple of 16");
    std::vector<double> out(text.size() / 16);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int byte = 0; byte < 8; ++byte) {
            const int hi = hex_value(text[i * 16 + byte * 2]);
            const int lo = hex_value(text[i * 16 + byte * 2 + 1]);
            if (hi < 0 || lo < 0) throw FormatError("invalid hex digit in transform block");
            bits |= static_cast<std::uint64_t>(hi * 16 + lo) << (8 * byte);
        }
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

}  // namespace

IsotropyTransform fit_transform(const EmbeddingMatrix& m, const FitOptions& options) {
    const Matrix& w = m.data();
    if (options.k == 0) throw ArgumentError("cluster count must be at least 1");
    if (options.k > m.rows()) {
        throw ArgumentError("cluster count " + std::to_string(options.k) + " exceeds row count " +
                            std::to_string(m.rows()));
    }
    if (options.d_remove > m.dims()) {
        throw ArgumentError("cannot remove " + std::to_string(options.d_remove) +
                            " directions from " + std::to_string(m.dims()) + " dimensions");
    }

    const auto km = kmeans(w, options.k, options.seed, options.kmeans);

    std::vector<std::vector<Eigen::Index>> members(options.k);
    for (std::size_t i = 0; i < km.assignments.size(); ++i) {
        members[km.assignments[i]].push_back(static_cast<Eigen::Index>(i));
    }

    IsotropyTransform t;
    t.dims = m.dims();
    t.d_remove = options.d_remove;
    for (std::size_t c = 0; c < options.k; ++c) {
        const auto& idx = members[c];
        if (idx.size() < options.d_remove + 1) {
            throw FitError("cluster " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                           " members; removing " + std::to_string(options.d_remove) +
                           " directions needs at least " + std::to_string(options.d_remove + 1) +
                           " (use a smaller --remove or --clusters)");
        }
        TransformCluster cluster;
        cluster.centroid = km.centroids.row(static_cast<Eigen::Index>(c)).transpose();
        cluster.components.resize(static_cast<Eigen::Index>(options.d_remove), w.cols());
        if (options.d_remove > 0) {
            Matrix centered(static_cast<Eigen::Index>(idx.size()), w.cols());
            for (std::size_t r = 0; r < idx.size(); ++r) {
                centered.row(static_cast<Eigen::Index>(r)) =
                    w.row(idx[r]) - cluster.centroid.transpose();
            }
            const auto eig = symmetric_eigen((centered.transpose() * centered) /
                                             static_cast<double>(idx.size()));
            cluster.components = eig.vectors.topRows(static_cast<Eigen::Index>(options.d_remove));
        }
        t.clusters.push_back(std::move(cluster));
    }

    Json kmeans_info;
    kmeans_info["max_iter"] = options.kmeans.max_iter;
    kmeans_info["tol"] = options.kmeans.tol;
    kmeans_info["init"] = "k-means++";
    kmeans_info["iterations"] = km.iterations;
    kmeans_info["converged"] = km.converged;
    kmeans_info["inertia"] = km.inertia;
    Json sizes = Json::array();
    for (const auto& idx : members) sizes.push_back(idx.size());

    t.provenance["source_language"] = m.language();
    t.provenance["source_model"] = m.model_id();
    t.provenance["source_rows"] = m.rows();
    t.provenance["seed"] = options.seed;
    t.provenance["clusters"] = options.k;
    t.provenance["d_remove"] = options.d_remove;
    t.provenance["kmeans"] = std::move(kmeans_info);
    t.provenance["cluster_sizes"] = std::move(sizes);
    t.provenance["zero_shot_policy"] = "reuse source centroids and components";
    return t;
}

AppliedTransform apply_transform_with_assignments(const IsotropyTransform& t,
                                                  const EmbeddingMatrix& m) {
    if (m.dims() != t.dims) {
        throw ArgumentError("transform expects " + std::to_string(t.dims) +
                            " dimensions, matrix has " + std::to_string(m.dims()));
    }
    if (t.clusters.empty()) throw ArgumentError("transform has no clusters");
    Matrix centroids(static_cast<Eigen::Index>(t.k()), static_cast<Eigen::Index>(t.dims));
    for (std::size_t c = 0; c < t.k(); ++c) {
        centroids.row(static_cast<Eigen::Index>(c)) = t.clusters[c].centroid.transpose();
    }

    const Matrix& w = m.data();
    Matrix out(w.rows(), w.cols());
    std::vector<std::size_t> assignments(m.rows());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const auto c = nearest_centroid(w.row(i), centroids);
        assignments[static_cast<std::size_t>(i)] = c;
        const auto& cluster = t.clusters[c];
        Eigen::RowVectorXd x = w.row(i) - cluster.centroid.transpose();
        if (cluster.components.rows() > 0) {
            const Eigen::VectorXd coeffs = cluster.components * x.transpose();
            x -= coeffs.transpose() * cluster.components;
        }
        out.row(i) = x;
    }

    Json prov = m.provenance().is_object() ? m.provenance() : Json::object();
    Json applied;
    applied["source_language"] = t.source_language();
    applied["target_language"] = m.language();
    applied["cross_language"] = t.source_language() != m.language();
    applied["transform"] = t.provenance;
    prov["isotropy_transform"] = std::move(applied);
    return {m.with_data(std::move(out)).with_provenance(std::move(prov)), std::move(assignments)};
}

EmbeddingMatrix apply_transform(const IsotropyTransform& t, const EmbeddingMatrix& m) {
    return apply_transform_with_assignments(t, m).matrix;
}

void validate_transform(const IsotropyTransform& t) {
    if (t.clusters.empty()) throw FormatError("transform must have at least one cluster");
    if (t.dims == 0) throw FormatError("transform dimensionality must be positive");
    if (t.d_remove > t.dims) throw FormatError("d_remove exceeds dimensionality");
    const auto d = static_cast<Eigen::Index>(t.dims);
    const auto r = static_cast<Eigen::Index>(t.d_remove);
    for (std::size_t c = 0; c < t.k(); ++c) {
        const auto& cl = t.clusters[c];
        if (cl.centroid.size() != d || cl.components.rows() != r || cl.components.cols() != d) {
            throw FormatError("cluster " + std::to_string(c) + " has mismatched shapes");
        }
        if (!cl.centroid.allFinite() || !cl.components.allFinite()) {
            throw FormatError("cluster " + std::to_string(c) + " contains NaN or Inf");
        }
        const Eigen::MatrixXd gram = cl.components * cl.components.transpose();
        const double err = (gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
        if (r > 0 && err > kOrthonormalTol) {
            throw FormatError("cluster " + std::to_string(c) +
                              " components are not orthonormal (max error " +
                              std::to_string(err) + ")");
        }
    }
}

void save_transform(const IsotropyTransform& t, const std::filesystem::path& path) {
    validate_transform(t);
    Json doc;
    doc["format"] = kFormatName;
    doc["version"] = kTransformVersion;
    doc["k"] = t.k();
    doc["d"] = t.dims;
    doc["d_remove"] = t.d_remove;
    doc["encoding"] = "f64le-hex";
    doc["provenance"] = t.provenance;
    Json blocks = Json::array();
    for (const auto& cl : t.clusters) {
        std::string hex;
        hex.reserve(16 * t.dims * (1 + t.d_remove));
        for (Eigen::Index i = 0; i < cl.centroid.size(); ++i) append_hex(hex, cl.centroid[i]);
        for (Eigen::Index r = 0; r < cl.components.rows(); ++r) {
            for (Eigen::Index c = 0; c < cl.components.cols(); ++c) {
                append_hex(hex, cl.components(r, c));
            }
        }
        blocks.push_back(std::move(hex));
    }
    doc["clusters"] = std::move(blocks);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

IsotropyTransform load_transform(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open transform: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();

    IsotropyTransform t;
    try {
        const auto doc = Json::parse(ss.str());
        if (doc.value("format", std::string{}) != kFormatName) {
            throw FormatError(path.string() + ": not an isotropy transform file");
        }
        const auto version = doc.at("version").get<std::uint32_t>();
        if (version != kTransformVersion) {
            throw FormatError(path.string() + ": unsupported transform version " +
                              std::to_string(version));
        }
        if (doc.value("encoding", std::string{}) != "f64le-hex") {
            throw FormatError(path.string() + ": unsupported block encoding");
        }
        const auto k = doc.at("k").get<std::size_t>();
        t.dims = doc.at("d").get<std::size_t>();
        t.d_remove = doc.at("d_remove").get<std::size_t>();
        t.provenance = doc.value("provenance", Json::object());
        const auto& blocks = doc.at("clusters");
        if (!blocks.is_array() || blocks.size() != k) {
            throw FormatError(path.string() + ": expected " + std::to_string(k) + " cluster blocks");
        }
        if (t.d_remove > t.dims) throw FormatError(path.string() + ": d_remove exceeds d");
        const auto d = static_cast<Eigen::Index>(t.dims);
        const auto r = static_cast<Eigen::Index>(t.d_remove);
        for (const auto& block : blocks) {
            const auto values = decode_hex(block.get<std::string>());
            if (values.size() != t.dims * (1 + t.d_remove)) {
                throw FormatError(path.string() + ": cluster block has wrong length");
            }
            TransformCluster cl;
            cl.centroid = Eigen::Map<const Vector>(values.data(), d);
            cl.components = Eigen::Map<const Matrix>(values.data() + d, r, d);
            t.clusters.push_back(std::move(cl));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    validate_transform(t);
    return t;
}

}  // namespace cwrgeom
