#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace cwrgeom {

/// Row-major dense matrix; one embedding per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Json = nlohmann::ordered_json;

/// Per-row metadata carried in the ".meta.jsonl" sidecar.
struct TokenMeta {
    std::string token;
    std::int64_t word_index = -1;  ///< -1 when the row belongs to no word
    std::int64_t sentence_index = 0;
    std::optional<double> frequency_per_million;

    bool operator==(const TokenMeta&) const = default;
};

/// Half-open interval [start, end) of matrix rows.
struct RowRange {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const { return end > start ? end - start : 0; }
    bool empty() const { return end <= start; }
    bool overlaps(const RowRange& other) const {
        return start < other.end && other.start < end;
    }
    bool operator==(const RowRange&) const = default;
};

/**
 * An immutable M x d matrix of token representations with per-row metadata.
 *
 * Construction validates every invariant: M > 0, d > 0, all entries finite,
 * one TokenMeta per row, sentence indices non-decreasing and word indices
 * non-decreasing within a sentence (rows with word_index -1 are ignored by
 * that check). The payload is shared between copies, so copying a matrix or
 * deriving one with different tags does not duplicate the data.
 */
class EmbeddingMatrix {
public:
    /// Wraps `data` with placeholder metadata (empty token, word -1, sentence 0).
    explicit EmbeddingMatrix(Matrix data);
    EmbeddingMatrix(Matrix data, std::vector<TokenMeta> meta, std::string language = {},
                    std::string model_id = {});

    const Matrix& data() const { return *data_; }
    std::size_t rows() const { return static_cast<std::size_t>(data_->rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(data_->cols()); }
    const std::vector<TokenMeta>& meta() const { return *meta_; }
    const std::string& language() const { return language_; }
    const std::string& model_id() const { return model_id_; }
    /// Free-form provenance carried in the ".info.json" companion file.
    const Json& provenance() const { return provenance_; }

    /// Same metadata and tags, new payload of identical shape.
    EmbeddingMatrix with_data(Matrix data) const;
    EmbeddingMatrix with_meta(std::vector<TokenMeta> meta) const;
    EmbeddingMatrix with_tags(std::string language, std::string model_id) const;
    EmbeddingMatrix with_provenance(Json provenance) const;

    static std::vector<TokenMeta> placeholder_meta(std::size_t rows);

private:
    EmbeddingMatrix() = default;
    void validate() const;

    std::shared_ptr<const Matrix> data_;
    std::shared_ptr<const std::vector<TokenMeta>> meta_;
    std::string language_;
    std::string model_id_;
    Json provenance_ = Json::object();
};

/// Bit-exact equality of payload, metadata and tags.
bool identical(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

// ---------------------------------------------------------------------------
// Embedding files

inline constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 28;

std::filesystem::path sidecar_path(const std::filesystem::path& embedding_path);
std::filesystem::path info_path(const std::filesystem::path& embedding_path);

/// Reads the binary payload, the ".meta.jsonl" sidecar and, if present, the
/// ".info.json" companion holding language/model tags and provenance.
EmbeddingMatrix load_matrix(const std::filesystem::path& path);

/// Writes payload as little-endian f32 plus sidecar and companion. Values are
/// rounded to f32; matrices loaded from disk therefore round-trip bit-exactly.
void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Words and frequencies

/// ASCII case folding; bytes >= 0x80 pass through unchanged.
std::string casefold(std::string_view s);

/// One occurrence of a word: the contiguous rows sharing (sentence, word).
struct WordOccurrence {
    std::string text;  ///< case-folded surface form rebuilt from sub-tokens
    std::int64_t sentence_index = 0;
    std::int64_t word_index = 0;
    RowRange rows;
};

/// Groups rows by (sentence_index, word_index); rows with word_index -1 are skipped.
std::vector<WordOccurrence> word_occurrences(const EmbeddingMatrix& m);

/// Joins sub-token strings, dropping "##" prefixes and the U+2581 / U+0120
/// word-start markers used by sentencepiece and byte-level BPE vocabularies.
std::string join_subtokens(const std::vector<std::string_view>& pieces);

using FrequencyTable = std::unordered_map<std::string, double>;

FrequencyTable load_frequency_table(const std::filesystem::path& path);
void save_frequency_table(const FrequencyTable& table, const std::filesystem::path& path);

struct FrequencyAttachment {
    EmbeddingMatrix matrix;
    std::size_t n_words = 0;    ///< word occurrences considered
    std::size_t n_matched = 0;  ///< occurrences found in the table
    std::vector<std::string> unmatched;  ///< distinct unmatched words, first-seen order

    double coverage() const {
        return n_words == 0 ? 0.0 : static_cast<double>(n_matched) / static_cast<double>(n_words);
    }
};

/// Sets frequency_per_million on every sub-token row of each word found in
/// `table`; rows of unmatched words keep their previous value.
FrequencyAttachment attach_frequencies(const EmbeddingMatrix& m, const FrequencyTable& table);

// ---------------------------------------------------------------------------
// STS pair files

struct StsPair {
    RowRange first;
    RowRange second;
    double gold = 0.0;
};

struct StsDataset {
    std::vector<StsPair> pairs;
    std::size_t size() const { return pairs.size(); }
};

/// Throws ConsistencyError for bad ranges and DataError for scores outside [0, 5].
void validate_sts(const StsDataset& ds, std::size_t rows);

StsDataset load_sts(const std::filesystem::path& path, const EmbeddingMatrix& m);
void save_sts(const StsDataset& ds, const std::filesystem::path& path);

}  // namespace cwrgeom
