#include "cwrgeom/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "cwrgeom/error.hpp"

namespace cwrgeom {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto bits = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>(bits & 0xFFu));
        bits = static_cast<U>(bits >> 8);
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    using U = std::make_unsigned_t<T>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bits |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    }
    return static_cast<T>(bits);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto tab = line.find('\t', pos);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return fields;
}

std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
    return path.string() + ":" + std::to_string(line_no);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void check_finite(const Matrix& data) {
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        if (!data.row(r).allFinite()) {
            throw DataError("row " + std::to_string(r) + " contains NaN or Inf");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------

EmbeddingMatrix::EmbeddingMatrix(Matrix data)
    : EmbeddingMatrix(data, placeholder_meta(static_cast<std::size_t>(data.rows()))) {}

EmbeddingMatrix::EmbeddingMatrix(Matrix data, std::vector<TokenMeta> meta, std::string language,
                                 std::string model_id)
    : data_(std::make_shared<const Matrix>(std::move(data))),
      meta_(std::make_shared<const std::vector<TokenMeta>>(std::move(meta))),
      language_(std::move(language)),
      model_id_(std::move(model_id)) {
    validate();
}

std::vector<TokenMeta> EmbeddingMatrix::placeholder_meta(std::size_t rows) {
    return std::vector<TokenMeta>(rows);
}

void EmbeddingMatrix::validate() const {
    if (data_->rows() == 0 || data_->cols() == 0) {
        throw ConsistencyError("embedding matrix must have at least one row and one column");
    }
    if (meta_->size() != rows()) {
        throw ConsistencyError("metadata has " + std::to_string(meta_->size()) +
                               " entries for " + std::to_string(rows()) + " rows");
    }
    check_finite(*data_);
    const auto& meta = *meta_;
    std::int64_t last_word = -1;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        const auto& t = meta[i];
        if (t.frequency_per_million && !(*t.frequency_per_million >= 0.0 &&
                                         std::isfinite(*t.frequency_per_million))) {
            throw DataError("row " + std::to_string(i) + " has an invalid frequency");
        }
        if (i > 0 && t.sentence_index < meta[i - 1].sentence_index) {
            throw ConsistencyError("sentence index decreases at row " + std::to_string(i));
        }
        if (i == 0 || t.sentence_index != meta[i - 1].sentence_index) last_word = -1;
        if (t.word_index >= 0) {
            if (t.word_index < last_word) {
                throw ConsistencyError("word index decreases within sentence at row " +
                                       std::to_string(i));
            }
            last_word = t.word_index;
        }
    }
}

EmbeddingMatrix EmbeddingMatrix::with_data(Matrix data) const {
    if (data.rows() != data_->rows() || data.cols() != data_->cols()) {
        throw ConsistencyError("replacement payload has a different shape");
    }
    EmbeddingMatrix out = *this;
    out.data_ = std::make_shared<const Matrix>(std::move(data));
    check_finite(*out.data_);
    return out;
}

EmbeddingMatrix EmbeddingMatrix::with_meta(std::vector<TokenMeta> meta) const {
    EmbeddingMatrix out = *this;
    out.meta_ = std::make_shared<const std::vector<TokenMeta>>(std::move(meta));
    out.validate();
    return out;
}

EmbeddingMatrix EmbeddingMatrix::with_tags(std::string language, std::string model_id) const {
    EmbeddingMatrix out = *this;
    out.language_ = std::move(language);
    out.model_id_ = std::move(model_id);
    return out;
}

EmbeddingMatrix EmbeddingMatrix::with_provenance(Json provenance) const {
    EmbeddingMatrix out = *this;
    out.provenance_ = std::move(provenance);
    return out;
}

bool identical(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    if (a.rows() != b.rows() || a.dims() != b.dims()) return false;
    const auto bytes = a.rows() * a.dims() * sizeof(double);
    return std::memcmp(a.data().data(), b.data().data(), bytes) == 0 && a.meta() == b.meta() &&
           a.language() == b.language() && a.model_id() == b.model_id();
}

// ---------------------------------------------------------------------------

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
    return std::filesystem::path(p.string() + ".meta.jsonl");
}

std::filesystem::path info_path(const std::filesystem::path& p) {
    return std::filesystem::path(p.string() + ".info.json");
}

namespace {

std::vector<TokenMeta> read_sidecar(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sidecar: " + path.string());
    std::vector<TokenMeta> meta;
    meta.reserve(expected);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_cr(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(where(path, line_no) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("token") || !obj.contains("word") ||
            !obj.contains("sent")) {
            throw FormatError(where(path, line_no) + ": expected {\"token\", \"word\", \"sent\"}");
        }
        TokenMeta t;
        try {
            t.token = obj.at("token").get<std::string>();
            t.word_index = obj.at("word").get<std::int64_t>();
            t.sentence_index = obj.at("sent").get<std::int64_t>();
            if (auto it = obj.find("freq"); it != obj.end() && !it->is_null()) {
                t.frequency_per_million = it->get<double>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(where(path, line_no) + ": " + e.what());
        }
        meta.push_back(std::move(t));
    }
    if (meta.size() != expected) {
        throw ConsistencyError("sidecar " + path.string() + " has " + std::to_string(meta.size()) +
                               " rows, embedding file declares " + std::to_string(expected));
    }
    return meta;
}

}  // namespace

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
    const std::string bytes = read_all(path);
    if (bytes.size() < kEmbeddingHeaderBytes) {
        throw FormatError(path.string() + ": truncated header");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kEmbeddingMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad magic (expected EMB1)");
    }
    const auto version = get_le<std::uint32_t>(p + 4);
    const auto rows = get_le<std::uint64_t>(p + 8);
    const auto dims = get_le<std::uint32_t>(p + 16);
    const auto dtype = p[20];
    if (version != kEmbeddingVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    }
    if (dtype != kDtypeF32) {
        throw FormatError(path.string() + ": unsupported dtype " + std::to_string(dtype));
    }
    for (std::size_t i = 21; i < kEmbeddingHeaderBytes; ++i) {
        if (p[i] != 0) throw FormatError(path.string() + ": reserved header bytes are not zero");
    }
    if (rows == 0 || dims == 0) throw FormatError(path.string() + ": zero rows or dimensions");
    const std::size_t payload = bytes.size() - kEmbeddingHeaderBytes;
    if (payload % (4ull * dims) != 0 || payload / (4ull * dims) != rows) {
        throw ConsistencyError(path.string() + ": header declares " + std::to_string(rows) + "x" +
                               std::to_string(dims) + " but payload holds " +
                               std::to_string(payload) + " bytes");
    }

    Matrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
    const unsigned char* q = p + kEmbeddingHeaderBytes;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c, q += 4) {
            data(r, c) = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(q)));
        }
        if (!data.row(r).allFinite()) {
            throw DataError(path.string() + ": row " + std::to_string(r) + " contains NaN or Inf");
        }
    }

    auto meta = read_sidecar(sidecar_path(path), rows);
    std::string language, model_id;
    Json provenance = Json::object();
    if (auto info = info_path(path); std::filesystem::exists(info)) {
        try {
            auto j = Json::parse(read_all(info));
            language = j.value("language", "");
            model_id = j.value("model_id", "");
            if (j.contains("provenance")) provenance = j["provenance"];
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(info.string() + ": " + e.what());
        }
    }
    return EmbeddingMatrix(std::move(data), std::move(meta), std::move(language),
                           std::move(model_id))
        .with_provenance(std::move(provenance));
}

void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    const Matrix& data = m.data();
    std::string out;
    out.reserve(kEmbeddingHeaderBytes + m.rows() * m.dims() * 4);
    out.append(kEmbeddingMagic, 4);
    put_le<std::uint32_t>(out, kEmbeddingVersion);
    put_le<std::uint64_t>(out, m.rows());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dims()));
    out.push_back(static_cast<char>(kDtypeF32));
    out.append(7, '\0');
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            const auto f = static_cast<float>(data(r, c));
            if (!std::isfinite(f)) {
                throw DataError("row " + std::to_string(r) + " is not representable as finite f32");
            }
            put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
        }
    }

    std::string sidecar;
    for (const auto& t : m.meta()) {
        Json row;
        row["token"] = t.token;
        row["word"] = t.word_index;
        row["sent"] = t.sentence_index;
        if (t.frequency_per_million) row["freq"] = *t.frequency_per_million;
        sidecar += row.dump();
        sidecar += '\n';
    }

    Json info;
    info["language"] = m.language();
    info["model_id"] = m.model_id();
    info["provenance"] = m.provenance();

    write_text(path, out);
    write_text(sidecar_path(path), sidecar);
    write_text(info_path(path), info.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

std::string casefold(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

std::string join_subtokens(const std::vector<std::string_view>& pieces) {
    static constexpr std::string_view kMarkers[] = {"##", "\xE2\x96\x81", "\xC4\xA0"};
    std::string out;
    for (auto piece : pieces) {
        for (auto marker : kMarkers) {
            if (piece.starts_with(marker)) {
                piece.remove_prefix(marker.size());
                break;
            }
        }
        out.append(piece);
    }
    return out;
}

std::vector<WordOccurrence> word_occurrences(const EmbeddingMatrix& m) {
    std::vector<WordOccurrence> words;
    const auto& meta = m.meta();
    std::size_t i = 0;
    while (i < meta.size()) {
        if (meta[i].word_index < 0) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        std::vector<std::string_view> pieces{meta[i].token};
        while (j < meta.size() && meta[j].sentence_index == meta[i].sentence_index &&
               meta[j].word_index == meta[i].word_index) {
            pieces.emplace_back(meta[j].token);
            ++j;
        }
        words.push_back({casefold(join_subtokens(pieces)), meta[i].sentence_index,
                         meta[i].word_index, RowRange{i, j}});
        i = j;
    }
    return words;
}

FrequencyTable load_frequency_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open frequency table: " + path.string());
    FrequencyTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim_cr(line);
        if (view.empty()) continue;
        auto fields = split_tabs(view);
        double rate = 0.0;
        if (fields.size() != 2 || !parse_number(fields[1], rate)) {
            throw FormatError(where(path, line_no) + ": expected word<TAB>per_million");
        }
        if (!(rate >= 0.0) || !std::isfinite(rate)) {
            throw DataError(where(path, line_no) + ": negative or non-finite frequency");
        }
        table[casefold(fields[0])] = rate;
    }
    return table;
}

void save_frequency_table(const FrequencyTable& table, const std::filesystem::path& path) {
    std::map<std::string, double> sorted(table.begin(), table.end());
    std::string out;
    char buf[64];
    for (const auto& [word, rate] : sorted) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, rate);
        out += word;
        out += '\t';
        out.append(buf, end);
        out += '\n';
    }
    write_text(path, out);
}

FrequencyAttachment attach_frequencies(const EmbeddingMatrix& m, const FrequencyTable& table) {
    auto meta = m.meta();
    FrequencyAttachment result{m, 0, 0, {}};
    std::unordered_set<std::string> seen_unmatched;
    for (const auto& w : word_occurrences(m)) {
        ++result.n_words;
        auto it = table.find(w.text);
        if (it == table.end()) {
            if (seen_unmatched.insert(w.text).second) result.unmatched.push_back(w.text);
            continue;
        }
        ++result.n_matched;
        for (std::size_t r = w.rows.start; r < w.rows.end; ++r) {
            meta[r].frequency_per_million = it->second;
        }
    }
    result.matrix = m.with_meta(std::move(meta));
    return result;
}

// ---------------------------------------------------------------------------

void validate_sts(const StsDataset& ds, std::size_t rows) {
    for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
        const auto& p = ds.pairs[i];
        for (const auto* r : {&p.first, &p.second}) {
            if (r->empty() || r->end > rows) {
                throw ConsistencyError("pair " + std::to_string(i) + ": range [" +
                                       std::to_string(r->start) + ", " + std::to_string(r->end) +
                                       ") is empty or outside " + std::to_string(rows) + " rows");
            }
        }
        if (p.first.overlaps(p.second)) {
            throw ConsistencyError("pair " + std::to_string(i) + ": sentence ranges overlap");
        }
        if (!(p.gold >= 0.0 && p.gold <= 5.0)) {
            throw DataError("pair " + std::to_string(i) + ": gold score outside [0, 5]");
        }
    }
}

StsDataset load_sts(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open STS pair file: " + path.string());
    StsDataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim_cr(line);
        if (view.empty()) continue;
        auto f = split_tabs(view);
        StsPair p;
        if (f.size() != 5 || !parse_number(f[0], p.first.start) ||
            !parse_number(f[1], p.first.end) || !parse_number(f[2], p.second.start) ||
            !parse_number(f[3], p.second.end) || !parse_number(f[4], p.gold)) {
            throw FormatError(where(path, line_no) +
                              ": expected s1_start<TAB>s1_end<TAB>s2_start<TAB>s2_end<TAB>score");
        }
        ds.pairs.push_back(p);
    }
    validate_sts(ds, m.rows());
    return ds;
}

void save_sts(const StsDataset& ds, const std::filesystem::path& path) {
    std::string out;
    char buf[64];
    for (const auto& p : ds.pairs) {
        out += std::to_string(p.first.start) + '\t' + std::to_string(p.first.end) + '\t' +
               std::to_string(p.second.start) + '\t' + std::to_string(p.second.end) + '\t';
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.gold);
        out.append(buf, end);
        out += '\n';
    }
    write_text(path, out);
}

}  // namespace cwrgeom
