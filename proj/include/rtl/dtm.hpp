#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "preprocess.hpp"

namespace rtl {

enum class Weighting { Frequency, TfIdf };

inline const char* to_string(Weighting w) noexcept
{
    return w == Weighting::Frequency ? "frequency" : "tfidf";
}

inline Weighting weighting_from_string(std::string_view s)
{
    if (s == "frequency") return Weighting::Frequency;
    if (s == "tfidf") return Weighting::TfIdf;
    throw Error(ErrorKind::Parameter, "unknown weighting '" + std::string(s) + "'");
}

/// 64-bit FNV-1a over the terms in column order, each terminated by '\n'.
inline std::string vocabulary_hash(std::span<const std::string> vocabulary)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& term : vocabulary) {
        for (unsigned char c : term) feed(c);
        feed('\n');
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct SparseRowView {
    std::span<const std::uint32_t> index;
    std::span<const double> value;

    std::size_t size() const noexcept { return index.size(); }
};

/// Document-term matrix in compressed sparse row form. Explicit zeros are
/// never stored.
class DocumentTermMatrix {
public:
    DocumentTermMatrix() = default;

    std::size_t rows() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t cols() const noexcept { return vocabulary_.size(); }
    std::size_t nnz() const noexcept { return values_.size(); }
    Weighting weighting() const noexcept { return weighting_; }
    const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
    /// Inverse document frequencies used to build a TfIdf matrix; empty otherwise.
    const std::vector<double>& idf() const noexcept { return idf_; }
    std::string hash() const { return vocabulary_hash(vocabulary_); }

    SparseRowView row(std::size_t i) const
    {
        const auto b = row_ptr_[i];
        const auto e = row_ptr_[i + 1];
        return {std::span(col_index_).subspan(b, e - b), std::span(values_).subspan(b, e - b)};
    }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::uint32_t>& col_index() const noexcept { return col_index_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double at(std::size_t i, std::size_t j) const
    {
        const auto r = row(i);
        const auto it = std::lower_bound(r.index.begin(), r.index.end(), static_cast<std::uint32_t>(j));
        if (it == r.index.end() || *it != j) return 0.0;
        return r.value[static_cast<std::size_t>(it - r.index.begin())];
    }

    /// Number of rows with a nonzero entry in each column.
    std::vector<std::size_t> document_frequency() const
    {
        std::vector<std::size_t> df(cols(), 0);
        for (auto j : col_index_) ++df[j];
        return df;
    }

    /// Builds from per-row (column, value) lists; each list must be sorted by column.
    static DocumentTermMatrix from_rows(std::vector<std::string> vocabulary, Weighting weighting,
                                        const std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows,
                                        std::vector<double> idf = {})
    {
        DocumentTermMatrix m;
        m.vocabulary_ = std::move(vocabulary);
        m.weighting_ = weighting;
        m.idf_ = std::move(idf);
        m.row_ptr_.reserve(rows.size() + 1);
        for (const auto& r : rows) {
            std::uint32_t prev = 0;
            bool first = true;
            for (const auto& [j, v] : r) {
                if (j >= m.vocabulary_.size()) throw Error(ErrorKind::DimensionMismatch, "column index out of range");
                if (!first && j <= prev) throw Error(ErrorKind::Parameter, "row entries must be strictly increasing");
                if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::Parameter, "entries must be finite and >= 0");
                first = false;
                prev = j;
                if (v == 0.0) continue;
                m.col_index_.push_back(j);
                m.values_.push_back(v);
            }
            m.row_ptr_.push_back(m.values_.size());
        }
        return m;
    }

    /// Keeps the listed columns, in the given (ascending) order.
    DocumentTermMatrix select_columns(std::span<const std::size_t> keep) const
    {
        std::vector<std::int64_t> remap(cols(), -1);
        std::vector<std::string> vocab;
        std::vector<double> idf;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            remap[keep[k]] = static_cast<std::int64_t>(k);
            vocab.push_back(vocabulary_[keep[k]]);
            if (!idf_.empty()) idf.push_back(idf_[keep[k]]);
        }
        std::vector<std::vector<std::pair<std::uint32_t, double>>> out(rows());
        for (std::size_t i = 0; i < rows(); ++i) {
            const auto r = row(i);
            for (std::size_t e = 0; e < r.size(); ++e)
                if (remap[r.index[e]] >= 0) out[i].emplace_back(static_cast<std::uint32_t>(remap[r.index[e]]), r.value[e]);
        }
        return from_rows(std::move(vocab), weighting_, out, std::move(idf));
    }

    DocumentTermMatrix select_rows(std::span<const std::size_t> keep) const
    {
        std::vector<std::vector<std::pair<std::uint32_t, double>>> out;
        out.reserve(keep.size());
        for (auto i : keep) {
            const auto r = row(i);
            auto& dst = out.emplace_back();
            for (std::size_t e = 0; e < r.size(); ++e) dst.emplace_back(r.index[e], r.value[e]);
        }
        return from_rows(vocabulary_, weighting_, out, idf_);
    }

private:
    std::vector<std::string> vocabulary_;
    Weighting weighting_ = Weighting::Frequency;
    std::vector<double> idf_;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_index_;
    std::vector<double> values_;
};

namespace detail {

inline std::vector<std::vector<std::string>> tokenize_labeled(const std::vector<Document>& docs,
                                                              const PreprocessConfig& config)
{
    config.validate();
    std::vector<std::vector<std::string>> out;
    for (const auto& d : docs)
        if (d.label) out.push_back(preprocess(d.text, config));
    return out;
}

// tf = count / tokens-in-document; idf = ln(n) - ln(df).
inline std::vector<std::vector<std::pair<std::uint32_t, double>>>
weight_rows(const std::vector<std::vector<std::string>>& tokens,
            const std::unordered_map<std::string, std::uint32_t>& index, Weighting weighting,
            std::span<const double> idf)
{
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::map<std::uint32_t, std::size_t> counts;
        for (const auto& t : tokens[i]) {
            const auto it = index.find(t);
            if (it != index.end()) ++counts[it->second];
        }
        const double total = static_cast<double>(tokens[i].size());
        for (const auto& [j, c] : counts) {
            const double v = weighting == Weighting::Frequency
                                 ? static_cast<double>(c)
                                 : (static_cast<double>(c) / total) * idf[j];
            rows[i].emplace_back(j, v);
        }
    }
    return rows;
}

} // namespace detail

/// Vocabulary is the sorted union of surviving tokens over labeled documents.
/// Unlabeled (rating 3) documents are skipped.
inline DocumentTermMatrix build_dtm(const std::vector<Document>& docs, const PreprocessConfig& config,
                                    Weighting weighting)
{
    const auto tokens = detail::tokenize_labeled(docs, config);
    detail::require(!tokens.empty(), ErrorKind::InsufficientData, "no labeled documents");

    std::vector<std::string> vocab;
    for (const auto& doc : tokens) vocab.insert(vocab.end(), doc.begin(), doc.end());
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    if (vocab.empty()) throw Error(ErrorKind::EmptyCorpus, "all documents are empty after preprocessing");

    std::unordered_map<std::string, std::uint32_t> index;
    for (std::size_t j = 0; j < vocab.size(); ++j) index.emplace(vocab[j], static_cast<std::uint32_t>(j));

    std::vector<double> idf;
    if (weighting == Weighting::TfIdf) {
        std::vector<std::size_t> df(vocab.size(), 0);
        for (const auto& doc : tokens) {
            std::vector<std::uint32_t> seen;
            for (const auto& t : doc) seen.push_back(index.at(t));
            std::sort(seen.begin(), seen.end());
            seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
            for (auto j : seen) ++df[j];
        }
        const double log_n = std::log(static_cast<double>(tokens.size()));
        idf.resize(vocab.size());
        for (std::size_t j = 0; j < vocab.size(); ++j) idf[j] = log_n - std::log(static_cast<double>(df[j]));
    }
    auto rows = detail::weight_rows(tokens, index, weighting, idf);
    return DocumentTermMatrix::from_rows(std::move(vocab), weighting, rows, std::move(idf));
}

/// Featurizes new documents against a fitted matrix's vocabulary (and idf for
/// TfIdf). Out-of-vocabulary tokens are dropped but still count toward the
/// document length in tf.
inline DocumentTermMatrix project_dtm(const std::vector<Document>& docs, const PreprocessConfig& config,
                                      const DocumentTermMatrix& reference)
{
    const auto tokens = detail::tokenize_labeled(docs, config);
    std::unordered_map<std::string, std::uint32_t> index;
    const auto& vocab = reference.vocabulary();
    for (std::size_t j = 0; j < vocab.size(); ++j) index.emplace(vocab[j], static_cast<std::uint32_t>(j));
    auto rows = detail::weight_rows(tokens, index, reference.weighting(), reference.idf());
    return DocumentTermMatrix::from_rows(vocab, reference.weighting(), rows, reference.idf());
}

/// Keeps term j iff df_j / n >= 1 - threshold (a relative slack of 1e-12
/// absorbs the rounding in 1 - threshold).
inline std::vector<std::size_t> sparsity_survivors(const DocumentTermMatrix& dtm, double threshold)
{
    detail::require(threshold > 0.0 && threshold < 1.0, ErrorKind::Parameter, "sparsity threshold must lie in (0,1)");
    const auto df = dtm.document_frequency();
    const double n = static_cast<double>(dtm.rows());
    const double cutoff = 1.0 - threshold;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < df.size(); ++j)
        if (static_cast<double>(df[j]) / n >= cutoff - 1e-12) keep.push_back(j);
    return keep;
}

inline DocumentTermMatrix truncate_by_sparsity(const DocumentTermMatrix& dtm, double threshold)
{
    const auto keep = sparsity_survivors(dtm, threshold);
    return dtm.select_columns(keep);
}

inline nlohmann::json vocabulary_to_json(const DocumentTermMatrix& dtm)
{
    return nlohmann::json(dtm.vocabulary());
}

// ---- triplet artifact ------------------------------------------------------
//
//   rtl-dtm 1
//   n <rows>
//   p <cols>
//   weighting <frequency|tfidf>
//   vocabulary_hash <16 hex digits>
//   nnz <count>
//   <row> <col> <value>       (zero-based, one line per stored entry)

inline void write_dtm(std::ostream& out, const DocumentTermMatrix& dtm)
{
    out << "rtl-dtm 1\n"
        << "n " << dtm.rows() << "\n"
        << "p " << dtm.cols() << "\n"
        << "weighting " << to_string(dtm.weighting()) << "\n"
        << "vocabulary_hash " << dtm.hash() << "\n"
        << "nnz " << dtm.nnz() << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < dtm.rows(); ++i) {
        const auto r = dtm.row(i);
        for (std::size_t e = 0; e < r.size(); ++e) out << i << ' ' << r.index[e] << ' ' << r.value[e] << '\n';
    }
}

/// Reads a triplet artifact and binds it to `vocabulary`, whose hash must match.
inline DocumentTermMatrix read_dtm(std::istream& in, std::vector<std::string> vocabulary)
{
    auto expect = [&](const std::string& key) {
        std::string k;
        if (!(in >> k) || k != key) throw Error(ErrorKind::Schema, "dtm artifact: expected '" + key + "'");
    };
    std::string version;
    expect("rtl-dtm");
    in >> version;
    if (version != "1") throw Error(ErrorKind::Schema, "dtm artifact: unsupported version " + version);
    std::size_t n = 0, p = 0, nnz = 0;
    std::string weighting, hash;
    expect("n");
    in >> n;
    expect("p");
    in >> p;
    expect("weighting");
    in >> weighting;
    expect("vocabulary_hash");
    in >> hash;
    expect("nnz");
    in >> nnz;
    if (!in) throw Error(ErrorKind::Schema, "dtm artifact: malformed header");
    if (vocabulary.size() != p) throw Error(ErrorKind::VocabularyMismatch, "vocabulary size differs from artifact p");
    if (vocabulary_hash(vocabulary) != hash) throw Error(ErrorKind::VocabularyMismatch, "vocabulary hash mismatch");

    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::size_t e = 0; e < nnz; ++e) {
        std::size_t i = 0;
        std::uint32_t j = 0;
        double v = 0;
        if (!(in >> i >> j >> v)) throw Error(ErrorKind::Schema, "dtm artifact: truncated triplets");
        if (i >= n || j >= p) throw Error(ErrorKind::Schema, "dtm artifact: index out of range");
        rows[i].emplace_back(j, v);
    }
    for (auto& r : rows) std::sort(r.begin(), r.end());
    return DocumentTermMatrix::from_rows(std::move(vocabulary), weighting_from_string(weighting), rows);
}

} // namespace rtl
