#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace rtl {

enum class Polarity : int { Negative = 0, Positive = 1 };

inline constexpr int to_int(Polarity p) noexcept { return static_cast<int>(p); }
inline constexpr Polarity polarity_from_int(int y) noexcept
{
    return y != 0 ? Polarity::Positive : Polarity::Negative;
}

/// Ratings 4-5 are Positive, 1-2 Negative, 3 carries no label.
inline std::optional<Polarity> label_from_rating(int rating)
{
    detail::require(rating >= 1 && rating <= 5, ErrorKind::Parameter,
                    "rating " + std::to_string(rating) + " outside 1..5");
    if (rating >= 4) return Polarity::Positive;
    if (rating <= 2) return Polarity::Negative;
    return std::nullopt;
}

struct Document {
    std::string id;
    std::string text;
    int rating = 0;
    std::optional<Polarity> label;

    static Document make(std::string id, std::string text, int rating)
    {
        Document d{std::move(id), std::move(text), rating, std::nullopt};
        d.label = label_from_rating(rating);
        return d;
    }
};

inline std::vector<Document> labeled_only(const std::vector<Document>& docs)
{
    std::vector<Document> out;
    std::copy_if(docs.begin(), docs.end(), std::back_inserter(out),
                 [](const Document& d) { return d.label.has_value(); });
    return out;
}

/// 0/1 labels of the labeled documents, in input order.
inline std::vector<int> polarity_labels(const std::vector<Document>& docs)
{
    std::vector<int> y;
    for (const auto& d : docs)
        if (d.label) y.push_back(to_int(*d.label));
    return y;
}

namespace csv {

using Record = std::vector<std::string>;

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    bool next(Record& record)
    {
        record.clear();
        if (in_.peek() == std::char_traits<char>::eof()) return false;
        std::string field;
        bool quoted = false;
        bool any = false;
        for (;;) {
            const int ch = in_.get();
            if (ch == std::char_traits<char>::eof()) {
                if (quoted) throw Error(ErrorKind::Schema, "unterminated quoted field");
                if (any || !field.empty() || !record.empty()) record.push_back(std::move(field));
                return !record.empty();
            }
            any = true;
            const char c = static_cast<char>(ch);
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                record.push_back(std::move(field));
                field.clear();
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && in_.peek() == '\n') in_.get();
                record.push_back(std::move(field));
                return true;
            } else {
                field.push_back(c);
            }
        }
    }

private:
    std::istream& in_;
};

inline void write_field(std::ostream& out, std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

} // namespace csv

struct CsvColumns {
    std::string text = "text";
    std::string rating = "rating";
    std::string id; // empty: use the zero-based row number
};

inline std::vector<Document> ingest_csv(std::istream& in, const CsvColumns& columns)
{
    std::vector<Document> docs;
    csv::Reader reader(in);
    csv::Record header;
    if (!reader.next(header)) return docs;
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    auto find_column = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorKind::Schema, "missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t text_col = find_column(columns.text);
    const std::size_t rating_col = find_column(columns.rating);
    const bool has_id = !columns.id.empty();
    const std::size_t id_col = has_id ? find_column(columns.id) : 0;

    csv::Record record;
    std::size_t row = 0;
    while (reader.next(record)) {
        if (record.size() == 1 && record[0].empty()) continue; // blank line
        const std::size_t needed = std::max({text_col, rating_col, id_col});
        if (record.size() <= needed) throw RowError(row, "too few fields");

        std::string_view field = record[rating_col];
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        int rating = 0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), rating);
        if (ec != std::errc{} || ptr != field.data() + field.size())
            throw RowError(row, "unparseable rating '" + std::string(field) + "'");
        if (rating < 1 || rating > 5) throw RowError(row, "rating " + std::to_string(rating) + " outside 1..5");

        std::string id = has_id ? record[id_col] : std::to_string(row);
        docs.push_back(Document::make(std::move(id), std::move(record[text_col]), rating));
        ++row;
    }
    return docs;
}

inline std::vector<Document> ingest_csv(const std::string& path, const CsvColumns& columns)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    return ingest_csv(in, columns);
}

struct TrainTestSplit {
    std::vector<Document> train;
    std::vector<Document> test;
};

/// Random partition of the labeled documents; |train| = round(fraction * n).
inline TrainTestSplit split(const std::vector<Document>& docs, double train_fraction, std::uint64_t seed)
{
    detail::require(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::Parameter,
                    "train_fraction must lie in (0,1)");
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (docs[i].label) labeled.push_back(i);
    detail::require(labeled.size() >= 2, ErrorKind::InsufficientData, "split needs at least 2 labeled documents");

    Rng rng(mix_seed(seed));
    shuffle(std::span(labeled), rng);
    const auto n = labeled.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    // Keep each side in input order so downstream matrices are reproducible.
    std::sort(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(labeled.begin() + static_cast<std::ptrdiff_t>(n_train), labeled.end());
    TrainTestSplit out;
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? out.train : out.test).push_back(docs[labeled[i]]);
    return out;
}

} // namespace rtl
