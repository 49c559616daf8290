#pragma once

#include <stdexcept>
#include <string>

namespace rtl {

enum class ErrorKind {
    Schema,            // missing or malformed input columns
    Row,               // a single input row failed to parse
    Parameter,         // argument outside its documented domain
    Domain,            // math function evaluated outside its domain
    EmptyCorpus,       // nothing survived preprocessing
    InsufficientData,  // too few labeled rows for the requested operation
    DegenerateLabels,  // only one class present
    DegenerateDesign,  // feature matrix carries no information
    DimensionMismatch,
    VocabularyMismatch,
    Numerical,         // non-finite values or failed fit
    Io,
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::Row: return "row error";
        case ErrorKind::Parameter: return "parameter error";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::EmptyCorpus: return "empty corpus";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::DegenerateLabels: return "degenerate labels";
        case ErrorKind::DegenerateDesign: return "degenerate design";
        case ErrorKind::DimensionMismatch: return "dimension mismatch";
        case ErrorKind::VocabularyMismatch: return "vocabulary mismatch";
        case ErrorKind::Numerical: return "numerical error";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Row-level ingestion failure; row() is the zero-based data row (header excluded).
class RowError : public Error {
public:
    RowError(std::size_t row, const std::string& what)
        : Error(ErrorKind::Row, "row " + std::to_string(row) + ": " + what), row_(row)
    {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

namespace detail {

inline void require(bool cond, ErrorKind kind, const std::string& what)
{
    if (!cond) throw Error(kind, what);
}

} // namespace detail
} // namespace rtl
