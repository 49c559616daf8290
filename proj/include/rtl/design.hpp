#pragma once

// Column-oriented views of a feature matrix for the coordinate-descent
// solver. Both layouts expose the same small set of column kernels.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dtm.hpp"
#include "error.hpp"

namespace rtl {

template <class D>
concept ColumnDesign = requires(const D& d, std::size_t j, std::span<const double> w,
                                std::span<const double> r, std::span<double> out,
                                std::span<const std::size_t> idx) {
    { d.rows() } -> std::convertible_to<std::size_t>;
    { d.cols() } -> std::convertible_to<std::size_t>;
    // sum_i w_i x_ij r_i
    { d.weighted_dot(j, w, r) } -> std::convertible_to<double>;
    // sum_i w_i x_ij^2
    { d.weighted_sq_norm(j, w) } -> std::convertible_to<double>;
    // out += a * x_j
    d.axpy(j, 1.0, out);
    { d.select_rows(idx) } -> std::same_as<D>;
    { d.select_columns(idx) } -> std::same_as<D>;
};

/// Compressed sparse column storage.
class SparseDesign {
public:
    SparseDesign() = default;

    explicit SparseDesign(const DocumentTermMatrix& dtm) : n_(dtm.rows()), p_(dtm.cols())
    {
        col_ptr_.assign(p_ + 1, 0);
        for (auto j : dtm.col_index()) ++col_ptr_[j + 1];
        for (std::size_t j = 0; j < p_; ++j) col_ptr_[j + 1] += col_ptr_[j];
        row_index_.resize(dtm.nnz());
        values_.resize(dtm.nnz());
        std::vector<std::size_t> cursor(col_ptr_.begin(), col_ptr_.end() - 1);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto r = dtm.row(i);
            for (std::size_t e = 0; e < r.size(); ++e) {
                const auto pos = cursor[r.index[e]]++;
                row_index_[pos] = static_cast<std::uint32_t>(i);
                values_[pos] = r.value[e];
            }
        }
    }

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return p_; }

    double weighted_dot(std::size_t j, std::span<const double> w, std::span<const double> r) const
    {
        double s = 0.0;
        for (auto e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) {
            const auto i = row_index_[e];
            s += w[i] * values_[e] * r[i];
        }
        return s;
    }

    double weighted_sq_norm(std::size_t j, std::span<const double> w) const
    {
        double s = 0.0;
        for (auto e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) s += w[row_index_[e]] * values_[e] * values_[e];
        return s;
    }

    void axpy(std::size_t j, double a, std::span<double> out) const
    {
        for (auto e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) out[row_index_[e]] += a * values_[e];
    }

    SparseDesign select_rows(std::span<const std::size_t> keep) const
    {
        std::vector<std::int64_t> remap(n_, -1);
        for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = static_cast<std::int64_t>(k);
        SparseDesign out;
        out.n_ = keep.size();
        out.p_ = p_;
        out.col_ptr_.assign(p_ + 1, 0);
        for (std::size_t j = 0; j < p_; ++j) {
            // Entries within a column stay sorted by new row index when keep is ascending.
            std::vector<std::pair<std::uint32_t, double>> col;
            for (auto e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e)
                if (remap[row_index_[e]] >= 0) col.emplace_back(static_cast<std::uint32_t>(remap[row_index_[e]]), values_[e]);
            std::sort(col.begin(), col.end());
            for (const auto& [i, v] : col) {
                out.row_index_.push_back(i);
                out.values_.push_back(v);
            }
            out.col_ptr_[j + 1] = out.values_.size();
        }
        return out;
    }

    SparseDesign select_columns(std::span<const std::size_t> keep) const
    {
        SparseDesign out;
        out.n_ = n_;
        out.p_ = keep.size();
        out.col_ptr_.assign(out.p_ + 1, 0);
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const auto j = keep[k];
            for (auto e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) {
                out.row_index_.push_back(row_index_[e]);
                out.values_.push_back(values_[e]);
            }
            out.col_ptr_[k + 1] = out.values_.size();
        }
        return out;
    }

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::uint32_t> row_index_;
    std::vector<double> values_;
};

/// Dense column-major storage (used for synthetic Gaussian designs).
class DenseDesign {
public:
    DenseDesign() = default;
    explicit DenseDesign(Eigen::MatrixXd x) : x_(std::move(x)) {}

    std::size_t rows() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(x_.cols()); }
    const Eigen::MatrixXd& matrix() const noexcept { return x_; }

    double weighted_dot(std::size_t j, std::span<const double> w, std::span<const double> r) const
    {
        const double* col = x_.col(static_cast<Eigen::Index>(j)).data();
        double s = 0.0;
        for (std::size_t i = 0; i < rows(); ++i) s += w[i] * col[i] * r[i];
        return s;
    }

    double weighted_sq_norm(std::size_t j, std::span<const double> w) const
    {
        const double* col = x_.col(static_cast<Eigen::Index>(j)).data();
        double s = 0.0;
        for (std::size_t i = 0; i < rows(); ++i) s += w[i] * col[i] * col[i];
        return s;
    }

    void axpy(std::size_t j, double a, std::span<double> out) const
    {
        const double* col = x_.col(static_cast<Eigen::Index>(j)).data();
        for (std::size_t i = 0; i < rows(); ++i) out[i] += a * col[i];
    }

    DenseDesign select_rows(std::span<const std::size_t> keep) const
    {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), x_.cols());
        for (std::size_t k = 0; k < keep.size(); ++k)
            out.row(static_cast<Eigen::Index>(k)) = x_.row(static_cast<Eigen::Index>(keep[k]));
        return DenseDesign(std::move(out));
    }

    DenseDesign select_columns(std::span<const std::size_t> keep) const
    {
        Eigen::MatrixXd out(x_.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k)
            out.col(static_cast<Eigen::Index>(k)) = x_.col(static_cast<Eigen::Index>(keep[k]));
        return DenseDesign(std::move(out));
    }

private:
    Eigen::MatrixXd x_;
};

/// eta = intercept + X beta, skipping zero coefficients.
template <ColumnDesign D>
std::vector<double> linear_predictor(const D& x, double intercept, std::span<const double> beta)
{
    detail::require(beta.size() == x.cols(), ErrorKind::DimensionMismatch, "coefficient length differs from column count");
    std::vector<double> eta(x.rows(), intercept);
    for (std::size_t j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) x.axpy(j, beta[j], eta);
    return eta;
}

} // namespace rtl
