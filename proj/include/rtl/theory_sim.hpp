#pragma once

// Monte Carlo checks of the estimator's large-sample behavior on synthetic
// logistic data: estimation-error rate, exact zeros, oracle normality and
// restart-invariance of the optimum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "design.hpp"
#include "error.hpp"
#include "model_selection.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "solver.hpp"

namespace rtl::sim {

struct SimDesign {
    std::size_t n = 500;
    std::size_t p = 50;
    std::size_t k = 5;
    double beta_magnitude = 2.0;
    std::size_t n_reps = 50;
    std::uint64_t seed = 1;
    /// Standard deviation of every Gaussian feature.
    double feature_scale = 1.0;
    /// Nonnegative sparse features (Bernoulli(0.1) x Exp(1)); qualitative use only.
    bool sparse_features = false;

    void validate() const
    {
        rtl::detail::require(p >= 1, ErrorKind::Parameter, "design needs at least one feature");
        rtl::detail::require(k <= p, ErrorKind::Parameter, "support size exceeds feature count");
        rtl::detail::require(n >= 2, ErrorKind::Parameter, "design needs n >= 2");
        rtl::detail::require(n_reps >= 1, ErrorKind::Parameter, "design needs at least one repetition");
        rtl::detail::require(feature_scale > 0.0, ErrorKind::Parameter, "feature_scale must be > 0");
    }
};

struct SyntheticData {
    DenseDesign x;
    std::vector<int> y;
    std::vector<double> beta0;
};

namespace detail {

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Marsaglia polar method on our own uniforms keeps draws identical across
// standard libraries.
class NormalSource {
public:
    double operator()(Rng& rng)
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01(rng) - 1.0;
            v = 2.0 * uniform01(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace detail

/// True coefficients: the first k entries are +m, -m, +m, ...; the rest are zero.
inline std::vector<double> true_coefficients(const SimDesign& d)
{
    std::vector<double> beta(d.p, 0.0);
    for (std::size_t j = 0; j < d.k; ++j) beta[j] = (j % 2 == 0 ? 1.0 : -1.0) * d.beta_magnitude;
    return beta;
}

/// Independent features, y_i ~ Bernoulli(sigmoid(x_i' beta0)); deterministic in (seed, rep).
inline SyntheticData gen_synthetic(const SimDesign& d, std::size_t rep = 0)
{
    d.validate();
    Rng rng(mix_seed(d.seed, rep));
    detail::NormalSource normal;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(d.n), static_cast<Eigen::Index>(d.p));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (d.sparse_features) {
                const bool present = detail::uniform01(rng) < 0.1;
                const double magnitude = -std::log(1.0 - detail::uniform01(rng));
                x(i, j) = present ? d.feature_scale * magnitude : 0.0;
            } else {
                x(i, j) = d.feature_scale * normal(rng);
            }
        }
    }
    auto beta0 = true_coefficients(d);
    std::vector<int> y(d.n);
    for (std::size_t i = 0; i < d.n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < d.k; ++j) eta += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * beta0[j];
        y[i] = detail::uniform01(rng) < rtl::detail::sigmoid(eta) ? 1 : 0;
    }
    return {DenseDesign(std::move(x)), std::move(y), std::move(beta0)};
}

enum class LambdaRule { MinError, OneStandardError };

struct Tuning {
    double gamma = 3.7;
    LambdaRule rule = LambdaRule::MinError;
    int cv_folds = 5;
    LambdaStrategy path{30, 0.01, {}};
    /// Skip cross-validation and fit at this lambda.
    std::optional<double> fixed_lambda;
    FitOptions fit = [] {
        FitOptions o;
        o.fit_intercept = false; // synthetic data has no intercept
        return o;
    }();
    unsigned threads = 0;
};

inline double rule_lambda(const CvReport& report, LambdaRule rule)
{
    return rule == LambdaRule::MinError ? report.best().lambda : report.entries[one_se_index(report)].lambda;
}

struct TunedFit {
    FitResult fit;
    double lambda = 0.0;
};

/// CV-tuned (or fixed-lambda) fit; the final model is the full-data
/// warm-started path fit at the selected lambda.
inline TunedFit tuned_fit(const SyntheticData& data, const Tuning& tuning, std::uint64_t seed)
{
    if (tuning.fixed_lambda) {
        return {fit(data.x, data.y, ScadParams(*tuning.fixed_lambda, tuning.gamma), tuning.fit), *tuning.fixed_lambda};
    }
    CvGrid grid{{tuning.cv_folds}, {tuning.gamma}, tuning.path};
    const std::vector<double> lambdas =
        grid.lambda.values.empty()
            ? lambda_path(data.x, data.y, grid.lambda.count, grid.lambda.ratio, tuning.gamma, tuning.fit)
            : grid.lambda.values;
    grid.lambda.values = lambdas;
    const CvReport report = grid_search(data.x, data.y, grid, tuning.fit, seed, CvLoss::Deviance, 1);
    const double best = rule_lambda(report, tuning.rule);
    std::vector<double> head;
    for (double l : lambdas) {
        head.push_back(l);
        if (l == best) break;
    }
    auto path = fit_path(data.x, data.y, head, tuning.gamma, tuning.fit);
    return {std::move(path.back()), best};
}

struct RepRecord {
    double estimation_error = 0.0;  // |beta_hat - beta0|_2
    bool zeros_recovered = false;   // every true zero estimated exactly 0
    bool support_recovered = false; // nonzero pattern matches exactly
    double lambda = 0.0;
    bool converged = false;
    std::size_t selected = 0;
};

struct SimReport {
    SimDesign design;
    std::vector<RepRecord> reps;

    std::size_t nonconverged() const
    {
        return static_cast<std::size_t>(std::count_if(reps.begin(), reps.end(), [](const RepRecord& r) { return !r.converged; }));
    }
    double nonconverged_rate() const { return static_cast<double>(nonconverged()) / static_cast<double>(reps.size()); }
    /// Experiments with more than 10% non-converged fits are invalid.
    bool valid() const { return nonconverged_rate() <= 0.10; }
    double median_error() const
    {
        std::vector<double> e;
        for (const auto& r : reps) e.push_back(r.estimation_error);
        std::sort(e.begin(), e.end());
        const auto m = e.size() / 2;
        return e.size() % 2 ? e[m] : 0.5 * (e[m - 1] + e[m]);
    }
    double zero_recovery_rate() const
    {
        return static_cast<double>(std::count_if(reps.begin(), reps.end(), [](const RepRecord& r) { return r.zeros_recovered; })) /
               static_cast<double>(reps.size());
    }
    double support_recovery_rate() const
    {
        return static_cast<double>(std::count_if(reps.begin(), reps.end(), [](const RepRecord& r) { return r.support_recovered; })) /
               static_cast<double>(reps.size());
    }
};

inline RepRecord summarize_rep(const FitResult& f, const std::vector<double>& beta0, double lambda)
{
    RepRecord rec;
    double sq = 0.0;
    rec.zeros_recovered = true;
    rec.support_recovered = true;
    for (std::size_t j = 0; j < beta0.size(); ++j) {
        const double d = f.coefficients[j] - beta0[j];
        sq += d * d;
        const bool est_nonzero = f.coefficients[j] != 0.0;
        const bool true_nonzero = beta0[j] != 0.0;
        if (!true_nonzero && est_nonzero) rec.zeros_recovered = false;
        if (est_nonzero != true_nonzero) rec.support_recovered = false;
        rec.selected += est_nonzero ? 1 : 0;
    }
    rec.estimation_error = std::sqrt(sq);
    rec.lambda = lambda;
    rec.converged = f.converged;
    return rec;
}

/// Runs n_reps independent replications of design d.
inline SimReport run_design(const SimDesign& d, const Tuning& tuning)
{
    d.validate();
    SimReport report{d, std::vector<RepRecord>(d.n_reps)};
    parallel_for(
        d.n_reps,
        [&](std::size_t rep) {
            const auto data = gen_synthetic(d, rep);
            const auto tuned = tuned_fit(data, tuning, mix_seed(d.seed ^ 0x5eedULL, rep));
            report.reps[rep] = summarize_rep(tuned.fit, data.beta0, tuned.lambda);
        },
        tuning.threads);
    return report;
}

// ---- consistency -------------------------------------------------------------

struct ConsistencyRow {
    std::size_t n = 0;
    std::size_t p = 0;
    double median_error = 0.0;
    double scaled_error = 0.0; // median_error * sqrt(n / p)
    double nonconverged_rate = 0.0;
    bool valid = true;
};

struct ConsistencyResult {
    std::vector<ConsistencyRow> rows; // ascending n
    std::vector<SimReport> reports;

    bool strictly_decreasing() const
    {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].median_error < rows[i - 1].median_error)) return false;
        return true;
    }
    /// max / min of the sqrt(n/p)-scaled medians.
    double band_ratio() const
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r.scaled_error);
            hi = std::max(hi, r.scaled_error);
        }
        return hi / lo;
    }
    bool valid() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const ConsistencyRow& r) { return r.valid; });
    }
};

inline ConsistencyResult consistency_experiment(std::vector<SimDesign> designs, const Tuning& tuning)
{
    rtl::detail::require(designs.size() >= 3, ErrorKind::Parameter, "consistency experiment needs at least 3 sample sizes");
    for (const auto& d : designs) d.validate();
    std::sort(designs.begin(), designs.end(), [](const SimDesign& a, const SimDesign& b) { return a.n < b.n; });
    ConsistencyResult out;
    for (const auto& d : designs) {
        auto rep = run_design(d, tuning);
        ConsistencyRow row;
        row.n = d.n;
        row.p = d.p;
        row.median_error = rep.median_error();
        row.scaled_error = row.median_error * std::sqrt(static_cast<double>(d.n) / static_cast<double>(d.p));
        row.nonconverged_rate = rep.nonconverged_rate();
        row.valid = rep.valid();
        out.rows.push_back(row);
        out.reports.push_back(std::move(rep));
    }
    return out;
}

// ---- sparsity ----------------------------------------------------------------

struct SparsityResult {
    double zero_recovery_rate = 0.0;
    double support_recovery_rate = 0.0;
    SimReport report;
};

inline SparsityResult sparsity_experiment(const SimDesign& d, const Tuning& tuning)
{
    auto report = run_design(d, tuning);
    return {report.zero_recovery_rate(), report.support_recovery_rate(), std::move(report)};
}

// ---- Kolmogorov-Smirnov against N(0, 1) ---------------------------------------

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(K > lambda) for the Kolmogorov limit distribution.
inline double kolmogorov_survival(double lambda)
{
    if (lambda < 0.2) return 1.0;
    double q = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
        q += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

/// One-sample KS test; p-value from the Kolmogorov limit with Stephens'
/// small-sample correction.
inline KsResult ks_test_normal(std::vector<double> sample)
{
    rtl::detail::require(!sample.empty(), ErrorKind::InsufficientData, "KS test needs a nonempty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = standard_normal_cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

// ---- oracle normality ------------------------------------------------------------

struct OracleResult {
    /// |beta_hat_1 - beta_hat_1^oracle|_2 per retained rep.
    std::vector<double> oracle_gap;
    /// One standardized sample per direction.
    std::vector<std::vector<double>> statistics;
    std::vector<KsResult> ks;
    std::size_t dropped = 0;
};

/// For each rep: the tuned penalized fit and the unpenalized fit on the true
/// support. The statistic sqrt(n) a' I^{1/2}(beta_10) (beta_hat_1 - beta_10)
/// uses the sample information at the true coefficients.
inline OracleResult oracle_experiment(const SimDesign& d, const Tuning& tuning, const std::vector<Eigen::VectorXd>& directions)
{
    d.validate();
    rtl::detail::require(d.k >= 1, ErrorKind::Parameter, "oracle experiment needs a nonempty support");
    for (const auto& a : directions)
        rtl::detail::require(static_cast<std::size_t>(a.size()) == d.k && std::abs(a.norm() - 1.0) < 1e-12,
                        ErrorKind::Parameter, "directions must be unit vectors of length k");

    struct Rep {
        bool dropped = false;
        double gap = 0.0;
        std::vector<double> stats;
    };
    std::vector<Rep> reps(d.n_reps);
    std::vector<std::size_t> support(d.k);
    for (std::size_t j = 0; j < d.k; ++j) support[j] = j;
    const auto k = static_cast<Eigen::Index>(d.k);

    parallel_for(
        d.n_reps,
        [&](std::size_t rep) {
            const auto data = gen_synthetic(d, rep);
            const auto tuned = tuned_fit(data, tuning, mix_seed(d.seed ^ 0x5eedULL, rep));
            FitOptions oracle_opts = tuning.fit;
            oracle_opts.coefficient_cap = 30.0;
            const auto xs = data.x.select_columns(support);
            const auto oracle = fit(xs, data.y, ScadParams(0.0, tuning.gamma), oracle_opts);
            const bool separable = std::any_of(oracle.coefficients.begin(), oracle.coefficients.end(),
                                               [](double b) { return std::abs(b) >= 30.0; });
            if (!oracle.converged || separable) {
                reps[rep].dropped = true;
                return;
            }
            Eigen::VectorXd diff(k), gap(k);
            for (Eigen::Index j = 0; j < k; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                diff(j) = tuned.fit.coefficients[jj] - data.beta0[jj];
                gap(j) = tuned.fit.coefficients[jj] - oracle.coefficients[jj];
            }
            const Eigen::MatrixXd& xm = xs.matrix();
            Eigen::VectorXd b10(k);
            for (Eigen::Index j = 0; j < k; ++j) b10(j) = data.beta0[static_cast<std::size_t>(j)];
            const Eigen::VectorXd eta = xm * b10;
            Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index i = 0; i < xm.rows(); ++i) {
                const double pi = rtl::detail::sigmoid(eta(i));
                info.noalias() += pi * (1.0 - pi) * xm.row(i).transpose() * xm.row(i);
            }
            info /= static_cast<double>(xm.rows());
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
            const Eigen::MatrixXd root =
                eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
            const Eigen::VectorXd z = std::sqrt(static_cast<double>(d.n)) * (root * diff);
            reps[rep].gap = gap.norm();
            for (const auto& a : directions) reps[rep].stats.push_back(a.dot(z));
        },
        tuning.threads);

    OracleResult out;
    out.statistics.resize(directions.size());
    for (const auto& r : reps) {
        if (r.dropped) {
            ++out.dropped;
            continue;
        }
        out.oracle_gap.push_back(r.gap);
        for (std::size_t a = 0; a < directions.size(); ++a) out.statistics[a].push_back(r.stats[a]);
    }
    for (const auto& s : out.statistics) out.ks.push_back(s.empty() ? KsResult{} : ks_test_normal(s));
    return out;
}

// ---- global optimum probe ----------------------------------------------------------

struct GlobalProbeResult {
    std::vector<double> objectives;
    double spread = 0.0;           // max - min final objective
    double lambda = 0.0;
    double min_curvature = 0.0;    // smallest v_j over restarts at convergence
    double convexity_threshold = 0.0; // 1 / (gamma - 1)
    bool all_converged = true;

    bool convex_regime() const { return min_curvature > convexity_threshold; }
};

/// Fits rep 0 of the design from n_restarts random starting points
/// (coefficients ~ N(0, init_scale^2)). With same_start every restart uses the
/// first starting point.
inline GlobalProbeResult global_optimum_probe(const SimDesign& d, int n_restarts, const Tuning& tuning,
                                              double init_scale = 1.0, bool same_start = false)
{
    rtl::detail::require(n_restarts >= 2, ErrorKind::Parameter, "global optimum probe needs at least 2 restarts");
    const auto data = gen_synthetic(d, 0);
    const double lambda =
        tuning.fixed_lambda ? *tuning.fixed_lambda : tuned_fit(data, tuning, mix_seed(d.seed ^ 0x5eedULL, 0)).lambda;
    const ScadParams params(lambda, tuning.gamma);
    GlobalProbeResult out;
    out.lambda = lambda;
    out.convexity_threshold = 1.0 / (tuning.gamma - 1.0);
    out.min_curvature = std::numeric_limits<double>::infinity();
    out.objectives.resize(static_cast<std::size_t>(n_restarts));
    std::vector<double> curvature(static_cast<std::size_t>(n_restarts));
    std::vector<char> converged(static_cast<std::size_t>(n_restarts));
    parallel_for(
        static_cast<std::size_t>(n_restarts),
        [&](std::size_t r) {
            Rng rng(mix_seed(d.seed ^ 0x6c6f62ULL, same_start ? 0 : r));
            detail::NormalSource normal;
            WarmStart start;
            start.coefficients.resize(d.p);
            for (auto& b : start.coefficients) b = init_scale * normal(rng);
            const auto f = fit(data.x, data.y, params, tuning.fit, &start);
            out.objectives[r] = objective(data.x, data.y, f.intercept, f.coefficients, params);
            curvature[r] = f.min_curvature;
            converged[r] = f.converged;
        },
        tuning.threads);
    const auto [lo, hi] = std::minmax_element(out.objectives.begin(), out.objectives.end());
    out.spread = *hi - *lo;
    for (std::size_t r = 0; r < curvature.size(); ++r) {
        out.min_curvature = std::min(out.min_curvature, curvature[r]);
        out.all_converged = out.all_converged && converged[r];
    }
    return out;
}

} // namespace rtl::sim
