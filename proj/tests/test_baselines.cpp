#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rtl/baselines/knn.hpp"
#include "rtl/baselines/model_io.hpp"
#include "rtl/baselines/naive_bayes.hpp"
#include "rtl/baselines/svm.hpp"
#include "rtl/baselines/truncated_lr.hpp"

using namespace rtl;
using namespace rtl::baselines;

namespace {

DocumentTermMatrix matrix(const std::vector<std::vector<double>>& x, Weighting w = Weighting::Frequency)
{
    std::vector<std::string> vocab;
    for (std::size_t j = 0; j < x.front().size(); ++j) vocab.push_back("t" + std::to_string(j));
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
    for (const auto& r : x) {
        rows.emplace_back();
        for (std::size_t j = 0; j < r.size(); ++j)
            if (r[j] != 0.0) rows.back().emplace_back(static_cast<std::uint32_t>(j), r[j]);
    }
    std::vector<double> idf;
    if (w == Weighting::TfIdf) idf.assign(vocab.size(), 1.0);
    return DocumentTermMatrix::from_rows(vocab, w, rows, idf);
}

struct Row {
    std::vector<std::uint32_t> index;
    std::vector<double> value;
    SparseRowView view() const { return {index, value}; }
};

Row row_of(const std::vector<double>& dense)
{
    Row r;
    for (std::size_t j = 0; j < dense.size(); ++j)
        if (dense[j] != 0.0) {
            r.index.push_back(static_cast<std::uint32_t>(j));
            r.value.push_back(dense[j]);
        }
    return r;
}

} // namespace

TEST(NaiveBayes, HandToy)
{
    // Doc 0 (Positive) holds t0 once, doc 1 (Negative) holds t1 once.
    const auto m = nb_fit(matrix({{1, 0}, {0, 1}}), std::vector<int>{1, 0});
    EXPECT_NEAR(std::exp(m.term_log_likelihoods[1][0]), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(std::exp(m.term_log_likelihoods[1][1]), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(std::exp(m.term_log_likelihoods[0][1]), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(nb_predict(m, row_of({1, 0}).view()), Polarity::Positive);
    EXPECT_EQ(nb_predict(m, row_of({0, 1}).view()), Polarity::Negative);
}

TEST(NaiveBayes, SymmetricTieGoesPositive)
{
    const auto m = nb_fit(matrix({{1, 0}, {0, 1}}), std::vector<int>{1, 0});
    EXPECT_EQ(nb_predict(m, row_of({1, 1}).view()), Polarity::Positive);
    EXPECT_EQ(nb_predict(m, SparseRowView{}), Polarity::Positive);
}

TEST(NaiveBayes, EmptyRowTakesPriorArgmax)
{
    const auto m = nb_fit(matrix({{1, 0}, {0, 1}, {0, 2}}), std::vector<int>{1, 0, 0});
    EXPECT_EQ(nb_predict(m, SparseRowView{}), Polarity::Negative);
}

TEST(NaiveBayes, UniformCorpusEqualLikelihoods)
{
    const auto m = nb_fit(matrix({{1, 1, 1}, {1, 1, 1}, {2, 2, 2}, {2, 2, 2}}), std::vector<int>{1, 1, 0, 0});
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(m.term_log_likelihoods[0][j], m.term_log_likelihoods[1][j], 1e-15);
}

TEST(NaiveBayes, ClassPriors)
{
    std::vector<std::vector<double>> x(2159, std::vector<double>{1.0});
    std::vector<int> y(2159, 0);
    std::fill(y.begin(), y.begin() + 1559, 1);
    const auto m = nb_fit(matrix(x), y);
    EXPECT_NEAR(std::exp(m.class_log_priors[1]), 0.7221, 5e-5);
    EXPECT_NEAR(std::exp(m.class_log_priors[0]), 0.2779, 5e-5);
}

TEST(NaiveBayes, Errors)
{
    EXPECT_THROW(nb_fit(matrix({{1, 0}, {0, 1}}, Weighting::TfIdf), std::vector<int>{1, 0}), Error);
    EXPECT_THROW(nb_fit(matrix({{1, 0}, {0, 1}}), std::vector<int>{1, 1}), Error);
}

TEST(Knn, QueryEqualsTrainingRow)
{
    const auto train = matrix({{1, 0, 2}, {0, 3, 0}, {2, 2, 0}, {0, 0, 1}});
    const std::vector<int> y{1, 0, 1, 0};
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(to_int(knn_predict(train, y, train.row(i), {1, RowNormalization::None})), y[i]);
}

TEST(Knn, KEqualsNGivesMajority)
{
    const auto train = matrix({{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}});
    const std::vector<int> y{1, 0, 0, 0, 1};
    EXPECT_EQ(knn_predict(train, y, row_of({5, 0}).view(), {5, RowNormalization::L2}), Polarity::Negative);
}

TEST(Knn, MatchesFullSortOracle)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> x(20, std::vector<double>(5));
        std::vector<int> y(20);
        for (std::size_t i = 0; i < 20; ++i) {
            for (auto& v : x[i]) v = u(rng) < 0.5 ? 0.0 : u(rng);
            x[i][i % 5] += 0.1;
            y[i] = static_cast<int>(rng() % 2);
        }
        const auto train = matrix(x);
        std::vector<double> q(5);
        for (auto& v : q) v = u(rng);
        for (const auto norm : {RowNormalization::None, RowNormalization::L2}) {
            auto normalized = [&](std::vector<double> r) {
                if (norm == RowNormalization::L2) {
                    double s = 0.0;
                    for (double v : r) s += v * v;
                    for (double& v : r) v /= std::sqrt(s);
                }
                return r;
            };
            const auto qn = normalized(q);
            std::vector<std::pair<double, std::size_t>> d;
            for (std::size_t i = 0; i < 20; ++i) {
                const auto xn = normalized(x[i]);
                double s = 0.0;
                for (std::size_t j = 0; j < 5; ++j) s += (xn[j] - qn[j]) * (xn[j] - qn[j]);
                d.emplace_back(s, i);
            }
            std::sort(d.begin(), d.end());
            for (int k : {1, 3, 5, 7, 20}) {
                int pos = 0;
                for (int m = 0; m < k; ++m) pos += y[d[static_cast<std::size_t>(m)].second];
                const int expected = 2 * pos == k ? y[d[0].second] : (2 * pos > k ? 1 : 0);
                EXPECT_EQ(to_int(knn_predict(train, y, row_of(q).view(), {k, norm})), expected) << k;
            }
        }
    }
}

TEST(Knn, SelectKIsDeterministicAndAmongCandidates)
{
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        x.push_back({i % 2 ? 1.0 + 0.01 * i : 0.0, i % 2 ? 0.0 : 1.0 + 0.01 * i});
        y.push_back(i % 2);
    }
    const auto train = matrix(x);
    const std::vector<int> ks{1, 3, 5};
    const int k = knn_select_k(train, y, ks, 5, 3);
    EXPECT_EQ(k, knn_select_k(train, y, ks, 5, 3));
    EXPECT_EQ(k, 1); // perfectly separable: every k errs zero times, smallest wins
}

TEST(Knn, InvalidK)
{
    const auto train = matrix({{1, 0}, {0, 1}});
    EXPECT_THROW(KnnIndex(train, std::vector<int>{1, 0}, {3, RowNormalization::L2}), Error);
    EXPECT_THROW(KnnIndex(train, std::vector<int>{1, 0}, {0, RowNormalization::L2}), Error);
}

TEST(Svm, SeparableTwoPoints)
{
    Eigen::MatrixXd x(2, 1);
    x << -1.0, 1.0;
    const std::vector<int> y{-1, 1};
    const auto rows = SparseRows::from_dense(x);
    const auto m = svm_fit(rows, y, 100.0, 200, 1);
    for (std::size_t i = 0; i < 2; ++i) {
        const double d = rtl::baselines::detail::decision_value(m.weights, m.bias, rows.rows[i]);
        EXPECT_GT(d * y[i], 0.0);
    }
}

TEST(Svm, TinyCostShrinksWeights)
{
    const auto inst = oracle::random_logistic(50, 3, 4);
    const auto rows = SparseRows::from_dense(inst.x);
    const auto y = to_signed_labels(inst.y);
    const auto m = svm_fit(rows, y, 1e-6, 20, 1);
    for (double w : m.weights) EXPECT_LT(std::abs(w), 1e-3);
}

TEST(Svm, NearGridOracleOptimum)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd x(30, 1);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2 ? 1 : -1;
        x(i, 0) = 0.8 * y[static_cast<std::size_t>(i)] + nd(rng);
    }
    const auto rows = SparseRows::from_dense(x);
    const double cost = 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (double w = -5.0; w <= 5.0; w += 0.002)
        for (double b = -5.0; b <= 5.0; b += 0.01) best = std::min(best, svm_objective(rows, y, {w}, b, cost));
    const auto m = svm_fit(rows, y, cost, 500, 3);
    const double got = svm_objective(rows, y, m.weights, m.bias, cost);
    EXPECT_LE(got, 1.05 * best);
}

TEST(Svm, DeterministicAndPredict)
{
    const auto inst = oracle::random_logistic(60, 4, 9, 2.0);
    const auto dtm_rows = SparseRows::from_dense(inst.x);
    const auto y = to_signed_labels(inst.y);
    const auto a = svm_fit(dtm_rows, y, 1.0, 10, 5), b = svm_fit(dtm_rows, y, 1.0, 10, 5);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
    const SvmModel zero{{0.0, 0.0}, 0.0, 1.0};
    EXPECT_EQ(svm_predict(zero, SparseRowView{}), Polarity::Positive);
}

TEST(Svm, Errors)
{
    const auto rows = SparseRows::from_dense(Eigen::MatrixXd::Ones(2, 1));
    EXPECT_THROW(svm_fit(rows, std::vector<int>{1, 1}, 1.0, 1, 1), Error);
    EXPECT_THROW(svm_fit(rows, std::vector<int>{1, 0}, 1.0, 1, 1), Error);
    EXPECT_THROW(svm_fit(rows, std::vector<int>{1, -1}, 0.0, 1, 1), Error);
    const auto costs = default_svm_costs();
    EXPECT_NEAR(costs.front(), 0.1, 1e-15);
    EXPECT_NEAR(costs.back(), 100.0, 1e-12);
}

namespace {

// Scalar Newton for logistic regression on one feature with intercept.
std::pair<double, double> scalar_newton(const std::vector<double>& x, const std::vector<int>& y)
{
    double b0 = 0.0, b1 = 0.0;
    for (int it = 0; it < 100; ++it) {
        double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double p = oracle::sigmoid(b0 + b1 * x[i]);
            const double w = p * (1 - p);
            g0 += y[i] - p;
            g1 += (y[i] - p) * x[i];
            h00 += w;
            h01 += w * x[i];
            h11 += w * x[i] * x[i];
        }
        const double det = h00 * h11 - h01 * h01;
        b0 += (h11 * g0 - h01 * g1) / det;
        b1 += (h00 * g1 - h01 * g0) / det;
    }
    return {b0, b1};
}

} // namespace

TEST(TruncatedLr, SingleSurvivorMatchesScalarNewton)
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::vector<double> common;
    for (int i = 0; i < 100; ++i) {
        const double c = 0.2 + u(rng);
        // Term 0 is everywhere; the rest appear rarely.
        std::vector<double> r{c, i == 3 ? 1.0 : 0.0, i == 50 ? 2.0 : 0.0};
        x.push_back(r);
        common.push_back(c);
        y.push_back(u(rng) < oracle::sigmoid(-1.0 + 2.0 * c) ? 1 : 0);
    }
    const auto dtm = matrix(x, Weighting::TfIdf);
    const auto m = truncated_lr_fit(dtm, y, 0.5);
    ASSERT_EQ(m.retained, (std::vector<std::size_t>{0}));
    const auto [b0, b1] = scalar_newton(common, y);
    EXPECT_NEAR(m.model.intercept(), b0, 1e-6);
    EXPECT_NEAR(m.model.coefficient(0), b1, 1e-6);
    const auto probe = row_of({0.7, 1.0, 0.0});
    EXPECT_NEAR(m.predict_proba(probe.view()), oracle::sigmoid(b0 + 0.7 * b1), 1e-6);
}

TEST(TruncatedLr, EqualsUnpenalizedSolverOnTruncatedMatrix)
{
    const auto inst = oracle::random_logistic(120, 6, 13);
    std::vector<std::vector<double>> x(120, std::vector<double>(6));
    for (int i = 0; i < 120; ++i)
        for (int j = 0; j < 6; ++j) {
            const double v = inst.x(i, j);
            x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (j < 3 || v > 1.0) ? std::abs(v) : 0.0;
        }
    const auto dtm = matrix(x, Weighting::TfIdf);
    for (double t : {0.7, 0.9}) {
        const auto m = truncated_lr_fit(dtm, inst.y, t);
        const auto reference = fit(truncate_by_sparsity(dtm, t), inst.y, ScadParams(0.0, 3.7), truncated_lr_options());
        EXPECT_NEAR(m.model.intercept(), reference.intercept(), 1e-12);
        for (std::size_t k = 0; k < m.retained.size(); ++k)
            EXPECT_NEAR(m.model.coefficient(k), reference.coefficient(k), 1e-12);
    }
}

TEST(TruncatedLr, NoSurvivorsIsError)
{
    const auto dtm = matrix({{1, 0}, {0, 1}, {0, 0}, {0, 0}}, Weighting::TfIdf);
    try {
        truncated_lr_fit(dtm, std::vector<int>{1, 0, 1, 0}, 0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateDesign);
    }
}

TEST(TruncatedLr, DefaultThresholds)
{
    const auto t = default_sparsity_thresholds();
    ASSERT_EQ(t.size(), 20u);
    EXPECT_DOUBLE_EQ(t.front(), 0.80);
    EXPECT_DOUBLE_EQ(t.back(), 0.99);
}

namespace {

json through_text(const json& j) { return json::parse(j.dump()); }

DocumentTermMatrix serialization_matrix(const oracle::Instance& inst, Weighting w = Weighting::TfIdf)
{
    std::vector<std::vector<double>> x(inst.y.size(), std::vector<double>(6));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            const double v = inst.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            x[i][j] = (j < 3 || v > 1.0) ? std::ceil(std::abs(v)) : 0.0;
        }
    return matrix(x, w);
}

} // namespace

TEST(BaselineJson, RoundTripsPreservePredictions)
{
    const auto inst = oracle::random_logistic(120, 6, 13);
    const auto dtm = serialization_matrix(inst);
    const auto counts = serialization_matrix(inst, Weighting::Frequency);
    const auto& vocab = dtm.vocabulary();

    const auto nb = nb_fit(counts, inst.y);
    const auto nb2 = nb_from_json(through_text(nb_to_json(nb, vocab)), vocab);
    EXPECT_EQ(nb2.term_log_likelihoods, nb.term_log_likelihoods);
    EXPECT_EQ(nb2.class_log_priors, nb.class_log_priors);

    const auto svm = svm_fit(SparseRows::from_dtm(dtm), to_signed_labels(inst.y), 1.0, 20, 3);
    const auto svm2 = svm_from_json(through_text(svm_to_json(svm, vocab)), vocab);
    EXPECT_EQ(svm2.weights, svm.weights);
    EXPECT_EQ(svm2.bias, svm.bias);

    const auto knn = knn_from_json(through_text(knn_to_json({7, RowNormalization::None}, vocab)), vocab);
    EXPECT_EQ(knn.k, 7);
    EXPECT_EQ(knn.row_normalization, RowNormalization::None);

    const auto lr = truncated_lr_fit(dtm, inst.y, 0.7);
    const auto lr2 = truncated_lr_from_json(through_text(truncated_lr_to_json(lr, vocab)), vocab);
    EXPECT_EQ(lr2.retained, lr.retained);
    EXPECT_EQ(lr2.threshold, lr.threshold);
    for (std::size_t i = 0; i < dtm.rows(); ++i) {
        EXPECT_EQ(lr2.predict_proba(dtm.row(i)), lr.predict_proba(dtm.row(i)));
        EXPECT_EQ(nb_predict(nb2, counts.row(i)), nb_predict(nb, counts.row(i)));
        EXPECT_EQ(svm_predict(svm2, dtm.row(i)), svm_predict(svm, dtm.row(i)));
    }
}

TEST(BaselineJson, EnvelopeChecks)
{
    const auto inst = oracle::random_logistic(60, 6, 14);
    const auto dtm = serialization_matrix(inst, Weighting::Frequency);
    const auto& vocab = dtm.vocabulary();
    const auto j = nb_to_json(nb_fit(dtm, inst.y), vocab);
    EXPECT_EQ(j.at("model_type"), "naive_bayes");

    auto other = vocab;
    other.back() = "zz";
    try {
        nb_from_json(j, other);
        FAIL() << "expected a vocabulary mismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::VocabularyMismatch);
    }
    try {
        svm_from_json(j, vocab);
        FAIL() << "expected a schema error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema);
    }
    auto broken = j;
    broken.erase("smoothing");
    try {
        nb_from_json(broken, vocab);
        FAIL() << "expected a schema error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema);
    }
}
