// Command-line front end: preprocess, train, cv, predict, evaluate, baseline,
// simulate, report. Exit codes: 1 usage, 2 data, 3 numerical.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtl/rtl.hpp"

namespace fs = std::filesystem;
using rtl::json;

namespace {

constexpr const char* kToolVersion = "rtl 0.1.0";

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(const rtl::Error& e)
{
    switch (e.kind()) {
    case rtl::ErrorKind::Parameter: return 1;
    case rtl::ErrorKind::Numerical: return 3;
    default: return 2;
    }
}

std::string iso_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fnv_hex(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---- shared state -------------------------------------------------------------

struct Common {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    unsigned threads = 0;
    std::string config;
};

struct Run {
    std::string command;
    std::vector<std::string> argv;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    json extra = json::object();
    std::string started = iso_now();
};

Common common;
Run run;
CLI::App* active_app = nullptr;

fs::path out_path(const std::string& name)
{
    fs::create_directories(common.out_dir);
    const fs::path p = fs::path(common.out_dir) / name;
    run.outputs.push_back(p.string());
    return p;
}

std::ofstream open_out(const std::string& name)
{
    const auto p = out_path(name);
    std::ofstream out(p);
    if (!out) throw rtl::Error(rtl::ErrorKind::Io, "cannot write " + p.string());
    return out;
}

void write_manifest(const CLI::App& root)
{
    const std::string effective = active_app ? active_app->config_to_str(true, false) : std::string();
    json m = {
        {"command", run.command},
        {"argv", run.argv},
        {"inputs", run.inputs},
        {"outputs", run.outputs},
        {"effective_config", effective},
        {"config_hash", fnv_hex(effective)},
        {"seed", common.seed},
        {"tool_version", kToolVersion},
        {"started", run.started},
        {"finished", iso_now()},
    };
    if (!run.extra.empty()) m["details"] = run.extra;
    (void)root;
    std::string name = run.command;
    for (auto& c : name)
        if (c == ' ') c = '_';
    rtl::write_json_file((fs::path(common.out_dir) / (name + ".manifest.json")).string(), m);
}

void add_common(CLI::App* app)
{
    app->add_option("--seed", common.seed, "Seed for every random choice")->capture_default_str();
    app->add_option("--out-dir", common.out_dir, "Directory for outputs")->capture_default_str();
    app->add_option("--threads", common.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
    app->add_option("--config", common.config, "Flat key = value file with option defaults; command-line values win");
}

// ---- artifact helpers ---------------------------------------------------------

std::vector<int> read_labels(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw rtl::Error(rtl::ErrorKind::Io, "cannot open " + path);
    run.inputs.push_back(path);
    std::vector<int> y;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line != "0" && line != "1") throw rtl::Error(rtl::ErrorKind::Schema, path + ": labels must be 0 or 1");
        y.push_back(line == "1");
    }
    return y;
}

void write_labels(const std::string& name, std::span<const int> y)
{
    auto out = open_out(name);
    for (int v : y) out << v << '\n';
}

std::string default_labels(const std::string& dtm_path)
{
    return fs::path(dtm_path).replace_extension(".labels").string();
}

struct LoadedDtm {
    rtl::DocumentTermMatrix dtm;
    std::vector<int> labels;
};

rtl::DocumentTermMatrix load_dtm(const std::string& path, const std::string& vocab_path)
{
    std::ifstream in(path);
    if (!in) throw rtl::Error(rtl::ErrorKind::Io, "cannot open " + path);
    run.inputs.push_back(path);
    run.inputs.push_back(vocab_path);
    return rtl::read_dtm(in, rtl::read_vocabulary(vocab_path));
}

LoadedDtm load_labeled(const std::string& path, const std::string& vocab_path, std::string labels_path)
{
    LoadedDtm d{load_dtm(path, vocab_path), {}};
    if (labels_path.empty()) labels_path = default_labels(path);
    d.labels = read_labels(labels_path);
    if (d.labels.size() != d.dtm.rows())
        throw rtl::Error(rtl::ErrorKind::DimensionMismatch,
                         "labels (" + std::to_string(d.labels.size()) + ") differ from matrix rows (" +
                             std::to_string(d.dtm.rows()) + ")");
    return d;
}

void write_dtm_file(const std::string& name, const rtl::DocumentTermMatrix& dtm)
{
    auto out = open_out(name);
    rtl::write_dtm(out, dtm);
}

struct PredictionRow {
    double probability;
    rtl::Polarity label;
};

void write_predictions(const std::string& name, const std::vector<PredictionRow>& rows)
{
    auto out = open_out(name);
    out.precision(17);
    out << "row,probability,prediction\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i << ',';
        if (std::isnan(rows[i].probability)) out << "NA";
        else out << rows[i].probability;
        out << ',' << rtl::to_int(rows[i].label) << '\n';
    }
}

std::vector<rtl::Polarity> read_predictions(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw rtl::Error(rtl::ErrorKind::Io, "cannot open " + path);
    run.inputs.push_back(path);
    rtl::csv::Reader reader(in);
    rtl::csv::Record rec;
    if (!reader.next(rec)) return {};
    const auto col = std::find(rec.begin(), rec.end(), "prediction");
    if (col == rec.end()) throw rtl::Error(rtl::ErrorKind::Schema, path + ": missing column 'prediction'");
    const auto k = static_cast<std::size_t>(col - rec.begin());
    std::vector<rtl::Polarity> out;
    std::size_t row = 0;
    while (reader.next(rec)) {
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() <= k || (rec[k] != "0" && rec[k] != "1")) throw rtl::RowError(row, "prediction must be 0 or 1");
        out.push_back(rec[k] == "1" ? rtl::Polarity::Positive : rtl::Polarity::Negative);
        ++row;
    }
    return out;
}

std::vector<rtl::Polarity> to_polarity(std::span<const int> y)
{
    std::vector<rtl::Polarity> out;
    for (int v : y) out.push_back(rtl::polarity_from_int(v));
    return out;
}

json evaluate_and_write(const std::vector<rtl::Polarity>& pred, std::span<const int> truth,
                        std::optional<rtl::FeatureCounts> features, const std::string& stem = "metrics")
{
    const auto cc = rtl::confusion(pred, to_polarity(truth));
    const auto m = rtl::compute_metrics(cc);
    const auto j = rtl::metrics_to_json(cc, m, features);
    rtl::write_json_file(out_path(stem + ".json").string(), j);
    {
        auto out = open_out(stem + ".txt");
        rtl::write_metrics_table(out, m, features);
    }
    rtl::write_metrics_table(std::cout, m, features);
    return j;
}

// ---- featurizer ---------------------------------------------------------------

struct PreprocessFlags {
    std::string weighting = "tfidf";
    std::string stemmer = "porter";
    std::string stopwords;
    std::size_t min_token_length = 1;

    rtl::PreprocessConfig config() const
    {
        rtl::PreprocessConfig c;
        if (!stopwords.empty()) {
            c.stopword_list = rtl::load_stopwords(stopwords);
            run.inputs.push_back(stopwords);
        }
        if (stemmer == "porter") c.stemmer = rtl::Stemmer::Porter;
        else if (stemmer == "none") c.stemmer = rtl::Stemmer::None;
        else throw Usage("--stemmer must be porter or none");
        c.min_token_length = min_token_length;
        c.validate();
        return c;
    }
};

json featurizer_json(const rtl::DocumentTermMatrix& dtm, const PreprocessFlags& f)
{
    return {
        {"weighting", rtl::to_string(dtm.weighting())},
        {"vocabulary_hash", dtm.hash()},
        {"vocabulary", dtm.vocabulary()},
        {"idf", dtm.idf()},
        {"stemmer", f.stemmer},
        {"stopwords", f.stopwords.empty() ? "default" : f.stopwords},
        {"min_token_length", f.min_token_length},
    };
}

rtl::DocumentTermMatrix featurizer_reference(const json& j)
{
    try {
        auto vocab = j.at("vocabulary").get<std::vector<std::string>>();
        if (rtl::vocabulary_hash(vocab) != j.at("vocabulary_hash").get<std::string>())
            throw rtl::Error(rtl::ErrorKind::VocabularyMismatch, "featurizer vocabulary hash mismatch");
        return rtl::DocumentTermMatrix::from_rows(std::move(vocab),
                                                  rtl::weighting_from_string(j.at("weighting").get<std::string>()),
                                                  {}, j.at("idf").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw rtl::Error(rtl::ErrorKind::Schema, std::string("featurizer json: ") + e.what());
    }
}

// ---- solver flags -------------------------------------------------------------

struct SolverFlags {
    double gamma = 3.7;
    bool standardize = false;
    bool adaptive = false;
    bool no_intercept = false;
    double tolerance = 1e-7;
    int max_outer = 100;
    int max_inner = 1000;

    void add(CLI::App* app)
    {
        app->add_option("--gamma", gamma, "SCAD gamma (> 2)")->capture_default_str();
        app->add_flag("--standardize", standardize, "Scale columns to unit mean square");
        app->add_flag("--adaptive-rescaling", adaptive, "Threshold on the unit-curvature scale");
        app->add_flag("--no-intercept", no_intercept, "Fit without an intercept");
        app->add_option("--tolerance", tolerance, "Convergence tolerance")->capture_default_str();
        app->add_option("--max-outer", max_outer, "Outer iteration cap")->capture_default_str();
        app->add_option("--max-inner", max_inner, "Inner sweep cap")->capture_default_str();
    }

    rtl::FitOptions options() const
    {
        rtl::FitOptions o;
        o.tolerance = tolerance;
        o.max_outer_iters = max_outer;
        o.max_inner_sweeps = max_inner;
        o.adaptive_rescaling = adaptive;
        o.standardize = standardize;
        o.fit_intercept = !no_intercept;
        o.validate();
        return o;
    }
};

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---- commands -----------------------------------------------------------------

struct PreprocessCmd {
    std::string input;
    rtl::CsvColumns columns;
    PreprocessFlags flags;
    double train_fraction = 0.0;
    std::string featurizer;
    std::string prefix = "corpus";

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("preprocess", "CSV -> document-term matrix + vocabulary");
        add_common(app);
        app->add_option("--input", input, "Review CSV")->required();
        app->add_option("--text-col", columns.text, "Text column")->capture_default_str();
        app->add_option("--rating-col", columns.rating, "Rating column (1-5)")->capture_default_str();
        app->add_option("--id-col", columns.id, "Optional id column");
        app->add_option("--weighting", flags.weighting, "tfidf or frequency")->capture_default_str();
        app->add_option("--stemmer", flags.stemmer, "porter or none")->capture_default_str();
        app->add_option("--stopwords", flags.stopwords, "Stop-word file (default: built-in English list)");
        app->add_option("--min-token-length", flags.min_token_length, "Minimum token length")->capture_default_str();
        app->add_option("--train-fraction", train_fraction,
                        "Split labeled rows into train/test; the test part is projected on the train vocabulary");
        app->add_option("--featurizer", featurizer, "Project onto an existing featurizer.json instead of fitting one");
        app->add_option("--prefix", prefix, "Output name when not splitting")->capture_default_str();
        app->callback([this, app] {
            active_app = app;
            run.command = "preprocess";
            execute();
        });
    }

    void execute()
    {
        const auto config = flags.config();
        const auto weighting = rtl::weighting_from_string(flags.weighting);
        run.inputs.push_back(input);
        const auto docs = rtl::ingest_csv(input, columns);
        std::size_t neutral = 0;
        for (const auto& d : docs) neutral += d.label ? 0 : 1;
        std::cerr << "read " << docs.size() << " rows; excluded " << neutral << " rating-3 rows\n";
        run.extra["rows"] = docs.size();
        run.extra["excluded_rating_3"] = neutral;

        if (!featurizer.empty()) {
            run.inputs.push_back(featurizer);
            const auto ref = featurizer_reference(rtl::read_json_file(featurizer));
            const auto dtm = rtl::project_dtm(docs, config, ref);
            write_dtm_file(prefix + ".dtm", dtm);
            write_labels(prefix + ".labels", rtl::polarity_labels(rtl::labeled_only(docs)));
            rtl::write_json_file(out_path("vocabulary.json").string(), rtl::vocabulary_to_json(dtm));
            run.extra["documents"] = dtm.rows();
            return;
        }
        if (train_fraction > 0.0) {
            const auto parts = rtl::split(docs, train_fraction, common.seed);
            const auto train = rtl::build_dtm(parts.train, config, weighting);
            const auto test = rtl::project_dtm(parts.test, config, train);
            write_dtm_file("train.dtm", train);
            write_labels("train.labels", rtl::polarity_labels(parts.train));
            write_dtm_file("test.dtm", test);
            write_labels("test.labels", rtl::polarity_labels(parts.test));
            rtl::write_json_file(out_path("vocabulary.json").string(), rtl::vocabulary_to_json(train));
            rtl::write_json_file(out_path("featurizer.json").string(), featurizer_json(train, flags));
            run.extra["train_documents"] = train.rows();
            run.extra["test_documents"] = test.rows();
            run.extra["vocabulary_size"] = train.cols();
            std::cerr << "train " << train.rows() << " x " << train.cols() << ", test " << test.rows() << "\n";
        } else {
            const auto dtm = rtl::build_dtm(docs, config, weighting);
            write_dtm_file(prefix + ".dtm", dtm);
            write_labels(prefix + ".labels", rtl::polarity_labels(rtl::labeled_only(docs)));
            rtl::write_json_file(out_path("vocabulary.json").string(), rtl::vocabulary_to_json(dtm));
            rtl::write_json_file(out_path("featurizer.json").string(), featurizer_json(dtm, flags));
            run.extra["documents"] = dtm.rows();
            run.extra["vocabulary_size"] = dtm.cols();
            std::cerr << dtm.rows() << " documents x " << dtm.cols() << " terms\n";
        }
    }
};

struct DataFlags {
    std::string dtm, vocab, labels;

    void add(CLI::App* app, const std::string& prefix = "")
    {
        app->add_option("--" + prefix + "dtm", dtm, "Matrix artifact")->required();
        app->add_option("--" + (prefix.empty() ? std::string() : prefix) + "labels", labels,
                        "Labels file (default: matrix path with .labels)");
        if (prefix.empty()) app->add_option("--vocab", vocab, "vocabulary.json")->required();
    }
};

struct TrainCmd {
    DataFlags data;
    SolverFlags solver;
    std::string lambda = "";
    std::string cv_report;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("train", "Fit the SCAD logistic model");
        add_common(app);
        data.add(app);
        solver.add(app);
        auto* l = app->add_option("--lambda", lambda, "Penalty level, or 'max' for the smallest all-zero level");
        auto* c = app->add_option("--from-cv", cv_report, "Use the best (lambda, gamma) of a cv best.json");
        l->excludes(c);
        app->callback([this, app] {
            active_app = app;
            run.command = "train";
            execute();
        });
    }

    void execute()
    {
        if (lambda.empty() && cv_report.empty()) throw Usage("train needs --lambda or --from-cv");
        const auto d = load_labeled(data.dtm, data.vocab, data.labels);
        const auto options = solver.options();
        double lam = 0.0, gam = solver.gamma;
        const rtl::SparseDesign x(d.dtm);
        if (!cv_report.empty()) {
            run.inputs.push_back(cv_report);
            const auto j = rtl::read_json_file(cv_report);
            lam = j.at("lambda").get<double>();
            gam = j.at("gamma").get<double>();
        } else if (lambda == "max") {
            lam = rtl::lambda_max(x, d.labels, gam, options);
        } else {
            try {
                lam = std::stod(lambda);
            } catch (const std::exception&) {
                throw Usage("--lambda must be a number or 'max'");
            }
        }
        const auto f = rtl::fit(x, d.labels, rtl::ScadParams(lam, gam), options);
        const auto model = rtl::ScadModel::from_fit(f, rtl::share_vocabulary(d.dtm), d.dtm.weighting());
        rtl::write_json_file(out_path("model.json").string(), rtl::model_to_json(model));
        run.extra["lambda"] = lam;
        run.extra["gamma"] = gam;
        run.extra["selected"] = model.coefficients().size();
        run.extra["converged"] = f.converged;
        std::cerr << "lambda " << lam << ", gamma " << gam << ": " << model.coefficients().size()
                  << " selected features" << (f.converged ? "" : " (not converged)") << "\n";
    }
};

struct CvCmd {
    DataFlags data;
    SolverFlags solver;
    std::string k_values = "5";
    std::string gamma_values = "3.7";
    std::size_t n_lambda = 30;
    double ratio = 0.01;
    bool full_grid = false;
    std::string loss = "deviance";
    bool refit = false;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("cv", "Cross-validate over the (K, gamma, lambda) grid");
        add_common(app);
        data.add(app);
        solver.add(app);
        app->add_option("--k", k_values, "Comma-separated fold counts")->capture_default_str();
        app->add_option("--gammas", gamma_values, "Comma-separated gamma values")->capture_default_str();
        app->add_option("--n-lambda", n_lambda, "Lambda path length")->capture_default_str();
        app->add_option("--lambda-ratio", ratio, "Smallest lambda / lambda_max")->capture_default_str();
        app->add_flag("--full-grid", full_grid, "K = 5..20, gamma = 2.1..4.0");
        app->add_option("--loss", loss, "deviance or misclassification")->capture_default_str();
        app->add_flag("--refit", refit, "Also fit the full data at the best triple and write model.json");
        app->callback([this, app] {
            active_app = app;
            run.command = "cv";
            execute();
        });
    }

    void execute()
    {
        const auto d = load_labeled(data.dtm, data.vocab, data.labels);
        const auto options = solver.options();
        rtl::CvGrid grid;
        if (full_grid) grid = rtl::CvGrid::full();
        else {
            try {
                for (const auto& k : split_list(k_values)) grid.k_values.push_back(std::stoi(k));
                for (const auto& g : split_list(gamma_values)) grid.gamma_values.push_back(std::stod(g));
            } catch (const std::exception&) {
                throw Usage("--k and --gammas take comma-separated numbers");
            }
        }
        grid.lambda.count = n_lambda;
        grid.lambda.ratio = ratio;
        rtl::CvLoss cv_loss;
        if (loss == "deviance") cv_loss = rtl::CvLoss::Deviance;
        else if (loss == "misclassification") cv_loss = rtl::CvLoss::Misclassification;
        else throw Usage("--loss must be deviance or misclassification");

        const rtl::SparseDesign x(d.dtm);
        const auto report = rtl::grid_search(x, d.labels, grid, options, common.seed, cv_loss, common.threads);
        {
            auto out = open_out("cv_report.csv");
            rtl::write_cv_report_csv(out, report);
        }
        const auto& best = report.best();
        json b = {{"K", best.k}, {"gamma", best.gamma}, {"lambda", best.lambda}, {"mean_error", best.mean_error}};
        json dropped = json::array();
        for (const auto& [k, g] : report.dropped) dropped.push_back({k, g});
        b["dropped"] = dropped;
        rtl::write_json_file(out_path("best.json").string(), b);
        run.extra["best"] = b;
        std::cerr << "best K=" << best.k << " gamma=" << best.gamma << " lambda=" << best.lambda
                  << " cv=" << best.mean_error << "\n";
        if (refit) {
            std::vector<double> head;
            for (double l : report.lambdas) {
                head.push_back(l);
                if (l == best.lambda) break;
            }
            auto path = rtl::fit_path(x, d.labels, head, best.gamma, options);
            const auto model = rtl::ScadModel::from_fit(path.back(), rtl::share_vocabulary(d.dtm), d.dtm.weighting());
            rtl::write_json_file(out_path("model.json").string(), rtl::model_to_json(model));
            std::cerr << model.coefficients().size() << " selected features\n";
        }
    }
};

struct PredictCmd {
    std::string model, dtm, vocab;
    double cutoff = 0.5;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("predict", "Probabilities and labels for a matrix");
        add_common(app);
        app->add_option("--model", model, "model.json")->required();
        app->add_option("--dtm", dtm, "Matrix artifact")->required();
        app->add_option("--vocab", vocab, "vocabulary.json")->required();
        app->add_option("--cutoff", cutoff, "Positive iff probability >= cutoff")->capture_default_str();
        app->callback([this, app] {
            active_app = app;
            run.command = "predict";
            execute();
        });
    }

    void execute()
    {
        const auto m = load_dtm(dtm, vocab);
        run.inputs.push_back(model);
        const auto fitted = rtl::model_from_json(rtl::read_json_file(model), rtl::share_vocabulary(m));
        std::vector<PredictionRow> rows;
        std::size_t unknown = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double p = rtl::predict_proba(fitted, m.row(i), &unknown);
            rows.push_back({p, p >= cutoff ? rtl::Polarity::Positive : rtl::Polarity::Negative});
        }
        if (unknown) std::cerr << "warning: " << unknown << " unknown term entries ignored\n";
        write_predictions("predictions.csv", rows);
    }
};

struct EvaluateCmd {
    std::string predictions, labels, model;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("evaluate", "Confusion counts and metrics");
        add_common(app);
        app->add_option("--predictions", predictions, "predictions.csv")->required();
        app->add_option("--labels", labels, "True labels file")->required();
        app->add_option("--model", model, "Optional model.json for feature counts");
        app->callback([this, app] {
            active_app = app;
            run.command = "evaluate";
            execute();
        });
    }

    void execute()
    {
        const auto pred = read_predictions(predictions);
        const auto truth = read_labels(labels);
        std::optional<rtl::FeatureCounts> features;
        if (!model.empty()) {
            run.inputs.push_back(model);
            const auto j = rtl::read_json_file(model);
            features = rtl::FeatureCounts{j.at("vocabulary_size").get<std::size_t>(), j.at("coefficients").size()};
        }
        evaluate_and_write(pred, truth, features);
    }
};

struct BaselineCmd {
    DataFlags train;
    std::string test_dtm, test_labels, vocab;
    // knn
    int k = 0;
    int folds = 5;
    std::string normalization = "l2";
    // svm
    double cost = 0.0;
    int epochs = 20;
    // lr
    double threshold = 0.0;
    std::string method;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("baseline", "Comparison classifiers: nb, knn, svm, lr");
        app->require_subcommand(1);
        for (const char* name : {"nb", "knn", "svm", "lr"}) {
            auto* sub = app->add_subcommand(name, std::string(name) + " baseline");
            add_common(sub);
            sub->add_option("--train-dtm", train.dtm, "Training matrix")->required();
            sub->add_option("--train-labels", train.labels, "Training labels (default: beside matrix)");
            sub->add_option("--test-dtm", test_dtm, "Test matrix")->required();
            sub->add_option("--test-labels", test_labels, "Test labels (default: beside matrix)");
            sub->add_option("--vocab", vocab, "vocabulary.json shared by both matrices")->required();
            const std::string m = name;
            if (m == "knn") {
                sub->add_option("--k", k, "Neighbors; 0 selects k by cross-validation")->capture_default_str();
                sub->add_option("--folds", folds, "Folds for k selection")->capture_default_str();
                sub->add_option("--normalization", normalization, "l2 or none")->capture_default_str();
            } else if (m == "svm") {
                sub->add_option("--cost", cost, "Cost C; 0 selects C by cross-validation")->capture_default_str();
                sub->add_option("--folds", folds, "Folds for C selection")->capture_default_str();
                sub->add_option("--epochs", epochs, "Passes over the data")->capture_default_str();
            } else if (m == "lr") {
                sub->add_option("--threshold", threshold, "Sparsity threshold in (0,1)")->required();
            }
            sub->callback([this, sub, m] {
                active_app = sub;
                method = m;
                run.command = "baseline " + m;
                execute();
            });
        }
    }

    void execute()
    {
        const auto tr = load_labeled(train.dtm, vocab, train.labels);
        const auto te = load_labeled(test_dtm, vocab, test_labels);
        std::vector<PredictionRow> rows;
        std::optional<rtl::FeatureCounts> features;
        const auto& terms = tr.dtm.vocabulary();
        const auto save = [](const rtl::json& j) { rtl::write_json_file(out_path("model.json").string(), j); };
        const double na = std::numeric_limits<double>::quiet_NaN();
        if (method == "nb") {
            const auto model = rtl::baselines::nb_fit(tr.dtm, tr.labels);
            save(rtl::baselines::nb_to_json(model, terms));
            for (std::size_t i = 0; i < te.dtm.rows(); ++i) {
                const auto post = rtl::baselines::nb_log_posteriors(model, te.dtm.row(i));
                const double p = 1.0 / (1.0 + std::exp(post[0] - post[1]));
                rows.push_back({p, rtl::baselines::nb_predict(model, te.dtm.row(i))});
            }
        } else if (method == "knn") {
            rtl::baselines::RowNormalization norm;
            if (normalization == "l2") norm = rtl::baselines::RowNormalization::L2;
            else if (normalization == "none") norm = rtl::baselines::RowNormalization::None;
            else throw Usage("--normalization must be l2 or none");
            int chosen = k;
            if (chosen == 0) {
                const auto candidates = rtl::baselines::default_knn_candidates();
                chosen = rtl::baselines::knn_select_k(tr.dtm, tr.labels, candidates, folds, common.seed, norm);
            }
            run.extra["k"] = chosen;
            std::cerr << "k = " << chosen << "\n";
            const rtl::baselines::KnnConfig config{chosen, norm};
            save(rtl::baselines::knn_to_json(config, terms));
            const rtl::baselines::KnnIndex index(tr.dtm, tr.labels, config);
            for (std::size_t i = 0; i < te.dtm.rows(); ++i) rows.push_back({na, index.predict(te.dtm.row(i))});
        } else if (method == "svm") {
            const auto x = rtl::baselines::SparseRows::from_dtm(tr.dtm);
            const auto y = rtl::baselines::to_signed_labels(tr.labels);
            double c = cost;
            if (c <= 0.0) c = select_cost(tr);
            run.extra["cost"] = c;
            std::cerr << "C = " << c << "\n";
            const auto model = rtl::baselines::svm_fit(x, y, c, epochs, common.seed);
            save(rtl::baselines::svm_to_json(model, terms));
            for (std::size_t i = 0; i < te.dtm.rows(); ++i)
                rows.push_back({na, rtl::baselines::svm_predict(model, te.dtm.row(i))});
        } else {
            const auto model = rtl::baselines::truncated_lr_fit(tr.dtm, tr.labels, threshold);
            save(rtl::baselines::truncated_lr_to_json(model, terms));
            features = rtl::FeatureCounts{model.retained.size(), model.retained.size()};
            run.extra["retained"] = model.retained.size();
            std::cerr << model.retained.size() << " terms retained\n";
            for (std::size_t i = 0; i < te.dtm.rows(); ++i) {
                const double p = model.predict_proba(te.dtm.row(i));
                rows.push_back({p, model.predict(te.dtm.row(i))});
            }
        }
        write_predictions("predictions.csv", rows);
        evaluate_and_write([&] {
            std::vector<rtl::Polarity> p;
            for (const auto& r : rows) p.push_back(r.label);
            return p;
        }(), te.labels, features);
    }

    double select_cost(const LoadedDtm& tr) const
    {
        const auto costs = rtl::baselines::default_svm_costs();
        const auto fold = rtl::kfold_split(tr.labels, folds, common.seed);
        std::vector<double> errors(costs.size(), 0.0);
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> a, b;
            std::vector<int> ya, yb;
            for (std::size_t i = 0; i < tr.labels.size(); ++i) {
                (fold[i] == f ? b : a).push_back(i);
                (fold[i] == f ? yb : ya).push_back(tr.labels[i]);
            }
            const auto xa = rtl::baselines::SparseRows::from_dtm(tr.dtm.select_rows(a));
            const auto xb = tr.dtm.select_rows(b);
            const auto sa = rtl::baselines::to_signed_labels(ya);
            for (std::size_t c = 0; c < costs.size(); ++c) {
                const auto m = rtl::baselines::svm_fit(xa, sa, costs[c], epochs, rtl::mix_seed(common.seed, f));
                for (std::size_t i = 0; i < xb.rows(); ++i)
                    errors[c] += rtl::to_int(rtl::baselines::svm_predict(m, xb.row(i))) != yb[i];
            }
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < costs.size(); ++c)
            if (errors[c] < errors[best]) best = c;
        return costs[best];
    }
};

struct SimulateCmd {
    std::string n_values = "200,800,3200";
    std::size_t p = 50, k = 5, reps = 50;
    double beta = 2.0;
    double gamma = 3.7;
    int folds = 5;
    std::size_t n_lambda = 30;
    std::string rule = "min";
    double lambda = -1.0;
    double feature_scale = 1.0;
    bool sparse_features = false;
    int restarts = 10;
    bool tune_once = false;
    std::string which;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("simulate", "Monte Carlo checks on synthetic logistic data");
        app->require_subcommand(1);
        for (const char* name : {"consistency", "sparsity", "oracle", "global"}) {
            auto* sub = app->add_subcommand(name, std::string(name) + " experiment");
            add_common(sub);
            sub->add_option("--n", n_values, "Sample size(s), comma-separated for consistency")->capture_default_str();
            sub->add_option("--p", p, "Feature count")->capture_default_str();
            sub->add_option("--k", k, "True support size")->capture_default_str();
            sub->add_option("--beta", beta, "Magnitude of the true nonzeros")->capture_default_str();
            sub->add_option("--reps", reps, "Repetitions")->capture_default_str();
            sub->add_option("--gamma", gamma, "SCAD gamma")->capture_default_str();
            sub->add_option("--folds", folds, "CV folds for tuning lambda")->capture_default_str();
            sub->add_option("--n-lambda", n_lambda, "Lambda path length")->capture_default_str();
            sub->add_option("--rule", rule, "min or 1se lambda selection")->capture_default_str();
            sub->add_option("--lambda", lambda, "Fixed lambda (skips cross-validation)");
            sub->add_option("--feature-scale", feature_scale, "Feature standard deviation")->capture_default_str();
            sub->add_flag("--sparse-features", sparse_features, "Nonnegative sparse features");
            sub->add_flag("--tune-once", tune_once, "Choose lambda by CV on replicate 0, then hold it fixed");
            if (std::string(name) == "global")
                sub->add_option("--restarts", restarts, "Random initializations")->capture_default_str();
            const std::string w = name;
            sub->callback([this, sub, w] {
                active_app = sub;
                which = w;
                run.command = "simulate " + w;
                execute();
            });
        }
    }

    rtl::sim::SimDesign design(std::size_t n) const
    {
        rtl::sim::SimDesign d;
        d.n = n;
        d.p = p;
        d.k = k;
        d.beta_magnitude = beta;
        d.n_reps = reps;
        d.seed = common.seed;
        d.feature_scale = feature_scale;
        d.sparse_features = sparse_features;
        d.validate();
        return d;
    }

    void write_reps(const std::string& name, const std::vector<rtl::sim::SimReport>& reports)
    {
        auto out = open_out(name);
        out.precision(17);
        out << "n,rep,estimation_error,zeros_recovered,support_recovered,selected,lambda,converged\n";
        for (const auto& r : reports)
            for (std::size_t i = 0; i < r.reps.size(); ++i) {
                const auto& e = r.reps[i];
                out << r.design.n << ',' << i << ',' << e.estimation_error << ',' << e.zeros_recovered << ','
                    << e.support_recovered << ',' << e.selected << ',' << e.lambda << ',' << e.converged << '\n';
            }
    }

    void execute()
    {
        std::vector<std::size_t> ns;
        try {
            for (const auto& s : split_list(n_values)) ns.push_back(std::stoul(s));
        } catch (const std::exception&) {
            throw Usage("--n takes comma-separated integers");
        }
        if (ns.empty()) throw Usage("--n is empty");
        rtl::sim::Tuning t;
        t.gamma = gamma;
        t.cv_folds = folds;
        t.path.count = n_lambda;
        t.threads = common.threads;
        if (rule == "1se") t.rule = rtl::sim::LambdaRule::OneStandardError;
        else if (rule != "min") throw Usage("--rule must be min or 1se");
        if (lambda >= 0.0) t.fixed_lambda = lambda;
        if (tune_once && !t.fixed_lambda) {
            const auto data = rtl::sim::gen_synthetic(design(ns.front()), 0);
            t.fixed_lambda = rtl::sim::tuned_fit(data, t, rtl::mix_seed(common.seed, 0x7475)).lambda;
            std::cerr << "tuned lambda " << *t.fixed_lambda << "\n";
        }
        json summary;
        if (which == "consistency") {
            std::vector<rtl::sim::SimDesign> ds;
            for (auto n : ns) ds.push_back(design(n));
            const auto r = rtl::sim::consistency_experiment(ds, t);
            write_reps("consistency_reps.csv", r.reports);
            json rows = json::array();
            for (const auto& row : r.rows)
                rows.push_back({{"n", row.n}, {"p", row.p}, {"median_error", row.median_error},
                                {"scaled_error", row.scaled_error}, {"nonconverged_rate", row.nonconverged_rate},
                                {"valid", row.valid}});
            summary = {{"rows", rows}, {"strictly_decreasing", r.strictly_decreasing()},
                       {"band_ratio", r.band_ratio()}, {"valid", r.valid()}};
        } else if (which == "sparsity") {
            const auto r = rtl::sim::sparsity_experiment(design(ns.front()), t);
            write_reps("sparsity_reps.csv", {r.report});
            summary = {{"zero_recovery_rate", r.zero_recovery_rate},
                       {"support_recovery_rate", r.support_recovery_rate},
                       {"nonconverged_rate", r.report.nonconverged_rate()},
                       {"valid", r.report.valid()}};
        } else if (which == "oracle") {
            const auto d = design(ns.front());
            std::vector<Eigen::VectorXd> dirs;
            for (std::size_t a = 0; a < std::min<std::size_t>(2, k); ++a) {
                dirs.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k)));
                dirs.back()(static_cast<Eigen::Index>(a)) = 1.0;
            }
            const auto r = rtl::sim::oracle_experiment(d, t, dirs);
            auto out = open_out("oracle_reps.csv");
            out.precision(17);
            out << "rep,oracle_gap";
            for (std::size_t a = 0; a < dirs.size(); ++a) out << ",statistic_e" << a + 1;
            out << '\n';
            for (std::size_t i = 0; i < r.oracle_gap.size(); ++i) {
                out << i << ',' << r.oracle_gap[i];
                for (const auto& s : r.statistics) out << ',' << s[i];
                out << '\n';
            }
            json ks = json::array();
            for (const auto& v : r.ks) ks.push_back({{"statistic", v.statistic}, {"p_value", v.p_value}});
            summary = {{"ks", ks}, {"dropped", r.dropped}};
        } else {
            const auto r = rtl::sim::global_optimum_probe(design(ns.front()), restarts, t);
            summary = {{"objectives", r.objectives}, {"spread", r.spread}, {"lambda", r.lambda},
                       {"min_curvature", r.min_curvature}, {"convexity_threshold", r.convexity_threshold},
                       {"convex_regime", r.convex_regime()}, {"all_converged", r.all_converged}};
        }
        if (t.fixed_lambda) summary["fixed_lambda"] = *t.fixed_lambda;
        rtl::write_json_file(out_path(which + "_summary.json").string(), summary);
        std::cout << summary.dump(2) << '\n';
    }
};

struct ReportCmd {
    std::string model, dtm, vocab;

    void add(CLI::App& root)
    {
        auto* app = root.add_subcommand("report", "Per-term coefficient report for plotting");
        add_common(app);
        app->add_option("--model", model, "model.json")->required();
        app->add_option("--dtm", dtm, "Matrix the model was fit on")->required();
        app->add_option("--vocab", vocab, "vocabulary.json")->required();
        app->callback([this, app] {
            active_app = app;
            run.command = "report";
            execute();
        });
    }

    void execute()
    {
        const auto m = load_dtm(dtm, vocab);
        run.inputs.push_back(model);
        const auto fitted = rtl::model_from_json(rtl::read_json_file(model), rtl::share_vocabulary(m));
        const auto df = m.document_frequency();
        std::vector<double> sums(m.cols(), 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const auto r = m.row(i);
            for (std::size_t e = 0; e < r.size(); ++e) sums[r.index[e]] += r.value[e];
        }
        auto out = open_out("feature_report.csv");
        out.precision(17);
        out << "term,coefficient,document_frequency,mean_weight,selected\n";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double c = fitted.coefficient(j);
            rtl::csv::write_field(out, m.vocabulary()[j]);
            out << ',' << c << ',' << df[j] << ',' << sums[j] / static_cast<double>(std::max<std::size_t>(m.rows(), 1))
                << ',' << (c != 0.0 ? 1 : 0) << '\n';
        }
        const auto selected = rtl::selected_features(fitted);
        json sel = json::array();
        for (const auto& s : selected) sel.push_back({s.term, s.coefficient});
        rtl::write_json_file(out_path("selected_features.json").string(),
                             {{"selected_count", selected.size()}, {"vocabulary_size", m.cols()}, {"features", sel}});
        std::cerr << selected.size() << " of " << m.cols() << " terms selected\n";
    }
};

// Expands --config into explicit options placed right after the subcommand
// path, so that later command-line occurrences override them.
std::vector<std::string> expand_config(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
        else if (args[i].starts_with("--config=")) file = args[i].substr(9);
    }
    if (file.empty()) return args;
    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigINI().from_file(file)) {
        if (item.name == "++" || item.name == "--" || item.name == "config") continue;
        if (item.inputs.empty()) injected.push_back("--" + item.name);
        else injected.push_back("--" + item.name + "=" + CLI::detail::join(item.inputs, ","));
    }
    std::size_t path_end = 0;
    while (path_end < args.size() && path_end < 2 && !args[path_end].starts_with("-")) ++path_end;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(path_end), injected.begin(), injected.end());
    return args;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse SCAD logistic regression for review polarity"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

    PreprocessCmd preprocess;
    TrainCmd train;
    CvCmd cv;
    PredictCmd predict;
    EvaluateCmd evaluate;
    BaselineCmd baseline;
    SimulateCmd simulate;
    ReportCmd report;
    preprocess.add(app);
    train.add(app);
    cv.add(app);
    predict.add(app);
    evaluate.add(app);
    baseline.add(app);
    simulate.add(app);
    report.add(app);

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        write_manifest(app);
        return 0;
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::Error& e) {
        app.exit(e);
        return 1;
    } catch (const Usage& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const rtl::RowError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const rtl::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
