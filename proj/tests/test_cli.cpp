#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "rtl/rtl.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("rtl_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& content) const
    {
        std::ofstream(path(name)) << content;
    }

    std::string read(const std::string& name) const
    {
        std::ifstream in(path(name));
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run(const std::string& args) const
    {
        const std::string cmd = std::string(RTL_CLI_PATH) + " " + args + " --out-dir " + dir_.string() + " >" +
                                path("stdout.txt") + " 2>" + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    // Twelve reviews with one clearly positive and one clearly negative word.
    void write_toy_corpus() const
    {
        std::string csv = "text,rating\n";
        for (int i = 0; i < 6; ++i) {
            csv += "\"Great room, great staff " + std::to_string(i) + "\",5\n";
            csv += "\"Dirty room and rude staff " + std::to_string(i) + "\",1\n";
        }
        csv += "Average stay,3\n";
        write("reviews.csv", csv);
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, PreprocessWritesArtifactsAndManifest)
{
    write("reviews.csv", "text,rating\n\"Great hotel, great staff\",5\nTerrible noisy hotel,1\nIt was fine,3\n");
    ASSERT_EQ(run("preprocess --input " + path("reviews.csv")), 0) << read("stderr.txt");
    const auto vocab = rtl::read_vocabulary(path("vocabulary.json"));
    EXPECT_EQ(vocab, (std::vector<std::string>{"great", "hotel", "noisi", "staff", "terribl"}));
    std::ifstream in(path("corpus.dtm"));
    const auto dtm = rtl::read_dtm(in, vocab);
    EXPECT_EQ(dtm.rows(), 2u);
    EXPECT_EQ(read("corpus.labels"), "1\n0\n");
    const auto manifest = rtl::read_json_file(path("preprocess.manifest.json"));
    EXPECT_EQ(manifest.at("command"), "preprocess");
    EXPECT_EQ(manifest.at("details").at("excluded_rating_3"), 1);
    EXPECT_EQ(manifest.at("seed"), 1);
    EXPECT_FALSE(manifest.at("config_hash").get<std::string>().empty());
    const auto featurizer = rtl::read_json_file(path("featurizer.json"));
    EXPECT_EQ(featurizer.at("vocabulary_hash"), dtm.hash());
    EXPECT_EQ(featurizer.at("idf").size(), vocab.size());
}

TEST_F(Cli, EmptyCorpusIsADataError)
{
    write("reviews.csv", "text,rating\nthe and of,5\nis was,1\n");
    EXPECT_EQ(run("preprocess --input " + path("reviews.csv")), 2);
    EXPECT_NE(read("stderr.txt").find("empty corpus"), std::string::npos);
}

TEST_F(Cli, MalformedRowAndBadOptionExitCodes)
{
    write("reviews.csv", "text,rating\ngood,5\nbad,seven\n");
    EXPECT_EQ(run("preprocess --input " + path("reviews.csv")), 2);
    EXPECT_NE(read("stderr.txt").find("row 1"), std::string::npos);
    EXPECT_EQ(run("preprocess --input " + path("reviews.csv") + " --weighting binary"), 1);
    EXPECT_EQ(run("train --bogus"), 1);
}

TEST_F(Cli, TrainAtLambdaMaxSelectsNothing)
{
    write_toy_corpus();
    ASSERT_EQ(run("preprocess --input " + path("reviews.csv")), 0) << read("stderr.txt");
    ASSERT_EQ(run("train --dtm " + path("corpus.dtm") + " --vocab " + path("vocabulary.json") + " --lambda max"), 0)
        << read("stderr.txt");
    const auto model = rtl::read_json_file(path("model.json"));
    EXPECT_TRUE(model.at("coefficients").empty());
    ASSERT_EQ(run("report --model " + path("model.json") + " --dtm " + path("corpus.dtm") + " --vocab " +
                  path("vocabulary.json")),
              0);
    const auto csv = read("feature_report.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "term,coefficient,document_frequency,mean_weight,selected");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        EXPECT_TRUE(line.ends_with(",0")) << line;
    }
    EXPECT_EQ(rows, static_cast<int>(model.at("vocabulary_size").get<std::size_t>()));
    EXPECT_EQ(rtl::read_json_file(path("selected_features.json")).at("selected_count"), 0);
}

TEST_F(Cli, TrainedModelRoundTripsThroughPredict)
{
    write_toy_corpus();
    ASSERT_EQ(run("preprocess --input " + path("reviews.csv")), 0);
    ASSERT_EQ(run("train --dtm " + path("corpus.dtm") + " --vocab " + path("vocabulary.json") + " --lambda 0.01"), 0)
        << read("stderr.txt");
    ASSERT_EQ(run("predict --model " + path("model.json") + " --dtm " + path("corpus.dtm") + " --vocab " +
                  path("vocabulary.json")),
              0);

    const auto vocab = rtl::read_vocabulary(path("vocabulary.json"));
    std::ifstream in(path("corpus.dtm"));
    const auto dtm = rtl::read_dtm(in, vocab);
    const auto model = rtl::model_from_json(rtl::read_json_file(path("model.json")), rtl::share_vocabulary(dtm));
    std::istringstream lines(read("predictions.csv"));
    std::string line;
    std::getline(lines, line);
    for (std::size_t i = 0; i < dtm.rows(); ++i) {
        ASSERT_TRUE(std::getline(lines, line));
        std::istringstream fields(line);
        std::string row, prob, label;
        std::getline(fields, row, ',');
        std::getline(fields, prob, ',');
        std::getline(fields, label, ',');
        EXPECT_EQ(std::stoul(row), i);
        EXPECT_DOUBLE_EQ(std::stod(prob), rtl::predict_proba(model, dtm.row(i)));
        EXPECT_EQ(std::stoi(label), rtl::to_int(rtl::predict(model, dtm.row(i))));
    }
}

TEST_F(Cli, EvaluatePerfectPredictions)
{
    write("pred.csv", "row,probability,prediction\n0,0.9,1\n1,0.2,0\n2,0.7,1\n3,0.1,0\n");
    write("truth.labels", "1\n0\n1\n0\n");
    ASSERT_EQ(run("evaluate --predictions " + path("pred.csv") + " --labels " + path("truth.labels")), 0)
        << read("stderr.txt");
    const auto m = rtl::read_json_file(path("metrics.json"));
    for (const char* key : {"TPR", "TNR", "PPV", "NPV", "Accuracy", "F1"}) EXPECT_EQ(m.at(key), 1.0) << key;
    EXPECT_NE(read("metrics.txt").find("Accuracy"), std::string::npos);
}

TEST_F(Cli, CvReportMatchesLibrary)
{
    write_toy_corpus();
    ASSERT_EQ(run("preprocess --input " + path("reviews.csv")), 0);
    ASSERT_EQ(run("cv --dtm " + path("corpus.dtm") + " --vocab " + path("vocabulary.json") +
                  " --k 2,3 --gammas 2.5,3.7 --n-lambda 5 --seed 7 --threads 1"),
              0)
        << read("stderr.txt");

    const auto vocab = rtl::read_vocabulary(path("vocabulary.json"));
    std::ifstream in(path("corpus.dtm"));
    const auto dtm = rtl::read_dtm(in, vocab);
    std::vector<int> y;
    std::ifstream lab(path("corpus.labels"));
    for (int v; lab >> v;) y.push_back(v);
    rtl::CvGrid grid{{2, 3}, {2.5, 3.7}, {5, 0.01, {}}};
    const auto report = rtl::grid_search(rtl::SparseDesign(dtm), y, grid, {}, 7, rtl::CvLoss::Deviance, 1);
    std::ostringstream expected;
    rtl::write_cv_report_csv(expected, report);
    EXPECT_EQ(read("cv_report.csv"), expected.str());
    const auto best = rtl::read_json_file(path("best.json"));
    EXPECT_EQ(best.at("lambda").get<double>(), report.best().lambda);
    EXPECT_EQ(best.at("K").get<int>(), report.best().k);
}

TEST_F(Cli, ConfigFileSuppliesDefaults)
{
    write_toy_corpus();
    write("run.ini", "weighting = frequency\nseed = 5\n");
    ASSERT_EQ(run("preprocess --config " + path("run.ini") + " --input " + path("reviews.csv")), 0)
        << read("stderr.txt");
    std::ifstream in(path("corpus.dtm"));
    const auto dtm = rtl::read_dtm(in, rtl::read_vocabulary(path("vocabulary.json")));
    EXPECT_EQ(dtm.weighting(), rtl::Weighting::Frequency);
    EXPECT_EQ(rtl::read_json_file(path("preprocess.manifest.json")).at("seed"), 5);
}

TEST_F(Cli, SplitProjectsTestOnTrainVocabulary)
{
    write_toy_corpus();
    ASSERT_EQ(run("preprocess --input " + path("reviews.csv") + " --train-fraction 0.75 --weighting frequency"), 0)
        << read("stderr.txt");
    const auto vocab = rtl::read_vocabulary(path("vocabulary.json"));
    std::ifstream tr(path("train.dtm")), te(path("test.dtm"));
    const auto train = rtl::read_dtm(tr, vocab);
    const auto test = rtl::read_dtm(te, vocab);
    EXPECT_EQ(train.rows(), 9u);
    EXPECT_EQ(test.rows(), 3u);
    ASSERT_EQ(run("baseline nb --train-dtm " + path("train.dtm") + " --test-dtm " + path("test.dtm") + " --vocab " +
                  path("vocabulary.json")),
              0)
        << read("stderr.txt");
    EXPECT_TRUE(rtl::read_json_file(path("metrics.json")).contains("Accuracy"));
    const auto model = rtl::read_json_file(path("model.json"));
    EXPECT_EQ(model.at("model_type"), "naive_bayes");
    EXPECT_NO_THROW(rtl::baselines::nb_from_json(model, vocab));
}
