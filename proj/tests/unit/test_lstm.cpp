#include "oracles.hpp"

#include "vngender/data_io.hpp"
#include "vngender/error.hpp"
#include "vngender/lstm.hpp"
#include "vngender/names.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

using namespace vngender;

namespace {

std::unique_ptr<EmbeddingTable> parse(const std::string& text, std::size_t dim,
                                      std::vector<std::string>* warnings = nullptr) {
    std::istringstream in(text);
    return parse_embeddings(in, dim, 0, warnings);
}

/// Small table with random stored vectors for a fixed token set.
std::unique_ptr<EmbeddingTable> random_table(std::size_t dim, std::uint64_t seed) {
    auto t = std::make_unique<EmbeddingTable>(dim, seed);
    Rng rng(seed);
    for (const char* tok : {"a", "b", "c", "d"}) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.uniform(-1, 1);
        t->insert(tok, v);
    }
    return t;
}

LstmParams random_params(std::size_t dim, std::size_t hidden, std::uint64_t seed, double scale) {
    LstmParams p = LstmParams::zeros(dim, hidden);
    Rng rng(seed);
    auto flat = p.flatten();
    for (double& x : flat) x = rng.uniform(-scale, scale);
    p.assign(flat);
    return p;
}

std::vector<SequenceExample> planted_sequences(std::size_t n, std::uint64_t seed) {
    std::vector<SequenceExample> out;
    for (const auto& r : generate_synthetic(n, 1.0, seed).records) {
        out.push_back({select_components(parse_name(r.full_name), ComponentMask::parse("mn+fin")), r.gender});
    }
    return out;
}

} // namespace

// ---------------- embeddings ----------------

TEST(Embeddings, ParsesVecText) {
    auto t = parse("2 3\na 1 0 0\nb 0 1 0\n", 3);
    EXPECT_EQ(t->dim(), 3u);
    EXPECT_EQ(t->size(), 2u);
    EXPECT_TRUE(t->contains("a"));
    EXPECT_EQ(t->lookup("b"), Eigen::Vector3d(0, 1, 0));
}

TEST(Embeddings, ShortRowNamesLine) {
    std::string text = "2 300\nx";
    for (int k = 0; k < 300; ++k) text += " 0.5";
    text += "\ny";
    for (int k = 0; k < 299; ++k) text += " 0.5";
    text += "\n";
    try {
        parse(text, 300);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Embeddings, HeaderDimMismatchAndNonNumeric) {
    EXPECT_THROW(parse("1 4\na 1 2 3 4\n", 3), FormatError);
    EXPECT_THROW(parse("1 3\na 1 x 3\n", 3), FormatError);
    EXPECT_THROW(parse("nonsense\n", 3), FormatError);
}

TEST(Embeddings, DuplicateKeepsFirstAndWarns) {
    std::vector<std::string> warnings;
    auto t = parse("2 2\na 1 2\na 3 4\n", 2, &warnings);
    EXPECT_EQ(t->size(), 1u);
    EXPECT_EQ(t->lookup("a"), Eigen::Vector2d(1, 2));
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(Embeddings, CasedTokensReachableLowercase) {
    auto t = parse("1 2\nNguyễn 1 2\n", 2);
    EXPECT_TRUE(t->contains("nguyễn"));
    EXPECT_EQ(t->lookup("nguyễn"), Eigen::Vector2d(1, 2));
}

TEST(Embeddings, OovDrawCachedRangeAndOrderIndependent) {
    EmbeddingTable a(8, 3), b(8, 3);
    const Eigen::VectorXd first = a.lookup("zzz");
    EXPECT_EQ(a.lookup("zzz"), first);
    for (Eigen::Index k = 0; k < first.size(); ++k) {
        EXPECT_GE(first(k), -0.05);
        EXPECT_LE(first(k), 0.05);
    }
    // b sees a different lookup order
    b.lookup("yyy");
    EXPECT_EQ(b.lookup("zzz"), first);
    EXPECT_NE(EmbeddingTable(8, 4).lookup("zzz"), first);
}

TEST(Embeddings, ConcurrentOovLookupsAgree) {
    EmbeddingTable t(16, 1);
    std::vector<std::thread> pool;
    std::vector<Eigen::VectorXd> seen(8);
    for (int i = 0; i < 8; ++i) {
        pool.emplace_back([&, i] {
            for (int k = 0; k < 200; ++k) t.lookup("tok" + std::to_string(k));
            seen[i] = t.lookup("tok7");
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& v : seen) EXPECT_EQ(v, seen[0]);
}

TEST(Embeddings, LoadFromFileAndHash) {
    const auto p = std::filesystem::temp_directory_path() / "vngender_test_vectors.vec";
    std::ofstream(p) << "2 2\nthị 0.1 0.2\nvăn -0.1 0.3\n";
    auto t = load_embeddings(p, 2);
    EXPECT_EQ(t->size(), 2u);
    EXPECT_EQ(t->content_hash, file_content_hash(p));
    EXPECT_THROW(load_embeddings("/nonexistent.vec", 2), DataError);
}

// ---------------- forward ----------------

TEST(LstmForward, ZeroParamsGiveHalf) {
    auto emb = random_table(3, 1);
    LstmParams p = LstmParams::zeros(3, 4);
    for (auto seq : {std::vector<std::string>{"a"}, {"a", "b", "c"}, {"zzz", "d"}}) {
        EXPECT_EQ(lstm_forward(seq, *emb, p), 0.5);
    }
    const Prediction pr = predict_lstm(std::vector<std::string>{"a"}, *emb, p);
    EXPECT_EQ(pr.label, 1);
}

TEST(LstmForward, MatchesScalarRecurrence) {
    EmbeddingTable emb(2);
    emb.insert("x", Eigen::Vector2d(0.5, -1.0));
    emb.insert("y", Eigen::Vector2d(-0.3, 0.8));
    LstmParams p = LstmParams::zeros(2, 2);
    // hand-fixed values, every entry distinct
    double v = 0.05;
    auto flat = p.flatten();
    for (double& x : flat) {
        x = v;
        v = -v * 1.13 + 0.021;
    }
    p.assign(flat);
    const std::vector<std::string> seq{"x", "y", "x"};
    const std::vector<std::vector<double>> xs{{0.5, -1.0}, {-0.3, 0.8}, {0.5, -1.0}};
    EXPECT_NEAR(lstm_forward(seq, emb, p), oracle::lstm_scalar_forward(xs, p), 1e-10);
}

TEST(LstmForward, DeterministicAndInUnitInterval) {
    auto emb = random_table(5, 2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        LstmParams p = random_params(5, 6, s, 2.0);
        const std::vector<std::string> one{"a"}, rep{"a", "a", "a"};
        const double a = lstm_forward(one, *emb, p);
        EXPECT_EQ(a, lstm_forward(one, *emb, p));
        EXPECT_GT(a, 0.0);
        EXPECT_LT(a, 1.0);
        EXPECT_GT(lstm_forward(rep, *emb, p), 0.0);
    }
}

TEST(LstmForward, TruncatesFromTheLeft) {
    const std::vector<std::string> t{"1", "2", "3", "4"};
    auto kept = truncate_left(t, 2);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0], "3");
    EXPECT_EQ(kept[1], "4");
    auto emb = random_table(3, 3);
    LstmParams p = random_params(3, 4, 1, 0.5);
    EXPECT_EQ(lstm_forward(std::vector<std::string>{"a", "b", "c", "d"}, *emb, p, 2),
              lstm_forward(std::vector<std::string>{"c", "d"}, *emb, p, 2));
}

TEST(LstmForward, EmptySequenceThrows) {
    auto emb = random_table(3, 1);
    EXPECT_THROW(lstm_forward(std::vector<std::string>{}, *emb, LstmParams::zeros(3, 2)), DataError);
    EXPECT_THROW(predict_lstm(std::vector<std::string>{}, *emb, LstmParams::zeros(3, 2)), DataError);
}

TEST(PredictLstm, ThresholdAndWrapper) {
    auto emb = random_table(3, 1);
    LstmParams p = LstmParams::zeros(3, 2);
    // the cell candidate is tanh(0) = 0, so h stays 0 and the output is sigmoid(c)
    p.c = std::log(0.49 / 0.51);
    const std::vector<std::string> seq{"a", "b"};
    const Prediction pr = predict_lstm(seq, *emb, p);
    EXPECT_NEAR(pr.score, 0.49, 1e-15);
    EXPECT_EQ(pr.label, 0);
    LstmParams q = random_params(3, 4, 8, 1.0);
    EXPECT_EQ(predict_lstm(seq, *emb, q).score, lstm_forward(seq, *emb, q));
}

// ---------------- gradients ----------------

TEST(LstmGradient, BpttMatchesFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        auto emb = random_table(3, 100 + seed);
        LstmParams p = random_params(3, 4, seed, 0.5);
        const std::vector<std::string> seq{"a", "c", "b"};
        const int label = static_cast<int>(seed % 2);
        LstmParams grad = LstmParams::zeros(3, 4);
        lstm_sequence_loss(seq, label, *emb, p, &grad);
        const auto g = grad.flatten();
        auto flat = p.flatten();
        const double h = 1e-4;
        double worst = 0;
        for (std::size_t k = 0; k < flat.size(); ++k) {
            const double orig = flat[k];
            flat[k] = orig + h;
            p.assign(flat);
            const double up = lstm_sequence_loss(seq, label, *emb, p, nullptr);
            flat[k] = orig - h;
            p.assign(flat);
            const double down = lstm_sequence_loss(seq, label, *emb, p, nullptr);
            flat[k] = orig;
            p.assign(flat);
            worst = std::max(worst, oracle::relative_error(g[k], (up - down) / (2 * h), 1e-7));
        }
        EXPECT_LE(worst, 1e-4) << "seed " << seed;
    }
}

TEST(LstmGradient, BatchGradientIsMeanOfSequences) {
    auto emb = random_table(3, 5);
    LstmParams p = random_params(3, 4, 5, 0.5);
    std::vector<SequenceExample> batch{{{"a", "b"}, 1}, {{"c"}, 0}, {{"d", "a", "b"}, 1}};
    LstmParams gb = LstmParams::zeros(3, 4);
    const double loss = lstm_batch_loss(batch, *emb, p, &gb);
    double sum = 0;
    LstmParams gs = LstmParams::zeros(3, 4);
    for (const auto& ex : batch) sum += lstm_sequence_loss(ex.tokens, ex.label, *emb, p, &gs);
    EXPECT_NEAR(loss, sum / 3, 1e-15);
    const auto a = gb.flatten(), b = gs.flatten();
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k] / 3, 1e-15);
}

TEST(LstmTraining, ZeroInitFirstBatchLossIsLn2) {
    auto emb = random_table(3, 1);
    std::vector<SequenceExample> data{{{"a"}, 1}, {{"b", "c"}, 0}, {{"d"}, 1}, {{"a", "b"}, 0}};
    LstmParams zero = LstmParams::zeros(3, 4);
    EXPECT_NEAR(lstm_batch_loss(data, *emb, zero, nullptr), std::log(2.0), 1e-6);
    LstmTrainConfig cfg;
    cfg.hidden = 4;
    cfg.batch_size = 4;
    cfg.epochs = 1;
    LstmModel m = train_lstm(data, *emb, cfg, zero);
    EXPECT_NEAR(m.epoch_loss[0], std::log(2.0), 1e-6);
}

TEST(LstmTraining, PlantedRuleH16ReachesTrainingAccuracy) {
    auto data = planted_sequences(2000, 7);
    EmbeddingTable emb(300, 7);
    LstmTrainConfig cfg;
    cfg.hidden = 16;
    cfg.learning_rate = 1.0;
    cfg.epochs = 8;
    cfg.seed = 7;
    LstmModel m = train_lstm(data, emb, cfg);
    std::size_t ok = 0;
    for (const auto& ex : data) ok += predict_lstm(ex.tokens, emb, m.params).label == ex.label ? 1 : 0;
    EXPECT_GE(static_cast<double>(ok) / static_cast<double>(data.size()), 0.99);
    EXPECT_EQ(m.epoch_loss.size(), 8u);
}

TEST(LstmTraining, SameSeedSameTrace) {
    auto data = planted_sequences(300, 3);
    EmbeddingTable emb(20, 3);
    LstmTrainConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 3;
    cfg.seed = 11;
    LstmModel a = train_lstm(data, emb, cfg);
    LstmModel b = train_lstm(data, emb, cfg);
    EXPECT_EQ(a.epoch_loss, b.epoch_loss);
    EXPECT_TRUE(a.params == b.params);
    cfg.seed = 12;
    EXPECT_NE(train_lstm(data, emb, cfg).epoch_loss, a.epoch_loss);
}

TEST(LstmTraining, EmbeddingsFrozen) {
    auto data = planted_sequences(100, 4);
    EmbeddingTable emb(10, 4);
    const Eigen::VectorXd before = emb.lookup(data[0].tokens[0]);
    LstmTrainConfig cfg;
    cfg.hidden = 4;
    train_lstm(data, emb, cfg);
    EXPECT_EQ(emb.lookup(data[0].tokens[0]), before);
}

TEST(LstmTraining, DivergenceNamesEpochAndBatch) {
    auto emb = random_table(3, 1);
    std::vector<SequenceExample> data{{{"a"}, 1}, {{"b"}, 0}};
    LstmTrainConfig cfg;
    cfg.hidden = 4;
    LstmParams poisoned = random_params(3, 4, 1, 1.0);
    poisoned.c = std::numeric_limits<double>::quiet_NaN();
    try {
        train_lstm(data, *emb, cfg, poisoned);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("epoch"), std::string::npos) << msg;
        EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
    }
}

TEST(LstmTraining, ConfigAndDataErrors) {
    auto emb = random_table(3, 1);
    std::vector<SequenceExample> one_class{{{"a"}, 1}, {{"b"}, 1}};
    EXPECT_THROW(train_lstm(one_class, *emb, LstmTrainConfig{}), DataError);
    LstmTrainConfig bad;
    bad.batch_size = 0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = {};
    bad.epochs = 0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(LstmParams, InitAndFlatten) {
    LstmParams p = LstmParams::random_init(5, 3, 9);
    EXPECT_EQ(p.b[LstmParams::kForget], Eigen::VectorXd::Ones(3));
    for (int g = 0; g < 4; ++g) EXPECT_LE(p.W[g].cwiseAbs().maxCoeff(), 0.1);
    EXPECT_TRUE(p == LstmParams::random_init(5, 3, 9));
    EXPECT_EQ(p.flatten().size(), p.parameter_count());
    EXPECT_EQ(p.parameter_count(), 4u * (3 * 5 + 3 * 3 + 3) + 3 + 1);
    LstmParams q = LstmParams::zeros(5, 3);
    q.assign(p.flatten());
    EXPECT_TRUE(p == q);
    q.v(0) = std::nan("");
    EXPECT_FALSE(q.all_finite());
    EXPECT_THROW(q.validate(), FormatError);
}
