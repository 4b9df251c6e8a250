#include "vngender/bundle.hpp"
#include "vngender/error.hpp"
#include "vngender/eval.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

using namespace vngender;

namespace {

const Dataset& corpus() {
    static const Dataset d = generate_synthetic(600, 0.95, 11);
    return d;
}

std::string code_of(std::string_view bytes) {
    try {
        deserialize_bundle(bytes);
    } catch (const FormatError& e) {
        return e.code();
    }
    return "";
}

void expect_same_predictions(const ModelBundle& a, const ModelBundle& b) {
    for (const auto& name : fixture::random_names(1000, 99)) {
        auto sa = select_name(name, a.pipeline.mask);
        if (!sa || sa->tokens.empty()) continue;
        const Prediction pa = a.pipeline.predict_tokens(sa->tokens);
        const Prediction pb = b.pipeline.predict_tokens(sa->tokens);
        ASSERT_EQ(pa.label, pb.label) << name;
        // bit-identical, not merely close
        ASSERT_EQ(std::memcmp(&pa.score, &pb.score, sizeof(double)), 0) << name;
    }
}

} // namespace

class BundleRoundTrip : public ::testing::TestWithParam<ModelKind> {};

TEST_P(BundleRoundTrip, PredictionsAreBitIdentical) {
    const ModelBundle b = fixture::train_bundle(corpus(), GetParam(), ComponentMask::parse("mn+fin"), 5);
    const std::string bytes = serialize_bundle(b);
    const ModelBundle back = deserialize_bundle(bytes);
    EXPECT_EQ(back.model_id, b.model_id);
    EXPECT_EQ(back.pipeline.kind, b.pipeline.kind);
    EXPECT_EQ(back.pipeline.mask, b.pipeline.mask);
    EXPECT_EQ(back.train_meta, b.train_meta);
    expect_same_predictions(b, back);
    // serialization is stable
    EXPECT_EQ(serialize_bundle(back), bytes);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, BundleRoundTrip,
                         ::testing::Values(ModelKind::MultinomialNB, ModelKind::BernoulliNB,
                                           ModelKind::LogisticRegression, ModelKind::LinearSvm,
                                           ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::Lstm),
                         [](const auto& info) { return to_string(info.param); });

TEST(Bundle, TfidfRoundTripThroughFile) {
    const ModelBundle b = fixture::train_bundle(corpus(), ModelKind::BernoulliNB, ComponentMask::full(), 2,
                                                VectorizerConfig::tfidf());
    const auto path = fixture::temp_path("bundle_tfidf.bin");
    save_model(b, path);
    const ModelBundle back = load_model(path);
    expect_same_predictions(b, back);
    std::filesystem::remove(path);
}

TEST(Bundle, ModelIdIsStable) {
    const ModelBundle a = fixture::train_bundle(corpus(), ModelKind::MultinomialNB, ComponentMask::full(), 1);
    const ModelBundle b = fixture::train_bundle(corpus(), ModelKind::MultinomialNB, ComponentMask::full(), 1);
    const ModelBundle c = fixture::train_bundle(corpus(), ModelKind::MultinomialNB, ComponentMask::parse("fin"), 1);
    EXPECT_EQ(a.model_id, b.model_id);
    EXPECT_NE(a.model_id, c.model_id);
}

TEST(Bundle, CorruptionIsDetected) {
    const ModelBundle b = fixture::train_bundle(corpus(), ModelKind::MultinomialNB, ComponentMask::full(), 1);
    const std::string good = serialize_bundle(b);

    std::string magic = good;
    magic[0] = 'X';
    EXPECT_EQ(code_of(magic), "bad_magic");
    EXPECT_EQ(code_of("VNG"), "bad_magic");

    std::string version = good;
    const std::uint32_t v99 = 99;
    std::memcpy(version.data() + 8, &v99, 4); // little-endian host
    try {
        deserialize_bundle(version);
        FAIL() << "version 99 accepted";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.code(), "version_mismatch");
        const std::string msg = e.what();
        EXPECT_NE(msg.find("99"), std::string::npos) << msg;
        EXPECT_NE(msg.find(std::to_string(kBundleFormatVersion)), std::string::npos) << msg;
    }

    EXPECT_EQ(code_of(std::string_view(good).substr(0, good.size() / 2)), "truncated");
    EXPECT_EQ(code_of(std::string_view(good).substr(0, 14)), "truncated");

    std::string flipped = good;
    flipped[good.size() / 2] ^= 0x5a;
    EXPECT_EQ(code_of(flipped), "checksum_mismatch");

    EXPECT_NO_THROW(deserialize_bundle(good));
}

TEST(Bundle, MissingFileIsReported) {
    EXPECT_THROW(load_model(fixture::temp_path("no_such_bundle.bin")), Error);
}

TEST(Bundle, LstmWithEmbeddingsFile) {
    const auto vec_path = fixture::temp_path("bundle_emb.vec");
    const auto& pools = synthetic_pools();
    {
        std::vector<std::string> toks;
        for (auto t : pools.male_middle) toks.emplace_back(t);
        for (auto t : pools.female_middle) toks.emplace_back(t);
        Rng rng(4);
        std::ofstream out(vec_path);
        out << toks.size() << " 8\n";
        for (const auto& t : toks) {
            out << normalize(t);
            for (int k = 0; k < 8; ++k) out << ' ' << rng.uniform(-1, 1);
            out << '\n';
        }
    }
    ExperimentArm arm{ModelSpec::defaults(ModelKind::Lstm, 3), VectorizerConfig::count()};
    arm.model.embeddings = load_embeddings(vec_path, 8, 3);
    arm.model.lstm.hidden = 8;
    arm.model.lstm.epochs = 2;
    ModelBundle b;
    b.pipeline = train_pipeline(corpus(), ComponentMask::parse("mn+fin"), arm);
    b.model_id = make_model_id(b.pipeline);

    const std::string bytes = serialize_bundle(b);
    const ModelBundle back = deserialize_bundle(bytes);
    ASSERT_TRUE(back.pipeline.embeddings);
    EXPECT_EQ(back.pipeline.embeddings->size(), b.pipeline.embeddings->size());
    expect_same_predictions(b, back);

    // edit the vectors file: the bundle no longer matches it
    {
        std::ofstream out(vec_path, std::ios::app);
        out << "zzz 0 0 0 0 0 0 0 0\n";
    }
    EXPECT_EQ(code_of(bytes), "embedding_mismatch");
    std::filesystem::remove(vec_path);
    EXPECT_EQ(code_of(bytes), "embedding_mismatch");
}
