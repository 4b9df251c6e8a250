#include "fixtures.hpp"

#include "vngender/bundle.hpp"
#include "vngender/pipeline.hpp"

#include <benchmark/benchmark.h>

using namespace vngender;

namespace {

const Dataset& corpus() {
    static const Dataset d = generate_synthetic(5000, 0.95, 1);
    return d;
}

std::vector<Document> documents() {
    std::vector<Document> docs;
    for (const auto& r : corpus().records) docs.push_back(select_name(r.full_name, ComponentMask::full())->tokens);
    return docs;
}

void BM_TransformTfidf(benchmark::State& state) {
    const auto docs = documents();
    const Vectorizer v = Vectorizer::fit(docs, VectorizerConfig::tfidf());
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(v.transform(docs[i++ % docs.size()]));
    }
}
BENCHMARK(BM_TransformTfidf);

void BM_NormalizeAndSegment(benchmark::State& state) {
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_name(corpus().records[i++ % corpus().size()].full_name));
    }
}
BENCHMARK(BM_NormalizeAndSegment);

void BM_PredictNaiveBayes(benchmark::State& state) {
    const ModelBundle b = fixture::train_bundle(corpus(), ModelKind::MultinomialNB, ComponentMask::full());
    const auto docs = documents();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(b.pipeline.predict_tokens(docs[i++ % docs.size()]));
    }
}
BENCHMARK(BM_PredictNaiveBayes);

void BM_FitDecisionTree(benchmark::State& state) {
    const auto docs = documents();
    const Vectorizer v = Vectorizer::fit(docs, VectorizerConfig::count());
    LabeledMatrix m;
    m.n_features = v.n_features();
    for (std::size_t i = 0; i < docs.size(); ++i) {
        m.rows.push_back(v.transform(docs[i]));
        m.labels.push_back(corpus().records[i].gender);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_decision_tree(m));
}
BENCHMARK(BM_FitDecisionTree)->Unit(benchmark::kMillisecond);

void BM_LstmForward(benchmark::State& state) {
    const std::size_t hidden = static_cast<std::size_t>(state.range(0));
    EmbeddingTable emb(300, 1);
    const LstmParams p = LstmParams::random_init(300, hidden, 1);
    const std::vector<std::string> seq{"nguyễn", "thị", "hiền"};
    for (auto _ : state) benchmark::DoNotOptimize(lstm_forward(seq, emb, p));
}
BENCHMARK(BM_LstmForward)->Arg(16)->Arg(128);

} // namespace

BENCHMARK_MAIN();
