#include "vngender/pipeline.hpp"

#include "vngender/error.hpp"

namespace vngender {

ModelSpec ModelSpec::defaults(ModelKind kind, std::uint64_t seed) {
    ModelSpec s;
    s.kind = kind;
    s.seed = seed;
    return s;
}

std::string ExperimentArm::name() const {
    if (model.kind == ModelKind::Lstm) return "lstm";
    return to_string(model.kind) + "+" + to_string(vectorizer.mode);
}

ExperimentArm ExperimentArm::parse(std::string_view text, std::uint64_t seed) {
    std::size_t sep = text.find_first_of(":+");
    ExperimentArm arm;
    arm.model = ModelSpec::defaults(parse_model_kind(text.substr(0, sep)), seed);
    arm.vectorizer = VectorizerConfig::count();
    if (sep != std::string_view::npos) {
        if (parse_vectorizer_mode(text.substr(sep + 1)) == VectorizerMode::Tfidf) {
            arm.vectorizer = VectorizerConfig::tfidf();
        }
    }
    return arm;
}

std::optional<SelectedName> select_name(std::string_view raw, ComponentMask mask) {
    SelectedName s;
    try {
        s.components = parse_name(raw);
    } catch (const EmptyNameError&) {
        return std::nullopt;
    }
    s.tokens = select_components(s.components, mask);
    return s;
}

Prediction TrainedPipeline::predict_tokens(std::span<const std::string> tokens) const {
    if (tokens.empty()) {
        throw DataError("empty_selection", "the name has none of the components this model uses");
    }
    if (kind == ModelKind::Lstm) {
        if (!lstm || !embeddings) throw ConfigError("LSTM pipeline is missing parameters or embeddings");
        return predict_lstm(tokens, *embeddings, lstm->params, lstm->config.max_seq_len);
    }
    if (!vectorizer || !classifier) throw ConfigError("classical pipeline is missing its vectorizer or model");
    return predict(*classifier, vectorizer->transform(tokens));
}

TrainedPipeline train_pipeline(const Dataset& train, ComponentMask mask, const ExperimentArm& arm) {
    TrainedPipeline out;
    out.mask = mask;
    out.kind = arm.model.kind;

    std::vector<Document> docs;
    std::vector<int> labels;
    docs.reserve(train.size());
    labels.reserve(train.size());
    for (const auto& r : train.records) {
        auto sel = select_name(r.full_name, mask);
        if (!sel || sel->tokens.empty()) {
            ++out.skipped_training_records;
            continue;
        }
        docs.push_back(std::move(sel->tokens));
        labels.push_back(r.gender);
    }
    if (docs.empty()) {
        throw DataError("dataset_empty", "no training record has the components selected by mask '" +
                                             mask.name() + "'");
    }

    const ModelSpec& spec = arm.model;
    if (spec.kind == ModelKind::Lstm) {
        std::vector<SequenceExample> examples;
        examples.reserve(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) examples.push_back({std::move(docs[i]), labels[i]});
        out.embeddings = spec.embeddings ? spec.embeddings
                                         : std::make_shared<const EmbeddingTable>(spec.embedding_dim, spec.seed);
        LstmTrainConfig cfg = spec.lstm;
        cfg.seed = spec.seed;
        out.lstm = train_lstm(examples, *out.embeddings, cfg);
        return out;
    }

    out.vectorizer = Vectorizer::fit(docs, arm.vectorizer);
    LabeledMatrix m;
    m.n_features = out.vectorizer->n_features();
    m.labels = std::move(labels);
    m.rows.reserve(docs.size());
    for (const auto& doc : docs) m.rows.push_back(out.vectorizer->transform(doc));

    switch (spec.kind) {
    case ModelKind::MultinomialNB: out.classifier = fit_multinomial_nb(m, spec.nb.alpha); break;
    case ModelKind::BernoulliNB: out.classifier = fit_bernoulli_nb(m, spec.nb.alpha); break;
    case ModelKind::LogisticRegression: out.classifier = fit_logistic_regression(m, spec.logistic); break;
    case ModelKind::LinearSvm: {
        SvmConfig cfg = spec.svm;
        cfg.seed = spec.seed;
        out.classifier = fit_linear_svm(m, cfg);
        break;
    }
    case ModelKind::DecisionTree: {
        TreeConfig cfg = spec.tree;
        cfg.seed = spec.seed;
        out.classifier = fit_decision_tree(m, cfg);
        break;
    }
    case ModelKind::RandomForest: {
        ForestConfig cfg = spec.forest;
        cfg.seed = spec.seed;
        out.classifier = fit_random_forest(m, cfg);
        break;
    }
    case ModelKind::Lstm: break;
    }
    out.classifier->train_meta["vectorizer"] = to_string(arm.vectorizer.mode);
    out.classifier->train_meta["vectorizer_fit_on"] = "train";
    return out;
}

} // namespace vngender
