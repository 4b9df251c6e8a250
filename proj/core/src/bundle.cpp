#include "vngender/bundle.hpp"

#include "vngender/error.hpp"
#include "vngender/rng.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vngender {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u64(s.size());
        buf_.append(s);
    }
    void raw(std::string_view s) { buf_.append(s); }
    void doubles(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }
    std::string& bytes() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() { return std::string(take(count(1))); }
    std::vector<double> doubles() {
        std::vector<double> v(count(8));
        for (double& x : v) x = f64();
        return v;
    }
    /// Length prefix, checked against the bytes left.
    std::size_t count(std::size_t element_size) {
        const std::uint64_t n = u64();
        if (element_size && n > remaining() / element_size) fail("length prefix exceeds section size");
        return static_cast<std::size_t>(n);
    }
    std::string_view take(std::size_t n) {
        if (n > remaining()) fail("unexpected end of data");
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }
    void expect_end() {
        if (remaining() != 0) fail("trailing bytes");
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError("bad_section", "model bundle " + what_ + ": " + msg);
    }

private:
    std::string_view data_;
    std::string what_;
    std::size_t pos_ = 0;
};

void write_vectorizer(Writer& w, const Vectorizer& v) {
    w.u8(static_cast<std::uint8_t>(v.config.mode));
    w.u8(v.config.max_features ? 1 : 0);
    w.u64(v.config.max_features.value_or(0));
    const auto& vocab = v.vocabulary;
    w.u64(vocab.n_docs());
    w.u64(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        w.str(vocab.tokens()[i]);
        w.u64(vocab.doc_freqs()[i]);
    }
}

Vectorizer read_vectorizer(Reader& r) {
    Vectorizer v;
    const auto mode = r.u8();
    if (mode > 1) r.fail("unknown vectorizer mode");
    v.config.mode = static_cast<VectorizerMode>(mode);
    const bool has_max = r.u8() != 0;
    const auto max_features = r.u64();
    if (has_max) v.config.max_features = static_cast<std::size_t>(max_features);
    const auto n_docs = r.u64();
    const std::size_t n = r.count(16);
    std::vector<std::string> tokens(n);
    std::vector<std::size_t> df(n);
    for (std::size_t i = 0; i < n; ++i) {
        tokens[i] = r.str();
        df[i] = static_cast<std::size_t>(r.u64());
    }
    v.vocabulary = Vocabulary(std::move(tokens), std::move(df), static_cast<std::size_t>(n_docs));
    return v;
}

void write_meta_map(Writer& w, const TrainMeta& m) {
    w.u64(m.size());
    for (const auto& [k, v] : m) {
        w.str(k);
        w.str(v);
    }
}

TrainMeta read_meta_map(Reader& r) {
    TrainMeta m;
    const std::size_t n = r.count(16);
    for (std::size_t i = 0; i < n; ++i) {
        std::string k = r.str();
        m[std::move(k)] = r.str();
    }
    return m;
}

void write_tree(Writer& w, const TreeParams& t) {
    w.u64(t.nodes.size());
    for (const auto& n : t.nodes) {
        w.u32(static_cast<std::uint32_t>(n.feature));
        w.f64(n.threshold);
        w.u32(static_cast<std::uint32_t>(n.left));
        w.u32(static_cast<std::uint32_t>(n.right));
        w.u8(static_cast<std::uint8_t>(n.label));
        w.f64(n.purity);
        w.u32(n.n_samples);
    }
}

TreeParams read_tree(Reader& r, std::size_t n_features) {
    TreeParams t;
    t.nodes.resize(r.count(33));
    for (auto& n : t.nodes) {
        n.feature = static_cast<std::int32_t>(r.u32());
        n.threshold = r.f64();
        n.left = static_cast<std::int32_t>(r.u32());
        n.right = static_cast<std::int32_t>(r.u32());
        n.label = r.u8();
        n.purity = r.f64();
        n.n_samples = r.u32();
    }
    t.validate(n_features);
    return t;
}

void write_classifier(Writer& w, const ClassifierModel& m) {
    w.u8(static_cast<std::uint8_t>(m.kind));
    w.u64(m.n_features);
    write_meta_map(w, m.train_meta);
    switch (m.kind) {
    case ModelKind::MultinomialNB:
    case ModelKind::BernoulliNB: {
        const auto& p = std::get<NaiveBayesParams>(m.params);
        for (int c = 0; c < 2; ++c) {
            w.f64(p.log_prior[c]);
            w.doubles(p.log_prob[c]);
            w.doubles(p.log_absent[c]);
            w.f64(p.log_absent_total[c]);
        }
        break;
    }
    case ModelKind::LogisticRegression:
    case ModelKind::LinearSvm: {
        const auto& p = std::get<LinearParams>(m.params);
        w.doubles(p.weights);
        w.f64(p.bias);
        w.u8(p.converged ? 1 : 0);
        w.u64(p.iterations);
        w.doubles(p.objective_trace);
        break;
    }
    case ModelKind::DecisionTree: write_tree(w, std::get<TreeParams>(m.params)); break;
    case ModelKind::RandomForest: {
        const auto& p = std::get<ForestParams>(m.params);
        w.u64(p.trees.size());
        for (std::size_t t = 0; t < p.trees.size(); ++t) {
            w.u64(p.tree_seeds[t]);
            write_tree(w, p.trees[t]);
        }
        break;
    }
    case ModelKind::Lstm: throw ConfigError("LSTM parameters are not a classical model");
    }
}

ClassifierModel read_classifier(Reader& r) {
    ClassifierModel m;
    const auto kind = r.u8();
    if (kind >= static_cast<std::uint8_t>(ModelKind::Lstm)) r.fail("unknown classifier kind");
    m.kind = static_cast<ModelKind>(kind);
    m.n_features = static_cast<std::size_t>(r.u64());
    m.train_meta = read_meta_map(r);
    auto sized = [&](std::vector<double> v) {
        if (v.size() != m.n_features) r.fail("parameter vector does not match n_features");
        return v;
    };
    switch (m.kind) {
    case ModelKind::MultinomialNB:
    case ModelKind::BernoulliNB: {
        NaiveBayesParams p;
        for (int c = 0; c < 2; ++c) {
            p.log_prior[c] = r.f64();
            p.log_prob[c] = sized(r.doubles());
            p.log_absent[c] = r.doubles();
            p.log_absent_total[c] = r.f64();
            if (m.kind == ModelKind::BernoulliNB) sized(p.log_absent[c]);
        }
        m.params = std::move(p);
        break;
    }
    case ModelKind::LogisticRegression:
    case ModelKind::LinearSvm: {
        LinearParams p;
        p.weights = sized(r.doubles());
        p.bias = r.f64();
        p.converged = r.u8() != 0;
        p.iterations = static_cast<std::size_t>(r.u64());
        p.objective_trace = r.doubles();
        m.params = std::move(p);
        break;
    }
    case ModelKind::DecisionTree: m.params = read_tree(r, m.n_features); break;
    case ModelKind::RandomForest: {
        ForestParams p;
        const std::size_t n = r.count(16);
        if (n == 0) r.fail("forest has no trees");
        for (std::size_t t = 0; t < n; ++t) {
            p.tree_seeds.push_back(r.u64());
            p.trees.push_back(read_tree(r, m.n_features));
        }
        m.params = std::move(p);
        break;
    }
    case ModelKind::Lstm: break;
    }
    return m;
}

void write_lstm(Writer& w, const LstmModel& m) {
    const auto& c = m.config;
    w.u64(c.hidden);
    w.u64(c.batch_size);
    w.u64(c.epochs);
    w.f64(c.learning_rate);
    w.u64(c.max_seq_len);
    w.u64(c.seed);
    w.doubles(m.epoch_loss);
    w.u64(m.params.input_dim());
    w.u64(m.params.hidden());
    w.doubles(m.params.flatten());
}

LstmModel read_lstm(Reader& r) {
    LstmModel m;
    auto& c = m.config;
    c.hidden = static_cast<std::size_t>(r.u64());
    c.batch_size = static_cast<std::size_t>(r.u64());
    c.epochs = static_cast<std::size_t>(r.u64());
    c.learning_rate = r.f64();
    c.max_seq_len = static_cast<std::size_t>(r.u64());
    c.seed = r.u64();
    m.epoch_loss = r.doubles();
    const auto dim = r.u64();
    const auto hidden = r.u64();
    if (dim == 0 || hidden == 0 || dim > (1u << 20) || hidden > (1u << 16)) r.fail("implausible LSTM shape");
    m.params = LstmParams::zeros(static_cast<std::size_t>(dim), static_cast<std::size_t>(hidden));
    auto flat = r.doubles();
    if (flat.size() != m.params.parameter_count()) r.fail("LSTM parameter count does not match its shape");
    m.params.assign(flat);
    m.params.validate();
    return m;
}

void write_embedding_ref(Writer& w, const EmbeddingTable& e) {
    w.u64(e.dim());
    w.u64(e.oov_seed());
    w.str(e.source_path.empty() ? std::string() : std::filesystem::absolute(e.source_path).string());
    w.u64(e.content_hash);
}

std::shared_ptr<const EmbeddingTable> read_embedding_ref(Reader& r) {
    const auto dim = static_cast<std::size_t>(r.u64());
    const auto seed = r.u64();
    std::filesystem::path path = r.str();
    const auto hash = r.u64();
    if (path.empty()) return std::make_shared<const EmbeddingTable>(dim, seed);
    if (!std::filesystem::exists(path)) {
        throw FormatError("embedding_mismatch", "embeddings file '" + path.string() + "' referenced by the bundle is missing");
    }
    if (file_content_hash(path) != hash) {
        throw FormatError("embedding_mismatch", "embeddings file '" + path.string() +
                                                    "' changed since the bundle was trained (content hash differs)");
    }
    return load_embeddings(path, dim, seed);
}

std::string tag_string(std::uint32_t tag) {
    std::string s(4, ' ');
    for (int i = 0; i < 4; ++i) s[i] = static_cast<char>(tag >> (8 * i));
    return s;
}

constexpr std::uint32_t make_tag(const char (&t)[5]) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(t[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(t[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(t[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(t[3])) << 24;
}

constexpr std::uint32_t kMeta = make_tag("META");
constexpr std::uint32_t kVect = make_tag("VECT");
constexpr std::uint32_t kClsf = make_tag("CLSF");
constexpr std::uint32_t kLstm = make_tag("LSTM");
constexpr std::uint32_t kEmbd = make_tag("EMBD");

std::string params_blob(const TrainedPipeline& p) {
    Writer w;
    if (p.vectorizer) write_vectorizer(w, *p.vectorizer);
    if (p.classifier) write_classifier(w, *p.classifier);
    if (p.lstm) write_lstm(w, *p.lstm);
    return std::move(w.bytes());
}

} // namespace

std::string make_model_id(const TrainedPipeline& p) {
    std::ostringstream s;
    s << to_string(p.kind) << '-' << p.mask.name() << '-' << std::hex << std::setw(8) << std::setfill('0')
      << (fnv1a64(params_blob(p)) & 0xFFFFFFFFULL);
    return s.str();
}

std::string serialize_bundle(const ModelBundle& b) {
    const auto& p = b.pipeline;
    std::vector<std::pair<std::uint32_t, std::string>> sections;

    nlohmann::json meta{{"model_id", b.model_id},
                        {"kind", to_string(p.kind)},
                        {"mask", p.mask.name()},
                        {"skipped_training_records", p.skipped_training_records},
                        {"train_meta", b.train_meta}};
    sections.emplace_back(kMeta, meta.dump());

    if (p.kind == ModelKind::Lstm) {
        if (!p.lstm || !p.embeddings) throw ConfigError("LSTM bundle needs parameters and embeddings");
        Writer l, e;
        write_lstm(l, *p.lstm);
        write_embedding_ref(e, *p.embeddings);
        sections.emplace_back(kLstm, std::move(l.bytes()));
        sections.emplace_back(kEmbd, std::move(e.bytes()));
    } else {
        if (!p.vectorizer || !p.classifier) throw ConfigError("classical bundle needs a vectorizer and a model");
        Writer v, c;
        write_vectorizer(v, *p.vectorizer);
        write_classifier(c, *p.classifier);
        sections.emplace_back(kVect, std::move(v.bytes()));
        sections.emplace_back(kClsf, std::move(c.bytes()));
    }

    Writer w;
    w.raw(kBundleMagic);
    w.u32(b.format_version);
    w.u32(static_cast<std::uint32_t>(sections.size()));
    for (const auto& [tag, payload] : sections) {
        w.u32(tag);
        w.str(payload);
    }
    w.u64(fnv1a64(w.bytes()));
    return std::move(w.bytes());
}

ModelBundle deserialize_bundle(std::string_view bytes) {
    if (bytes.size() < kBundleMagic.size() || bytes.substr(0, kBundleMagic.size()) != kBundleMagic) {
        throw FormatError("bad_magic", "not a model bundle (bad magic string)");
    }
    if (bytes.size() < kBundleMagic.size() + 8) throw FormatError("truncated", "model bundle is truncated");

    Reader header(bytes.substr(kBundleMagic.size()), "header");
    const std::uint32_t version = header.u32();
    if (version != kBundleFormatVersion) {
        throw FormatError("version_mismatch", "model bundle format version " + std::to_string(version) +
                                                  " cannot be read by this build (reader version " +
                                                  std::to_string(kBundleFormatVersion) + ")");
    }
    const std::uint32_t n_sections = header.u32();

    std::vector<std::pair<std::uint32_t, std::string_view>> sections;
    std::size_t pos = kBundleMagic.size() + 8;
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        if (bytes.size() - pos < 12) throw FormatError("truncated", "model bundle is truncated");
        Reader sh(bytes.substr(pos, 12), "section header");
        const std::uint32_t tag = sh.u32();
        const std::uint64_t len = sh.u64();
        pos += 12;
        if (len > bytes.size() - pos) throw FormatError("truncated", "model bundle is truncated");
        sections.emplace_back(tag, bytes.substr(pos, static_cast<std::size_t>(len)));
        pos += static_cast<std::size_t>(len);
    }
    if (bytes.size() - pos != 8) {
        throw FormatError(bytes.size() - pos < 8 ? "truncated" : "bad_section",
                          bytes.size() - pos < 8 ? "model bundle is truncated" : "trailing bytes after model bundle");
    }
    Reader tail(bytes.substr(pos), "checksum");
    if (tail.u64() != fnv1a64(bytes.substr(0, pos))) {
        throw FormatError("checksum_mismatch", "model bundle checksum does not match its contents");
    }

    ModelBundle b;
    b.format_version = version;
    auto find = [&](std::uint32_t tag) -> std::optional<std::string_view> {
        for (const auto& [t, payload] : sections) {
            if (t == tag) return payload;
        }
        return std::nullopt;
    };
    for (const auto& [t, payload] : sections) {
        if (t != kMeta && t != kVect && t != kClsf && t != kLstm && t != kEmbd) {
            throw FormatError("bad_section", "unknown bundle section '" + tag_string(t) + "'");
        }
    }

    auto meta_bytes = find(kMeta);
    if (!meta_bytes) throw FormatError("bad_section", "model bundle has no META section");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(*meta_bytes);
        b.model_id = meta.at("model_id").get<std::string>();
        b.pipeline.kind = parse_model_kind(meta.at("kind").get<std::string>());
        b.pipeline.mask = ComponentMask::parse(meta.at("mask").get<std::string>());
        b.pipeline.skipped_training_records = meta.value("skipped_training_records", std::size_t{0});
        b.train_meta = meta.at("train_meta").get<TrainMeta>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad_section", std::string("invalid META section: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError("bad_section", std::string("invalid META section: ") + e.what());
    }

    if (b.pipeline.kind == ModelKind::Lstm) {
        auto l = find(kLstm);
        auto e = find(kEmbd);
        if (!l || !e) throw FormatError("bad_section", "LSTM bundle lacks LSTM or EMBD section");
        Reader lr(*l, "LSTM section");
        b.pipeline.lstm = read_lstm(lr);
        lr.expect_end();
        Reader er(*e, "EMBD section");
        b.pipeline.embeddings = read_embedding_ref(er);
        er.expect_end();
        if (b.pipeline.embeddings->dim() != b.pipeline.lstm->params.input_dim()) {
            throw FormatError("embedding_mismatch", "embedding width does not match the LSTM input width");
        }
    } else {
        auto v = find(kVect);
        auto c = find(kClsf);
        if (!v || !c) throw FormatError("bad_section", "classical bundle lacks VECT or CLSF section");
        Reader vr(*v, "VECT section");
        b.pipeline.vectorizer = read_vectorizer(vr);
        vr.expect_end();
        Reader cr(*c, "CLSF section");
        b.pipeline.classifier = read_classifier(cr);
        cr.expect_end();
        if (b.pipeline.classifier->kind != b.pipeline.kind) {
            throw FormatError("bad_section", "META kind disagrees with the stored classifier");
        }
        if (b.pipeline.classifier->n_features != b.pipeline.vectorizer->n_features()) {
            throw FormatError("bad_section", "classifier width does not match the vocabulary size");
        }
    }
    return b;
}

void save_model(const ModelBundle& b, const std::filesystem::path& path) {
    const std::string bytes = serialize_bundle(b);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("io_error", "cannot write model bundle '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("io_error", "write failed for '" + path.string() + "'");
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing_file", "cannot open model bundle '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_bundle(buf.str());
}

} // namespace vngender
