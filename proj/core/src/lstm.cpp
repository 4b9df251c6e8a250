#include "vngender/lstm.hpp"

#include "vngender/error.hpp"
#include "vngender/rng.hpp"

#include <cmath>
#include <numeric>

namespace vngender {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

VectorXd sigmoid(const VectorXd& z) { return z.unaryExpr([](double x) { return sigmoid(x); }); }

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

template <typename F>
void for_each_block(LstmParams& p, F&& f) {
    for (auto& m : p.W) f(m.data(), m.size());
    for (auto& m : p.U) f(m.data(), m.size());
    for (auto& m : p.b) f(m.data(), m.size());
    f(p.v.data(), p.v.size());
    f(&p.c, Eigen::Index{1});
}

// Activations kept for the backward pass.
struct Step {
    const VectorXd* x;
    VectorXd h_prev, c_prev;
    std::array<VectorXd, 4> gate; // i, f, o after sigmoid; g after tanh
    VectorXd c, tanh_c, h;
};

void run_forward(std::span<const std::string> tokens, const EmbeddingTable& emb, const LstmParams& p,
                 std::vector<Step>& steps) {
    const auto hidden = static_cast<Eigen::Index>(p.hidden());
    VectorXd h = VectorXd::Zero(hidden);
    VectorXd c = VectorXd::Zero(hidden);
    steps.resize(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        Step& s = steps[t];
        s.x = &emb.lookup(tokens[t]);
        s.h_prev = h;
        s.c_prev = c;
        for (int k = 0; k < 4; ++k) {
            VectorXd a = p.W[k] * *s.x + p.U[k] * h + p.b[k];
            s.gate[k] = k == LstmParams::kCell ? VectorXd(a.array().tanh()) : sigmoid(a);
        }
        s.c = s.gate[LstmParams::kForget].cwiseProduct(c) +
              s.gate[LstmParams::kInput].cwiseProduct(s.gate[LstmParams::kCell]);
        s.tanh_c = s.c.array().tanh();
        s.h = s.gate[LstmParams::kOutput].cwiseProduct(s.tanh_c);
        h = s.h;
        c = s.c;
    }
}

std::span<const std::string> checked_sequence(std::span<const std::string> tokens, const EmbeddingTable& emb,
                                              const LstmParams& p, std::size_t max_seq_len) {
    auto seq = truncate_left(tokens, max_seq_len);
    if (seq.empty()) throw DataError("empty_sequence", "LSTM input sequence is empty");
    if (emb.dim() != p.input_dim()) {
        throw ConfigError("embedding dimension " + std::to_string(emb.dim()) +
                          " does not match LSTM input dimension " + std::to_string(p.input_dim()));
    }
    return seq;
}

} // namespace

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden) {
    const auto d = static_cast<Eigen::Index>(input_dim);
    const auto h = static_cast<Eigen::Index>(hidden);
    LstmParams p;
    for (int k = 0; k < 4; ++k) {
        p.W[k] = MatrixXd::Zero(h, d);
        p.U[k] = MatrixXd::Zero(h, h);
        p.b[k] = VectorXd::Zero(h);
    }
    p.v = VectorXd::Zero(h);
    p.c = 0.0;
    return p;
}

LstmParams LstmParams::random_init(std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
    if (input_dim == 0 || hidden == 0) throw ConfigError("LSTM dimensions must be positive");
    LstmParams p = zeros(input_dim, hidden);
    Rng rng(derive_seed(seed, 0x1517));
    for_each_block(p, [&](double* data, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-0.1, 0.1);
    });
    p.b[kForget].setConstant(1.0);
    return p;
}

std::size_t LstmParams::parameter_count() const {
    std::size_t n = 0;
    for_each_block(const_cast<LstmParams&>(*this), [&](double*, Eigen::Index k) { n += static_cast<std::size_t>(k); });
    return n;
}

std::vector<double> LstmParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each_block(const_cast<LstmParams&>(*this),
                   [&](double* data, Eigen::Index n) { out.insert(out.end(), data, data + n); });
    return out;
}

void LstmParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw FormatError("bad_lstm", "flat parameter vector has the wrong size");
    std::size_t off = 0;
    for_each_block(*this, [&](double* data, Eigen::Index n) {
        std::copy_n(flat.data() + off, n, data);
        off += static_cast<std::size_t>(n);
    });
}

bool LstmParams::all_finite() const {
    bool ok = true;
    for_each_block(const_cast<LstmParams&>(*this), [&](double* data, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) ok = ok && std::isfinite(data[i]);
    });
    return ok;
}

void LstmParams::validate() const {
    const auto h = v.size();
    const auto d = W[0].cols();
    if (h == 0 || d == 0) throw FormatError("bad_lstm", "LSTM parameters are empty");
    for (int k = 0; k < 4; ++k) {
        if (W[k].rows() != h || W[k].cols() != d || U[k].rows() != h || U[k].cols() != h || b[k].size() != h) {
            throw FormatError("bad_lstm", "LSTM gate tensors have inconsistent shapes");
        }
    }
    if (!all_finite()) throw FormatError("bad_lstm", "LSTM parameters contain non-finite values");
}

bool operator==(const LstmParams& a, const LstmParams& b) {
    if (a.hidden() != b.hidden() || a.input_dim() != b.input_dim()) return false;
    return a.flatten() == b.flatten();
}

void LstmTrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (hidden < 1) throw ConfigError("hidden size must be at least 1");
    if (max_seq_len < 1) throw ConfigError("max_seq_len must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
}

std::span<const std::string> truncate_left(std::span<const std::string> tokens, std::size_t max_len) {
    return tokens.size() > max_len ? tokens.last(max_len) : tokens;
}

double lstm_forward(std::span<const std::string> tokens, const EmbeddingTable& emb, const LstmParams& p,
                    std::size_t max_seq_len) {
    auto seq = checked_sequence(tokens, emb, p, max_seq_len);
    std::vector<Step> steps;
    run_forward(seq, emb, p, steps);
    return sigmoid(p.v.dot(steps.back().h) + p.c);
}

double lstm_sequence_loss(std::span<const std::string> tokens, int label, const EmbeddingTable& emb,
                          const LstmParams& p, LstmParams* grad, std::size_t max_seq_len) {
    auto seq = checked_sequence(tokens, emb, p, max_seq_len);
    std::vector<Step> steps;
    run_forward(seq, emb, p, steps);
    const double z = p.v.dot(steps.back().h) + p.c;
    const double loss = label == 1 ? softplus(-z) : softplus(z);
    if (grad == nullptr) return loss;

    const double dz = sigmoid(z) - label;
    grad->v += dz * steps.back().h;
    grad->c += dz;

    VectorXd dh = dz * p.v;
    VectorXd dc_next = VectorXd::Zero(p.v.size());
    std::array<VectorXd, 4> da;
    for (std::size_t t = steps.size(); t-- > 0;) {
        const Step& s = steps[t];
        const VectorXd& i = s.gate[LstmParams::kInput];
        const VectorXd& f = s.gate[LstmParams::kForget];
        const VectorXd& o = s.gate[LstmParams::kOutput];
        const VectorXd& g = s.gate[LstmParams::kCell];

        VectorXd dc = dc_next + dh.cwiseProduct(o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
        da[LstmParams::kOutput] = dh.cwiseProduct(s.tanh_c).cwiseProduct((o.array() * (1.0 - o.array())).matrix());
        da[LstmParams::kInput] = dc.cwiseProduct(g).cwiseProduct((i.array() * (1.0 - i.array())).matrix());
        da[LstmParams::kForget] = dc.cwiseProduct(s.c_prev).cwiseProduct((f.array() * (1.0 - f.array())).matrix());
        da[LstmParams::kCell] = dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());
        dc_next = dc.cwiseProduct(f);

        dh.setZero();
        for (int k = 0; k < 4; ++k) {
            grad->W[k].noalias() += da[k] * s.x->transpose();
            grad->U[k].noalias() += da[k] * s.h_prev.transpose();
            grad->b[k] += da[k];
            dh.noalias() += p.U[k].transpose() * da[k];
        }
    }
    return loss;
}

double lstm_batch_loss(std::span<const SequenceExample> batch, const EmbeddingTable& emb, const LstmParams& p,
                       LstmParams* grad, std::size_t max_seq_len) {
    if (batch.empty()) throw DataError("empty_batch", "LSTM batch is empty");
    if (grad) *grad = LstmParams::zeros(p.input_dim(), p.hidden());
    double total = 0.0;
    for (const auto& ex : batch) total += lstm_sequence_loss(ex.tokens, ex.label, emb, p, grad, max_seq_len);
    const double inv = 1.0 / static_cast<double>(batch.size());
    if (grad) {
        for_each_block(*grad, [&](double* data, Eigen::Index n) {
            for (Eigen::Index k = 0; k < n; ++k) data[k] *= inv;
        });
    }
    return total * inv;
}

LstmModel train_lstm(std::span<const SequenceExample> data, const EmbeddingTable& emb, const LstmTrainConfig& cfg,
                     std::optional<LstmParams> init) {
    cfg.validate();
    bool has[2] = {false, false};
    for (const auto& ex : data) {
        if (ex.label != 0 && ex.label != 1) throw DataError("bad_label", "LSTM labels must be 0 or 1");
        has[ex.label] = true;
    }
    if (!has[0] || !has[1]) throw DataError("single_class", "LSTM training needs both labels");

    LstmModel model;
    model.config = cfg;
    model.params = init ? std::move(*init) : LstmParams::random_init(emb.dim(), cfg.hidden, cfg.seed);
    if (model.params.input_dim() != emb.dim() || model.params.hidden() != cfg.hidden) {
        throw ConfigError("initial LSTM parameters do not match the embedding or hidden size");
    }

    std::vector<std::uint32_t> order(data.size());
    std::iota(order.begin(), order.end(), 0u);
    std::vector<SequenceExample> batch;
    LstmParams grad = LstmParams::zeros(emb.dim(), cfg.hidden);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, 0xE90C0000ULL + epoch));
        rng.shuffle(std::span<std::uint32_t>(order));
        double epoch_total = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);

            const double loss = lstm_batch_loss(batch, emb, model.params, &grad, cfg.max_seq_len);
            if (!std::isfinite(loss)) {
                throw DivergenceError("LSTM loss became non-finite in epoch " + std::to_string(epoch + 1) +
                                      ", batch " + std::to_string(batch_index + 1));
            }
            epoch_total += loss * static_cast<double>(batch.size());

            auto flat_grad = grad.flatten();
            auto flat = model.params.flatten();
            for (std::size_t k = 0; k < flat.size(); ++k) flat[k] -= cfg.learning_rate * flat_grad[k];
            model.params.assign(flat);
            if (!model.params.all_finite()) {
                throw DivergenceError("LSTM parameters became non-finite in epoch " + std::to_string(epoch + 1) +
                                      ", batch " + std::to_string(batch_index + 1));
            }
        }
        model.epoch_loss.push_back(epoch_total / static_cast<double>(data.size()));
    }
    return model;
}

Prediction predict_lstm(std::span<const std::string> tokens, const EmbeddingTable& emb, const LstmParams& p,
                        std::size_t max_seq_len) {
    const double prob = lstm_forward(tokens, emb, p, max_seq_len);
    return {prob >= 0.5 ? 1 : 0, prob};
}

} // namespace vngender
