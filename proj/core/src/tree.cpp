#include "vngender/classical.hpp"

#include "vngender/error.hpp"
#include "vngender/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace vngender {

const TreeNode& TreeParams::leaf_for(const SparseVector& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(
            x.weight_of(static_cast<std::uint32_t>(n.feature)) >= n.threshold ? n.right : n.left);
    }
    return nodes[i];
}

std::size_t TreeParams::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

void TreeParams::validate(std::size_t n_features) const {
    if (nodes.empty()) throw FormatError("bad_tree", "tree has no nodes");
    std::vector<int> parents(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.label != 0 && n.label != 1) throw FormatError("bad_tree", "leaf label must be 0 or 1");
        if (n.is_leaf()) {
            if (n.left != -1 || n.right != -1) throw FormatError("bad_tree", "leaf with children");
            continue;
        }
        if (static_cast<std::size_t>(n.feature) >= n_features) {
            throw FormatError("bad_tree", "split feature out of range");
        }
        for (std::int32_t child : {n.left, n.right}) {
            if (child <= static_cast<std::int32_t>(i) || static_cast<std::size_t>(child) >= nodes.size()) {
                throw FormatError("bad_tree", "child index must point forward inside the node list");
            }
            ++parents[static_cast<std::size_t>(child)];
        }
        if (n.left == n.right) throw FormatError("bad_tree", "both children are the same node");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (parents[i] != 1) throw FormatError("bad_tree", "node " + std::to_string(i) + " is not reachable exactly once");
    }
}

namespace {

// Minimising weighted Gini is the same as maximising this score.
double gini_score(double l_pos, double l_n, double r_pos, double r_n) {
    const double l_neg = l_n - l_pos;
    const double r_neg = r_n - r_pos;
    return (l_pos * l_pos + l_neg * l_neg) / l_n + (r_pos * r_pos + r_neg * r_neg) / r_n;
}

bool ties(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

struct Candidate {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double score = -1.0;
};

// Prefers the higher score; near-ties go to the lower feature index, then
// the lower threshold.
void consider(Candidate& best, std::int32_t feature, double threshold, double score) {
    if (best.feature < 0 || (score > best.score && !ties(score, best.score))) {
        best = {feature, threshold, score};
        return;
    }
    if (ties(score, best.score) &&
        (feature < best.feature || (feature == best.feature && threshold < best.threshold))) {
        best = {feature, threshold, score};
    }
}

class TreeBuilder {
public:
    TreeBuilder(const LabeledMatrix& data, std::optional<std::size_t> max_depth, std::size_t min_leaf,
                std::size_t mtry, std::uint64_t seed)
        : data_(data), max_depth_(max_depth), min_leaf_(min_leaf), mtry_(mtry),
          buckets_(data.n_features), perm_(data.n_features), rng_(seed) {
        std::iota(perm_.begin(), perm_.end(), 0u);
    }

    TreeParams build(std::vector<std::uint32_t> rows) {
        TreeParams tree;
        struct Pending {
            std::size_t node;
            std::vector<std::uint32_t> rows;
            std::size_t depth;
        };
        std::vector<Pending> stack;
        tree.nodes.emplace_back();
        stack.push_back({0, std::move(rows), 0});
        while (!stack.empty()) {
            Pending cur = std::move(stack.back());
            stack.pop_back();

            std::size_t pos = 0;
            for (auto r : cur.rows) pos += static_cast<std::size_t>(data_.labels[r]);
            const std::size_t n = cur.rows.size();
            TreeNode& node = tree.nodes[cur.node];
            node.n_samples = static_cast<std::uint32_t>(n);
            node.label = 2 * pos >= n ? 1 : 0;
            node.purity = static_cast<double>(std::max(pos, n - pos)) / static_cast<double>(n);

            const bool pure = pos == 0 || pos == n;
            const bool depth_capped = max_depth_ && cur.depth >= *max_depth_;
            if (pure || depth_capped || n < 2 * min_leaf_) continue;

            Candidate split = find_split(cur.rows, pos);
            if (split.feature < 0) continue;

            std::vector<std::uint32_t> left, right;
            for (auto r : cur.rows) {
                const double v = data_.rows[r].weight_of(static_cast<std::uint32_t>(split.feature));
                (v >= split.threshold ? right : left).push_back(r);
            }
            const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& parent = tree.nodes[cur.node];
            parent.feature = split.feature;
            parent.threshold = split.threshold;
            parent.left = left_id;
            parent.right = left_id + 1;
            // right pushed first so the left subtree is expanded first
            stack.push_back({static_cast<std::size_t>(left_id + 1), std::move(right), cur.depth + 1});
            stack.push_back({static_cast<std::size_t>(left_id), std::move(left), cur.depth + 1});
        }
        return tree;
    }

    Candidate find_split(std::span<const std::uint32_t> rows, std::size_t pos) {
        touched_.clear();
        for (auto r : rows) {
            for (const auto& e : data_.rows[r].entries) {
                if (e.weight == 0.0) continue;
                auto& b = buckets_[e.index];
                if (b.empty()) touched_.push_back(e.index);
                b.push_back({e.weight, data_.labels[r]});
            }
        }

        Candidate best;
        const std::size_t n = rows.size();
        if (mtry_ >= data_.n_features) {
            std::sort(touched_.begin(), touched_.end());
            for (auto f : touched_) evaluate(f, n, pos, best);
        } else {
            // Draw features without replacement; only non-constant ones count
            // toward mtry, and drawing continues until mtry of them are seen.
            const std::size_t v = perm_.size();
            std::size_t visited = 0;
            for (std::size_t k = 0; k < v && visited < mtry_; ++k) {
                const std::size_t j = k + static_cast<std::size_t>(rng_.index(v - k));
                std::swap(perm_[k], perm_[j]);
                if (evaluate(perm_[k], n, pos, best)) ++visited;
            }
        }
        for (auto f : touched_) buckets_[f].clear();
        return best;
    }

private:
    struct Value {
        double value;
        int label;
    };

    // Returns false when the feature is constant inside the node.
    bool evaluate(std::uint32_t f, std::size_t n, std::size_t pos, Candidate& best) {
        auto& b = buckets_[f];
        if (b.empty()) return false;
        std::sort(b.begin(), b.end(), [](const Value& a, const Value& c) { return a.value < c.value; });
        const std::size_t zeros = n - b.size();
        if (zeros == 0 && b.front().value == b.back().value) return false;

        std::size_t nz_pos = 0;
        for (const auto& x : b) nz_pos += static_cast<std::size_t>(x.label);

        // Sweep left-to-right: "left" holds everything below the threshold.
        double left_n = static_cast<double>(zeros);
        double left_pos = static_cast<double>(pos - nz_pos);
        double prev = 0.0;
        bool have_prev = zeros > 0;
        const double total_n = static_cast<double>(n);
        const double total_pos = static_cast<double>(pos);
        const auto leaf_min = static_cast<double>(min_leaf_);
        for (std::size_t i = 0; i < b.size();) {
            const double value = b[i].value;
            if (have_prev && left_n >= leaf_min && total_n - left_n >= leaf_min) {
                const double threshold = prev + (value - prev) / 2.0;
                consider(best, static_cast<std::int32_t>(f), threshold,
                         gini_score(left_pos, left_n, total_pos - left_pos, total_n - left_n));
            }
            while (i < b.size() && b[i].value == value) {
                left_n += 1.0;
                left_pos += b[i].label;
                ++i;
            }
            prev = value;
            have_prev = true;
        }
        return true;
    }

    const LabeledMatrix& data_;
    std::optional<std::size_t> max_depth_;
    std::size_t min_leaf_;
    std::size_t mtry_;
    std::vector<std::vector<Value>> buckets_;
    std::vector<std::uint32_t> touched_;
    std::vector<std::uint32_t> perm_;
    Rng rng_;
};

std::vector<std::uint32_t> all_rows(std::size_t n) {
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0u);
    return rows;
}

void check_tree_config(const LabeledMatrix& data, std::size_t min_leaf) {
    data.validate();
    if (min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
}

} // namespace

SplitChoice best_gini_split(const LabeledMatrix& data, std::span<const std::uint32_t> rows,
                            std::size_t min_leaf) {
    TreeBuilder builder(data, std::nullopt, min_leaf, data.n_features, 0);
    std::size_t pos = 0;
    for (auto r : rows) pos += static_cast<std::size_t>(data.labels[r]);
    Candidate c = builder.find_split(rows, pos);
    SplitChoice out;
    if (c.feature < 0) return out;
    out.feature = c.feature;
    out.threshold = c.threshold;
    const double n = static_cast<double>(rows.size());
    // score = Σ_children Σ_classes count² / n_child, so weighted Gini = 1 − score/n
    out.weighted_gini = 1.0 - c.score / n;
    return out;
}

ClassifierModel fit_decision_tree(const LabeledMatrix& data, const TreeConfig& cfg) {
    check_tree_config(data, cfg.min_leaf);
    TreeBuilder builder(data, cfg.max_depth, cfg.min_leaf, data.n_features, cfg.seed);

    ClassifierModel m;
    m.kind = ModelKind::DecisionTree;
    m.n_features = data.n_features;
    m.params = builder.build(all_rows(data.size()));
    m.train_meta["max_depth"] = cfg.max_depth ? std::to_string(*cfg.max_depth) : "none";
    m.train_meta["min_leaf"] = std::to_string(cfg.min_leaf);
    m.train_meta["seed"] = std::to_string(cfg.seed);
    return m;
}

ClassifierModel fit_random_forest(const LabeledMatrix& data, const ForestConfig& cfg) {
    check_tree_config(data, cfg.min_leaf);
    if (cfg.n_trees < 1) throw ConfigError("n_trees must be at least 1");
    const std::size_t mtry =
        cfg.mtry.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.n_features)))));
    if (mtry < 1 || mtry > data.n_features) {
        throw ConfigError("mtry must lie in [1, n_features] (got " + std::to_string(mtry) + ")");
    }

    ForestParams p;
    p.trees.resize(cfg.n_trees);
    p.tree_seeds.resize(cfg.n_trees);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) p.tree_seeds[t] = derive_seed(cfg.seed, t);

    auto grow = [&](std::size_t t) {
        Rng boot(derive_seed(p.tree_seeds[t], 1));
        std::vector<std::uint32_t> rows;
        if (cfg.bootstrap) {
            rows.resize(data.size());
            for (auto& r : rows) r = static_cast<std::uint32_t>(boot.index(data.size()));
            std::sort(rows.begin(), rows.end());
        } else {
            rows = all_rows(data.size());
        }
        TreeBuilder builder(data, cfg.max_depth, cfg.min_leaf, mtry, derive_seed(p.tree_seeds[t], 2));
        p.trees[t] = builder.build(std::move(rows));
    };

    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cfg.n_trees);
    if (threads <= 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) grow(t);
    } else {
        // Each tree depends only on its own seed, so the interleaving is free.
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < cfg.n_trees; t += threads) grow(t);
            });
        }
    }

    ClassifierModel m;
    m.kind = ModelKind::RandomForest;
    m.n_features = data.n_features;
    m.params = std::move(p);
    m.train_meta["n_trees"] = std::to_string(cfg.n_trees);
    m.train_meta["mtry"] = std::to_string(mtry);
    m.train_meta["bootstrap"] = cfg.bootstrap ? "true" : "false";
    m.train_meta["max_depth"] = cfg.max_depth ? std::to_string(*cfg.max_depth) : "none";
    m.train_meta["min_leaf"] = std::to_string(cfg.min_leaf);
    m.train_meta["seed"] = std::to_string(cfg.seed);
    return m;
}

} // namespace vngender
