#pragma once

#include "vngender/bundle.hpp"
#include "vngender/data_io.hpp"
#include "vngender/rng.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fixture {

/// Trains a bundle on `train`. LSTM arms get a small, quick configuration
/// unless `full_lstm` is set.
inline vngender::ModelBundle train_bundle(const vngender::Dataset& train, vngender::ModelKind kind,
                                          vngender::ComponentMask mask, std::uint64_t seed = 1,
                                          vngender::VectorizerConfig vec = vngender::VectorizerConfig::count(),
                                          bool full_lstm = false) {
    vngender::ExperimentArm arm{vngender::ModelSpec::defaults(kind, seed), vec};
    if (kind == vngender::ModelKind::Lstm && !full_lstm) {
        arm.model.lstm.hidden = 16;
        arm.model.lstm.epochs = 4;
        arm.model.lstm.learning_rate = 1.0;
        arm.model.embedding_dim = 32;
    }
    if (kind == vngender::ModelKind::RandomForest) arm.model.forest.n_trees = 25;
    vngender::ModelBundle b;
    b.pipeline = vngender::train_pipeline(train, mask, arm);
    b.model_id = vngender::make_model_id(b.pipeline);
    b.train_meta["seed"] = std::to_string(seed);
    return b;
}

/// Names mixing pool tokens with unseen syllables, 1 to 5 tokens long,
/// with random casing and spacing; some select nothing under narrow masks.
inline std::vector<std::string> random_names(std::size_t n, std::uint64_t seed) {
    const auto& pools = vngender::synthetic_pools();
    const char* unseen[] = {"Xuân", "Khôi", "Tường", "Lộc", "Nhi", "Quyên", "Bảo", "Phúc", "zed"};
    vngender::Rng rng(seed);
    auto pick = [&](std::span<const std::string_view> pool) { return std::string(pool[rng.index(pool.size())]); };
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = 1 + rng.index(5);
        std::string name;
        for (std::size_t k = 0; k < len; ++k) {
            std::string tok;
            switch (rng.index(5)) {
            case 0: tok = pick(pools.family); break;
            case 1: tok = pick(pools.male_middle); break;
            case 2: tok = pick(pools.female_middle); break;
            case 3: tok = pick(pools.given); break;
            default: tok = unseen[rng.index(std::size(unseen))]; break;
            }
            if (!name.empty()) name += rng.bernoulli(0.2) ? "  " : " ";
            name += tok;
        }
        out.push_back(std::move(name));
    }
    return out;
}

inline std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("vngender_" + name);
}

} // namespace fixture
