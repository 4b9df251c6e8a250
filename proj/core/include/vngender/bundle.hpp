#pragma once

#include "vngender/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace vngender {

inline constexpr std::uint32_t kBundleFormatVersion = 1;
inline constexpr std::string_view kBundleMagic{"VNGENDER", 8};

/// Deployable unit: a trained pipeline, the mask it was trained with and
/// training metadata.
///
/// On disk: 8-byte magic, u32 format version, u32 section count, then
/// sections of (4-byte tag, u64 length, payload), then a u64 FNV-1a
/// checksum of everything before it. Integers are little-endian, doubles
/// are stored as their IEEE-754 bit patterns. LSTM bundles reference their
/// embeddings file by path and content hash instead of embedding it.
struct ModelBundle {
    std::uint32_t format_version = kBundleFormatVersion;
    std::string model_id;
    TrainedPipeline pipeline;
    TrainMeta train_meta;
};

/// Stable id derived from the model kind, mask and serialized parameters.
std::string make_model_id(const TrainedPipeline& p);

std::string serialize_bundle(const ModelBundle& b);
/// Throws FormatError with codes bad_magic, version_mismatch, truncated,
/// checksum_mismatch, bad_section or embedding_mismatch.
ModelBundle deserialize_bundle(std::string_view bytes);

void save_model(const ModelBundle& b, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

} // namespace vngender
