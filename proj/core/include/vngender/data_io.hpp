#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vngender {

enum class Gender : std::uint8_t { Female = 0, Male = 1 };

inline int label_of(Gender g) { return static_cast<int>(g); }
inline const char* gender_name(int label) { return label == 1 ? "male" : "female"; }

struct DatasetRecord {
    std::string full_name; ///< raw, trimmed, diacritics preserved
    int gender = 0;        ///< 1 = male, 0 = female

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct Dataset {
    std::vector<DatasetRecord> records;
    std::string source_tag;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    /// {female count, male count}
    std::pair<std::size_t, std::size_t> label_counts() const;
};

struct RowReject {
    std::size_t row = 0; ///< 1-based physical line number
    std::string reason;
};

struct LoadResult {
    Dataset dataset;
    std::vector<RowReject> rejects;
    bool had_header = false;
};

enum class DatasetFormat { Csv };

/// Reads a `full_name,gender` CSV. Bad rows are rejected one by one and
/// reported; zero valid rows (or a missing file) throws DataError.
LoadResult load_dataset(const std::filesystem::path& path, DatasetFormat format = DatasetFormat::Csv);
LoadResult parse_dataset_csv(std::string_view content, std::string source_tag);

void write_dataset_csv(const Dataset& d, std::ostream& out);
void save_dataset(const Dataset& d, const std::filesystem::path& path);

using TokenCount = std::pair<std::string, std::size_t>;

/// Ranked tokens for one name component, split by gender.
struct ComponentTable {
    std::vector<TokenCount> male;
    std::vector<TokenCount> female;
};

struct DatasetStats {
    std::size_t total = 0;
    std::size_t male = 0;
    std::size_t female = 0;
    double male_fraction = 0.0;
    double female_fraction = 0.0;
    std::size_t duplicate_names = 0; ///< records whose normalized name appeared earlier
    std::size_t unparseable = 0;     ///< records that normalize to nothing
    ComponentTable top_family_names;
    ComponentTable top_middle_tokens;
    ComponentTable top_given_names;
};

/// Throws DataError on an empty dataset, ConfigError when top_k == 0.
DatasetStats dataset_stats(const Dataset& d, std::size_t top_k);

/// Tab-separated summary plus one ranked table per component.
void write_stats_tsv(const DatasetStats& s, std::ostream& out);

/// Token pools used by generate_synthetic. Middle tokens in `male_middle`
/// imply label 1 under the planted rule, those in `female_middle` label 0.
struct SyntheticPools {
    std::span<const std::string_view> family;
    std::span<const double> family_weights;
    std::span<const std::string_view> male_middle;
    std::span<const std::string_view> female_middle;
    std::span<const std::string_view> given;
};

const SyntheticPools& synthetic_pools();

/// Label the planted rule assigns to a (normalized or raw) middle token, or
/// nullopt when the token is in neither pool.
std::optional<int> planted_rule_label(std::string_view middle_token);

/// Probability that the planted rule draws a male middle token.
inline constexpr double kSyntheticMaleShare = 0.5771;

/// Seeded planted-rule corpus: family + one middle token + given. The
/// middle token decides the label with probability `fidelity`; family and
/// given names are drawn independently of the label.
Dataset generate_synthetic(std::size_t n, double fidelity, std::uint64_t seed);

} // namespace vngender
