#include "vngender/data_io.hpp"

#include "vngender/error.hpp"
#include "vngender/names.hpp"
#include "vngender/rng.hpp"

#include <array>
#include <numeric>

namespace vngender {

namespace {

using namespace std::string_view_literals;

// Pools are pairwise disjoint so a token identifies its component.
constexpr std::array kFamily = {
    "Nguyễn"sv, "Trần"sv, "Lê"sv,   "Phạm"sv, "Hoàng"sv, "Huỳnh"sv, "Phan"sv, "Vũ"sv,
    "Võ"sv,     "Đặng"sv, "Bùi"sv,  "Đỗ"sv,   "Hồ"sv,    "Ngô"sv,   "Dương"sv, "Lý"sv,
};
// Rough shares of the most common Vietnamese surnames.
constexpr std::array kFamilyWeights = {
    38.4, 11.0, 9.5, 7.0, 5.1, 4.1, 4.5, 3.9, 3.9, 2.1, 2.0, 1.4, 1.3, 1.3, 1.0, 0.5,
};
static_assert(kFamily.size() == kFamilyWeights.size());

constexpr std::array kMaleMiddle = {
    "Văn"sv, "Đức"sv, "Hữu"sv, "Công"sv, "Quốc"sv, "Đình"sv, "Trọng"sv, "Bá"sv,
};
constexpr std::array kFemaleMiddle = {
    "Thị"sv, "Ngọc"sv, "Thùy"sv, "Diệu"sv, "Mỹ"sv, "Kim"sv, "Bích"sv, "Tuyết"sv,
};
constexpr std::array kGiven = {
    "Anh"sv,   "Bình"sv,  "Châu"sv,  "Chi"sv,   "Cường"sv, "Dũng"sv,  "Duy"sv,   "Đạt"sv,
    "Giang"sv, "Hà"sv,    "Hải"sv,   "Hạnh"sv,  "Hiền"sv,  "Hiếu"sv,  "Hòa"sv,   "Hùng"sv,
    "Hương"sv, "Huy"sv,   "Khánh"sv, "Khoa"sv,  "Lan"sv,   "Linh"sv,  "Long"sv,  "Mai"sv,
    "Minh"sv,  "My"sv,    "Nam"sv,   "Nga"sv,   "Nhung"sv, "Oanh"sv,  "Phong"sv, "Phúc"sv,
    "Phương"sv, "Quân"sv, "Quang"sv, "Quỳnh"sv, "Sơn"sv,   "Tâm"sv,   "Thảo"sv,  "Thắng"sv,
    "Thành"sv, "Trang"sv, "Trinh"sv, "Trung"sv, "Tú"sv,    "Tuấn"sv,  "Uyên"sv,  "Vân"sv,
    "Việt"sv,  "Vy"sv,    "Xuân"sv,  "Yến"sv,   "Đù"sv,    "Hào"sv,   "Tuyên"sv, "Lâm"sv,
};

template <typename Pool>
bool contains(const Pool& pool, std::string_view normalized_token) {
    for (auto t : pool) {
        if (normalize(t) == normalized_token) return true;
    }
    return false;
}

} // namespace

const SyntheticPools& synthetic_pools() {
    static const SyntheticPools pools{kFamily, kFamilyWeights, kMaleMiddle, kFemaleMiddle, kGiven};
    return pools;
}

std::optional<int> planted_rule_label(std::string_view middle_token) {
    std::string norm;
    try {
        norm = normalize(middle_token);
    } catch (const EmptyNameError&) {
        return std::nullopt;
    }
    if (contains(kMaleMiddle, norm)) return 1;
    if (contains(kFemaleMiddle, norm)) return 0;
    return std::nullopt;
}

Dataset generate_synthetic(std::size_t n, double fidelity, std::uint64_t seed) {
    if (n < 2) throw ConfigError("synthetic dataset needs at least 2 records");
    if (!(fidelity >= 0.0 && fidelity <= 1.0)) throw ConfigError("fidelity must lie in [0, 1]");

    std::array<double, kFamilyWeights.size()> cumulative{};
    std::partial_sum(kFamilyWeights.begin(), kFamilyWeights.end(), cumulative.begin());
    const double weight_total = cumulative.back();

    Rng rng(derive_seed(seed, 0x5EED));
    Dataset d;
    d.source_tag = "synthetic(n=" + std::to_string(n) + ",fidelity=" + std::to_string(fidelity) +
                   ",seed=" + std::to_string(seed) + ")";
    d.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01() * weight_total;
        std::size_t f = 0;
        while (f + 1 < cumulative.size() && u >= cumulative[f]) ++f;

        const bool rule_male = rng.bernoulli(kSyntheticMaleShare);
        std::string_view middle = rule_male ? kMaleMiddle[rng.index(kMaleMiddle.size())]
                                            : kFemaleMiddle[rng.index(kFemaleMiddle.size())];
        std::string_view given = kGiven[rng.index(kGiven.size())];
        const bool keep = rng.bernoulli(fidelity);
        const int label = (rule_male == keep) ? 1 : 0;

        std::string name;
        name.append(kFamily[f]).append(" ").append(middle).append(" ").append(given);
        d.records.push_back({std::move(name), label});
    }
    return d;
}

} // namespace vngender
