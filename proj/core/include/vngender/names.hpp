#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vngender {

/// A Vietnamese full name split positionally: family name first, given name
/// last, everything in between is the middle name.
struct NameComponents {
    std::optional<std::string> family;
    std::vector<std::string> middle;
    std::string given;

    /// family + middle + given, in order.
    std::vector<std::string> tokens() const;

    friend bool operator==(const NameComponents&, const NameComponents&) = default;
};

/// Which name components feed the model. At least one flag is set.
class ComponentMask {
public:
    static constexpr std::uint8_t kFamily = 1;
    static constexpr std::uint8_t kMiddle = 2;
    static constexpr std::uint8_t kGiven = 4;

    /// Throws ConfigError when no flag is set.
    ComponentMask(bool use_family, bool use_middle, bool use_given);

    static ComponentMask full() { return {true, true, true}; }
    static ComponentMask from_bits(std::uint8_t bits);
    /// Accepts fan, mn, fin, fan+mn, fan+fin, mn+fin, full (case-insensitive,
    /// components in any order).
    static ComponentMask parse(std::string_view text);

    /// The seven non-empty masks in ablation-table order.
    static std::array<ComponentMask, 7> all();

    bool use_family() const { return bits_ & kFamily; }
    bool use_middle() const { return bits_ & kMiddle; }
    bool use_given() const { return bits_ & kGiven; }
    std::uint8_t bits() const { return bits_; }

    /// Canonical CLI spelling, e.g. "mn+fin" or "full".
    std::string name() const;
    /// Table label, e.g. "MN + FiN".
    std::string label() const;

    friend bool operator==(ComponentMask a, ComponentMask b) { return a.bits_ == b.bits_; }

private:
    explicit ComponentMask(std::uint8_t bits) : bits_(bits) {}
    std::uint8_t bits_;
};

/// NFC-compose, trim, collapse whitespace runs and lowercase.
/// Throws EmptyNameError when nothing is left.
std::string normalize(std::string_view raw);

/// Whitespace tokenization of an already normalized name.
std::vector<std::string> split_tokens(std::string_view normalized);

/// Positional segmentation; throws EmptyNameError on empty input.
NameComponents segment(std::string_view normalized);

/// normalize() followed by segment().
NameComponents parse_name(std::string_view raw);

/// Tokens of the selected components in name order. May be empty, e.g. a
/// family-only mask over a single-token name; callers decide what to do.
std::vector<std::string> select_components(const NameComponents& c, ComponentMask m);

/// Strip diacritics to plain ASCII letters (đ -> d). Export helper only;
/// never used on the model path.
std::string fold_diacritics(std::string_view text);

bool is_valid_utf8(std::string_view text);

} // namespace vngender
