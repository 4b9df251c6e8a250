#include "vngender/names.hpp"

#include "vngender/error.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <cctype>

namespace vngender {

namespace {

const icu::Normalizer2& nfc() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
        throw Error("icu", std::string("cannot load NFC normalizer: ") + u_errorName(status));
    }
    return *n;
}

const icu::Normalizer2& nfd() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
        throw Error("icu", std::string("cannot load NFD normalizer: ") + u_errorName(status));
    }
    return *n;
}

icu::UnicodeString apply(const icu::Normalizer2& n, const icu::UnicodeString& s) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = n.normalize(s, status);
    if (U_FAILURE(status)) {
        throw Error("icu", std::string("normalization failed: ") + u_errorName(status));
    }
    return out;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

} // namespace

std::vector<std::string> NameComponents::tokens() const {
    std::vector<std::string> out;
    out.reserve(middle.size() + 2);
    if (family) out.push_back(*family);
    out.insert(out.end(), middle.begin(), middle.end());
    out.push_back(given);
    return out;
}

ComponentMask::ComponentMask(bool use_family, bool use_middle, bool use_given)
    : bits_(static_cast<std::uint8_t>((use_family ? kFamily : 0) | (use_middle ? kMiddle : 0) |
                                      (use_given ? kGiven : 0))) {
    if (bits_ == 0) throw ConfigError("component mask must select at least one component");
}

ComponentMask ComponentMask::from_bits(std::uint8_t bits) {
    if (bits == 0 || bits > 7) {
        throw ConfigError("component mask bits out of range: " + std::to_string(bits));
    }
    return ComponentMask(bits);
}

ComponentMask ComponentMask::parse(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s == "full" || s == "all") return full();

    std::uint8_t bits = 0;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t plus = s.find('+', start);
        std::string part = s.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
        std::uint8_t bit = 0;
        if (part == "fan") bit = kFamily;
        else if (part == "mn") bit = kMiddle;
        else if (part == "fin") bit = kGiven;
        if (bit == 0 || (bits & bit)) {
            throw ConfigError("invalid component mask '" + std::string(text) +
                              "' (expected fan, mn, fin, fan+mn, fan+fin, mn+fin or full)");
        }
        bits |= bit;
        if (plus == std::string::npos) break;
        start = plus + 1;
    }
    return ComponentMask(bits);
}

std::array<ComponentMask, 7> ComponentMask::all() {
    return {ComponentMask(kFamily),           ComponentMask(kMiddle),
            ComponentMask(kGiven),            ComponentMask(kFamily | kMiddle),
            ComponentMask(kFamily | kGiven),  ComponentMask(kMiddle | kGiven),
            ComponentMask(kFamily | kMiddle | kGiven)};
}

std::string ComponentMask::name() const {
    if (bits_ == (kFamily | kMiddle | kGiven)) return "full";
    std::string out;
    auto add = [&](const char* part) {
        if (!out.empty()) out += '+';
        out += part;
    };
    if (use_family()) add("fan");
    if (use_middle()) add("mn");
    if (use_given()) add("fin");
    return out;
}

std::string ComponentMask::label() const {
    std::string out;
    auto add = [&](const char* part) {
        if (!out.empty()) out += " + ";
        out += part;
    };
    if (use_family()) add("FaN");
    if (use_middle()) add("MN");
    if (use_given()) add("FiN");
    return out;
}

bool is_valid_utf8(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    int32_t length = 0;
    u_strFromUTF8(nullptr, 0, &length, text.data(), static_cast<int32_t>(text.size()), &status);
    return status == U_BUFFER_OVERFLOW_ERROR || status == U_STRING_NOT_TERMINATED_WARNING ||
           U_SUCCESS(status);
}

std::string normalize(std::string_view raw) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    s = apply(nfc(), s);
    s.toLower(icu::Locale::getRoot());
    s = apply(nfc(), s);

    icu::UnicodeString collapsed;
    bool pending_space = false;
    for (int32_t i = 0; i < s.length();) {
        UChar32 cp = s.char32At(i);
        i += U16_LENGTH(cp);
        if (u_isUWhiteSpace(cp)) {
            pending_space = !collapsed.isEmpty();
            continue;
        }
        if (pending_space) {
            collapsed.append(static_cast<UChar>(0x20));
            pending_space = false;
        }
        collapsed.append(cp);
    }
    if (collapsed.isEmpty()) throw EmptyNameError();
    return to_utf8(collapsed);
}

std::vector<std::string> split_tokens(std::string_view normalized) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < normalized.size()) {
        while (i < normalized.size() && normalized[i] == ' ') ++i;
        std::size_t j = i;
        while (j < normalized.size() && normalized[j] != ' ') ++j;
        if (j > i) tokens.emplace_back(normalized.substr(i, j - i));
        i = j;
    }
    return tokens;
}

NameComponents segment(std::string_view normalized) {
    std::vector<std::string> tokens = split_tokens(normalized);
    if (tokens.empty()) throw EmptyNameError();

    NameComponents c;
    c.given = std::move(tokens.back());
    if (tokens.size() >= 2) {
        c.family = std::move(tokens.front());
        for (std::size_t i = 1; i + 1 < tokens.size(); ++i) c.middle.push_back(std::move(tokens[i]));
    }
    return c;
}

NameComponents parse_name(std::string_view raw) { return segment(normalize(raw)); }

std::vector<std::string> select_components(const NameComponents& c, ComponentMask m) {
    std::vector<std::string> out;
    if (m.use_family() && c.family) out.push_back(*c.family);
    if (m.use_middle()) out.insert(out.end(), c.middle.begin(), c.middle.end());
    if (m.use_given()) out.push_back(c.given);
    return out;
}

std::string fold_diacritics(std::string_view text) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    s = apply(nfd(), s);
    icu::UnicodeString out;
    for (int32_t i = 0; i < s.length();) {
        UChar32 cp = s.char32At(i);
        i += U16_LENGTH(cp);
        if (u_charType(cp) == U_NON_SPACING_MARK) continue;
        if (cp == 0x0111) cp = 'd'; // đ
        if (cp == 0x0110) cp = 'D'; // Đ
        out.append(cp);
    }
    return to_utf8(out);
}

} // namespace vngender
