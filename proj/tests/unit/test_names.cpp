#include "vngender/error.hpp"
#include "vngender/names.hpp"
#include "vngender/rng.hpp"

#include <gtest/gtest.h>

using namespace vngender;

TEST(Normalize, TrimsCollapsesAndLowercases) {
    EXPECT_EQ(normalize("  Nguyễn   Thị Hiền "), "nguyễn thị hiền");
    EXPECT_EQ(normalize("NGUYỄN\tTHỊ\nHIỀN"), "nguyễn thị hiền");
}

TEST(Normalize, DecomposedEqualsPrecomposed) {
    // N g u y e + U+0302 (circumflex) + U+0303 (tilde) + n
    const std::string decomposed = "Nguye\xCC\x82\xCC\x83n";
    EXPECT_EQ(normalize(decomposed), normalize("nguyễn"));
    EXPECT_EQ(normalize(decomposed), "nguyễn");
}

TEST(Normalize, WhitespaceOnlyIsEmptyName) {
    EXPECT_THROW(normalize("   "), EmptyNameError);
    EXPECT_THROW(normalize(""), EmptyNameError);
    try {
        normalize(" \t ");
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "empty_name");
    }
}

TEST(Normalize, UnicodeSpacesCollapse) {
    // no-break space and ideographic space
    EXPECT_EQ(normalize("Lê\xC2\xA0Văn\xE3\x80\x80Tám"), "lê văn tám");
}

TEST(Normalize, Idempotent) {
    const char* samples[] = {"  Nguyễn   Thị Hiền ", "ĐẶNG  Tú", "Võ Minh Đù", "a", "Trần-Lê  Anh", "Nguye\xCC\x82\xCC\x83n Văn"};
    for (const char* s : samples) {
        const std::string once = normalize(s);
        EXPECT_EQ(normalize(once), once) << s;
    }
}

TEST(Segment, ThreeTokens) {
    NameComponents c = segment("nguyễn thị hiền");
    ASSERT_TRUE(c.family);
    EXPECT_EQ(*c.family, "nguyễn");
    EXPECT_EQ(c.middle, std::vector<std::string>{"thị"});
    EXPECT_EQ(c.given, "hiền");
}

TEST(Segment, SingleTokenIsGiven) {
    NameComponents c = segment("hiền");
    EXPECT_FALSE(c.family);
    EXPECT_TRUE(c.middle.empty());
    EXPECT_EQ(c.given, "hiền");
}

TEST(Segment, TwoTokens) {
    NameComponents c = segment("đặng tú");
    EXPECT_EQ(*c.family, "đặng");
    EXPECT_TRUE(c.middle.empty());
    EXPECT_EQ(c.given, "tú");
}

TEST(Segment, InteriorTokensAreMiddle) {
    NameComponents c = segment("nguyễn văn minh đức");
    EXPECT_EQ(*c.family, "nguyễn");
    EXPECT_EQ(c.middle, (std::vector<std::string>{"văn", "minh"}));
    EXPECT_EQ(c.given, "đức");
}

TEST(Segment, EmptyThrows) { EXPECT_THROW(segment(""), EmptyNameError); }

TEST(Segment, HyphensStayInsideTokens) {
    NameComponents c = parse_name("Trần-Lê Thị Anh");
    EXPECT_EQ(*c.family, "trần-lê");
}

TEST(SelectComponents, Examples) {
    NameComponents c = segment("nguyễn thị hiền");
    EXPECT_EQ(select_components(c, ComponentMask::parse("mn+fin")), (std::vector<std::string>{"thị", "hiền"}));
    EXPECT_EQ(select_components(c, ComponentMask::parse("fan")), std::vector<std::string>{"nguyễn"});
    EXPECT_EQ(select_components(c, ComponentMask::full()),
              (std::vector<std::string>{"nguyễn", "thị", "hiền"}));
}

TEST(SelectComponents, AbsentFamilyContributesNothing) {
    NameComponents c = segment("hiền");
    EXPECT_TRUE(select_components(c, ComponentMask::parse("fan")).empty());
    EXPECT_TRUE(select_components(c, ComponentMask::parse("fan+mn")).empty());
    EXPECT_EQ(select_components(c, ComponentMask::parse("fan+fin")), std::vector<std::string>{"hiền"});
}

TEST(ComponentMask, ParseAndNames) {
    EXPECT_EQ(ComponentMask::parse("FIN+MN"), ComponentMask::parse("mn+fin"));
    EXPECT_EQ(ComponentMask::parse("all"), ComponentMask::full());
    EXPECT_EQ(ComponentMask::parse("fan+mn+fin"), ComponentMask::full());
    EXPECT_EQ(ComponentMask::parse("mn+fin").label(), "MN + FiN");
    EXPECT_EQ(ComponentMask::full().name(), "full");
    EXPECT_THROW(ComponentMask::parse("nope"), ConfigError);
    EXPECT_THROW(ComponentMask::parse(""), ConfigError);
    EXPECT_THROW(ComponentMask(false, false, false), ConfigError);
}

TEST(ComponentMask, AllSevenDistinctInTableOrder) {
    auto all = ComponentMask::all();
    const char* expected[] = {"fan", "mn", "fin", "fan+mn", "fan+fin", "mn+fin", "full"};
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].name(), expected[i]);
        EXPECT_EQ(ComponentMask::parse(all[i].name()), all[i]);
        for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(all[i] == all[j]);
    }
}

TEST(NameProperties, FullMaskReproducesTokensAndCountsAdd) {
    Rng rng(11);
    const char* pool[] = {"Nguyễn", "thị", "VĂN", "Hiền", "đức", "Ánh", "minh", "lê", "a-b", "Ý"};
    for (int trial = 0; trial < 500; ++trial) {
        std::string raw;
        const std::size_t n = 1 + rng.index(6);
        for (std::size_t k = 0; k < n; ++k) {
            raw += std::string(1 + rng.index(3), ' ');
            raw += pool[rng.index(std::size(pool))];
        }
        const std::string norm = normalize(raw);
        const NameComponents c = segment(norm);
        EXPECT_EQ(select_components(c, ComponentMask::full()), split_tokens(norm));
        EXPECT_EQ(c.tokens(), split_tokens(norm));
        EXPECT_FALSE(c.given.empty());
        for (ComponentMask m : ComponentMask::all()) {
            std::size_t expected = 0;
            if (m.use_family() && c.family) expected += 1;
            if (m.use_middle()) expected += c.middle.size();
            if (m.use_given()) expected += 1;
            EXPECT_EQ(select_components(c, m).size(), expected);
        }
    }
}

TEST(FoldDiacritics, ExportOnly) {
    EXPECT_EQ(fold_diacritics("Đặng Tú"), "Dang Tu");
    EXPECT_EQ(fold_diacritics("nguyễn thị hiền"), "nguyen thi hien");
}

TEST(Utf8, Validation) {
    EXPECT_TRUE(is_valid_utf8("Nguyễn"));
    EXPECT_FALSE(is_valid_utf8("\xC3\x28"));
}
