#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lea/noise.hpp"
#include "lea/rng.hpp"
#include "lea/text.hpp"

namespace {

using lea::SplitMix64;
using lea::noise::corrupt_sentence;
using lea::noise::corrupt_word;
using lea::noise::keyboard_neighbors;
using lea::noise::NoiseConfig;
using lea::noise::TypoOp;

int lev_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> d(a.size() + 1,
                                    std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    return d[a.size()][b.size()];
}

// Optimal string alignment distance (adjacent transposition counts as one).
int dl_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> d(a.size() + 1,
                                    std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
        }
    return d[a.size()][b.size()];
}

std::vector<std::string> whitespace_runs(const std::string& s) {
    std::vector<std::string> runs;
    std::string cur;
    for (char c : s) {
        if (lea::is_space(c)) {
            cur += c;
        } else if (!cur.empty()) {
            runs.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) runs.push_back(cur);
    return runs;
}

TEST(Noise, KeyboardAdjacencyFullTable) {
    const std::map<char, std::string> expected = {
        {'q', "asw"},    {'w', "deqs"},   {'e', "dfrw"},  {'r', "efgt"},
        {'t', "ghry"},   {'y', "hjtu"},   {'u', "ijky"},  {'i', "klou"},
        {'o', "ilp"},    {'p', "o"},      {'a', "qsz"},   {'s', "adqwxz"},
        {'d', "cefswx"}, {'f', "cdegrv"}, {'g', "bfhrtv"}, {'h', "bgjnty"},
        {'j', "hkmnuy"}, {'k', "ijlmu"},  {'l', "iko"},   {'z', "asx"},
        {'x', "cdsz"},   {'c', "dfvx"},   {'v', "bcfg"},  {'b', "ghnv"},
        {'n', "bhjm"},   {'m', "jkn"}};
    for (const auto& [c, nb] : expected)
        EXPECT_EQ(keyboard_neighbors(static_cast<char32_t>(c)), nb) << c;
}

TEST(Noise, KeyboardAdjacencyIsSymmetric) {
    for (char c = 'a'; c <= 'z'; ++c) {
        std::string nb = keyboard_neighbors(static_cast<char32_t>(c));
        for (char n : nb) {
            std::string back = keyboard_neighbors(static_cast<char32_t>(n));
            EXPECT_NE(back.find(c), std::string::npos)
                << c << " -> " << n << " not symmetric";
        }
    }
}

TEST(Noise, KeyboardAdjacencyNonLetters) {
    EXPECT_EQ(keyboard_neighbors(U'7'), "");
    EXPECT_EQ(keyboard_neighbors(U'-'), "");
    EXPECT_EQ(keyboard_neighbors(U' '), "");
    EXPECT_EQ(keyboard_neighbors(char32_t{0xe9}), "");
}

TEST(Noise, InsertionAddsExactlyOneCharacter) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        SplitMix64 rng(seed);
        std::string out = corrupt_word("screen", TypoOp::insertion, rng);
        ASSERT_EQ(out.size(), 7u);
        ASSERT_EQ(lev_distance(out, "screen"), 1) << out;
    }
}

TEST(Noise, DeletionRemovesExactlyOneCharacter) {
    bool saw_sceen = false;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        SplitMix64 rng(seed);
        std::string out = corrupt_word("screen", TypoOp::deletion, rng);
        ASSERT_EQ(out.size(), 5u);
        ASSERT_EQ(lev_distance(out, "screen"), 1) << out;
        saw_sceen = saw_sceen || out == "sceen";
    }
    EXPECT_TRUE(saw_sceen);
}

TEST(Noise, DeletionNeverEmptiesWord) {
    SplitMix64 rng(1);
    EXPECT_EQ(corrupt_word("a", TypoOp::deletion, rng), "a");
}

TEST(Noise, SubstitutionChangesExactlyOnePosition) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        SplitMix64 rng(seed);
        std::string out = corrupt_word("screen", TypoOp::substitution, rng);
        ASSERT_EQ(out.size(), 6u);
        ASSERT_EQ(lev_distance(out, "screen"), 1) << out;
        int diff = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            if (out[i] != "screen"[i]) {
                ++diff;
                ASSERT_GE(out[i], 'a');
                ASSERT_LE(out[i], 'z');
            }
        }
        ASSERT_EQ(diff, 1);
    }
}

TEST(Noise, SwapTransposesAdjacentDistinctCharacters) {
    bool saw_srceen = false;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        SplitMix64 rng(seed);
        std::string out = corrupt_word("screen", TypoOp::swap, rng);
        ASSERT_EQ(out.size(), 6u);
        ASSERT_NE(out, "screen");
        ASSERT_EQ(dl_distance(out, "screen"), 1) << out;
        ASSERT_LE(lev_distance(out, "screen"), 2) << out;
        std::string sorted_out = out, sorted_in = "screen";
        std::sort(sorted_out.begin(), sorted_out.end());
        std::sort(sorted_in.begin(), sorted_in.end());
        ASSERT_EQ(sorted_out, sorted_in);
        saw_srceen = saw_srceen || out == "srceen";
    }
    EXPECT_TRUE(saw_srceen);
}

TEST(Noise, SwapLeavesUniformWordUnchanged) {
    SplitMix64 rng(5);
    EXPECT_EQ(corrupt_word("aaaa", TypoOp::swap, rng), "aaaa");
}

TEST(Noise, KeyboardSubstitutionUsesNeighbors) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        SplitMix64 rng(seed);
        std::string out = corrupt_word("screen", TypoOp::keyboard, rng);
        ASSERT_EQ(out.size(), 6u);
        ASSERT_EQ(lev_distance(out, "screen"), 1) << out;
        int diff = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            if (out[i] != "screen"[i]) {
                ++diff;
                std::string nb =
                    keyboard_neighbors(static_cast<char32_t>("screen"[i]));
                ASSERT_NE(nb.find(out[i]), std::string::npos)
                    << "screen"[i] << " -> " << out[i];
            }
        }
        ASSERT_EQ(diff, 1);
    }
}

TEST(Noise, KeyboardFallsBackOnNeighborlessCharacters) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SplitMix64 rng(seed);
        std::string out = corrupt_word("1234", TypoOp::keyboard, rng);
        ASSERT_EQ(out.size(), 4u);
        ASSERT_EQ(lev_distance(out, "1234"), 1) << out;
        for (std::size_t i = 0; i < 4; ++i)
            if (out[i] != "1234"[i]) {
                ASSERT_GE(out[i], 'a');
                ASSERT_LE(out[i], 'z');
            }
    }
}

TEST(Noise, CorruptWordIsDeterministic) {
    for (TypoOp op : lea::noise::kAllOps) {
        SplitMix64 a(99), b(99);
        EXPECT_EQ(corrupt_word("keyboard", op, a), corrupt_word("keyboard", op, b));
    }
}

TEST(Noise, ShortWordsAreNeverModified) {
    NoiseConfig cfg;
    cfg.p_word = 1.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        cfg.seed = seed;
        EXPECT_EQ(corrupt_sentence("usb hub", cfg, 0, 0), "usb hub");
        EXPECT_EQ(corrupt_sentence("a bb ccc", cfg, 0, 0), "a bb ccc");
    }
}

TEST(Noise, FourCharacterWordsAreEligible) {
    NoiseConfig cfg;
    cfg.p_word = 1.0;
    cfg.seed = 12;
    EXPECT_NE(corrupt_sentence("park", cfg, 0, 0), "park");
}

TEST(Noise, SentenceGateZeroIsIdentity) {
    NoiseConfig cfg;
    cfg.p_word = 1.0;
    cfg.p_sentence = 0.0;
    cfg.seed = 4;
    EXPECT_EQ(corrupt_sentence("wireless keyboard charger", cfg, 0, 0),
              "wireless keyboard charger");
}

TEST(Noise, ZeroWordProbabilityIsByteIdentity) {
    NoiseConfig cfg;
    cfg.p_word = 0.0;
    cfg.seed = 4;
    std::string s = "  spaced\tout  text \n";
    EXPECT_EQ(corrupt_sentence(s, cfg, 3, 1), s);
}

TEST(Noise, WhitespaceAndWordCountPreserved) {
    NoiseConfig cfg;
    cfg.p_word = 1.0;
    cfg.seed = 21;
    std::string s = " wireless  keyboard\t charger pack ";
    std::string out = corrupt_sentence(s, cfg, 0, 0);
    EXPECT_EQ(whitespace_runs(out), whitespace_runs(s));
    EXPECT_EQ(lea::split_words(out).size(), lea::split_words(s).size());
}

TEST(Noise, DeterministicPerKey) {
    NoiseConfig cfg;
    cfg.p_word = 1.0;
    cfg.seed = 77;
    std::string s = "wireless keyboard charger";
    EXPECT_EQ(corrupt_sentence(s, cfg, 5, 0), corrupt_sentence(s, cfg, 5, 0));
    EXPECT_NE(corrupt_sentence(s, cfg, 5, 0), corrupt_sentence(s, cfg, 5, 1));
    EXPECT_NE(corrupt_sentence(s, cfg, 5, 0), corrupt_sentence(s, cfg, 6, 0));
}

TEST(Noise, BinomialCorruptionRate) {
    // 10,000 eligible words at p_word = 0.2: expect 2000 +/- 120 (3 sigma).
    const int n = 10000;
    std::string s;
    for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += "abcde";
    }
    NoiseConfig cfg;
    cfg.p_word = 0.2;
    cfg.seed = 2024;
    std::string out = corrupt_sentence(s, cfg, 0, 0);
    auto words = lea::split_words(out);
    ASSERT_EQ(words.size(), static_cast<std::size_t>(n));
    int corrupted = 0;
    for (auto w : words) corrupted += w != "abcde";
    EXPECT_GE(corrupted, 1880);
    EXPECT_LE(corrupted, 2120);
}

TEST(Noise, CorruptedWordsKeepSingleEditDistance) {
    NoiseConfig cfg;
    cfg.p_word = 1.0;
    cfg.seed = 8;
    for (std::uint64_t pair = 0; pair < 400; ++pair) {
        std::string out = corrupt_sentence("keyboard", cfg, pair, 0);
        ASSERT_EQ(dl_distance(out, "keyboard"), 1) << out;
    }
}

TEST(Noise, CorruptSplitShapesAndDeterminism) {
    lea::data::PairDataset ds;
    for (int i = 0; i < 30; ++i)
        ds.records.push_back({"id-" + std::to_string(i),
                              "wireless keyboard model alpha",
                              "bluetooth keyboard model alpha", i % 2});
    NoiseConfig cfg;
    cfg.p_word = 0.3;
    cfg.seed = 7;
    auto reps = lea::noise::corrupt_split(ds, cfg, 3);
    ASSERT_EQ(reps.size(), 3u);
    auto reps2 = lea::noise::corrupt_split(ds, cfg, 3);
    for (std::size_t k = 0; k < 3; ++k) {
        ASSERT_EQ(reps[k].records.size(), ds.records.size());
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            EXPECT_EQ(reps[k].records[i].id, ds.records[i].id);
            EXPECT_EQ(reps[k].records[i].label, ds.records[i].label);
            EXPECT_EQ(reps[k].records[i].left, reps2[k].records[i].left);
            EXPECT_EQ(reps[k].records[i].right, reps2[k].records[i].right);
        }
    }
    // Replicas differ pairwise somewhere.
    auto text = [](const lea::data::PairDataset& d) {
        std::string t;
        for (const auto& r : d.records) t += r.left + "|" + r.right + "\n";
        return t;
    };
    EXPECT_NE(text(reps[0]), text(reps[1]));
    EXPECT_NE(text(reps[0]), text(reps[2]));
    EXPECT_NE(text(reps[1]), text(reps[2]));
}

TEST(Noise, CorruptSplitZeroProbabilityCopiesInput) {
    lea::data::PairDataset ds;
    ds.records.push_back({"x", "wireless keyboard", "usb charger", 1});
    NoiseConfig cfg;
    cfg.p_word = 0.0;
    auto reps = lea::noise::corrupt_split(ds, cfg, 1);
    ASSERT_EQ(reps.size(), 1u);
    EXPECT_EQ(reps[0].records[0].left, ds.records[0].left);
    EXPECT_EQ(reps[0].records[0].right, ds.records[0].right);
}

TEST(Noise, OpNamesAndCount) {
    ASSERT_EQ(std::size(lea::noise::kAllOps), 5u);
    EXPECT_STREQ(to_string(TypoOp::insertion), "insertion");
    EXPECT_STREQ(to_string(TypoOp::deletion), "deletion");
    EXPECT_STREQ(to_string(TypoOp::substitution), "substitution");
    EXPECT_STREQ(to_string(TypoOp::swap), "swap");
    EXPECT_STREQ(to_string(TypoOp::keyboard), "keyboard");
}

}  // namespace
