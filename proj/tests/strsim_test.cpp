#include <gtest/gtest.h>

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "lea/errors.hpp"
#include "lea/rng.hpp"
#include "lea/strsim.hpp"

namespace {

using lea::strsim::MetricKind;
using lea::strsim::similarity;

// ---- Test-side reference implementations (independent of the library's
// iterative DP): plain memoized recursion straight off the definitions. ----

int lev_rec(const std::string& a, const std::string& b, std::size_t i,
            std::size_t j, std::vector<int>& memo) {
    int& slot = memo[i * (b.size() + 1) + j];
    if (slot >= 0) return slot;
    int r;
    if (i == 0)
        r = static_cast<int>(j);
    else if (j == 0)
        r = static_cast<int>(i);
    else {
        int del = lev_rec(a, b, i - 1, j, memo) + 1;
        int ins = lev_rec(a, b, i, j - 1, memo) + 1;
        int sub = lev_rec(a, b, i - 1, j - 1, memo) + (a[i - 1] != b[j - 1]);
        r = std::min({del, ins, sub});
    }
    slot = r;
    return r;
}

int lev_reference(const std::string& a, const std::string& b) {
    std::vector<int> memo((a.size() + 1) * (b.size() + 1), -1);
    return lev_rec(a, b, a.size(), b.size(), memo);
}

int lcs_rec(const std::string& a, const std::string& b, std::size_t i,
            std::size_t j, std::vector<int>& memo) {
    int& slot = memo[i * (b.size() + 1) + j];
    if (slot >= 0) return slot;
    int r;
    if (i == 0 || j == 0)
        r = 0;
    else if (a[i - 1] == b[j - 1])
        r = lcs_rec(a, b, i - 1, j - 1, memo) + 1;
    else
        r = std::max(lcs_rec(a, b, i - 1, j, memo),
                     lcs_rec(a, b, i, j - 1, memo));
    slot = r;
    return r;
}

int lcs_reference(const std::string& a, const std::string& b) {
    std::vector<int> memo((a.size() + 1) * (b.size() + 1), -1);
    return lcs_rec(a, b, a.size(), b.size(), memo);
}

bool is_subsequence(const std::string& needle, const std::string& hay) {
    std::size_t i = 0;
    for (char c : hay)
        if (i < needle.size() && needle[i] == c) ++i;
    return i == needle.size();
}

// Exhaustive oracle: longest common subsequence by enumerating every
// subsequence of the shorter string.
int lcs_exhaustive(const std::string& a, const std::string& b) {
    const std::string& s = a.size() <= b.size() ? a : b;
    const std::string& t = a.size() <= b.size() ? b : a;
    int best = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << s.size()); ++mask) {
        std::string sub;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (mask & (std::size_t{1} << i)) sub += s[i];
        if (static_cast<int>(sub.size()) > best && is_subsequence(sub, t))
            best = static_cast<int>(sub.size());
    }
    return best;
}

std::string random_word(lea::SplitMix64& rng, std::size_t max_len,
                        int alphabet) {
    std::size_t len = rng.next_below(max_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i)
        w += static_cast<char>('a' + rng.next_below(static_cast<std::uint64_t>(
                                          alphabet)));
    return w;
}

TEST(Strsim, JaccardKnownValues) {
    EXPECT_DOUBLE_EQ(similarity(MetricKind::jaccard, "black", "blk"), 0.6);
    EXPECT_DOUBLE_EQ(similarity(MetricKind::jaccard, "abc", "abc"), 1.0);
    EXPECT_DOUBLE_EQ(similarity(MetricKind::jaccard, "ab", "cd"), 0.0);
    // Repeated characters collapse to a set.
    EXPECT_DOUBLE_EQ(similarity(MetricKind::jaccard, "aabb", "ab"), 1.0);
}

TEST(Strsim, LevenshteinKnownValues) {
    EXPECT_NEAR(similarity(MetricKind::levenshtein, "screen", "sceen"),
                5.0 / 6.0, 1e-15);
    EXPECT_DOUBLE_EQ(similarity(MetricKind::levenshtein, "abc", "abc"), 1.0);
    EXPECT_DOUBLE_EQ(similarity(MetricKind::levenshtein, "abc", "xyz"), 0.0);
}

TEST(Strsim, LcsKnownValues) {
    EXPECT_NEAR(similarity(MetricKind::lcs, "black", "blk"), 0.6, 1e-15);
    EXPECT_NEAR(similarity(MetricKind::lcs, "abcd", "acbd"), 0.75, 1e-15);
}

TEST(Strsim, JaroWinklerKnownValues) {
    // "screen" vs "sceen": 5 matches, 0 transpositions, common prefix "sc".
    double jaro = (5.0 / 6.0 + 5.0 / 5.0 + 5.0 / 5.0) / 3.0;
    double expected = jaro + 2 * 0.1 * (1.0 - jaro);
    EXPECT_NEAR(similarity(MetricKind::jaro_winkler, "screen", "sceen"),
                expected, 1e-12);
    EXPECT_NEAR(expected, 0.9556, 5e-5);

    // Classic pair: 6 matches, 1 transposition, common prefix "mar".
    double jaro_m = (1.0 + 1.0 + 5.0 / 6.0) / 3.0;
    double expected_m = jaro_m + 3 * 0.1 * (1.0 - jaro_m);
    EXPECT_NEAR(similarity(MetricKind::jaro_winkler, "martha", "marhta"),
                expected_m, 1e-12);

    // No matching characters at all.
    EXPECT_DOUBLE_EQ(similarity(MetricKind::jaro_winkler, "ab", "cd"), 0.0);
}

TEST(Strsim, SmithWatermanKnownValues) {
    // Best local alignment of "black"/"blk" is "bl" (score 2), min length 3.
    EXPECT_NEAR(similarity(MetricKind::smith_waterman, "black", "blk"),
                2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(similarity(MetricKind::smith_waterman, "abc", "abc"), 1.0);
    // Single-character matches only.
    EXPECT_NEAR(similarity(MetricKind::smith_waterman, "axc", "ayc"),
                1.0 / 3.0, 1e-15);
    EXPECT_NEAR(similarity(MetricKind::smith_waterman, "ab", "ba"), 0.5, 1e-15);
}

TEST(Strsim, EmptyStringConventions) {
    for (MetricKind k : lea::strsim::kAllMetrics) {
        EXPECT_DOUBLE_EQ(similarity(k, "", ""), 1.0) << to_string(k);
        EXPECT_DOUBLE_EQ(similarity(k, "abc", ""), 0.0) << to_string(k);
        EXPECT_DOUBLE_EQ(similarity(k, "", "abc"), 0.0) << to_string(k);
    }
}

TEST(Strsim, CaseInsensitive) {
    for (MetricKind k : lea::strsim::kAllMetrics) {
        EXPECT_DOUBLE_EQ(similarity(k, "Black", "bLACK"), 1.0) << to_string(k);
        EXPECT_DOUBLE_EQ(similarity(k, "SCREEN", "screen"), 1.0) << to_string(k);
    }
}

TEST(Strsim, LevenshteinMatchesRecursiveReferenceExhaustiveSmall) {
    // Every pair of words of length <= 4 over {a,b,c}.
    std::vector<std::string> words{""};
    for (std::size_t len = 1; len <= 4; ++len) {
        std::vector<std::string> next;
        for (const std::string& w : words)
            if (w.size() == len - 1)
                for (char c : {'a', 'b', 'c'}) next.push_back(w + c);
        words.insert(words.end(), next.begin(), next.end());
    }
    for (const std::string& a : words) {
        for (const std::string& b : words) {
            double maxlen = static_cast<double>(std::max(a.size(), b.size()));
            double expect =
                a.empty() && b.empty()
                    ? 1.0
                    : 1.0 - static_cast<double>(lev_reference(a, b)) / maxlen;
            ASSERT_NEAR(similarity(MetricKind::levenshtein, a, b), expect,
                        1e-15)
                << a << " vs " << b;
        }
    }
}

TEST(Strsim, LevenshteinMatchesRecursiveReferenceRandom) {
    lea::SplitMix64 rng(101);
    for (int t = 0; t < 4000; ++t) {
        std::string a = random_word(rng, 10, 5);
        std::string b = random_word(rng, 10, 5);
        if (a.empty() && b.empty()) continue;
        double maxlen = static_cast<double>(std::max(a.size(), b.size()));
        double expect = 1.0 - static_cast<double>(lev_reference(a, b)) / maxlen;
        ASSERT_NEAR(similarity(MetricKind::levenshtein, a, b), expect, 1e-15)
            << a << " vs " << b;
    }
}

TEST(Strsim, LcsMatchesRecursiveReferenceRandom) {
    lea::SplitMix64 rng(202);
    for (int t = 0; t < 4000; ++t) {
        std::string a = random_word(rng, 10, 4);
        std::string b = random_word(rng, 10, 4);
        if (a.empty() || b.empty()) continue;
        double maxlen = static_cast<double>(std::max(a.size(), b.size()));
        double expect = static_cast<double>(lcs_reference(a, b)) / maxlen;
        ASSERT_NEAR(similarity(MetricKind::lcs, a, b), expect, 1e-15)
            << a << " vs " << b;
    }
}

TEST(Strsim, LcsMatchesExhaustiveEnumeration) {
    lea::SplitMix64 rng(303);
    for (int t = 0; t < 300; ++t) {
        std::string a = random_word(rng, 8, 3);
        std::string b = random_word(rng, 8, 3);
        if (a.empty() || b.empty()) continue;
        double maxlen = static_cast<double>(std::max(a.size(), b.size()));
        double expect = static_cast<double>(lcs_exhaustive(a, b)) / maxlen;
        ASSERT_NEAR(similarity(MetricKind::lcs, a, b), expect, 1e-15)
            << a << " vs " << b;
    }
}

TEST(Strsim, PropertiesOnRandomPairs) {
    lea::SplitMix64 rng(404);
    for (int t = 0; t < 10000; ++t) {
        std::string a = random_word(rng, 8, 4);
        std::string b = random_word(rng, 8, 4);
        for (MetricKind k : lea::strsim::kAllMetrics) {
            double sab = similarity(k, a, b);
            double sba = similarity(k, b, a);
            ASSERT_DOUBLE_EQ(sab, sba)
                << to_string(k) << " '" << a << "' '" << b << "'";
            ASSERT_GE(sab, 0.0) << to_string(k);
            ASSERT_LE(sab, 1.0) << to_string(k);
            ASSERT_DOUBLE_EQ(similarity(k, a, a), 1.0) << to_string(k);
        }
    }
}

TEST(Strsim, MetricNamesRoundTrip) {
    ASSERT_EQ(std::size(lea::strsim::kAllMetrics), 5u);
    for (MetricKind k : lea::strsim::kAllMetrics)
        EXPECT_EQ(lea::strsim::metric_from_string(to_string(k)), k);
    EXPECT_THROW(lea::strsim::metric_from_string("cosine"), lea::ConfigError);
}

}  // namespace
