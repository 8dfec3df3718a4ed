#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lea/errors.hpp"
#include "lea/text.hpp"

namespace lea::strsim {

// Normalized word-to-word similarity in [0,1]. All metrics lowercase
// their inputs and compare Unicode scalar values. Conventions shared by
// every metric: Sim(w,w) = 1, empty-vs-empty = 1, empty-vs-nonempty = 0.

enum class MetricKind { jaccard, levenshtein, lcs, jaro_winkler, smith_waterman };

inline const char* to_string(MetricKind k) {
    switch (k) {
        case MetricKind::jaccard: return "jaccard";
        case MetricKind::levenshtein: return "levenshtein";
        case MetricKind::lcs: return "lcs";
        case MetricKind::jaro_winkler: return "jaro_winkler";
        case MetricKind::smith_waterman: return "smith_waterman";
    }
    return "?";
}

inline MetricKind metric_from_string(std::string_view name) {
    if (name == "jaccard") return MetricKind::jaccard;
    if (name == "levenshtein") return MetricKind::levenshtein;
    if (name == "lcs") return MetricKind::lcs;
    if (name == "jaro_winkler") return MetricKind::jaro_winkler;
    if (name == "smith_waterman") return MetricKind::smith_waterman;
    throw ConfigError("unknown similarity metric: " + std::string(name));
}

inline constexpr MetricKind kAllMetrics[] = {
    MetricKind::jaccard, MetricKind::levenshtein, MetricKind::lcs,
    MetricKind::jaro_winkler, MetricKind::smith_waterman};

namespace detail {

// Jaccard coefficient over unique characters (order agnostic).
inline double jaccard(const std::u32string& a, const std::u32string& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    std::vector<char32_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
    std::sort(sb.begin(), sb.end());
    sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
    std::size_t inter = 0, i = 0, j = 0;
    while (i < sa.size() && j < sb.size()) {
        if (sa[i] == sb[j]) { ++inter; ++i; ++j; }
        else if (sa[i] < sb[j]) ++i;
        else ++j;
    }
    std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::size_t levenshtein_distance(const std::u32string& a,
                                        const std::u32string& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0) return lb;
    if (lb == 0) return la;
    std::vector<std::size_t> prev(lb + 1), cur(lb + 1);
    for (std::size_t j = 0; j <= lb; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= la; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= lb; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[lb];
}

inline std::size_t lcs_length(const std::u32string& a, const std::u32string& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 || lb == 0) return 0;
    std::vector<std::size_t> prev(lb + 1, 0), cur(lb + 1, 0);
    for (std::size_t i = 1; i <= la; ++i) {
        for (std::size_t j = 1; j <= lb; ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[lb];
}

inline double jaro(const std::u32string& a, const std::u32string& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 && lb == 0) return 1.0;
    if (la == 0 || lb == 0) return 0.0;
    const std::size_t maxlen = std::max(la, lb);
    const std::size_t window = maxlen / 2 > 0 ? maxlen / 2 - 1 : 0;
    std::vector<bool> ma(la, false), mb(lb, false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < la; ++i) {
        std::size_t lo = i > window ? i - window : 0;
        std::size_t hi = std::min(lb, i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!mb[j] && a[i] == b[j]) {
                ma[i] = mb[j] = true;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;
    std::size_t transpositions = 0, k = 0;
    for (std::size_t i = 0; i < la; ++i) {
        if (!ma[i]) continue;
        while (!mb[k]) ++k;
        if (a[i] != b[k]) ++transpositions;
        ++k;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(transpositions / 2);
    return (m / la + m / lb + (m - t) / m) / 3.0;
}

// Winkler boost: scaling 0.1, common prefix capped at 4.
inline double jaro_winkler(const std::u32string& a, const std::u32string& b) {
    const double j = jaro(a, b);
    std::size_t prefix = 0;
    const std::size_t cap = std::min<std::size_t>({4, a.size(), b.size()});
    while (prefix < cap && a[prefix] == b[prefix]) ++prefix;
    return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

// Local alignment with match +1, mismatch -1, gap -1, normalized by the
// shorter length and clamped to [0,1].
inline double smith_waterman(const std::u32string& a, const std::u32string& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 && lb == 0) return 1.0;
    if (la == 0 || lb == 0) return 0.0;
    std::vector<double> prev(lb + 1, 0.0), cur(lb + 1, 0.0);
    double best = 0.0;
    for (std::size_t i = 1; i <= la; ++i) {
        cur[0] = 0.0;
        for (std::size_t j = 1; j <= lb; ++j) {
            double diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 1.0 : -1.0);
            double up = prev[j] - 1.0;
            double left = cur[j - 1] - 1.0;
            cur[j] = std::max({0.0, diag, up, left});
            best = std::max(best, cur[j]);
        }
        std::swap(prev, cur);
    }
    double sim = best / static_cast<double>(std::min(la, lb));
    return std::clamp(sim, 0.0, 1.0);
}

} // namespace detail

inline double jaccard_chars(std::string_view a, std::string_view b) {
    return detail::jaccard(codepoints_lower(a), codepoints_lower(b));
}

inline double levenshtein_sim(std::string_view a, std::string_view b) {
    auto ca = codepoints_lower(a), cb = codepoints_lower(b);
    if (ca.empty() && cb.empty()) return 1.0;
    std::size_t d = detail::levenshtein_distance(ca, cb);
    return 1.0 - static_cast<double>(d) /
                     static_cast<double>(std::max(ca.size(), cb.size()));
}

inline double lcs_sim(std::string_view a, std::string_view b) {
    auto ca = codepoints_lower(a), cb = codepoints_lower(b);
    if (ca.empty() && cb.empty()) return 1.0;
    if (ca.empty() || cb.empty()) return 0.0;
    return static_cast<double>(detail::lcs_length(ca, cb)) /
           static_cast<double>(std::max(ca.size(), cb.size()));
}

inline double jaro_winkler(std::string_view a, std::string_view b) {
    return detail::jaro_winkler(codepoints_lower(a), codepoints_lower(b));
}

inline double smith_waterman_sim(std::string_view a, std::string_view b) {
    return detail::smith_waterman(codepoints_lower(a), codepoints_lower(b));
}

inline double similarity(MetricKind kind, std::string_view a, std::string_view b) {
    switch (kind) {
        case MetricKind::jaccard: return jaccard_chars(a, b);
        case MetricKind::levenshtein: return levenshtein_sim(a, b);
        case MetricKind::lcs: return lcs_sim(a, b);
        case MetricKind::jaro_winkler: return jaro_winkler(a, b);
        case MetricKind::smith_waterman: return smith_waterman_sim(a, b);
    }
    return 0.0;
}

} // namespace lea::strsim
