#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lea/errors.hpp"
#include "lea/rng.hpp"
#include "lea/text.hpp"

namespace lea::data {

struct PairRecord {
    std::string id;
    std::string left;
    std::string right;
    int label = 0; // 1 = match
};

enum class Split { train, val, test };

struct PairDataset {
    std::vector<PairRecord> records;
    Split split = Split::train;

    std::size_t size() const { return records.size(); }
};

// TSV contract: header "id\tleft\tright\tlabel", tab-separated, UTF-8,
// label in {0,1}, LF or CRLF line endings, no embedded tabs in fields.

inline std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline PairDataset parse_tsv(std::istream& in, std::string_view name = "<stream>") {
    PairDataset ds;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen_ids;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != "id\tleft\tright\tlabel")
                throw ParseError(std::string(name) + ":1: expected header "
                                 "'id\\tleft\\tright\\tlabel'");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 4)
            throw ParseError(std::string(name) + ":" + std::to_string(lineno) +
                             ": expected 4 tab-separated fields, got " +
                             std::to_string(fields.size()));
        if (fields[3] != "0" && fields[3] != "1")
            throw ParseError(std::string(name) + ":" + std::to_string(lineno) +
                             ": label must be 0 or 1, got '" + fields[3] + "'");
        if (!seen_ids.insert(fields[0]).second)
            throw ParseError(std::string(name) + ":" + std::to_string(lineno) +
                             ": duplicate id '" + fields[0] + "'");
        ds.records.push_back({fields[0], fields[1], fields[2],
                              fields[3] == "1" ? 1 : 0});
    }
    if (!saw_header)
        throw ParseError(std::string(name) + ": empty file, header missing");
    return ds;
}

inline PairDataset load_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return parse_tsv(in, path);
}

inline void write_tsv(std::ostream& out, const PairDataset& ds) {
    out << "id\tleft\tright\tlabel\n";
    for (const auto& r : ds.records)
        out << r.id << '\t' << r.left << '\t' << r.right << '\t' << r.label
            << '\n';
}

inline void save_tsv(const std::string& path, const PairDataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    write_tsv(out, ds);
}

// Synthetic product-title pair corpus. Each title is 4..8 words drawn
// from a generated brand/model/attribute vocabulary. A pair is positive
// iff both titles carry the same model code; negatives swap in a
// different code while sharing the brand and `distractor_count`
// attribute words, so surface overlap alone does not decide the label.
struct SynthSpec {
    std::size_t vocab_size = 300;   // total synthetic word vocabulary
    std::size_t n_pairs = 10000;    // training pairs; val/test scale from it
    double positive_rate = 0.5;
    std::size_t distractor_count = 2;
    std::uint64_t seed = 1;
};

namespace detail {

// Pronounceable lowercase word, length in [min_len,max_len].
inline std::string synth_word(SplitMix64& rng, std::size_t min_len,
                              std::size_t max_len) {
    static constexpr char kCons[] = "bcdfghjklmnpqrstvwxz";
    static constexpr char kVow[] = "aeiou";
    std::size_t len = min_len + rng.next_below(max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) {
        if (i % 2 == 0) w.push_back(kCons[rng.next_below(sizeof(kCons) - 1)]);
        else w.push_back(kVow[rng.next_below(sizeof(kVow) - 1)]);
    }
    return w;
}

// Alphanumeric model code, e.g. "kx750d".
inline std::string synth_code(SplitMix64& rng) {
    static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyz";
    static constexpr char kDigit[] = "0123456789";
    std::size_t len = 5 + rng.next_below(3); // 5..7
    std::string w;
    for (std::size_t i = 0; i < len; ++i) {
        if (rng.next_unit() < 0.55)
            w.push_back(kAlpha[rng.next_below(26)]);
        else
            w.push_back(kDigit[rng.next_below(10)]);
    }
    return w;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

struct SynthVocab {
    std::vector<std::string> brands;
    std::vector<std::string> models;
    std::vector<std::string> attrs;
    std::vector<std::size_t> model_brand; // model index -> brand index
};

inline SynthVocab build_vocab(const SynthSpec& spec) {
    SynthVocab v;
    SplitMix64 rng = substream(spec.seed, {0x5eed});
    std::size_t n_brands = std::max<std::size_t>(8, spec.vocab_size / 12);
    std::size_t n_attrs = std::max<std::size_t>(24, spec.vocab_size / 5);
    std::size_t n_models =
        spec.vocab_size > n_brands + n_attrs ? spec.vocab_size - n_brands - n_attrs
                                             : 16;
    std::set<std::string> used;
    auto fresh = [&](auto gen) {
        for (;;) {
            std::string w = gen();
            if (used.insert(w).second) return w;
        }
    };
    for (std::size_t i = 0; i < n_brands; ++i)
        v.brands.push_back(fresh([&] { return synth_word(rng, 4, 7); }));
    // A few short attributes stay below the corruption length threshold.
    for (std::size_t i = 0; i < n_attrs; ++i)
        v.attrs.push_back(fresh([&] {
            return i % 8 == 0 ? synth_word(rng, 2, 3) : synth_word(rng, 4, 8);
        }));
    // Model codes are kept >= 3 edits apart so a single typo cannot turn
    // one code into a near-copy of another.
    while (v.models.size() < n_models) {
        std::string c = synth_code(rng);
        if (used.count(c)) continue;
        bool ok = true;
        for (const auto& m : v.models)
            if (edit_distance(c, m) < 3) { ok = false; break; }
        if (!ok) continue;
        used.insert(c);
        v.models.push_back(c);
        v.model_brand.push_back(rng.next_below(v.brands.size()));
    }
    return v;
}

inline std::string make_title(const SynthVocab& v, std::size_t model_idx,
                              const std::vector<std::string>& shared_attrs,
                              SplitMix64& rng) {
    std::vector<std::string> words;
    words.push_back(v.brands[v.model_brand[model_idx]]);
    words.push_back(v.models[model_idx]);
    std::size_t extra = 2 + rng.next_below(5); // total 4..8 words
    std::size_t take_shared = std::min(shared_attrs.size(), extra);
    for (std::size_t i = 0; i < take_shared; ++i) words.push_back(shared_attrs[i]);
    for (std::size_t i = take_shared; i < extra; ++i)
        words.push_back(v.attrs[rng.next_below(v.attrs.size())]);
    // Fisher-Yates shuffle, model token position is not informative.
    for (std::size_t i = words.size(); i > 1; --i)
        std::swap(words[i - 1], words[rng.next_below(i)]);
    return join_words(words);
}

} // namespace detail

struct SynthCorpus {
    PairDataset train, val, test;
};

inline SynthCorpus gen_synthetic(const SynthSpec& spec) {
    if (spec.positive_rate <= 0.0 || spec.positive_rate >= 1.0)
        throw ConfigError("positive_rate must be in (0,1)");
    if (spec.n_pairs == 0) throw ConfigError("n_pairs must be positive");
    detail::SynthVocab v = detail::build_vocab(spec);

    SynthCorpus out;
    out.train.split = Split::train;
    out.val.split = Split::val;
    out.test.split = Split::test;
    const std::size_t n_val = std::max<std::size_t>(64, spec.n_pairs / 8);
    const std::size_t n_test = std::max<std::size_t>(128, spec.n_pairs / 5);

    std::set<std::pair<std::string, std::string>> seen_texts;
    std::uint64_t record_counter = 0;
    auto fill = [&](PairDataset& ds, const char* prefix, std::size_t n) {
        while (ds.records.size() < n) {
            SplitMix64 rng = substream(spec.seed, {0xda7a, record_counter++});
            bool positive = rng.next_unit() < spec.positive_rate;
            std::size_t m_left = rng.next_below(v.models.size());
            std::size_t m_right = m_left;
            if (!positive) {
                // Half of the negatives keep the same brand.
                bool same_brand = rng.next_unit() < 0.5;
                for (;;) {
                    m_right = rng.next_below(v.models.size());
                    if (m_right == m_left) continue;
                    if (!same_brand ||
                        v.model_brand[m_right] == v.model_brand[m_left])
                        break;
                }
            }
            std::vector<std::string> shared;
            for (std::size_t i = 0; i < spec.distractor_count; ++i)
                shared.push_back(v.attrs[rng.next_below(v.attrs.size())]);
            PairRecord rec;
            rec.left = detail::make_title(v, m_left, shared, rng);
            rec.right = detail::make_title(v, m_right, shared, rng);
            rec.label = positive ? 1 : 0;
            if (!seen_texts.insert({rec.left, rec.right}).second) continue;
            rec.id = std::string(prefix) + "-" + std::to_string(ds.records.size());
            ds.records.push_back(std::move(rec));
        }
    };
    fill(out.train, "train", spec.n_pairs);
    fill(out.val, "val", n_val);
    fill(out.test, "test", n_test);
    return out;
}

// Deterministic per (seed, epoch); the final partial batch is kept.
inline std::vector<std::vector<std::size_t>> batch_indices(
    std::size_t n, std::size_t batch_size, std::uint64_t seed,
    std::uint64_t epoch, bool shuffle) {
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        SplitMix64 rng = substream(seed, {0xba7c4, epoch});
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

} // namespace lea::data
