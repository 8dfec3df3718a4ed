#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lea/errors.hpp"
#include "lea/text.hpp"

namespace lea::tokenizer {

// Continuation marker for non-word-initial subwords.
inline constexpr std::string_view kCont = "##";

struct Vocab {
    static constexpr int kCls = 0;
    static constexpr int kSep = 1;
    static constexpr int kPad = 2;
    static constexpr int kUnk = 3;

    std::vector<std::string> id_to_token;
    std::unordered_map<std::string, int> token_to_id;

    std::size_t size() const { return id_to_token.size(); }

    bool contains(const std::string& tok) const {
        return token_to_id.find(tok) != token_to_id.end();
    }

    // Returns -1 when the token is absent.
    int id(const std::string& tok) const {
        auto it = token_to_id.find(tok);
        return it == token_to_id.end() ? -1 : it->second;
    }

    const std::string& token(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= id_to_token.size())
            throw ContractViolation("Vocab::token: id " + std::to_string(id) +
                                    " out of range [0, " +
                                    std::to_string(id_to_token.size()) + ")");
        return id_to_token[static_cast<std::size_t>(id)];
    }

    // Appends a token, ignoring duplicates; returns its id.
    int add(const std::string& tok) {
        auto it = token_to_id.find(tok);
        if (it != token_to_id.end()) return it->second;
        int id = static_cast<int>(id_to_token.size());
        id_to_token.push_back(tok);
        token_to_id.emplace(tok, id);
        return id;
    }
};

inline const std::vector<std::string>& special_tokens() {
    static const std::vector<std::string> specials = {"[CLS]", "[SEP]", "[PAD]",
                                                      "[UNK]"};
    return specials;
}

enum class TokenSide { left, right, special };

// Sentinel word index for special/pad tokens.
inline constexpr std::size_t kNoWord = static_cast<std::size_t>(-1);

struct TokenizedPair {
    std::vector<int> ids;
    std::vector<std::size_t> word_index;  // kNoWord for specials
    std::vector<TokenSide> side;
    std::vector<std::string> words_left;
    std::vector<std::string> words_right;

    std::size_t size() const { return ids.size(); }
};

// Lowercased, whitespace-split word list.
inline std::vector<std::string> normalize_words(std::string_view sentence) {
    std::vector<std::string> out;
    for (std::string_view w : split_words(sentence))
        out.push_back(encode_utf8(codepoints_lower(w)));
    return out;
}

namespace detail {

// Splits a lowercased word into character-level tokens: first codepoint
// bare, the rest with the continuation marker.
inline std::vector<std::string> char_tokens(const std::string& word) {
    std::vector<std::string> out;
    std::u32string cps = codepoints_raw(word);
    for (std::size_t i = 0; i < cps.size(); ++i) {
        std::string tok = i == 0 ? std::string() : std::string(kCont);
        append_utf8(tok, cps[i]);
        out.push_back(std::move(tok));
    }
    return out;
}

inline std::string merge_tokens(const std::string& a, const std::string& b) {
    std::string tail = b;
    if (tail.rfind(kCont, 0) == 0) tail.erase(0, kCont.size());
    return a + tail;
}

}  // namespace detail

// Greedy frequency-based merge training (BPE-style stand-in for WordPiece).
// Deterministic: pair counts are corpus-order independent and ties pick the
// lexicographically smallest pair; merges stop once no adjacent pair occurs
// at least twice or the vocabulary reaches target_size.
inline Vocab train_vocab(const std::vector<std::string>& corpus,
                         std::size_t target_size) {
    if (corpus.empty()) throw ConfigError("train_vocab: corpus is empty");

    std::vector<std::string> word_order;
    std::unordered_map<std::string, long long> word_freq;
    for (const std::string& line : corpus) {
        for (std::string_view w : split_words(line)) {
            std::string lw = encode_utf8(codepoints_lower(w));
            auto it = word_freq.find(lw);
            if (it == word_freq.end()) {
                word_order.push_back(lw);
                word_freq.emplace(std::move(lw), 1);
            } else {
                ++it->second;
            }
        }
    }

    std::vector<std::vector<std::string>> segs(word_order.size());
    std::set<std::string> alphabet;
    for (std::size_t i = 0; i < word_order.size(); ++i) {
        segs[i] = detail::char_tokens(word_order[i]);
        // Every alphabet character enters in both bare and continuation
        // form, whatever positions it was seen in, so any word over the
        // training alphabet tokenizes without UNK.
        for (const std::string& t : segs[i]) {
            if (t.rfind(kCont, 0) == 0) {
                alphabet.insert(t);
                alphabet.insert(t.substr(kCont.size()));
            } else {
                alphabet.insert(t);
                alphabet.insert(std::string(kCont) + t);
            }
        }
    }

    Vocab v;
    for (const std::string& s : special_tokens()) v.add(s);
    for (const std::string& t : alphabet) v.add(t);
    if (target_size < v.size())
        throw ConfigError("train_vocab: target_size " +
                          std::to_string(target_size) +
                          " is below the character vocabulary size " +
                          std::to_string(v.size()));

    while (v.size() < target_size) {
        // Ordered map so the first strict maximum is the lexicographically
        // smallest pair among ties.
        std::map<std::pair<std::string, std::string>, long long> pair_count;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            long long f = word_freq[word_order[i]];
            const auto& s = segs[i];
            for (std::size_t j = 0; j + 1 < s.size(); ++j)
                pair_count[{s[j], s[j + 1]}] += f;
        }
        const std::pair<std::string, std::string>* best = nullptr;
        long long best_count = 0;
        for (const auto& [pair, count] : pair_count) {
            if (count > best_count) {
                best = &pair;
                best_count = count;
            }
        }
        if (best == nullptr || best_count < 2) break;

        std::string merged = detail::merge_tokens(best->first, best->second);
        v.add(merged);
        for (auto& s : segs) {
            std::vector<std::string> next;
            next.reserve(s.size());
            for (std::size_t j = 0; j < s.size();) {
                if (j + 1 < s.size() && s[j] == best->first &&
                    s[j + 1] == best->second) {
                    next.push_back(merged);
                    j += 2;
                } else {
                    next.push_back(s[j]);
                    ++j;
                }
            }
            s = std::move(next);
        }
    }
    return v;
}

namespace detail {

// Greedy longest-match segmentation of one lowercased word. Unknown
// codepoints become UNK tokens; every emitted token keeps the word's index.
inline void encode_word(const std::string& word, std::size_t word_idx,
                        TokenSide side, const Vocab& v, TokenizedPair& tp) {
    std::u32string cps = codepoints_raw(word);
    std::size_t i = 0;
    while (i < cps.size()) {
        int matched = -1;
        std::size_t matched_len = 0;
        for (std::size_t len = cps.size() - i; len >= 1; --len) {
            std::string cand = i == 0 ? std::string() : std::string(kCont);
            for (std::size_t k = 0; k < len; ++k) append_utf8(cand, cps[i + k]);
            int id = v.id(cand);
            if (id >= 0) {
                matched = id;
                matched_len = len;
                break;
            }
        }
        if (matched < 0) {
            matched = Vocab::kUnk;
            matched_len = 1;
        }
        tp.ids.push_back(matched);
        tp.word_index.push_back(word_idx);
        tp.side.push_back(side);
        i += matched_len;
    }
}

}  // namespace detail

// Cross-encoder input layout: [CLS] left [SEP] right [SEP]. When the
// layout exceeds max_len, trailing tokens are removed from the currently
// longer side (right on ties) until it fits, so both sentences stay
// represented.
inline TokenizedPair encode_pair(std::string_view left, std::string_view right,
                                 const Vocab& v, std::size_t max_len) {
    if (max_len < 8)
        throw ContractViolation("encode_pair: max_len must be >= 8, got " +
                                std::to_string(max_len));

    TokenizedPair lt, rt;
    lt.words_left = normalize_words(left);
    rt.words_right = normalize_words(right);
    for (std::size_t wi = 0; wi < lt.words_left.size(); ++wi)
        detail::encode_word(lt.words_left[wi], wi, TokenSide::left, v, lt);
    for (std::size_t wi = 0; wi < rt.words_right.size(); ++wi)
        detail::encode_word(rt.words_right[wi], wi, TokenSide::right, v, rt);

    while (lt.ids.size() + rt.ids.size() + 3 > max_len) {
        TokenizedPair& longer = lt.ids.size() > rt.ids.size() ? lt : rt;
        longer.ids.pop_back();
        longer.word_index.pop_back();
        longer.side.pop_back();
    }

    TokenizedPair tp;
    tp.words_left = std::move(lt.words_left);
    tp.words_right = std::move(rt.words_right);
    tp.ids.reserve(lt.ids.size() + rt.ids.size() + 3);

    auto push_special = [&tp](int id) {
        tp.ids.push_back(id);
        tp.word_index.push_back(kNoWord);
        tp.side.push_back(TokenSide::special);
    };
    auto push_side = [&tp](const TokenizedPair& src) {
        tp.ids.insert(tp.ids.end(), src.ids.begin(), src.ids.end());
        tp.word_index.insert(tp.word_index.end(), src.word_index.begin(),
                             src.word_index.end());
        tp.side.insert(tp.side.end(), src.side.begin(), src.side.end());
    };
    push_special(Vocab::kCls);
    push_side(lt);
    push_special(Vocab::kSep);
    push_side(rt);
    push_special(Vocab::kSep);
    return tp;
}

// Appends PAD tokens until the pair reaches `len`.
inline void pad_to(TokenizedPair& tp, std::size_t len) {
    if (len < tp.size())
        throw ContractViolation("pad_to: target length " + std::to_string(len) +
                                " is shorter than the pair (" +
                                std::to_string(tp.size()) + " tokens)");
    while (tp.size() < len) {
        tp.ids.push_back(Vocab::kPad);
        tp.word_index.push_back(kNoWord);
        tp.side.push_back(TokenSide::special);
    }
}

// Reconstructs the lowercased, whitespace-normalized sentences (modulo
// truncation). UNK tokens decode to the literal "[UNK]".
inline std::pair<std::string, std::string> decode(const TokenizedPair& tp,
                                                  const Vocab& v) {
    std::vector<std::string> left_words, right_words;
    std::size_t prev_word = kNoWord;
    TokenSide prev_side = TokenSide::special;
    for (std::size_t i = 0; i < tp.ids.size(); ++i) {
        const std::string& tok = v.token(tp.ids[i]);
        if (tp.side[i] == TokenSide::special) {
            prev_word = kNoWord;
            prev_side = TokenSide::special;
            continue;
        }
        std::string piece = tok;
        if (piece.rfind(kCont, 0) == 0) piece.erase(0, kCont.size());
        auto& words =
            tp.side[i] == TokenSide::left ? left_words : right_words;
        bool new_word =
            tp.side[i] != prev_side || tp.word_index[i] != prev_word;
        if (new_word)
            words.push_back(std::move(piece));
        else
            words.back() += piece;
        prev_word = tp.word_index[i];
        prev_side = tp.side[i];
    }
    return {join_words(left_words), join_words(right_words)};
}

// One subword per line, line number = id, specials first in fixed order.
inline void save_vocab(std::ostream& os, const Vocab& v) {
    for (const std::string& tok : v.id_to_token) os << tok << '\n';
}

inline Vocab load_vocab(std::istream& is, const std::string& name) {
    Vocab v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty())
            throw ParseError(name + ":" + std::to_string(line_no) +
                             ": empty vocabulary entry");
        if (v.contains(line))
            throw ParseError(name + ":" + std::to_string(line_no) +
                             ": duplicate token '" + line + "'");
        v.add(line);
    }
    const auto& specials = special_tokens();
    if (v.size() < specials.size())
        throw ParseError(name + ": vocabulary has fewer than " +
                         std::to_string(specials.size()) + " entries");
    for (std::size_t i = 0; i < specials.size(); ++i)
        if (v.id_to_token[i] != specials[i])
            throw ParseError(name + ": line " + std::to_string(i + 1) +
                             " must be '" + specials[i] + "', found '" +
                             v.id_to_token[i] + "'");
    return v;
}

}  // namespace lea::tokenizer
