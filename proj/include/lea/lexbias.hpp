// Lexical attention bias: the inter-sentence word-similarity matrix, its
// sinusoidal (or learned-bucket) embedding, the per-sharing-unit projection
// down to a scalar bias, and the one-shot alpha calibration that matches the
// bias magnitude to the attention logits.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lea/errors.hpp"
#include "lea/strsim.hpp"
#include "lea/tensor.hpp"
#include "lea/tokenizer.hpp"

namespace lea::lexbias {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kAlphaEps = 1e-8;
inline constexpr double kAlphaMax = 1e4;

// ---------------------------------------------------------------------------
// Enums

enum class EmbedMode { fixed_scaled, fixed, learned };

inline const char* to_string(EmbedMode m) {
    switch (m) {
        case EmbedMode::fixed_scaled: return "fixed_scaled";
        case EmbedMode::fixed: return "fixed";
        case EmbedMode::learned: return "learned";
    }
    return "?";
}

inline EmbedMode embed_mode_from_string(const std::string& s) {
    if (s == "fixed_scaled") return EmbedMode::fixed_scaled;
    if (s == "fixed") return EmbedMode::fixed;
    if (s == "learned") return EmbedMode::learned;
    throw ConfigError("unknown embedding mode: '" + s +
                      "' (expected fixed_scaled, fixed, or learned)");
}

enum class Sharing { model, layer, head };

inline const char* to_string(Sharing s) {
    switch (s) {
        case Sharing::model: return "model";
        case Sharing::layer: return "layer";
        case Sharing::head: return "head";
    }
    return "?";
}

inline Sharing sharing_from_string(const std::string& s) {
    if (s == "model") return Sharing::model;
    if (s == "layer") return Sharing::layer;
    if (s == "head") return Sharing::head;
    throw ConfigError("unknown sharing mode: '" + s +
                      "' (expected model, layer, or head)");
}

// ---------------------------------------------------------------------------
// Similarity embedding configuration

struct LexEmbedding {
    std::size_t d_l = 128;  // embedding dimension, must be even
    double beta = 1e4;      // frequency base of the sinusoid ladder
    EmbedMode mode = EmbedMode::fixed_scaled;
    std::size_t bucket_count = 32;  // learned mode only

    void validate() const {
        if (d_l == 0 || d_l % 2 != 0)
            throw ConfigError("lex embedding: d_l must be a positive even "
                              "integer, got " +
                              std::to_string(d_l));
        if (!(beta > 0.0))
            throw ConfigError("lex embedding: beta must be positive");
        if (mode == EmbedMode::learned && bucket_count < 2)
            throw ConfigError(
                "lex embedding: learned mode needs bucket_count >= 2, got " +
                std::to_string(bucket_count));
    }
};

// Interleaved sin/cos ladder: pair k carries angle c*s / beta^(2k/d_l),
// where c = 2*pi in fixed_scaled mode (so s in [0,1] sweeps a full period
// of the fastest component) and c = 1 in fixed mode.
inline std::vector<double> sinusoidal_embed(double s, const LexEmbedding& cfg) {
    cfg.validate();
    if (cfg.mode == EmbedMode::learned)
        throw ContractViolation(
            "sinusoidal_embed: learned mode uses the bucket table");
    if (!(s >= 0.0 && s <= 1.0))
        throw ContractViolation("sinusoidal_embed: similarity out of [0,1]: " +
                                std::to_string(s));
    const double c = cfg.mode == EmbedMode::fixed_scaled ? kTwoPi : 1.0;
    std::vector<double> out(cfg.d_l);
    const double dl = static_cast<double>(cfg.d_l);
    for (std::size_t k = 0; k < cfg.d_l / 2; ++k) {
        const double denom =
            std::pow(cfg.beta, 2.0 * static_cast<double>(k) / dl);
        const double angle = c * s / denom;
        out[2 * k] = std::sin(angle);
        out[2 * k + 1] = std::cos(angle);
    }
    return out;
}

// Bucket index for the learned embedding: floor(s * count), clamped so that
// s = 1 lands in the last bucket.
inline std::size_t bucket_index(double s, std::size_t bucket_count) {
    if (!(s >= 0.0 && s <= 1.0))
        throw ContractViolation("bucket_index: similarity out of [0,1]: " +
                                std::to_string(s));
    const std::size_t b =
        static_cast<std::size_t>(s * static_cast<double>(bucket_count));
    return std::min(b, bucket_count - 1);
}

// Non-differentiable view of the learned embedding: the selected table row.
// (Training flows gradients through a tape-level row lookup instead.)
inline std::vector<double> learned_embed(double s, const LexEmbedding& cfg,
                                         const numeric::Tensor& table) {
    cfg.validate();
    if (cfg.mode != EmbedMode::learned)
        throw ContractViolation("learned_embed: mode is not learned");
    if (table.rows != cfg.bucket_count || table.cols != cfg.d_l)
        throw ContractViolation("learned_embed: table shape " +
                                table.shape_str() + " does not match " +
                                std::to_string(cfg.bucket_count) + "x" +
                                std::to_string(cfg.d_l));
    const std::size_t b = bucket_index(s, cfg.bucket_count);
    std::vector<double> out(cfg.d_l);
    for (std::size_t j = 0; j < cfg.d_l; ++j) out[j] = table.at(b, j);
    return out;
}

// Mode-dispatched embedding (convenience for the plain, non-tape path).
inline std::vector<double> embed_similarity(double s, const LexEmbedding& cfg,
                                            const numeric::Tensor* table) {
    if (cfg.mode == EmbedMode::learned) {
        if (table == nullptr)
            throw ContractViolation(
                "embed_similarity: learned mode requires a bucket table");
        return learned_embed(s, cfg, *table);
    }
    return sinusoidal_embed(s, cfg);
}

// ---------------------------------------------------------------------------
// Inter-sentence similarity matrix

struct LexSimMatrix {
    std::size_t n = 0;
    std::vector<double> values;  // row-major n*n

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

// values[i][j] = Sim(word(i), word(j)) when i and j sit on opposite
// sentences and both are word tokens; 0 for same-side, special, and pad
// entries. Each distinct (left word, right word) pair is scored once and
// broadcast to all of its tokens.
inline LexSimMatrix pairwise_similarity(const tokenizer::TokenizedPair& tp,
                                        strsim::MetricKind kind) {
    const std::size_t n = tp.ids.size();
    LexSimMatrix m;
    m.n = n;
    m.values.assign(n * n, 0.0);

    const std::size_t n_left = tp.words_left.size();
    const std::size_t n_right = tp.words_right.size();
    // Memo over distinct (left word, right word) index pairs.
    std::vector<double> memo(n_left * n_right,
                             -1.0);  // -1 marks "not yet scored"

    for (std::size_t i = 0; i < n; ++i) {
        if (tp.side[i] != tokenizer::TokenSide::left ||
            tp.word_index[i] == tokenizer::kNoWord)
            continue;
        const std::size_t wl = tp.word_index[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (tp.side[j] != tokenizer::TokenSide::right ||
                tp.word_index[j] == tokenizer::kNoWord)
                continue;
            const std::size_t wr = tp.word_index[j];
            double& slot = memo[wl * n_right + wr];
            if (slot < 0.0)
                slot = strsim::similarity(kind, tp.words_left[wl],
                                          tp.words_right[wr]);
            m.at(i, j) = slot;
            m.at(j, i) = slot;
        }
    }
    return m;
}

// Decomposition of a similarity matrix into its distinct values plus a
// per-cell index: similarities repeat heavily (one value per word pair,
// broadcast over token blocks), so downstream embedding work is done once
// per distinct value. `distinct` is sorted ascending for determinism.
struct SimIndex {
    std::size_t n = 0;
    std::vector<double> distinct;       // D distinct similarity values
    std::vector<int> cell_to_distinct;  // n*n indices into `distinct`
};

inline SimIndex index_similarities(const LexSimMatrix& m) {
    SimIndex idx;
    idx.n = m.n;
    std::map<double, int> order;
    for (double v : m.values) order.emplace(v, 0);
    int next = 0;
    for (auto& [value, slot] : order) {
        slot = next++;
        idx.distinct.push_back(value);
    }
    idx.cell_to_distinct.reserve(m.values.size());
    for (double v : m.values) idx.cell_to_distinct.push_back(order[v]);
    return idx;
}

// ---------------------------------------------------------------------------
// Projection: one d_l -> 1 matrix per sharing unit

struct LexProjection {
    Sharing sharing = Sharing::head;
    std::vector<std::size_t> lea_layers;  // absolute layer indices, sorted
    std::size_t n_heads = 1;
    std::vector<numeric::Tensor> w;  // each d_l x 1, count per sharing rule

    static std::size_t matrix_count(Sharing s, std::size_t n_lea_layers,
                                    std::size_t n_heads) {
        switch (s) {
            case Sharing::model: return n_lea_layers == 0 ? 0 : 1;
            case Sharing::layer: return n_lea_layers;
            case Sharing::head: return n_lea_layers * n_heads;
        }
        return 0;
    }

    // Position of `layer` within the enabled list; rejects disabled layers.
    std::size_t layer_pos(std::size_t layer) const {
        for (std::size_t p = 0; p < lea_layers.size(); ++p)
            if (lea_layers[p] == layer) return p;
        throw ConfigError("layer " + std::to_string(layer) +
                          " is not LEA-enabled");
    }

    std::size_t matrix_index(std::size_t layer, std::size_t head) const {
        if (head >= n_heads)
            throw ContractViolation("projection: head " + std::to_string(head) +
                                    " out of range (n_heads=" +
                                    std::to_string(n_heads) + ")");
        const std::size_t pos = layer_pos(layer);
        switch (sharing) {
            case Sharing::model: return 0;
            case Sharing::layer: return pos;
            case Sharing::head: return pos * n_heads + head;
        }
        return 0;
    }
};

inline LexProjection make_projection(Sharing sharing,
                                     std::vector<std::size_t> lea_layers,
                                     std::size_t n_heads, std::size_t d_l) {
    if (n_heads == 0) throw ConfigError("projection: n_heads must be >= 1");
    std::sort(lea_layers.begin(), lea_layers.end());
    LexProjection proj;
    proj.sharing = sharing;
    proj.lea_layers = std::move(lea_layers);
    proj.n_heads = n_heads;
    const std::size_t count =
        LexProjection::matrix_count(sharing, proj.lea_layers.size(), n_heads);
    proj.w.assign(count, numeric::Tensor(d_l, 1));
    return proj;
}

// Plain (non-tape) bias matrix for one (layer, head): embed(sim[i][j]) . W.
// Each distinct similarity is embedded and projected once. `bucket_table`
// is required in learned mode and ignored otherwise.
inline numeric::Tensor project_bias(const LexSimMatrix& sim,
                                    const LexEmbedding& cfg,
                                    const LexProjection& proj,
                                    std::size_t layer, std::size_t head,
                                    const numeric::Tensor* bucket_table =
                                        nullptr) {
    cfg.validate();
    const numeric::Tensor& W = proj.w[proj.matrix_index(layer, head)];
    if (W.rows != cfg.d_l || W.cols != 1)
        throw ContractViolation("projection: weight shape " + W.shape_str() +
                                " does not match d_l=" +
                                std::to_string(cfg.d_l));
    const SimIndex idx = index_similarities(sim);
    std::vector<double> projected(idx.distinct.size());
    for (std::size_t r = 0; r < idx.distinct.size(); ++r) {
        const std::vector<double> e =
            embed_similarity(idx.distinct[r], cfg, bucket_table);
        double dot = 0.0;
        for (std::size_t j = 0; j < cfg.d_l; ++j) dot += e[j] * W.at(j, 0);
        projected[r] = dot;
    }
    numeric::Tensor out(sim.n, sim.n);
    for (std::size_t c = 0; c < out.v.size(); ++c)
        out.v[c] = projected[static_cast<std::size_t>(idx.cell_to_distinct[c])];
    return out;
}

// ---------------------------------------------------------------------------
// Alpha calibration

// alpha = mean|e| / (mean|bias| + eps), clamped to [0, 1e4].
inline double alpha_from_magnitudes(double mean_abs_e, double mean_abs_bias) {
    if (mean_abs_e < 0.0 || mean_abs_bias < 0.0)
        throw ContractViolation("alpha: mean magnitudes must be nonnegative");
    const double a = mean_abs_e / (mean_abs_bias + kAlphaEps);
    return std::clamp(a, 0.0, kAlphaMax);
}

// One alpha per LEA layer, computed exactly once from the first batch and
// immutable afterwards.
struct AlphaScale {
    std::vector<double> alpha;
    bool frozen = false;

    AlphaScale() = default;
    explicit AlphaScale(std::size_t n_lea_layers)
        : alpha(n_lea_layers, 1.0), set_(n_lea_layers, false) {}

    static AlphaScale restore(std::vector<double> values) {
        AlphaScale a;
        a.alpha = std::move(values);
        a.set_.assign(a.alpha.size(), true);
        a.frozen = true;
        return a;
    }

    std::size_t size() const { return alpha.size(); }

    double value(std::size_t layer_pos) const {
        if (layer_pos >= alpha.size())
            throw ContractViolation("alpha: layer position " +
                                    std::to_string(layer_pos) +
                                    " out of range");
        return alpha[layer_pos];
    }

    void calibrate(std::size_t layer_pos, double mean_abs_e,
                   double mean_abs_bias) {
        if (frozen)
            throw ContractViolation(
                "alpha: calibration requested after freeze");
        if (layer_pos >= alpha.size())
            throw ContractViolation("alpha: layer position " +
                                    std::to_string(layer_pos) +
                                    " out of range");
        if (set_[layer_pos])
            throw ContractViolation("alpha: layer " +
                                    std::to_string(layer_pos) +
                                    " calibrated twice");
        alpha[layer_pos] = alpha_from_magnitudes(mean_abs_e, mean_abs_bias);
        set_[layer_pos] = true;
    }

    bool calibrated(std::size_t layer_pos) const {
        return layer_pos < set_.size() && set_[layer_pos] != 0;
    }

    bool all_calibrated() const {
        for (char c : set_)
            if (!c) return false;
        return true;
    }

    void freeze() { frozen = true; }

  private:
    std::vector<char> set_;
};

}  // namespace lea::lexbias
