// The miniature cross-encoder: token + learned absolute position embeddings,
// post-norm transformer blocks whose attention logits optionally carry the
// alpha-scaled lexical bias, mean pooling over non-pad positions, and a
// two-class head. All forward passes run on the reverse-mode tape so the
// same code path serves training, evaluation, and gradient checking.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lea/autograd.hpp"
#include "lea/errors.hpp"
#include "lea/lexbias.hpp"
#include "lea/rng.hpp"
#include "lea/strsim.hpp"
#include "lea/tensor.hpp"
#include "lea/tokenizer.hpp"

namespace lea::model {

using numeric::Param;
using numeric::Tape;
using numeric::Tensor;

inline constexpr double kMaskValue = -1e30;
inline constexpr std::uint64_t kInitTag = 0x1417u;

// ---------------------------------------------------------------------------
// Configuration

struct ModelConfig {
    std::size_t n_layers = 4;
    std::size_t n_heads = 4;
    std::size_t d_h = 64;
    std::size_t ffn_dim = 128;
    std::size_t max_len = 64;
    std::size_t vocab_size = 0;  // filled from the tokenizer

    bool lea_enabled = true;
    std::vector<std::size_t> lea_layers = {2, 3};  // second half by default
    strsim::MetricKind metric = strsim::MetricKind::jaccard;
    lexbias::LexEmbedding embed{.d_l = 32};
    lexbias::Sharing sharing = lexbias::Sharing::head;

    double dropout_p = 0.1;
    std::size_t head_hidden = 256;
    std::size_t n_classes = 2;

    std::size_t d_i() const { return d_h / n_heads; }

    // LEA layer indices actually in effect (empty when disabled), sorted.
    std::vector<std::size_t> effective_lea_layers() const {
        if (!lea_enabled) return {};
        std::vector<std::size_t> out = lea_layers;
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    void validate() const {
        if (n_layers == 0 || n_heads == 0 || d_h == 0 || ffn_dim == 0)
            throw ConfigError("model: layer/head/dimension counts must be "
                              "positive");
        if (d_h % n_heads != 0)
            throw ConfigError("model: d_h=" + std::to_string(d_h) +
                              " is not divisible by n_heads=" +
                              std::to_string(n_heads));
        if (vocab_size < tokenizer::special_tokens().size())
            throw ConfigError("model: vocab_size=" +
                              std::to_string(vocab_size) + " is too small");
        if (max_len < 8)
            throw ConfigError("model: max_len must be at least 8");
        if (lea_enabled) {
            for (std::size_t l : lea_layers)
                if (l >= n_layers)
                    throw ConfigError("model: lea layer " + std::to_string(l) +
                                      " out of range [0, " +
                                      std::to_string(n_layers) + ")");
        }
        if (!(dropout_p >= 0.0 && dropout_p < 1.0))
            throw ConfigError("model: dropout_p must be in [0,1)");
        if (head_hidden == 0 || n_classes < 2)
            throw ConfigError("model: head dimensions invalid");
        embed.validate();
    }
};

// ---------------------------------------------------------------------------
// Parameter counting (the analytic formula `describe` reports)

struct ParamCounts {
    std::size_t embedding = 0;
    std::size_t attention = 0;
    std::size_t ffn = 0;
    std::size_t layer_norm = 0;
    std::size_t head = 0;
    std::size_t lex_projection = 0;
    std::size_t lex_table = 0;
    std::size_t total = 0;
};

inline ParamCounts count_params(const ModelConfig& cfg) {
    cfg.validate();
    ParamCounts c;
    c.embedding = cfg.vocab_size * cfg.d_h + cfg.max_len * cfg.d_h;
    // per layer: Q/K/V (d_h x d_i per head, no bias) + output projection
    c.attention =
        cfg.n_layers * (3 * cfg.d_h * cfg.d_h + cfg.d_h * cfg.d_h + cfg.d_h);
    c.ffn = cfg.n_layers * (cfg.d_h * cfg.ffn_dim + cfg.ffn_dim +
                            cfg.ffn_dim * cfg.d_h + cfg.d_h);
    c.layer_norm = cfg.n_layers * 4 * cfg.d_h;
    c.head = cfg.d_h * cfg.head_hidden + cfg.head_hidden +
             2 * cfg.head_hidden + cfg.head_hidden * cfg.n_classes +
             cfg.n_classes;
    const std::size_t n_lea = cfg.effective_lea_layers().size();
    c.lex_projection = lexbias::LexProjection::matrix_count(
                           cfg.sharing, n_lea, cfg.n_heads) *
                       cfg.embed.d_l;
    if (n_lea > 0 && cfg.embed.mode == lexbias::EmbedMode::learned)
        c.lex_table = cfg.embed.bucket_count * cfg.embed.d_l;
    c.total = c.embedding + c.attention + c.ffn + c.layer_norm + c.head +
              c.lex_projection + c.lex_table;
    return c;
}

// ---------------------------------------------------------------------------
// Model state

struct Model {
    ModelConfig cfg;
    std::vector<Param> params;
    lexbias::AlphaScale alpha;

    Param& param(const std::string& name) {
        auto it = by_name_.find(name);
        if (it == by_name_.end())
            throw ContractViolation("model: no parameter named '" + name +
                                    "'");
        return params[it->second];
    }
    const Param& param(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end())
            throw ContractViolation("model: no parameter named '" + name +
                                    "'");
        return params[it->second];
    }
    bool has_param(const std::string& name) const {
        return by_name_.count(name) != 0;
    }

    void index_params() {
        by_name_.clear();
        for (std::size_t i = 0; i < params.size(); ++i)
            by_name_[params[i].name] = i;
    }

    std::size_t n_params() const {
        std::size_t n = 0;
        for (const Param& p : params) n += p.value.numel();
        return n;
    }

    // Position of `layer` within the enabled LEA layers.
    std::size_t lea_pos(std::size_t layer) const {
        const std::vector<std::size_t> lset = cfg.effective_lea_layers();
        for (std::size_t p = 0; p < lset.size(); ++p)
            if (lset[p] == layer) return p;
        throw ContractViolation("model: layer " + std::to_string(layer) +
                                " is not LEA-enabled");
    }

    std::size_t lex_matrix_index(std::size_t layer, std::size_t head) const {
        const std::size_t pos = lea_pos(layer);
        switch (cfg.sharing) {
            case lexbias::Sharing::model: return 0;
            case lexbias::Sharing::layer: return pos;
            case lexbias::Sharing::head: return pos * cfg.n_heads + head;
        }
        return 0;
    }

  private:
    std::map<std::string, std::size_t> by_name_;
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

enum class Init { zeros, ones, xavier, embed, lex_w };

inline void fill_param(Param& p, Init kind, std::uint64_t model_seed) {
    SplitMix64 rng(substream_seed(model_seed, {kInitTag, fnv1a64(p.name)}));
    auto uniform = [&](double lo, double hi) {
        for (double& x : p.value.v) x = lo + (hi - lo) * rng.next_unit();
    };
    switch (kind) {
        case Init::zeros: p.value.fill(0.0); break;
        case Init::ones: p.value.fill(1.0); break;
        case Init::xavier: {
            const double limit = std::sqrt(
                6.0 / static_cast<double>(p.value.rows + p.value.cols));
            uniform(-limit, limit);
            break;
        }
        case Init::embed: uniform(-0.02, 0.02); break;
        case Init::lex_w: uniform(-0.01, 0.01); break;
    }
}

}  // namespace detail

// Deterministic initialization: every tensor draws from its own RNG
// substream keyed by (seed, parameter name), so two configurations that
// share a parameter name initialize it to bitwise-identical values no
// matter which other parameters exist.
inline Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Model m;
    m.cfg = cfg;
    auto add = [&](const std::string& name, std::size_t rows,
                   std::size_t cols, detail::Init kind) {
        Param p(name, Tensor(rows, cols));
        detail::fill_param(p, kind, seed);
        m.params.push_back(std::move(p));
    };

    add("embed.token", cfg.vocab_size, cfg.d_h, detail::Init::embed);
    add("embed.pos", cfg.max_len, cfg.d_h, detail::Init::embed);

    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const std::string lp = "layer" + std::to_string(l) + ".";
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            const std::string hp = lp + "head" + std::to_string(h) + ".";
            add(hp + "wq", cfg.d_h, cfg.d_i(), detail::Init::xavier);
            add(hp + "wk", cfg.d_h, cfg.d_i(), detail::Init::xavier);
            add(hp + "wv", cfg.d_h, cfg.d_i(), detail::Init::xavier);
        }
        add(lp + "attn.wo", cfg.d_h, cfg.d_h, detail::Init::xavier);
        add(lp + "attn.bo", 1, cfg.d_h, detail::Init::zeros);
        add(lp + "ln1.gamma", 1, cfg.d_h, detail::Init::ones);
        add(lp + "ln1.beta", 1, cfg.d_h, detail::Init::zeros);
        add(lp + "ffn.w1", cfg.d_h, cfg.ffn_dim, detail::Init::xavier);
        add(lp + "ffn.b1", 1, cfg.ffn_dim, detail::Init::zeros);
        add(lp + "ffn.w2", cfg.ffn_dim, cfg.d_h, detail::Init::xavier);
        add(lp + "ffn.b2", 1, cfg.d_h, detail::Init::zeros);
        add(lp + "ln2.gamma", 1, cfg.d_h, detail::Init::ones);
        add(lp + "ln2.beta", 1, cfg.d_h, detail::Init::zeros);
    }

    const std::size_t n_lea = cfg.effective_lea_layers().size();
    const std::size_t n_mats = lexbias::LexProjection::matrix_count(
        cfg.sharing, n_lea, cfg.n_heads);
    for (std::size_t k = 0; k < n_mats; ++k)
        add("lex.w" + std::to_string(k), cfg.embed.d_l, 1,
            detail::Init::lex_w);
    if (n_lea > 0 && cfg.embed.mode == lexbias::EmbedMode::learned)
        add("lex.buckets", cfg.embed.bucket_count, cfg.embed.d_l,
            detail::Init::embed);

    add("head.w1", cfg.d_h, cfg.head_hidden, detail::Init::xavier);
    add("head.b1", 1, cfg.head_hidden, detail::Init::zeros);
    add("head.ln.gamma", 1, cfg.head_hidden, detail::Init::ones);
    add("head.ln.beta", 1, cfg.head_hidden, detail::Init::zeros);
    add("head.w2", cfg.head_hidden, cfg.n_classes, detail::Init::xavier);
    add("head.b2", 1, cfg.n_classes, detail::Init::zeros);

    m.index_params();
    m.alpha = lexbias::AlphaScale(n_lea);
    return m;
}

// ---------------------------------------------------------------------------
// Forward pass

// Accumulates per-LEA-layer magnitude sums over non-pad logit cells:
// the raw attention logits |e|, the unscaled bias, and the applied
// alpha-scaled bias. Used for calibration and for the ratio diagnostic.
struct BiasStats {
    std::vector<double> sum_abs_e;
    std::vector<double> sum_abs_bias;
    std::vector<double> sum_abs_scaled;
    std::vector<std::size_t> count;

    void ensure(std::size_t n_lea_layers) {
        sum_abs_e.assign(n_lea_layers, 0.0);
        sum_abs_bias.assign(n_lea_layers, 0.0);
        sum_abs_scaled.assign(n_lea_layers, 0.0);
        count.assign(n_lea_layers, 0);
    }

    double mean_abs_e(std::size_t pos) const {
        return count[pos] ? sum_abs_e[pos] / static_cast<double>(count[pos])
                          : 0.0;
    }
    double mean_abs_bias(std::size_t pos) const {
        return count[pos] ? sum_abs_bias[pos] / static_cast<double>(count[pos])
                          : 0.0;
    }
    double mean_abs_scaled(std::size_t pos) const {
        return count[pos]
                   ? sum_abs_scaled[pos] / static_cast<double>(count[pos])
                   : 0.0;
    }
};

// Captures post-softmax attention probabilities for diagnostics:
// one n x n tensor per (layer, head), in layer-major order.
struct AttnCapture {
    std::vector<Tensor> probs;
};

struct ForwardOptions {
    bool train = false;
    std::uint64_t dropout_seed = 0;  // per-step base for mask substreams
    std::uint64_t unit = 0;          // position of this pair within the batch
    BiasStats* stats = nullptr;      // optional magnitude accumulator
    AttnCapture* capture = nullptr;  // optional attention-probability probe
};

// Indices of non-pad rows (CLS/SEP kept, PAD dropped).
inline std::vector<std::size_t> nonpad_rows(const tokenizer::TokenizedPair& tp) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < tp.ids.size(); ++i)
        if (tp.ids[i] != tokenizer::Vocab::kPad) rows.push_back(i);
    return rows;
}

namespace detail {

// Additive pre-softmax mask: column j carries -1e30 when token j is pad,
// 0 otherwise (applied to every query row).
inline Tensor pad_mask(const tokenizer::TokenizedPair& tp) {
    const std::size_t n = tp.ids.size();
    Tensor mask(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        if (tp.ids[j] != tokenizer::Vocab::kPad) continue;
        for (std::size_t i = 0; i < n; ++i) mask.at(i, j) = kMaskValue;
    }
    return mask;
}

inline std::uint64_t site_seed(const ForwardOptions& opt, std::size_t layer,
                               std::size_t site, std::size_t head) {
    return substream_seed(opt.dropout_seed, {opt.unit, layer, site, head});
}

}  // namespace detail

// Per-pair forward state shared across layers: the similarity structure is
// computed once (it depends only on the input text) and its embedding rows
// are materialized once per tape.
struct PairContext {
    const tokenizer::TokenizedPair* tp = nullptr;
    Tensor mask;
    std::vector<std::size_t> pool_rows;
    std::vector<std::size_t> nonpad;  // same as pool_rows (kept for clarity)
    bool lea_active = false;
    lexbias::SimIndex sim_idx;
    std::vector<int> bucket_ids;  // learned mode: bucket per distinct value
    bool embed_built = false;
    Tape::Var embed_rows{};  // D x d_l similarity embeddings on the tape
};

inline PairContext make_context(const Model& m,
                                const tokenizer::TokenizedPair& tp) {
    if (tp.ids.size() > m.cfg.max_len)
        throw ContractViolation("forward: sequence length " +
                                std::to_string(tp.ids.size()) +
                                " exceeds max_len " +
                                std::to_string(m.cfg.max_len));
    PairContext ctx;
    ctx.tp = &tp;
    ctx.mask = detail::pad_mask(tp);
    ctx.pool_rows = nonpad_rows(tp);
    ctx.nonpad = ctx.pool_rows;
    ctx.lea_active = !m.cfg.effective_lea_layers().empty();
    if (ctx.lea_active) {
        const lexbias::LexSimMatrix sim =
            lexbias::pairwise_similarity(tp, m.cfg.metric);
        ctx.sim_idx = lexbias::index_similarities(sim);
        if (m.cfg.embed.mode == lexbias::EmbedMode::learned)
            for (double s : ctx.sim_idx.distinct)
                ctx.bucket_ids.push_back(static_cast<int>(
                    lexbias::bucket_index(s, m.cfg.embed.bucket_count)));
    }
    return ctx;
}

namespace detail {

// Lazily builds the D x d_l matrix of embedded distinct similarities on
// this tape: a constant for the sinusoidal modes, a differentiable row
// lookup into the bucket table in learned mode.
inline Tape::Var embed_rows_var(Tape& t, Model& m, PairContext& ctx) {
    if (ctx.embed_built) return ctx.embed_rows;
    const std::size_t d_l = m.cfg.embed.d_l;
    if (m.cfg.embed.mode == lexbias::EmbedMode::learned) {
        ctx.embed_rows =
            t.embedding_lookup(t.leaf(m.param("lex.buckets")), ctx.bucket_ids);
    } else {
        Tensor rows(ctx.sim_idx.distinct.size(), d_l);
        for (std::size_t r = 0; r < ctx.sim_idx.distinct.size(); ++r) {
            const std::vector<double> e =
                lexbias::sinusoidal_embed(ctx.sim_idx.distinct[r], m.cfg.embed);
            for (std::size_t j = 0; j < d_l; ++j) rows.at(r, j) = e[j];
        }
        ctx.embed_rows = t.constant(std::move(rows));
    }
    ctx.embed_built = true;
    return ctx.embed_rows;
}

// Mean |value| over cells whose row and column are both non-pad.
inline void accumulate_abs(const Tensor& mat,
                           const std::vector<std::size_t>& nonpad,
                           double& sum, std::size_t& count) {
    for (std::size_t i : nonpad)
        for (std::size_t j : nonpad) {
            sum += std::fabs(mat.at(i, j));
            ++count;
        }
}

}  // namespace detail

// One transformer block (attention + FFN, post-norm residuals).
inline Tape::Var transformer_block(Tape& t, Model& m, Tape::Var x,
                                   std::size_t layer, PairContext& ctx,
                                   const ForwardOptions& opt) {
    const ModelConfig& cfg = m.cfg;
    const std::string lp = "layer" + std::to_string(layer) + ".";
    const bool lea_here =
        ctx.lea_active && [&] {
            for (std::size_t l : cfg.effective_lea_layers())
                if (l == layer) return true;
            return false;
        }();
    const std::size_t lea_pos = lea_here ? m.lea_pos(layer) : 0;

    Tape::Var mask = t.constant(ctx.mask);
    std::vector<Tape::Var> heads;
    heads.reserve(cfg.n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_i()));

    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
        const std::string hp = lp + "head" + std::to_string(h) + ".";
        Tape::Var q = t.matmul(x, t.leaf(m.param(hp + "wq")));
        Tape::Var k = t.matmul(x, t.leaf(m.param(hp + "wk")));
        Tape::Var v = t.matmul(x, t.leaf(m.param(hp + "wv")));
        Tape::Var e = t.scalar_scale(t.matmul(q, k, false, true), scale);

        if (lea_here) {
            const std::size_t mat =
                m.lex_matrix_index(layer, h);
            Tape::Var w = t.leaf(m.param("lex.w" + std::to_string(mat)));
            Tape::Var rows = detail::embed_rows_var(t, m, ctx);
            Tape::Var projected = t.matmul(rows, w);  // D x 1
            Tape::Var cells =
                t.embedding_lookup(projected, ctx.sim_idx.cell_to_distinct);
            Tape::Var bias = t.reshape(cells, ctx.sim_idx.n, ctx.sim_idx.n);
            const double alpha = m.alpha.value(lea_pos);
            Tape::Var scaled = t.scalar_scale(bias, alpha);
            if (opt.stats != nullptr) {
                detail::accumulate_abs(t.val(e), ctx.nonpad,
                                       opt.stats->sum_abs_e[lea_pos],
                                       opt.stats->count[lea_pos]);
                std::size_t dummy = 0;
                detail::accumulate_abs(t.val(bias), ctx.nonpad,
                                       opt.stats->sum_abs_bias[lea_pos],
                                       dummy);
                dummy = 0;
                detail::accumulate_abs(t.val(scaled), ctx.nonpad,
                                       opt.stats->sum_abs_scaled[lea_pos],
                                       dummy);
            }
            e = t.add(e, scaled);
        }

        Tape::Var probs = t.softmax_rows(t.add(e, mask));
        if (opt.capture != nullptr) opt.capture->probs.push_back(t.val(probs));
        probs = t.dropout(probs, cfg.dropout_p,
                          detail::site_seed(opt, layer, 0, h), opt.train);
        heads.push_back(t.matmul(probs, v));
    }

    Tape::Var attn = t.concat_cols(heads);
    attn = t.add_rowvec(t.matmul(attn, t.leaf(m.param(lp + "attn.wo"))),
                        t.leaf(m.param(lp + "attn.bo")));
    attn = t.dropout(attn, cfg.dropout_p, detail::site_seed(opt, layer, 1, 0),
                     opt.train);
    x = t.layer_norm(t.add(x, attn), t.leaf(m.param(lp + "ln1.gamma")),
                     t.leaf(m.param(lp + "ln1.beta")));

    Tape::Var f = t.add_rowvec(t.matmul(x, t.leaf(m.param(lp + "ffn.w1"))),
                               t.leaf(m.param(lp + "ffn.b1")));
    f = t.gelu(f);
    f = t.add_rowvec(t.matmul(f, t.leaf(m.param(lp + "ffn.w2"))),
                     t.leaf(m.param(lp + "ffn.b2")));
    f = t.dropout(f, cfg.dropout_p, detail::site_seed(opt, layer, 2, 0),
                  opt.train);
    x = t.layer_norm(t.add(x, f), t.leaf(m.param(lp + "ln2.gamma")),
                     t.leaf(m.param(lp + "ln2.beta")));
    return x;
}

// Full forward for one tokenized pair; returns the 1 x n_classes logits.
inline Tape::Var forward_pair(Tape& t, Model& m,
                              const tokenizer::TokenizedPair& tp,
                              const ForwardOptions& opt = {}) {
    PairContext ctx = make_context(m, tp);
    const ModelConfig& cfg = m.cfg;
    const std::size_t n = tp.ids.size();

    std::vector<int> pos_ids(n);
    for (std::size_t i = 0; i < n; ++i) pos_ids[i] = static_cast<int>(i);
    Tape::Var x =
        t.add(t.embedding_lookup(t.leaf(m.param("embed.token")), tp.ids),
              t.embedding_lookup(t.leaf(m.param("embed.pos")), pos_ids));

    for (std::size_t l = 0; l < cfg.n_layers; ++l)
        x = transformer_block(t, m, x, l, ctx, opt);

    Tape::Var pooled = t.mean_over_mask(x, ctx.pool_rows);
    Tape::Var hbase =
        t.add_rowvec(t.matmul(pooled, t.leaf(m.param("head.w1"))),
                     t.leaf(m.param("head.b1")));
    Tape::Var hn = t.layer_norm(hbase, t.leaf(m.param("head.ln.gamma")),
                                t.leaf(m.param("head.ln.beta")));
    hn = t.dropout(hn, cfg.dropout_p,
                   detail::site_seed(opt, cfg.n_layers, 3, 0), opt.train);
    hn = t.gelu(hn);
    return t.add_rowvec(t.matmul(hn, t.leaf(m.param("head.w2"))),
                        t.leaf(m.param("head.b2")));
}

// Evaluation convenience: logits as a plain tensor, no gradients kept.
inline Tensor eval_logits(Model& m, const tokenizer::TokenizedPair& tp) {
    Tape t;
    return t.val(forward_pair(t, m, tp));
}

// Softmax cross-entropy against a 0/1 label, on the tape.
inline Tape::Var loss_ce(Tape& t, Tape::Var logits, std::size_t label) {
    return t.cross_entropy(logits, label);
}

// Plain-value counterpart for reporting.
inline double loss_ce_value(const Tensor& logits, std::size_t label) {
    if (logits.rows != 1 || label >= logits.cols)
        throw ContractViolation("loss_ce: need 1xC logits and a valid label");
    double mx = logits.v[0];
    for (double x : logits.v) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : logits.v) s += std::exp(x - mx);
    return mx + std::log(s) - logits.v[label];
}

// ---------------------------------------------------------------------------
// Alpha calibration (one batch, before the first optimizer step)

// Calibrates every LEA layer from the given batch, shallowest layer first:
// each round runs dropout-free forwards, measures mean |e| and mean |bias|
// at the next uncalibrated layer, sets its alpha, and repeats so deeper
// layers see activations produced under the already-calibrated ones.
// Freezes the scale afterwards; a second call is a contract violation.
inline void calibrate_alpha(Model& m,
                            const std::vector<tokenizer::TokenizedPair>& batch) {
    const std::vector<std::size_t> lset = m.cfg.effective_lea_layers();
    if (m.alpha.frozen)
        throw ContractViolation("alpha: calibration requested after freeze");
    for (std::size_t pos = 0; pos < lset.size(); ++pos) {
        BiasStats stats;
        stats.ensure(lset.size());
        ForwardOptions opt;
        opt.stats = &stats;
        for (const tokenizer::TokenizedPair& tp : batch) {
            Tape t;
            forward_pair(t, m, tp, opt);
        }
        m.alpha.calibrate(pos, stats.mean_abs_e(pos),
                          stats.mean_abs_bias(pos));
    }
    m.alpha.freeze();
}

// Per-LEA-layer ratio mean|alpha*bias| / mean|e| over a batch (eval mode).
inline std::vector<double> bias_ratio(
    Model& m, const std::vector<tokenizer::TokenizedPair>& batch) {
    const std::size_t n_lea = m.cfg.effective_lea_layers().size();
    BiasStats stats;
    stats.ensure(n_lea);
    ForwardOptions opt;
    opt.stats = &stats;
    for (const tokenizer::TokenizedPair& tp : batch) {
        Tape t;
        forward_pair(t, m, tp, opt);
    }
    std::vector<double> ratios(n_lea, 0.0);
    for (std::size_t pos = 0; pos < n_lea; ++pos) {
        const double e = stats.mean_abs_e(pos);
        ratios[pos] = e > 0.0 ? stats.mean_abs_scaled(pos) / e : 0.0;
    }
    return ratios;
}

// ---------------------------------------------------------------------------
// Description report

inline std::string describe(const ModelConfig& cfg) {
    const ParamCounts c = count_params(cfg);
    const std::size_t n_lea = cfg.effective_lea_layers().size();
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) {
        std::string key = k;
        key.resize(26, ' ');
        out += "  " + key + v + "\n";
    };
    out += "model\n";
    line("layers", std::to_string(cfg.n_layers));
    line("heads", std::to_string(cfg.n_heads));
    line("hidden dim", std::to_string(cfg.d_h));
    line("per-head dim", std::to_string(cfg.d_i()));
    line("ffn dim", std::to_string(cfg.ffn_dim));
    line("max length", std::to_string(cfg.max_len));
    line("vocab size", std::to_string(cfg.vocab_size));
    out += "lexical bias\n";
    line("enabled", n_lea ? "yes" : "no");
    if (n_lea) {
        std::string layers;
        for (std::size_t l : cfg.effective_lea_layers()) {
            if (!layers.empty()) layers += ",";
            layers += std::to_string(l);
        }
        line("layers", layers);
        line("metric", strsim::to_string(cfg.metric));
        line("embedding", lexbias::to_string(cfg.embed.mode));
        line("embedding dim", std::to_string(cfg.embed.d_l));
        line("sharing", lexbias::to_string(cfg.sharing));
    }
    out += "parameters\n";
    line("embeddings", std::to_string(c.embedding));
    line("attention", std::to_string(c.attention));
    line("feed-forward", std::to_string(c.ffn));
    line("layer norm", std::to_string(c.layer_norm));
    line("classifier head", std::to_string(c.head));
    line("lex projection", std::to_string(c.lex_projection));
    if (c.lex_table) line("lex bucket table", std::to_string(c.lex_table));
    line("total", std::to_string(c.total));
    return out;
}

}  // namespace lea::model
