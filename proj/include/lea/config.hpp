#pragma once

// Flat dotted-key configuration shared by the CLI and the training
// harness.  A config file is plain text: one `key = value` per line,
// `#` comments, later assignments win.  The same keys are accepted by
// `--set key=value` command-line overrides.
//
// Recognized keys:
//   model.n_layers  model.d_h  model.n_heads  model.ffn_dim
//   model.max_len   model.dropout
//   lea.enabled  lea.metric  lea.d_l  lea.layers  lea.sharing
//   lea.embedding  lea.buckets
//   train.lr  train.epochs  train.batch  train.weight_decay
//   train.warmup_epochs  train.augment  train.aug_p_sentence
//   train.aug_p_word
//   seed
//
// `lea.layers` takes a comma-separated list of items, each either a
// single index or a half-open range `a..b` (so `2..4` means layers 2
// and 3).

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lea/errors.hpp"
#include "lea/model.hpp"

namespace lea::config {

struct TrainConfig {
    std::size_t epochs = 30;      // paper-scale default; desk runs use ~10
    std::size_t batch_size = 32;  // paper-scale default; desk runs use 16
    double lr = 5e-5;
    double weight_decay = 5e-5;
    double warmup_epochs = 1.5;
    bool augment = false;          // typo data augmentation during training
    double aug_p_sentence = 0.5;   // chance a sentence is augmented
    double aug_p_word = 0.2;       // per-word corruption rate when it is
    bool keep_final_weights = false;  // skip best-validation-F1 selection
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs == 0) throw ConfigError("train.epochs must be positive");
        if (batch_size == 0) throw ConfigError("train.batch must be positive");
        if (lr <= 0.0) throw ConfigError("train.lr must be positive");
        if (weight_decay <= 0.0)
            throw ConfigError("train.weight_decay must be positive");
        if (warmup_epochs <= 0.0)
            throw ConfigError("train.warmup_epochs must be positive");
        if (warmup_epochs >= static_cast<double>(epochs))
            throw ConfigError("train.warmup_epochs must be smaller than "
                              "train.epochs");
        if (aug_p_sentence <= 0.0 || aug_p_sentence > 1.0)
            throw ConfigError("train.aug_p_sentence must be in (0,1]");
        if (aug_p_word <= 0.0 || aug_p_word > 1.0)
            throw ConfigError("train.aug_p_word must be in (0,1]");
    }
};

struct RunConfig {
    model::ModelConfig model;
    TrainConfig train;

    void validate() const {
        model.validate();
        train.validate();
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
        --e;
    return std::string(s.substr(b, e - b));
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-')
        throw ConfigError(key + ": expected a non-negative integer, got '" +
                          v + "'");
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty())
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

}  // namespace detail

// "2..4" (half-open), "1", or comma-separated mixes like "0,2..4,7".
inline std::vector<std::size_t> parse_layer_set(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    bool any = false;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty())
            throw ConfigError("lea.layers: empty item in '" + text + "'");
        any = true;
        std::size_t dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<std::size_t>(
                detail::to_u64("lea.layers", item)));
            continue;
        }
        std::uint64_t lo =
            detail::to_u64("lea.layers", detail::trim(item.substr(0, dots)));
        std::uint64_t hi =
            detail::to_u64("lea.layers", detail::trim(item.substr(dots + 2)));
        if (hi <= lo)
            throw ConfigError("lea.layers: range '" + item +
                              "' is empty (half-open, needs lo < hi)");
        for (std::uint64_t k = lo; k < hi; ++k)
            out.push_back(static_cast<std::size_t>(k));
    }
    if (!any) throw ConfigError("lea.layers: no layers in '" + text + "'");
    return out;
}

inline std::string layer_set_to_string(const std::vector<std::size_t>& layers) {
    std::string out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(layers[i]);
    }
    return out;
}

// Applies one key/value assignment. Unknown keys are an error so typos
// in config files fail loudly instead of silently running defaults.
inline void apply_kv(RunConfig& cfg, const std::string& key,
                     const std::string& value) {
    using detail::to_bool;
    using detail::to_double;
    using detail::to_u64;
    auto as_size = [&](const char* k) {
        return static_cast<std::size_t>(to_u64(k, value));
    };
    if (key == "model.n_layers") cfg.model.n_layers = as_size(key.c_str());
    else if (key == "model.d_h") cfg.model.d_h = as_size(key.c_str());
    else if (key == "model.n_heads") cfg.model.n_heads = as_size(key.c_str());
    else if (key == "model.ffn_dim") cfg.model.ffn_dim = as_size(key.c_str());
    else if (key == "model.max_len") cfg.model.max_len = as_size(key.c_str());
    else if (key == "model.head_hidden")
        cfg.model.head_hidden = as_size(key.c_str());
    else if (key == "model.dropout")
        cfg.model.dropout_p = to_double(key, value);
    else if (key == "lea.enabled") cfg.model.lea_enabled = to_bool(key, value);
    else if (key == "lea.metric")
        cfg.model.metric = strsim::metric_from_string(value);
    else if (key == "lea.d_l") cfg.model.embed.d_l = as_size(key.c_str());
    else if (key == "lea.layers") cfg.model.lea_layers = parse_layer_set(value);
    else if (key == "lea.sharing")
        cfg.model.sharing = lexbias::sharing_from_string(value);
    else if (key == "lea.embedding")
        cfg.model.embed.mode = lexbias::embed_mode_from_string(value);
    else if (key == "lea.buckets")
        cfg.model.embed.bucket_count = as_size(key.c_str());
    else if (key == "train.lr") cfg.train.lr = to_double(key, value);
    else if (key == "train.epochs") cfg.train.epochs = as_size(key.c_str());
    else if (key == "train.batch") cfg.train.batch_size = as_size(key.c_str());
    else if (key == "train.weight_decay")
        cfg.train.weight_decay = to_double(key, value);
    else if (key == "train.warmup_epochs")
        cfg.train.warmup_epochs = to_double(key, value);
    else if (key == "train.augment")
        cfg.train.augment = to_bool(key, value);
    else if (key == "train.aug_p_sentence")
        cfg.train.aug_p_sentence = to_double(key, value);
    else if (key == "train.aug_p_word")
        cfg.train.aug_p_word = to_double(key, value);
    else if (key == "train.keep_final_weights")
        cfg.train.keep_final_weights = to_bool(key, value);
    else if (key == "seed") cfg.train.seed = to_u64(key.c_str(), value);
    else throw ConfigError("unknown config key '" + key + "'");
}

// Parses `key = value` lines (comments with #, blank lines skipped) and
// applies them in order, so later lines win.
inline void apply_text(RunConfig& cfg, std::string_view text,
                       const std::string& source = "<config>") {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view raw = nl == std::string_view::npos
                                   ? text.substr(pos)
                                   : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source + ":" + std::to_string(line_no) +
                              ": empty key");
        apply_kv(cfg, key, value);
    }
}

inline void apply_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_text(cfg, buf.str(), path);
}

// Applies `--set key=value` style overrides after any config file.
inline void apply_overrides(RunConfig& cfg,
                            const std::vector<std::string>& sets) {
    for (const std::string& s : sets) {
        std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_kv(cfg, detail::trim(s.substr(0, eq)),
                 detail::trim(s.substr(eq + 1)));
    }
}

// Canonical text form covering every recognized key; reparsing it
// reproduces the config (used for report echoes and checkpoint
// manifests).
inline std::string to_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "model.n_layers = " << cfg.model.n_layers << "\n"
        << "model.d_h = " << cfg.model.d_h << "\n"
        << "model.n_heads = " << cfg.model.n_heads << "\n"
        << "model.ffn_dim = " << cfg.model.ffn_dim << "\n"
        << "model.max_len = " << cfg.model.max_len << "\n"
        << "model.head_hidden = " << cfg.model.head_hidden << "\n"
        << "model.dropout = " << cfg.model.dropout_p << "\n"
        << "lea.enabled = " << (cfg.model.lea_enabled ? "true" : "false")
        << "\n"
        << "lea.metric = " << strsim::to_string(cfg.model.metric) << "\n"
        << "lea.d_l = " << cfg.model.embed.d_l << "\n"
        << "lea.layers = " << layer_set_to_string(cfg.model.lea_layers) << "\n"
        << "lea.sharing = " << lexbias::to_string(cfg.model.sharing) << "\n"
        << "lea.embedding = " << lexbias::to_string(cfg.model.embed.mode)
        << "\n"
        << "lea.buckets = " << cfg.model.embed.bucket_count << "\n"
        << "train.lr = " << cfg.train.lr << "\n"
        << "train.epochs = " << cfg.train.epochs << "\n"
        << "train.batch = " << cfg.train.batch_size << "\n"
        << "train.weight_decay = " << cfg.train.weight_decay << "\n"
        << "train.warmup_epochs = " << cfg.train.warmup_epochs << "\n"
        << "train.augment = " << (cfg.train.augment ? "true" : "false") << "\n"
        << "train.aug_p_sentence = " << cfg.train.aug_p_sentence << "\n"
        << "train.aug_p_word = " << cfg.train.aug_p_word << "\n"
        << "train.keep_final_weights = "
        << (cfg.train.keep_final_weights ? "true" : "false") << "\n"
        << "seed = " << cfg.train.seed << "\n";
    return out.str();
}

}  // namespace lea::config
