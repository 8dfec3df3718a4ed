#pragma once

// Versioned binary checkpoint: run config manifest, vocabulary, alpha
// scales, and every named parameter tensor.  Tensor payloads are raw
// IEEE-754 doubles, so save -> load restores weights bitwise.  Loading
// refuses files with the wrong magic or version, and evaluation-side
// helpers refuse checkpoints whose config manifest does not match the
// requested one.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lea/config.hpp"
#include "lea/errors.hpp"
#include "lea/model.hpp"
#include "lea/tokenizer.hpp"

namespace lea::checkpoint {

inline constexpr char kMagic[8] = {'L', 'E', 'A', 'C', 'K', 'P', 'T', '\n'};
inline constexpr std::uint32_t kVersion = 1;

struct Checkpoint {
    config::RunConfig cfg;
    std::vector<std::string> vocab_tokens;
    std::vector<double> alphas;
    std::vector<numeric::Param> tensors;
};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

inline std::uint64_t get_u64(std::istream& in, const std::string& what) {
    char buf[8];
    if (!in.read(buf, 8))
        throw ParseError("checkpoint: truncated while reading " + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i]))
             << (8 * i);
    return v;
}

inline void put_blob(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_blob(std::istream& in, const std::string& what) {
    std::uint64_t n = get_u64(in, what + " length");
    std::string s(n, '\0');
    if (n && !in.read(s.data(), static_cast<std::streamsize>(n)))
        throw ParseError("checkpoint: truncated while reading " + what);
    return s;
}

inline void put_doubles(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> get_doubles(std::istream& in,
                                       const std::string& what) {
    std::uint64_t n = get_u64(in, what + " count");
    std::vector<double> v(n);
    if (n && !in.read(reinterpret_cast<char*>(v.data()),
                      static_cast<std::streamsize>(n * sizeof(double))))
        throw ParseError("checkpoint: truncated while reading " + what);
    return v;
}

}  // namespace detail

inline void save_stream(std::ostream& out, const model::Model& m,
                        const tokenizer::Vocab& vocab) {
    out.write(kMagic, sizeof kMagic);
    detail::put_u64(out, kVersion);

    config::RunConfig rc;
    rc.model = m.cfg;
    detail::put_blob(out, config::to_text(rc));

    detail::put_u64(out, vocab.id_to_token.size());
    for (const std::string& t : vocab.id_to_token) detail::put_blob(out, t);

    std::vector<double> alphas;
    for (std::size_t i = 0; i < m.cfg.effective_lea_layers().size(); ++i)
        alphas.push_back(m.alpha.value(i));
    detail::put_doubles(out, alphas);

    detail::put_u64(out, m.params.size());
    for (const numeric::Param& p : m.params) {
        detail::put_blob(out, p.name);
        detail::put_u64(out, p.value.rows);
        detail::put_u64(out, p.value.cols);
        detail::put_doubles(out, p.value.v);
    }
}

inline void save_file(const std::string& path, const model::Model& m,
                      const tokenizer::Vocab& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open checkpoint '" + path +
                                "' for writing");
    save_stream(out, m, vocab);
    if (!out) throw ParseError("checkpoint: write to '" + path + "' failed");
}

inline Checkpoint load_stream(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw ParseError("checkpoint: bad magic (not a checkpoint file)");
    std::uint64_t version = detail::get_u64(in, "version");
    if (version != kVersion)
        throw ParseError("checkpoint: unsupported version " +
                         std::to_string(version) + " (expected " +
                         std::to_string(kVersion) + ")");

    Checkpoint ck;
    std::string manifest = detail::get_blob(in, "config manifest");
    config::apply_text(ck.cfg, manifest, "<checkpoint manifest>");

    std::uint64_t n_vocab = detail::get_u64(in, "vocab size");
    ck.vocab_tokens.reserve(n_vocab);
    for (std::uint64_t i = 0; i < n_vocab; ++i)
        ck.vocab_tokens.push_back(detail::get_blob(in, "vocab token"));

    ck.alphas = detail::get_doubles(in, "alpha values");

    std::uint64_t n_tensors = detail::get_u64(in, "tensor count");
    for (std::uint64_t i = 0; i < n_tensors; ++i) {
        std::string name = detail::get_blob(in, "tensor name");
        std::uint64_t rows = detail::get_u64(in, "tensor rows");
        std::uint64_t cols = detail::get_u64(in, "tensor cols");
        std::vector<double> data = detail::get_doubles(in, "tensor data");
        if (data.size() != rows * cols)
            throw ParseError("checkpoint: tensor '" + name + "' carries " +
                             std::to_string(data.size()) +
                             " values for shape [" + std::to_string(rows) +
                             "x" + std::to_string(cols) + "]");
        numeric::Tensor t(rows, cols);
        t.v = std::move(data);
        ck.tensors.emplace_back(name, std::move(t));
    }
    return ck;
}

inline Checkpoint load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    return load_stream(in);
}

inline tokenizer::Vocab vocab_from(const Checkpoint& ck) {
    tokenizer::Vocab v;
    for (const std::string& t : ck.vocab_tokens) v.add(t);
    return v;
}

// Rebuilds a runnable model: instantiates the architecture from the
// manifest and overwrites every parameter with the stored tensor.
// Missing/extra/misshapen tensors are contract violations because they
// mean the manifest and payload disagree.
inline model::Model model_from(const Checkpoint& ck) {
    model::ModelConfig mc = ck.cfg.model;
    mc.vocab_size = ck.vocab_tokens.size();  // derived from the stored vocab
    model::Model m = model::init_model(mc, /*seed=*/0);
    if (ck.tensors.size() != m.params.size())
        throw ContractViolation(
            "checkpoint: payload has " + std::to_string(ck.tensors.size()) +
            " tensors but the manifest architecture needs " +
            std::to_string(m.params.size()));
    for (const numeric::Param& stored : ck.tensors) {
        numeric::Param& live = m.param(stored.name);
        if (!live.value.same_shape(stored.value))
            throw ContractViolation("checkpoint: tensor '" + stored.name +
                                    "' has shape " + stored.value.shape_str() +
                                    " but the architecture expects " +
                                    live.value.shape_str());
        live.value = stored.value;
    }
    const std::size_t n_lea = m.cfg.effective_lea_layers().size();
    if (ck.alphas.size() != n_lea)
        throw ContractViolation("checkpoint: " +
                                std::to_string(ck.alphas.size()) +
                                " alpha values for " + std::to_string(n_lea) +
                                " lexical-bias layers");
    m.alpha = lexbias::AlphaScale::restore(ck.alphas);
    return m;
}

// Manifest guard for evaluation: the model/lea sections must match the
// requested config exactly (training knobs may differ).
inline void require_matching_model(const Checkpoint& ck,
                                   const config::RunConfig& requested) {
    config::RunConfig a = ck.cfg;
    config::RunConfig b = requested;
    a.train = config::TrainConfig{};
    b.train = config::TrainConfig{};
    if (config::to_text(a) != config::to_text(b))
        throw ConfigError(
            "checkpoint manifest does not match the requested model config; "
            "refusing to evaluate (stored vs requested):\n" +
            config::to_text(a) + "---\n" + config::to_text(b));
}

}  // namespace lea::checkpoint
