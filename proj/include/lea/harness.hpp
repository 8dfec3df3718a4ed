#pragma once

// Experiment engine: training loop (AdamW + warm-up/cosine schedule,
// optional typo augmentation, alpha calibration on the first batch),
// F1 evaluation with corrupted test replicas, noise sweeps, single-axis
// ablations, and report assembly.  Everything is deterministic given
// (config, seed): batching, augmentation, dropout, and corruption all
// derive from named substreams of the run seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lea/config.hpp"
#include "lea/data.hpp"
#include "lea/errors.hpp"
#include "lea/model.hpp"
#include "lea/noise.hpp"
#include "lea/optim.hpp"
#include "lea/rng.hpp"
#include "lea/tokenizer.hpp"

namespace lea::harness {

inline constexpr std::uint64_t kAugTag = 0xa06;
inline constexpr std::uint64_t kDropTag = 0xd809;

// ---------------------------------------------------------------------------
// Metrics

// Binary F1 for the positive class. Zero-denominator precision or
// recall (no predicted positives / no actual positives) yields 0.
inline double f1_score(const std::vector<int>& preds,
                       const std::vector<int>& labels) {
    if (preds.size() != labels.size())
        throw ContractViolation("f1_score: " + std::to_string(preds.size()) +
                                " predictions vs " +
                                std::to_string(labels.size()) + " labels");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == 1, l = labels[i] == 1;
        if (p && l) ++tp;
        else if (p && !l) ++fp;
        else if (!p && l) ++fn;
    }
    if (tp + fp == 0 || tp + fn == 0) return 0.0;
    const double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double rec = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (prec + rec == 0.0) return 0.0;
    return 2.0 * prec * rec / (prec + rec);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator); 0 for fewer than two
// values.
inline double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Dataset encoding and prediction

struct EncodedSet {
    std::vector<tokenizer::TokenizedPair> pairs;
    std::vector<int> labels;
};

inline EncodedSet encode_dataset(const data::PairDataset& ds,
                                 const tokenizer::Vocab& vocab,
                                 std::size_t max_len) {
    EncodedSet out;
    out.pairs.reserve(ds.size());
    out.labels.reserve(ds.size());
    for (const data::PairRecord& r : ds.records) {
        out.pairs.push_back(tokenizer::encode_pair(r.left, r.right, vocab,
                                                   max_len));
        out.labels.push_back(r.label);
    }
    return out;
}

inline std::vector<int> predict(model::Model& m, const EncodedSet& es) {
    std::vector<int> preds;
    preds.reserve(es.pairs.size());
    for (const tokenizer::TokenizedPair& tp : es.pairs) {
        numeric::Tensor logits = model::eval_logits(m, tp);
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c)
            if (logits.v[c] > logits.v[best]) best = c;
        preds.push_back(static_cast<int>(best));
    }
    return preds;
}

inline double f1_on(model::Model& m, const data::PairDataset& ds,
                    const tokenizer::Vocab& vocab) {
    EncodedSet es = encode_dataset(ds, vocab, m.cfg.max_len);
    return f1_score(predict(m, es), es.labels);
}

// ---------------------------------------------------------------------------
// Training

struct TrainProgress {
    std::vector<double> epoch_train_loss;  // mean batch loss per epoch
    std::vector<double> epoch_val_f1;      // clean validation F1 per epoch
    double best_val_f1 = 0.0;
    std::size_t best_epoch = 0;
};

struct TrainOutput {
    model::Model model;
    TrainProgress progress;
    double seconds = 0.0;
};

namespace detail {

inline std::vector<std::vector<double>> snapshot(const model::Model& m) {
    std::vector<std::vector<double>> out;
    out.reserve(m.params.size());
    for (const numeric::Param& p : m.params) out.push_back(p.value.v);
    return out;
}

inline void restore(model::Model& m,
                    const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < m.params.size(); ++i)
        m.params[i].value.v = snap[i];
}

}  // namespace detail

// Trains one model on `train_ds`, validating on `val_ds` after every
// epoch. Alpha is calibrated on the first batch before the first
// optimizer step. Unless cfg.train.keep_final_weights is set, the
// weights with the best validation F1 (earliest epoch on ties) are
// returned.
inline TrainOutput train_model(const config::RunConfig& cfg,
                               const data::PairDataset& train_ds,
                               const data::PairDataset& val_ds,
                               const tokenizer::Vocab& vocab) {
    if (train_ds.size() == 0)
        throw ConfigError("train_model: training set is empty");
    const auto t0 = std::chrono::steady_clock::now();

    model::ModelConfig mc = cfg.model;
    mc.vocab_size = vocab.size();  // always derived from the live vocab
    mc.validate();
    cfg.train.validate();
    const std::uint64_t seed = cfg.train.seed;
    TrainOutput out{model::init_model(mc, seed), {}, 0.0};
    model::Model& m = out.model;

    std::vector<numeric::Param*> params;
    params.reserve(m.params.size());
    for (numeric::Param& p : m.params) params.push_back(&p);

    const std::size_t steps_per_epoch =
        (train_ds.size() + cfg.train.batch_size - 1) / cfg.train.batch_size;
    const std::size_t total_steps = cfg.train.epochs * steps_per_epoch;
    std::size_t warmup_steps = static_cast<std::size_t>(
        cfg.train.warmup_epochs * static_cast<double>(steps_per_epoch));
    warmup_steps = std::min(warmup_steps, total_steps - 1);

    optim::AdamWState opt;
    std::vector<std::vector<double>> best_snap;
    std::vector<double> best_alphas;
    bool calibrated = false;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        // Fresh augmentation every epoch: corruption is sampled from an
        // epoch-keyed substream rather than a frozen augmented copy.
        const data::PairDataset* epoch_ds = &train_ds;
        data::PairDataset augmented;
        if (cfg.train.augment) {
            noise::NoiseConfig nc;
            nc.p_word = cfg.train.aug_p_word;
            nc.p_sentence = cfg.train.aug_p_sentence;
            nc.seed = substream_seed(seed, {kAugTag, epoch});
            augmented = noise::corrupt_dataset(train_ds, nc);
            epoch_ds = &augmented;
        }

        const auto batches = data::batch_indices(
            train_ds.size(), cfg.train.batch_size, seed, epoch, true);
        double loss_sum = 0.0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            std::vector<tokenizer::TokenizedPair> batch;
            std::vector<int> labels;
            batch.reserve(batches[bi].size());
            for (std::size_t idx : batches[bi]) {
                const data::PairRecord& r = epoch_ds->records[idx];
                batch.push_back(tokenizer::encode_pair(r.left, r.right, vocab,
                                                       mc.max_len));
                labels.push_back(r.label);
            }
            if (!calibrated) {
                model::calibrate_alpha(m, batch);
                calibrated = true;
            }

            numeric::Tape t;
            numeric::Tape::Var total{};
            const std::uint64_t drop_seed =
                substream_seed(seed, {kDropTag, epoch, bi});
            for (std::size_t k = 0; k < batch.size(); ++k) {
                model::ForwardOptions fo;
                fo.train = true;
                fo.dropout_seed = drop_seed;
                fo.unit = k;
                auto logits = model::forward_pair(t, m, batch[k], fo);
                auto l = model::loss_ce(t, logits, labels[k]);
                total = k == 0 ? l : t.add(total, l);
            }
            auto loss =
                t.scalar_scale(total, 1.0 / static_cast<double>(batch.size()));
            loss_sum += t.val(loss).v[0];
            for (numeric::Param* p : params) p->zero_grad();
            t.backward(loss);
            const double lr = optim::lr_schedule(step, total_steps,
                                                 warmup_steps, cfg.train.lr);
            optim::adamw_step(params, opt, lr, cfg.train.weight_decay);
            ++step;
        }
        out.progress.epoch_train_loss.push_back(
            loss_sum / static_cast<double>(batches.size()));

        const double val_f1 = f1_on(m, val_ds, vocab);
        out.progress.epoch_val_f1.push_back(val_f1);
        if (best_snap.empty() || val_f1 > out.progress.best_val_f1) {
            out.progress.best_val_f1 = val_f1;
            out.progress.best_epoch = epoch;
            best_snap = detail::snapshot(m);
        }
    }

    if (!cfg.train.keep_final_weights && !best_snap.empty())
        detail::restore(m, best_snap);

    out.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalResult {
    double clean_f1 = 0.0;
    std::vector<double> replica_f1;  // one per corrupted test replica
    double typo_mean = 0.0;
    double typo_std = 0.0;
};

// Evaluates the clean test split plus `replicas` corrupted copies
// (p_sentence forced to 1, seeds noise_seed+0..replicas-1).
inline EvalResult evaluate_model(model::Model& m,
                                 const tokenizer::Vocab& vocab,
                                 const data::PairDataset& test_ds,
                                 double p_word, std::size_t replicas,
                                 std::uint64_t noise_seed) {
    EvalResult r;
    r.clean_f1 = f1_on(m, test_ds, vocab);
    noise::NoiseConfig nc;
    nc.p_word = p_word;
    nc.seed = noise_seed;
    for (const data::PairDataset& rep :
         noise::corrupt_split(test_ds, nc, replicas))
        r.replica_f1.push_back(f1_on(m, rep, vocab));
    r.typo_mean = mean_of(r.replica_f1);
    r.typo_std = std_of(r.replica_f1);
    return r;
}

// ---------------------------------------------------------------------------
// Multi-seed experiments

struct SeedRun {
    std::uint64_t seed = 0;
    double clean_f1 = 0.0;
    std::vector<double> replica_f1;
    double typo_mean = 0.0;
    std::vector<double> alphas;
    TrainProgress progress;
    double train_seconds = 0.0;
};

struct Experiment {
    std::string name;
    std::string config_text;
    std::vector<SeedRun> runs;
    double clean_mean = 0.0, clean_std = 0.0;
    double typo_mean = 0.0, typo_std = 0.0;
    double seconds = 0.0;
};

// Trains `cfg` once per seed (overriding cfg.train.seed) and evaluates
// clean + corrupted test splits. Aggregates are over per-seed means.
inline Experiment run_experiment(const std::string& name,
                                 config::RunConfig cfg,
                                 const std::vector<std::uint64_t>& seeds,
                                 const data::PairDataset& train_ds,
                                 const data::PairDataset& val_ds,
                                 const data::PairDataset& test_ds,
                                 const tokenizer::Vocab& vocab,
                                 double eval_p_word, std::size_t replicas,
                                 std::uint64_t noise_seed) {
    if (seeds.empty()) throw ConfigError("run_experiment: no seeds");
    const auto t0 = std::chrono::steady_clock::now();
    Experiment ex;
    ex.name = name;
    std::vector<double> cleans, typos;
    for (std::uint64_t s : seeds) {
        cfg.train.seed = s;
        TrainOutput to = train_model(cfg, train_ds, val_ds, vocab);
        EvalResult ev = evaluate_model(to.model, vocab, test_ds, eval_p_word,
                                       replicas, noise_seed);
        SeedRun run;
        run.seed = s;
        run.clean_f1 = ev.clean_f1;
        run.replica_f1 = ev.replica_f1;
        run.typo_mean = ev.typo_mean;
        const std::size_t n_lea = to.model.cfg.effective_lea_layers().size();
        for (std::size_t i = 0; i < n_lea; ++i)
            run.alphas.push_back(to.model.alpha.value(i));
        run.progress = to.progress;
        run.train_seconds = to.seconds;
        ex.runs.push_back(std::move(run));
        cleans.push_back(ev.clean_f1);
        typos.push_back(ev.typo_mean);
    }
    ex.config_text = config::to_text(cfg);
    ex.clean_mean = mean_of(cleans);
    ex.clean_std = std_of(cleans);
    ex.typo_mean = mean_of(typos);
    ex.typo_std = std_of(typos);
    ex.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return ex;
}

// ---------------------------------------------------------------------------
// Noise sweep

struct SweepRow {
    std::string model;
    double p_word = 0.0;
    double f1_mean = 0.0;
    double f1_std = 0.0;
};

inline const std::vector<double>& default_sweep_grid() {
    static const std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    return grid;
}

// Evaluates every named model on the same corrupted replicas per grid
// point (3 replicas per p_word by default). When both "da" and "lea"
// entries are present, emits the per-replica LEA-minus-DA gap as
// additional "lea_minus_da" rows.
inline std::vector<SweepRow> sweep(
    const std::vector<std::pair<std::string, model::Model*>>& models,
    const tokenizer::Vocab& vocab, const data::PairDataset& test_ds,
    const std::vector<double>& grid, std::size_t replicas,
    std::uint64_t noise_seed) {
    if (models.empty()) throw ConfigError("sweep: no models");
    std::vector<SweepRow> rows;
    for (double p : grid) {
        if (p < 0.0 || p > 1.0)
            throw ConfigError("sweep: p_word " + std::to_string(p) +
                              " outside [0,1]");
        noise::NoiseConfig nc;
        nc.p_word = p;
        nc.seed = noise_seed;
        const auto reps = noise::corrupt_split(test_ds, nc, replicas);
        std::vector<std::vector<double>> per_model;
        for (const auto& [name, mp] : models) {
            std::vector<double> f1s;
            for (const data::PairDataset& rep : reps)
                f1s.push_back(f1_on(*mp, rep, vocab));
            rows.push_back({name, p, mean_of(f1s), std_of(f1s)});
            per_model.push_back(std::move(f1s));
        }
        std::ptrdiff_t i_da = -1, i_lea = -1;
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (models[i].first == "da") i_da = static_cast<std::ptrdiff_t>(i);
            if (models[i].first == "lea")
                i_lea = static_cast<std::ptrdiff_t>(i);
        }
        if (i_da >= 0 && i_lea >= 0) {
            std::vector<double> gaps;
            for (std::size_t k = 0; k < replicas; ++k)
                gaps.push_back(per_model[static_cast<std::size_t>(i_lea)][k] -
                               per_model[static_cast<std::size_t>(i_da)][k]);
            rows.push_back({"lea_minus_da", p, mean_of(gaps), std_of(gaps)});
        }
    }
    return rows;
}

// Round-trippable CSV (17 significant digits reparse to the same
// doubles).
inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "model,p_word,f1_mean,f1_std\n";
    out << std::setprecision(17);
    for (const SweepRow& r : rows)
        out << r.model << "," << r.p_word << "," << r.f1_mean << ","
            << r.f1_std << "\n";
    return out.str();
}

inline std::vector<SweepRow> sweep_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "model,p_word,f1_mean,f1_std")
        throw ParseError("sweep CSV: bad header '" + line + "'");
    std::vector<SweepRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string model, p, m, s;
        if (!std::getline(ss, model, ',') || !std::getline(ss, p, ',') ||
            !std::getline(ss, m, ',') || !std::getline(ss, s, ','))
            throw ParseError("sweep CSV line " + std::to_string(line_no) +
                             ": expected 4 fields, got '" + line + "'");
        rows.push_back({model, std::stod(p), std::stod(m), std::stod(s)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Ablations

struct AblationRow {
    std::string variant;
    double clean_f1 = 0.0;
    double typo_mean = 0.0;
    double typo_std = 0.0;
    std::size_t lex_params = 0;  // projection + bucket-table parameters
};

inline std::vector<std::size_t> layer_span(std::size_t n_layers,
                                           std::size_t start) {
    std::vector<std::size_t> out;
    for (std::size_t k = start; k < n_layers; ++k) out.push_back(k);
    return out;
}

// Single-axis ablation: trains one model per variant of `axis` (all
// other settings from `base`) and evaluates clean + typo F1.
// Axes: metric (5 variants), sharing (3), layers (4), embedding (3).
inline std::vector<AblationRow> ablate(
    const config::RunConfig& base, const std::string& axis,
    const data::PairDataset& train_ds, const data::PairDataset& val_ds,
    const data::PairDataset& test_ds, const tokenizer::Vocab& vocab,
    double eval_p_word, std::size_t replicas, std::uint64_t noise_seed) {
    std::vector<std::pair<std::string, config::RunConfig>> variants;
    if (axis == "metric") {
        for (strsim::MetricKind k :
             {strsim::MetricKind::jaccard, strsim::MetricKind::levenshtein,
              strsim::MetricKind::lcs, strsim::MetricKind::jaro_winkler,
              strsim::MetricKind::smith_waterman}) {
            config::RunConfig c = base;
            c.model.metric = k;
            variants.emplace_back(strsim::to_string(k), c);
        }
    } else if (axis == "sharing") {
        for (lexbias::Sharing s :
             {lexbias::Sharing::model, lexbias::Sharing::layer,
              lexbias::Sharing::head}) {
            config::RunConfig c = base;
            c.model.sharing = s;
            variants.emplace_back(lexbias::to_string(s), c);
        }
    } else if (axis == "layers") {
        const std::size_t n = base.model.n_layers;
        const std::pair<const char*, std::size_t> spans[] = {
            {"all", 0},
            {"last_3q", n / 4},
            {"last_half", n / 2},
            {"last_quarter", 3 * n / 4}};
        for (const auto& [name, start] : spans) {
            config::RunConfig c = base;
            c.model.lea_layers = layer_span(n, start);
            variants.emplace_back(name, c);
        }
    } else if (axis == "embedding") {
        for (lexbias::EmbedMode e :
             {lexbias::EmbedMode::learned, lexbias::EmbedMode::fixed,
              lexbias::EmbedMode::fixed_scaled}) {
            config::RunConfig c = base;
            c.model.embed.mode = e;
            variants.emplace_back(lexbias::to_string(e), c);
        }
    } else {
        throw ConfigError("ablate: unknown axis '" + axis +
                          "' (expected metric, sharing, layers, or embedding)");
    }

    std::vector<AblationRow> rows;
    for (auto& [name, cfg] : variants) {
        TrainOutput to = train_model(cfg, train_ds, val_ds, vocab);
        EvalResult ev = evaluate_model(to.model, vocab, test_ds, eval_p_word,
                                       replicas, noise_seed);
        model::ParamCounts pc = model::count_params(to.model.cfg);
        rows.push_back({name, ev.clean_f1, ev.typo_mean, ev.typo_std,
                        pc.lex_projection + pc.lex_table});
    }
    return rows;
}

inline std::string ablation_table(const std::string& axis,
                                  const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(16) << ("[" + axis + "]") << std::right
        << std::setw(10) << "clean_f1" << std::setw(10) << "typo_f1"
        << std::setw(10) << "typo_std" << std::setw(12) << "lex_params"
        << "\n";
    out << std::fixed << std::setprecision(4);
    for (const AblationRow& r : rows)
        out << std::left << std::setw(16) << r.variant << std::right
            << std::setw(10) << r.clean_f1 << std::setw(10) << r.typo_mean
            << std::setw(10) << r.typo_std << std::setw(12) << r.lex_params
            << "\n";
    return out.str();
}

}  // namespace lea::harness
