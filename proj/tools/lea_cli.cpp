#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lea/checkpoint.hpp"
#include "lea/config.hpp"
#include "lea/data.hpp"
#include "lea/errors.hpp"
#include "lea/harness.hpp"
#include "lea/model.hpp"
#include "lea/noise.hpp"
#include "lea/report.hpp"

namespace {

// --config file plus --set key=value overrides, shared by most
// subcommands.
struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> sets;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "Config file (key = value lines)");
        cmd->add_option("--set", sets,
                        "Override a config key, e.g. --set lea.d_l=16");
    }

    lea::config::RunConfig build() const {
        lea::config::RunConfig cfg;
        if (!config_path.empty()) lea::config::apply_file(cfg, config_path);
        lea::config::apply_overrides(cfg, sets);
        return cfg;
    }
};

// Dataset source: TSV files or the synthetic corpus generator.
struct DataArgs {
    std::string train_tsv, val_tsv, test_tsv;
    std::size_t synth_pairs = 0;
    std::uint64_t synth_seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--train-tsv", train_tsv, "Training pairs (TSV)");
        cmd->add_option("--val-tsv", val_tsv, "Validation pairs (TSV)");
        cmd->add_option("--test-tsv", test_tsv, "Test pairs (TSV)");
        cmd->add_option("--synth", synth_pairs,
                        "Generate a synthetic corpus with this many "
                        "training pairs instead of reading TSVs");
        cmd->add_option("--synth-seed", synth_seed,
                        "Seed for the synthetic corpus");
    }

    lea::data::SynthCorpus load() const {
        if (synth_pairs > 0) {
            if (!train_tsv.empty() || !val_tsv.empty() || !test_tsv.empty())
                throw lea::ConfigError("pass either --synth or TSV paths, "
                                       "not both");
            lea::data::SynthSpec spec;
            spec.n_pairs = synth_pairs;
            spec.seed = synth_seed;
            return lea::data::gen_synthetic(spec);
        }
        lea::data::SynthCorpus c;
        if (train_tsv.empty() && test_tsv.empty())
            throw lea::ConfigError(
                "no data: pass --synth N or --train-tsv/--test-tsv paths");
        if (!train_tsv.empty()) c.train = lea::data::load_tsv(train_tsv);
        if (!val_tsv.empty()) c.val = lea::data::load_tsv(val_tsv);
        if (!test_tsv.empty()) c.test = lea::data::load_tsv(test_tsv);
        return c;
    }
};

lea::tokenizer::Vocab build_vocab(const lea::data::PairDataset& train,
                                  std::size_t budget) {
    std::vector<std::string> texts;
    texts.reserve(2 * train.size());
    for (const auto& r : train.records) {
        texts.push_back(r.left);
        texts.push_back(r.right);
    }
    return lea::tokenizer::train_vocab(texts, budget);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw lea::ConfigError("cannot open '" + path + "' for writing");
    out << text;
}

// ---------------------------------------------------------------------------

struct CorruptArgs {
    std::string input;
    std::string out_dir = ".";
    int replicas = 3;
    std::uint64_t seed = 0;
    double p_word = 0.20;
    double p_sentence = 1.0;
    int min_word_len = 3;
};

int run_corrupt(const CorruptArgs& args) {
    lea::data::PairDataset ds = lea::data::load_tsv(args.input);
    lea::noise::NoiseConfig cfg;
    cfg.p_word = args.p_word;
    cfg.p_sentence = args.p_sentence;
    cfg.min_word_len_exclusive = static_cast<std::size_t>(args.min_word_len);
    cfg.seed = args.seed;

    std::filesystem::path in_path(args.input);
    std::filesystem::path out_dir(args.out_dir);
    std::filesystem::create_directories(out_dir);
    std::string stem = in_path.stem().string();

    std::vector<lea::data::PairDataset> replicas =
        lea::noise::corrupt_split(ds, cfg,
                                  static_cast<std::size_t>(args.replicas));
    for (std::size_t k = 0; k < replicas.size(); ++k) {
        std::filesystem::path out =
            out_dir / (stem + ".typo." + std::to_string(k) + ".tsv");
        lea::data::save_tsv(out.string(), replicas[k]);
        std::cout << "wrote " << out.string() << " ("
                  << replicas[k].records.size() << " pairs)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    ConfigArgs config;
    DataArgs data;
    std::size_t vocab_budget = 2000;
    std::string out_ckpt = "model.ckpt";
    std::string report_json;
};

int run_train(const TrainArgs& args) {
    lea::config::RunConfig cfg = args.config.build();
    lea::data::SynthCorpus corpus = args.data.load();
    if (corpus.val.size() == 0)
        throw lea::ConfigError("training needs a validation split "
                               "(--val-tsv or --synth)");
    lea::tokenizer::Vocab vocab = build_vocab(corpus.train, args.vocab_budget);

    lea::harness::TrainOutput out =
        lea::harness::train_model(cfg, corpus.train, corpus.val, vocab);
    lea::checkpoint::save_file(args.out_ckpt, out.model, vocab);
    std::cout << "wrote " << args.out_ckpt << "\n";

    lea::harness::Experiment ex;
    ex.name = "train";
    ex.config_text = lea::config::to_text(cfg);
    lea::harness::SeedRun run;
    run.seed = cfg.train.seed;
    if (corpus.test.size() > 0) {
        lea::harness::EvalResult ev = lea::harness::evaluate_model(
            out.model, vocab, corpus.test, 0.2, 3, cfg.train.seed);
        run.clean_f1 = ev.clean_f1;
        run.replica_f1 = ev.replica_f1;
        run.typo_mean = ev.typo_mean;
        ex.clean_mean = ev.clean_f1;
        ex.typo_mean = ev.typo_mean;
        ex.typo_std = ev.typo_std;
    }
    const std::size_t n_lea = out.model.cfg.effective_lea_layers().size();
    for (std::size_t i = 0; i < n_lea; ++i)
        run.alphas.push_back(out.model.alpha.value(i));
    run.progress = out.progress;
    run.train_seconds = out.seconds;
    ex.runs.push_back(run);
    ex.seconds = out.seconds;

    std::cout << lea::report::to_text(ex);
    if (!args.report_json.empty()) {
        write_text(args.report_json, lea::report::to_json(ex).dump(2) + "\n");
        std::cout << "wrote " << args.report_json << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    ConfigArgs config;
    DataArgs data;
    std::string ckpt;
    double p_word = 0.2;
    std::size_t replicas = 3;
    std::uint64_t noise_seed = 0;
    std::string report_json;
};

int run_eval(const EvalArgs& args) {
    lea::checkpoint::Checkpoint ck = lea::checkpoint::load_file(args.ckpt);
    if (!args.config.config_path.empty() || !args.config.sets.empty())
        lea::checkpoint::require_matching_model(ck, args.config.build());
    lea::model::Model m = lea::checkpoint::model_from(ck);
    lea::tokenizer::Vocab vocab = lea::checkpoint::vocab_from(ck);

    lea::data::SynthCorpus corpus = args.data.load();
    if (corpus.test.size() == 0)
        throw lea::ConfigError("eval needs a test split (--test-tsv or "
                               "--synth)");
    lea::harness::EvalResult ev = lea::harness::evaluate_model(
        m, vocab, corpus.test, args.p_word, args.replicas, args.noise_seed);

    std::cout << "clean_f1 " << ev.clean_f1 << "\n";
    for (std::size_t k = 0; k < ev.replica_f1.size(); ++k)
        std::cout << "replica_" << k << " " << ev.replica_f1[k] << "\n";
    std::cout << "typo_mean " << ev.typo_mean << "\ntypo_std " << ev.typo_std
              << "\n";
    if (!args.report_json.empty()) {
        nlohmann::json j = {{"checkpoint", args.ckpt},
                            {"p_word", args.p_word},
                            {"clean_f1", ev.clean_f1},
                            {"replica_f1", ev.replica_f1},
                            {"typo_mean", ev.typo_mean},
                            {"typo_std", ev.typo_std}};
        write_text(args.report_json, j.dump(2) + "\n");
        std::cout << "wrote " << args.report_json << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    DataArgs data;
    std::string ckpt_vanilla, ckpt_da, ckpt_lea;
    std::vector<double> grid;
    std::size_t replicas = 3;
    std::uint64_t noise_seed = 0;
    std::string out_csv = "sweep.csv";
};

int run_sweep(const SweepArgs& args) {
    std::vector<std::pair<std::string, lea::model::Model>> owned;
    lea::tokenizer::Vocab vocab;
    auto add = [&](const std::string& name, const std::string& path) {
        if (path.empty()) return;
        lea::checkpoint::Checkpoint ck = lea::checkpoint::load_file(path);
        owned.emplace_back(name, lea::checkpoint::model_from(ck));
        vocab = lea::checkpoint::vocab_from(ck);
    };
    add("vanilla", args.ckpt_vanilla);
    add("da", args.ckpt_da);
    add("lea", args.ckpt_lea);
    if (owned.empty())
        throw lea::ConfigError("sweep needs at least one checkpoint");

    lea::data::SynthCorpus corpus = args.data.load();
    if (corpus.test.size() == 0)
        throw lea::ConfigError("sweep needs a test split");

    std::vector<std::pair<std::string, lea::model::Model*>> models;
    for (auto& [name, m] : owned) models.emplace_back(name, &m);
    const std::vector<double>& grid =
        args.grid.empty() ? lea::harness::default_sweep_grid() : args.grid;
    std::vector<lea::harness::SweepRow> rows = lea::harness::sweep(
        models, vocab, corpus.test, grid, args.replicas, args.noise_seed);
    std::string csv = lea::harness::sweep_to_csv(rows);
    write_text(args.out_csv, csv);
    std::cout << csv << "wrote " << args.out_csv << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct AblateArgs {
    ConfigArgs config;
    DataArgs data;
    std::string axis = "metric";
    std::size_t vocab_budget = 2000;
    double p_word = 0.2;
    std::size_t replicas = 3;
    std::uint64_t noise_seed = 0;
    std::string out_path;
};

int run_ablate(const AblateArgs& args) {
    lea::config::RunConfig cfg = args.config.build();
    cfg.model.lea_enabled = true;  // ablations vary the lexical bias itself
    lea::data::SynthCorpus corpus = args.data.load();
    if (corpus.val.size() == 0 || corpus.test.size() == 0)
        throw lea::ConfigError("ablate needs val and test splits");
    lea::tokenizer::Vocab vocab = build_vocab(corpus.train, args.vocab_budget);

    std::vector<lea::harness::AblationRow> rows = lea::harness::ablate(
        cfg, args.axis, corpus.train, corpus.val, corpus.test, vocab,
        args.p_word, args.replicas, args.noise_seed);
    std::string table = lea::harness::ablation_table(args.axis, rows);
    std::cout << table;
    if (!args.out_path.empty()) {
        write_text(args.out_path, table);
        std::cout << "wrote " << args.out_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
    ConfigArgs config;
    DataArgs data;
    std::size_t vocab_budget = 2000;
    std::size_t batch = 2;
    std::size_t coords = 200;
    double step = 1e-5;
    double tol = 1e-4;
    std::uint64_t sample_seed = 7;
};

int run_gradcheck(const GradcheckArgs& args) {
    lea::config::RunConfig cfg = args.config.build();
    lea::data::SynthCorpus corpus = args.data.load();
    lea::tokenizer::Vocab vocab = build_vocab(corpus.train, args.vocab_budget);

    lea::model::ModelConfig mc = cfg.model;
    mc.vocab_size = vocab.size();
    mc.validate();
    lea::model::Model m = lea::model::init_model(mc, cfg.train.seed);

    std::vector<lea::tokenizer::TokenizedPair> batch;
    std::vector<int> labels;
    for (std::size_t i = 0; i < args.batch && i < corpus.train.size(); ++i) {
        const auto& r = corpus.train.records[i];
        batch.push_back(
            lea::tokenizer::encode_pair(r.left, r.right, vocab, mc.max_len));
        labels.push_back(r.label);
    }
    if (batch.empty()) throw lea::ConfigError("gradcheck: no training pairs");
    lea::model::calibrate_alpha(m, batch);

    std::vector<lea::numeric::Param*> params;
    for (auto& p : m.params) params.push_back(&p);
    auto build = [&](lea::numeric::Tape& t) {
        lea::numeric::Tape::Var total{};
        for (std::size_t k = 0; k < batch.size(); ++k) {
            lea::model::ForwardOptions fo;
            fo.unit = k;
            auto l = lea::model::loss_ce(
                t, lea::model::forward_pair(t, m, batch[k], fo), labels[k]);
            total = k == 0 ? l : t.add(total, l);
        }
        return t.scalar_scale(total, 1.0 / static_cast<double>(batch.size()));
    };
    lea::numeric::GradCheckReport rep = lea::numeric::gradient_check(
        params,
        [&] {
            lea::numeric::Tape t;
            return t.val(build(t)).v[0];
        },
        [&] {
            lea::numeric::Tape t;
            for (auto* p : params) p->zero_grad();
            t.backward(build(t));
        },
        args.step, args.coords, args.sample_seed);

    std::cout << "coords_checked " << rep.coords_checked << "\n"
              << "tensors_covered " << rep.tensors_covered << " of "
              << params.size() << "\n"
              << "max_rel_err " << rep.max_rel_err << "\n"
              << "worst " << rep.worst_param << "[" << rep.worst_index
              << "] analytic " << rep.worst_analytic << " numeric "
              << rep.worst_numeric << "\n";
    if (rep.max_rel_err > args.tol) {
        std::cout << "FAIL (tolerance " << args.tol << ")\n";
        return 1;
    }
    std::cout << "PASS (tolerance " << args.tol << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct DescribeArgs {
    ConfigArgs config;
    bool keyboard = false;
};

int run_describe(const DescribeArgs& args) {
    lea::config::RunConfig cfg = args.config.build();
    lea::model::ModelConfig mc = cfg.model;
    if (mc.vocab_size == 0) mc.vocab_size = 2000;  // nominal, for counting
    std::cout << lea::model::describe(mc);
    if (args.keyboard) {
        std::cout << "\nkeyboard adjacency (qwerty letter rows):\n";
        for (char c = 'a'; c <= 'z'; ++c)
            std::cout << "  " << c << " -> "
                      << lea::noise::keyboard_neighbors(
                             static_cast<char32_t>(c))
                      << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lea: lexical-attention experiments for sentence-pair "
                 "matching"};
    app.require_subcommand(1);

    CorruptArgs corrupt_args;
    CLI::App* corrupt = app.add_subcommand(
        "corrupt", "Write typo-corrupted replicas of a TSV pair dataset");
    corrupt->add_option("input", corrupt_args.input, "Input TSV file")
        ->required();
    corrupt->add_option("--out-dir", corrupt_args.out_dir, "Output directory");
    corrupt->add_option("--replicas", corrupt_args.replicas, "Replica count")
        ->check(CLI::PositiveNumber);
    corrupt->add_option("--seed", corrupt_args.seed, "Base RNG seed");
    corrupt->add_option("--p-word", corrupt_args.p_word,
                        "Per-word corruption probability");
    corrupt->add_option("--p-sentence", corrupt_args.p_sentence,
                        "Per-sentence processing probability");
    corrupt->add_option("--min-word-len", corrupt_args.min_word_len,
                        "Words must be longer than this to be corrupted");

    TrainArgs train_args;
    CLI::App* train =
        app.add_subcommand("train", "Train a model and write a checkpoint");
    train_args.config.attach(train);
    train_args.data.attach(train);
    train->add_option("--vocab-budget", train_args.vocab_budget,
                      "Vocabulary size budget");
    train->add_option("--out", train_args.out_ckpt, "Checkpoint output path");
    train->add_option("--report-json", train_args.report_json,
                      "Write a JSON report here");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand(
        "eval", "Evaluate a checkpoint on clean and corrupted test splits");
    eval_args.config.attach(eval);
    eval_args.data.attach(eval);
    eval->add_option("--ckpt", eval_args.ckpt, "Checkpoint path")->required();
    eval->add_option("--p-word", eval_args.p_word,
                     "Corruption rate for typo replicas");
    eval->add_option("--replicas", eval_args.replicas, "Typo replica count");
    eval->add_option("--noise-seed", eval_args.noise_seed,
                     "Base seed for corruption");
    eval->add_option("--report-json", eval_args.report_json,
                     "Write a JSON report here");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Evaluate checkpoints across a p_word grid, emit CSV");
    sweep_args.data.attach(sweep);
    sweep->add_option("--vanilla", sweep_args.ckpt_vanilla,
                      "Vanilla model checkpoint");
    sweep->add_option("--da", sweep_args.ckpt_da,
                      "Augmentation-trained checkpoint");
    sweep->add_option("--lea", sweep_args.ckpt_lea,
                      "Lexical-bias checkpoint");
    sweep
        ->add_option("--grid", sweep_args.grid,
                     "p_word grid, comma separated (default 0,0.1,...,0.5)")
        ->delimiter(',');
    sweep->add_option("--replicas", sweep_args.replicas,
                      "Corruption replicas per grid point");
    sweep->add_option("--noise-seed", sweep_args.noise_seed,
                      "Base corruption seed");
    sweep->add_option("--out", sweep_args.out_csv, "CSV output path");

    AblateArgs ablate_args;
    CLI::App* ablate = app.add_subcommand(
        "ablate", "Train and evaluate every variant along one design axis");
    ablate_args.config.attach(ablate);
    ablate_args.data.attach(ablate);
    ablate
        ->add_option("--axis", ablate_args.axis,
                     "metric | sharing | layers | embedding")
        ->check(CLI::IsMember({"metric", "sharing", "layers", "embedding"}));
    ablate->add_option("--vocab-budget", ablate_args.vocab_budget,
                       "Vocabulary size budget");
    ablate->add_option("--p-word", ablate_args.p_word,
                       "Corruption rate for typo evaluation");
    ablate->add_option("--replicas", ablate_args.replicas,
                       "Typo replica count");
    ablate->add_option("--noise-seed", ablate_args.noise_seed,
                       "Base corruption seed");
    ablate->add_option("--out", ablate_args.out_path,
                       "Write the table here too");

    GradcheckArgs grad_args;
    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "Verify analytic gradients against finite differences");
    grad_args.config.attach(gradcheck);
    grad_args.data.attach(gradcheck);
    gradcheck->add_option("--vocab-budget", grad_args.vocab_budget,
                          "Vocabulary size budget");
    gradcheck->add_option("--batch", grad_args.batch,
                          "Training pairs in the check batch");
    gradcheck->add_option("--coords", grad_args.coords,
                          "Minimum sampled coordinates");
    gradcheck->add_option("--step", grad_args.step,
                          "Central-difference step");
    gradcheck->add_option("--tol", grad_args.tol,
                          "Maximum relative error to pass");
    gradcheck->add_option("--sample-seed", grad_args.sample_seed,
                          "Coordinate sampling seed");

    DescribeArgs describe_args;
    CLI::App* describe = app.add_subcommand(
        "describe", "Print the architecture and parameter-count report");
    describe_args.config.attach(describe);
    describe->add_flag("--keyboard", describe_args.keyboard,
                       "Also print the QWERTY adjacency table used for "
                       "substitution typos");

    CLI11_PARSE(app, argc, argv);

    try {
        if (corrupt->parsed()) return run_corrupt(corrupt_args);
        if (train->parsed()) return run_train(train_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (ablate->parsed()) return run_ablate(ablate_args);
        if (gradcheck->parsed()) return run_gradcheck(grad_args);
        if (describe->parsed()) return run_describe(describe_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
