#pragma once

// Report emission: machine-readable JSON and aligned text tables for
// experiments. Aggregate statistics are always recomputable from the
// per-seed entries they summarize.

#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lea/harness.hpp"

namespace lea::report {

inline nlohmann::json to_json(const harness::Experiment& ex) {
    nlohmann::json runs = nlohmann::json::array();
    for (const harness::SeedRun& r : ex.runs) {
        runs.push_back({{"seed", r.seed},
                        {"clean_f1", r.clean_f1},
                        {"replica_f1", r.replica_f1},
                        {"typo_mean", r.typo_mean},
                        {"alphas", r.alphas},
                        {"epoch_train_loss", r.progress.epoch_train_loss},
                        {"epoch_val_f1", r.progress.epoch_val_f1},
                        {"best_val_f1", r.progress.best_val_f1},
                        {"best_epoch", r.progress.best_epoch},
                        {"train_seconds", r.train_seconds}});
    }
    return {{"name", ex.name},
            {"config", ex.config_text},
            {"runs", runs},
            {"aggregate",
             {{"clean_mean", ex.clean_mean},
              {"clean_std", ex.clean_std},
              {"typo_mean", ex.typo_mean},
              {"typo_std", ex.typo_std}}},
            {"seconds", ex.seconds}};
}

inline std::string to_text(const harness::Experiment& ex) {
    std::ostringstream out;
    out << "experiment: " << ex.name << "\n";
    out << std::left << std::setw(8) << "seed" << std::right << std::setw(10)
        << "clean_f1" << std::setw(10) << "typo_f1" << std::setw(10)
        << "best_val" << std::setw(11) << "best_epoch" << std::setw(10)
        << "seconds" << "\n";
    out << std::fixed << std::setprecision(4);
    for (const harness::SeedRun& r : ex.runs)
        out << std::left << std::setw(8) << r.seed << std::right
            << std::setw(10) << r.clean_f1 << std::setw(10) << r.typo_mean
            << std::setw(10) << r.progress.best_val_f1 << std::setw(11)
            << r.progress.best_epoch << std::setw(10) << r.train_seconds
            << "\n";
    out << "aggregate: clean " << ex.clean_mean << " +/- " << ex.clean_std
        << ", typo " << ex.typo_mean << " +/- " << ex.typo_std << "\n";
    return out.str();
}

}  // namespace lea::report
