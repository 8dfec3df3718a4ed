#pragma once

// Learning-rate scheduling and AdamW for the training harness.
//
// The schedule is a linear warm-up from 0 to the base rate followed by
// cosine decay to 0.  AdamW applies decoupled weight decay: the decay
// multiplies the parameter directly and is not folded into the gradient,
// so a zero-gradient step shrinks a parameter by exactly (1 - lr * wd).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lea/errors.hpp"
#include "lea/tensor.hpp"

namespace lea::optim {

// Piecewise schedule: linear 0 -> base_lr over [0, warmup_steps), then
// base_lr * 0.5 * (1 + cos(pi * (step - warmup) / (total - warmup))).
// Continuous at the junction (both branches give base_lr at step ==
// warmup_steps) and non-increasing afterward.
inline double lr_schedule(std::size_t step, std::size_t total_steps,
                          std::size_t warmup_steps, double base_lr) {
    if (total_steps == 0 || step >= total_steps) {
        throw ContractViolation("lr_schedule: step " + std::to_string(step) +
                                " out of range for total_steps " +
                                std::to_string(total_steps));
    }
    if (warmup_steps >= total_steps) {
        throw ContractViolation(
            "lr_schedule: warmup_steps " + std::to_string(warmup_steps) +
            " must be smaller than total_steps " + std::to_string(total_steps));
    }
    if (step < warmup_steps) {
        return base_lr * static_cast<double>(step) /
               static_cast<double>(warmup_steps);
    }
    const double progress = static_cast<double>(step - warmup_steps) /
                            static_cast<double>(total_steps - warmup_steps);
    constexpr double kPi = 3.14159265358979323846;
    return base_lr * 0.5 * (1.0 + std::cos(kPi * progress));
}

// First and second moment estimates, lazily sized on the first step and
// shape-checked on every later one.
struct AdamWState {
    std::size_t t = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// One AdamW update over `params` using the gradients stored in each
// Param::grad.  Decoupled decay runs first (theta *= 1 - lr*wd), then the
// bias-corrected Adam step.  Gradients are left untouched; the caller
// decides when to zero them.
inline void adamw_step(std::vector<numeric::Param*>& params, AdamWState& state,
                       double lr, double weight_decay, double beta1 = 0.9,
                       double beta2 = 0.999, double eps = 1e-8) {
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i]->value.numel(), 0.0);
            state.v[i].assign(params[i]->value.numel(), 0.0);
        }
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ContractViolation(
            "adamw_step: optimizer state tracks " +
            std::to_string(state.m.size()) + " tensors but got " +
            std::to_string(params.size()) + " parameters");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        numeric::Param& p = *params[i];
        const std::size_t n = p.value.numel();
        if (state.m[i].size() != n) {
            throw ContractViolation(
                "adamw_step: state tensor " + std::to_string(i) + " has " +
                std::to_string(state.m[i].size()) + " entries but parameter " +
                p.name + " has " + std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double g = p.grad.v[j];
            p.value.v[j] *= 1.0 - lr * weight_decay;
            state.m[i][j] = beta1 * state.m[i][j] + (1.0 - beta1) * g;
            state.v[i][j] = beta2 * state.v[i][j] + (1.0 - beta2) * g * g;
            const double mhat = state.m[i][j] / bc1;
            const double vhat = state.v[i][j] / bc2;
            p.value.v[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

}  // namespace lea::optim
