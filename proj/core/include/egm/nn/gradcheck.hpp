#pragma once

// Finite-difference validation of the backward passes. Builds a miniature
// double-precision network, compares the analytic gradient of the softmax
// cross-entropy loss against central differences on a sample of entries per
// parameter tensor, and reports the worst relative error.

#include <egm/nn/network.hpp>
#include <egm/rng.hpp>

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace egm::nn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    double loss = 0.0;
    bool loss_pure = false; // analytic loss == an independent forward recomputation
};

// Test hook: invoked once per trainable tensor after the analytic backward
// pass, so a suite can deliberately corrupt a gradient and assert the check
// catches it.
using GradMutator = std::function<void(const std::string& name, TensorD& grad)>;

inline GradCheckReport gradient_check(NetworkConfig cfg, uint64_t seed,
                                      int entries_per_tensor = 20,
                                      const GradMutator& mutate = {}) {
    // Stochastic layers are disabled; batch norm stays in train mode so its
    // batch-statistics backward is exercised.
    cfg.spatial_dropout_rate = 0.0;
    cfg.dropout_rate = 0.0;
    cfg.validate();

    Rng rng(seed);
    NetworkD net(cfg, rng);

    const int B = 2;
    TensorD x({B, cfg.input_length, 1});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    TensorD x_fft({B, cfg.input_length, 1});
    if (cfg.fft_branch)
        for (auto& v : x_fft.data) v = rng.uniform(0.0, 2.0);
    std::vector<int> labels(B);
    for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.n_classes)));

    const TensorD* fft_ptr = cfg.fft_branch ? &x_fft : nullptr;
    auto loss_of = [&]() {
        TensorD lg = net.logits(x, fft_ptr, Mode::Train, nullptr);
        return softmax_cross_entropy(lg, labels).first;
    };

    // Analytic pass.
    TensorD lg = net.logits(x, fft_ptr, Mode::Train, nullptr);
    auto [loss, dlogits] = softmax_cross_entropy(lg, labels);
    net.zero_grads();
    net.backward(dlogits);
    if (mutate)
        for (auto& p : net.params())
            if (p.trainable) mutate(p.name, *p.grad);

    GradCheckReport rep;
    rep.loss = loss;
    rep.loss_pure = (loss_of() == loss);

    const double h = 1e-5;
    for (auto& p : net.params()) {
        if (!p.trainable) continue;
        const size_t n = p.value->numel();
        std::vector<size_t> picks;
        if (n <= static_cast<size_t>(entries_per_tensor)) {
            picks.resize(n);
            for (size_t i = 0; i < n; ++i) picks[i] = i;
        } else {
            for (int i = 0; i < entries_per_tensor; ++i)
                picks.push_back(static_cast<size_t>(rng.below(n)));
        }
        for (size_t idx : picks) {
            double& w = p.value->data[idx];
            const double saved = w;
            w = saved + h;
            const double lp = loss_of();
            w = saved - h;
            const double lm = loss_of();
            w = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double analytic = p.grad->data[idx];
            // The denominator floor makes the comparison absolute (at 1e-10)
            // for near-zero gradients. Several parameters here are *exactly*
            // invariant -- a conv bias feeding straight into train-mode batch
            // norm shifts the batch mean and cancels -- so their true gradient
            // is 0 while the finite difference returns +-1 ulp of the loss
            // (~1e-11); a tighter floor would flag that rounding noise.
            const double denom =
                std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_param = p.name;
            }
        }
    }
    return rep;
}

// The miniature geometry used by the CLI gradient check and the test suite.
inline NetworkConfig gradcheck_mini_config(bool tail_lstm, bool fft_branch) {
    NetworkConfig cfg;
    cfg.n_stages = 1;
    cfg.tail_lstm = tail_lstm;
    cfg.fft_branch = fft_branch;
    cfg.kernel_size = 4;
    cfg.base_filters = 8;
    cfg.lstm_units = 4;
    cfg.lstm_layers = 3;
    cfg.hidden_dense = 8;
    cfg.input_length = 32;
    return cfg;
}

} // namespace egm::nn
