#pragma once

// Training protocol: per epoch, rebuild a class-balanced sample set by drawing
// every class with replacement up to the majority-class count, take a fresh
// random crop of each drawn signal, normalize, shuffle, and run minibatch
// Adam. After each epoch the validation split (center-cropped, eval mode) is
// scored and the best-validation parameters are retained (ties keep the
// earlier epoch).

#include <egm/nn/checkpoint.hpp>
#include <egm/signal.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace egm::nn {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;
    uint64_t seed = 1337;
    double crop_window_ms = 1500.0;
    bool oversample = true;

    void validate() const {
        if (epochs < 1) throw InvalidConfig("epochs must be at least 1");
        if (batch_size < 1) throw InvalidConfig("batch_size must be at least 1");
        if (!(crop_window_ms > 0.0)) throw InvalidConfig("crop_window_ms must be positive");
    }
};

struct EpochLog {
    int epoch = 0; // 1-based
    std::array<int64_t, kNumClasses> class_counts{};
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct FitResult {
    CheckpointData best;
    std::vector<EpochLog> log;
};

// Throws UnlabeledData when a record lacks a label, SignalTooShort when a
// signal cannot fit the crop window, NonFiniteLoss when training diverges.
FitResult fit(const std::vector<LabeledSignal>& train,
              const std::vector<LabeledSignal>& val, const NetworkConfig& net_cfg,
              const TrainConfig& train_cfg);

// Eval-mode class probabilities for each signal (center crop + normalize).
std::vector<std::array<float, kNumClasses>> predict_probs(
    const CheckpointData& ckpt, const std::vector<EgmSignal>& signals);

// Argmax labels (ties resolved to the lowest class index).
std::vector<Label> predict(const CheckpointData& ckpt,
                           const std::vector<EgmSignal>& signals);

// Per-epoch CSV with header epoch,train_loss,train_acc,val_acc.
void write_epoch_log_csv(const std::vector<EpochLog>& log, const std::string& path);

} // namespace egm::nn
