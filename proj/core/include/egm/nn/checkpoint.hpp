#pragma once

// Checkpoint = a directory holding manifest.json plus weights.bin.
// manifest.json: {"format_version":1, "config":{...}, "tensors":[{"name","shape",
// "offset","len"}...], "best_validation_accuracy", "epoch_of_best"} with
// offsets/lengths counted in elements; weights.bin is the concatenation of all
// tensors as little-endian 32-bit floats in manifest order. Round-trips are
// bitwise exact.

#include <egm/nn/network.hpp>

#include <string>
#include <vector>

namespace egm::nn {

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

struct CheckpointData {
    NetworkConfig config;
    double best_validation_accuracy = 0.0;
    int epoch_of_best = 0;
    std::vector<NamedTensor> tensors; // in registry order
};

// Copy every registered tensor (trainable and running stats) out of the net.
CheckpointData snapshot(const NetworkF& net, double best_validation_accuracy,
                        int epoch_of_best);

// Copy checkpoint values into a freshly built net. Throws KeySetMismatch when
// the name/shape sequence does not match the net's registry.
void apply_checkpoint(const CheckpointData& ckpt, NetworkF& net);

// Throws IoError when the directory cannot be written.
void save_checkpoint(const CheckpointData& ckpt, const std::string& dir);

// Throws CorruptCheckpoint / VersionMismatch / KeySetMismatch per the format
// contract; the key set is validated against a network built from the stored
// config.
CheckpointData load_checkpoint(const std::string& dir);

} // namespace egm::nn
