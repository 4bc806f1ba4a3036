#pragma once

// Run configuration: an INI-style file with sections [data], [rule],
// [network], [train], [output]. Every key has a default; unknown sections or
// keys are hard errors. Flag overrides are applied by the commands after
// loading; the fully resolved config is echoed into each output directory.

#include <egm/nn/network.hpp>
#include <egm/nn/train.hpp>
#include <egm/rules.hpp>
#include <egm/synth.hpp>

#include <cstdint>
#include <string>

namespace egm::cli {

struct RunConfig {
    // [data]
    std::string train_path = "train.jsonl";
    std::string validation_path = "val.jsonl";
    std::string test_path = "test.jsonl";
    uint64_t seed = 1337;
    synth::GeneratorConfig gen; // generator knobs for `synth`
    double annotator_disagreement = 0.0;

    // [rule]
    rules::RuleParams rule;

    // [network]
    nn::NetworkConfig net;

    // [train]
    nn::TrainConfig train;

    // [output]
    std::string out_dir = "out";
    std::string formats = "text,csv,json";

    bool seed_from_file = false; // whether the file's [data] section set a seed
};

// Parse the file (empty path → all defaults). Throws ConfigError naming the
// offending key/section/value, IoError when the file cannot be read.
RunConfig load_run_config(const std::string& path);

// Resolve the effective seed with precedence flag > config file >
// EGM_TRIAGE_SEED > built-in default. `flag_seed` < 0 means no flag given.
uint64_t resolve_seed(const RunConfig& cfg, long long flag_seed);

// Serialization of the resolved config (INI text, version header included).
std::string render_run_config(const RunConfig& cfg);

// Write render_run_config + version marker into `dir` (created if needed).
void echo_config(const RunConfig& cfg, const std::string& dir);

} // namespace egm::cli
