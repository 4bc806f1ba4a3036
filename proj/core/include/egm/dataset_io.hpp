#pragma once

#include <string>
#include <vector>

#include "egm/signal.hpp"

namespace egm {

// Reads a JSON Lines dataset. One object per line with fields: signal_id,
// patient_id, sampling_rate_hz, cycle_length_ms, samples, label
// ("normal" | "abnormal" | "unclassified" | null), annotator_labels
// (array of the same strings | null). Signals whose sampling_rate_hz differs
// from the canonical 1 kHz are resampled with linear interpolation.
// Throws IoError if the file cannot be opened, DataError (with line number) on
// malformed records.
std::vector<LabeledSignal> read_jsonl(const std::string& path);

// Inverse of read_jsonl. Deterministic output: same records → identical bytes.
void write_jsonl(const std::string& path, const std::vector<LabeledSignal>& records);

} // namespace egm
