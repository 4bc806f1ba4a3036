#pragma once

#include <array>
#include <cstdint>

#include "egm/rng.hpp"
#include "egm/signal.hpp"

namespace egm::synth {

struct GeneratorConfig {
    uint64_t seed = 1337;
    int n_patients = 9;
    int signals_per_patient = 160;
    double cycle_length_mean_ms = 606.0;
    double cycle_length_sd_ms = 227.0;
    double duration_ms = 4000.0;
    double noise_sd = 0.02; // fraction of the activation peak amplitude
    // Relative class weights (Normal, Abnormal, Unclassified).
    std::array<double, 3> class_mix = {326.0, 215.0, 279.0};

    void validate() const; // throws InvalidConfig
};

// Per-patient draw: one cycle length shared by all of the patient's signals,
// plus morphology parameters that make patients look different from each other.
struct PatientProfile {
    std::string patient_id;
    double cycle_length_ms = 600.0;
    double amplitude_scale = 1.0; // main activation deflection, in mV
    double spike_width_ms = 30.0; // normal-class deflection complex width
    double polarity = 1.0;        // dominant lobe sign
};

PatientProfile make_profile(const std::string& patient_id, const GeneratorConfig& cfg, Rng& rng);

// The three class morphologies. All are deterministic functions of (profile,
// cfg, rng state) and are constructed so that, at noise_sd = 0, the rule
// classifier with default RuleParams reproduces the generating class exactly.
EgmSignal gen_normal(const PatientProfile& profile, const GeneratorConfig& cfg, Rng& rng);
EgmSignal gen_abnormal(const PatientProfile& profile, const GeneratorConfig& cfg, Rng& rng);
EgmSignal gen_unclassified(const PatientProfile& profile, const GeneratorConfig& cfg, Rng& rng);

// Full dataset: n_patients profiles, signals_per_patient signals each with
// class drawn from class_mix, ground-truth labels attached, and a patient-level
// split assignment (last two patients are validation and test, the rest train).
// Per-signal RNG streams are derived from (seed, patient index, signal index),
// so generation order cannot change the output.
Dataset gen_dataset(const GeneratorConfig& cfg);

// Attaches 3 simulated annotator labels: each reports the true label with
// probability 1 - disagreement_prob, otherwise one of the other two labels
// uniformly. The record's `label` is set to the unanimous value, or cleared
// when the annotators disagree.
LabeledSignal simulate_annotators(const LabeledSignal& rec, double disagreement_prob, Rng& rng);

} // namespace egm::synth
