#pragma once

#include <cstdint>
#include <vector>

#include "egm/rng.hpp"
#include "egm/signal.hpp"

namespace egm::rules {

struct RuleParams {
    double window_frac = 0.40;                 // peak-search window, fraction of CL
    int padding_samples = 45;                  // added to the window width
    double unclassified_threshold_frac = 0.15; // region rule, fraction of global peak
    double abnormal_threshold_frac = 0.10;
    double peak_floor_frac = 0.05; // candidate peaks below this are rejected
    int min_peaks = 3;             // fewer detected peaks → Unclassified
    bool normalize_first = true;   // classification is scale-invariant either way

    // Window stride as a fraction of the cycle length: striding by 1 - w/2
    // leaves the far window edge exactly one cycle from the anchor peak.
    double stride_frac() const { return 1.0 - window_frac / 2.0; }

    void validate() const; // throws InvalidConfig
};

struct Peak {
    int index = 0;
    double amplitude = 0.0; // rectified amplitude
};

// Region between two consecutive accepted activation peaks. The interior is the
// sample range strictly between the two peak indices.
struct Region {
    Peak left;
    Peak right;
};

// Index and amplitude of the maximum rectified sample (earliest on ties).
// Throws AllZeroSignal when the maximum is 0.
Peak find_global_peak(const std::vector<double>& rectified);

// Windowed activation-peak search. Starting from the global peak the search
// walks outward in both directions in steps of stride_frac * CL; each window is
// W = round(window_frac * CL) + padding_samples wide, centered on the step
// position, and the window's rectified argmax is accepted as a peak when it
// reaches peak_floor_frac of the global amplitude. An accepted peak re-anchors
// the walk (the next window is one stride from it); a rejected window advances
// the walk position without accepting anything. Throws InvalidCycleLength when
// cycle_length_samples <= W.
std::vector<Peak> find_activation_peaks(const std::vector<double>& rectified,
                                        double cycle_length_samples,
                                        const RuleParams& params);

// n peaks → n-1 regions between consecutive peaks (empty for n < 2).
std::vector<Region> segment_regions(const std::vector<Peak>& peaks);

// Amplitudes of the two largest local maxima strictly inside the region
// (0 when fewer exist). Edge samples of the interior are compared against
// their true signal neighbors, i.e. the bounding peak samples; a plateau
// counts once, at its first sample.
std::pair<double, double> interior_peak_amplitudes(const std::vector<double>& rectified,
                                                   const Region& region);

// Region rule: any interior peak above the unclassified threshold →
// Unclassified; both below the abnormal threshold → Normal; else Abnormal.
// Thresholds are fractions of the global peak amplitude.
Label classify_region(const std::vector<double>& rectified, const Region& region,
                      double global_amplitude, const RuleParams& params);

// Signal rule, applied to the per-region labels in order:
//   1. peak_count < min_peaks, or any region Unclassified → Unclassified
//   2. all regions Normal → Normal
//   3. all regions Abnormal → Abnormal
//   4. strict alternation of Normal/Abnormal (either phase) → Normal
//   5. anything else → Abnormal
// Throws InconsistentInput when region_labels.size() doesn't match peak_count.
Label aggregate(int peak_count, const std::vector<Label>& region_labels,
                const RuleParams& params);

// Full pipeline: (optional normalize) → rectify → peak search → regions →
// aggregate. An all-zero signal is Unclassified.
Label classify(const EgmSignal& signal, const RuleParams& params);

// Same pipeline starting from an already rectified (and optionally normalized)
// signal; lets grid search reuse the per-signal preprocessing.
Label classify_rectified(const std::vector<double>& rectified, double cycle_length_samples,
                         const RuleParams& params);

struct GridSpec {
    std::vector<double> window_fracs = {0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
    std::vector<double> unclassified_fracs = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    double abnormal_step = 0.05; // abnormal threshold runs 0.05 .. unclassified
    std::vector<int> paddings = {0, 15, 30, 45, 60};
};

struct GridPoint {
    RuleParams params;
    double accuracy = 0.0;
    int correct = 0;
    int total = 0;
};

struct GridResult {
    RuleParams best;
    double best_accuracy = 0.0;
    std::vector<GridPoint> table;
};

// Exhaustive search over the grid, scored by pooled accuracy on the given
// labeled records. Ties are broken toward the lexicographically smaller
// (window_frac, unclassified, abnormal, padding) tuple, which is the iteration
// order. Grid dimensions other than the four searched parameters are taken
// from `base` (normalize_first, min_peaks, peak floor). `threads` splits the
// point scoring across worker threads; results are identical for any count.
GridResult grid_search(const std::vector<LabeledSignal>& records, const RuleParams& base,
                       const GridSpec& spec = {}, int threads = 1);

// Accuracy of `params` on labeled records. Throws UnlabeledData if a record
// has no label.
double rule_accuracy(const std::vector<LabeledSignal>& records, const RuleParams& params);

// 2x2 ablation of the preprocessing choices {normalize, raw} x {random
// 1500 ms crop, full signal}, scored on the train+validation pool and on the
// test split. Crops are drawn once per record from `seed`, so both
// normalization rows see identical crop windows.
struct AblationCell {
    bool normalized = false;
    bool cropped = false;
    double train_val_accuracy = 0.0;
    double test_accuracy = 0.0;
};

std::vector<AblationCell> ablation_table(const std::vector<LabeledSignal>& train_val,
                                         const std::vector<LabeledSignal>& test,
                                         const RuleParams& params, int crop_window_samples,
                                         uint64_t seed);

} // namespace egm::rules
