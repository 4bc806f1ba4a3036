#include "egm/rules.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "egm/preprocess.hpp"

namespace egm::rules {

void RuleParams::validate() const {
    if (!(window_frac > 0.0 && window_frac < 1.0))
        throw InvalidConfig("window_frac must be in (0, 1)");
    if (padding_samples < 0) throw InvalidConfig("padding_samples must be >= 0");
    if (!(abnormal_threshold_frac > 0.0))
        throw InvalidConfig("abnormal_threshold_frac must be > 0");
    if (!(abnormal_threshold_frac <= unclassified_threshold_frac))
        throw InvalidConfig("abnormal_threshold_frac must be <= unclassified_threshold_frac");
    if (!(unclassified_threshold_frac < 1.0))
        throw InvalidConfig("unclassified_threshold_frac must be < 1");
    if (!(peak_floor_frac > 0.0 && peak_floor_frac <= abnormal_threshold_frac))
        throw InvalidConfig("peak_floor_frac must be in (0, abnormal_threshold_frac]");
    if (min_peaks < 2) throw InvalidConfig("min_peaks must be >= 2");
}

Peak find_global_peak(const std::vector<double>& rectified) {
    if (rectified.empty()) throw DataError("empty signal");
    int best = 0;
    for (int i = 1; i < static_cast<int>(rectified.size()); ++i) {
        if (rectified[i] > rectified[best]) best = i; // earliest index wins ties
    }
    if (rectified[best] == 0.0) throw AllZeroSignal();
    return Peak{best, rectified[best]};
}

namespace {

// Rectified argmax over [lo, hi] inclusive, earliest index on ties.
int window_argmax(const std::vector<double>& rect, int lo, int hi) {
    int best = lo;
    for (int i = lo + 1; i <= hi; ++i) {
        if (rect[i] > rect[best]) best = i;
    }
    return best;
}

} // namespace

std::vector<Peak> find_activation_peaks(const std::vector<double>& rectified,
                                        double cycle_length_samples, const RuleParams& params) {
    params.validate();
    const int n = static_cast<int>(rectified.size());
    const int window =
        static_cast<int>(std::llround(params.window_frac * cycle_length_samples)) +
        params.padding_samples;
    if (!(cycle_length_samples > window))
        throw InvalidCycleLength("cycle length of " + std::to_string(cycle_length_samples) +
                                 " samples is not larger than the " + std::to_string(window) +
                                 "-sample search window");
    const int stride =
        static_cast<int>(std::llround(params.stride_frac() * cycle_length_samples));
    const int half = window / 2;
    // CL > W guarantees stride > half, i.e. each window lies strictly beyond its
    // anchor and the walk makes progress.
    if (stride <= half) throw InvalidCycleLength("stride does not clear the search window");

    const Peak global = find_global_peak(rectified);
    const double floor_amp = params.peak_floor_frac * global.amplitude;

    std::set<int> accepted = {global.index};
    for (int dir : {+1, -1}) {
        int anchor = global.index;
        while (true) {
            int center = anchor + dir * stride;
            if (center < 0 || center >= n) break;
            int lo = std::max(0, center - half);
            int hi = std::min(n - 1, center + half);
            int cand = window_argmax(rectified, lo, hi);
            if (rectified[cand] >= floor_amp) {
                accepted.insert(cand);
                anchor = cand; // re-anchor the walk on the found peak
            } else {
                anchor = center; // nothing here; keep walking on the grid
            }
        }
    }

    std::vector<Peak> peaks;
    peaks.reserve(accepted.size());
    for (int idx : accepted) peaks.push_back(Peak{idx, rectified[idx]});
    return peaks;
}

std::vector<Region> segment_regions(const std::vector<Peak>& peaks) {
    std::vector<Region> regions;
    if (peaks.size() < 2) return regions;
    regions.reserve(peaks.size() - 1);
    for (size_t i = 0; i + 1 < peaks.size(); ++i)
        regions.push_back(Region{peaks[i], peaks[i + 1]});
    return regions;
}

std::pair<double, double> interior_peak_amplitudes(const std::vector<double>& rectified,
                                                   const Region& region) {
    const int l = region.left.index;
    const int r = region.right.index;
    double p1 = 0.0, p2 = 0.0;
    auto record = [&](double v) {
        if (v > p1) {
            p2 = p1;
            p1 = v;
        } else if (v > p2) {
            p2 = v;
        }
    };
    // A local maximum strictly inside (l, r): rises from its left neighbor and
    // drops after its plateau. Edge samples of the interior are compared
    // against the bounding peak samples themselves, so a bare descending (or
    // ascending) flank of an activation spike produces no interior maxima.
    int i = l + 1;
    while (i < r) {
        if (rectified[i - 1] < rectified[i]) {
            int j = i;
            while (j + 1 < r && rectified[j + 1] == rectified[i]) ++j;
            // j+1 <= r; the sample after the plateau may be the right peak
            if (rectified[j + 1] < rectified[i]) record(rectified[i]);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return {p1, p2};
}

Label classify_region(const std::vector<double>& rectified, const Region& region,
                      double global_amplitude, const RuleParams& params) {
    auto [p1, p2] = interior_peak_amplitudes(rectified, region);
    // p1 >= p2, so "any interior peak above" and "both below" reduce to p1.
    if (p1 > params.unclassified_threshold_frac * global_amplitude) return Label::Unclassified;
    if (p1 < params.abnormal_threshold_frac * global_amplitude) return Label::Normal;
    return Label::Abnormal;
}

Label aggregate(int peak_count, const std::vector<Label>& region_labels,
                const RuleParams& params) {
    if (peak_count >= 2) {
        if (static_cast<int>(region_labels.size()) != peak_count - 1)
            throw InconsistentInput("expected " + std::to_string(peak_count - 1) +
                                    " region labels for " + std::to_string(peak_count) +
                                    " peaks, got " + std::to_string(region_labels.size()));
    } else if (!region_labels.empty()) {
        throw InconsistentInput("region labels present without enough peaks");
    }

    if (peak_count < params.min_peaks) return Label::Unclassified;
    for (Label l : region_labels)
        if (l == Label::Unclassified) return Label::Unclassified;

    bool all_normal = true, all_abnormal = true;
    for (Label l : region_labels) {
        all_normal &= (l == Label::Normal);
        all_abnormal &= (l == Label::Abnormal);
    }
    if (all_normal) return Label::Normal;
    if (all_abnormal) return Label::Abnormal;

    bool alternating = true;
    for (size_t i = 1; i < region_labels.size(); ++i)
        alternating &= (region_labels[i] != region_labels[i - 1]);
    if (alternating) return Label::Normal;
    return Label::Abnormal;
}

Label classify_rectified(const std::vector<double>& rectified, double cycle_length_samples,
                         const RuleParams& params) {
    std::vector<Peak> peaks;
    try {
        peaks = find_activation_peaks(rectified, cycle_length_samples, params);
    } catch (const AllZeroSignal&) {
        return Label::Unclassified;
    }
    if (static_cast<int>(peaks.size()) < params.min_peaks) return Label::Unclassified;

    const double global_amp = find_global_peak(rectified).amplitude;
    std::vector<Label> region_labels;
    for (const Region& region : segment_regions(peaks))
        region_labels.push_back(classify_region(rectified, region, global_amp, params));
    return aggregate(static_cast<int>(peaks.size()), region_labels, params);
}

Label classify(const EgmSignal& signal, const RuleParams& params) {
    params.validate();
    std::vector<double> samples = signal.samples;
    if (params.normalize_first) {
        try {
            samples = normalize(samples);
        } catch (const AllZeroSignal&) {
            return Label::Unclassified;
        }
    }
    return classify_rectified(rectify(samples), signal.cycle_length_samples(), params);
}

double rule_accuracy(const std::vector<LabeledSignal>& records, const RuleParams& params) {
    if (records.empty()) return 0.0;
    int correct = 0;
    for (const auto& rec : records) {
        if (!rec.label)
            throw UnlabeledData("signal '" + rec.signal.signal_id + "' has no label");
        if (classify(rec.signal, params) == *rec.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

GridResult grid_search(const std::vector<LabeledSignal>& records, const RuleParams& base,
                       const GridSpec& spec, int threads) {
    // Preprocessing does not depend on the searched parameters, so rectify (and
    // normalize) once per record.
    std::vector<std::vector<double>> rect;
    std::vector<double> cls;
    std::vector<Label> truth;
    rect.reserve(records.size());
    for (const auto& rec : records) {
        if (!rec.label)
            throw UnlabeledData("signal '" + rec.signal.signal_id + "' has no label");
        std::vector<double> samples = rec.signal.samples;
        bool all_zero = false;
        if (base.normalize_first) {
            try {
                samples = normalize(samples);
            } catch (const AllZeroSignal&) {
                all_zero = true;
            }
        }
        rect.push_back(rectify(samples));
        cls.push_back(all_zero ? -1.0 : rec.signal.cycle_length_samples());
        truth.push_back(*rec.label);
    }

    if (spec.window_fracs.empty() || spec.unclassified_fracs.empty() ||
        spec.paddings.empty() || !(spec.abnormal_step > 0.0))
        throw ::egm::EmptyGrid("grid has no points");

    // Enumerate the candidate points first (in lexicographic tuple order), then
    // score them. Scoring writes each point's own table slot, so splitting the
    // index range across threads cannot change any result.
    std::vector<RuleParams> points;
    for (double wf : spec.window_fracs) {
        for (double uf : spec.unclassified_fracs) {
            const int af_steps = static_cast<int>(std::floor(uf / spec.abnormal_step + 1e-9));
            for (int k = 1; k <= af_steps; ++k) {
                const double af = k * spec.abnormal_step;
                for (int pad : spec.paddings) {
                    RuleParams p = base;
                    p.window_frac = wf;
                    p.unclassified_threshold_frac = uf;
                    p.abnormal_threshold_frac = std::min(af, uf);
                    p.padding_samples = pad;
                    p.peak_floor_frac = std::min(base.peak_floor_frac, p.abnormal_threshold_frac);
                    p.validate();
                    points.push_back(p);
                }
            }
        }
    }
    if (points.empty()) throw ::egm::EmptyGrid("grid thresholds produce no valid points");

    GridResult result;
    result.table.resize(points.size());
    auto score_range = [&](size_t lo, size_t hi) {
        for (size_t n = lo; n < hi; ++n) {
            const RuleParams& p = points[n];
            int correct = 0;
            for (size_t i = 0; i < rect.size(); ++i) {
                Label got = cls[i] < 0.0 ? Label::Unclassified
                                         : classify_rectified(rect[i], cls[i], p);
                if (got == truth[i]) ++correct;
            }
            GridPoint& pt = result.table[n];
            pt.params = p;
            pt.correct = correct;
            pt.total = static_cast<int>(rect.size());
            pt.accuracy = pt.total ? static_cast<double>(correct) / pt.total : 0.0;
        }
    };
    const int n_threads = std::max(1, std::min(threads, static_cast<int>(points.size())));
    if (n_threads == 1) {
        score_range(0, points.size());
    } else {
        std::vector<std::thread> pool;
        const size_t chunk = (points.size() + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const size_t lo = static_cast<size_t>(t) * chunk;
            const size_t hi = std::min(points.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(score_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Strictly-better keeps the first (lexicographically smallest) tuple on
    // ties; scanning the ordered table keeps that rule thread-count-invariant.
    bool have_best = false;
    for (const GridPoint& pt : result.table) {
        if (!have_best || pt.accuracy > result.best_accuracy) {
            have_best = true;
            result.best = pt.params;
            result.best_accuracy = pt.accuracy;
        }
    }
    return result;
}

namespace {

double ablation_accuracy(const std::vector<LabeledSignal>& records,
                         const std::vector<std::vector<double>>& cropped, bool use_crop,
                         bool use_normalize, const RuleParams& base) {
    if (records.empty()) return 0.0;
    RuleParams p = base;
    p.normalize_first = use_normalize;
    int correct = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        EgmSignal sig = records[i].signal;
        if (use_crop) sig.samples = cropped[i];
        if (rules::classify(sig, p) == *records[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::vector<std::vector<double>> crop_all(const std::vector<LabeledSignal>& records,
                                          int window, uint64_t seed) {
    std::vector<std::vector<double>> out;
    out.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        if (!records[i].label)
            throw UnlabeledData("signal '" + records[i].signal.signal_id + "' has no label");
        Rng rng(Rng::mix(seed, i));
        out.push_back(random_crop(records[i].signal.samples, window, rng));
    }
    return out;
}

} // namespace

std::vector<AblationCell> ablation_table(const std::vector<LabeledSignal>& train_val,
                                         const std::vector<LabeledSignal>& test,
                                         const RuleParams& params, int crop_window_samples,
                                         uint64_t seed) {
    // One crop per record, fixed up front, so the normalize/raw rows are scored
    // on identical windows.
    auto crops_tv = crop_all(train_val, crop_window_samples, Rng::mix(seed, 0x7261696e));
    auto crops_te = crop_all(test, crop_window_samples, Rng::mix(seed, 0x74657374));

    std::vector<AblationCell> cells;
    for (bool normalized : {true, false}) {
        for (bool cropped : {false, true}) {
            AblationCell cell;
            cell.normalized = normalized;
            cell.cropped = cropped;
            cell.train_val_accuracy =
                ablation_accuracy(train_val, crops_tv, cropped, normalized, params);
            cell.test_accuracy = ablation_accuracy(test, crops_te, cropped, normalized, params);
            cells.push_back(cell);
        }
    }
    return cells;
}

} // namespace egm::rules
