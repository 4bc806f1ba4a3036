#include "egm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "egm/errors.hpp"

namespace egm::synth {

void GeneratorConfig::validate() const {
    if (n_patients < 3 || n_patients > 99)
        throw InvalidConfig("n_patients must be between 3 and 99 so every split is nonempty");
    if (signals_per_patient < 1) throw InvalidConfig("signals_per_patient must be positive");
    if (!(cycle_length_mean_ms > 0.0) || !(cycle_length_sd_ms >= 0.0))
        throw InvalidConfig("cycle length parameters must be positive");
    if (!(duration_ms >= 3000.0))
        throw InvalidConfig("duration_ms must be at least 3000 (twice the crop window)");
    if (!(noise_sd >= 0.0 && noise_sd <= 0.05))
        throw InvalidConfig("noise_sd must lie in [0, 0.05]");
    double total = 0.0;
    for (double w : class_mix) {
        if (!(w >= 0.0)) throw InvalidConfig("class_mix weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw InvalidConfig("class_mix weights must not all be zero");
}

namespace {

// Scratch buffer the morphology generators draw onto. Deflections mark their
// footprint so baseline noise can be kept out of them; that keeps the ratio of
// a deflection apex to the global peak an exact property of the draw.
struct Canvas {
    std::vector<double> samples;
    std::vector<char> support;

    explicit Canvas(int n) : samples(static_cast<size_t>(n), 0.0),
                             support(static_cast<size_t>(n), 0) {}

    int size() const { return static_cast<int>(samples.size()); }

    void lobe(double center, double amplitude, double sigma) {
        const double reach = 4.0 * sigma;
        const int lo = std::max(0, static_cast<int>(std::ceil(center - reach)));
        const int hi = std::min(size() - 1, static_cast<int>(std::floor(center + reach)));
        for (int i = lo; i <= hi; ++i) {
            const double z = (i - center) / sigma;
            samples[static_cast<size_t>(i)] += amplitude * std::exp(-0.5 * z * z);
            support[static_cast<size_t>(i)] = 1;
        }
    }

    // One draw per sample regardless of masking, so the footprint of earlier
    // deflections cannot shift the stream consumed by later ones.
    void baseline_noise(double sd, Rng& rng) {
        for (int i = 0; i < size(); ++i) {
            const double v = rng.normal(0.0, sd);
            if (sd > 0.0 && !support[static_cast<size_t>(i)])
                samples[static_cast<size_t>(i)] += v;
        }
    }
};

EgmSignal finish(const PatientProfile& profile, const GeneratorConfig& cfg, Canvas&& cv) {
    EgmSignal s;
    s.patient_id = profile.patient_id;
    s.sampling_rate_hz = kCanonicalRateHz;
    s.cycle_length_ms = profile.cycle_length_ms;
    s.samples = std::move(cv.samples);
    (void)cfg;
    return s;
}

int duration_samples(const GeneratorConfig& cfg) {
    return static_cast<int>(std::llround(cfg.duration_ms * kCanonicalRateHz / 1000.0));
}

// Activation train shared by the normal-looking morphologies: beat centers at
// phase + k * CL with a little timing jitter, snapped to sample boundaries so
// the apex value equals the drawn amplitude exactly.
struct Beat {
    double center;
    double amplitude;
};

std::vector<Beat> lay_train(int n, const PatientProfile& profile, Rng& rng, double margin,
                            double amp_lo, double amp_hi) {
    const double cl = profile.cycle_length_ms;
    const double phase = rng.uniform(0.0, cl);
    std::vector<Beat> beats;
    for (double t = phase; t < n; t += cl) {
        const double c = std::floor(t + rng.uniform(-8.0, 8.0) + 0.5);
        const double amp = profile.amplitude_scale * rng.uniform(amp_lo, amp_hi);
        if (c < margin || c > n - 1 - margin) continue;
        beats.push_back({c, amp});
    }
    return beats;
}

} // namespace

PatientProfile make_profile(const std::string& patient_id, const GeneratorConfig& cfg,
                            Rng& rng) {
    PatientProfile p;
    p.patient_id = patient_id;
    const double hi = std::min(1200.0, cfg.duration_ms / 3.2);
    p.cycle_length_ms = std::clamp(
        rng.normal(cfg.cycle_length_mean_ms, cfg.cycle_length_sd_ms), 200.0, hi);
    p.amplitude_scale = rng.uniform(0.8, 1.6);
    p.spike_width_ms = rng.uniform(24.0, 40.0);
    p.polarity = rng.below(2) ? -1.0 : 1.0;
    return p;
}

EgmSignal gen_normal(const PatientProfile& profile, const GeneratorConfig& cfg, Rng& rng) {
    const int n = duration_samples(cfg);
    Canvas cv(n);
    const double sigma = profile.spike_width_ms / 8.0;
    const double sec_offset = 4.5 * sigma;   // clear of the main lobe's tail
    const double sec_sigma = 0.8 * sigma;
    const double margin = 4.0 * sigma + sec_offset + 4.0 * sec_sigma + 1.0;

    const std::vector<Beat> beats = lay_train(n, profile, rng, margin, 0.97, 1.03);
    for (const Beat& b : beats) {
        const double sec = b.amplitude * rng.uniform(0.02, 0.05);
        cv.lobe(b.center, profile.polarity * b.amplitude, sigma);
        cv.lobe(b.center + sec_offset, -profile.polarity * sec, sec_sigma);
    }
    cv.baseline_noise(cfg.noise_sd * profile.amplitude_scale, rng);
    return finish(profile, cfg, std::move(cv));
}

EgmSignal gen_abnormal(const PatientProfile& profile, const GeneratorConfig& cfg, Rng& rng) {
    const int n = duration_samples(cfg);
    Canvas cv(n);
    const double sigma = profile.spike_width_ms / 8.0;
    const double minor_sigma = 2.5;
    const double hump_sigma = 2.0;

    // Main activations are deliberately weaker relative to their own spread
    // than a healthy deflection would be; the fractionation around them is
    // what defines the class, so it is drawn against the realized maximum.
    const std::vector<Beat> beats = lay_train(n, profile, rng, 130.0, 0.60, 0.72);
    double global = 0.0;
    for (const Beat& b : beats) global = std::max(global, b.amplitude);

    for (const Beat& b : beats)
        cv.lobe(b.center, profile.polarity * b.amplitude, sigma);

    for (const Beat& b : beats) {
        const int n_minor = rng.uniform_int(3, 6);
        const int start = static_cast<int>(rng.below(2));
        for (int j = 0; j < n_minor; ++j) {
            const int ring = j / 2;
            const double side = ((j + start) % 2) ? -1.0 : 1.0;
            const double mag = 28.0 + 22.0 * ring + rng.uniform(0.0, 8.0);
            const double amp = global * rng.uniform(0.108, 0.143);
            const double sign = rng.below(2) ? -1.0 : 1.0;
            cv.lobe(b.center + side * mag, profile.polarity * sign * amp, minor_sigma);
        }
    }

    for (size_t k = 0; k + 1 < beats.size(); ++k) {
        const double left = beats[k].center;
        const double gap = beats[k + 1].center - left;
        const int n_hump = rng.uniform_int(1, 2);
        double frac = rng.uniform(0.44, 0.47);
        for (int h = 0; h < n_hump; ++h) {
            const double amp = global * rng.uniform(0.108, 0.143);
            const double sign = rng.below(2) ? -1.0 : 1.0;
            cv.lobe(left + frac * gap, profile.polarity * sign * amp, hump_sigma);
            frac = rng.uniform(0.51, 0.54);
        }
    }

    cv.baseline_noise(cfg.noise_sd * global, rng);
    return finish(profile, cfg, std::move(cv));
}

EgmSignal gen_unclassified(const PatientProfile& profile, const GeneratorConfig& cfg,
                           Rng& rng) {
    const int n = duration_samples(cfg);
    Canvas cv(n);

    if (rng.below(2) == 0) {
        // Flavour one: a healthy-looking activation train whose inter-beat
        // intervals carry deflections too large to pass for fractionation.
        const double sigma = profile.spike_width_ms / 8.0;
        const std::vector<Beat> beats = lay_train(n, profile, rng, 130.0, 0.97, 1.03);
        for (const Beat& b : beats)
            cv.lobe(b.center, profile.polarity * b.amplitude, sigma);
        for (size_t k = 0; k + 1 < beats.size(); ++k) {
            const double left = beats[k].center;
            const double gap = beats[k + 1].center - left;
            const double bump_amp = profile.amplitude_scale * rng.uniform(0.22, 0.45);
            const double bump_sigma = rng.uniform(3.0, 6.0);
            const double sign = rng.below(2) ? -1.0 : 1.0;
            cv.lobe(left + gap * rng.uniform(0.28, 0.50), profile.polarity * sign * bump_amp,
                    bump_sigma);
        }
        cv.baseline_noise(cfg.noise_sd * profile.amplitude_scale, rng);
    } else {
        // Flavour two: activations so blunt and weak that nothing clears the
        // detector floor, plus one or two pacing artifacts that do. Too few
        // detectable activations means no rhythm can be read off the signal.
        std::vector<double> blunt_centers;
        const double cl = profile.cycle_length_ms;
        const double phase = rng.uniform(0.0, cl);
        for (double t = phase; t < n; t += cl) {
            const double c = std::floor(t + rng.uniform(-8.0, 8.0) + 0.5);
            const double amp = profile.amplitude_scale * rng.uniform(0.020, 0.038);
            const double width = rng.uniform(80.0, 120.0);
            if (c < 65.0 || c > n - 66.0) continue;
            cv.lobe(c, profile.polarity * amp, width / 8.0);
            blunt_centers.push_back(c);
        }
        const int n_art = 1 + static_cast<int>(rng.below(2));
        std::vector<double> art_centers;
        for (int a = 0; a < n_art; ++a) {
            double c = 0.0;
            for (int attempt = 0; attempt < 256; ++attempt) {
                c = std::floor(rng.uniform(30.0, n - 31.0) + 0.5);
                bool clear = true;
                for (double bc : blunt_centers)
                    if (std::abs(c - bc) < 72.0) clear = false;
                for (double ac : art_centers)
                    if (std::abs(c - ac) < 100.0) clear = false;
                if (clear) break;
            }
            art_centers.push_back(c);
            const double amp = profile.amplitude_scale * rng.uniform(0.95, 1.10);
            cv.lobe(c, profile.polarity * amp, 1.8);
        }
        cv.baseline_noise(cfg.noise_sd * 0.03 * profile.amplitude_scale, rng);
    }
    return finish(profile, cfg, std::move(cv));
}

Dataset gen_dataset(const GeneratorConfig& cfg) {
    cfg.validate();
    const double mix_total = cfg.class_mix[0] + cfg.class_mix[1] + cfg.class_mix[2];

    Dataset ds;
    ds.records.reserve(static_cast<size_t>(cfg.n_patients) *
                       static_cast<size_t>(cfg.signals_per_patient));
    for (int i = 0; i < cfg.n_patients; ++i) {
        char pid[16];
        std::snprintf(pid, sizeof(pid), "p%02d", i);
        Rng profile_rng(Rng::mix(Rng::mix(cfg.seed, 1), static_cast<uint64_t>(i)));
        const PatientProfile profile = make_profile(pid, cfg, profile_rng);
        for (int j = 0; j < cfg.signals_per_patient; ++j) {
            Rng rng(Rng::mix(Rng::mix(Rng::mix(cfg.seed, 2), static_cast<uint64_t>(i)),
                             static_cast<uint64_t>(j)));
            const double u = rng.uniform() * mix_total;
            Label label = Label::Unclassified;
            if (u < cfg.class_mix[0])
                label = Label::Normal;
            else if (u < cfg.class_mix[0] + cfg.class_mix[1])
                label = Label::Abnormal;

            EgmSignal sig;
            switch (label) {
            case Label::Normal: sig = gen_normal(profile, cfg, rng); break;
            case Label::Abnormal: sig = gen_abnormal(profile, cfg, rng); break;
            case Label::Unclassified: sig = gen_unclassified(profile, cfg, rng); break;
            }
            char sid[32];
            std::snprintf(sid, sizeof(sid), "%s-s%03d", pid, j);
            sig.signal_id = sid;
            sig.validate();

            LabeledSignal rec;
            rec.signal = std::move(sig);
            rec.label = label;
            ds.records.push_back(std::move(rec));
        }
        if (i < cfg.n_patients - 2)
            ds.split_assignment.train.insert(pid);
        else if (i == cfg.n_patients - 2)
            ds.split_assignment.validation.insert(pid);
        else
            ds.split_assignment.test.insert(pid);
    }
    return ds;
}

LabeledSignal simulate_annotators(const LabeledSignal& rec, double disagreement_prob,
                                  Rng& rng) {
    if (!rec.label) throw UnlabeledData("cannot simulate annotators without a true label");
    if (!(disagreement_prob >= 0.0 && disagreement_prob <= 1.0))
        throw InvalidConfig("disagreement probability must lie in [0, 1]");

    const int truth = static_cast<int>(*rec.label);
    std::vector<Label> ann;
    ann.reserve(3);
    for (int a = 0; a < 3; ++a) {
        if (rng.uniform() < 1.0 - disagreement_prob) {
            ann.push_back(*rec.label);
        } else {
            const int other = (truth + 1 + static_cast<int>(rng.below(2))) % 3;
            ann.push_back(static_cast<Label>(other));
        }
    }

    LabeledSignal out = rec;
    const bool unanimous = ann[0] == ann[1] && ann[1] == ann[2];
    out.label = unanimous ? std::optional<Label>(ann[0]) : std::nullopt;
    out.annotator_labels = std::move(ann);
    return out;
}

} // namespace egm::synth
