#pragma once

#include <vector>

#include "egm/rng.hpp"
#include "egm/signal.hpp"

namespace egm {

// FFT length used throughout; equals the canonical 1500 ms crop at 1 kHz.
inline constexpr int kSpectrumLength = 1500;

// |x| element-wise.
std::vector<double> rectify(const std::vector<double>& x);

// x / max|x|. The output's max absolute value is exactly 1. Throws
// AllZeroSignal when max|x| == 0.
std::vector<double> normalize(const std::vector<double>& x);

// Crop of `window` samples with a uniformly random valid start offset.
// Throws SignalTooShort if x.size() < window.
std::vector<double> random_crop(const std::vector<double>& x, int window, Rng& rng);

// Deterministic crop centered in the signal (start = (n - window) / 2).
std::vector<double> center_crop(const std::vector<double>& x, int window);

struct Spectrum {
    std::vector<double> power; // |X[k]|^2, k = 0..1499, raw (unnormalized) scale
};

// Power spectrum of exactly kSpectrumLength samples via a mixed-radix FFT.
// Throws WrongLength otherwise.
Spectrum power_spectrum(const std::vector<double>& x);

// Linear-interpolation resampling; used at load time to bring foreign sampling
// rates onto the canonical 1 kHz grid.
std::vector<double> resample_linear(const std::vector<double>& x, double from_hz, double to_hz);

// Whole-signal conveniences: same semantics, metadata preserved.
EgmSignal rectify(const EgmSignal& s);
EgmSignal normalize(const EgmSignal& s);
EgmSignal random_crop(const EgmSignal& s, double window_ms, Rng& rng);

} // namespace egm
