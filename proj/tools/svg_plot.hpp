#pragma once

// Minimal self-contained SVG line plot of a signal (time in ms against
// voltage), used for dumping misclassified examples.

#include <string>
#include <vector>

namespace egm::cli {

std::string render_signal_svg(const std::vector<double>& samples, double sampling_rate_hz,
                              const std::string& title);

} // namespace egm::cli
