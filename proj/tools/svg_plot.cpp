#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace egm::cli {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_signal_svg(const std::vector<double>& samples, double sampling_rate_hz,
                              const std::string& title) {
    const int width = 960, height = 320;
    const int ml = 56, mr = 16, mt = 34, mb = 36; // margins
    const double pw = width - ml - mr;            // plot width
    const double ph = height - mt - mb;

    double lo = 0.0, hi = 0.0;
    for (double v : samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    const double span = hi - lo;
    lo -= 0.05 * span;
    hi += 0.05 * span;

    const double total_ms =
        samples.empty() ? 1.0 : (static_cast<double>(samples.size()) * 1000.0 / sampling_rate_hz);
    auto sx = [&](double ms) { return ml + pw * ms / total_ms; };
    auto sy = [&](double v) { return mt + ph * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    char buf[64];
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << mt + static_cast<int>(ph) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + static_cast<int>(ph) << "\" x2=\""
        << ml + static_cast<int>(pw) << "\" y2=\"" << mt + static_cast<int>(ph)
        << "\" stroke=\"black\"/>\n";
    // axis labels
    svg << "<text x=\"" << ml + static_cast<int>(pw) / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">time (ms)"
        << "</text>\n";
    svg << "<text x=\"14\" y=\"" << mt + static_cast<int>(ph) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << mt + static_cast<int>(ph) / 2 << ")\">voltage</text>\n";
    // y-extent ticks
    for (double v : {lo + 0.05 * span, hi - 0.05 * span}) {
        std::snprintf(buf, sizeof buf, "%.3g", v);
        svg << "<text x=\"" << ml - 6 << "\" y=\"" << sy(v) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
            << "</text>\n";
    }
    std::snprintf(buf, sizeof buf, "%.0f", total_ms);
    svg << "<text x=\"" << ml + static_cast<int>(pw) << "\" y=\"" << height - 22
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
        << "</text>\n";

    svg << "<polyline fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1\" points=\"";
    for (size_t i = 0; i < samples.size(); ++i) {
        const double ms = static_cast<double>(i) * 1000.0 / sampling_rate_hz;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(ms), sy(samples[i]));
        svg << buf;
    }
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

} // namespace egm::cli
