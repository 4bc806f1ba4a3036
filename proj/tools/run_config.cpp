#include "run_config.hpp"

#include <egm/version.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace egm::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value '" + v + "' for key '" + key + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value '" + v + "' for key '" + key + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean value '" + v + "' for key '" + key + "'");
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);

    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "data" && section != "rule" && section != "network" &&
                section != "train" && section != "output")
                throw ConfigError("unknown section [" + section + "] in " + path);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno) + " of " +
                              path);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("key '" + key + "' appears before any section in " + path);

        if (section == "data") {
            if (key == "train") cfg.train_path = val;
            else if (key == "validation") cfg.validation_path = val;
            else if (key == "test") cfg.test_path = val;
            else if (key == "seed") {
                cfg.seed = static_cast<uint64_t>(parse_int(key, val));
                cfg.seed_from_file = true;
            } else if (key == "n_patients") cfg.gen.n_patients = static_cast<int>(parse_int(key, val));
            else if (key == "signals_per_patient")
                cfg.gen.signals_per_patient = static_cast<int>(parse_int(key, val));
            else if (key == "cycle_length_mean_ms") cfg.gen.cycle_length_mean_ms = parse_real(key, val);
            else if (key == "cycle_length_sd_ms") cfg.gen.cycle_length_sd_ms = parse_real(key, val);
            else if (key == "duration_ms") cfg.gen.duration_ms = parse_real(key, val);
            else if (key == "noise_sd") cfg.gen.noise_sd = parse_real(key, val);
            else if (key == "class_mix_normal") cfg.gen.class_mix[0] = parse_real(key, val);
            else if (key == "class_mix_abnormal") cfg.gen.class_mix[1] = parse_real(key, val);
            else if (key == "class_mix_unclassified") cfg.gen.class_mix[2] = parse_real(key, val);
            else if (key == "annotator_disagreement") cfg.annotator_disagreement = parse_real(key, val);
            else throw ConfigError("unknown key '" + key + "' in section [data]");
        } else if (section == "rule") {
            if (key == "window_frac") cfg.rule.window_frac = parse_real(key, val);
            else if (key == "padding_samples")
                cfg.rule.padding_samples = static_cast<int>(parse_int(key, val));
            else if (key == "unclassified_threshold_frac")
                cfg.rule.unclassified_threshold_frac = parse_real(key, val);
            else if (key == "abnormal_threshold_frac")
                cfg.rule.abnormal_threshold_frac = parse_real(key, val);
            else if (key == "peak_floor_frac") cfg.rule.peak_floor_frac = parse_real(key, val);
            else if (key == "min_peaks") cfg.rule.min_peaks = static_cast<int>(parse_int(key, val));
            else if (key == "normalize_first") cfg.rule.normalize_first = parse_bool(key, val);
            else throw ConfigError("unknown key '" + key + "' in section [rule]");
        } else if (section == "network") {
            if (key == "n_stages") cfg.net.n_stages = static_cast<int>(parse_int(key, val));
            else if (key == "tail_lstm") cfg.net.tail_lstm = parse_bool(key, val);
            else if (key == "fft_branch") cfg.net.fft_branch = parse_bool(key, val);
            else if (key == "leaky_slope") cfg.net.leaky_slope = parse_real(key, val);
            else if (key == "spatial_dropout_rate")
                cfg.net.spatial_dropout_rate = parse_real(key, val);
            else if (key == "dropout_rate") cfg.net.dropout_rate = parse_real(key, val);
            else if (key == "kernel_size") cfg.net.kernel_size = static_cast<int>(parse_int(key, val));
            else if (key == "base_filters")
                cfg.net.base_filters = static_cast<int>(parse_int(key, val));
            else if (key == "lstm_units") cfg.net.lstm_units = static_cast<int>(parse_int(key, val));
            else if (key == "lstm_layers")
                cfg.net.lstm_layers = static_cast<int>(parse_int(key, val));
            else if (key == "hidden_dense")
                cfg.net.hidden_dense = static_cast<int>(parse_int(key, val));
            else if (key == "n_classes") cfg.net.n_classes = static_cast<int>(parse_int(key, val));
            else if (key == "input_length")
                cfg.net.input_length = static_cast<int>(parse_int(key, val));
            else if (key == "fft_normalize") cfg.net.fft_normalize = parse_bool(key, val);
            else throw ConfigError("unknown key '" + key + "' in section [network]");
        } else if (section == "train") {
            if (key == "epochs") cfg.train.epochs = static_cast<int>(parse_int(key, val));
            else if (key == "batch_size")
                cfg.train.batch_size = static_cast<int>(parse_int(key, val));
            else if (key == "crop_window_ms") cfg.train.crop_window_ms = parse_real(key, val);
            else if (key == "oversample") cfg.train.oversample = parse_bool(key, val);
            else throw ConfigError("unknown key '" + key + "' in section [train]");
        } else { // output
            if (key == "dir") cfg.out_dir = val;
            else if (key == "formats") cfg.formats = val;
            else throw ConfigError("unknown key '" + key + "' in section [output]");
        }
    }
    return cfg;
}

uint64_t resolve_seed(const RunConfig& cfg, long long flag_seed) {
    if (flag_seed >= 0) return static_cast<uint64_t>(flag_seed);
    if (cfg.seed_from_file) return cfg.seed;
    if (const char* env = std::getenv("EGM_TRIAGE_SEED")) {
        const std::string v(env);
        if (!v.empty()) return static_cast<uint64_t>(parse_int("EGM_TRIAGE_SEED", v));
    }
    return cfg.seed;
}

std::string render_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    char buf[64];
    auto real = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "# egm-triage " << kVersion << " resolved configuration\n";
    out << "[data]\n";
    out << "train = " << cfg.train_path << "\n";
    out << "validation = " << cfg.validation_path << "\n";
    out << "test = " << cfg.test_path << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "n_patients = " << cfg.gen.n_patients << "\n";
    out << "signals_per_patient = " << cfg.gen.signals_per_patient << "\n";
    out << "cycle_length_mean_ms = " << real(cfg.gen.cycle_length_mean_ms) << "\n";
    out << "cycle_length_sd_ms = " << real(cfg.gen.cycle_length_sd_ms) << "\n";
    out << "duration_ms = " << real(cfg.gen.duration_ms) << "\n";
    out << "noise_sd = " << real(cfg.gen.noise_sd) << "\n";
    out << "class_mix_normal = " << real(cfg.gen.class_mix[0]) << "\n";
    out << "class_mix_abnormal = " << real(cfg.gen.class_mix[1]) << "\n";
    out << "class_mix_unclassified = " << real(cfg.gen.class_mix[2]) << "\n";
    out << "annotator_disagreement = " << real(cfg.annotator_disagreement) << "\n";
    out << "\n[rule]\n";
    out << "window_frac = " << real(cfg.rule.window_frac) << "\n";
    out << "padding_samples = " << cfg.rule.padding_samples << "\n";
    out << "unclassified_threshold_frac = " << real(cfg.rule.unclassified_threshold_frac) << "\n";
    out << "abnormal_threshold_frac = " << real(cfg.rule.abnormal_threshold_frac) << "\n";
    out << "peak_floor_frac = " << real(cfg.rule.peak_floor_frac) << "\n";
    out << "min_peaks = " << cfg.rule.min_peaks << "\n";
    out << "normalize_first = " << (cfg.rule.normalize_first ? "true" : "false") << "\n";
    out << "\n[network]\n";
    out << "n_stages = " << cfg.net.n_stages << "\n";
    out << "tail_lstm = " << (cfg.net.tail_lstm ? "true" : "false") << "\n";
    out << "fft_branch = " << (cfg.net.fft_branch ? "true" : "false") << "\n";
    out << "leaky_slope = " << real(cfg.net.leaky_slope) << "\n";
    out << "spatial_dropout_rate = " << real(cfg.net.spatial_dropout_rate) << "\n";
    out << "dropout_rate = " << real(cfg.net.dropout_rate) << "\n";
    out << "kernel_size = " << cfg.net.kernel_size << "\n";
    out << "base_filters = " << cfg.net.base_filters << "\n";
    out << "lstm_units = " << cfg.net.lstm_units << "\n";
    out << "lstm_layers = " << cfg.net.lstm_layers << "\n";
    out << "hidden_dense = " << cfg.net.hidden_dense << "\n";
    out << "n_classes = " << cfg.net.n_classes << "\n";
    out << "input_length = " << cfg.net.input_length << "\n";
    out << "fft_normalize = " << (cfg.net.fft_normalize ? "true" : "false") << "\n";
    out << "\n[train]\n";
    out << "epochs = " << cfg.train.epochs << "\n";
    out << "batch_size = " << cfg.train.batch_size << "\n";
    out << "crop_window_ms = " << real(cfg.train.crop_window_ms) << "\n";
    out << "oversample = " << (cfg.train.oversample ? "true" : "false") << "\n";
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
    out << "formats = " << cfg.formats << "\n";
    return out.str();
}

void echo_config(const RunConfig& cfg, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    {
        std::ofstream out(fs::path(dir) / "config.resolved.ini", std::ios::binary);
        if (!out) throw IoError("cannot write resolved config in " + dir);
        out << render_run_config(cfg);
    }
    {
        std::ofstream out(fs::path(dir) / "version.txt", std::ios::binary);
        if (!out) throw IoError("cannot write version marker in " + dir);
        out << "egm-triage " << kVersion << "\n";
    }
}

} // namespace egm::cli
