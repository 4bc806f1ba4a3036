// Run-config parsing, seed resolution, and output-directory echo.

#include "doctest.h"

#include "run_config.hpp"

#include <egm/version.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace egm;
using namespace egm::cli;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& text)
        : path("/tmp/egm_test_" + name) {
        std::ofstream out(path, std::ios::binary);
        REQUIRE(out);
        out << text;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& name) : path("/tmp/egm_test_" + name) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

struct EnvGuard {
    std::string name;
    std::string saved;
    bool had = false;
    explicit EnvGuard(const std::string& n) : name(n) {
        if (const char* v = std::getenv(n.c_str())) {
            saved = v;
            had = true;
        }
        unsetenv(n.c_str());
    }
    ~EnvGuard() {
        if (had) setenv(name.c_str(), saved.c_str(), 1);
        else unsetenv(name.c_str());
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("empty path yields defaults") {
    const RunConfig cfg = load_run_config("");
    CHECK(cfg.train_path == "train.jsonl");
    CHECK(cfg.validation_path == "val.jsonl");
    CHECK(cfg.test_path == "test.jsonl");
    CHECK(cfg.seed == 1337);
    CHECK_FALSE(cfg.seed_from_file);
    CHECK(cfg.annotator_disagreement == 0.0);
    CHECK(cfg.gen.n_patients == 9);
    CHECK(cfg.rule.window_frac == doctest::Approx(0.40));
    CHECK(cfg.rule.min_peaks == 3);
    CHECK(cfg.net.n_stages == 2);
    CHECK(cfg.net.tail_lstm);
    CHECK_FALSE(cfg.net.fft_branch);
    CHECK(cfg.train.epochs == 100);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.formats == "text,csv,json");
}

TEST_CASE("full file covering every section parses") {
    TempFile f("cfg_full.ini", R"(# experiment settings
[data]
train = data/tr.jsonl        ; inline comment
validation = data/va.jsonl
test = data/te.jsonl
seed = 99
n_patients = 12
signals_per_patient = 25
cycle_length_mean_ms = 580.5
cycle_length_sd_ms = 110
duration_ms = 6000
noise_sd = 0.01
class_mix_normal = 3
class_mix_abnormal = 2
class_mix_unclassified = 1
annotator_disagreement = 0.25

[rule]
window_frac = 0.35
padding_samples = 30
unclassified_threshold_frac = 0.2
abnormal_threshold_frac = 0.12
peak_floor_frac = 0.04
min_peaks = 4
normalize_first = false

[network]
n_stages = 3
tail_lstm = false
fft_branch = true
leaky_slope = 0.25
spatial_dropout_rate = 0.1
dropout_rate = 0.3
kernel_size = 9
base_filters = 32
lstm_units = 64
lstm_layers = 2
hidden_dense = 128
n_classes = 3
input_length = 2000
fft_normalize = true

[train]
epochs = 7
batch_size = 16
crop_window_ms = 1200
oversample = no

[output]
dir = results/run1
formats = text,json
)");
    const RunConfig cfg = load_run_config(f.path);

    CHECK(cfg.train_path == "data/tr.jsonl");
    CHECK(cfg.validation_path == "data/va.jsonl");
    CHECK(cfg.test_path == "data/te.jsonl");
    CHECK(cfg.seed == 99);
    CHECK(cfg.seed_from_file);
    CHECK(cfg.gen.n_patients == 12);
    CHECK(cfg.gen.signals_per_patient == 25);
    CHECK(cfg.gen.cycle_length_mean_ms == 580.5);
    CHECK(cfg.gen.cycle_length_sd_ms == 110.0);
    CHECK(cfg.gen.duration_ms == 6000.0);
    CHECK(cfg.gen.noise_sd == 0.01);
    CHECK(cfg.gen.class_mix[0] == 3.0);
    CHECK(cfg.gen.class_mix[1] == 2.0);
    CHECK(cfg.gen.class_mix[2] == 1.0);
    CHECK(cfg.annotator_disagreement == 0.25);

    CHECK(cfg.rule.window_frac == 0.35);
    CHECK(cfg.rule.padding_samples == 30);
    CHECK(cfg.rule.unclassified_threshold_frac == 0.2);
    CHECK(cfg.rule.abnormal_threshold_frac == 0.12);
    CHECK(cfg.rule.peak_floor_frac == 0.04);
    CHECK(cfg.rule.min_peaks == 4);
    CHECK_FALSE(cfg.rule.normalize_first);

    CHECK(cfg.net.n_stages == 3);
    CHECK_FALSE(cfg.net.tail_lstm);
    CHECK(cfg.net.fft_branch);
    CHECK(cfg.net.leaky_slope == 0.25);
    CHECK(cfg.net.spatial_dropout_rate == 0.1);
    CHECK(cfg.net.dropout_rate == 0.3);
    CHECK(cfg.net.kernel_size == 9);
    CHECK(cfg.net.base_filters == 32);
    CHECK(cfg.net.lstm_units == 64);
    CHECK(cfg.net.lstm_layers == 2);
    CHECK(cfg.net.hidden_dense == 128);
    CHECK(cfg.net.n_classes == 3);
    CHECK(cfg.net.input_length == 2000);
    CHECK(cfg.net.fft_normalize);

    CHECK(cfg.train.epochs == 7);
    CHECK(cfg.train.batch_size == 16);
    CHECK(cfg.train.crop_window_ms == 1200.0);
    CHECK_FALSE(cfg.train.oversample);

    CHECK(cfg.out_dir == "results/run1");
    CHECK(cfg.formats == "text,json");
}

TEST_CASE("partial file keeps defaults for unset keys") {
    TempFile f("cfg_partial.ini", "[train]\nepochs = 3\n");
    const RunConfig cfg = load_run_config(f.path);
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.seed == 1337);
    CHECK_FALSE(cfg.seed_from_file);
    CHECK(cfg.rule.window_frac == doctest::Approx(0.40));
}

TEST_CASE("comments and blank lines are ignored") {
    TempFile f("cfg_comments.ini",
               "; leading comment\n"
               "\n"
               "   # indented comment\n"
               "[output]\n"
               "dir = runs/x   # trailing comment\n"
               "\n"
               "formats = csv ; another\n");
    const RunConfig cfg = load_run_config(f.path);
    CHECK(cfg.out_dir == "runs/x");
    CHECK(cfg.formats == "csv");
}

TEST_CASE("parse errors name the offender") {
    SUBCASE("unknown section") {
        TempFile f("cfg_badsec.ini", "[pipeline]\nfoo = 1\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("unknown section [pipeline]"), ConfigError);
    }
    SUBCASE("unknown key names key and section") {
        TempFile f("cfg_badkey.ini", "[rule]\nwibble = 2\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("unknown key 'wibble' in section [rule]"),
                             ConfigError);
    }
    SUBCASE("unknown key in each remaining section") {
        for (const std::string sec : {"data", "network", "train", "output"}) {
            TempFile f("cfg_badkey_" + sec + ".ini", "[" + sec + "]\nwibble = 2\n");
            const std::string needle = "in section [" + sec + "]";
            CHECK_THROWS_WITH_AS(load_run_config(f.path), doctest::Contains(needle.c_str()),
                                 ConfigError);
        }
    }
    SUBCASE("bad real value") {
        TempFile f("cfg_badreal.ini", "[rule]\nwindow_frac = fast\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("bad numeric value 'fast' for key 'window_frac'"),
                             ConfigError);
    }
    SUBCASE("trailing junk after a number") {
        TempFile f("cfg_junk.ini", "[train]\nepochs = 7x\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("bad integer value '7x' for key 'epochs'"),
                             ConfigError);
    }
    SUBCASE("bad boolean value") {
        TempFile f("cfg_badbool.ini", "[network]\ntail_lstm = maybe\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("bad boolean value 'maybe' for key 'tail_lstm'"),
                             ConfigError);
    }
    SUBCASE("key before any section") {
        TempFile f("cfg_nosec.ini", "epochs = 7\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("key 'epochs' appears before any section"),
                             ConfigError);
    }
    SUBCASE("malformed section header reports the line") {
        TempFile f("cfg_badhdr.ini", "\n[data\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("malformed section header at line 2"), ConfigError);
    }
    SUBCASE("missing equals reports the line") {
        TempFile f("cfg_noeq.ini", "[data]\nseed\n");
        CHECK_THROWS_WITH_AS(load_run_config(f.path),
                             doctest::Contains("expected key = value at line 2"), ConfigError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_run_config("/tmp/egm_test_no_such_config.ini"), IoError);
    }
}

TEST_CASE("boolean spellings") {
    for (const std::string v : {"true", "1", "yes", "on"}) {
        TempFile f("cfg_bool_t.ini", "[network]\nfft_branch = " + v + "\n");
        CHECK(load_run_config(f.path).net.fft_branch);
    }
    for (const std::string v : {"false", "0", "no", "off"}) {
        TempFile f("cfg_bool_f.ini", "[network]\ntail_lstm = " + v + "\n");
        CHECK_FALSE(load_run_config(f.path).net.tail_lstm);
    }
}

TEST_CASE("seed precedence: flag > file > environment > default") {
    EnvGuard env("EGM_TRIAGE_SEED"); // clears the variable, restores on exit

    RunConfig plain;                 // no file seed
    RunConfig from_file;
    from_file.seed = 777;
    from_file.seed_from_file = true;

    SUBCASE("default when nothing is set") {
        CHECK(resolve_seed(plain, -1) == 1337);
    }
    SUBCASE("environment beats default") {
        setenv("EGM_TRIAGE_SEED", "4242", 1);
        CHECK(resolve_seed(plain, -1) == 4242);
    }
    SUBCASE("file beats environment") {
        setenv("EGM_TRIAGE_SEED", "4242", 1);
        CHECK(resolve_seed(from_file, -1) == 777);
    }
    SUBCASE("flag beats file and environment") {
        setenv("EGM_TRIAGE_SEED", "4242", 1);
        CHECK(resolve_seed(from_file, 55) == 55);
        CHECK(resolve_seed(plain, 0) == 0); // zero is a real flag value
    }
    SUBCASE("empty environment value is ignored") {
        setenv("EGM_TRIAGE_SEED", "", 1);
        CHECK(resolve_seed(plain, -1) == 1337);
    }
    SUBCASE("garbage environment value is a config error") {
        setenv("EGM_TRIAGE_SEED", "lots", 1);
        CHECK_THROWS_AS(resolve_seed(plain, -1), ConfigError);
    }
}

TEST_CASE("render round-trips through the parser") {
    RunConfig cfg;
    cfg.train_path = "a.jsonl";
    cfg.seed = 31;
    cfg.gen.noise_sd = 0.037;
    cfg.gen.class_mix[1] = 2.5;
    cfg.annotator_disagreement = 0.125;
    cfg.rule.window_frac = 1.0 / 3.0; // needs full precision to survive
    cfg.rule.normalize_first = false;
    cfg.net.n_stages = 5;
    cfg.net.fft_branch = true;
    cfg.net.leaky_slope = 0.17;
    cfg.train.epochs = 11;
    cfg.train.oversample = false;
    cfg.out_dir = "elsewhere";

    const std::string text = render_run_config(cfg);
    CHECK(text.find("# egm-triage ") == 0); // version header comes first
    CHECK(text.find("[data]") != std::string::npos);
    CHECK(text.find("[output]") != std::string::npos);

    TempFile f("cfg_roundtrip.ini", text);
    const RunConfig back = load_run_config(f.path);
    CHECK(back.train_path == cfg.train_path);
    CHECK(back.seed == cfg.seed);
    CHECK(back.seed_from_file); // render always writes the seed
    CHECK(back.gen.noise_sd == cfg.gen.noise_sd);
    CHECK(back.gen.class_mix[1] == cfg.gen.class_mix[1]);
    CHECK(back.annotator_disagreement == cfg.annotator_disagreement);
    CHECK(back.rule.window_frac == cfg.rule.window_frac); // bitwise, via %.17g
    CHECK(back.rule.normalize_first == cfg.rule.normalize_first);
    CHECK(back.net.n_stages == cfg.net.n_stages);
    CHECK(back.net.fft_branch == cfg.net.fft_branch);
    CHECK(back.net.leaky_slope == cfg.net.leaky_slope);
    CHECK(back.train.epochs == cfg.train.epochs);
    CHECK(back.train.oversample == cfg.train.oversample);
    CHECK(back.out_dir == cfg.out_dir);

    // Re-rendering the reloaded config reproduces the text exactly.
    CHECK(render_run_config(back) == text);
}

TEST_CASE("echo_config writes resolved ini and version marker") {
    TempDir dir("cfg_echo");
    RunConfig cfg;
    cfg.seed = 5;
    cfg.out_dir = dir.path;

    echo_config(cfg, dir.path + "/nested"); // directory is created on demand

    const std::string ini = slurp(dir.path + "/nested/config.resolved.ini");
    CHECK(ini == render_run_config(cfg));

    const std::string ver = slurp(dir.path + "/nested/version.txt");
    CHECK(ver == std::string("egm-triage ") + kVersion + "\n");
}
