// egm: command-line surface for the EGM triage toolkit.
// Subcommands: synth | rule classify|grid|ablate | nn train|eval|gradcheck|sweep | report.
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 data error, 5 checkpoint error.

#include "run_config.hpp"
#include "svg_plot.hpp"

#include <egm/dataset_io.hpp>
#include <egm/metrics.hpp>
#include <egm/nn/gradcheck.hpp>
#include <egm/nn/train.hpp>
#include <egm/preprocess.hpp>
#include <egm/rules.hpp>
#include <egm/synth.hpp>
#include <egm/version.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace egm;
using cli::RunConfig;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

std::set<std::string> parse_formats(const std::string& csv) {
    std::set<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        item = item.substr(a, b - a + 1);
        if (item != "text" && item != "csv" && item != "json")
            throw ConfigError("unknown output format '" + item + "'");
        out.insert(item);
    }
    if (out.empty()) throw ConfigError("output formats list is empty");
    return out;
}

void write_metrics_files(const fs::path& dir, const metrics::ConfusionMatrix& cm,
                         const metrics::MetricsReport& mr, const std::string& formats) {
    const auto fmts = parse_formats(formats);
    if (fmts.count("text")) write_file(dir / "metrics.txt", metrics::render_text(cm, mr));
    if (fmts.count("csv")) write_file(dir / "metrics.csv", metrics::render_csv(cm, mr));
    if (fmts.count("json")) write_file(dir / "metrics.json", metrics::render_json(cm, mr));
}

void write_predictions_jsonl(const fs::path& path, const std::vector<LabeledSignal>& records,
                             const std::vector<Label>& preds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (size_t i = 0; i < records.size(); ++i) {
        json j;
        j["signal_id"] = records[i].signal.signal_id;
        if (records[i].label) j["truth"] = to_string(*records[i].label);
        else j["truth"] = nullptr;
        j["predicted"] = to_string(preds[i]);
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_run_manifest(const fs::path& dir, const std::string& command,
                        const std::string& data_path) {
    json j;
    j["command"] = command;
    j["data"] = data_path;
    j["version"] = kVersion;
    write_file(dir / "run.json", j.dump(2) + "\n");
}

std::vector<LabeledSignal> read_labeled(const std::string& path) {
    auto records = read_jsonl(path);
    for (const auto& rec : records)
        if (!rec.label)
            throw UnlabeledData("signal '" + rec.signal.signal_id + "' in " + path +
                                " has no label");
    return records;
}

std::vector<Label> truths_of(const std::vector<LabeledSignal>& records) {
    std::vector<Label> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(*rec.label);
    return out;
}

// ---------------------------------------------------------------------------

int run_synth(const RunConfig& cfg) {
    cfg.gen.validate();
    Dataset ds = synth::gen_dataset(cfg.gen);
    if (cfg.annotator_disagreement > 0.0) {
        for (size_t i = 0; i < ds.records.size(); ++i) {
            Rng rng(Rng::mix(Rng::mix(cfg.gen.seed, 0x616e6e6fu), i));
            ds.records[i] =
                synth::simulate_annotators(ds.records[i], cfg.annotator_disagreement, rng);
        }
    }
    SplitRecords splits = split_by_patient(ds);

    fs::create_directories(cfg.out_dir);
    write_jsonl((fs::path(cfg.out_dir) / "train.jsonl").string(), splits.train);
    write_jsonl((fs::path(cfg.out_dir) / "val.jsonl").string(), splits.validation);
    write_jsonl((fs::path(cfg.out_dir) / "test.jsonl").string(), splits.test);

    std::ostringstream summary;
    summary << "split,normal,abnormal,unclassified,unlabeled,total\n";
    const std::vector<std::pair<const char*, const std::vector<LabeledSignal>*>> rows = {
        {"train", &splits.train}, {"validation", &splits.validation}, {"test", &splits.test}};
    for (const auto& [name, recs] : rows) {
        int64_t counts[3] = {0, 0, 0};
        int64_t unlabeled = 0;
        for (const auto& rec : *recs) {
            if (rec.label) ++counts[static_cast<int>(*rec.label)];
            else ++unlabeled;
        }
        summary << name << "," << counts[0] << "," << counts[1] << "," << counts[2] << ","
                << unlabeled << "," << recs->size() << "\n";
    }
    write_file(fs::path(cfg.out_dir) / "summary.csv", summary.str());
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("wrote %zu/%zu/%zu train/val/test signals to %s\n", splits.train.size(),
                splits.validation.size(), splits.test.size(), cfg.out_dir.c_str());
    return 0;
}

int run_rule_classify(const RunConfig& cfg, const std::string& data_path) {
    auto records = read_labeled(data_path);
    std::vector<Label> preds;
    preds.reserve(records.size());
    for (const auto& rec : records) preds.push_back(rules::classify(rec.signal, cfg.rule));

    const auto cm = metrics::confusion(truths_of(records), preds);
    const auto mr = metrics::compute_metrics(cm);

    fs::create_directories(cfg.out_dir);
    write_predictions_jsonl(fs::path(cfg.out_dir) / "predictions.jsonl", records, preds);
    write_metrics_files(cfg.out_dir, cm, mr, cfg.formats);
    write_run_manifest(cfg.out_dir, "rule classify", data_path);
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("rule classify: %zu signals, accuracy %s\n", records.size(),
                metrics::format_2dp(mr.accuracy).c_str());
    return 0;
}

int run_rule_grid(const RunConfig& cfg, const std::vector<std::string>& data_paths, int threads) {
    std::vector<LabeledSignal> records;
    for (const auto& p : data_paths) {
        auto part = read_labeled(p);
        records.insert(records.end(), part.begin(), part.end());
    }
    const auto res = rules::grid_search(records, cfg.rule, rules::GridSpec{}, threads);

    std::ostringstream table;
    table << "window_frac,unclassified_threshold_frac,abnormal_threshold_frac,padding_samples,"
             "correct,total,accuracy\n";
    char buf[160];
    for (const auto& pt : res.table) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%d,%d,%d,%.9g\n", pt.params.window_frac,
                      pt.params.unclassified_threshold_frac, pt.params.abnormal_threshold_frac,
                      pt.params.padding_samples, pt.correct, pt.total, pt.accuracy);
        table << buf;
    }
    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "grid.csv", table.str());

    RunConfig best_cfg = cfg;
    best_cfg.rule = res.best;
    std::ostringstream best;
    best << "[rule]\n";
    std::snprintf(buf, sizeof buf, "window_frac = %.2f\n", res.best.window_frac);
    best << buf;
    best << "padding_samples = " << res.best.padding_samples << "\n";
    std::snprintf(buf, sizeof buf, "unclassified_threshold_frac = %.2f\n",
                  res.best.unclassified_threshold_frac);
    best << buf;
    std::snprintf(buf, sizeof buf, "abnormal_threshold_frac = %.2f\n",
                  res.best.abnormal_threshold_frac);
    best << buf;
    std::snprintf(buf, sizeof buf, "peak_floor_frac = %.2f\n", res.best.peak_floor_frac);
    best << buf;
    best << "min_peaks = " << res.best.min_peaks << "\n";
    best << "normalize_first = " << (res.best.normalize_first ? "true" : "false") << "\n";
    write_file(fs::path(cfg.out_dir) / "best_params.ini", best.str());
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("grid search: %zu points, best accuracy %.4f at window %.2f uncl %.2f abn %.2f "
                "pad %d\n",
                res.table.size(), res.best_accuracy, res.best.window_frac,
                res.best.unclassified_threshold_frac, res.best.abnormal_threshold_frac,
                res.best.padding_samples);
    return 0;
}

int run_rule_ablate(const RunConfig& cfg, uint64_t seed) {
    auto pool = read_labeled(cfg.train_path);
    {
        auto val = read_labeled(cfg.validation_path);
        pool.insert(pool.end(), val.begin(), val.end());
    }
    auto test = read_labeled(cfg.test_path);
    const int window = static_cast<int>(std::llround(cfg.train.crop_window_ms));
    const auto cells = rules::ablation_table(pool, test, cfg.rule, window, seed);

    std::ostringstream out;
    out << "normalized,cropped,train_val_accuracy,test_accuracy\n";
    char buf[96];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.9g,%.9g\n", c.normalized ? "true" : "false",
                      c.cropped ? "true" : "false", c.train_val_accuracy, c.test_accuracy);
        out << buf;
    }
    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "ablation.csv", out.str());
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("ablation: wrote %zu cells to %s/ablation.csv\n", cells.size() * 2,
                cfg.out_dir.c_str());
    return 0;
}

int run_nn_train(const RunConfig& cfg) {
    auto train = read_labeled(cfg.train_path);
    auto val = read_labeled(cfg.validation_path);
    const auto result = nn::fit(train, val, cfg.net, cfg.train);

    fs::create_directories(cfg.out_dir);
    nn::save_checkpoint(result.best, (fs::path(cfg.out_dir) / "checkpoint").string());
    nn::write_epoch_log_csv(result.log, (fs::path(cfg.out_dir) / "training_log.csv").string());
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("training done: best validation accuracy %.4f at epoch %d (checkpoint in %s)\n",
                result.best.best_validation_accuracy, result.best.epoch_of_best,
                (fs::path(cfg.out_dir) / "checkpoint").string().c_str());
    return 0;
}

int run_nn_eval(const RunConfig& cfg, const std::string& checkpoint_dir,
                const std::string& data_path) {
    const auto ckpt = nn::load_checkpoint(checkpoint_dir);
    auto records = read_labeled(data_path);
    std::vector<EgmSignal> signals;
    signals.reserve(records.size());
    for (const auto& rec : records) signals.push_back(rec.signal);
    const auto preds = nn::predict(ckpt, signals);

    const auto cm = metrics::confusion(truths_of(records), preds);
    const auto mr = metrics::compute_metrics(cm);

    std::vector<metrics::Misclassified> wrong;
    for (size_t i = 0; i < records.size(); ++i)
        if (preds[i] != *records[i].label)
            wrong.push_back({records[i].signal.signal_id, *records[i].label, preds[i]});

    fs::create_directories(cfg.out_dir);
    write_predictions_jsonl(fs::path(cfg.out_dir) / "predictions.jsonl", records, preds);
    write_metrics_files(cfg.out_dir, cm, mr, cfg.formats);
    write_file(fs::path(cfg.out_dir) / "misclassified.csv",
               metrics::misclassified_csv(std::move(wrong)));
    write_run_manifest(cfg.out_dir, "nn eval", data_path);
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("nn eval: %zu signals, accuracy %s\n", records.size(),
                metrics::format_2dp(mr.accuracy).c_str());
    return 0;
}

int run_nn_gradcheck(uint64_t seed) {
    double worst = 0.0;
    for (const bool lstm : {true, false}) {
        const auto cfg = nn::gradcheck_mini_config(lstm, lstm);
        const auto rep = nn::gradient_check(cfg, seed);
        std::printf("variant %-12s max relative error %.3e (worst tensor %s)%s\n",
                    lstm ? "lstm+fft" : "gap", rep.max_rel_err, rep.worst_param.c_str(),
                    rep.loss_pure ? "" : " [loss recomputation mismatch]");
        worst = std::max(worst, rep.max_rel_err);
        if (!rep.loss_pure) worst = 1.0;
    }
    std::printf("max relative error %.3e\n", worst);
    return worst <= 1e-4 ? 0 : 1;
}

int run_nn_sweep(const RunConfig& cfg, const std::string& stages_csv) {
    std::vector<int> stages;
    std::stringstream ss(stages_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            stages.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("bad --stages entry '" + item + "'");
        }
    }
    if (stages.empty()) throw ConfigError("--stages list is empty");

    auto train = read_labeled(cfg.train_path);
    auto val = read_labeled(cfg.validation_path);

    struct Variant {
        const char* name;
        bool lstm, fft;
    };
    const Variant variants[] = {{"lstm_egm", true, false},
                                {"lstm_egm_fft", true, true},
                                {"gap_egm", false, false},
                                {"gap_egm_fft", false, true}};

    std::ostringstream out;
    out << "n_stages";
    for (const auto& v : variants) out << "," << v.name;
    out << "\n";
    for (int n : stages) {
        out << n;
        for (const auto& v : variants) {
            nn::NetworkConfig net = cfg.net;
            net.n_stages = n;
            net.tail_lstm = v.lstm;
            net.fft_branch = v.fft;
            const auto result = nn::fit(train, val, net, cfg.train);
            char buf[32];
            std::snprintf(buf, sizeof buf, ",%.4f", result.best.best_validation_accuracy);
            out << buf;
            std::printf("sweep: n_stages=%d %s -> val accuracy %.4f (epoch %d)\n", n, v.name,
                        result.best.best_validation_accuracy, result.best.epoch_of_best);
            std::fflush(stdout);
        }
        out << "\n";
    }
    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "sweep.csv", out.str());
    cli::echo_config(cfg, cfg.out_dir);
    std::printf("sweep grid written to %s/sweep.csv\n", cfg.out_dir.c_str());
    return 0;
}

int run_report(const std::string& in_dir, const std::string& out_dir, bool plots) {
    std::ifstream manifest_in(fs::path(in_dir) / "run.json");
    if (!manifest_in) throw IoError("missing " + (fs::path(in_dir) / "run.json").string());
    json manifest;
    try {
        manifest_in >> manifest;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed run.json: ") + e.what());
    }

    std::ifstream pred_in(fs::path(in_dir) / "predictions.jsonl");
    if (!pred_in)
        throw IoError("missing " + (fs::path(in_dir) / "predictions.jsonl").string());
    std::vector<metrics::Misclassified> wrong;
    std::vector<std::pair<Label, Label>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(pred_in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("predictions.jsonl line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("truth") || j["truth"].is_null())
            throw DataError("predictions.jsonl line " + std::to_string(lineno) +
                            " has no truth label");
        const Label truth = label_from_string(j["truth"].get<std::string>());
        const Label pred = label_from_string(j["predicted"].get<std::string>());
        pairs.emplace_back(truth, pred);
        if (truth != pred) wrong.push_back({j["signal_id"].get<std::string>(), truth, pred});
    }

    const auto cm = metrics::confusion(pairs);
    const auto mr = metrics::compute_metrics(cm);
    fs::create_directories(out_dir);
    write_metrics_files(out_dir, cm, mr, "text,csv,json");
    write_file(fs::path(out_dir) / "misclassified.csv", metrics::misclassified_csv(wrong));

    size_t n_plots = 0;
    if (plots) {
        const std::string data_path = manifest.value("data", "");
        auto records = read_jsonl(data_path);
        std::map<std::string, const LabeledSignal*> by_id;
        for (const auto& rec : records) by_id[rec.signal.signal_id] = &rec;
        fs::create_directories(fs::path(out_dir) / "plots");
        for (const auto& w : wrong) {
            const auto it = by_id.find(w.signal_id);
            if (it == by_id.end())
                throw DataError("misclassified signal '" + w.signal_id + "' not found in " +
                                data_path);
            const std::string title = w.signal_id + " " + to_string(w.truth) + "→" +
                                      to_string(w.predicted);
            write_file(fs::path(out_dir) / "plots" / (w.signal_id + ".svg"),
                       cli::render_signal_svg(it->second->signal.samples,
                                              it->second->signal.sampling_rate_hz, title));
            ++n_plots;
        }
    }
    std::printf("report: %zu predictions, %zu misclassified%s\n", pairs.size(), wrong.size(),
                plots ? (", " + std::to_string(n_plots) + " plots").c_str() : "");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EGM triage toolkit: synthetic data, rule-based and neural classifiers"};
    app.require_subcommand(1);
    app.footer("Seed precedence: --seed flag > config file > EGM_TRIAGE_SEED > default (1337).\n"
               "Exit codes: 0 ok, 2 config error, 3 I/O error, 4 data error, 5 checkpoint error.");

    std::string config_path, out_flag, data_flag, checkpoint_dir, in_dir, stages_csv = "1,2";
    std::vector<std::string> data_multi;
    long long seed_flag = -1;
    int threads = 1;
    int patients_flag = -1, signals_flag = -1, epochs_flag = -1, batch_flag = -1, stages_flag = -1;
    double noise_flag = -1.0, disagree_flag = -1.0;
    bool plots = false;
    int lstm_flag = -1, fft_flag = -1, fft_norm_flag = -1;

    std::function<int()> task;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI config file");
        sub->add_option("--out", out_flag, "Output directory (overrides [output] dir)");
        sub->add_option("--seed", seed_flag, "Seed override");
        sub->add_option("--threads", threads, "Worker threads where supported (default 1)");
    };
    auto resolve = [&]() {
        RunConfig cfg = cli::load_run_config(config_path);
        const uint64_t seed = cli::resolve_seed(cfg, seed_flag);
        cfg.seed = seed;
        cfg.gen.seed = seed;
        cfg.train.seed = seed;
        if (!out_flag.empty()) cfg.out_dir = out_flag;
        if (patients_flag >= 0) cfg.gen.n_patients = patients_flag;
        if (signals_flag >= 0) cfg.gen.signals_per_patient = signals_flag;
        if (noise_flag >= 0.0) cfg.gen.noise_sd = noise_flag;
        if (disagree_flag >= 0.0) cfg.annotator_disagreement = disagree_flag;
        if (epochs_flag >= 0) cfg.train.epochs = epochs_flag;
        if (batch_flag >= 0) cfg.train.batch_size = batch_flag;
        if (stages_flag >= 0) cfg.net.n_stages = stages_flag;
        if (lstm_flag >= 0) cfg.net.tail_lstm = (lstm_flag != 0);
        if (fft_flag >= 0) cfg.net.fft_branch = (fft_flag != 0);
        if (fft_norm_flag >= 0) cfg.net.fft_normalize = (fft_norm_flag != 0);
        return cfg;
    };

    // synth ------------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
    add_common(synth_cmd);
    synth_cmd->add_option("--patients", patients_flag, "Number of patients");
    synth_cmd->add_option("--signals-per-patient", signals_flag, "Signals per patient");
    synth_cmd->add_option("--noise", noise_flag, "Baseline noise sd (fraction of peak)");
    synth_cmd->add_option("--annotator-disagreement", disagree_flag,
                          "Per-annotator disagreement probability (default 0: skip annotators)");
    synth_cmd->callback([&]() { task = [&]() { return run_synth(resolve()); }; });

    // rule --------------------------------------------------------------------
    auto* rule_cmd = app.add_subcommand("rule", "Rule-based classifier");
    rule_cmd->require_subcommand(1);

    auto* rc = rule_cmd->add_subcommand("classify", "Classify a labeled dataset");
    add_common(rc);
    rc->add_option("--data", data_flag, "Dataset JSONL (default: [data] test)");
    rc->callback([&]() {
        task = [&]() {
            RunConfig cfg = resolve();
            return run_rule_classify(cfg, data_flag.empty() ? cfg.test_path : data_flag);
        };
    });

    auto* rg = rule_cmd->add_subcommand("grid", "Hyperparameter grid search");
    add_common(rg);
    rg->add_option("--data", data_multi,
                   "Dataset JSONL (repeatable; default: [data] train + validation)");
    rg->callback([&]() {
        task = [&]() {
            RunConfig cfg = resolve();
            std::vector<std::string> paths = data_multi;
            if (paths.empty()) paths = {cfg.train_path, cfg.validation_path};
            return run_rule_grid(cfg, paths, threads);
        };
    });

    auto* ra = rule_cmd->add_subcommand("ablate", "Normalization x cropping ablation");
    add_common(ra);
    ra->callback([&]() {
        task = [&]() {
            RunConfig cfg = resolve();
            return run_rule_ablate(cfg, cfg.seed);
        };
    });

    // nn ----------------------------------------------------------------------
    auto* nn_cmd = app.add_subcommand("nn", "Neural-network classifier");
    nn_cmd->require_subcommand(1);

    auto* nt = nn_cmd->add_subcommand("train", "Train and checkpoint the best epoch");
    add_common(nt);
    nt->add_option("--epochs", epochs_flag, "Training epochs");
    nt->add_option("--batch-size", batch_flag, "Minibatch size");
    nt->add_option("--stages", stages_flag, "Residual stage count N");
    nt->add_flag("--lstm{1},--no-lstm{0}", lstm_flag, "LSTM tail on/off");
    nt->add_flag("--fft{1},--no-fft{0}", fft_flag, "Second branch over the power spectrum");
    nt->add_flag("--fft-normalize{1},--no-fft-normalize{0}", fft_norm_flag,
                 "Scale each spectrum by its max");
    nt->callback([&]() { task = [&]() { return run_nn_train(resolve()); }; });

    auto* ne = nn_cmd->add_subcommand("eval", "Evaluate a checkpoint on a labeled dataset");
    add_common(ne);
    ne->add_option("--checkpoint", checkpoint_dir, "Checkpoint directory")->required();
    ne->add_option("--data", data_flag, "Dataset JSONL (default: [data] test)");
    ne->callback([&]() {
        task = [&]() {
            RunConfig cfg = resolve();
            return run_nn_eval(cfg, checkpoint_dir, data_flag.empty() ? cfg.test_path : data_flag);
        };
    });

    auto* ng = nn_cmd->add_subcommand("gradcheck",
                                      "Finite-difference check of all backward passes");
    ng->add_option("--seed", seed_flag, "Seed override");
    ng->callback([&]() {
        task = [&]() { return run_nn_gradcheck(seed_flag >= 0 ? seed_flag : 42ULL); };
    });

    auto* ns = nn_cmd->add_subcommand("sweep", "Variant grid: N x {lstm,gap} x {egm,egm+fft}");
    add_common(ns);
    ns->add_option("--stages", stages_csv, "Comma-separated stage counts (default 1,2)");
    ns->add_option("--epochs", epochs_flag, "Epochs per variant");
    ns->callback([&]() {
        task = [&]() {
            RunConfig cfg = resolve();
            return run_nn_sweep(cfg, stages_csv);
        };
    });

    // report --------------------------------------------------------------------
    auto* rep = app.add_subcommand("report", "Render metrics (and plots) from a run directory");
    rep->add_option("--in", in_dir, "Completed run directory")->required();
    rep->add_option("--out", out_flag, "Report output directory")->required();
    rep->add_flag("--plots", plots, "Emit one SVG per misclassified signal");
    rep->callback([&]() { task = [&]() { return run_report(in_dir, out_flag, plots); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return task ? task() : 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "checkpoint error: %s\n", e.what());
        return 5;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
