#include <egm/nn/checkpoint.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace egm::nn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json config_to_json(const NetworkConfig& c) {
    return json{{"n_stages", c.n_stages},
                {"tail_lstm", c.tail_lstm},
                {"fft_branch", c.fft_branch},
                {"leaky_slope", c.leaky_slope},
                {"spatial_dropout_rate", c.spatial_dropout_rate},
                {"dropout_rate", c.dropout_rate},
                {"kernel_size", c.kernel_size},
                {"base_filters", c.base_filters},
                {"lstm_units", c.lstm_units},
                {"lstm_layers", c.lstm_layers},
                {"hidden_dense", c.hidden_dense},
                {"n_classes", c.n_classes},
                {"input_length", c.input_length},
                {"fft_normalize", c.fft_normalize}};
}

NetworkConfig config_from_json(const json& j) {
    NetworkConfig c;
    try {
        c.n_stages = j.at("n_stages").get<int>();
        c.tail_lstm = j.at("tail_lstm").get<bool>();
        c.fft_branch = j.at("fft_branch").get<bool>();
        c.leaky_slope = j.at("leaky_slope").get<double>();
        c.spatial_dropout_rate = j.at("spatial_dropout_rate").get<double>();
        c.dropout_rate = j.at("dropout_rate").get<double>();
        c.kernel_size = j.at("kernel_size").get<int>();
        c.base_filters = j.at("base_filters").get<int>();
        c.lstm_units = j.at("lstm_units").get<int>();
        c.lstm_layers = j.at("lstm_layers").get<int>();
        c.hidden_dense = j.at("hidden_dense").get<int>();
        c.n_classes = j.at("n_classes").get<int>();
        c.input_length = j.at("input_length").get<int>();
        c.fft_normalize = j.at("fft_normalize").get<bool>();
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("bad config in manifest: ") + e.what());
    }
    return c;
}

// weights.bin is little-endian on disk; byte-swap on big-endian hosts.
void to_disk_order(std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& f : v) {
            uint32_t u;
            std::memcpy(&u, &f, 4);
            u = __builtin_bswap32(u);
            std::memcpy(&f, &u, 4);
        }
    }
}

} // namespace

CheckpointData snapshot(const NetworkF& net, double best_validation_accuracy,
                        int epoch_of_best) {
    CheckpointData ck;
    ck.config = net.cfg;
    ck.best_validation_accuracy = best_validation_accuracy;
    ck.epoch_of_best = epoch_of_best;
    ck.tensors.reserve(net.params().size());
    for (const auto& p : net.params())
        ck.tensors.push_back({p.name, p.value->shape, p.value->data});
    return ck;
}

void apply_checkpoint(const CheckpointData& ckpt, NetworkF& net) {
    auto& params = net.params();
    if (ckpt.tensors.size() != params.size())
        throw KeySetMismatch("checkpoint has " + std::to_string(ckpt.tensors.size()) +
                             " tensors, network expects " + std::to_string(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& t = ckpt.tensors[i];
        auto& p = params[i];
        if (t.name != p.name)
            throw KeySetMismatch("checkpoint tensor '" + t.name + "' where network expects '" +
                                 p.name + "'");
        if (t.shape != p.value->shape)
            throw KeySetMismatch("checkpoint tensor '" + t.name + "' has a different shape");
        p.value->data = t.data;
    }
}

void save_checkpoint(const CheckpointData& ckpt, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create checkpoint directory " + dir + ": " + ec.message());

    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["config"] = config_to_json(ckpt.config);
    manifest["best_validation_accuracy"] = ckpt.best_validation_accuracy;
    manifest["epoch_of_best"] = ckpt.epoch_of_best;
    json tensors = json::array();
    int64_t offset = 0;
    for (const auto& t : ckpt.tensors) {
        tensors.push_back({{"name", t.name},
                           {"shape", t.shape},
                           {"offset", offset},
                           {"len", static_cast<int64_t>(t.data.size())}});
        offset += static_cast<int64_t>(t.data.size());
    }
    manifest["tensors"] = std::move(tensors);

    const fs::path base(dir);
    {
        std::ofstream out(base / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write " + (base / "manifest.json").string());
        out << manifest.dump(2) << "\n";
        if (!out) throw IoError("failed writing " + (base / "manifest.json").string());
    }
    {
        std::ofstream out(base / "weights.bin", std::ios::binary);
        if (!out) throw IoError("cannot write " + (base / "weights.bin").string());
        for (const auto& t : ckpt.tensors) {
            std::vector<float> buf = t.data;
            to_disk_order(buf);
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(buf.size() * sizeof(float)));
        }
        if (!out) throw IoError("failed writing " + (base / "weights.bin").string());
    }
}

CheckpointData load_checkpoint(const std::string& dir) {
    const fs::path base(dir);
    std::ifstream min(base / "manifest.json", std::ios::binary);
    if (!min) throw IoError("cannot open " + (base / "manifest.json").string());
    json manifest;
    try {
        min >> manifest;
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("manifest.json is not valid JSON: ") + e.what());
    }
    if (!manifest.contains("format_version") || !manifest["format_version"].is_number_integer())
        throw CorruptCheckpoint("manifest.json lacks format_version");
    if (manifest["format_version"].get<int>() != kFormatVersion)
        throw VersionMismatch("unsupported checkpoint format_version " +
                              manifest["format_version"].dump());
    if (!manifest.contains("config") || !manifest.contains("tensors"))
        throw CorruptCheckpoint("manifest.json lacks config or tensors");

    CheckpointData ck;
    ck.config = config_from_json(manifest["config"]);
    try {
        ck.config.validate();
    } catch (const ConfigError& e) {
        throw CorruptCheckpoint(std::string("invalid config in manifest: ") + e.what());
    }
    try {
        ck.best_validation_accuracy = manifest.value("best_validation_accuracy", 0.0);
        ck.epoch_of_best = manifest.value("epoch_of_best", 0);
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("bad manifest fields: ") + e.what());
    }

    int64_t expected_offset = 0;
    try {
        for (const auto& jt : manifest["tensors"]) {
            NamedTensor t;
            t.name = jt.at("name").get<std::string>();
            t.shape = jt.at("shape").get<std::vector<int>>();
            const auto offset = jt.at("offset").get<int64_t>();
            const auto len = jt.at("len").get<int64_t>();
            int64_t numel = 1;
            for (int d : t.shape) {
                if (d <= 0) throw CorruptCheckpoint("tensor '" + t.name + "' has a bad shape");
                numel *= d;
            }
            if (len != numel)
                throw CorruptCheckpoint("tensor '" + t.name + "' len does not match its shape");
            if (offset != expected_offset)
                throw CorruptCheckpoint("tensor '" + t.name + "' offset is not contiguous");
            expected_offset += len;
            t.data.resize(static_cast<size_t>(len));
            ck.tensors.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("bad tensor table: ") + e.what());
    }

    std::ifstream win(base / "weights.bin", std::ios::binary | std::ios::ate);
    if (!win) throw IoError("cannot open " + (base / "weights.bin").string());
    const auto file_bytes = static_cast<int64_t>(win.tellg());
    if (file_bytes != expected_offset * static_cast<int64_t>(sizeof(float)))
        throw CorruptCheckpoint("weights.bin holds " + std::to_string(file_bytes) +
                                " bytes, manifest expects " +
                                std::to_string(expected_offset * sizeof(float)));
    win.seekg(0);
    for (auto& t : ck.tensors) {
        win.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!win) throw CorruptCheckpoint("weights.bin truncated at tensor '" + t.name + "'");
        to_disk_order(t.data);
    }

    // Structural validation: the stored key set must equal the registry a
    // network built from this config produces.
    Rng probe_rng(0);
    NetworkF probe(ck.config, probe_rng);
    if (probe.params().size() != ck.tensors.size())
        throw KeySetMismatch("checkpoint key set does not match its config");
    for (size_t i = 0; i < ck.tensors.size(); ++i) {
        if (probe.params()[i].name != ck.tensors[i].name ||
            probe.params()[i].value->shape != ck.tensors[i].shape)
            throw KeySetMismatch("checkpoint tensor '" + ck.tensors[i].name +
                                 "' does not match the config's layer set");
    }
    return ck;
}

} // namespace egm::nn
