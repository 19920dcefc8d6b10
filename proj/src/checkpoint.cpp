#include "loadcast/checkpoint.hpp"

#include "loadcast/error.hpp"

#include <fstream>

namespace loadcast {

using nlohmann::json;

json checkpoint_to_json(const ModelParameters& params, const OptimizerState* optimizer) {
    json j;
    j["format"] = "loadcast-checkpoint";
    j["version"] = kCheckpointVersion;
    j["cell"] = to_string(params.kind());
    j["input_size"] = params.input_size();
    j["hidden_size"] = params.hidden_size();
    j["tensors"] = json::array();
    const auto values = params.values();
    for (const auto& t : params.tensors()) {
        j["tensors"].push_back({{"name", t.name},
                                {"shape", t.shape},
                                {"data", std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(t.offset),
                                                             values.begin() + static_cast<std::ptrdiff_t>(t.offset + t.size))}});
    }
    if (optimizer) {
        j["optimizer"] = {{"learning_rate", optimizer->config.learning_rate},
                          {"decay", optimizer->config.decay},
                          {"epsilon", optimizer->config.epsilon},
                          {"accum", optimizer->accum}};
    }
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    auto fail = [](const std::string& msg) { throw ShapeMismatch("checkpoint: " + msg); };
    if (j.value("format", "") != "loadcast-checkpoint") fail("not a loadcast checkpoint");
    if (j.value("version", 0) != kCheckpointVersion) fail("unsupported version");

    Checkpoint cp;
    cp.params = ModelParameters(parse_cell_kind(j.at("cell").get<std::string>()), j.at("input_size").get<std::size_t>(),
                                j.at("hidden_size").get<std::size_t>());
    auto values = cp.params.values();
    const auto expected = cp.params.tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != expected.size()) fail("wrong tensor count");
    for (std::size_t k = 0; k < expected.size(); ++k) {
        const auto& t = tensors[k];
        if (t.at("name").get<std::string>() != expected[k].name) fail("unexpected tensor '" + t.at("name").get<std::string>() + "'");
        if (t.at("shape").get<std::vector<std::size_t>>() != expected[k].shape) fail("shape mismatch for " + expected[k].name);
        const auto data = t.at("data").get<std::vector<double>>();
        if (data.size() != expected[k].size) fail("data length mismatch for " + expected[k].name);
        std::copy(data.begin(), data.end(), values.begin() + static_cast<std::ptrdiff_t>(expected[k].offset));
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        OptimizerState st;
        st.config = {o.at("learning_rate").get<double>(), o.at("decay").get<double>(), o.at("epsilon").get<double>()};
        st.accum = o.at("accum").get<std::vector<double>>();
        if (st.accum.size() != cp.params.size()) fail("optimizer accumulator length mismatch");
        cp.optimizer = std::move(st);
    }
    return cp;
}

void save_checkpoint(const std::string& path, const ModelParameters& params, const OptimizerState* optimizer) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("neuralnet", "cannot write checkpoint '" + path + "'");
    out << checkpoint_to_json(params, optimizer).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("neuralnet", "cannot open checkpoint '" + path + "'");
    return checkpoint_from_json(json::parse(in));
}

}  // namespace loadcast
