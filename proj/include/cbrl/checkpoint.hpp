#pragma once

// Network checkpoints as JSON:
//
//   {
//     "format": "cbrl.mlp", "version": 1,
//     "layers": [
//       {"input_dim": 8, "output_dim": 128, "activation": "relu",
//        "weights": [...output_dim*input_dim values, row-major...],
//        "bias": [...output_dim values...]},
//       ...
//     ]
//   }
//
// Doubles are written in shortest round-trip form, so load(save(p)) == p.

#include <fstream>
#include <string>

#include <json.hpp>

#include "network.hpp"

namespace cbrl::nn {

inline constexpr const char* kCheckpointFormat = "cbrl.mlp";
inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json to_json(const NetworkParams& params) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < params.layout().layer_count(); ++l) {
        const auto& s = params.layout().specs()[l];
        const auto w = params.weights(l);
        const auto b = params.bias(l);
        layers.push_back({{"input_dim", s.input_dim},
                          {"output_dim", s.output_dim},
                          {"activation", to_string(s.activation)},
                          {"weights", std::vector<double>(w.begin(), w.end())},
                          {"bias", std::vector<double>(b.begin(), b.end())}});
    }
    return {{"format", kCheckpointFormat}, {"version", kCheckpointVersion}, {"layers", layers}};
}

inline NetworkParams network_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != kCheckpointFormat || j.value("version", 0) != kCheckpointVersion) {
        throw invalid_parameter("not a cbrl.mlp v1 checkpoint");
    }
    std::vector<LayerSpec> specs;
    for (const auto& layer : j.at("layers")) {
        specs.push_back({layer.at("input_dim").get<std::size_t>(), layer.at("output_dim").get<std::size_t>(),
                         activation_from_string(layer.at("activation").get<std::string>())});
    }
    NetworkParams params{Layout(std::move(specs))};
    std::size_t l = 0;
    for (const auto& layer : j.at("layers")) {
        const auto w = layer.at("weights").get<std::vector<double>>();
        const auto b = layer.at("bias").get<std::vector<double>>();
        auto pw = params.weights(l);
        auto pb = params.bias(l);
        if (w.size() != pw.size() || b.size() != pb.size()) {
            throw dimension_mismatch("checkpoint layer " + std::to_string(l) + " has wrong coefficient count");
        }
        std::copy(w.begin(), w.end(), pw.begin());
        std::copy(b.begin(), b.end(), pb.begin());
        ++l;
    }
    return params;
}

inline void save_checkpoint(const NetworkParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << to_json(params).dump() << '\n';
}

inline NetworkParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path);
    return network_from_json(nlohmann::json::parse(in));
}

}  // namespace cbrl::nn
