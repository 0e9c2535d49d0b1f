#pragma once

#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "geex/dense_net.hpp"
#include "geex/errors.hpp"
#include "geex/model.hpp"

namespace geex {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json analytic_to_json(const QueryModel& m);

inline json model_to_json(const QueryModel& m) {
    json j;
    j["format_version"] = kModelFormatVersion;
    if (const auto* net = dynamic_cast<const DenseNet*>(&m)) {
        j["kind"] = "dense";
        j["input_shape"] = net->input_shape();
        j["num_classes"] = net->num_classes();
        json layers = json::array();
        for (const DenseLayer& l : net->layers()) {
            json jl;
            jl["rows"] = l.weights.shape[0];
            jl["cols"] = l.weights.shape[1];
            jl["activation"] = activation_name(l.activation);
            jl["weights"] = l.weights.data;
            jl["bias"] = l.bias.data;
            layers.push_back(std::move(jl));
        }
        j["layers"] = std::move(layers);
        return j;
    }
    j["kind"] = "analytic";
    j["analytic"] = analytic_to_json(m);
    return j;
}

inline json analytic_to_json(const QueryModel& m) {
    json j;
    if (dynamic_cast<const Sigmoid1dModel*>(&m)) {
        j["type"] = "sigmoid1d";
    } else if (dynamic_cast<const SigmoidOfXOnly2dModel*>(&m)) {
        j["type"] = "sigmoid_of_x_only_2d";
    } else if (const auto* lin = dynamic_cast<const LinearModel*>(&m)) {
        j["type"] = "linear";
        j["w_shape"] = lin->weights().shape;
        j["w"] = lin->weights().data;
        j["b"] = lin->bias();
    } else if (const auto* c = dynamic_cast<const ConstantModel*>(&m)) {
        j["type"] = "constant";
        j["c"] = c->value();
        j["input_shape"] = m.input_shape();
    } else {
        raise(ErrorKind::BadArch, "model type is not serializable");
    }
    return j;
}

inline ModelPtr analytic_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "sigmoid1d") return std::make_shared<Sigmoid1dModel>();
    if (type == "sigmoid_of_x_only_2d") return std::make_shared<SigmoidOfXOnly2dModel>();
    if (type == "linear") {
        Grid w(j.at("w_shape").get<Shape>(), j.at("w").get<std::vector<double>>());
        return std::make_shared<LinearModel>(std::move(w), j.at("b").get<double>());
    }
    if (type == "constant")
        return std::make_shared<ConstantModel>(j.at("c").get<double>(),
                                               j.at("input_shape").get<Shape>());
    raise(ErrorKind::ParseError, "unknown analytic model type '" + type + "'");
}

}  // namespace detail

inline void save_model(const QueryModel& m, const std::string& path,
                       bool black_box_only = false) {
    detail::json j = detail::model_to_json(m);
    if (black_box_only) j["capability"] = "black_box";
    std::ofstream out(path);
    if (!out) raise(ErrorKind::ParseError, "cannot open '" + path + "' for writing");
    out << j.dump(1) << "\n";
}

inline ModelPtr load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, "cannot open model file '" + path + "'");
    detail::json j;
    try {
        j = detail::json::parse(in);
    } catch (const detail::json::parse_error& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            raise(ErrorKind::VersionMismatch,
                  path + ": format_version " + std::to_string(version) +
                      ", expected " + std::to_string(kModelFormatVersion));
        const std::string kind = j.at("kind").get<std::string>();
        ModelPtr model;
        if (kind == "dense") {
            Shape input_shape = j.at("input_shape").get<Shape>();
            std::vector<DenseLayer> layers;
            std::size_t prev = shape_numel(input_shape);
            std::size_t idx = 0;
            for (const auto& jl : j.at("layers")) {
                const std::size_t rows = jl.at("rows").get<std::size_t>();
                const std::size_t cols = jl.at("cols").get<std::size_t>();
                if (cols != prev)
                    raise(ErrorKind::BadArch,
                          path + ": layer " + std::to_string(idx) + " expects " +
                              std::to_string(cols) + " inputs but receives " +
                              std::to_string(prev));
                DenseLayer l;
                auto weights = jl.at("weights").get<std::vector<double>>();
                auto bias = jl.at("bias").get<std::vector<double>>();
                if (weights.size() != rows * cols || bias.size() != rows)
                    raise(ErrorKind::BadArch,
                          path + ": layer " + std::to_string(idx) +
                              " weight/bias lengths do not match rows x cols");
                l.weights = Grid({rows, cols}, std::move(weights));
                l.bias = Grid({rows}, std::move(bias));
                l.activation = activation_from_name(jl.at("activation").get<std::string>());
                layers.push_back(std::move(l));
                prev = rows;
                ++idx;
            }
            model = std::make_shared<DenseNet>(std::move(input_shape), std::move(layers));
        } else if (kind == "analytic") {
            model = detail::analytic_from_json(j.at("analytic"));
        } else {
            raise(ErrorKind::ParseError, path + ": unknown model kind '" + kind + "'");
        }
        if (j.value("capability", "white_box") == "black_box")
            model = std::make_shared<BlackBoxOnly>(model);
        return model;
    } catch (const detail::json::exception& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }
}

}  // namespace geex
