#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geex/errors.hpp"
#include "geex/grid.hpp"
#include "geex/model.hpp"
#include "geex/rng.hpp"

namespace geex {

enum class Activation { Relu, Sigmoid, Identity, Softmax };

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
        case Activation::Softmax: return "softmax";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "identity") return Activation::Identity;
    if (s == "softmax") return Activation::Softmax;
    raise(ErrorKind::ParseError, "unknown activation '" + s + "'");
}

struct DenseLayer {
    Grid weights;  // [out, in], row-major
    Grid bias;     // [out]
    Activation activation = Activation::Identity;
};

// Fully connected network over flattened Grid inputs. White-box: exposes the
// exact analytic gradient of any class score via reverse-mode accumulation.
// Softmax is permitted only as the final activation (probability outputs).
class DenseNet final : public QueryModel {
public:
    DenseNet(Shape input_shape, std::vector<DenseLayer> layers)
        : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
        if (layers_.empty()) raise(ErrorKind::BadArch, "network needs at least one layer");
        std::size_t prev = shape_numel(input_shape_);
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const DenseLayer& layer = layers_[l];
            if (layer.weights.shape.size() != 2 ||
                layer.weights.shape[1] != prev ||
                layer.bias.size() != layer.weights.shape[0])
                raise(ErrorKind::BadArch,
                      "layer " + std::to_string(l) + " dimensions do not chain");
            if (layer.activation == Activation::Softmax && l + 1 != layers_.size())
                raise(ErrorKind::BadArch, "softmax is only valid on the final layer");
            prev = layer.weights.shape[0];
        }
    }

    std::vector<double> query(const Grid& g) const override {
        std::vector<double> a = g.data;
        for (const DenseLayer& layer : layers_) a = apply(layer, a).second;
        return a;
    }

    const Shape& input_shape() const override { return input_shape_; }
    int num_classes() const override {
        return static_cast<int>(layers_.back().weights.shape[0]);
    }
    bool white_box() const override { return true; }

    Grid gradient(const Grid& g, int class_idx) const override {
        check_class(class_idx);
        // forward, keeping pre-activations and activations
        std::vector<std::vector<double>> pre(layers_.size());
        std::vector<std::vector<double>> act(layers_.size() + 1);
        act[0] = g.data;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            auto [z, a] = apply(layers_[l], act[l]);
            pre[l] = std::move(z);
            act[l + 1] = std::move(a);
        }
        // seed at the selected class, then walk backwards
        std::vector<double> grad = output_seed(layers_.back(), pre.back(), act.back(),
                                               static_cast<std::size_t>(class_idx));
        for (std::size_t l = layers_.size(); l-- > 0;) {
            if (l + 1 != layers_.size())
                apply_activation_grad(layers_[l], pre[l], grad);
            grad = backprop_input(layers_[l], grad);
        }
        return Grid(input_shape_, std::move(grad));
    }

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& mutable_layers() { return layers_; }

private:
    static std::pair<std::vector<double>, std::vector<double>> apply(
        const DenseLayer& layer, const std::vector<double>& in) {
        const std::size_t rows = layer.weights.shape[0];
        const std::size_t cols = layer.weights.shape[1];
        std::vector<double> z(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = layer.bias[r];
            const double* w = layer.weights.data.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) acc += w[c] * in[c];
            z[r] = acc;
        }
        std::vector<double> a = z;
        switch (layer.activation) {
            case Activation::Relu:
                for (double& v : a) v = v > 0.0 ? v : 0.0;
                break;
            case Activation::Sigmoid:
                for (double& v : a) v = sigmoid(v);
                break;
            case Activation::Identity:
                break;
            case Activation::Softmax: {
                double mx = a[0];
                for (double v : a) mx = std::max(mx, v);
                double total = 0.0;
                for (double& v : a) {
                    v = std::exp(v - mx);
                    total += v;
                }
                for (double& v : a) v /= total;
                break;
            }
        }
        return {std::move(z), std::move(a)};
    }

    // d out[c] / d z for the final layer
    static std::vector<double> output_seed(const DenseLayer& layer,
                                           const std::vector<double>& z,
                                           const std::vector<double>& a,
                                           std::size_t c) {
        std::vector<double> g(z.size(), 0.0);
        switch (layer.activation) {
            case Activation::Identity:
                g[c] = 1.0;
                break;
            case Activation::Relu:
                g[c] = z[c] > 0.0 ? 1.0 : 0.0;
                break;
            case Activation::Sigmoid:
                g[c] = a[c] * (1.0 - a[c]);
                break;
            case Activation::Softmax:
                for (std::size_t j = 0; j < z.size(); ++j)
                    g[j] = a[c] * ((j == c ? 1.0 : 0.0) - a[j]);
                break;
        }
        return g;
    }

    static void apply_activation_grad(const DenseLayer& layer,
                                      const std::vector<double>& z,
                                      std::vector<double>& g) {
        switch (layer.activation) {
            case Activation::Relu:
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (z[i] <= 0.0) g[i] = 0.0;
                break;
            case Activation::Sigmoid:
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double s = sigmoid(z[i]);
                    g[i] *= s * (1.0 - s);
                }
                break;
            case Activation::Identity:
                break;
            case Activation::Softmax:
                raise(ErrorKind::BadArch, "softmax below the final layer");
        }
    }

    static std::vector<double> backprop_input(const DenseLayer& layer,
                                              const std::vector<double>& g_z) {
        const std::size_t rows = layer.weights.shape[0];
        const std::size_t cols = layer.weights.shape[1];
        std::vector<double> out(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* w = layer.weights.data.data() + r * cols;
            const double gr = g_z[r];
            for (std::size_t c = 0; c < cols; ++c) out[c] += w[c] * gr;
        }
        return out;
    }

    Shape input_shape_;
    std::vector<DenseLayer> layers_;
};

// ---------------------------------------------------------------------------
// Synthetic data and the toy trainer
// ---------------------------------------------------------------------------

struct LabeledDataset {
    Shape input_shape;
    int num_classes = 0;
    std::vector<Grid> inputs;
    std::vector<int> labels;
    // ground-truth relevant pixels per class (flat indices of the 3x3 patch)
    std::vector<std::vector<std::size_t>> class_patches;
};

// Bright 3x3 patch top-left = class 0, bottom-right = class 1, additive
// Gaussian noise. Classes alternate, so even n is exactly balanced.
inline LabeledDataset gen_synthetic_dataset(int n, double noise_sigma,
                                            std::uint64_t seed) {
    if (n < 2) raise(ErrorKind::BadCount, "dataset needs at least 2 samples");
    LabeledDataset ds;
    ds.input_shape = {8, 8};
    ds.num_classes = 2;
    auto patch = [](std::size_t r0, std::size_t c0) {
        std::vector<std::size_t> idx;
        for (std::size_t r = r0; r < r0 + 3; ++r)
            for (std::size_t c = c0; c < c0 + 3; ++c) idx.push_back(r * 8 + c);
        return idx;
    };
    ds.class_patches = {patch(1, 1), patch(4, 4)};

    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        Grid g(ds.input_shape);
        for (std::size_t p : ds.class_patches[label]) g[p] = 1.0;
        if (noise_sigma > 0.0) {
            CounterRng rng(seed, 0x44415441ULL ^ static_cast<std::uint64_t>(i));
            for (double& v : g.data) v += noise_sigma * rng.normal();
        }
        ds.inputs.push_back(std::move(g));
        ds.labels.push_back(label);
    }
    return ds;
}

struct TrainResult {
    std::shared_ptr<DenseNet> net;
    double train_accuracy = 0.0;
};

inline DenseNet random_dense_net(const Shape& input_shape,
                                 const std::vector<int>& layer_sizes,
                                 const std::vector<Activation>& activations,
                                 std::uint64_t seed) {
    if (layer_sizes.empty() || layer_sizes.size() != activations.size())
        raise(ErrorKind::BadArch, "layer sizes and activations must match and be non-empty");
    std::vector<DenseLayer> layers;
    std::size_t prev = shape_numel(input_shape);
    for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
        if (layer_sizes[l] <= 0) raise(ErrorKind::BadArch, "non-positive layer size");
        const std::size_t out = static_cast<std::size_t>(layer_sizes[l]);
        CounterRng rng(seed, 0x494e4954ULL ^ l);
        DenseLayer layer;
        layer.weights = Grid({out, prev});
        const double s = 1.0 / std::sqrt(static_cast<double>(prev));
        for (double& v : layer.weights.data) v = s * rng.normal();
        layer.bias = Grid({out});
        layer.activation = activations[l];
        layers.push_back(std::move(layer));
        prev = out;
    }
    return DenseNet(input_shape, std::move(layers));
}

// Full-batch gradient descent on softmax cross-entropy. Deterministic given
// the seed; epochs=0 returns the seeded initialization unchanged.
inline TrainResult train_toy(const LabeledDataset& ds,
                             const std::vector<int>& hidden_sizes, int epochs,
                             double lr, std::uint64_t seed) {
    if (ds.inputs.empty()) raise(ErrorKind::EmptyDataset, "empty training set");
    std::vector<int> sizes = hidden_sizes;
    sizes.push_back(ds.num_classes);
    std::vector<Activation> acts(hidden_sizes.size(), Activation::Sigmoid);
    acts.push_back(Activation::Softmax);
    auto net = std::make_shared<DenseNet>(
        random_dense_net(ds.input_shape, sizes, acts, seed));

    const std::size_t n = ds.inputs.size();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::vector<DenseLayer>& layers = net->mutable_layers();
        // accumulated gradients, zero-initialized each epoch
        std::vector<Grid> gw, gb;
        for (const DenseLayer& l : layers) {
            gw.emplace_back(l.weights.shape);
            gb.emplace_back(l.bias.shape);
        }
        for (std::size_t i = 0; i < n; ++i) {
            // forward
            std::vector<std::vector<double>> pre(layers.size());
            std::vector<std::vector<double>> act(layers.size() + 1);
            act[0] = ds.inputs[i].data;
            for (std::size_t l = 0; l < layers.size(); ++l) {
                const DenseLayer& layer = layers[l];
                const std::size_t rows = layer.weights.shape[0];
                const std::size_t cols = layer.weights.shape[1];
                std::vector<double> z(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    double acc = layer.bias[r];
                    const double* w = layer.weights.data.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * act[l][c];
                    z[r] = acc;
                }
                std::vector<double> a = z;
                if (layer.activation == Activation::Sigmoid)
                    for (double& v : a) v = sigmoid(v);
                else if (layer.activation == Activation::Relu)
                    for (double& v : a) v = v > 0.0 ? v : 0.0;
                else if (layer.activation == Activation::Softmax) {
                    double mx = a[0];
                    for (double v : a) mx = std::max(mx, v);
                    double total = 0.0;
                    for (double& v : a) {
                        v = std::exp(v - mx);
                        total += v;
                    }
                    for (double& v : a) v /= total;
                }
                pre[l] = std::move(z);
                act[l + 1] = std::move(a);
            }
            // softmax + cross-entropy: delta at final pre-activation = p - y
            std::vector<double> delta = act.back();
            delta[static_cast<std::size_t>(ds.labels[i])] -= 1.0;
            for (std::size_t l = layers.size(); l-- > 0;) {
                const DenseLayer& layer = layers[l];
                const std::size_t rows = layer.weights.shape[0];
                const std::size_t cols = layer.weights.shape[1];
                if (l + 1 != layers.size()) {
                    if (layer.activation == Activation::Sigmoid)
                        for (std::size_t r = 0; r < rows; ++r) {
                            const double s = sigmoid(pre[l][r]);
                            delta[r] *= s * (1.0 - s);
                        }
                    else if (layer.activation == Activation::Relu)
                        for (std::size_t r = 0; r < rows; ++r)
                            if (pre[l][r] <= 0.0) delta[r] = 0.0;
                }
                for (std::size_t r = 0; r < rows; ++r) {
                    gb[l][r] += delta[r];
                    double* gwr = gw[l].data.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c)
                        gwr[c] += delta[r] * act[l][c];
                }
                if (l > 0) {
                    std::vector<double> prev_delta(cols, 0.0);
                    for (std::size_t r = 0; r < rows; ++r) {
                        const double* w = layers[l].weights.data.data() + r * cols;
                        for (std::size_t c = 0; c < cols; ++c)
                            prev_delta[c] += w[c] * delta[r];
                    }
                    delta = std::move(prev_delta);
                }
            }
        }
        const double step = lr / static_cast<double>(n);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            for (std::size_t j = 0; j < layers[l].weights.size(); ++j)
                layers[l].weights[j] -= step * gw[l][j];
            for (std::size_t j = 0; j < layers[l].bias.size(); ++j)
                layers[l].bias[j] -= step * gb[l][j];
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p = net->query(ds.inputs[i]);
        const int pred = static_cast<int>(std::max_element(p.begin(), p.end()) -
                                          p.begin());
        if (pred == ds.labels[i]) ++correct;
    }
    return {net, static_cast<double>(correct) / static_cast<double>(n)};
}

}  // namespace geex
