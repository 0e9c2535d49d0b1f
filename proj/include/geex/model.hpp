#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "geex/errors.hpp"
#include "geex/grid.hpp"

namespace geex {

// The black-box boundary. query() is the only thing an explainer may rely
// on; gradient() exists only behind the white-box capability flag.
class QueryModel {
public:
    virtual ~QueryModel() = default;

    virtual std::vector<double> query(const Grid& g) const = 0;
    virtual const Shape& input_shape() const = 0;
    virtual int num_classes() const = 0;

    virtual bool white_box() const { return false; }

    virtual Grid gradient(const Grid& /*g*/, int /*class_idx*/) const {
        raise(ErrorKind::NotWhiteBox, "model does not expose gradients");
    }

    // Declared input range, used when deletion replaces pixels with clipped
    // Gaussian draws.
    virtual std::pair<double, double> input_range() const { return {0.0, 1.0}; }

    std::vector<double> checked_query(const Grid& g) const {
        if (g.shape != input_shape())
            raise(ErrorKind::ShapeMismatch, "query: input shape " +
                                                shape_to_string(g.shape) +
                                                " vs model shape " +
                                                shape_to_string(input_shape()));
        if (!g.all_finite()) raise(ErrorKind::NonFiniteInput, "query: non-finite input");
        return query(g);
    }

    void check_class(int class_idx) const {
        if (class_idx < 0 || class_idx >= num_classes())
            raise(ErrorKind::BadClass, "class index " + std::to_string(class_idx) +
                                           " out of range [0," +
                                           std::to_string(num_classes()) + ")");
    }
};

using ModelPtr = std::shared_ptr<const QueryModel>;

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }
inline double sigmoid_deriv(double t) {
    const double s = sigmoid(t);
    return s * (1.0 - s);
}

// f([x]) = sigmoid(x), single input, single class.
class Sigmoid1dModel final : public QueryModel {
public:
    std::vector<double> query(const Grid& g) const override { return {sigmoid(g[0])}; }
    const Shape& input_shape() const override { return shape_; }
    int num_classes() const override { return 1; }
    bool white_box() const override { return true; }
    Grid gradient(const Grid& g, int class_idx) const override {
        check_class(class_idx);
        return Grid(shape_, {sigmoid_deriv(g[0])});
    }
    std::pair<double, double> input_range() const override { return {-10.0, 10.0}; }

private:
    Shape shape_{1};
};

// f([x, y]) = sigmoid(x): two features, the second one ignored. The textbook
// saturation case where raw gradients underrate the only relevant feature.
class SigmoidOfXOnly2dModel final : public QueryModel {
public:
    std::vector<double> query(const Grid& g) const override { return {sigmoid(g[0])}; }
    const Shape& input_shape() const override { return shape_; }
    int num_classes() const override { return 1; }
    bool white_box() const override { return true; }
    Grid gradient(const Grid& g, int class_idx) const override {
        check_class(class_idx);
        return Grid(shape_, {sigmoid_deriv(g[0]), 0.0});
    }
    std::pair<double, double> input_range() const override { return {-10.0, 10.0}; }

private:
    Shape shape_{2};
};

class LinearModel final : public QueryModel {
public:
    LinearModel(Grid w, double b) : w_(std::move(w)), b_(b) {}

    std::vector<double> query(const Grid& g) const override {
        double acc = b_;
        for (std::size_t i = 0; i < w_.size(); ++i) acc += w_[i] * g[i];
        return {acc};
    }
    const Shape& input_shape() const override { return w_.shape; }
    int num_classes() const override { return 1; }
    bool white_box() const override { return true; }
    Grid gradient(const Grid&, int class_idx) const override {
        check_class(class_idx);
        return w_;
    }
    std::pair<double, double> input_range() const override { return {-10.0, 10.0}; }

    const Grid& weights() const { return w_; }
    double bias() const { return b_; }

private:
    Grid w_;
    double b_;
};

class ConstantModel final : public QueryModel {
public:
    ConstantModel(double c, Shape shape) : c_(c), shape_(std::move(shape)) {}

    std::vector<double> query(const Grid&) const override { return {c_}; }
    const Shape& input_shape() const override { return shape_; }
    int num_classes() const override { return 1; }
    bool white_box() const override { return true; }
    Grid gradient(const Grid&, int class_idx) const override {
        check_class(class_idx);
        return Grid(shape_);
    }
    std::pair<double, double> input_range() const override { return {-10.0, 10.0}; }

    double value() const { return c_; }

private:
    double c_;
    Shape shape_;
};

// Adds a coordinate the inner model never sees: input of size p+1, the k-th
// coordinate is dropped before delegating.
class DummyFeatureModel final : public QueryModel {
public:
    DummyFeatureModel(std::size_t k, ModelPtr inner) : k_(k), inner_(std::move(inner)) {
        if (inner_->input_shape().size() != 1)
            raise(ErrorKind::BadArch, "dummy_feature wraps vector-shaped models only");
        shape_ = {inner_->input_shape()[0] + 1};
        if (k_ >= shape_[0]) raise(ErrorKind::BadArch, "dummy coordinate out of range");
    }

    std::vector<double> query(const Grid& g) const override {
        return inner_->query(strip(g));
    }
    const Shape& input_shape() const override { return shape_; }
    int num_classes() const override { return inner_->num_classes(); }
    bool white_box() const override { return inner_->white_box(); }
    Grid gradient(const Grid& g, int class_idx) const override {
        Grid inner_grad = inner_->gradient(strip(g), class_idx);
        Grid out(shape_);
        std::size_t j = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (i == k_) ? 0.0 : inner_grad[j++];
        return out;
    }
    std::pair<double, double> input_range() const override { return inner_->input_range(); }

    std::size_t dummy_index() const { return k_; }

private:
    Grid strip(const Grid& g) const {
        Grid inner_in(inner_->input_shape());
        std::size_t j = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (i != k_) inner_in[j++] = g[i];
        return inner_in;
    }

    std::size_t k_;
    ModelPtr inner_;
    Shape shape_;
};

// a*f1 + b*f2 over two models with matching shapes and class counts.
class LinearCombinationModel final : public QueryModel {
public:
    LinearCombinationModel(double a, ModelPtr m1, double b, ModelPtr m2)
        : a_(a), b_(b), m1_(std::move(m1)), m2_(std::move(m2)) {
        if (m1_->input_shape() != m2_->input_shape() ||
            m1_->num_classes() != m2_->num_classes())
            raise(ErrorKind::BadArch, "linear combination of incompatible models");
    }

    std::vector<double> query(const Grid& g) const override {
        std::vector<double> v1 = m1_->query(g);
        std::vector<double> v2 = m2_->query(g);
        for (std::size_t i = 0; i < v1.size(); ++i) v1[i] = a_ * v1[i] + b_ * v2[i];
        return v1;
    }
    const Shape& input_shape() const override { return m1_->input_shape(); }
    int num_classes() const override { return m1_->num_classes(); }
    bool white_box() const override { return m1_->white_box() && m2_->white_box(); }
    Grid gradient(const Grid& g, int class_idx) const override {
        return add(scale(m1_->gradient(g, class_idx), a_),
                   scale(m2_->gradient(g, class_idx), b_));
    }
    std::pair<double, double> input_range() const override { return m1_->input_range(); }

private:
    double a_, b_;
    ModelPtr m1_, m2_;
};

// Hides the gradient of an inner model; queries pass through unchanged.
class BlackBoxOnly final : public QueryModel {
public:
    explicit BlackBoxOnly(ModelPtr inner) : inner_(std::move(inner)) {}

    std::vector<double> query(const Grid& g) const override { return inner_->query(g); }
    const Shape& input_shape() const override { return inner_->input_shape(); }
    int num_classes() const override { return inner_->num_classes(); }
    std::pair<double, double> input_range() const override { return inner_->input_range(); }

private:
    ModelPtr inner_;
};

// Default target-class selection: argmax of the query at the explicand.
inline int select_class(const QueryModel& m, const Grid& x, int requested) {
    if (requested >= 0) {
        m.check_class(requested);
        return requested;
    }
    std::vector<double> scores = m.checked_query(x);
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) -
                            scores.begin());
}

}  // namespace geex
