#pragma once

// Fully connected ReLU network with exact backpropagation of a weighted
// squared TD loss. All coefficients of a network live in one flat buffer
// (per layer: row-major weights, then biases), which keeps the optimizer,
// soft-update and finite-difference loops trivial.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace cbrl::nn {

enum class Activation { ReLU, Identity };
enum class Direction { Descent, Ascent };

struct LayerSpec {
    std::size_t input_dim = 1;
    std::size_t output_dim = 1;
    Activation activation = Activation::Identity;

    bool operator==(const LayerSpec&) const = default;
};

class Layout {
public:
    Layout() = default;

    explicit Layout(std::vector<LayerSpec> specs) : specs_(std::move(specs)) {
        if (specs_.empty()) throw dimension_mismatch("network needs at least one layer");
        std::size_t offset = 0;
        for (std::size_t l = 0; l < specs_.size(); ++l) {
            const auto& s = specs_[l];
            if (s.input_dim < 1 || s.output_dim < 1) throw dimension_mismatch("layer dimensions must be >= 1");
            if (l > 0 && specs_[l - 1].output_dim != s.input_dim) {
                throw dimension_mismatch("layer " + std::to_string(l) + " expects " + std::to_string(s.input_dim) +
                                         " inputs but layer " + std::to_string(l - 1) + " produces " +
                                         std::to_string(specs_[l - 1].output_dim));
            }
            weight_offsets_.push_back(offset);
            offset += s.input_dim * s.output_dim;
            bias_offsets_.push_back(offset);
            offset += s.output_dim;
        }
        if (specs_.back().activation != Activation::Identity) {
            throw invalid_parameter("final layer must use the identity activation");
        }
        size_ = offset;
    }

    const std::vector<LayerSpec>& specs() const { return specs_; }
    std::size_t layer_count() const { return specs_.size(); }
    std::size_t size() const { return size_; }
    std::size_t weight_offset(std::size_t l) const { return weight_offsets_[l]; }
    std::size_t bias_offset(std::size_t l) const { return bias_offsets_[l]; }
    std::size_t input_dim() const { return specs_.front().input_dim; }
    std::size_t output_dim() const { return specs_.back().output_dim; }
    std::size_t max_width() const {
        std::size_t w = input_dim();
        for (const auto& s : specs_) w = std::max(w, s.output_dim);
        return w;
    }

    bool operator==(const Layout& other) const { return specs_ == other.specs_; }

private:
    std::vector<LayerSpec> specs_;
    std::vector<std::size_t> weight_offsets_;
    std::vector<std::size_t> bias_offsets_;
    std::size_t size_ = 0;
};

/// Flat coefficient storage tied to a layout. Tagged so parameters and
/// gradients cannot be mixed up.
template <typename Tag>
class Coefficients {
public:
    Coefficients() = default;
    explicit Coefficients(Layout layout) : layout_(std::move(layout)), values_(layout_.size(), 0.0) {}

    const Layout& layout() const { return layout_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> weights(std::size_t l) {
        const auto& s = layout_.specs()[l];
        return {values_.data() + layout_.weight_offset(l), s.input_dim * s.output_dim};
    }
    std::span<const double> weights(std::size_t l) const {
        const auto& s = layout_.specs()[l];
        return {values_.data() + layout_.weight_offset(l), s.input_dim * s.output_dim};
    }
    std::span<double> bias(std::size_t l) {
        return {values_.data() + layout_.bias_offset(l), layout_.specs()[l].output_dim};
    }
    std::span<const double> bias(std::size_t l) const {
        return {values_.data() + layout_.bias_offset(l), layout_.specs()[l].output_dim};
    }

    bool congruent(const Layout& other) const { return layout_ == other && values_.size() == other.size(); }

    bool operator==(const Coefficients&) const = default;

private:
    Layout layout_;
    std::vector<double> values_;
};

using NetworkParams = Coefficients<struct ParamsTag>;
using GradientSet = Coefficients<struct GradientTag>;

template <typename A, typename B>
void require_congruent(const Coefficients<A>& a, const Coefficients<B>& b, const char* what) {
    if (!a.congruent(b.layout())) throw dimension_mismatch(std::string(what) + ": shape mismatch");
}

/// input -> width (ReLU) x hidden_layers -> outputs (identity)
inline std::vector<LayerSpec> mlp_specs(std::size_t inputs, std::size_t width, std::size_t hidden_layers,
                                        std::size_t outputs) {
    std::vector<LayerSpec> specs;
    std::size_t prev = inputs;
    for (std::size_t h = 0; h < hidden_layers; ++h) {
        specs.push_back({prev, width, Activation::ReLU});
        prev = width;
    }
    specs.push_back({prev, outputs, Activation::Identity});
    return specs;
}

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
inline NetworkParams init_network(std::vector<LayerSpec> specs, Rng& rng) {
    NetworkParams params{Layout(std::move(specs))};
    for (std::size_t l = 0; l < params.layout().layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(params.layout().specs()[l].input_dim));
        for (double& w : params.weights(l)) w = uniform(rng, -bound, bound);
    }
    return params;
}

namespace detail {

// Four interleaved partial sums; fixed order, so results are reproducible.
inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

// y = W x + b, optionally rectified. W is row-major (out x in).
inline void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
                   std::span<double> y, Activation act) {
    const std::size_t in = x.size();
    for (std::size_t o = 0; o < y.size(); ++o) {
        const double acc = dot(w.data() + o * in, x.data(), in) + b[o];
        y[o] = (act == Activation::ReLU && acc < 0.0) ? 0.0 : acc;
    }
}

}  // namespace detail

inline std::vector<double> forward(const NetworkParams& params, std::span<const double> input) {
    const auto& layout = params.layout();
    if (input.size() != layout.input_dim()) {
        throw dimension_mismatch("forward: input has " + std::to_string(input.size()) + " entries, network expects " +
                                 std::to_string(layout.input_dim()));
    }
    std::vector<double> current(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layout.layer_count(); ++l) {
        const auto& s = layout.specs()[l];
        next.assign(s.output_dim, 0.0);
        detail::affine(params.weights(l), params.bias(l), current, next, s.activation);
        current.swap(next);
    }
    return current;
}

/// One regression sample for the TD loss: only output unit `action` is
/// compared against `target`, and its squared error is scaled by `weight`.
struct TrainingSample {
    std::span<const double> input;
    std::size_t action = 0;
    double target = 0.0;
    double weight = 1.0;
};

struct LossGradient {
    GradientSet gradient;
    double loss = 0.0;
};

inline void check_sample(const NetworkParams& params, const TrainingSample& s) {
    if (s.input.size() != params.layout().input_dim()) throw dimension_mismatch("training sample input size");
    if (s.action >= params.layout().output_dim()) throw dimension_mismatch("training sample action out of range");
}

/// L = (1/B) * sum_j weight_j * (target_j - Q(input_j)[action_j])^2
inline double weighted_loss(const NetworkParams& params, std::span<const TrainingSample> batch) {
    if (batch.empty()) throw invalid_parameter("loss needs a nonempty minibatch");
    double loss = 0.0;
    for (const auto& s : batch) {
        check_sample(params, s);
        const double err = s.target - forward(params, s.input)[s.action];
        loss += s.weight * err * err;
    }
    return loss / static_cast<double>(batch.size());
}

/// Exact gradient of weighted_loss with respect to every coefficient.
inline LossGradient backward(const NetworkParams& params, std::span<const TrainingSample> batch) {
    if (batch.empty()) throw invalid_parameter("backward needs a nonempty minibatch");
    const auto& layout = params.layout();
    const std::size_t layers = layout.layer_count();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    LossGradient out{GradientSet(layout), 0.0};
    // activations[l] is the input of layer l; activations[layers] the output.
    std::vector<std::vector<double>> activations(layers + 1);
    std::vector<double> delta, delta_prev;

    for (const auto& s : batch) {
        check_sample(params, s);
        if (s.weight < 0.0) throw invalid_parameter("sample weights must be non-negative");

        activations[0].assign(s.input.begin(), s.input.end());
        for (std::size_t l = 0; l < layers; ++l) {
            const auto& spec = layout.specs()[l];
            activations[l + 1].assign(spec.output_dim, 0.0);
            detail::affine(params.weights(l), params.bias(l), activations[l], activations[l + 1], spec.activation);
        }

        const double err = s.target - activations[layers][s.action];
        out.loss += s.weight * err * err;

        delta.assign(layout.output_dim(), 0.0);
        delta[s.action] = -2.0 * s.weight * err * inv_batch;

        for (std::size_t l = layers; l-- > 0;) {
            const auto& spec = layout.specs()[l];
            const std::size_t in = spec.input_dim;
            const auto& x = activations[l];
            auto gw = out.gradient.weights(l);
            auto gb = out.gradient.bias(l);
            for (std::size_t o = 0; o < spec.output_dim; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                gb[o] += d;
                double* row = gw.data() + o * in;
                for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
            }
            if (l == 0) break;

            // Propagate to the previous layer's (rectified) output.
            const auto w = params.weights(l);
            delta_prev.assign(in, 0.0);
            for (std::size_t o = 0; o < spec.output_dim; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = w.data() + o * in;
                for (std::size_t i = 0; i < in; ++i) delta_prev[i] += d * row[i];
            }
            if (layout.specs()[l - 1].activation == Activation::ReLU) {
                for (std::size_t i = 0; i < in; ++i)
                    if (x[i] <= 0.0) delta_prev[i] = 0.0;
            }
            delta.swap(delta_prev);
        }
    }
    out.loss *= inv_batch;
    return out;
}

/// Central differences of weighted_loss, one coefficient at a time.
inline GradientSet finite_difference_gradient(const NetworkParams& params, std::span<const TrainingSample> batch,
                                              double h) {
    if (!(h > 0.0)) throw invalid_parameter("finite-difference step must be positive");
    GradientSet grad(params.layout());
    NetworkParams probe = params;
    for (std::size_t k = 0; k < probe.size(); ++k) {
        const double original = probe[k];
        probe[k] = original + h;
        const double plus = weighted_loss(probe, batch);
        probe[k] = original - h;
        const double minus = weighted_loss(probe, batch);
        probe[k] = original;
        grad[k] = (plus - minus) / (2.0 * h);
    }
    return grad;
}

inline double direction_sign(Direction d) { return d == Direction::Descent ? -1.0 : 1.0; }

/// Descent: theta - step * g. Ascent: theta + step * g.
inline NetworkParams sgd_step(NetworkParams params, const GradientSet& grads, double step_size, Direction direction) {
    require_congruent(params, grads, "sgd_step");
    if (!(step_size >= 0.0)) throw invalid_parameter("step size must be non-negative");
    const double scale = direction_sign(direction) * step_size;
    auto theta = params.values();
    const auto g = grads.values();
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += scale * g[k];
    return params;
}

inline std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "identity") return Activation::Identity;
    throw invalid_parameter("unknown activation '" + s + "'");
}

}  // namespace cbrl::nn
