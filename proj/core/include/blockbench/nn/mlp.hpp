#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blockbench/common.hpp"

namespace blockbench::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation {
    Identity,
    Tanh,
    /// First half of the outputs is a mean (identity), second half a
    /// standard deviation softplus(z) + kStdFloor.
    Gaussian,
};

const char* to_string(OutputActivation a);
OutputActivation output_activation_from_string(const std::string& s);

inline constexpr double kStdFloor = 1e-6;

double softplus(double z);
double sigmoid(double z);

class Mlp;

/// Intermediates of one batched forward pass, consumed by Mlp::backward.
struct ForwardCache {
    /// Input to each layer; inputs[0] is the network input.
    std::vector<Matrix> inputs;
    /// Pre-activation of each layer.
    std::vector<Matrix> pre;
    Matrix output;
    const Mlp* owner = nullptr;
    std::uint64_t version = 0;
};

/// Parameter-shaped gradient (or moment) buffers.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static Gradients zeros_like(const Mlp& net);

    Gradients& operator+=(const Gradients& other);
    Gradients& operator*=(double s);
    [[nodiscard]] bool all_finite() const;
    [[nodiscard]] double squared_norm() const;
};

/// Fully connected network, ReLU hidden layers. Batches are column-major:
/// one sample per column.
class Mlp {
public:
    Mlp() = default;

    /// Uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    /// The final layer is additionally multiplied by `final_layer_scale`.
    Mlp(std::vector<int> widths, OutputActivation activation, Rng& rng, double final_layer_scale = 1.0);

    [[nodiscard]] const std::vector<int>& widths() const { return widths_; }
    [[nodiscard]] int input_size() const { return widths_.front(); }
    [[nodiscard]] int output_size() const { return widths_.back(); }
    [[nodiscard]] std::size_t layer_count() const { return weights_.size(); }
    [[nodiscard]] OutputActivation activation() const { return activation_; }

    /// Throws DomainError on shape mismatch.
    Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const;
    Vector forward(const Vector& x) const;

    /// Reverse-mode gradients of the scalar whose gradient w.r.t. the output
    /// is `grad_out`. Writes d/d(input) into `grad_input` when given. Throws
    /// DomainError if `cache` came from a different network or the
    /// parameters changed since it was filled.
    Gradients backward(const ForwardCache& cache, const Matrix& grad_out, Matrix* grad_input = nullptr) const;

    [[nodiscard]] const std::vector<Matrix>& weights() const { return weights_; }
    [[nodiscard]] const std::vector<Vector>& biases() const { return biases_; }
    /// Mutable access invalidates outstanding caches.
    std::vector<Matrix>& mutable_weights();
    std::vector<Vector>& mutable_biases();

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    /// Flat index in layer order: W0 (column-major), b0, W1, b1, ...
    [[nodiscard]] double parameter(std::size_t index) const;
    void set_parameter(std::size_t index, double value);
    [[nodiscard]] bool all_finite() const;
    [[nodiscard]] std::uint64_t version() const { return version_; }

    friend bool operator==(const Mlp& a, const Mlp& b);

private:
    std::pair<std::size_t, std::size_t> locate(std::size_t index, bool& is_bias) const;

    std::vector<int> widths_;
    OutputActivation activation_ = OutputActivation::Identity;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
    std::uint64_t version_ = 0;
};

/// target <- tau * online + (1 - tau) * target, parameter-wise.
void soft_update(Mlp& target, const Mlp& online, double tau);

} // namespace blockbench::nn
