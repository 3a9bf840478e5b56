#include "blockbench/nn/mlp.hpp"

#include <cmath>

namespace blockbench::nn {

const char* to_string(OutputActivation a) {
    switch (a) {
    case OutputActivation::Identity: return "identity";
    case OutputActivation::Tanh: return "tanh";
    case OutputActivation::Gaussian: return "gaussian";
    }
    return "?";
}

OutputActivation output_activation_from_string(const std::string& s) {
    if (s == "identity") return OutputActivation::Identity;
    if (s == "tanh") return OutputActivation::Tanh;
    if (s == "gaussian") return OutputActivation::Gaussian;
    throw DomainError("unknown output activation '" + s + "'");
}

double softplus(double z) {
    // log(1 + e^z) without overflow
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Gradients Gradients::zeros_like(const Mlp& net) {
    Gradients g;
    for (const auto& w : net.weights()) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : net.biases()) g.biases.push_back(Vector::Zero(b.size()));
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    if (other.weights.size() != weights.size()) throw DomainError("Gradients: layer count mismatch");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] += other.weights[i];
        biases[i] += other.biases[i];
    }
    return *this;
}

Gradients& Gradients::operator*=(double s) {
    for (auto& w : weights) w *= s;
    for (auto& b : biases) b *= s;
    return *this;
}

bool Gradients::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

double Gradients::squared_norm() const {
    double s = 0.0;
    for (const auto& w : weights) s += w.squaredNorm();
    for (const auto& b : biases) s += b.squaredNorm();
    return s;
}

Mlp::Mlp(std::vector<int> widths, OutputActivation activation, Rng& rng, double final_layer_scale)
    : widths_(std::move(widths)), activation_(activation) {
    if (widths_.size() < 2) throw DomainError("Mlp: need at least input and output widths");
    for (int w : widths_)
        if (w < 1) throw DomainError("Mlp: widths must be positive");
    if (activation_ == OutputActivation::Gaussian && widths_.back() % 2 != 0)
        throw DomainError("Mlp: gaussian head needs an even output width");

    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const int in = widths_[l];
        const int out = widths_[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        if (l + 2 == widths_.size()) bound *= final_layer_scale;
        Matrix w(out, in);
        Vector b(out);
        // Fixed fill order keeps initialization reproducible across Eigen versions.
        for (int j = 0; j < in; ++j)
            for (int i = 0; i < out; ++i) w(i, j) = uniform(rng, -bound, bound);
        for (int i = 0; i < out; ++i) b(i) = uniform(rng, -bound, bound);
        weights_.push_back(std::move(w));
        biases_.push_back(std::move(b));
    }
}

Matrix Mlp::forward(const Matrix& x, ForwardCache* cache) const {
    if (weights_.empty()) throw DomainError("Mlp::forward on an empty network");
    if (x.rows() != input_size())
        throw DomainError("Mlp::forward: input has " + std::to_string(x.rows()) + " rows, expected " +
                          std::to_string(input_size()));
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->owner = this;
        cache->version = version_;
    }

    Matrix a = x;
    const std::size_t n = weights_.size();
    for (std::size_t l = 0; l < n; ++l) {
        Matrix z = weights_[l] * a;
        z.colwise() += biases_[l];
        if (cache) {
            cache->inputs.push_back(std::move(a));
            cache->pre.push_back(z);
        }
        if (l + 1 < n) {
            a = z.cwiseMax(0.0);
        } else {
            switch (activation_) {
            case OutputActivation::Identity: a = std::move(z); break;
            case OutputActivation::Tanh: a = z.array().tanh().matrix(); break;
            case OutputActivation::Gaussian: {
                const Eigen::Index d = z.rows() / 2;
                a = z;
                a.bottomRows(d) = z.bottomRows(d).unaryExpr([](double v) { return softplus(v) + kStdFloor; });
                break;
            }
            }
        }
    }
    if (cache) cache->output = a;
    return a;
}

Vector Mlp::forward(const Vector& x) const {
    const Matrix out = forward(Matrix(x));
    return out.col(0);
}

Gradients Mlp::backward(const ForwardCache& cache, const Matrix& grad_out, Matrix* grad_input) const {
    if (cache.owner != this || cache.version != version_ || cache.pre.size() != weights_.size())
        throw DomainError("Mlp::backward: stale or foreign forward cache");
    if (grad_out.rows() != cache.output.rows() || grad_out.cols() != cache.output.cols())
        throw DomainError("Mlp::backward: grad_out shape mismatch");

    const std::size_t n = weights_.size();
    Gradients g;
    g.weights.resize(n);
    g.biases.resize(n);

    Matrix delta;
    const Matrix& z_last = cache.pre.back();
    switch (activation_) {
    case OutputActivation::Identity: delta = grad_out; break;
    case OutputActivation::Tanh:
        delta = (grad_out.array() * (1.0 - cache.output.array().square())).matrix();
        break;
    case OutputActivation::Gaussian: {
        const Eigen::Index d = z_last.rows() / 2;
        delta = grad_out;
        delta.bottomRows(d) =
            (grad_out.bottomRows(d).array() * z_last.bottomRows(d).unaryExpr([](double v) { return sigmoid(v); }).array())
                .matrix();
        break;
    }
    }

    for (std::size_t k = n; k-- > 0;) {
        g.weights[k].noalias() = delta * cache.inputs[k].transpose();
        g.biases[k] = delta.rowwise().sum();
        if (k > 0) {
            Matrix back = weights_[k].transpose() * delta;
            delta = (back.array() * (cache.pre[k - 1].array() > 0.0).cast<double>()).matrix();
        } else if (grad_input) {
            grad_input->noalias() = weights_[0].transpose() * delta;
        }
    }
    return g;
}

std::vector<Matrix>& Mlp::mutable_weights() {
    ++version_;
    return weights_;
}

std::vector<Vector>& Mlp::mutable_biases() {
    ++version_;
    return biases_;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    return n;
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out.insert(out.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        out.insert(out.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return out;
}

void Mlp::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw DomainError("Mlp::assign: parameter count mismatch");
    ++version_;
    std::size_t o = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        std::copy_n(flat.data() + o, weights_[l].size(), weights_[l].data());
        o += static_cast<std::size_t>(weights_[l].size());
        std::copy_n(flat.data() + o, biases_[l].size(), biases_[l].data());
        o += static_cast<std::size_t>(biases_[l].size());
    }
}

std::pair<std::size_t, std::size_t> Mlp::locate(std::size_t index, bool& is_bias) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const auto nw = static_cast<std::size_t>(weights_[l].size());
        if (index < nw) {
            is_bias = false;
            return {l, index};
        }
        index -= nw;
        const auto nb = static_cast<std::size_t>(biases_[l].size());
        if (index < nb) {
            is_bias = true;
            return {l, index};
        }
        index -= nb;
    }
    throw DomainError("Mlp: parameter index out of range");
}

double Mlp::parameter(std::size_t index) const {
    bool bias = false;
    const auto [l, i] = locate(index, bias);
    return bias ? biases_[l].data()[i] : weights_[l].data()[i];
}

void Mlp::set_parameter(std::size_t index, double value) {
    bool bias = false;
    const auto [l, i] = locate(index, bias);
    ++version_;
    (bias ? biases_[l].data()[i] : weights_[l].data()[i]) = value;
}

bool Mlp::all_finite() const {
    for (const auto& w : weights_)
        if (!w.allFinite()) return false;
    for (const auto& b : biases_)
        if (!b.allFinite()) return false;
    return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
    if (a.widths_ != b.widths_ || a.activation_ != b.activation_) return false;
    for (std::size_t l = 0; l < a.weights_.size(); ++l) {
        if (a.weights_[l] != b.weights_[l] || a.biases_[l] != b.biases_[l]) return false;
    }
    return true;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (target.widths() != online.widths()) throw DomainError("soft_update: shape mismatch");
    auto& tw = target.mutable_weights();
    auto& tb = target.mutable_biases();
    for (std::size_t l = 0; l < tw.size(); ++l) {
        tw[l] = tau * online.weights()[l] + (1.0 - tau) * tw[l];
        tb[l] = tau * online.biases()[l] + (1.0 - tau) * tb[l];
    }
}

} // namespace blockbench::nn
