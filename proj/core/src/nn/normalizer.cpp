#include "blockbench/nn/normalizer.hpp"

namespace blockbench::nn {

RunningNormalizer::RunningNormalizer(int dim, double clip_range, double epsilon, double obs_clip)
    : mean_(Vector::Zero(dim)), var_(Vector::Ones(dim)), clip_range_(clip_range), epsilon_(epsilon),
      obs_clip_(obs_clip) {}

void RunningNormalizer::update(const Matrix& batch) {
    if (batch.rows() != dim()) throw DomainError("RunningNormalizer::update: dimension mismatch");
    const auto n = static_cast<double>(batch.cols());
    if (n == 0.0) return;

    const Matrix clipped = batch.cwiseMax(-obs_clip_).cwiseMin(obs_clip_);
    const Vector batch_mean = clipped.rowwise().mean();
    const Vector batch_var = (clipped.colwise() - batch_mean).array().square().rowwise().mean();

    if (count_ == 0.0) {
        mean_ = batch_mean;
        var_ = batch_var;
        count_ = n;
        return;
    }
    const double total = count_ + n;
    const Vector delta = batch_mean - mean_;
    const Vector m2 = var_ * count_ + batch_var * n + delta.cwiseProduct(delta) * (count_ * n / total);
    mean_ += delta * (n / total);
    var_ = m2 / total;
    count_ = total;
}

Matrix RunningNormalizer::normalize(const Matrix& x) const {
    if (x.rows() != dim()) throw DomainError("RunningNormalizer::normalize: dimension mismatch");
    const Vector inv_std = (var_.array() + epsilon_).rsqrt();
    Matrix out = x.cwiseMax(-obs_clip_).cwiseMin(obs_clip_);
    out.colwise() -= mean_;
    out = inv_std.asDiagonal() * out;
    return out.cwiseMax(-clip_range_).cwiseMin(clip_range_);
}

Vector RunningNormalizer::normalize(const Vector& x) const {
    const Matrix out = normalize(Matrix(x));
    return out.col(0);
}

void RunningNormalizer::set_state(Vector mean, Vector variance, double count) {
    if (mean.size() != variance.size()) throw DomainError("RunningNormalizer::set_state: size mismatch");
    mean_ = std::move(mean);
    var_ = std::move(variance);
    count_ = count;
}

} // namespace blockbench::nn
