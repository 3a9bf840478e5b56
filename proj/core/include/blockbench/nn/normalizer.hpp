#pragma once

#include "blockbench/nn/mlp.hpp"

namespace blockbench::nn {

/// Per-dimension running mean and (population) variance of observations.
/// A fresh normalizer has mean 0 and variance 1, so it starts as the
/// identity up to clipping.
class RunningNormalizer {
public:
    RunningNormalizer() = default;
    explicit RunningNormalizer(int dim, double clip_range = 5.0, double epsilon = 1e-8, double obs_clip = 200.0);

    /// Folds a batch (one sample per column) into the running statistics
    /// with the pairwise merge formula.
    void update(const Matrix& batch);

    /// clip((clip(x, +-obs_clip) - mean) / sqrt(var + eps), +-clip_range)
    [[nodiscard]] Matrix normalize(const Matrix& x) const;
    [[nodiscard]] Vector normalize(const Vector& x) const;

    [[nodiscard]] int dim() const { return static_cast<int>(mean_.size()); }
    [[nodiscard]] const Vector& mean() const { return mean_; }
    [[nodiscard]] const Vector& variance() const { return var_; }
    [[nodiscard]] double count() const { return count_; }
    [[nodiscard]] double clip_range() const { return clip_range_; }
    [[nodiscard]] double epsilon() const { return epsilon_; }
    [[nodiscard]] double obs_clip() const { return obs_clip_; }

    /// Restores saved statistics (checkpoint loading).
    void set_state(Vector mean, Vector variance, double count);

    friend bool operator==(const RunningNormalizer&, const RunningNormalizer&) = default;

private:
    Vector mean_;
    Vector var_;
    double count_ = 0.0;
    double clip_range_ = 5.0;
    double epsilon_ = 1e-8;
    double obs_clip_ = 200.0;
};

} // namespace blockbench::nn
