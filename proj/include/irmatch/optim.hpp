#pragma once

#include "irmatch/encoder.hpp"

namespace irmatch::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 0.0;  // global gradient-norm clip; 0 disables it
};

/// Adam with bias correction. Moment buffers mirror the parameter layout.
class Adam {
public:
    Adam(const ModelConfig& config, AdamConfig settings);

    /// Applies one update. `grads` is clipped in place when clip_norm > 0.
    /// Throws NonFiniteLoss if any gradient entry is NaN or infinite.
    void step(Parameters& params, Parameters& grads);

    long long steps_taken() const { return t_; }
    const AdamConfig& settings() const { return settings_; }

private:
    AdamConfig settings_;
    Parameters m_, v_;
    long long t_ = 0;
};

}  // namespace irmatch::nn
