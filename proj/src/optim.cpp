#include "irmatch/optim.hpp"

#include <cmath>

#include "irmatch/error.hpp"

namespace irmatch::nn {

Adam::Adam(const ModelConfig& config, AdamConfig settings)
    : settings_(settings), m_(Parameters::zeros(config)), v_(Parameters::zeros(config)) {}

void Adam::step(Parameters& params, Parameters& grads) {
    if (!grads.all_finite()) throw NonFiniteLoss("gradient contains NaN or Inf");
    if (settings_.clip_norm > 0.0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (norm > settings_.clip_norm) grads *= settings_.clip_norm / norm;
    }
    ++t_;
    const double b1 = settings_.beta1;
    const double b2 = settings_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double step = settings_.lr / c1;
    const double eps = settings_.eps;

    auto p = params.tensors();
    const auto g = std::as_const(grads).tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto ma = m[i].second->array();
        auto va = v[i].second->array();
        const auto ga = g[i].second->array();
        ma = b1 * ma + (1.0 - b1) * ga;
        va = b2 * va + (1.0 - b2) * ga.square();
        p[i].second->array() -= step * ma / ((va / c2).sqrt() + eps);
    }
}

}  // namespace irmatch::nn
