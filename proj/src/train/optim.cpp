#include "train/optim.hpp"

#include <cmath>

namespace ewclab {

Adam::Adam(size_t n, const AdamConfig& cfg) : cfg_(cfg) {
    require(n > 0, Status::internal, "adam: no parameters");
    require(cfg.learning_rate > 0.0, Status::bad_config, "adam: learning rate must be positive");
    require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0,
            Status::bad_config, "adam: betas must lie in [0,1)");
    m_.assign(n, 0.0f);
    v_.assign(n, 0.0f);
}

void Adam::step(float* theta, const float* grad) {
    ++t_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (size_t i = 0; i < m_.size(); ++i) {
        double g = static_cast<double>(grad[i]);
        double m = b1 * static_cast<double>(m_[i]) + (1.0 - b1) * g;
        double v = b2 * static_cast<double>(v_[i]) + (1.0 - b2) * g * g;
        m_[i] = static_cast<float>(m);
        v_[i] = static_cast<float>(v);
        double update = cfg_.learning_rate * (m / corr1) / (std::sqrt(v / corr2) + cfg_.eps);
        theta[i] = static_cast<float>(static_cast<double>(theta[i]) - update);
    }
}

double clip_global_norm(float* grad, size_t n, double max_norm) {
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double g = static_cast<double>(grad[i]);
        ss += g * g;
    }
    double norm = std::sqrt(ss);
    if (max_norm > 0.0 && norm > max_norm) {
        double scale = max_norm / norm;
        for (size_t i = 0; i < n; ++i)
            grad[i] = static_cast<float>(static_cast<double>(grad[i]) * scale);
    }
    return norm;
}

} // namespace ewclab
