#pragma once

#include <cstdint>
#include <vector>

#include "util/status.hpp"

namespace ewclab {

// Adaptive moment estimation with bias correction; no weight decay. Moment
// state is stored in f32 like the parameters, per-coordinate arithmetic runs
// in double.
struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    Adam(size_t n, const AdamConfig& cfg);

    void step(float* theta, const float* grad);
    long long steps_taken() const { return t_; }

  private:
    AdamConfig cfg_;
    std::vector<float> m_, v_;
    long long t_ = 0;
};

// Scales the gradient so its global L2 norm is at most max_norm (no-op when
// max_norm <= 0). Returns the pre-clip norm.
double clip_global_norm(float* grad, size_t n, double max_norm);

} // namespace ewclab
