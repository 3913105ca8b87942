#pragma once

#include <vector>

#include "num/tensor.hpp"

namespace ewclab {

// Loss heads return both a graph node (f32, carries gradient flow) and the
// exact double value computed during the forward pass. Metric breakdowns and
// backward seeds are always derived from the double values.
struct FusedLoss {
    Tensor node;  // 1x1
    double value = 0.0;
};

// Sum of negative log-likelihoods of `targets` at the masked `positions` of
// one example's logits [seq, vocab]. Backward spreads softmax-minus-onehot
// rows scaled by the incoming cotangent.
FusedLoss masked_ce(Tape* t, const Tensor& logits, const std::vector<int>& positions,
                    const std::vector<int>& targets);

// Differentiable numeral reading of a result span. Per digit slot the ten
// digit logits are renormalized to a distribution, its expected digit value
// is scaled by the slot's place value, and the slots sum to one number.
// Slots with place value 0 (the decimal point) contribute nothing; a span
// with no digit slot is rejected.
FusedLoss soft_decode(Tape* t, const Tensor& logits, const std::vector<int>& positions,
                      const std::vector<double>& place_values,
                      const std::vector<int>& digit_ids);

// Numeric-distance regularizer over a batch of decoded values.
//   euclidean:   sqrt(sum_i (y_i - yhat_i)^2)
//   literal_abs: sqrt(|sum_i (y_i^2 - yhat_i^2)|)
// A positive cap clamps the value; a clamped or zero loss has zero gradient.
enum class RegMode { euclidean, literal_abs };

struct RegResult {
    double value = 0.0;
    bool capped = false;
    std::vector<double> dvalue_dyhat;  // d(value)/d(yhat_i), zero when capped
};

RegResult reg_loss(const std::vector<double>& y, const std::vector<double>& yhat,
                   RegMode mode, double cap);

// Quadratic anchoring penalty sum_i 0.5 * fisher_i * (theta_i - anchor_i)^2
// over the flat parameter vector. Exposed both as a double-precision
// value/gradient kernel (the training step applies it analytically) and as a
// recorded graph node for gradient checks.
double ewc_value(const float* theta, const float* anchor, const double* fisher, size_t n);
void ewc_add_grad(const float* theta, const float* anchor, const double* fisher, size_t n,
                  double scale, float* grad_out);
FusedLoss ewc_penalty(Tape* t, const Tensor& theta, const float* anchor,
                      const double* fisher);

// One training step's loss composition. Components are kept unreduced so the
// metrics stream can be audited against total = ce + l1*reg + l2*ewc.
struct LossBreakdown {
    double ce = 0.0;
    double reg = 0.0;
    double ewc = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double total = 0.0;
};

LossBreakdown total_loss(double ce, double reg, double ewc, double lambda1, double lambda2);

// Mixing weight for the numeric regularizer. The moving-average mode pulls
// the weight toward the current loss share reg/(ce+reg) once per epoch; the
// constant mode never moves.
class Lambda1Schedule {
  public:
    static Lambda1Schedule constant(double value);
    static Lambda1Schedule ema(double seed_value, double w_prev, double w_curr);

    void update(double ce, double reg);
    double value() const { return lambda_; }
    bool is_constant() const { return constant_; }

  private:
    bool constant_ = true;
    double lambda_ = 0.0;
    double w_prev_ = 0.0;
    double w_curr_ = 0.0;
};

} // namespace ewclab
