#include "loss/losses.hpp"

#include <cmath>

#include "util/fmt.hpp"

namespace ewclab {

static void check_positions(const Tensor& logits, const std::vector<int>& positions) {
    for (int p : positions)
        require(p >= 0 && p < logits.rows(), Status::internal,
                strf("loss: position %d outside %d rows", p, logits.rows()));
}

// Row softmax probabilities in double, shared by forward and backward.
static std::vector<double> row_probs(const Tensor& logits, int row) {
    const float* x = logits.val() + static_cast<size_t>(row) * logits.cols();
    double mx = x[0];
    for (int j = 1; j < logits.cols(); ++j) mx = std::max(mx, static_cast<double>(x[j]));
    std::vector<double> p(static_cast<size_t>(logits.cols()));
    double denom = 0.0;
    for (int j = 0; j < logits.cols(); ++j) {
        p[static_cast<size_t>(j)] = std::exp(static_cast<double>(x[j]) - mx);
        denom += p[static_cast<size_t>(j)];
    }
    for (auto& v : p) v /= denom;
    return p;
}

FusedLoss masked_ce(Tape* t, const Tensor& logits, const std::vector<int>& positions,
                    const std::vector<int>& targets) {
    require(!positions.empty(), Status::internal, "ce: no masked positions");
    require(positions.size() == targets.size(), Status::internal,
            "ce: positions and targets differ in length");
    check_positions(logits, positions);
    for (int tgt : targets)
        require(tgt >= 0 && tgt < logits.cols(), Status::internal,
                strf("ce: target id %d outside vocabulary of %d", tgt, logits.cols()));

    double sum = 0.0;
    for (size_t k = 0; k < positions.size(); ++k) {
        std::vector<double> p = row_probs(logits, positions[k]);
        sum -= std::log(p[static_cast<size_t>(targets[k])]);
    }

    FusedLoss out;
    out.value = sum;
    out.node = Tensor::zeros(1, 1, track(t, {&logits}));
    out.node.val()[0] = static_cast<float>(sum);
    if (out.node.requires_grad()) {
        Tensor node = out.node;
        t->record([logits, positions, targets, node]() {
            double g = node.grad()[0];
            if (g == 0.0) return;
            for (size_t k = 0; k < positions.size(); ++k) {
                std::vector<double> p = row_probs(logits, positions[k]);
                float* row = logits.grad() + static_cast<size_t>(positions[k]) * logits.cols();
                for (int j = 0; j < logits.cols(); ++j) {
                    double d = p[static_cast<size_t>(j)] - (j == targets[k] ? 1.0 : 0.0);
                    row[j] += static_cast<float>(g * d);
                }
            }
        });
    }
    return out;
}

// Restricted distribution over the ten digit logits of one slot.
static std::vector<double> digit_probs(const Tensor& logits, int row,
                                       const std::vector<int>& digit_ids) {
    const float* x = logits.val() + static_cast<size_t>(row) * logits.cols();
    double mx = x[digit_ids[0]];
    for (int d = 1; d < 10; ++d) mx = std::max(mx, static_cast<double>(x[digit_ids[d]]));
    std::vector<double> p(10);
    double denom = 0.0;
    for (int d = 0; d < 10; ++d) {
        p[static_cast<size_t>(d)] = std::exp(static_cast<double>(x[digit_ids[d]]) - mx);
        denom += p[static_cast<size_t>(d)];
    }
    for (auto& v : p) v /= denom;
    return p;
}

FusedLoss soft_decode(Tape* t, const Tensor& logits, const std::vector<int>& positions,
                      const std::vector<double>& place_values,
                      const std::vector<int>& digit_ids) {
    require(positions.size() == place_values.size(), Status::internal,
            "decode: positions and place values differ in length");
    require(digit_ids.size() == 10, Status::internal, "decode: need ten digit ids");
    check_positions(logits, positions);
    for (int id : digit_ids)
        require(id >= 0 && id < logits.cols(), Status::internal,
                strf("decode: digit id %d outside vocabulary of %d", id, logits.cols()));
    bool any_digit = false;
    for (double w : place_values) any_digit = any_digit || w != 0.0;
    require(any_digit, Status::internal, "decode: span has no digit slots");

    double value = 0.0;
    for (size_t k = 0; k < positions.size(); ++k) {
        if (place_values[k] == 0.0) continue;
        std::vector<double> p = digit_probs(logits, positions[k], digit_ids);
        double expected = 0.0;
        for (int d = 0; d < 10; ++d) expected += d * p[static_cast<size_t>(d)];
        value += place_values[k] * expected;
    }

    FusedLoss out;
    out.value = value;
    out.node = Tensor::zeros(1, 1, track(t, {&logits}));
    out.node.val()[0] = static_cast<float>(value);
    if (out.node.requires_grad()) {
        Tensor node = out.node;
        t->record([logits, positions, place_values, digit_ids, node]() {
            double g = node.grad()[0];
            if (g == 0.0) return;
            for (size_t k = 0; k < positions.size(); ++k) {
                if (place_values[k] == 0.0) continue;
                std::vector<double> p = digit_probs(logits, positions[k], digit_ids);
                double expected = 0.0;
                for (int d = 0; d < 10; ++d) expected += d * p[static_cast<size_t>(d)];
                float* row = logits.grad() + static_cast<size_t>(positions[k]) * logits.cols();
                for (int d = 0; d < 10; ++d) {
                    double dE = p[static_cast<size_t>(d)] * (d - expected);
                    row[digit_ids[static_cast<size_t>(d)]] +=
                        static_cast<float>(g * place_values[k] * dE);
                }
            }
        });
    }
    return out;
}

RegResult reg_loss(const std::vector<double>& y, const std::vector<double>& yhat,
                   RegMode mode, double cap) {
    require(y.size() == yhat.size(), Status::internal, "reg: batch size mismatch");
    require(!y.empty(), Status::internal, "reg: empty batch");

    RegResult out;
    out.dvalue_dyhat.assign(y.size(), 0.0);
    if (mode == RegMode::euclidean) {
        double ss = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
            double d = y[i] - yhat[i];
            ss += d * d;
        }
        out.value = std::sqrt(ss);
        if (out.value > 0.0)
            for (size_t i = 0; i < y.size(); ++i)
                out.dvalue_dyhat[i] = (yhat[i] - y[i]) / out.value;
    } else {
        double s = 0.0;
        for (size_t i = 0; i < y.size(); ++i) s += y[i] * y[i] - yhat[i] * yhat[i];
        out.value = std::sqrt(std::fabs(s));
        if (out.value > 0.0) {
            double sign = s > 0.0 ? 1.0 : -1.0;
            for (size_t i = 0; i < y.size(); ++i)
                out.dvalue_dyhat[i] = -sign * yhat[i] / out.value;
        }
    }
    if (cap > 0.0 && out.value > cap) {
        out.value = cap;
        out.capped = true;
        std::fill(out.dvalue_dyhat.begin(), out.dvalue_dyhat.end(), 0.0);
    }
    return out;
}

double ewc_value(const float* theta, const float* anchor, const double* fisher, size_t n) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(theta[i]) - static_cast<double>(anchor[i]);
        sum += 0.5 * fisher[i] * d * d;
    }
    return sum;
}

void ewc_add_grad(const float* theta, const float* anchor, const double* fisher, size_t n,
                  double scale, float* grad_out) {
    for (size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(theta[i]) - static_cast<double>(anchor[i]);
        grad_out[i] += static_cast<float>(scale * fisher[i] * d);
    }
}

FusedLoss ewc_penalty(Tape* t, const Tensor& theta, const float* anchor,
                      const double* fisher) {
    FusedLoss out;
    out.value = ewc_value(theta.val(), anchor, fisher, theta.size());
    out.node = Tensor::zeros(1, 1, track(t, {&theta}));
    out.node.val()[0] = static_cast<float>(out.value);
    if (out.node.requires_grad()) {
        Tensor node = out.node;
        size_t n = theta.size();
        t->record([theta, anchor, fisher, n, node]() {
            double g = node.grad()[0];
            if (g == 0.0) return;
            ewc_add_grad(theta.val(), anchor, fisher, n, g, theta.grad());
        });
    }
    return out;
}

LossBreakdown total_loss(double ce, double reg, double ewc, double lambda1, double lambda2) {
    require(lambda1 >= 0.0 && lambda2 >= 0.0, Status::bad_config,
            "loss: mixing weights must be non-negative");
    LossBreakdown b;
    b.ce = ce;
    b.reg = reg;
    b.ewc = ewc;
    b.lambda1 = lambda1;
    b.lambda2 = lambda2;
    b.total = ce + lambda1 * reg + lambda2 * ewc;
    return b;
}

Lambda1Schedule Lambda1Schedule::constant(double value) {
    require(std::isfinite(value) && value >= 0.0, Status::bad_config,
            "lambda1: constant weight must be finite and non-negative");
    Lambda1Schedule s;
    s.constant_ = true;
    s.lambda_ = value;
    return s;
}

Lambda1Schedule Lambda1Schedule::ema(double seed_value, double w_prev, double w_curr) {
    require(seed_value > 0.0 && seed_value < 1.0, Status::bad_config,
            "lambda1: seed weight must lie in (0,1)");
    require(w_prev > 0.0 && w_prev < 1.0 && w_curr > 0.0 && w_curr < 1.0, Status::bad_config,
            "lambda1: averaging weights must lie in (0,1)");
    require(std::fabs(w_prev + w_curr - 1.0) < 1e-9, Status::bad_config,
            "lambda1: averaging weights must sum to one");
    Lambda1Schedule s;
    s.constant_ = false;
    s.lambda_ = seed_value;
    s.w_prev_ = w_prev;
    s.w_curr_ = w_curr;
    return s;
}

void Lambda1Schedule::update(double ce, double reg) {
    if (constant_) return;
    require(std::isfinite(ce) && std::isfinite(reg) && ce >= 0.0 && reg >= 0.0,
            Status::non_finite, "lambda1: loss shares must be finite and non-negative");
    if (ce + reg == 0.0) return;
    double current = reg / (ce + reg);
    lambda_ = w_prev_ * lambda_ + w_curr_ * current;
}

} // namespace ewclab
