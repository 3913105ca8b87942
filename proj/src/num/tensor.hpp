#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "util/status.hpp"

namespace ewclab {

// All tensors are 2-D row-major f32; scalars are 1x1. Reductions inside ops
// accumulate in double, storage stays 32-bit.
struct TensorData {
    int rows = 0;
    int cols = 0;
    bool requires_grad = false;
    float* val = nullptr;
    float* grad = nullptr;
    std::vector<float> val_store;
    std::vector<float> grad_store;
};

class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(int rows, int cols, bool requires_grad = false);
    static Tensor from(std::vector<float> v, int rows, int cols, bool requires_grad = false);
    static Tensor scalar(float v, bool requires_grad = false);
    // Non-owning view over external storage (parameter slices). Tracks
    // gradients when grad is non-null.
    static Tensor view(float* val, float* grad, int rows, int cols);

    bool defined() const { return static_cast<bool>(d_); }
    int rows() const { return d_->rows; }
    int cols() const { return d_->cols; }
    size_t size() const { return static_cast<size_t>(d_->rows) * static_cast<size_t>(d_->cols); }
    bool requires_grad() const { return d_->requires_grad; }

    // Handles share their data; accessors stay mutable through const handles,
    // matching shared_ptr semantics.
    float* val() const { return d_->val; }
    float* grad() const { return d_->grad; }

    float at(int r, int c) const { return d_->val[static_cast<size_t>(r) * d_->cols + c]; }
    float item() const;
    bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }

  private:
    std::shared_ptr<TensorData> d_;
};

// Reverse-mode record of one forward pass. Closures run in exact reverse
// order of recording; the record is cleared once replayed.
class Tape {
  public:
    void record(std::function<void()> fn);
    // Scalar-rooted backward: seeds d(loss)/d(loss) = 1, replays, clears.
    void backward(const Tensor& loss);
    // Multi-root backward with explicit cotangents. The training driver uses
    // this to couple per-executor subgraphs through batch-level losses.
    void backward_seeded(const std::vector<std::pair<Tensor, double>>& roots);
    size_t recorded() const { return ops_.size(); }

  private:
    void replay();
    std::vector<std::function<void()>> ops_;
    bool consumed_ = false;
};

inline bool track(const Tape* t, std::initializer_list<const Tensor*> inputs) {
    if (t == nullptr) return false;
    for (const Tensor* x : inputs)
        if (x->requires_grad()) return true;
    return false;
}

} // namespace ewclab
