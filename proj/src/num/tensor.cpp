#include "num/tensor.hpp"

#include "util/fmt.hpp"

namespace ewclab {

static std::shared_ptr<TensorData> make_data(int rows, int cols, bool requires_grad) {
    require(rows > 0 && cols > 0, Status::internal,
            strf("tensor: non-positive shape %dx%d", rows, cols));
    auto d = std::make_shared<TensorData>();
    d->rows = rows;
    d->cols = cols;
    d->requires_grad = requires_grad;
    d->val_store.assign(static_cast<size_t>(rows) * cols, 0.0f);
    d->val = d->val_store.data();
    if (requires_grad) {
        d->grad_store.assign(static_cast<size_t>(rows) * cols, 0.0f);
        d->grad = d->grad_store.data();
    }
    return d;
}

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
    Tensor t;
    t.d_ = make_data(rows, cols, requires_grad);
    return t;
}

Tensor Tensor::from(std::vector<float> v, int rows, int cols, bool requires_grad) {
    require(v.size() == static_cast<size_t>(rows) * cols, Status::internal,
            strf("tensor: %zu values for %dx%d", v.size(), rows, cols));
    Tensor t = zeros(rows, cols, requires_grad);
    std::copy(v.begin(), v.end(), t.val());
    return t;
}

Tensor Tensor::scalar(float v, bool requires_grad) {
    return from({v}, 1, 1, requires_grad);
}

Tensor Tensor::view(float* val, float* grad, int rows, int cols) {
    require(rows > 0 && cols > 0, Status::internal,
            strf("tensor view: non-positive shape %dx%d", rows, cols));
    Tensor t;
    t.d_ = std::make_shared<TensorData>();
    t.d_->rows = rows;
    t.d_->cols = cols;
    t.d_->val = val;
    t.d_->grad = grad;
    t.d_->requires_grad = grad != nullptr;
    return t;
}

float Tensor::item() const {
    require(rows() == 1 && cols() == 1, Status::internal,
            strf("item() on %dx%d tensor", rows(), cols()));
    return d_->val[0];
}

void Tape::record(std::function<void()> fn) {
    ops_.push_back(std::move(fn));
    consumed_ = false;
}

void Tape::replay() {
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    ops_.clear();
    consumed_ = true;
}

void Tape::backward(const Tensor& loss) {
    require(loss.defined() && loss.rows() == 1 && loss.cols() == 1, Status::internal,
            "backward: loss must be a scalar (1x1) tensor");
    require(!(consumed_ && ops_.empty()), Status::internal,
            "backward: called twice without a new forward pass");
    if (loss.requires_grad()) loss.grad()[0] += 1.0f;
    replay();
}

void Tape::backward_seeded(const std::vector<std::pair<Tensor, double>>& roots) {
    require(!(consumed_ && ops_.empty()), Status::internal,
            "backward: called twice without a new forward pass");
    for (const auto& [node, seed] : roots) {
        require(node.defined() && node.rows() == 1 && node.cols() == 1, Status::internal,
                "backward: seeded root must be a scalar (1x1) tensor");
        if (node.requires_grad()) node.grad()[0] += static_cast<float>(seed);
    }
    replay();
}

} // namespace ewclab
