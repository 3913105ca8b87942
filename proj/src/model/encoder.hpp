#pragma once

#include "model/params.hpp"
#include "model/vocab.hpp"
#include "num/ops.hpp"

namespace ewclab {

// Parameter tensors bound for one forward/backward context. Values always
// alias the owning ParameterVector; gradients go to whichever buffer the
// binding was made with, so independent executors can accumulate separately
// and merge in a fixed order.
struct BoundParams {
    struct Layer {
        Tensor ln1_g, ln1_b;
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor ln2_g, ln2_b;
        Tensor w1, b1, w2, b2;
    };
    Tensor tok, pos;
    std::vector<Layer> layers;
    Tensor fin_g, fin_b;
    Tensor head_w, head_b;
};

// Pre-norm transformer encoder over characters with an output head per
// position. Forward works on one example at a time with its true length;
// trailing [PAD] is stripped before encoding, which keeps padded positions
// out of attention entirely.
class Model {
  public:
    Model(const ModelConfig& cfg, const Vocabulary& vocab);

    const ModelConfig& config() const { return cfg_; }
    const Vocabulary& vocab() const { return vocab_; }
    ParameterVector& params() { return params_; }
    const ParameterVector& params() const { return params_; }

    BoundParams bind(float* grad_base);
    BoundParams bind_main() { return bind(params_.grads()); }

    // Logits (S x V) for one unpadded sequence.
    Tensor forward(Tape* t, const BoundParams& b, const std::vector<int>& ids) const;
    // Logits (padded S x V) for a right-padded sequence; [PAD] rows are zero.
    Tensor forward_padded(Tape* t, const BoundParams& b, const std::vector<int>& ids) const;

    // Token ids to max_seq_len-checked sequence. Unknown characters map to
    // [UNK]; an over-length text throws naming the example.
    std::vector<int> encode(const std::string& text) const;

    // Greedy per-position argmax at the given positions; ties break to the
    // lowest id.
    static std::vector<int> predict_masked(const Tensor& logits,
                                           const std::vector<int>& positions);

  private:
    ModelConfig cfg_;
    Vocabulary vocab_;
    ParameterVector params_;
};

} // namespace ewclab
