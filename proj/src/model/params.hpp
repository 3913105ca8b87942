#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "num/tensor.hpp"

namespace ewclab {

struct ModelConfig {
    int vocab_size = 0;
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 2;
    int d_ff = 128;
    int max_seq_len = 64;
    uint64_t seed = 1;

    void validate() const;
    int head_dim() const { return d_model / n_heads; }
    bool operator==(const ModelConfig& o) const = default;
};

struct SliceInfo {
    std::string name;
    size_t offset = 0;
    size_t length = 0;
};

// One contiguous extent per top-level parameter group (embedding, each
// encoder layer, final norm, head), in flat order.
struct LayerGroup {
    std::string name;
    size_t offset = 0;
    size_t length = 0;
};

// Flat f32 storage of every model parameter plus the named slice manifest.
// The manifest partitions the flat array exactly: slices are contiguous, in
// order, no gaps, no overlap.
class ParameterVector {
  public:
    explicit ParameterVector(const ModelConfig& cfg);

    // Seeded init: weight matrices and embeddings N(0, 0.02); biases and
    // norm shifts 0; norm scales 1.
    void init_weights(uint64_t seed);

    size_t count() const { return values_.size(); }
    const std::vector<SliceInfo>& manifest() const { return manifest_; }
    const ModelConfig& config() const { return cfg_; }

    float* values() { return values_.data(); }
    const float* values() const { return values_.data(); }
    float* grads() { return grads_.data(); }
    const float* grads() const { return grads_.data(); }
    void zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0f); }

    const SliceInfo& slice(const std::string& name) const;
    // Tensor view of a named slice; gradients accumulate into grad_base
    // (offset applies), or are untracked when grad_base is null.
    Tensor view(const std::string& name, int rows, int cols, float* grad_base);

    std::vector<LayerGroup> layer_groups() const;
    // "name offset length" per line; equality gate for anchors/Fisher files.
    std::string manifest_text() const;
    uint64_t value_hash() const;

  private:
    void add_slice(const std::string& name, size_t length);

    ModelConfig cfg_;
    std::vector<SliceInfo> manifest_;
    std::vector<float> values_;
    std::vector<float> grads_;
};

} // namespace ewclab
