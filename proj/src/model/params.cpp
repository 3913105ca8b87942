#include "model/params.hpp"

#include "util/fmt.hpp"
#include "util/hash.hpp"
#include "util/rng.hpp"

namespace ewclab {

void ModelConfig::validate() const {
    require(vocab_size > 0, Status::bad_config, "model: vocab_size must be positive");
    require(d_model > 0 && n_layers > 0 && n_heads > 0 && d_ff > 0 && max_seq_len > 0,
            Status::bad_config, "model: all dimensions must be positive");
    require(d_model % n_heads == 0, Status::bad_config,
            strf("model: d_model %d not divisible by n_heads %d", d_model, n_heads));
}

ParameterVector::ParameterVector(const ModelConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    size_t d = static_cast<size_t>(cfg.d_model);
    size_t v = static_cast<size_t>(cfg.vocab_size);
    size_t ff = static_cast<size_t>(cfg.d_ff);

    add_slice("embedding.tok", v * d);
    add_slice("embedding.pos", static_cast<size_t>(cfg.max_seq_len) * d);
    for (int l = 0; l < cfg.n_layers; ++l) {
        std::string p = strf("encoder_%d.", l);
        add_slice(p + "ln1.gamma", d);
        add_slice(p + "ln1.beta", d);
        add_slice(p + "attn.wq", d * d);
        add_slice(p + "attn.bq", d);
        add_slice(p + "attn.wk", d * d);
        add_slice(p + "attn.bk", d);
        add_slice(p + "attn.wv", d * d);
        add_slice(p + "attn.bv", d);
        add_slice(p + "attn.wo", d * d);
        add_slice(p + "attn.bo", d);
        add_slice(p + "ln2.gamma", d);
        add_slice(p + "ln2.beta", d);
        add_slice(p + "ffn.w1", d * ff);
        add_slice(p + "ffn.b1", ff);
        add_slice(p + "ffn.w2", ff * d);
        add_slice(p + "ffn.b2", d);
    }
    add_slice("final_norm.gamma", d);
    add_slice("final_norm.beta", d);
    add_slice("head.w", d * v);
    add_slice("head.b", v);

    size_t total = manifest_.empty() ? 0 : manifest_.back().offset + manifest_.back().length;
    values_.assign(total, 0.0f);
    grads_.assign(total, 0.0f);
}

void ParameterVector::add_slice(const std::string& name, size_t length) {
    size_t offset = manifest_.empty() ? 0 : manifest_.back().offset + manifest_.back().length;
    manifest_.push_back({name, offset, length});
}

static bool is_unit_init(const std::string& name) {
    return name.size() >= 5 && name.compare(name.size() - 5, 5, "gamma") == 0;
}

static bool is_zero_init(const std::string& name) {
    if (name.size() >= 4 && name.compare(name.size() - 4, 4, "beta") == 0) return true;
    size_t dot = name.rfind('.');
    return dot != std::string::npos && dot + 1 < name.size() && name[dot + 1] == 'b';
}

void ParameterVector::init_weights(uint64_t seed) {
    Rng rng(seed_for(seed, "init"));
    for (const SliceInfo& s : manifest_) {
        float* p = values_.data() + s.offset;
        if (is_unit_init(s.name)) {
            std::fill(p, p + s.length, 1.0f);
        } else if (is_zero_init(s.name)) {
            std::fill(p, p + s.length, 0.0f);
        } else {
            for (size_t i = 0; i < s.length; ++i)
                p[i] = static_cast<float>(rng.next_normal() * 0.02);
        }
    }
    zero_grads();
}

const SliceInfo& ParameterVector::slice(const std::string& name) const {
    for (const SliceInfo& s : manifest_)
        if (s.name == name) return s;
    throw Error(Status::internal, "parameters: no slice named " + name);
}

Tensor ParameterVector::view(const std::string& name, int rows, int cols, float* grad_base) {
    const SliceInfo& s = slice(name);
    require(static_cast<size_t>(rows) * cols == s.length, Status::internal,
            strf("parameters: slice %s has %zu values, requested %dx%d", name.c_str(),
                 s.length, rows, cols));
    return Tensor::view(values_.data() + s.offset,
                        grad_base == nullptr ? nullptr : grad_base + s.offset, rows, cols);
}

std::vector<LayerGroup> ParameterVector::layer_groups() const {
    std::vector<LayerGroup> groups;
    for (const SliceInfo& s : manifest_) {
        std::string g = s.name.substr(0, s.name.find('.'));
        if (groups.empty() || groups.back().name != g)
            groups.push_back({g, s.offset, 0});
        groups.back().length += s.length;
    }
    return groups;
}

std::string ParameterVector::manifest_text() const {
    std::string out;
    for (const SliceInfo& s : manifest_)
        out += strf("%s %zu %zu\n", s.name.c_str(), s.offset, s.length);
    return out;
}

uint64_t ParameterVector::value_hash() const {
    return fnv1a64(values_.data(), values_.size() * sizeof(float));
}

} // namespace ewclab
