#include "model/encoder.hpp"

#include <cmath>

#include "util/fmt.hpp"

namespace ewclab {

Model::Model(const ModelConfig& cfg, const Vocabulary& vocab)
    : cfg_(cfg), vocab_(vocab), params_(cfg) {
    require(cfg.vocab_size == vocab.size(), Status::bad_config,
            strf("model: config vocab_size %d but vocabulary has %d symbols", cfg.vocab_size,
                 vocab.size()));
    params_.init_weights(cfg.seed);
}

BoundParams Model::bind(float* grad_base) {
    BoundParams b;
    int d = cfg_.d_model, v = cfg_.vocab_size, ff = cfg_.d_ff;
    b.tok = params_.view("embedding.tok", v, d, grad_base);
    b.pos = params_.view("embedding.pos", cfg_.max_seq_len, d, grad_base);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = strf("encoder_%d.", l);
        BoundParams::Layer lay;
        lay.ln1_g = params_.view(p + "ln1.gamma", 1, d, grad_base);
        lay.ln1_b = params_.view(p + "ln1.beta", 1, d, grad_base);
        lay.wq = params_.view(p + "attn.wq", d, d, grad_base);
        lay.bq = params_.view(p + "attn.bq", 1, d, grad_base);
        lay.wk = params_.view(p + "attn.wk", d, d, grad_base);
        lay.bk = params_.view(p + "attn.bk", 1, d, grad_base);
        lay.wv = params_.view(p + "attn.wv", d, d, grad_base);
        lay.bv = params_.view(p + "attn.bv", 1, d, grad_base);
        lay.wo = params_.view(p + "attn.wo", d, d, grad_base);
        lay.bo = params_.view(p + "attn.bo", 1, d, grad_base);
        lay.ln2_g = params_.view(p + "ln2.gamma", 1, d, grad_base);
        lay.ln2_b = params_.view(p + "ln2.beta", 1, d, grad_base);
        lay.w1 = params_.view(p + "ffn.w1", d, ff, grad_base);
        lay.b1 = params_.view(p + "ffn.b1", 1, ff, grad_base);
        lay.w2 = params_.view(p + "ffn.w2", ff, d, grad_base);
        lay.b2 = params_.view(p + "ffn.b2", 1, d, grad_base);
        b.layers.push_back(lay);
    }
    b.fin_g = params_.view("final_norm.gamma", 1, d, grad_base);
    b.fin_b = params_.view("final_norm.beta", 1, d, grad_base);
    b.head_w = params_.view("head.w", d, v, grad_base);
    b.head_b = params_.view("head.b", 1, v, grad_base);
    return b;
}

Tensor Model::forward(Tape* t, const BoundParams& b, const std::vector<int>& ids) const {
    int s = static_cast<int>(ids.size());
    require(s >= 1, Status::internal, "forward: empty sequence");
    require(s <= cfg_.max_seq_len, Status::internal,
            strf("forward: sequence length %d exceeds max_seq_len %d", s, cfg_.max_seq_len));
    for (int id : ids)
        require(id >= 0 && id < cfg_.vocab_size, Status::internal,
                strf("forward: token id %d out of range [0,%d)", id, cfg_.vocab_size));

    std::vector<int> positions(static_cast<size_t>(s));
    for (int i = 0; i < s; ++i) positions[static_cast<size_t>(i)] = i;
    Tensor x = add(t, embedding_rows(t, b.tok, ids), embedding_rows(t, b.pos, positions));

    int dh = cfg_.head_dim();
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    for (const auto& lay : b.layers) {
        Tensor h = layer_norm(t, x, lay.ln1_g, lay.ln1_b);
        Tensor q = add_row(t, matmul(t, h, lay.wq), lay.bq);
        Tensor k = add_row(t, matmul(t, h, lay.wk), lay.bk);
        Tensor v = add_row(t, matmul(t, h, lay.wv), lay.bv);
        std::vector<Tensor> heads;
        for (int hd = 0; hd < cfg_.n_heads; ++hd) {
            int c0 = hd * dh, c1 = (hd + 1) * dh;
            Tensor qh = slice_cols(t, q, c0, c1);
            Tensor kh = slice_cols(t, k, c0, c1);
            Tensor vh = slice_cols(t, v, c0, c1);
            Tensor att = row_softmax(t, scalar_mul(t, matmul_nt(t, qh, kh), scale));
            heads.push_back(matmul(t, att, vh));
        }
        Tensor ctx = concat_cols(t, heads);
        x = add(t, x, add_row(t, matmul(t, ctx, lay.wo), lay.bo));

        Tensor h2 = layer_norm(t, x, lay.ln2_g, lay.ln2_b);
        Tensor f = gelu(t, add_row(t, matmul(t, h2, lay.w1), lay.b1));
        x = add(t, x, add_row(t, matmul(t, f, lay.w2), lay.b2));
    }
    Tensor fin = layer_norm(t, x, b.fin_g, b.fin_b);
    return add_row(t, matmul(t, fin, b.head_w), b.head_b);
}

Tensor Model::forward_padded(Tape* t, const BoundParams& b, const std::vector<int>& ids) const {
    size_t true_len = ids.size();
    while (true_len > 0 && ids[true_len - 1] == Vocabulary::kPad) --true_len;
    require(true_len > 0, Status::internal, "forward: sequence is all [PAD]");
    Tensor inner = forward(t, b, std::vector<int>(ids.begin(), ids.begin() + true_len));
    if (true_len == ids.size()) return inner;
    Tensor out = Tensor::zeros(static_cast<int>(ids.size()), inner.cols());
    std::copy(inner.val(), inner.val() + inner.size(), out.val());
    return out;
}

std::vector<int> Model::encode(const std::string& text) const {
    require(static_cast<int>(text.size()) <= cfg_.max_seq_len, Status::bad_config,
            strf("encode: \"%s\" has %zu characters, max_seq_len is %d", text.c_str(),
                 text.size(), cfg_.max_seq_len));
    return vocab_.encode(text);
}

std::vector<int> Model::predict_masked(const Tensor& logits, const std::vector<int>& positions) {
    std::vector<int> out;
    out.reserve(positions.size());
    for (int pos : positions) {
        require(pos >= 0 && pos < logits.rows(), Status::internal,
                strf("predict: position %d out of sequence bounds [0,%d)", pos, logits.rows()));
        const float* row = logits.val() + static_cast<size_t>(pos) * logits.cols();
        int best = 0;
        for (int c = 1; c < logits.cols(); ++c)
            if (row[c] > row[best]) best = c;
        out.push_back(best);
    }
    return out;
}

} // namespace ewclab
