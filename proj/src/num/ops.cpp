#include "num/ops.hpp"

#include <Eigen/Core>
#include <cmath>

#include "util/fmt.hpp"

namespace ewclab {

using MapF = Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapCF = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

static void check(bool ok, const std::string& msg) { require(ok, Status::internal, msg); }

Tensor matmul(Tape* t, const Tensor& a, const Tensor& b) {
    check(a.cols() == b.rows(),
          strf("matmul: inner dimensions %d vs %d", a.cols(), b.rows()));
    Tensor out = Tensor::zeros(a.rows(), b.cols(), track(t, {&a, &b}));
    {
        MapCF A(a.val(), a.rows(), a.cols());
        MapCF B(b.val(), b.rows(), b.cols());
        MapF O(out.val(), out.rows(), out.cols());
        O = (A.cast<double>() * B.cast<double>()).cast<float>();
    }
    if (out.requires_grad()) {
        t->record([a, b, out]() {
            MapCF G(out.grad(), out.rows(), out.cols());
            if (a.requires_grad()) {
                MapCF B(b.val(), b.rows(), b.cols());
                MapF GA(a.grad(), a.rows(), a.cols());
                GA += (G.cast<double>() * B.cast<double>().transpose()).cast<float>();
            }
            if (b.requires_grad()) {
                MapCF A(a.val(), a.rows(), a.cols());
                MapF GB(b.grad(), b.rows(), b.cols());
                GB += (A.cast<double>().transpose() * G.cast<double>()).cast<float>();
            }
        });
    }
    return out;
}

Tensor matmul_nt(Tape* t, const Tensor& a, const Tensor& b) {
    check(a.cols() == b.cols(),
          strf("matmul_nt: inner dimensions %d vs %d", a.cols(), b.cols()));
    Tensor out = Tensor::zeros(a.rows(), b.rows(), track(t, {&a, &b}));
    {
        MapCF A(a.val(), a.rows(), a.cols());
        MapCF B(b.val(), b.rows(), b.cols());
        MapF O(out.val(), out.rows(), out.cols());
        O = (A.cast<double>() * B.cast<double>().transpose()).cast<float>();
    }
    if (out.requires_grad()) {
        t->record([a, b, out]() {
            MapCF G(out.grad(), out.rows(), out.cols());
            if (a.requires_grad()) {
                MapCF B(b.val(), b.rows(), b.cols());
                MapF GA(a.grad(), a.rows(), a.cols());
                GA += (G.cast<double>() * B.cast<double>()).cast<float>();
            }
            if (b.requires_grad()) {
                MapCF A(a.val(), a.rows(), a.cols());
                MapF GB(b.grad(), b.rows(), b.cols());
                GB += (G.cast<double>().transpose() * A.cast<double>()).cast<float>();
            }
        });
    }
    return out;
}

Tensor add(Tape* t, const Tensor& a, const Tensor& b) {
    check(a.same_shape(b), strf("add: shape mismatch %dx%d vs %dx%d", a.rows(), a.cols(),
                                b.rows(), b.cols()));
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a, &b}));
    for (size_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] + b.val()[i];
    if (out.requires_grad()) {
        t->record([a, b, out]() {
            for (size_t i = 0; i < out.size(); ++i) {
                float g = out.grad()[i];
                if (a.requires_grad()) a.grad()[i] += g;
                if (b.requires_grad()) b.grad()[i] += g;
            }
        });
    }
    return out;
}

Tensor add_row(Tape* t, const Tensor& a, const Tensor& row) {
    check(row.rows() == 1 && row.cols() == a.cols(),
          strf("add_row: row is %dx%d, expected 1x%d", row.rows(), row.cols(), a.cols()));
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a, &row}));
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c)
            out.val()[static_cast<size_t>(r) * a.cols() + c] =
                a.at(r, c) + row.val()[c];
    if (out.requires_grad()) {
        t->record([a, row, out]() {
            int rows = out.rows(), cols = out.cols();
            if (a.requires_grad())
                for (size_t i = 0; i < out.size(); ++i) a.grad()[i] += out.grad()[i];
            if (row.requires_grad())
                for (int c = 0; c < cols; ++c) {
                    double s = 0.0;
                    for (int r = 0; r < rows; ++r)
                        s += out.grad()[static_cast<size_t>(r) * cols + c];
                    row.grad()[c] += static_cast<float>(s);
                }
        });
    }
    return out;
}

Tensor mul_elem(Tape* t, const Tensor& a, const Tensor& b) {
    check(a.same_shape(b), strf("mul_elem: shape mismatch %dx%d vs %dx%d", a.rows(), a.cols(),
                                b.rows(), b.cols()));
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a, &b}));
    for (size_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] * b.val()[i];
    if (out.requires_grad()) {
        t->record([a, b, out]() {
            for (size_t i = 0; i < out.size(); ++i) {
                float g = out.grad()[i];
                if (a.requires_grad()) a.grad()[i] += g * b.val()[i];
                if (b.requires_grad()) b.grad()[i] += g * a.val()[i];
            }
        });
    }
    return out;
}

Tensor scalar_mul(Tape* t, const Tensor& a, double s) {
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a}));
    for (size_t i = 0; i < a.size(); ++i)
        out.val()[i] = static_cast<float>(a.val()[i] * s);
    if (out.requires_grad()) {
        t->record([a, out, s]() {
            for (size_t i = 0; i < out.size(); ++i)
                a.grad()[i] += static_cast<float>(out.grad()[i] * s);
        });
    }
    return out;
}

Tensor row_softmax(Tape* t, const Tensor& a) {
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a}));
    int cols = a.cols();
    for (int r = 0; r < a.rows(); ++r) {
        const float* x = a.val() + static_cast<size_t>(r) * cols;
        float* y = out.val() + static_cast<size_t>(r) * cols;
        double m = x[0];
        for (int c = 1; c < cols; ++c) m = std::max(m, static_cast<double>(x[c]));
        double z = 0.0;
        for (int c = 0; c < cols; ++c) z += std::exp(x[c] - m);
        for (int c = 0; c < cols; ++c)
            y[c] = static_cast<float>(std::exp(x[c] - m) / z);
    }
    if (out.requires_grad()) {
        t->record([a, out]() {
            int cols = out.cols();
            for (int r = 0; r < out.rows(); ++r) {
                const float* p = out.val() + static_cast<size_t>(r) * cols;
                const float* g = out.grad() + static_cast<size_t>(r) * cols;
                float* ga = a.grad() + static_cast<size_t>(r) * cols;
                double dot = 0.0;
                for (int c = 0; c < cols; ++c) dot += static_cast<double>(g[c]) * p[c];
                for (int c = 0; c < cols; ++c)
                    ga[c] += static_cast<float>(p[c] * (g[c] - dot));
            }
        });
    }
    return out;
}

Tensor layer_norm(Tape* t, const Tensor& a, const Tensor& gamma, const Tensor& beta) {
    check(gamma.rows() == 1 && gamma.cols() == a.cols() && beta.rows() == 1 &&
              beta.cols() == a.cols(),
          strf("layer_norm: affine params must be 1x%d", a.cols()));
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a, &gamma, &beta}));
    int n = a.cols();
    auto stats = std::make_shared<std::vector<double>>(static_cast<size_t>(a.rows()) * 2);
    for (int r = 0; r < a.rows(); ++r) {
        const float* x = a.val() + static_cast<size_t>(r) * n;
        float* y = out.val() + static_cast<size_t>(r) * n;
        double mu = 0.0;
        for (int c = 0; c < n; ++c) mu += x[c];
        mu /= n;
        double var = 0.0;
        for (int c = 0; c < n; ++c) var += (x[c] - mu) * (x[c] - mu);
        var /= n;
        double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        (*stats)[static_cast<size_t>(r) * 2] = mu;
        (*stats)[static_cast<size_t>(r) * 2 + 1] = inv;
        for (int c = 0; c < n; ++c)
            y[c] = static_cast<float>((x[c] - mu) * inv * gamma.val()[c] + beta.val()[c]);
    }
    if (out.requires_grad()) {
        t->record([a, gamma, beta, out, stats]() {
            int n = out.cols();
            for (int r = 0; r < out.rows(); ++r) {
                const float* x = a.val() + static_cast<size_t>(r) * n;
                const float* g = out.grad() + static_cast<size_t>(r) * n;
                double mu = (*stats)[static_cast<size_t>(r) * 2];
                double inv = (*stats)[static_cast<size_t>(r) * 2 + 1];
                if (gamma.requires_grad() || beta.requires_grad()) {
                    for (int c = 0; c < n; ++c) {
                        double xhat = (x[c] - mu) * inv;
                        if (gamma.requires_grad())
                            gamma.grad()[c] += static_cast<float>(g[c] * xhat);
                        if (beta.requires_grad()) beta.grad()[c] += g[c];
                    }
                }
                if (a.requires_grad()) {
                    double sum_gx = 0.0, sum_gxx = 0.0;
                    for (int c = 0; c < n; ++c) {
                        double gx = static_cast<double>(g[c]) * gamma.val()[c];
                        sum_gx += gx;
                        sum_gxx += gx * (x[c] - mu) * inv;
                    }
                    float* ga = a.grad() + static_cast<size_t>(r) * n;
                    for (int c = 0; c < n; ++c) {
                        double gx = static_cast<double>(g[c]) * gamma.val()[c];
                        double xhat = (x[c] - mu) * inv;
                        ga[c] += static_cast<float>(
                            inv * (gx - sum_gx / n - xhat * sum_gxx / n));
                    }
                }
            }
        });
    }
    return out;
}

static inline double gelu_fwd(double x) {
    const double c = 0.7978845608028654;  // sqrt(2/pi)
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

static inline double gelu_bwd(double x) {
    const double c = 0.7978845608028654;
    double u = c * (x + 0.044715 * x * x * x);
    double th = std::tanh(u);
    double du = c * (1.0 + 3.0 * 0.044715 * x * x);
    return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
}

Tensor gelu(Tape* t, const Tensor& a) {
    Tensor out = Tensor::zeros(a.rows(), a.cols(), track(t, {&a}));
    for (size_t i = 0; i < a.size(); ++i)
        out.val()[i] = static_cast<float>(gelu_fwd(a.val()[i]));
    if (out.requires_grad()) {
        t->record([a, out]() {
            for (size_t i = 0; i < out.size(); ++i)
                a.grad()[i] += static_cast<float>(out.grad()[i] * gelu_bwd(a.val()[i]));
        });
    }
    return out;
}

Tensor embedding_rows(Tape* t, const Tensor& table, const std::vector<int>& ids) {
    check(!ids.empty(), "embedding: empty id list");
    for (int id : ids)
        check(id >= 0 && id < table.rows(),
              strf("embedding: id %d out of range [0,%d)", id, table.rows()));
    Tensor out = Tensor::zeros(static_cast<int>(ids.size()), table.cols(), track(t, {&table}));
    int n = table.cols();
    for (size_t i = 0; i < ids.size(); ++i)
        std::copy(table.val() + static_cast<size_t>(ids[i]) * n,
                  table.val() + static_cast<size_t>(ids[i] + 1) * n,
                  out.val() + i * n);
    if (out.requires_grad()) {
        t->record([table, out, ids]() {
            int n = table.cols();
            for (size_t i = 0; i < ids.size(); ++i) {
                float* dst = table.grad() + static_cast<size_t>(ids[i]) * n;
                const float* src = out.grad() + i * n;
                for (int c = 0; c < n; ++c) dst[c] += src[c];
            }
        });
    }
    return out;
}

Tensor slice_cols(Tape* t, const Tensor& a, int c0, int c1) {
    check(0 <= c0 && c0 < c1 && c1 <= a.cols(),
          strf("slice_cols: [%d,%d) out of 0..%d", c0, c1, a.cols()));
    Tensor out = Tensor::zeros(a.rows(), c1 - c0, track(t, {&a}));
    int w = c1 - c0;
    for (int r = 0; r < a.rows(); ++r)
        std::copy(a.val() + static_cast<size_t>(r) * a.cols() + c0,
                  a.val() + static_cast<size_t>(r) * a.cols() + c1,
                  out.val() + static_cast<size_t>(r) * w);
    if (out.requires_grad()) {
        t->record([a, out, c0, w]() {
            for (int r = 0; r < out.rows(); ++r) {
                float* dst = a.grad() + static_cast<size_t>(r) * a.cols() + c0;
                const float* src = out.grad() + static_cast<size_t>(r) * w;
                for (int c = 0; c < w; ++c) dst[c] += src[c];
            }
        });
    }
    return out;
}

Tensor concat_cols(Tape* t, const std::vector<Tensor>& parts) {
    check(!parts.empty(), "concat_cols: no parts");
    int rows = parts[0].rows();
    int cols = 0;
    bool tracked = false;
    for (const Tensor& p : parts) {
        check(p.rows() == rows, strf("concat_cols: row mismatch %d vs %d", p.rows(), rows));
        cols += p.cols();
        if (t != nullptr && p.requires_grad()) tracked = true;
    }
    Tensor out = Tensor::zeros(rows, cols, tracked);
    int off = 0;
    for (const Tensor& p : parts) {
        for (int r = 0; r < rows; ++r)
            std::copy(p.val() + static_cast<size_t>(r) * p.cols(),
                      p.val() + static_cast<size_t>(r + 1) * p.cols(),
                      out.val() + static_cast<size_t>(r) * cols + off);
        off += p.cols();
    }
    if (out.requires_grad()) {
        t->record([parts, out]() {
            int cols = out.cols();
            int off = 0;
            for (const Tensor& p : parts) {
                if (p.requires_grad())
                    for (int r = 0; r < p.rows(); ++r) {
                        float* dst = p.grad() + static_cast<size_t>(r) * p.cols();
                        const float* src = out.grad() + static_cast<size_t>(r) * cols + off;
                        for (int c = 0; c < p.cols(); ++c) dst[c] += src[c];
                    }
                off += p.cols();
            }
        });
    }
    return out;
}

Tensor sum_all(Tape* t, const Tensor& a) {
    Tensor out = Tensor::zeros(1, 1, track(t, {&a}));
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a.val()[i];
    out.val()[0] = static_cast<float>(s);
    if (out.requires_grad()) {
        t->record([a, out]() {
            float g = out.grad()[0];
            for (size_t i = 0; i < a.size(); ++i) a.grad()[i] += g;
        });
    }
    return out;
}

} // namespace ewclab
