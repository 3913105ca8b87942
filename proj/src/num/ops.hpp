#pragma once

#include <vector>

#include "num/tensor.hpp"

namespace ewclab {

// Primitive forward ops. Each records its backward closure on the tape when
// the tape is non-null and any input tracks gradients; pass a null tape for
// inference. Shapes are validated and mismatches throw with the offending
// dimensions in the message.

Tensor matmul(Tape* t, const Tensor& a, const Tensor& b);     // (m,k)·(k,n)
Tensor matmul_nt(Tape* t, const Tensor& a, const Tensor& b);  // (m,k)·(n,k)ᵀ
Tensor add(Tape* t, const Tensor& a, const Tensor& b);        // elementwise, same shape
Tensor add_row(Tape* t, const Tensor& a, const Tensor& row);  // (m,n) + (1,n) per row
Tensor mul_elem(Tape* t, const Tensor& a, const Tensor& b);   // hadamard
Tensor scalar_mul(Tape* t, const Tensor& a, double s);
Tensor row_softmax(Tape* t, const Tensor& a);
Tensor layer_norm(Tape* t, const Tensor& a, const Tensor& gamma, const Tensor& beta);
Tensor gelu(Tape* t, const Tensor& a);  // tanh approximation
Tensor embedding_rows(Tape* t, const Tensor& table, const std::vector<int>& ids);
Tensor slice_cols(Tape* t, const Tensor& a, int c0, int c1);  // [c0, c1)
Tensor concat_cols(Tape* t, const std::vector<Tensor>& parts);
Tensor sum_all(Tape* t, const Tensor& a);  // -> 1x1

constexpr double kLayerNormEps = 1e-5;

} // namespace ewclab
