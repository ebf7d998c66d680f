#pragma once

#include "treco/tensor.hpp"

namespace treco::kernels {

/// y = a * x for a column-major m x n matrix. The OpenMP variant splits
/// the output rows across threads; every entry is accumulated by exactly
/// one thread in the same order as the serial reference, so results are
/// bit-identical for any thread count.
void matvec(const Matrix& a, const double* x, double* y);
void matvec_serial(const Matrix& a, const double* x, double* y);

/// out = a^T * y, split across output columns. Same determinism contract.
void matvec_transpose(const Matrix& a, const double* y, double* out);
void matvec_transpose_serial(const Matrix& a, const double* y, double* out);

} // namespace treco::kernels
