#include "treco/kernels.hpp"

namespace treco::kernels {

namespace {

inline double row_dot(const Matrix& a, index_t row, const double* x) {
    const index_t n = a.cols();
    const index_t m = a.rows();
    const double* data = a.data();
    double s = 0.0;
    for (index_t k = 0; k < n; ++k)
        s += data[row + k * m] * x[k];
    return s;
}

inline double col_dot(const Matrix& a, index_t col, const double* y) {
    const index_t m = a.rows();
    const double* data = a.data() + col * m;
    double s = 0.0;
    for (index_t k = 0; k < m; ++k)
        s += data[k] * y[k];
    return s;
}

} // namespace

void matvec_serial(const Matrix& a, const double* x, double* y) {
    for (index_t i = 0; i < a.rows(); ++i)
        y[i] = row_dot(a, i, x);
}

void matvec(const Matrix& a, const double* x, double* y) {
    const index_t m = a.rows();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < m; ++i)
        y[i] = row_dot(a, i, x);
}

void matvec_transpose_serial(const Matrix& a, const double* y, double* out) {
    for (index_t j = 0; j < a.cols(); ++j)
        out[j] = col_dot(a, j, y);
}

void matvec_transpose(const Matrix& a, const double* y, double* out) {
    const index_t n = a.cols();
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < n; ++j)
        out[j] = col_dot(a, j, y);
}

} // namespace treco::kernels
