// Test-only oracles: independent brute-force implementations used to
// freeze expected values. They deliberately avoid the library's index
// arithmetic and decomposition paths.
#pragma once

#include <random>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "treco/manifold.hpp"
#include "treco/random_tensors.hpp"
#include "treco/recovery.hpp"

namespace oracles {

using namespace treco;

// Enumerates multi-indices with mu_1 fastest and reports the position of
// idx in that enumeration.
inline index_t linearize_by_enumeration(const MultiIndex& idx, const Shape& shape) {
    MultiIndex cur(static_cast<size_t>(shape.order()), 0);
    index_t pos = 0;
    while (true) {
        if (cur == idx)
            return pos;
        index_t i = 0;
        while (i < shape.order()) {
            if (++cur[static_cast<size_t>(i)] < shape.dim(i))
                break;
            cur[static_cast<size_t>(i)] = 0;
            ++i;
        }
        if (i == shape.order())
            throw std::logic_error("oracle: index not found");
        ++pos;
    }
}

inline std::vector<MultiIndex> all_indices(const Shape& shape) {
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<size_t>(shape.order()), 0);
    for (index_t flat = 0; flat < shape.size(); ++flat) {
        out.push_back(cur);
        index_t i = 0;
        while (i < shape.order() && ++cur[static_cast<size_t>(i)] == shape.dim(i)) {
            cur[static_cast<size_t>(i)] = 0;
            ++i;
        }
    }
    return out;
}

// Element-by-element unfolding built from the enumeration oracle.
inline Matrix unfold_by_enumeration(const DenseTensor& u, const std::vector<index_t>& row_modes) {
    const Shape& shape = u.shape();
    std::vector<index_t> col_modes;
    for (index_t m = 0; m < shape.order(); ++m)
        if (std::find(row_modes.begin(), row_modes.end(), m) == row_modes.end())
            col_modes.push_back(m);

    std::vector<index_t> row_dims, col_dims;
    for (index_t m : row_modes)
        row_dims.push_back(shape.dim(m));
    for (index_t m : col_modes)
        col_dims.push_back(shape.dim(m));
    const Shape row_shape(row_dims.empty() ? std::vector<index_t>{1} : row_dims);
    const Shape col_shape(col_dims.empty() ? std::vector<index_t>{1} : col_dims);

    Matrix out = Matrix::Zero(row_shape.size(), col_shape.size());
    for (const MultiIndex& idx : all_indices(shape)) {
        MultiIndex ridx, cidx;
        for (index_t m : row_modes)
            ridx.push_back(idx[static_cast<size_t>(m)]);
        for (index_t m : col_modes)
            cidx.push_back(idx[static_cast<size_t>(m)]);
        if (ridx.empty())
            ridx.push_back(0);
        if (cidx.empty())
            cidx.push_back(0);
        out(linearize_by_enumeration(ridx, row_shape), linearize_by_enumeration(cidx, col_shape)) =
            u(idx);
    }
    return out;
}

inline double inner_by_enumeration(const DenseTensor& u, const DenseTensor& v) {
    double s = 0.0;
    for (const MultiIndex& idx : all_indices(u.shape()))
        s += u(idx) * v(idx);
    return s;
}

// Explicit tangent-space projector at a TT base, assembled from finite
// perturbations of the cores (central differences), orthonormalized by
// SVD.
inline Matrix tangent_projector_by_perturbation(const TTTensor& base, double h = 1e-5) {
    const index_t n_total = base.shape().size();
    std::vector<Vector> directions;
    for (index_t i = 0; i < base.order(); ++i) {
        for (index_t k = 0; k < base.core(i).size(); ++k) {
            TTTensor plus = base;
            TTTensor minus = base;
            plus.core(i)[k] += h;
            minus.core(i)[k] -= h;
            Vector dir = (tt_to_dense(plus).vec() - tt_to_dense(minus).vec()) / (2.0 * h);
            directions.push_back(dir);
        }
    }
    Matrix t(n_total, static_cast<index_t>(directions.size()));
    for (size_t c = 0; c < directions.size(); ++c)
        t.col(static_cast<index_t>(c)) = directions[c];
    Eigen::BDCSVD<Matrix> svd(t, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    index_t rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-8 * sv(0))
        ++rank;
    Matrix q = svd.matrixU().leftCols(rank);
    return q * q.transpose();
}

// Best rank-r approximation estimate: multi-restart alternating
// projection (ALS on min |y - v|) run to stagnation.
inline double best_tt_approx_error(const DenseTensor& y, const std::vector<index_t>& rank,
                                   int restarts, std::uint64_t seed, int max_half_sweeps = 200) {
    double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(dynamic)
    for (int rs = 0; rs < restarts; ++rs) {
        TTTensor v = gen_random_tt(y.shape(), rank, derive_seed(seed, static_cast<std::uint64_t>(rs)));
        double prev = std::numeric_limits<double>::infinity();
        double err = prev;
        for (int it = 0; it < max_half_sweeps; ++it) {
            v = als_refine_step(y, v);
            err = norm(y - tt_to_dense(v));
            if (prev - err <= 1e-12 * std::max(err, 1e-300))
                break;
            prev = err;
        }
#pragma omp critical
        best = std::min(best, err);
    }
    return best;
}

inline double best_tucker_approx_error(const DenseTensor& y, const std::vector<index_t>& rank,
                                       int restarts, std::uint64_t seed, int max_sweeps = 200) {
    double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(dynamic)
    for (int rs = 0; rs < restarts; ++rs) {
        auto [dense, tucker] = gen_random_tucker(y.shape(), rank,
                                                 derive_seed(seed, static_cast<std::uint64_t>(rs)));
        TuckerTensor v = tucker;
        double prev = std::numeric_limits<double>::infinity();
        double err = prev;
        for (int it = 0; it < max_sweeps; ++it) {
            v = als_refine_step(y, v);
            err = norm(y - tucker_to_dense(v));
            if (prev - err <= 1e-12 * std::max(err, 1e-300))
                break;
            prev = err;
        }
#pragma omp critical
        best = std::min(best, err);
    }
    return best;
}

} // namespace oracles
