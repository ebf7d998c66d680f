#pragma once

#include <memory>
#include <string>

#include "treco/decomposition.hpp"
#include "treco/tensor.hpp"

namespace treco {

/// Linear measurement map A : H_d -> R^m with adjoint. Maps are immutable
/// after construction; apply and adjoint are pure.
class MeasurementMap {
public:
    MeasurementMap(Shape shape, index_t m, std::uint64_t seed)
            : shape_(std::move(shape)), m_(m), seed_(seed) {
        if (m_ < 1)
            throw std::invalid_argument("MeasurementMap: need at least one measurement");
    }
    virtual ~MeasurementMap() = default;

    const Shape& shape() const { return shape_; }
    index_t m() const { return m_; }
    std::uint64_t seed() const { return seed_; }

    virtual std::string kind() const = 0;
    virtual Vector apply(const DenseTensor& u) const = 0;
    virtual DenseTensor adjoint(const Vector& y) const = 0;

protected:
    void check_apply(const DenseTensor& u) const {
        if (!(u.shape() == shape_))
            throw std::invalid_argument("measurement apply: shape mismatch");
    }
    void check_adjoint(const Vector& y) const {
        if (y.size() != m_)
            throw std::invalid_argument("measurement adjoint: length mismatch");
    }

    Shape shape_;
    index_t m_;
    std::uint64_t seed_;
};

/// Dense map with i.i.d. N(0, 1/m) entries, stored as an m x N matrix.
/// Entries are drawn column by column (column-major order) from a
/// mt19937_64 engine seeded with `seed`.
class GaussianMap final : public MeasurementMap {
public:
    GaussianMap(Shape shape, index_t m, std::uint64_t seed);

    /// Test hook: wraps an explicit m x N matrix (orthonormal-row or
    /// degenerate maps).
    static GaussianMap from_matrix(Shape shape, Matrix a);

    const Matrix& matrix() const { return a_; }

    std::string kind() const override { return "gaussian"; }
    Vector apply(const DenseTensor& u) const override;
    DenseTensor adjoint(const Vector& y) const override;

private:
    GaussianMap(Shape shape, index_t m, std::uint64_t seed, Matrix a);
    Matrix a_;
};

/// Entry sampler: (Au)_i = u(mu_i) on m distinct multi-indices Omega,
/// drawn uniformly without replacement via a seeded shuffle.
class SamplingMap final : public MeasurementMap {
public:
    SamplingMap(Shape shape, index_t m, std::uint64_t seed);
    static SamplingMap from_offsets(Shape shape, std::vector<index_t> omega);

    /// Flat offsets of Omega, in measurement order.
    const std::vector<index_t>& omega() const { return omega_; }
    std::vector<MultiIndex> indices() const;

    std::string kind() const override { return "sampling"; }
    Vector apply(const DenseTensor& u) const override;
    DenseTensor adjoint(const Vector& y) const override;

private:
    SamplingMap(Shape shape, index_t m, std::uint64_t seed, std::vector<index_t> omega);
    std::vector<index_t> omega_;
};

/// Empirical lower bound on the tensor restricted isometry constant:
/// delta_hat = max over `samples` random unit rank-r tensors of
/// | |A u|^2 - 1 |. A lower bound on delta_r by definition, never
/// delta_r itself. Samples run in parallel under per-sample derived
/// seeds, so the result is schedule-independent.
struct TricEstimate {
    double delta_hat = 0.0;
    std::vector<double> ratios; // |A u_k|^2 per sample
};

TricEstimate estimate_tric(const MeasurementMap& a, const RankTuple& r, int samples,
                           std::uint64_t seed);

/// Measurement count that guarantees delta_r <= delta with probability
/// at least 1 - eps for Gaussian maps:
///   TT:     m >= C delta^-2 max{ d n r^2 log(d r), log(1/eps) }
///   HOSVD:  m >= C delta^-2 max{ (r^d + d n r) log(d), log(1/eps) }
/// The universal constant C is a caller-supplied parameter.
index_t theorem2_m(Format format, index_t n, index_t r, index_t d, double delta, double eps,
                   double c);

/// One value per line.
void write_csv(const Vector& v, std::ostream& os);

} // namespace treco
