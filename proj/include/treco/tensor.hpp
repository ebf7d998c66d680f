#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace treco {

using index_t = std::int64_t;

/// Dense matrices and all factorizations are backed by Eigen.
/// Eigen's default column-major storage matches the linearization
/// convention below, so prefix unfoldings are plain memory views.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Multi-index (mu_1,...,mu_d). Zero-based in code; the math notation in
/// comments and the CSV debug dump are one-based.
using MultiIndex = std::vector<index_t>;

/// Dimensions (n_1,...,n_d) of an order-d tensor space.
class Shape {
public:
    explicit Shape(std::vector<index_t> dims);

    index_t order() const { return static_cast<index_t>(dims_.size()); }
    index_t dim(index_t i) const { return dims_[static_cast<size_t>(i)]; }
    const std::vector<index_t>& dims() const { return dims_; }

    /// Total element count N = n_1 * ... * n_d.
    index_t size() const;

    /// Product n_1 * ... * n_i (i modes), so prefix_size(0) = 1.
    index_t prefix_size(index_t i) const;

    bool operator==(const Shape& other) const { return dims_ == other.dims_; }

private:
    std::vector<index_t> dims_;
};

/// Flat offset of a multi-index. Co-lexicographic: mu_1 varies fastest.
index_t linearize(const MultiIndex& idx, const Shape& shape);

/// Inverse of linearize.
MultiIndex delinearize(index_t offset, const Shape& shape);

/// Order-d array over R with co-lexicographic flat storage (mu_1 fastest).
/// A value type: cheap to copy at the problem sizes this library targets,
/// safe to share read-only across threads.
class DenseTensor {
public:
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    index_t size() const { return static_cast<index_t>(values_.size()); }

    double operator()(const MultiIndex& idx) const { return values_[static_cast<size_t>(linearize(idx, shape_))]; }
    double& operator()(const MultiIndex& idx) { return values_[static_cast<size_t>(linearize(idx, shape_))]; }

    double operator[](index_t flat) const { return values_[static_cast<size_t>(flat)]; }
    double& operator[](index_t flat) { return values_[static_cast<size_t>(flat)]; }

    const std::vector<double>& values() const { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    /// Flat view as an Eigen vector.
    Eigen::Map<const Vector> vec() const { return {values_.data(), static_cast<index_t>(values_.size())}; }
    Eigen::Map<Vector> vec() { return {values_.data(), static_cast<index_t>(values_.size())}; }

private:
    Shape shape_;
    std::vector<double> values_;
};

/// Matricisation U^alpha: rows indexed by (mu_i)_{i in alpha} in the order
/// alpha lists them (first entry fastest), columns by the complement in
/// increasing mode order, co-lexicographic. Modes are zero-based.
Matrix unfold(const DenseTensor& u, std::span<const index_t> row_modes);
Matrix unfold(const DenseTensor& u, std::initializer_list<index_t> row_modes);

/// Exact inverse of unfold.
DenseTensor fold(const Matrix& m, std::span<const index_t> row_modes, const Shape& shape);
DenseTensor fold(const Matrix& m, std::initializer_list<index_t> row_modes, const Shape& shape);

/// Euclidean (ell_2) inner product and norm on the ambient space.
double inner(const DenseTensor& u, const DenseTensor& v);
double norm(const DenseTensor& u);

/// Contract mode `mode` of u with m (m.cols() == n_mode); the result
/// replaces n_mode by m.rows(). Equals fold(m * unfold(u, {mode}), ...).
DenseTensor mode_product(const DenseTensor& u, const Matrix& m, index_t mode);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double s, const DenseTensor& a);

/// Debug dump, one line per entry: mu_1,...,mu_d,value (one-based indices).
void write_csv(const DenseTensor& u, std::ostream& os);

} // namespace treco
