#include "treco/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "treco/kernels.hpp"
#include "treco/random_tensors.hpp"

namespace treco {

namespace {

Matrix gaussian_matrix(const Shape& shape, index_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
    Matrix a(m, shape.size());
    for (index_t j = 0; j < a.cols(); ++j)
        for (index_t i = 0; i < m; ++i)
            a(i, j) = normal(rng);
    return a;
}

std::vector<index_t> sample_offsets(const Shape& shape, index_t m, std::uint64_t seed) {
    const index_t n = shape.size();
    if (m > n)
        throw std::invalid_argument("SamplingMap: cannot sample more entries than the tensor has");
    std::vector<index_t> all(static_cast<size_t>(n));
    std::iota(all.begin(), all.end(), index_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<size_t>(m));
    return all;
}

} // namespace

GaussianMap::GaussianMap(Shape shape, index_t m, std::uint64_t seed)
        : GaussianMap(shape, m, seed, gaussian_matrix(shape, m, seed)) {}

GaussianMap::GaussianMap(Shape shape, index_t m, std::uint64_t seed, Matrix a)
        : MeasurementMap(std::move(shape), m, seed), a_(std::move(a)) {
    if (a_.rows() != m_ || a_.cols() != shape_.size())
        throw std::invalid_argument("GaussianMap: matrix dimensions mismatch");
}

GaussianMap GaussianMap::from_matrix(Shape shape, Matrix a) {
    const index_t m = a.rows();
    return GaussianMap(std::move(shape), m, 0, std::move(a));
}

Vector GaussianMap::apply(const DenseTensor& u) const {
    check_apply(u);
    Vector y(m_);
    kernels::matvec(a_, u.data(), y.data());
    return y;
}

DenseTensor GaussianMap::adjoint(const Vector& y) const {
    check_adjoint(y);
    DenseTensor out(shape_);
    kernels::matvec_transpose(a_, y.data(), out.data());
    return out;
}

SamplingMap::SamplingMap(Shape shape, index_t m, std::uint64_t seed)
        : SamplingMap(shape, m, seed, sample_offsets(shape, m, seed)) {}

SamplingMap::SamplingMap(Shape shape, index_t m, std::uint64_t seed, std::vector<index_t> omega)
        : MeasurementMap(std::move(shape), m, seed), omega_(std::move(omega)) {
    if (static_cast<index_t>(omega_.size()) != m_)
        throw std::invalid_argument("SamplingMap: |Omega| != m");
    std::vector<index_t> sorted = omega_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("SamplingMap: indices must be distinct");
    for (index_t off : omega_)
        if (off < 0 || off >= shape_.size())
            throw std::invalid_argument("SamplingMap: index out of range");
}

SamplingMap SamplingMap::from_offsets(Shape shape, std::vector<index_t> omega) {
    const index_t m = static_cast<index_t>(omega.size());
    return SamplingMap(std::move(shape), m, 0, std::move(omega));
}

std::vector<MultiIndex> SamplingMap::indices() const {
    std::vector<MultiIndex> out;
    out.reserve(omega_.size());
    for (index_t off : omega_)
        out.push_back(delinearize(off, shape_));
    return out;
}

Vector SamplingMap::apply(const DenseTensor& u) const {
    check_apply(u);
    Vector y(m_);
    for (index_t i = 0; i < m_; ++i)
        y(i) = u[omega_[static_cast<size_t>(i)]];
    return y;
}

DenseTensor SamplingMap::adjoint(const Vector& y) const {
    check_adjoint(y);
    DenseTensor out(shape_);
    for (index_t i = 0; i < m_; ++i)
        out[omega_[static_cast<size_t>(i)]] = y(i);
    return out;
}

TricEstimate estimate_tric(const MeasurementMap& a, const RankTuple& r, int samples,
                           std::uint64_t seed) {
    if (samples < 1)
        throw std::invalid_argument("estimate_tric: need at least one sample");
    r.validate(a.shape());

    TricEstimate est;
    est.ratios.assign(static_cast<size_t>(samples), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < samples; ++k) {
        DenseTensor u = gen_random_unit(a.shape(), r, derive_seed(seed, static_cast<std::uint64_t>(k)));
        est.ratios[static_cast<size_t>(k)] = a.apply(u).squaredNorm();
    }
    for (double ratio : est.ratios)
        est.delta_hat = std::max(est.delta_hat, std::abs(ratio - 1.0));
    return est;
}

index_t theorem2_m(Format format, index_t n, index_t r, index_t d, double delta, double eps,
                   double c) {
    if (n < 1 || r < 1 || d < 1 || delta <= 0.0 || eps <= 0.0 || c <= 0.0)
        throw std::invalid_argument("theorem2_m: inputs must be positive");
    const double dn = static_cast<double>(n);
    const double dr = static_cast<double>(r);
    const double dd = static_cast<double>(d);
    double dof_term;
    if (format == Format::tt)
        dof_term = dd * dn * dr * dr * std::log(dd * dr);
    else
        dof_term = (std::pow(dr, dd) + dd * dn * dr) * std::log(dd);
    const double bound = c / (delta * delta) * std::max(dof_term, std::log(1.0 / eps));
    return static_cast<index_t>(std::ceil(bound));
}

void write_csv(const Vector& v, std::ostream& os) {
    for (index_t i = 0; i < v.size(); ++i)
        os << v(i) << '\n';
}

} // namespace treco
