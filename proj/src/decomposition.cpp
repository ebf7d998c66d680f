#include "treco/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace treco {

std::string to_string(Format f) { return f == Format::tucker ? "tucker" : "tt"; }

Format format_from_string(const std::string& s) {
    if (s == "tucker")
        return Format::tucker;
    if (s == "tt")
        return Format::tt;
    throw std::invalid_argument("unknown format: " + s);
}

void RankTuple::validate(const Shape& shape) const {
    const index_t d = shape.order();
    if (format == Format::tucker) {
        if (static_cast<index_t>(values.size()) != d)
            throw std::invalid_argument("RankTuple: tucker rank needs d entries");
        for (index_t i = 0; i < d; ++i) {
            const index_t r = values[static_cast<size_t>(i)];
            if (r < 1 || r > shape.dim(i))
                throw std::invalid_argument("RankTuple: tucker rank out of range");
        }
    } else {
        if (static_cast<index_t>(values.size()) != d - 1)
            throw std::invalid_argument("RankTuple: tt rank needs d-1 entries");
        for (index_t i = 0; i + 1 < d; ++i) {
            const index_t r = values[static_cast<size_t>(i)];
            const index_t bound = std::min(shape.prefix_size(i + 1), shape.size() / shape.prefix_size(i + 1));
            if (r < 1 || r > bound)
                throw std::invalid_argument("RankTuple: tt rank out of range");
        }
    }
}

RankTuple max_rank(const Shape& shape, Format format) {
    const index_t d = shape.order();
    std::vector<index_t> v;
    if (format == Format::tucker) {
        v = shape.dims();
    } else {
        for (index_t i = 0; i + 1 < d; ++i)
            v.push_back(std::min(shape.prefix_size(i + 1), shape.size() / shape.prefix_size(i + 1)));
    }
    return {format, std::move(v)};
}

index_t numerical_rank(const Vector& sigma, index_t rows, index_t cols) {
    if (sigma.size() == 0 || sigma(0) == 0.0)
        return 0;
    const double tol =
        static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma(0);
    index_t r = 0;
    while (r < sigma.size() && sigma(r) > tol)
        ++r;
    return r;
}

namespace {

struct ThinSvd {
    Matrix u;
    Vector sigma;
    Matrix v;
};

ThinSvd thin_svd(const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// First column of the identity, used as the factor of a zero tensor so
// that degenerate inputs still produce valid rank-1 structures.
Matrix unit_factor(index_t n) {
    Matrix b = Matrix::Zero(n, 1);
    b(0, 0) = 1.0;
    return b;
}

} // namespace

TuckerTensor::TuckerTensor(Shape shape, DenseTensor core, std::vector<Matrix> factors,
                           std::vector<std::vector<double>> sigma)
        : shape_(std::move(shape)), core_(std::move(core)), factors_(std::move(factors)),
          sigma_(std::move(sigma)) {
    const index_t d = shape_.order();
    if (core_.shape().order() != d || static_cast<index_t>(factors_.size()) != d)
        throw std::invalid_argument("TuckerTensor: order mismatch");
    for (index_t i = 0; i < d; ++i) {
        const Matrix& b = factors_[static_cast<size_t>(i)];
        if (b.rows() != shape_.dim(i) || b.cols() != core_.shape().dim(i))
            throw std::invalid_argument("TuckerTensor: factor dimensions inconsistent");
    }
}

std::vector<index_t> TuckerTensor::ranks() const { return core_.shape().dims(); }

TTTensor::TTTensor(Shape shape, std::vector<DenseTensor> cores)
        : shape_(std::move(shape)), cores_(std::move(cores)) {
    const index_t d = shape_.order();
    if (static_cast<index_t>(cores_.size()) != d)
        throw std::invalid_argument("TTTensor: need one core per mode");
    index_t r_prev = 1;
    for (index_t i = 0; i < d; ++i) {
        const Shape& cs = cores_[static_cast<size_t>(i)].shape();
        if (cs.order() != 3)
            throw std::invalid_argument("TTTensor: cores must be order 3");
        if (cs.dim(0) != r_prev || cs.dim(1) != shape_.dim(i))
            throw std::invalid_argument("TTTensor: core dimensions do not chain");
        r_prev = cs.dim(2);
    }
    if (r_prev != 1)
        throw std::invalid_argument("TTTensor: last bond rank must be 1");
}

std::vector<index_t> TTTensor::ranks() const {
    std::vector<index_t> r;
    for (index_t i = 0; i + 1 < order(); ++i)
        r.push_back(cores_[static_cast<size_t>(i)].shape().dim(2));
    return r;
}

index_t TTTensor::rank(index_t bond) const {
    if (bond <= 0 || bond >= order())
        return 1;
    return cores_[static_cast<size_t>(bond - 1)].shape().dim(2);
}

Eigen::Map<const Matrix> TTTensor::left_unfold(index_t i) const {
    const DenseTensor& c = cores_[static_cast<size_t>(i)];
    return {c.data(), c.shape().dim(0) * c.shape().dim(1), c.shape().dim(2)};
}

Eigen::Map<Matrix> TTTensor::left_unfold(index_t i) {
    DenseTensor& c = cores_[static_cast<size_t>(i)];
    return {c.data(), c.shape().dim(0) * c.shape().dim(1), c.shape().dim(2)};
}

Eigen::Map<const Matrix> TTTensor::right_unfold(index_t i) const {
    const DenseTensor& c = cores_[static_cast<size_t>(i)];
    return {c.data(), c.shape().dim(0), c.shape().dim(1) * c.shape().dim(2)};
}

Eigen::Map<Matrix> TTTensor::right_unfold(index_t i) {
    DenseTensor& c = cores_[static_cast<size_t>(i)];
    return {c.data(), c.shape().dim(0), c.shape().dim(1) * c.shape().dim(2)};
}

CanonicalTensor::CanonicalTensor(Shape s, std::vector<std::vector<Vector>> t)
        : shape(std::move(s)), terms(std::move(t)) {
    for (const auto& term : terms) {
        if (static_cast<index_t>(term.size()) != shape.order())
            throw std::invalid_argument("CanonicalTensor: term order mismatch");
        for (index_t i = 0; i < shape.order(); ++i)
            if (term[static_cast<size_t>(i)].size() != shape.dim(i))
                throw std::invalid_argument("CanonicalTensor: term vector length mismatch");
    }
}

TuckerTensor hosvd(const DenseTensor& u) {
    const Shape& shape = u.shape();
    const index_t d = shape.order();

    std::vector<Matrix> factors;
    std::vector<std::vector<double>> sigma(static_cast<size_t>(d));
    for (index_t i = 0; i < d; ++i) {
        ThinSvd svd = thin_svd(unfold(u, {i}));
        index_t r = numerical_rank(svd.sigma, svd.u.rows(), shape.size() / shape.dim(i));
        if (r == 0) {
            factors.push_back(unit_factor(shape.dim(i)));
            sigma[static_cast<size_t>(i)] = {0.0};
            continue;
        }
        factors.push_back(svd.u.leftCols(r));
        sigma[static_cast<size_t>(i)].assign(svd.sigma.data(), svd.sigma.data() + r);
    }

    DenseTensor core = u;
    for (index_t i = 0; i < d; ++i)
        core = mode_product(core, factors[static_cast<size_t>(i)].transpose(), i);
    return {shape, std::move(core), std::move(factors), std::move(sigma)};
}

TuckerTensor truncate_hosvd(const DenseTensor& u, const RankTuple& r) {
    if (r.format != Format::tucker)
        throw std::invalid_argument("truncate_hosvd: rank tuple must be tucker");
    const Shape& shape = u.shape();
    r.validate(shape);
    const index_t d = shape.order();

    std::vector<Matrix> factors;
    for (index_t i = 0; i < d; ++i) {
        ThinSvd svd = thin_svd(unfold(u, {i}));
        const index_t keep = std::min(r.values[static_cast<size_t>(i)], svd.sigma.size());
        factors.push_back(svd.u.leftCols(keep));
    }

    DenseTensor core = u;
    for (index_t i = 0; i < d; ++i)
        core = mode_product(core, factors[static_cast<size_t>(i)].transpose(), i);

    // Renormalize: an exact HOSVD of the (small) core restores the normal
    // form without changing the represented tensor.
    TuckerTensor normal = hosvd(core);
    std::vector<Matrix> composed;
    for (index_t i = 0; i < d; ++i)
        composed.push_back(factors[static_cast<size_t>(i)] * normal.factor(i));
    return {shape, normal.core(), std::move(composed), normal.sigma()};
}

namespace {

TTTensor tt_svd_impl(const DenseTensor& u, const std::vector<index_t>* target) {
    const Shape& shape = u.shape();
    const index_t d = shape.order();

    std::vector<DenseTensor> cores;
    std::vector<std::vector<double>> sigma(static_cast<size_t>(d > 1 ? d - 1 : 0));
    std::vector<double> eps(static_cast<size_t>(d > 1 ? d - 1 : 0), 0.0);

    std::vector<double> buffer = u.values();
    index_t r_prev = 1;
    index_t rest = shape.size();

    for (index_t i = 0; i + 1 < d; ++i) {
        const index_t n_i = shape.dim(i);
        const index_t rows = r_prev * n_i;
        const index_t cols = rest / n_i;
        Eigen::Map<const Matrix> v(buffer.data(), rows, cols);
        ThinSvd svd = thin_svd(v);

        index_t keep;
        if (target == nullptr)
            keep = std::max<index_t>(1, numerical_rank(svd.sigma, rows, cols));
        else
            keep = std::min((*target)[static_cast<size_t>(i)], svd.sigma.size());

        double discarded = 0.0;
        for (index_t k = keep; k < svd.sigma.size(); ++k)
            discarded += svd.sigma(k) * svd.sigma(k);
        eps[static_cast<size_t>(i)] = std::sqrt(discarded);
        sigma[static_cast<size_t>(i)].assign(svd.sigma.data(), svd.sigma.data() + keep);

        Matrix b = svd.u.leftCols(keep); // (r_prev * n_i) x keep, column-major
        cores.emplace_back(Shape({r_prev, n_i, keep}),
                           std::vector<double>(b.data(), b.data() + b.size()));

        Matrix next = svd.sigma.head(keep).asDiagonal() * svd.v.leftCols(keep).transpose();
        buffer.assign(next.data(), next.data() + next.size());
        r_prev = keep;
        rest = cols;
    }

    cores.emplace_back(Shape({r_prev, shape.dim(d - 1), 1}), std::move(buffer));

    TTTensor t(shape, std::move(cores));
    t.set_ortho(TTTensor::Ortho::left);
    t.set_sigma(std::move(sigma));
    t.set_truncation_eps(std::move(eps));
    return t;
}

} // namespace

TTTensor tt_svd(const DenseTensor& u) { return tt_svd_impl(u, nullptr); }

TTTensor tt_svd(const DenseTensor& u, const RankTuple& r) {
    if (r.format != Format::tt)
        throw std::invalid_argument("tt_svd: rank tuple must be tt");
    r.validate(u.shape());
    return tt_svd_impl(u, &r.values);
}

TTTensor tt_left_orthogonalize(const TTTensor& t) {
    const index_t d = t.order();
    std::vector<DenseTensor> cores = t.cores();
    TTTensor work(t.shape(), std::move(cores));
    for (index_t i = 0; i + 1 < d; ++i) {
        Eigen::HouseholderQR<Matrix> qr(Matrix(work.left_unfold(i)));
        const index_t k = std::min(work.left_unfold(i).rows(), work.left_unfold(i).cols());
        Matrix q = qr.householderQ() * Matrix::Identity(work.left_unfold(i).rows(), k);
        Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

        const Shape& cs = work.core(i).shape();
        work.core(i) = DenseTensor(Shape({cs.dim(0), cs.dim(1), k}),
                                   std::vector<double>(q.data(), q.data() + q.size()));

        Matrix next = r_fac * work.right_unfold(i + 1);
        const Shape& ns = work.core(i + 1).shape();
        work.core(i + 1) = DenseTensor(Shape({k, ns.dim(1), ns.dim(2)}),
                                       std::vector<double>(next.data(), next.data() + next.size()));
    }
    work.set_ortho(TTTensor::Ortho::left);
    return work;
}

TTTensor tt_right_orthogonalize(const TTTensor& t) {
    const index_t d = t.order();
    std::vector<DenseTensor> cores = t.cores();
    TTTensor work(t.shape(), std::move(cores));
    for (index_t i = d - 1; i > 0; --i) {
        Matrix m = work.right_unfold(i).transpose(); // (n_i r_i) x r_{i-1}
        Eigen::HouseholderQR<Matrix> qr(m);
        const index_t k = std::min(m.rows(), m.cols());
        Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
        Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

        Matrix core_mat = q.transpose(); // k x (n_i r_i), rows orthonormal
        const Shape& cs = work.core(i).shape();
        work.core(i) = DenseTensor(Shape({k, cs.dim(1), cs.dim(2)}),
                                   std::vector<double>(core_mat.data(), core_mat.data() + core_mat.size()));

        Matrix prev = work.left_unfold(i - 1) * r_fac.transpose();
        const Shape& ps = work.core(i - 1).shape();
        work.core(i - 1) = DenseTensor(Shape({ps.dim(0), ps.dim(1), k}),
                                       std::vector<double>(prev.data(), prev.data() + prev.size()));
    }
    work.set_ortho(TTTensor::Ortho::right);
    return work;
}

TTTensor tt_truncate(const TTTensor& t, const RankTuple& r) {
    if (r.format != Format::tt)
        throw std::invalid_argument("tt_truncate: rank tuple must be tt");
    r.validate(t.shape());
    const std::vector<index_t> current = t.ranks();
    for (size_t i = 0; i < current.size(); ++i)
        if (r.values[i] > current[i])
            throw std::invalid_argument("tt_truncate: target rank exceeds current rank");

    const index_t d = t.order();
    TTTensor work = tt_right_orthogonalize(t);

    std::vector<std::vector<double>> sigma(static_cast<size_t>(d > 1 ? d - 1 : 0));
    std::vector<double> eps(static_cast<size_t>(d > 1 ? d - 1 : 0), 0.0);

    for (index_t i = 0; i + 1 < d; ++i) {
        ThinSvd svd = thin_svd(Matrix(work.left_unfold(i)));
        const index_t keep =
            std::max<index_t>(1, std::min(r.values[static_cast<size_t>(i)], svd.sigma.size()));

        double discarded = 0.0;
        for (index_t k = keep; k < svd.sigma.size(); ++k)
            discarded += svd.sigma(k) * svd.sigma(k);
        eps[static_cast<size_t>(i)] = std::sqrt(discarded);
        sigma[static_cast<size_t>(i)].assign(svd.sigma.data(), svd.sigma.data() + keep);

        Matrix b = svd.u.leftCols(keep);
        const Shape& cs = work.core(i).shape();
        work.core(i) = DenseTensor(Shape({cs.dim(0), cs.dim(1), keep}),
                                   std::vector<double>(b.data(), b.data() + b.size()));

        Matrix carry = svd.sigma.head(keep).asDiagonal() * svd.v.leftCols(keep).transpose();
        Matrix next = carry * work.right_unfold(i + 1);
        const Shape& ns = work.core(i + 1).shape();
        work.core(i + 1) = DenseTensor(Shape({keep, ns.dim(1), ns.dim(2)}),
                                       std::vector<double>(next.data(), next.data() + next.size()));
    }

    work.set_ortho(TTTensor::Ortho::left);
    work.set_sigma(std::move(sigma));
    work.set_truncation_eps(std::move(eps));
    return work;
}

TTTensor tt_add(const TTTensor& a, const TTTensor& b) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument("tt_add: shape mismatch");
    const index_t d = a.order();
    if (d == 1) {
        DenseTensor c = a.core(0);
        c.vec() += b.core(0).vec();
        return TTTensor(a.shape(), {c});
    }
    std::vector<DenseTensor> cores;
    for (index_t i = 0; i < d; ++i) {
        const Shape& as = a.core(i).shape();
        const Shape& bs = b.core(i).shape();
        const index_t ra0 = as.dim(0), ra1 = as.dim(2);
        const index_t rb0 = bs.dim(0), rb1 = bs.dim(2);
        const index_t n = as.dim(1);
        const index_t c0 = (i == 0) ? 1 : ra0 + rb0;
        const index_t c1 = (i == d - 1) ? 1 : ra1 + rb1;
        DenseTensor c(Shape({c0, n, c1}));
        for (index_t mu = 0; mu < n; ++mu) {
            for (index_t k0 = 0; k0 < ra0; ++k0)
                for (index_t k1 = 0; k1 < ra1; ++k1)
                    c({k0, mu, k1}) = a.core(i)({k0, mu, k1});
            const index_t o0 = (i == 0) ? 0 : ra0;
            const index_t o1 = (i == d - 1) ? 0 : ra1;
            for (index_t k0 = 0; k0 < rb0; ++k0)
                for (index_t k1 = 0; k1 < rb1; ++k1)
                    c({o0 + k0, mu, o1 + k1}) += b.core(i)({k0, mu, k1});
        }
        cores.push_back(std::move(c));
    }
    return TTTensor(a.shape(), std::move(cores));
}

double tt_norm(const TTTensor& t) {
    TTTensor lo = tt_left_orthogonalize(t);
    return lo.left_unfold(lo.order() - 1).norm();
}

TTTensor canonical_to_tt(const CanonicalTensor& c) {
    const Shape& shape = c.shape;
    const index_t d = shape.order();
    const index_t rr = c.num_terms();
    if (rr == 0)
        throw std::invalid_argument("canonical_to_tt: need at least one term");

    if (d == 1) {
        DenseTensor core(Shape({1, shape.dim(0), 1}));
        for (index_t k = 0; k < rr; ++k)
            for (index_t mu = 0; mu < shape.dim(0); ++mu)
                core({0, mu, 0}) += c.terms[static_cast<size_t>(k)][0](mu);
        return TTTensor(shape, {core});
    }

    std::vector<DenseTensor> cores;
    for (index_t i = 0; i < d; ++i) {
        const index_t r0 = (i == 0) ? 1 : rr;
        const index_t r1 = (i == d - 1) ? 1 : rr;
        DenseTensor core(Shape({r0, shape.dim(i), r1}));
        for (index_t k = 0; k < rr; ++k) {
            const Vector& vec = c.terms[static_cast<size_t>(k)][static_cast<size_t>(i)];
            for (index_t mu = 0; mu < shape.dim(i); ++mu) {
                if (i == 0)
                    core({0, mu, k}) = vec(mu);
                else if (i == d - 1)
                    core({k, mu, 0}) = vec(mu);
                else
                    core({k, mu, k}) = vec(mu);
            }
        }
        cores.push_back(std::move(core));
    }
    return TTTensor(shape, std::move(cores));
}

DenseTensor tucker_to_dense(const TuckerTensor& t) {
    DenseTensor out = t.core();
    for (index_t i = 0; i < t.shape().order(); ++i)
        out = mode_product(out, t.factor(i), i);
    return out;
}

DenseTensor tt_to_dense(const TTTensor& t) {
    const index_t d = t.order();
    Matrix cur = t.left_unfold(0); // n_1 x r_1
    for (index_t i = 1; i < d; ++i) {
        Matrix prod = cur * t.right_unfold(i); // (n_1..n_{i-1} x r) * (r x n_i r')
        cur = Eigen::Map<const Matrix>(prod.data(), prod.rows() * t.shape().dim(i),
                                       prod.cols() / t.shape().dim(i));
    }
    return DenseTensor(t.shape(), std::vector<double>(cur.data(), cur.data() + cur.size()));
}

DenseTensor canonical_to_dense(const CanonicalTensor& c) {
    DenseTensor out(c.shape);
    for (const auto& term : c.terms) {
        Vector acc = term[0];
        for (size_t i = 1; i < term.size(); ++i) {
            Vector next(acc.size() * term[i].size());
            for (index_t b = 0; b < term[i].size(); ++b)
                next.segment(b * acc.size(), acc.size()) = term[i](b) * acc;
            acc = std::move(next);
        }
        out.vec() += acc;
    }
    return out;
}

double tt_entry(const TTTensor& t, const MultiIndex& idx) {
    const index_t d = t.order();
    if (static_cast<index_t>(idx.size()) != d)
        throw std::out_of_range("tt_entry: index order mismatch");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Ones(1);
    for (index_t i = 0; i < d; ++i) {
        const Shape& cs = t.core(i).shape();
        const index_t mu = idx[static_cast<size_t>(i)];
        if (mu < 0 || mu >= cs.dim(1))
            throw std::out_of_range("tt_entry: coordinate out of range");
        Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> slice(
            t.core(i).data() + mu * cs.dim(0), cs.dim(0), cs.dim(2),
            Eigen::OuterStride<>(cs.dim(0) * cs.dim(1)));
        row = row * slice;
    }
    return row(0);
}

RankTuple multilinear_rank(const DenseTensor& u, Format format) {
    const Shape& shape = u.shape();
    const index_t d = shape.order();
    std::vector<index_t> ranks;
    if (format == Format::tucker) {
        for (index_t i = 0; i < d; ++i) {
            Matrix m = unfold(u, {i});
            Eigen::BDCSVD<Matrix> svd(m);
            ranks.push_back(std::max<index_t>(1, numerical_rank(svd.singularValues(), m.rows(), m.cols())));
        }
    } else {
        for (index_t i = 0; i + 1 < d; ++i) {
            const index_t rows = shape.prefix_size(i + 1);
            Eigen::Map<const Matrix> m(u.data(), rows, shape.size() / rows);
            Eigen::BDCSVD<Matrix> svd(m);
            ranks.push_back(std::max<index_t>(1, numerical_rank(svd.singularValues(), m.rows(), m.cols())));
        }
    }
    return {format, std::move(ranks)};
}

} // namespace treco
