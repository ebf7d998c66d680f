#include "treco/tensor.hpp"

#include <cmath>
#include <ostream>

namespace treco {

Shape::Shape(std::vector<index_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty())
        throw std::invalid_argument("Shape: order must be >= 1");
    for (index_t n : dims_)
        if (n < 1)
            throw std::invalid_argument("Shape: every dimension must be >= 1");
}

index_t Shape::size() const { return prefix_size(order()); }

index_t Shape::prefix_size(index_t i) const {
    index_t p = 1;
    for (index_t k = 0; k < i; ++k)
        p *= dims_[static_cast<size_t>(k)];
    return p;
}

index_t linearize(const MultiIndex& idx, const Shape& shape) {
    if (static_cast<index_t>(idx.size()) != shape.order())
        throw std::out_of_range("linearize: index order does not match shape");
    index_t offset = 0;
    index_t stride = 1;
    for (index_t i = 0; i < shape.order(); ++i) {
        const index_t mu = idx[static_cast<size_t>(i)];
        if (mu < 0 || mu >= shape.dim(i))
            throw std::out_of_range("linearize: coordinate out of range");
        offset += mu * stride;
        stride *= shape.dim(i);
    }
    return offset;
}

MultiIndex delinearize(index_t offset, const Shape& shape) {
    if (offset < 0 || offset >= shape.size())
        throw std::out_of_range("delinearize: offset out of range");
    MultiIndex idx(static_cast<size_t>(shape.order()));
    for (index_t i = 0; i < shape.order(); ++i) {
        idx[static_cast<size_t>(i)] = offset % shape.dim(i);
        offset /= shape.dim(i);
    }
    return idx;
}

DenseTensor::DenseTensor(Shape shape)
        : shape_(std::move(shape)), values_(static_cast<size_t>(shape_.size()), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<index_t>(values_.size()) != shape_.size())
        throw std::invalid_argument("DenseTensor: value count does not match shape");
}

namespace {

// Row/column strides of the unfolding U^alpha in the flat buffer.
struct UnfoldLayout {
    std::vector<index_t> row_modes;
    std::vector<index_t> col_modes;
    index_t rows = 1;
    index_t cols = 1;
};

UnfoldLayout unfold_layout(const Shape& shape, std::span<const index_t> row_modes) {
    if (row_modes.empty())
        throw std::invalid_argument("unfold: row mode set must be nonempty");
    const index_t d = shape.order();
    std::vector<bool> in_row(static_cast<size_t>(d), false);
    UnfoldLayout lay;
    for (index_t m : row_modes) {
        if (m < 0 || m >= d)
            throw std::invalid_argument("unfold: mode out of range");
        if (in_row[static_cast<size_t>(m)])
            throw std::invalid_argument("unfold: duplicate mode");
        in_row[static_cast<size_t>(m)] = true;
        lay.row_modes.push_back(m);
        lay.rows *= shape.dim(m);
    }
    for (index_t m = 0; m < d; ++m)
        if (!in_row[static_cast<size_t>(m)]) {
            lay.col_modes.push_back(m);
            lay.cols *= shape.dim(m);
        }
    return lay;
}

// True when alpha = {0,...,k-1} in that order: the unfolding is then a
// plain column-major view of the flat buffer.
bool is_prefix(const std::vector<index_t>& row_modes) {
    for (size_t i = 0; i < row_modes.size(); ++i)
        if (row_modes[i] != static_cast<index_t>(i))
            return false;
    return true;
}

} // namespace

Matrix unfold(const DenseTensor& u, std::span<const index_t> row_modes) {
    const Shape& shape = u.shape();
    UnfoldLayout lay = unfold_layout(shape, row_modes);

    if (is_prefix(lay.row_modes))
        return Eigen::Map<const Matrix>(u.data(), lay.rows, lay.cols);

    Matrix m(lay.rows, lay.cols);
    const index_t n_total = shape.size();
    std::vector<index_t> row_stride(lay.row_modes.size());
    {
        index_t s = 1;
        for (size_t i = 0; i < lay.row_modes.size(); ++i) {
            row_stride[i] = s;
            s *= shape.dim(lay.row_modes[i]);
        }
    }
    std::vector<index_t> col_stride(lay.col_modes.size());
    {
        index_t s = 1;
        for (size_t i = 0; i < lay.col_modes.size(); ++i) {
            col_stride[i] = s;
            s *= shape.dim(lay.col_modes[i]);
        }
    }
    for (index_t flat = 0; flat < n_total; ++flat) {
        MultiIndex idx = delinearize(flat, shape);
        index_t r = 0, c = 0;
        for (size_t i = 0; i < lay.row_modes.size(); ++i)
            r += idx[static_cast<size_t>(lay.row_modes[i])] * row_stride[i];
        for (size_t i = 0; i < lay.col_modes.size(); ++i)
            c += idx[static_cast<size_t>(lay.col_modes[i])] * col_stride[i];
        m(r, c) = u[flat];
    }
    return m;
}

Matrix unfold(const DenseTensor& u, std::initializer_list<index_t> row_modes) {
    return unfold(u, std::span<const index_t>(row_modes.begin(), row_modes.size()));
}

DenseTensor fold(const Matrix& m, std::span<const index_t> row_modes, const Shape& shape) {
    UnfoldLayout lay = unfold_layout(shape, row_modes);
    if (m.rows() != lay.rows || m.cols() != lay.cols)
        throw std::invalid_argument("fold: matrix dimensions inconsistent with modes and shape");

    if (is_prefix(lay.row_modes)) {
        std::vector<double> values(m.data(), m.data() + m.size());
        return DenseTensor(shape, std::move(values));
    }

    DenseTensor u(shape);
    std::vector<index_t> row_stride(lay.row_modes.size());
    {
        index_t s = 1;
        for (size_t i = 0; i < lay.row_modes.size(); ++i) {
            row_stride[i] = s;
            s *= shape.dim(lay.row_modes[i]);
        }
    }
    std::vector<index_t> col_stride(lay.col_modes.size());
    {
        index_t s = 1;
        for (size_t i = 0; i < lay.col_modes.size(); ++i) {
            col_stride[i] = s;
            s *= shape.dim(lay.col_modes[i]);
        }
    }
    for (index_t flat = 0; flat < shape.size(); ++flat) {
        MultiIndex idx = delinearize(flat, shape);
        index_t r = 0, c = 0;
        for (size_t i = 0; i < lay.row_modes.size(); ++i)
            r += idx[static_cast<size_t>(lay.row_modes[i])] * row_stride[i];
        for (size_t i = 0; i < lay.col_modes.size(); ++i)
            c += idx[static_cast<size_t>(lay.col_modes[i])] * col_stride[i];
        u[flat] = m(r, c);
    }
    return u;
}

DenseTensor fold(const Matrix& m, std::initializer_list<index_t> row_modes, const Shape& shape) {
    return fold(m, std::span<const index_t>(row_modes.begin(), row_modes.size()), shape);
}

double inner(const DenseTensor& u, const DenseTensor& v) {
    if (!(u.shape() == v.shape()))
        throw std::invalid_argument("inner: shape mismatch");
    return u.vec().dot(v.vec());
}

double norm(const DenseTensor& u) { return u.vec().norm(); }

DenseTensor mode_product(const DenseTensor& u, const Matrix& m, index_t mode) {
    const Shape& shape = u.shape();
    if (mode < 0 || mode >= shape.order())
        throw std::invalid_argument("mode_product: mode out of range");
    if (m.cols() != shape.dim(mode))
        throw std::invalid_argument("mode_product: matrix columns do not match mode dimension");

    const index_t p = shape.prefix_size(mode);            // modes before
    const index_t n = shape.dim(mode);
    const index_t q = shape.size() / (p * n);             // modes after
    const index_t k = m.rows();

    std::vector<index_t> out_dims = shape.dims();
    out_dims[static_cast<size_t>(mode)] = k;
    DenseTensor out{Shape(out_dims)};

    // Flat layout is (p, n, q) co-lexicographic: each q-slab is a
    // contiguous p-by-n column-major block.
    for (index_t s = 0; s < q; ++s) {
        Eigen::Map<const Matrix> in_slab(u.data() + s * p * n, p, n);
        Eigen::Map<Matrix> out_slab(out.data() + s * p * k, p, k);
        out_slab.noalias() = in_slab * m.transpose();
    }
    return out;
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument("tensor sum: shape mismatch");
    DenseTensor out = a;
    out.vec() += b.vec();
    return out;
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument("tensor difference: shape mismatch");
    DenseTensor out = a;
    out.vec() -= b.vec();
    return out;
}

DenseTensor operator*(double s, const DenseTensor& a) {
    DenseTensor out = a;
    out.vec() *= s;
    return out;
}

void write_csv(const DenseTensor& u, std::ostream& os) {
    for (index_t flat = 0; flat < u.size(); ++flat) {
        MultiIndex idx = delinearize(flat, u.shape());
        for (index_t mu : idx)
            os << (mu + 1) << ',';
        os << u[flat] << '\n';
    }
}

} // namespace treco
