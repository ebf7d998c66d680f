#include "treco/manifold.hpp"

#include <cmath>
#include <utility>

#include "treco/random_tensors.hpp"

namespace treco {

TTTangent::TTTangent(TTTensor base_left, TTTensor base_right, std::vector<DenseTensor> deltas)
        : left_(std::move(base_left)), right_(std::move(base_right)), deltas_(std::move(deltas)) {
    if (static_cast<index_t>(deltas_.size()) != left_.order())
        throw std::invalid_argument("TTTangent: need one core variation per mode");
    for (index_t i = 0; i < left_.order(); ++i)
        if (!(deltas_[static_cast<size_t>(i)].shape() == left_.core(i).shape()))
            throw std::invalid_argument("TTTangent: core variation shape mismatch");
}

double TTTangent::norm() const {
    double s = 0.0;
    for (const DenseTensor& db : deltas_)
        s += db.vec().squaredNorm();
    return std::sqrt(s);
}

TTTangent TTTangent::scaled(double s) const {
    std::vector<DenseTensor> d = deltas_;
    for (DenseTensor& db : d)
        db.vec() *= s;
    return {left_, right_, std::move(d)};
}

std::vector<index_t> tt_numerical_ranks(const TTTensor& t) {
    TTTensor canon = tt_truncate(t, RankTuple(Format::tt, t.ranks()));
    std::vector<index_t> out;
    for (index_t i = 0; i + 1 < t.order(); ++i) {
        const auto& sv = canon.sigma()[static_cast<size_t>(i)];
        Vector s = Eigen::Map<const Vector>(sv.data(), static_cast<index_t>(sv.size()));
        const index_t rows = canon.core(i).shape().dim(0) * canon.core(i).shape().dim(1);
        out.push_back(numerical_rank(s, rows, canon.core(i).shape().dim(2)));
    }
    return out;
}

namespace {

// Right interface matrices of a right-orthogonal family:
// rights[i] in R^{r_i x (n_{i+1} ... n_d)}, rights[d-1+1] scalar one.
std::vector<Matrix> right_interfaces(const TTTensor& right) {
    const index_t d = right.order();
    std::vector<Matrix> rights(static_cast<size_t>(d) + 1);
    rights[static_cast<size_t>(d)] = Matrix::Ones(1, 1);
    for (index_t i = d - 1; i >= 0; --i) {
        Matrix prod = right.left_unfold(i) * rights[static_cast<size_t>(i + 1)];
        // (r_{i-1} n_i x r_i)(r_i x q) viewed as r_{i-1} x (n_i q)
        rights[static_cast<size_t>(i)] = Eigen::Map<const Matrix>(
            prod.data(), right.core(i).shape().dim(0), prod.size() / right.core(i).shape().dim(0));
    }
    return rights;
}

} // namespace

TTTangent project_tangent(const TTTensor& base, const DenseTensor& g) {
    if (!(base.shape() == g.shape()))
        throw std::invalid_argument("project_tangent: shape mismatch");
    const index_t d = base.order();
    const std::vector<index_t> nominal = base.ranks();

    // Canonicalize; the sweep exposes per-bond singular values for the
    // rank-deficiency check.
    TTTensor left = tt_truncate(base, RankTuple(Format::tt, nominal));
    if (left.ranks() != nominal)
        throw singular_point_error("project_tangent: base has deficient bond rank");
    for (index_t i = 0; i + 1 < d; ++i) {
        const auto& sv = left.sigma()[static_cast<size_t>(i)];
        Vector s = Eigen::Map<const Vector>(sv.data(), static_cast<index_t>(sv.size()));
        const index_t rows = left.core(i).shape().dim(0) * left.core(i).shape().dim(1);
        if (numerical_rank(s, rows, left.core(i).shape().dim(2)) < nominal[static_cast<size_t>(i)])
            throw singular_point_error("project_tangent: base is numerically rank-deficient");
    }

    TTTensor right = tt_right_orthogonalize(left);
    const std::vector<Matrix> rights = right_interfaces(right);

    std::vector<DenseTensor> deltas;
    Matrix a_prev = Eigen::Map<const Matrix>(g.data(), 1, g.size()); // contraction with L_{i-1}
    for (index_t i = 0; i < d; ++i) {
        const index_t r0 = left.core(i).shape().dim(0);
        const index_t n = left.core(i).shape().dim(1);
        const index_t r1 = left.core(i).shape().dim(2);
        Eigen::Map<const Matrix> a_resh(a_prev.data(), r0 * n, a_prev.size() / (r0 * n));

        Matrix w = a_resh * rights[static_cast<size_t>(i + 1)].transpose(); // (r0 n) x r1
        if (i + 1 < d) {
            auto q = std::as_const(left).left_unfold(i);
            w -= q * (q.transpose() * w);
            a_prev = left.left_unfold(i).transpose() * a_resh; // r1 x rest
        }
        deltas.emplace_back(Shape({r0, n, r1}), std::vector<double>(w.data(), w.data() + w.size()));
    }

    return {std::move(left), std::move(right), std::move(deltas)};
}

TTTensor tangent_to_tt(const TTTangent& xi, bool add_base) {
    const index_t d = xi.order();
    const TTTensor& u = xi.base_left();
    const TTTensor& v = xi.base_right();

    if (d == 1) {
        DenseTensor core = xi.delta(0);
        if (add_base)
            core.vec() += u.core(0).vec();
        return TTTensor(u.shape(), {core});
    }

    std::vector<DenseTensor> cores;
    for (index_t i = 0; i < d; ++i) {
        const Shape& cs = u.core(i).shape();
        const index_t r0 = cs.dim(0), n = cs.dim(1), r1 = cs.dim(2);
        if (i == 0) {
            // [ dB_1 | U_1 ]
            DenseTensor c(Shape({1, n, 2 * r1}));
            for (index_t mu = 0; mu < n; ++mu)
                for (index_t k = 0; k < r1; ++k) {
                    c({0, mu, k}) = xi.delta(0)({0, mu, k});
                    c({0, mu, r1 + k}) = u.core(0)({0, mu, k});
                }
            cores.push_back(std::move(c));
        } else if (i + 1 < d) {
            // [ V_i 0 ; dB_i U_i ]
            DenseTensor c(Shape({2 * r0, n, 2 * r1}));
            for (index_t mu = 0; mu < n; ++mu)
                for (index_t k0 = 0; k0 < r0; ++k0)
                    for (index_t k1 = 0; k1 < r1; ++k1) {
                        c({k0, mu, k1}) = v.core(i)({k0, mu, k1});
                        c({r0 + k0, mu, k1}) = xi.delta(i)({k0, mu, k1});
                        c({r0 + k0, mu, r1 + k1}) = u.core(i)({k0, mu, k1});
                    }
            cores.push_back(std::move(c));
        } else {
            // [ V_d ; dB_d (+ G_d) ]
            DenseTensor c(Shape({2 * r0, n, 1}));
            for (index_t mu = 0; mu < n; ++mu)
                for (index_t k0 = 0; k0 < r0; ++k0) {
                    c({k0, mu, 0}) = v.core(i)({k0, mu, 0});
                    double bottom = xi.delta(i)({k0, mu, 0});
                    if (add_base)
                        bottom += u.core(i)({k0, mu, 0});
                    c({r0 + k0, mu, 0}) = bottom;
                }
            cores.push_back(std::move(c));
        }
    }
    return TTTensor(u.shape(), std::move(cores));
}

DenseTensor tangent_to_dense(const TTTangent& xi) { return tt_to_dense(tangent_to_tt(xi, false)); }

TTTensor retract(const TTTensor& base, const TTTangent& xi) {
    if (!(base.shape() == xi.base_left().shape()))
        throw std::invalid_argument("retract: shape mismatch");
    TTTensor sum = tangent_to_tt(xi, true);
    return tt_truncate(sum, RankTuple(Format::tt, base.ranks()));
}

TTTensor tt_pad_ranks(const TTTensor& t, const std::vector<index_t>& target, std::uint64_t seed,
                      double rel_magnitude) {
    RankTuple tgt(Format::tt, target);
    tgt.validate(t.shape());
    const std::vector<index_t> current = t.ranks();
    const double base_norm = tt_norm(t);

    double magnitude = rel_magnitude * (base_norm > 0.0 ? base_norm : 1.0);
    for (int attempt = 0; attempt < 4; ++attempt) {
        std::vector<index_t> extra;
        for (size_t i = 0; i < target.size(); ++i)
            extra.push_back(std::max<index_t>(1, target[i] - current[i]));
        TTTensor noise = gen_random_tt(t.shape(), extra, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        const double noise_norm = tt_norm(noise);
        if (noise_norm > 0.0)
            noise.core(0).vec() *= magnitude / noise_norm;
        TTTensor padded = tt_truncate(tt_add(t, noise), tgt);
        if (padded.ranks() == target && tt_numerical_ranks(padded) == target)
            return padded;
        magnitude *= 10.0;
    }
    throw singular_point_error("tt_pad_ranks: could not reach the requested ranks");
}

} // namespace treco
