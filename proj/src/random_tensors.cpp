#include "treco/random_tensors.hpp"

#include <Eigen/SVD>

namespace treco {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finalizer over the combined word
    std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::pair<DenseTensor, TuckerTensor> gen_random_tucker(const Shape& shape,
                                                       const std::vector<index_t>& rank,
                                                       std::uint64_t seed) {
    const index_t d = shape.order();
    RankTuple r(Format::tucker, rank);
    r.validate(shape);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    DenseTensor core{Shape(rank)};
    for (index_t k = 0; k < core.size(); ++k)
        core[k] = normal(rng);

    std::vector<Matrix> factors;
    for (index_t j = 0; j < d; ++j) {
        const index_t n = shape.dim(j);
        Matrix m(n, n);
        for (index_t c = 0; c < n; ++c)
            for (index_t row = 0; row < n; ++row)
                m(row, c) = normal(rng);
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
        factors.push_back(svd.matrixU().leftCols(rank[static_cast<size_t>(j)]));
    }

    TuckerTensor t(shape, std::move(core), std::move(factors), {});
    DenseTensor dense = tucker_to_dense(t);
    return {std::move(dense), std::move(t)};
}

TTTensor gen_random_tt(const Shape& shape, const std::vector<index_t>& rank, std::uint64_t seed) {
    const index_t d = shape.order();
    RankTuple r(Format::tt, rank);
    r.validate(shape);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<DenseTensor> cores;
    index_t r_prev = 1;
    for (index_t i = 0; i < d; ++i) {
        const index_t r_next = (i == d - 1) ? 1 : rank[static_cast<size_t>(i)];
        DenseTensor core{Shape({r_prev, shape.dim(i), r_next})};
        for (index_t k = 0; k < core.size(); ++k)
            core[k] = normal(rng);
        cores.push_back(std::move(core));
        r_prev = r_next;
    }
    return TTTensor(shape, std::move(cores));
}

DenseTensor gen_random_unit(const Shape& shape, const RankTuple& rank, std::uint64_t seed) {
    DenseTensor u = (rank.format == Format::tucker)
                        ? gen_random_tucker(shape, rank.values, seed).first
                        : tt_to_dense(gen_random_tt(shape, rank.values, seed));
    const double nrm = norm(u);
    if (nrm > 0.0)
        u.vec() /= nrm;
    return u;
}

DenseTensor gen_random_dense(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseTensor u(shape);
    for (index_t k = 0; k < u.size(); ++k)
        u[k] = normal(rng);
    return u;
}

} // namespace treco
