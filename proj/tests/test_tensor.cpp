#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "treco/random_tensors.hpp"
#include "treco/tensor.hpp"

#include <sstream>

using namespace treco;

namespace {

DenseTensor offset_plus_one_tensor(const Shape& shape) {
    DenseTensor u(shape);
    for (index_t k = 0; k < u.size(); ++k)
        u[k] = static_cast<double>(k + 1);
    return u;
}

DenseTensor rank_one(const Vector& a, const Vector& b, const Vector& c) {
    CanonicalTensor can(Shape({a.size(), b.size(), c.size()}), {{a, b, c}});
    return canonical_to_dense(can);
}

} // namespace

TEST_CASE("linearize follows the co-lexicographic convention") {
    Shape s222({2, 2, 2});
    CHECK(linearize({0, 0, 0}, s222) == 0); // (1,1,1) in one-based notation
    CHECK(linearize({1, 1, 1}, s222) == 7); // (2,2,2)

    Shape s234({2, 3, 4});
    CHECK(linearize({1, 0, 0}, s234) == 1); // (2,1,1): frozen from the enumeration oracle

    // full bijection against the enumeration oracle
    for (const MultiIndex& idx : oracles::all_indices(s234)) {
        const index_t off = linearize(idx, s234);
        CHECK(off == oracles::linearize_by_enumeration(idx, s234));
        CHECK(delinearize(off, s234) == idx);
    }
}

TEST_CASE("linearize rejects out-of-range coordinates") {
    Shape s({2, 3});
    CHECK_THROWS_AS(linearize({2, 0}, s), std::out_of_range);
    CHECK_THROWS_AS(linearize({0, -1}, s), std::out_of_range);
    CHECK_THROWS_AS(linearize({0}, s), std::out_of_range);
}

TEST_CASE("unfold matches the enumeration oracle") {
    DenseTensor u = offset_plus_one_tensor(Shape({2, 2, 2}));

    Matrix m = unfold(u, {0});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 4);
    // first row is the mu_1 = 1 slice in column order
    Matrix expect = oracles::unfold_by_enumeration(u, {0});
    CHECK((m - expect).norm() == 0.0);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(0, 1) == 3.0);

    DenseTensor w = gen_random_dense(Shape({3, 4, 2, 2}), 5);
    for (const std::vector<index_t>& modes :
         {std::vector<index_t>{0}, {1}, {2}, {3}, {0, 1}, {0, 1, 2}, {2, 1}}) {
        Matrix got = unfold(w, std::span<const index_t>(modes));
        Matrix exp = oracles::unfold_by_enumeration(w, modes);
        CHECK((got - exp).norm() == 0.0);
    }
}

TEST_CASE("unfold dimension bookkeeping and errors") {
    DenseTensor u(Shape({2, 3, 4}));
    Matrix m = unfold(u, {0, 1});
    CHECK(m.rows() == 6);
    CHECK(m.cols() == 4);
    std::vector<index_t> empty;
    CHECK_THROWS_AS(unfold(u, std::span<const index_t>(empty)), std::invalid_argument);
    CHECK_THROWS_AS(unfold(u, {5}), std::invalid_argument);
    CHECK_THROWS_AS(unfold(u, {0, 0}), std::invalid_argument);
}

TEST_CASE("rank-1 tensors unfold to rank-1 matrices") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Vector a(3), b(4), c(5);
    for (index_t i = 0; i < 3; ++i) a(i) = normal(rng);
    for (index_t i = 0; i < 4; ++i) b(i) = normal(rng);
    for (index_t i = 0; i < 5; ++i) c(i) = normal(rng);
    DenseTensor u = rank_one(a, b, c);
    for (index_t mode = 0; mode < 3; ++mode) {
        Eigen::BDCSVD<Matrix> svd(unfold(u, {mode}));
        CHECK(numerical_rank(svd.singularValues(), svd.rows(), svd.cols()) == 1);
    }
}

TEST_CASE("fold inverts unfold bit-exactly") {
    DenseTensor u = gen_random_dense(Shape({3, 2, 4}), 11);
    for (const std::vector<index_t>& modes :
         {std::vector<index_t>{0}, {1}, {2}, {0, 1}, {0, 1, 2}}) {
        std::span<const index_t> sp(modes);
        DenseTensor back = fold(unfold(u, sp), sp, u.shape());
        CHECK(back.values() == u.values());
    }

    // zero matrix folds to the zero tensor; ones fold to ones
    Shape s({2, 3, 4});
    DenseTensor z = fold(Matrix::Zero(6, 4), {0, 1}, s);
    CHECK(norm(z) == 0.0);
    DenseTensor ones = fold(Matrix::Ones(6, 4), {0, 1}, s);
    for (index_t k = 0; k < ones.size(); ++k)
        CHECK(ones[k] == 1.0);

    CHECK_THROWS_AS(fold(Matrix::Zero(5, 4), {0, 1}, s), std::invalid_argument);
}

TEST_CASE("inner and norm") {
    Vector e1 = Vector::Unit(3, 0);
    DenseTensor unit = rank_one(e1, e1, e1);
    CHECK(inner(unit, unit) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(norm(DenseTensor(Shape({4, 5}))) == 0.0);

    DenseTensor u = gen_random_dense(Shape({2, 2, 2}), 21);
    DenseTensor v = gen_random_dense(Shape({2, 2, 2}), 22);
    CHECK(inner(u, v) == doctest::Approx(oracles::inner_by_enumeration(u, v)).epsilon(1e-13));

    CHECK_THROWS_AS(inner(u, DenseTensor(Shape({2, 2}))), std::invalid_argument);
}

TEST_CASE("inner is symmetric and bilinear") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        DenseTensor u = gen_random_dense(Shape({3, 4, 2}), 100 + rep);
        DenseTensor v = gen_random_dense(Shape({3, 4, 2}), 200 + rep);
        DenseTensor w = gen_random_dense(Shape({3, 4, 2}), 300 + rep);
        const double s = coef(rng), t = coef(rng);
        CHECK(inner(u, v) == doctest::Approx(inner(v, u)).epsilon(1e-12));
        const double lhs = inner(s * u + t * v, w);
        const double rhs = s * inner(u, w) + t * inner(v, w);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("mode_product basics") {
    DenseTensor u = gen_random_dense(Shape({3, 4, 5}), 41);

    SUBCASE("identity leaves the tensor unchanged") {
        DenseTensor same = mode_product(u, Matrix::Identity(4, 4), 1);
        CHECK(norm(same - u) == 0.0);
    }

    SUBCASE("row of ones sums along the mode") {
        DenseTensor sums = mode_product(u, Matrix::Ones(1, 3), 0);
        CHECK(sums.shape().dims() == std::vector<index_t>{1, 4, 5});
        for (index_t j = 0; j < 4; ++j)
            for (index_t k = 0; k < 5; ++k) {
                double direct = 0.0;
                for (index_t i = 0; i < 3; ++i)
                    direct += u({i, j, k});
                CHECK(sums({0, j, k}) == doctest::Approx(direct).epsilon(1e-14));
            }
    }

    SUBCASE("agrees with fold(M * unfold(u))") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> normal;
        Matrix m(2, 4);
        for (index_t j = 0; j < 4; ++j)
            for (index_t i = 0; i < 2; ++i)
                m(i, j) = normal(rng);
        DenseTensor got = mode_product(u, m, 1);
        DenseTensor expect = fold(m * unfold(u, {1}), {1}, Shape({3, 2, 5}));
        CHECK(norm(got - expect) <= 1e-13 * norm(expect));
    }

    SUBCASE("orthonormal mode products preserve norm") {
        Eigen::HouseholderQR<Matrix> qr(Matrix::Random(4, 4));
        Matrix q = qr.householderQ();
        DenseTensor rotated = mode_product(u, q, 1);
        CHECK(norm(rotated) == doctest::Approx(norm(u)).epsilon(1e-12));
        // contraction with a column subset cannot increase the norm
        DenseTensor projected = mode_product(u, Matrix(q.leftCols(2).transpose()), 1);
        CHECK(norm(projected) <= norm(u) * (1 + 1e-12));
    }

    CHECK_THROWS_AS(mode_product(u, Matrix::Identity(3, 3), 1), std::invalid_argument);
}

TEST_CASE("csv debug dump is one-based") {
    DenseTensor u(Shape({2, 2}));
    u({0, 0}) = 1.5;
    u({1, 1}) = -2.0;
    std::ostringstream os;
    write_csv(u, os);
    CHECK(os.str() == "1,1,1.5\n2,1,0\n1,2,0\n2,2,-2\n");
}

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(Shape({}), std::invalid_argument);
    CHECK_THROWS_AS(Shape({2, 0}), std::invalid_argument);
    CHECK(Shape({6, 10, 15}).size() == 900);
    CHECK(Shape({6, 10, 15}).prefix_size(2) == 60);
    CHECK_THROWS_AS(DenseTensor(Shape({2, 2}), {1.0}), std::invalid_argument);
}
