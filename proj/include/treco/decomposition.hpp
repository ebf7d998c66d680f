#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treco/tensor.hpp"

namespace treco {

enum class Format { tucker, tt };

std::string to_string(Format f);
Format format_from_string(const std::string& s);

/// Target multilinear rank: (r_1,...,r_d) for Tucker, (r_1,...,r_{d-1})
/// for TT (boundary ranks are fixed to 1).
struct RankTuple {
    Format format = Format::tucker;
    std::vector<index_t> values;

    RankTuple() = default;
    RankTuple(Format f, std::vector<index_t> v) : format(f), values(std::move(v)) {}

    /// Throws std::invalid_argument unless every entry satisfies
    /// 1 <= r_i <= (n_i for Tucker, min(n_1..n_i, n_{i+1}..n_d) for TT).
    void validate(const Shape& shape) const;

    bool operator==(const RankTuple&) const = default;
};

/// Largest admissible rank tuple for a shape (used by the exact sweeps).
RankTuple max_rank(const Shape& shape, Format format);

/// Numerical rank rule shared by every decomposition: sigma_k counts as
/// zero when sigma_k <= max(rows, cols) * eps * sigma_1.
index_t numerical_rank(const Vector& sigma, index_t rows, index_t cols);

/// Core tensor contracted with one orthonormal factor matrix per mode.
/// Instances produced by hosvd/truncate_hosvd are in HOSVD normal form:
/// all-orthogonal core with nonincreasing subtensor norms, and
/// sigma()[i][k] equal to the norm of the k-th mode-i core subtensor.
class TuckerTensor {
public:
    TuckerTensor(Shape shape, DenseTensor core, std::vector<Matrix> factors,
                 std::vector<std::vector<double>> sigma);

    const Shape& shape() const { return shape_; }
    const DenseTensor& core() const { return core_; }
    const std::vector<Matrix>& factors() const { return factors_; }
    const Matrix& factor(index_t i) const { return factors_[static_cast<size_t>(i)]; }
    const std::vector<std::vector<double>>& sigma() const { return sigma_; }

    std::vector<index_t> ranks() const;

private:
    Shape shape_;
    DenseTensor core_;            // shape (r_1,...,r_d)
    std::vector<Matrix> factors_; // factor i is n_i x r_i, orthonormal columns
    std::vector<std::vector<double>> sigma_;
};

/// Chain of order-3 cores b^i of shape (r_{i-1}, n_i, r_i), r_0 = r_d = 1;
/// entries are the matrix products B_1(mu_1) ... B_d(mu_d).
class TTTensor {
public:
    enum class Ortho { none, left, right };

    TTTensor(Shape shape, std::vector<DenseTensor> cores);

    const Shape& shape() const { return shape_; }
    index_t order() const { return shape_.order(); }
    const std::vector<DenseTensor>& cores() const { return cores_; }
    const DenseTensor& core(index_t i) const { return cores_[static_cast<size_t>(i)]; }
    DenseTensor& core(index_t i) { return cores_[static_cast<size_t>(i)]; }

    /// Bond ranks (r_1,...,r_{d-1}) of the representation.
    std::vector<index_t> ranks() const;
    index_t rank(index_t bond) const; // bond in [0, d], with r_0 = r_d = 1

    /// Left unfolding of core i: (r_{i-1} n_i) x r_i view of its buffer.
    Eigen::Map<const Matrix> left_unfold(index_t i) const;
    Eigen::Map<Matrix> left_unfold(index_t i);
    /// Right unfolding of core i: r_{i-1} x (n_i r_i) view of its buffer.
    Eigen::Map<const Matrix> right_unfold(index_t i) const;
    Eigen::Map<Matrix> right_unfold(index_t i);

    Ortho ortho() const { return ortho_; }
    void set_ortho(Ortho o) { ortho_ = o; }

    /// Per-bond singular values kept by the producing TT-SVD sweep
    /// (empty when the tensor was not produced by a sweep).
    const std::vector<std::vector<double>>& sigma() const { return sigma_; }
    void set_sigma(std::vector<std::vector<double>> s) { sigma_ = std::move(s); }

    /// Per-bond truncation errors eps_i = sqrt(sum of discarded sigma^2)
    /// from the producing sweep; all zero for exact decompositions.
    const std::vector<double>& truncation_eps() const { return trunc_eps_; }
    void set_truncation_eps(std::vector<double> e) { trunc_eps_ = std::move(e); }

private:
    Shape shape_;
    std::vector<DenseTensor> cores_; // core i has shape (r_{i-1}, n_i, r_i)
    Ortho ortho_ = Ortho::none;
    std::vector<std::vector<double>> sigma_;
    std::vector<double> trunc_eps_;
};

/// Sum of R elementary tensor products; term k contributes
/// u^1_k (x) ... (x) u^d_k.
struct CanonicalTensor {
    Shape shape;
    std::vector<std::vector<Vector>> terms; // terms[k][i] has length n_i

    CanonicalTensor(Shape s, std::vector<std::vector<Vector>> t);
    index_t num_terms() const { return static_cast<index_t>(terms.size()); }
};

/// Exact HOSVD: per-mode SVDs detect the multilinear rank; the result
/// reconstructs u to within 1e-10 * |u| and is in HOSVD normal form.
/// The zero tensor maps to rank (1,...,1) with a zero core.
TuckerTensor hosvd(const DenseTensor& u);

/// Hard-thresholding truncation to Tucker rank <= r: per-mode SVDs of the
/// unfoldings of u, factors cut at r_i, then renormalized to HOSVD form.
/// Error is bounded by sum_i sqrt(sum_{k > r_i} sigma^{(i)}_k^2).
TuckerTensor truncate_hosvd(const DenseTensor& u, const RankTuple& r);

/// Exact TT-SVD sweep (left to right); bond ranks equal the ranks of the
/// prefix unfoldings and reconstruction is exact to 1e-10 * |u|.
TTTensor tt_svd(const DenseTensor& u);

/// Hard-thresholding TT-SVD H_r: same sweep with singular values beyond
/// r_i set to zero at each step. Cores are left-orthogonal except the
/// last; truncation_eps() carries the per-bond error terms.
TTTensor tt_svd(const DenseTensor& u, const RankTuple& r);

/// TT rounding: right-orthogonalize, then a left-to-right truncated SVD
/// sweep, never forming the dense tensor. Same error contract as tt_svd.
TTTensor tt_truncate(const TTTensor& t, const RankTuple& r);

/// Gauge sweeps. Both preserve the represented tensor exactly.
TTTensor tt_left_orthogonalize(const TTTensor& t);
TTTensor tt_right_orthogonalize(const TTTensor& t);

/// Formal sum: bond ranks add, no truncation.
TTTensor tt_add(const TTTensor& a, const TTTensor& b);

/// Norm of the represented tensor, computed in TT arithmetic.
double tt_norm(const TTTensor& t);

/// Embeds R terms as a TT of uniform bond rank R via diagonal cores.
TTTensor canonical_to_tt(const CanonicalTensor& c);

DenseTensor tucker_to_dense(const TuckerTensor& t);
DenseTensor tt_to_dense(const TTTensor& t);
DenseTensor canonical_to_dense(const CanonicalTensor& c);

/// Single entry B_1(mu_1) ... B_d(mu_d); O(d r^2) per entry.
double tt_entry(const TTTensor& t, const MultiIndex& idx);

/// Numerical ranks of the format's matricisations: single-mode unfoldings
/// for Tucker, prefix unfoldings for TT.
RankTuple multilinear_rank(const DenseTensor& u, Format format);

} // namespace treco
