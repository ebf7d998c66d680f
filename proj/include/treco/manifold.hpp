#pragma once

#include <stdexcept>

#include "treco/decomposition.hpp"

namespace treco {

/// Raised when an operation requires a TT tensor of exact (full) bond
/// ranks but the base is numerically rank-deficient.
struct singular_point_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Element of the tangent space at a fixed-rank TT tensor, in gauged
/// coordinates: summand i of the embedding is
///   U_1(mu_1) .. U_{i-1}(mu_{i-1}) dB_i(mu_i) V_{i+1}(mu_{i+1}) .. V_d(mu_d)
/// with U the left-orthogonal and V the right-orthogonal core family of
/// the base. The gauge condition (left unfoldings of U_i and dB_i have
/// orthogonal column spans, i < d) makes the summands pairwise orthogonal,
/// so the tangent norm is sqrt(sum_i |dB_i|_F^2).
class TTTangent {
public:
    TTTangent(TTTensor base_left, TTTensor base_right, std::vector<DenseTensor> deltas);

    const TTTensor& base_left() const { return left_; }
    const TTTensor& base_right() const { return right_; }
    const std::vector<DenseTensor>& deltas() const { return deltas_; }
    const DenseTensor& delta(index_t i) const { return deltas_[static_cast<size_t>(i)]; }

    index_t order() const { return left_.order(); }
    double norm() const;

    /// Tangent spaces are linear; scaling acts on the core variations.
    TTTangent scaled(double s) const;

private:
    TTTensor left_;
    TTTensor right_;
    std::vector<DenseTensor> deltas_;
};

/// Numerical bond ranks of the represented tensor (gauge sweep plus the
/// shared singular-value threshold), independent of representation ranks.
std::vector<index_t> tt_numerical_ranks(const TTTensor& t);

/// Orthogonal projection of g onto the tangent space at `base`.
/// Throws singular_point_error when any bond of `base` is numerically
/// rank-deficient relative to its representation rank.
TTTangent project_tangent(const TTTensor& base, const DenseTensor& g);

/// Embedding of a tangent element into the ambient space; the result has
/// TT rank at most 2r.
DenseTensor tangent_to_dense(const TTTangent& xi);

/// TT representation (bond ranks at most 2r) of the tangent embedding,
/// or of base + embedding when add_base is set.
TTTensor tangent_to_tt(const TTTangent& xi, bool add_base);

/// Retraction onto the rank-r manifold: hard-thresholding truncation of
/// base + xi back to the base ranks. Identity at xi = 0; the gap to
/// base + xi is O(|xi|^2).
TTTensor retract(const TTTensor& base, const TTTangent& xi);

/// Rank-deficiency repair: adds a seeded random TT perturbation of norm
/// rel_magnitude * |t| carrying the missing rank directions, then
/// truncates back to `target`. Callers log the event.
TTTensor tt_pad_ranks(const TTTensor& t, const std::vector<index_t>& target, std::uint64_t seed,
                      double rel_magnitude = 1e-8);

} // namespace treco
