#pragma once

#include <cmath>
#include <span>
#include <variant>

#include "treco/manifold.hpp"
#include "treco/measurement.hpp"

namespace treco {

enum class StepRule { fixed, steepest };
enum class InitRule { adjoint, given };

/// Rank-reduction operator used inside TIHT: hard-thresholding HSVD
/// (the default) or one ALS half-sweep on the projection problem,
/// warm-started at the previous iterate.
enum class RefineRule { hsvd, als_half_sweep };

struct RecoveryConfig {
    Format format = Format::tucker;
    RankTuple rank;
    int max_iter = 5000;
    double residual_tol = 1e-6;      // declare convergence at |Av - b| <= tol * |b|
    double divergence_factor = 1e3;  // abort once |Av - b| > factor * |b|
    StepRule step_rule = StepRule::fixed;
    double alpha = 1.0;
    InitRule init_rule = InitRule::adjoint;
    RefineRule refine = RefineRule::hsvd;
    std::uint64_t seed = 0;

    void validate(const Shape& shape) const;
};

/// Optional ground truth, enabling per-iteration error telemetry.
struct RecoveryDiagnostics {
    const DenseTensor* truth = nullptr;
    double success_tol = 1e-4; // absolute threshold for true_success_iter
};

struct RecoveryReport {
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
    std::vector<double> residual_history; // |A u^n - b|, length iterations + 1

    // Populated only when diagnostics carry the true tensor.
    std::vector<double> error_history; // |u^n - u|
    int true_success_iter = -1;        // first n with |u^n - u| < success_tol
    int condA_violations = 0;          // TIHT: |u^{n+1}-y^{n+1}| > |u-y^{n+1}|
    int condA_first = -1;

    double rate_estimate = std::numeric_limits<double>::quiet_NaN();

    int rank_repairs = 0;             // RGI singular-point repairs
    int ridge_solves = 0;             // ALS regularized micro-steps
    int monotonicity_violations = 0;  // ALS J increases beyond 1e-12 * J0
    std::vector<double> j_history;    // ALS objective per micro-step
};

/// J(v) = 1/2 |A v - b|^2.
double objective(const MeasurementMap& a, const DenseTensor& v, const Vector& b);

using FormatTensor = std::variant<TuckerTensor, TTTensor>;
DenseTensor format_to_dense(const FormatTensor& t);
std::vector<index_t> format_ranks(const FormatTensor& t);

/// Tensor iterative hard thresholding:
///   y^{n+1} = u^n + alpha_n A*(b - A u^n),   u^{n+1} = H_r(y^{n+1}).
/// Optional `init` supplies the tensor fed to H_r as u^0 when
/// init_rule == given. Non-convergence is a report state, not an error.
std::pair<FormatTensor, RecoveryReport> tiht(const MeasurementMap& a, const Vector& b,
                                             const RecoveryConfig& cfg,
                                             const RecoveryDiagnostics* diag = nullptr,
                                             const DenseTensor* init = nullptr);

/// Riemannian gradient iteration (TT only):
///   u^{n+1} = R(u^n, P_{T_{u^n}}(y^{n+1}) - u^n).
/// Rank-deficient iterates are repaired by the manifold padding policy
/// and counted in the report.
std::pair<TTTensor, RecoveryReport> rgi(const MeasurementMap& a, const Vector& b,
                                        const RecoveryConfig& cfg,
                                        const RecoveryDiagnostics* diag = nullptr,
                                        const TTTensor* init = nullptr);

/// Alternating least squares: block coordinate minimization of J over one
/// component at a time (factors then core for Tucker; cores left-to-right
/// then right-to-left for TT), other components fixed and orthogonalized.
/// J is nonincreasing across micro-steps; max_iter counts full sweeps.
std::pair<FormatTensor, RecoveryReport> als(const MeasurementMap& a, const Vector& b,
                                            const RecoveryConfig& cfg, const FormatTensor& init,
                                            const RecoveryDiagnostics* diag = nullptr);

/// One half-sweep of ALS on min |y - v| over rank-<= r tensors,
/// initialized at `current`.
TTTensor als_refine_step(const DenseTensor& y, const TTTensor& current);
TuckerTensor als_refine_step(const DenseTensor& y, const TuckerTensor& current);
FormatTensor als_refine_step(const DenseTensor& y, const FormatTensor& current);

/// Geometric decay rate fitted to history[lo..hi] by least squares on the
/// logarithms; entries at or below 1e-14 * max are treated as converged
/// and excluded. NaN when fewer than two usable points remain.
double fit_decay_rate(std::span<const double> history, int lo, int hi);

} // namespace treco
