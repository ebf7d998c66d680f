#pragma once

#include <iosfwd>
#include <optional>

#include "treco/random_tensors.hpp"
#include "treco/recovery.hpp"

namespace treco {

enum class MapKind { gaussian, sampling };
enum class SolverKind { tiht, rgi, als };

std::string to_string(MapKind k);
MapKind map_kind_from_string(const std::string& s);
std::string to_string(SolverKind k);
SolverKind solver_kind_from_string(const std::string& s);

/// One phase-transition experiment: random rank-r instances, a fresh
/// measurement map per trial, the configured solver, and the true-error
/// success criterion |u - u_hat| < success_tol.
///
/// `rank` describes the generated instances and may be given in either
/// format; when it differs from the solver format the solver rank is the
/// generic rank of such instances in the solver's format. The default
/// (Tucker-format rank, whatever the solver) matches the reference
/// experimental protocol.
struct ExperimentSpec {
    Shape shape{std::vector<index_t>{1}};
    RankTuple rank;
    Format format = Format::tucker; // solver format
    MapKind map_kind = MapKind::gaussian;
    SolverKind solver = SolverKind::tiht;
    std::vector<double> grid;       // measurement percentages n_bar, each in (0, 100]
    int trials = 50;
    double success_tol = 1e-4;      // absolute, evaluated against the true tensor
    int max_iter = 5000;
    std::uint64_t base_seed = 0;
    double residual_tol = 1e-6;     // solver-internal stop
    double alpha = 1.0;
    StepRule step_rule = StepRule::fixed;

    void validate() const;
};

/// m = ceil(N * n_bar / 100).
index_t measurement_count(const Shape& shape, double n_bar);

/// Solver-format rank tuple of instances generated at spec.rank.
RankTuple solver_rank(const ExperimentSpec& spec);

struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0; // base_seed XOR trial index
    index_t m = 0;
    bool success = false;
    bool diverged = false;
    int iterations = 0;        // solver iterations run
    int iters_to_success = -1; // first iterate below success_tol, -1 if never
    double true_error = 0.0;   // |u - u_hat| at the final iterate
    double rel_error = 0.0;
    double residual = 0.0;
};

struct SweepRow {
    double n_bar = 0.0;
    index_t m = 0;
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    double mean_iters_success = std::numeric_limits<double>::quiet_NaN();
    double max_iters_success = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::vector<TrialRecord>> records; // per grid point, trial order
    std::optional<double> pct_max;                 // largest n_bar with zero successes
    std::optional<double> pct_min;                 // smallest n_bar with all successes
};

TrialRecord run_trial(const ExperimentSpec& spec, double n_bar, int trial_index);

/// Runs every (grid point, trial) job; jobs execute in parallel under
/// derived seeds and are folded in trial order, so the result does not
/// depend on the thread count.
SweepResult run_sweep(const ExperimentSpec& spec);

/// CSV with header n_bar,m,trials,successes,success_rate,mean_iters_success;
/// floats use 6 significant digits, locale-independent.
void write_sweep_csv(const SweepResult& result, std::ostream& os);

/// TRIC probing request: estimate delta_hat over `draws` independent maps
/// for each measurement count, against rank-r unit-norm samples.
struct ProbeSpec {
    Shape shape{std::vector<index_t>{1}};
    RankTuple rank;
    MapKind map_kind = MapKind::gaussian;
    std::vector<index_t> m_values;
    int map_draws = 20;
    int samples = 1000;
    std::uint64_t seed = 0;
    double delta = 0.5; // target distortion for the calibration table
    double eps = 0.1;
    double c_constant = 1.0; // constant fed to theorem2_m for comparison

    void validate() const;
};

struct ProbeRow {
    index_t m = 0;
    int draw = 0;
    double delta_hat = 0.0;
};

struct ProbeResult {
    std::vector<ProbeRow> rows;
    std::vector<double> pass_fraction; // per m value: fraction of draws with delta_hat <= delta
    index_t theorem_m = 0;             // theorem2_m at (delta, eps, c_constant)
    // Sampling maps only: delta_hat of the deliberately constructed
    // coherent rank-1 tensor supported off Omega (always 1).
    std::optional<double> counterexample_delta;
};

ProbeResult probe_map(const ProbeSpec& spec);

/// CSV with header m,draw,delta_hat.
void write_probe_csv(const ProbeResult& result, std::ostream& os);

/// Locale-independent "%.6g" float formatting used by all CSV output.
std::string format_g6(double v);

} // namespace treco
