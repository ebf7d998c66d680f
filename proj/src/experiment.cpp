#include "treco/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace treco {

std::string to_string(MapKind k) { return k == MapKind::gaussian ? "gaussian" : "sampling"; }

MapKind map_kind_from_string(const std::string& s) {
    if (s == "gaussian")
        return MapKind::gaussian;
    if (s == "sampling")
        return MapKind::sampling;
    throw std::invalid_argument("unknown map kind: " + s);
}

std::string to_string(SolverKind k) {
    switch (k) {
    case SolverKind::tiht: return "tiht";
    case SolverKind::rgi: return "rgi";
    default: return "als";
    }
}

SolverKind solver_kind_from_string(const std::string& s) {
    if (s == "tiht")
        return SolverKind::tiht;
    if (s == "rgi")
        return SolverKind::rgi;
    if (s == "als")
        return SolverKind::als;
    throw std::invalid_argument("unknown solver: " + s);
}

void ExperimentSpec::validate() const {
    rank.validate(shape);
    if (trials < 1)
        throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
    if (max_iter < 1)
        throw std::invalid_argument("ExperimentSpec: max_iter must be >= 1");
    if (success_tol <= 0.0 || residual_tol <= 0.0)
        throw std::invalid_argument("ExperimentSpec: tolerances must be positive");
    for (double g : grid)
        if (g <= 0.0 || g > 100.0)
            throw std::invalid_argument("ExperimentSpec: grid entries must lie in (0, 100]");
    if (format == Format::tucker && solver == SolverKind::rgi)
        throw std::invalid_argument("ExperimentSpec: rgi runs in TT format only");
    solver_rank(*this).validate(shape);
}

index_t measurement_count(const Shape& shape, double n_bar) {
    return static_cast<index_t>(std::ceil(static_cast<double>(shape.size()) * n_bar / 100.0));
}

RankTuple solver_rank(const ExperimentSpec& spec) {
    if (spec.rank.format == spec.format)
        return spec.rank;
    const index_t d = spec.shape.order();
    std::vector<index_t> out;
    if (spec.format == Format::tt) {
        // generic TT rank of a Tucker-(r_1..r_d) tensor
        for (index_t i = 0; i + 1 < d; ++i) {
            index_t lo = 1, hi = 1;
            for (index_t j = 0; j <= i; ++j)
                lo *= spec.rank.values[static_cast<size_t>(j)];
            for (index_t j = i + 1; j < d; ++j)
                hi *= spec.rank.values[static_cast<size_t>(j)];
            const index_t structural =
                std::min(spec.shape.prefix_size(i + 1), spec.shape.size() / spec.shape.prefix_size(i + 1));
            out.push_back(std::min({lo, hi, structural}));
        }
        return {Format::tt, std::move(out)};
    }
    // generic Tucker rank of a TT-(r_1..r_{d-1}) tensor
    for (index_t i = 0; i < d; ++i) {
        const index_t r0 = (i == 0) ? 1 : spec.rank.values[static_cast<size_t>(i - 1)];
        const index_t r1 = (i == d - 1) ? 1 : spec.rank.values[static_cast<size_t>(i)];
        out.push_back(std::min(r0 * r1, spec.shape.dim(i)));
    }
    return {Format::tucker, std::move(out)};
}

namespace {

std::unique_ptr<MeasurementMap> make_map(MapKind kind, const Shape& shape, index_t m,
                                         std::uint64_t seed) {
    if (kind == MapKind::gaussian)
        return std::make_unique<GaussianMap>(shape, m, seed);
    return std::make_unique<SamplingMap>(shape, m, seed);
}

} // namespace

TrialRecord run_trial(const ExperimentSpec& spec, double n_bar, int trial_index) {
    const std::uint64_t trial_seed = spec.base_seed ^ static_cast<std::uint64_t>(trial_index);
    const std::uint64_t gen_seed = derive_seed(trial_seed, 1);
    const std::uint64_t map_seed = derive_seed(trial_seed, 2);
    const index_t m = measurement_count(spec.shape, n_bar);

    DenseTensor truth = (spec.rank.format == Format::tucker)
                            ? gen_random_tucker(spec.shape, spec.rank.values, gen_seed).first
                            : tt_to_dense(gen_random_tt(spec.shape, spec.rank.values, gen_seed));

    std::unique_ptr<MeasurementMap> map = make_map(spec.map_kind, spec.shape, m, map_seed);
    Vector b = map->apply(truth);

    RecoveryConfig cfg;
    cfg.format = spec.format;
    cfg.rank = solver_rank(spec);
    cfg.max_iter = spec.max_iter;
    cfg.residual_tol = spec.residual_tol;
    cfg.alpha = spec.alpha;
    cfg.step_rule = spec.step_rule;
    cfg.seed = derive_seed(trial_seed, 3);

    RecoveryDiagnostics diag{&truth, spec.success_tol};

    RecoveryReport rep;
    DenseTensor recovered(spec.shape);
    switch (spec.solver) {
    case SolverKind::tiht: {
        auto [u, r] = tiht(*map, b, cfg, &diag);
        recovered = format_to_dense(u);
        rep = std::move(r);
        break;
    }
    case SolverKind::rgi: {
        auto [u, r] = rgi(*map, b, cfg, &diag);
        recovered = tt_to_dense(u);
        rep = std::move(r);
        break;
    }
    case SolverKind::als: {
        DenseTensor warm = map->adjoint(b);
        FormatTensor init = (spec.format == Format::tucker)
                                ? FormatTensor{truncate_hosvd(warm, cfg.rank)}
                                : FormatTensor{tt_svd(warm, cfg.rank)};
        auto [u, r] = als(*map, b, cfg, init, &diag);
        recovered = format_to_dense(u);
        rep = std::move(r);
        break;
    }
    }

    TrialRecord rec;
    rec.trial = trial_index;
    rec.seed = trial_seed;
    rec.m = m;
    rec.diverged = rep.diverged;
    rec.iterations = rep.iterations;
    rec.iters_to_success = rep.true_success_iter;
    rec.success = rep.true_success_iter >= 0;
    rec.true_error = norm(recovered - truth);
    const double truth_norm = norm(truth);
    rec.rel_error = truth_norm > 0.0 ? rec.true_error / truth_norm : rec.true_error;
    rec.residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    return rec;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    const int points = static_cast<int>(spec.grid.size());
    const int jobs = points * spec.trials;

    SweepResult result;
    result.records.assign(static_cast<size_t>(points),
                          std::vector<TrialRecord>(static_cast<size_t>(spec.trials)));

#pragma omp parallel for schedule(dynamic)
    for (int job = 0; job < jobs; ++job) {
        const int g = job / spec.trials;
        const int t = job % spec.trials;
        result.records[static_cast<size_t>(g)][static_cast<size_t>(t)] =
            run_trial(spec, spec.grid[static_cast<size_t>(g)], t);
    }

    for (int g = 0; g < points; ++g) {
        const auto& recs = result.records[static_cast<size_t>(g)];
        SweepRow row;
        row.n_bar = spec.grid[static_cast<size_t>(g)];
        row.m = measurement_count(spec.shape, row.n_bar);
        row.trials = spec.trials;
        double iter_sum = 0.0;
        double iter_max = 0.0;
        for (const TrialRecord& rec : recs) {
            if (rec.success) {
                ++row.successes;
                iter_sum += rec.iters_to_success;
                iter_max = std::max(iter_max, static_cast<double>(rec.iters_to_success));
            }
        }
        row.success_rate = static_cast<double>(row.successes) / row.trials;
        if (row.successes > 0) {
            row.mean_iters_success = iter_sum / row.successes;
            row.max_iters_success = iter_max;
        }
        result.rows.push_back(row);

        if (row.successes == 0 && (!result.pct_max || row.n_bar > *result.pct_max))
            result.pct_max = row.n_bar;
        if (row.successes == row.trials && (!result.pct_min || row.n_bar < *result.pct_min))
            result.pct_min = row.n_bar;
    }
    return result;
}

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_sweep_csv(const SweepResult& result, std::ostream& os) {
    os << "n_bar,m,trials,successes,success_rate,mean_iters_success\n";
    for (const SweepRow& row : result.rows) {
        os << format_g6(row.n_bar) << ',' << row.m << ',' << row.trials << ',' << row.successes
           << ',' << format_g6(row.success_rate) << ',' << format_g6(row.mean_iters_success)
           << '\n';
    }
}

void ProbeSpec::validate() const {
    rank.validate(shape);
    if (m_values.empty())
        throw std::invalid_argument("ProbeSpec: need at least one measurement count");
    for (index_t m : m_values)
        if (m < 1)
            throw std::invalid_argument("ProbeSpec: measurement counts must be positive");
    if (map_draws < 1 || samples < 1)
        throw std::invalid_argument("ProbeSpec: draws and samples must be positive");
    if (delta <= 0.0 || eps <= 0.0 || c_constant <= 0.0)
        throw std::invalid_argument("ProbeSpec: delta, eps, c must be positive");
}

ProbeResult probe_map(const ProbeSpec& spec) {
    spec.validate();
    ProbeResult result;

    index_t n_max = 0;
    for (index_t n : spec.shape.dims())
        n_max = std::max(n_max, n);
    index_t r_max = 0;
    for (index_t r : spec.rank.values)
        r_max = std::max(r_max, r);
    result.theorem_m = theorem2_m(spec.rank.format, n_max, std::max<index_t>(r_max, 1),
                                  spec.shape.order(), spec.delta, spec.eps, spec.c_constant);

    for (size_t mi = 0; mi < spec.m_values.size(); ++mi) {
        const index_t m = spec.m_values[mi];
        int passed = 0;
        for (int draw = 0; draw < spec.map_draws; ++draw) {
            const std::uint64_t map_seed =
                derive_seed(spec.seed, 10000 * static_cast<std::uint64_t>(mi) + static_cast<std::uint64_t>(draw));
            std::unique_ptr<MeasurementMap> map = make_map(spec.map_kind, spec.shape, m, map_seed);
            TricEstimate est = estimate_tric(*map, spec.rank, spec.samples, derive_seed(map_seed, 7));
            result.rows.push_back({m, draw, est.delta_hat});
            if (est.delta_hat <= spec.delta)
                ++passed;
        }
        result.pass_fraction.push_back(static_cast<double>(passed) / spec.map_draws);
    }

    if (spec.map_kind == MapKind::sampling) {
        const index_t m = spec.m_values.front();
        if (m < spec.shape.size()) {
            SamplingMap map(spec.shape, m, derive_seed(spec.seed, 0xce));
            std::vector<bool> hit(static_cast<size_t>(spec.shape.size()), false);
            for (index_t off : map.omega())
                hit[static_cast<size_t>(off)] = true;
            index_t off_support = 0;
            while (hit[static_cast<size_t>(off_support)])
                ++off_support;
            DenseTensor u(spec.shape);
            u[off_support] = 1.0; // unit coordinate tensor, rank (1,...,1)
            result.counterexample_delta = std::abs(map.apply(u).squaredNorm() - 1.0);
        }
    }
    return result;
}

void write_probe_csv(const ProbeResult& result, std::ostream& os) {
    os << "m,draw,delta_hat\n";
    for (const ProbeRow& row : result.rows)
        os << row.m << ',' << row.draw << ',' << format_g6(row.delta_hat) << '\n';
}

} // namespace treco
