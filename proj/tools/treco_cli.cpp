#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "treco/serialize.hpp"

namespace {

using namespace treco;

constexpr const char* kVersion = "0.1.0";

Shape parse_shape(const std::vector<index_t>& dims) {
    if (dims.empty())
        throw CLI::ValidationError("--shape", "needs at least one dimension");
    return Shape(dims);
}

struct SweepOptions {
    std::vector<index_t> shape;
    std::vector<index_t> rank;
    std::string rank_format = "tucker";
    std::string format = "tucker";
    std::string map = "gaussian";
    std::string solver = "tiht";
    std::vector<double> grid;
    int trials = 50;
    int max_iter = 5000;
    double tol = 1e-4;
    std::uint64_t seed = 0;
    std::string spec_file;
    std::string out_prefix = "sweep";
    int threads = 0;
};

ExperimentSpec build_spec(const SweepOptions& opt) {
    ExperimentSpec spec;
    if (!opt.spec_file.empty())
        spec = spec_from_json(load_json_file(opt.spec_file));
    if (!opt.shape.empty())
        spec.shape = parse_shape(opt.shape);
    if (!opt.rank.empty()) {
        spec.rank.values = opt.rank;
        spec.rank.format = format_from_string(opt.rank_format);
    }
    spec.format = format_from_string(opt.format);
    spec.map_kind = map_kind_from_string(opt.map);
    spec.solver = solver_kind_from_string(opt.solver);
    if (!opt.grid.empty())
        spec.grid = opt.grid;
    spec.trials = opt.trials;
    spec.max_iter = opt.max_iter;
    spec.success_tol = opt.tol;
    spec.base_seed = opt.seed;
    spec.validate();
    return spec;
}

int cmd_sweep(const SweepOptions& opt) {
    if (opt.threads > 0)
        omp_set_num_threads(opt.threads);
    ExperimentSpec spec = build_spec(opt);
    SweepResult result = run_sweep(spec);

    std::ostringstream csv;
    write_sweep_csv(result, csv);
    save_text_file(opt.out_prefix + ".csv", csv.str());
    save_json_file(opt.out_prefix + ".json", sweep_summary_to_json(spec, result));

    for (const SweepRow& row : result.rows)
        std::cout << "n_bar=" << format_g6(row.n_bar) << " m=" << row.m << " success="
                  << row.successes << "/" << row.trials << "\n";
    std::cout << "wrote " << opt.out_prefix << ".csv and " << opt.out_prefix << ".json\n";
    return 0;
}

int cmd_trial(const SweepOptions& opt, double frac, int trial_index, const std::string& out) {
    ExperimentSpec spec = build_spec(opt);
    TrialRecord rec = run_trial(spec, frac, trial_index);
    json j = trial_to_json(rec);
    j["spec"] = spec_to_json(spec);
    j["n_bar"] = frac;
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        save_json_file(out, j);
    return 0;
}

struct ProbeOptions {
    std::vector<index_t> shape;
    std::vector<index_t> rank;
    std::string rank_format = "tt";
    std::string map = "gaussian";
    std::vector<index_t> m_values;
    int draws = 20;
    int samples = 1000;
    double delta = 0.5;
    double eps = 0.1;
    double c_constant = 1.0;
    std::uint64_t seed = 0;
    std::string out_prefix = "probe";
};

int cmd_probe(const ProbeOptions& opt) {
    ProbeSpec spec;
    spec.shape = parse_shape(opt.shape);
    spec.rank = RankTuple(format_from_string(opt.rank_format), opt.rank);
    spec.map_kind = map_kind_from_string(opt.map);
    spec.m_values = opt.m_values;
    spec.map_draws = opt.draws;
    spec.samples = opt.samples;
    spec.delta = opt.delta;
    spec.eps = opt.eps;
    spec.c_constant = opt.c_constant;
    spec.seed = opt.seed;

    ProbeResult result = probe_map(spec);
    std::ostringstream csv;
    write_probe_csv(result, csv);
    save_text_file(opt.out_prefix + ".csv", csv.str());
    save_json_file(opt.out_prefix + ".json", probe_summary_to_json(spec, result));

    std::cout << "theorem2_m(delta=" << format_g6(spec.delta) << ", eps=" << format_g6(spec.eps)
              << ", C=" << format_g6(spec.c_constant) << ") = " << result.theorem_m << "\n";
    for (size_t i = 0; i < spec.m_values.size(); ++i)
        std::cout << "m=" << spec.m_values[i]
                  << " pass_fraction=" << format_g6(result.pass_fraction[i]) << "\n";
    std::cout << "wrote " << opt.out_prefix << ".csv and " << opt.out_prefix << ".json\n";
    return 0;
}

struct DecomposeOptions {
    std::string in_file;
    std::string out_file;
    std::string format = "tt";
    std::vector<index_t> rank; // empty = exact
    std::string csv_dump;
};

int cmd_decompose(const DecomposeOptions& opt) {
    json j = load_json_file(opt.in_file);
    DenseTensor u = dense_from_json(j);

    if (!opt.csv_dump.empty()) {
        std::ostringstream os;
        write_csv(u, os);
        save_text_file(opt.csv_dump, os.str());
    }

    const Format format = format_from_string(opt.format);
    json out;
    if (format == Format::tt) {
        TTTensor t = opt.rank.empty() ? tt_svd(u) : tt_svd(u, RankTuple(Format::tt, opt.rank));
        out = tt_to_json(t);
        out["reconstruction_error"] = norm(tt_to_dense(t) - u);
    } else {
        TuckerTensor t = opt.rank.empty() ? hosvd(u) : truncate_hosvd(u, RankTuple(Format::tucker, opt.rank));
        out = tucker_to_json(t);
        out["reconstruction_error"] = norm(tucker_to_dense(t) - u);
    }
    save_json_file(opt.out_file, out);
    std::cout << "wrote " << opt.out_file << " (reconstruction error "
              << format_g6(out["reconstruction_error"].get<double>()) << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank tensor recovery benchmark (Tucker/HOSVD and tensor-train formats)"};
    app.require_subcommand(1);

    SweepOptions sweep_opt;
    CLI::App* sweep = app.add_subcommand("sweep", "Phase-transition sweep over measurement fractions");
    sweep->add_option("--shape", sweep_opt.shape, "tensor dimensions, e.g. 10,10,10")->delimiter(',');
    sweep->add_option("--rank", sweep_opt.rank, "instance rank tuple")->delimiter(',');
    sweep->add_option("--rank-format", sweep_opt.rank_format, "tucker|tt (instance rank format)");
    sweep->add_option("--format", sweep_opt.format, "solver format: tucker|tt");
    sweep->add_option("--map", sweep_opt.map, "gaussian|sampling");
    sweep->add_option("--solver", sweep_opt.solver, "tiht|rgi|als");
    sweep->add_option("--grid", sweep_opt.grid, "measurement percentages, e.g. 3,6,9,12")->delimiter(',');
    sweep->add_option("--trials", sweep_opt.trials, "trials per grid point");
    sweep->add_option("--max-iter", sweep_opt.max_iter, "iteration cap per trial");
    sweep->add_option("--tol", sweep_opt.tol, "success threshold on |u - u_hat|");
    sweep->add_option("--seed", sweep_opt.seed, "base seed");
    sweep->add_option("--spec", sweep_opt.spec_file, "JSON spec file (flags override)");
    sweep->add_option("--out", sweep_opt.out_prefix, "output prefix for .csv/.json");
    sweep->add_option("--threads", sweep_opt.threads, "worker threads (0 = default)");

    double trial_frac = 10.0;
    int trial_index = 0;
    std::string trial_out;
    CLI::App* trial = app.add_subcommand("trial", "Run a single seeded trial");
    trial->add_option("--shape", sweep_opt.shape)->delimiter(',');
    trial->add_option("--rank", sweep_opt.rank)->delimiter(',');
    trial->add_option("--rank-format", sweep_opt.rank_format);
    trial->add_option("--format", sweep_opt.format);
    trial->add_option("--map", sweep_opt.map);
    trial->add_option("--solver", sweep_opt.solver);
    trial->add_option("--max-iter", sweep_opt.max_iter);
    trial->add_option("--tol", sweep_opt.tol);
    trial->add_option("--seed", sweep_opt.seed);
    trial->add_option("--spec", sweep_opt.spec_file);
    trial->add_option("--frac", trial_frac, "measurement percentage n_bar");
    trial->add_option("--trial", trial_index, "trial index");
    trial->add_option("--out", trial_out, "output JSON (default stdout)");

    ProbeOptions probe_opt;
    CLI::App* probe = app.add_subcommand("probe", "Empirical TRIC probing");
    probe->add_option("--shape", probe_opt.shape)->delimiter(',')->required();
    probe->add_option("--rank", probe_opt.rank)->delimiter(',')->required();
    probe->add_option("--rank-format", probe_opt.rank_format);
    probe->add_option("--map", probe_opt.map);
    probe->add_option("--m-list", probe_opt.m_values, "measurement counts")->delimiter(',')->required();
    probe->add_option("--draws", probe_opt.draws, "independent map draws per m");
    probe->add_option("--samples", probe_opt.samples, "rank-r samples per draw");
    probe->add_option("--delta", probe_opt.delta, "target distortion");
    probe->add_option("--eps", probe_opt.eps, "failure probability for theorem2_m");
    probe->add_option("--c", probe_opt.c_constant, "constant C for theorem2_m");
    probe->add_option("--seed", probe_opt.seed);
    probe->add_option("--out", probe_opt.out_prefix);

    DecomposeOptions dec_opt;
    CLI::App* dec = app.add_subcommand("decompose", "Decompose a dense tensor JSON file");
    dec->add_option("--in", dec_opt.in_file, "dense tensor JSON")->required();
    dec->add_option("--out", dec_opt.out_file, "decomposition JSON")->required();
    dec->add_option("--format", dec_opt.format, "tucker|tt");
    dec->add_option("--rank", dec_opt.rank, "target rank (omit for exact)")->delimiter(',');
    dec->add_option("--csv", dec_opt.csv_dump, "also dump the dense tensor as CSV");

    CLI::App* version = app.add_subcommand("version", "Print version");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed())
            return cmd_sweep(sweep_opt);
        if (trial->parsed())
            return cmd_trial(sweep_opt, trial_frac, trial_index, trial_out);
        if (probe->parsed())
            return cmd_probe(probe_opt);
        if (dec->parsed())
            return cmd_decompose(dec_opt);
        if (version->parsed()) {
            std::cout << "treco " << kVersion << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
