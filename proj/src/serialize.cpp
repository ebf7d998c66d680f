#include "treco/serialize.hpp"

#include <cmath>
#include <fstream>

namespace treco {

namespace {

std::vector<double> matrix_to_flat(const Matrix& m) {
    return {m.data(), m.data() + m.size()};
}

Matrix matrix_from_flat(const std::vector<double>& v, index_t rows, index_t cols) {
    if (static_cast<index_t>(v.size()) != rows * cols)
        throw std::invalid_argument("serialize: matrix payload size mismatch");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double json_or_nan(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::numeric_limits<double>::quiet_NaN();
    return j.at(key).get<double>();
}

json nan_to_null(double v) {
    if (std::isnan(v))
        return nullptr;
    return v;
}

} // namespace

json dense_to_json(const DenseTensor& u) {
    return {{"shape", u.shape().dims()}, {"values", u.values()}};
}

DenseTensor dense_from_json(const json& j) {
    Shape shape(j.at("shape").get<std::vector<index_t>>());
    return {shape, j.at("values").get<std::vector<double>>()};
}

json tucker_to_json(const TuckerTensor& t) {
    json factors = json::array();
    for (const Matrix& f : t.factors())
        factors.push_back(matrix_to_flat(f));
    return {{"format", "tucker"},
            {"shape", t.shape().dims()},
            {"ranks", t.ranks()},
            {"core", t.core().values()},
            {"factors", factors},
            {"sigma", t.sigma()}};
}

TuckerTensor tucker_from_json(const json& j) {
    Shape shape(j.at("shape").get<std::vector<index_t>>());
    std::vector<index_t> ranks = j.at("ranks").get<std::vector<index_t>>();
    DenseTensor core(Shape(ranks), j.at("core").get<std::vector<double>>());
    std::vector<Matrix> factors;
    const auto& jf = j.at("factors");
    for (index_t i = 0; i < shape.order(); ++i)
        factors.push_back(matrix_from_flat(jf.at(static_cast<size_t>(i)).get<std::vector<double>>(),
                                           shape.dim(i), ranks[static_cast<size_t>(i)]));
    std::vector<std::vector<double>> sigma;
    if (j.contains("sigma"))
        sigma = j.at("sigma").get<std::vector<std::vector<double>>>();
    return {shape, std::move(core), std::move(factors), std::move(sigma)};
}

json tt_to_json(const TTTensor& t) {
    json cores = json::array();
    for (const DenseTensor& c : t.cores())
        cores.push_back(c.values());
    return {{"format", "tt"},
            {"shape", t.shape().dims()},
            {"ranks", t.ranks()},
            {"cores", cores},
            {"sigma", t.sigma()},
            {"truncation_eps", t.truncation_eps()}};
}

TTTensor tt_from_json(const json& j) {
    Shape shape(j.at("shape").get<std::vector<index_t>>());
    std::vector<index_t> ranks = j.at("ranks").get<std::vector<index_t>>();
    const index_t d = shape.order();
    std::vector<DenseTensor> cores;
    for (index_t i = 0; i < d; ++i) {
        const index_t r0 = (i == 0) ? 1 : ranks[static_cast<size_t>(i - 1)];
        const index_t r1 = (i == d - 1) ? 1 : ranks[static_cast<size_t>(i)];
        cores.emplace_back(Shape({r0, shape.dim(i), r1}),
                           j.at("cores").at(static_cast<size_t>(i)).get<std::vector<double>>());
    }
    TTTensor t(shape, std::move(cores));
    if (j.contains("sigma"))
        t.set_sigma(j.at("sigma").get<std::vector<std::vector<double>>>());
    if (j.contains("truncation_eps"))
        t.set_truncation_eps(j.at("truncation_eps").get<std::vector<double>>());
    return t;
}

json map_to_json(const MeasurementMap& map) {
    return {{"kind", map.kind()},
            {"shape", map.shape().dims()},
            {"m", map.m()},
            {"seed", map.seed()}};
}

std::unique_ptr<MeasurementMap> map_from_json(const json& j) {
    Shape shape(j.at("shape").get<std::vector<index_t>>());
    const index_t m = j.at("m").get<index_t>();
    const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian")
        return std::make_unique<GaussianMap>(shape, m, seed);
    if (kind == "sampling")
        return std::make_unique<SamplingMap>(shape, m, seed);
    throw std::invalid_argument("map_from_json: unknown kind " + kind);
}

json report_to_json(const RecoveryReport& rep) {
    return {{"converged", rep.converged},
            {"diverged", rep.diverged},
            {"iterations", rep.iterations},
            {"residual_history", rep.residual_history},
            {"error_history", rep.error_history},
            {"true_success_iter", rep.true_success_iter},
            {"condA_violations", rep.condA_violations},
            {"condA_first", rep.condA_first},
            {"rate_estimate", nan_to_null(rep.rate_estimate)},
            {"rank_repairs", rep.rank_repairs},
            {"ridge_solves", rep.ridge_solves},
            {"monotonicity_violations", rep.monotonicity_violations}};
}

json spec_to_json(const ExperimentSpec& spec) {
    return {{"shape", spec.shape.dims()},
            {"rank", spec.rank.values},
            {"rank_format", to_string(spec.rank.format)},
            {"format", to_string(spec.format)},
            {"map", to_string(spec.map_kind)},
            {"solver", to_string(spec.solver)},
            {"grid", spec.grid},
            {"trials", spec.trials},
            {"success_tol", spec.success_tol},
            {"max_iter", spec.max_iter},
            {"seed", spec.base_seed},
            {"residual_tol", spec.residual_tol},
            {"alpha", spec.alpha},
            {"step_rule", spec.step_rule == StepRule::fixed ? "fixed" : "steepest"}};
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.shape = Shape(j.at("shape").get<std::vector<index_t>>());
    spec.rank.values = j.at("rank").get<std::vector<index_t>>();
    spec.rank.format = format_from_string(j.value("rank_format", std::string("tucker")));
    spec.format = format_from_string(j.value("format", std::string("tucker")));
    spec.map_kind = map_kind_from_string(j.value("map", std::string("gaussian")));
    spec.solver = solver_kind_from_string(j.value("solver", std::string("tiht")));
    if (j.contains("grid"))
        spec.grid = j.at("grid").get<std::vector<double>>();
    spec.trials = j.value("trials", 50);
    spec.success_tol = j.value("success_tol", 1e-4);
    spec.max_iter = j.value("max_iter", 5000);
    spec.base_seed = j.value("seed", std::uint64_t{0});
    spec.residual_tol = j.value("residual_tol", 1e-6);
    spec.alpha = j.value("alpha", 1.0);
    spec.step_rule = j.value("step_rule", std::string("fixed")) == "steepest" ? StepRule::steepest
                                                                              : StepRule::fixed;
    return spec;
}

json trial_to_json(const TrialRecord& rec) {
    return {{"trial", rec.trial},
            {"seed", rec.seed},
            {"m", rec.m},
            {"success", rec.success},
            {"diverged", rec.diverged},
            {"iterations", rec.iterations},
            {"iters_to_success", rec.iters_to_success},
            {"true_error", rec.true_error},
            {"rel_error", rec.rel_error},
            {"residual", rec.residual}};
}

json sweep_summary_to_json(const ExperimentSpec& spec, const SweepResult& result) {
    json rows = json::array();
    for (const SweepRow& row : result.rows) {
        const double p = row.success_rate;
        const double band = 2.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / row.trials);
        rows.push_back({{"n_bar", row.n_bar},
                        {"m", row.m},
                        {"trials", row.trials},
                        {"successes", row.successes},
                        {"success_rate", p},
                        {"rate_band_2sigma", band},
                        {"mean_iters_success", nan_to_null(row.mean_iters_success)},
                        {"max_iters_success", nan_to_null(row.max_iters_success)}});
    }
    json out = {{"spec", spec_to_json(spec)}, {"rows", rows}};
    out["pct_max"] = result.pct_max ? json(*result.pct_max) : json(nullptr);
    out["pct_min"] = result.pct_min ? json(*result.pct_min) : json(nullptr);
    return out;
}

json probe_summary_to_json(const ProbeSpec& spec, const ProbeResult& result) {
    json per_m = json::array();
    for (size_t i = 0; i < spec.m_values.size(); ++i)
        per_m.push_back({{"m", spec.m_values[i]}, {"pass_fraction", result.pass_fraction[i]}});
    json out = {{"shape", spec.shape.dims()},
                {"rank", spec.rank.values},
                {"rank_format", to_string(spec.rank.format)},
                {"map", to_string(spec.map_kind)},
                {"delta", spec.delta},
                {"eps", spec.eps},
                {"c_constant", spec.c_constant},
                {"theorem_m", result.theorem_m},
                {"per_m", per_m}};
    out["counterexample_delta"] =
        result.counterexample_delta ? json(*result.counterexample_delta) : json(nullptr);
    return out;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path.string());
    json j;
    in >> j;
    return j;
}

void save_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

void save_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace treco
