#include "treco/recovery.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "treco/random_tensors.hpp"

namespace treco {

void RecoveryConfig::validate(const Shape& shape) const {
    if (rank.format != format)
        throw std::invalid_argument("RecoveryConfig: rank tuple format mismatch");
    rank.validate(shape);
    if (max_iter < 1)
        throw std::invalid_argument("RecoveryConfig: max_iter must be >= 1");
    if (residual_tol <= 0.0 || divergence_factor <= 0.0 || alpha <= 0.0)
        throw std::invalid_argument("RecoveryConfig: tolerances must positive");
}

double objective(const MeasurementMap& a, const DenseTensor& v, const Vector& b) {
    if (b.size() != a.m())
        throw std::invalid_argument("objective: measurement length mismatch");
    return 0.5 * (a.apply(v) - b).squaredNorm();
}

DenseTensor format_to_dense(const FormatTensor& t) {
    if (std::holds_alternative<TuckerTensor>(t))
        return tucker_to_dense(std::get<TuckerTensor>(t));
    return tt_to_dense(std::get<TTTensor>(t));
}

std::vector<index_t> format_ranks(const FormatTensor& t) {
    if (std::holds_alternative<TuckerTensor>(t))
        return std::get<TuckerTensor>(t).ranks();
    return std::get<TTTensor>(t).ranks();
}

double fit_decay_rate(std::span<const double> history, int lo, int hi) {
    const int n = static_cast<int>(history.size());
    lo = std::max(lo, 0);
    hi = std::min(hi, n - 1);
    double peak = 0.0;
    for (double h : history)
        peak = std::max(peak, h);
    const double floor = 1e-14 * peak;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int k = lo; k <= hi; ++k) {
        const double h = history[static_cast<size_t>(k)];
        if (h <= floor)
            continue;
        const double x = static_cast<double>(k);
        const double y = std::log(h);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2)
        return std::numeric_limits<double>::quiet_NaN();
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return std::exp((count * sxy - sx * sy) / denom);
}

namespace {

void check_output_ranks(const std::vector<index_t>& got, const std::vector<index_t>& bound) {
    for (size_t i = 0; i < got.size(); ++i)
        if (got[i] > bound[i])
            throw std::logic_error("recovery: thresholded iterate exceeds target rank");
}

double finish_rate(RecoveryReport& rep) {
    const std::vector<double>& h = rep.error_history.size() >= 2 ? rep.error_history : rep.residual_history;
    const int n = static_cast<int>(h.size());
    return fit_decay_rate(h, n / 2, n - 1);
}

FormatTensor hard_threshold(const DenseTensor& y, const RecoveryConfig& cfg,
                            const FormatTensor* warm) {
    if (cfg.refine == RefineRule::als_half_sweep && warm != nullptr)
        return als_refine_step(y, *warm);
    if (cfg.format == Format::tucker)
        return FormatTensor{truncate_hosvd(y, cfg.rank)};
    return FormatTensor{tt_svd(y, cfg.rank)};
}

// Shared stopping logic: records the residual (and truth telemetry),
// returns true when the iteration should stop.
struct LoopState {
    double b_norm = 0.0;
    const RecoveryConfig* cfg = nullptr;
    const RecoveryDiagnostics* diag = nullptr;

    bool step(int n, double res, const DenseTensor& ud, RecoveryReport& rep) const {
        rep.residual_history.push_back(res);
        if (diag != nullptr && diag->truth != nullptr) {
            const double err = norm(ud - *diag->truth);
            rep.error_history.push_back(err);
            if (rep.true_success_iter < 0 && err < diag->success_tol)
                rep.true_success_iter = n;
        }
        if (res <= cfg->residual_tol * b_norm) {
            rep.converged = true;
            return true;
        }
        if (res > cfg->divergence_factor * std::max(b_norm, 1e-300)) {
            rep.diverged = true;
            return true;
        }
        return n == cfg->max_iter;
    }
};

} // namespace

std::pair<FormatTensor, RecoveryReport> tiht(const MeasurementMap& a, const Vector& b,
                                             const RecoveryConfig& cfg,
                                             const RecoveryDiagnostics* diag,
                                             const DenseTensor* init) {
    cfg.validate(a.shape());
    if (b.size() != a.m())
        throw std::invalid_argument("tiht: measurement length mismatch");

    DenseTensor y0 = (cfg.init_rule == InitRule::given && init != nullptr) ? *init : a.adjoint(b);
    FormatTensor u = hard_threshold(y0, cfg, nullptr);
    DenseTensor ud = format_to_dense(u);

    RecoveryReport rep;
    LoopState loop{b.norm(), &cfg, diag};

    int n = 0;
    while (true) {
        Vector res_vec = b - a.apply(ud);
        if (loop.step(n, res_vec.norm(), ud, rep))
            break;

        DenseTensor g = a.adjoint(res_vec);
        double alpha = cfg.alpha;
        if (cfg.step_rule == StepRule::steepest) {
            const double denom = a.apply(g).squaredNorm();
            if (denom > 0.0)
                alpha = g.vec().squaredNorm() / denom;
        }
        DenseTensor y = ud + alpha * g;
        u = hard_threshold(y, cfg, &u);
        ud = format_to_dense(u);
        check_output_ranks(format_ranks(u), cfg.rank.values);

        if (diag != nullptr && diag->truth != nullptr) {
            // condition (condA): |u^{n+1} - y^{n+1}| <= |u - y^{n+1}|
            const double lhs = norm(ud - y);
            const double rhs = norm(*diag->truth - y);
            if (lhs > rhs) {
                ++rep.condA_violations;
                if (rep.condA_first < 0)
                    rep.condA_first = n;
            }
        }
        ++n;
    }
    rep.iterations = n;
    rep.rate_estimate = finish_rate(rep);
    return {std::move(u), std::move(rep)};
}

std::pair<TTTensor, RecoveryReport> rgi(const MeasurementMap& a, const Vector& b,
                                        const RecoveryConfig& cfg,
                                        const RecoveryDiagnostics* diag, const TTTensor* init) {
    if (cfg.format != Format::tt)
        throw std::invalid_argument("rgi: TT format only");
    cfg.validate(a.shape());
    if (b.size() != a.m())
        throw std::invalid_argument("rgi: measurement length mismatch");

    RecoveryReport rep;
    TTTensor u = (cfg.init_rule == InitRule::given && init != nullptr)
                     ? *init
                     : tt_svd(a.adjoint(b), cfg.rank);
    if (tt_numerical_ranks(u) != cfg.rank.values) {
        u = tt_pad_ranks(u, cfg.rank.values, derive_seed(cfg.seed, 0x9d));
        ++rep.rank_repairs;
    }
    DenseTensor ud = tt_to_dense(u);

    LoopState loop{b.norm(), &cfg, diag};
    int n = 0;
    while (true) {
        Vector res_vec = b - a.apply(ud);
        if (loop.step(n, res_vec.norm(), ud, rep))
            break;

        DenseTensor g = a.adjoint(res_vec);
        TTTangent xi = [&] {
            for (int attempt = 0;; ++attempt) {
                try {
                    return project_tangent(u, g);
                } catch (const singular_point_error&) {
                    if (attempt >= 2)
                        throw;
                    u = tt_pad_ranks(u, cfg.rank.values,
                                     derive_seed(cfg.seed, 0x1000 + static_cast<std::uint64_t>(n)));
                    ++rep.rank_repairs;
                }
            }
        }();

        double alpha = cfg.alpha;
        if (cfg.step_rule == StepRule::steepest) {
            const double denom = a.apply(tangent_to_dense(xi)).squaredNorm();
            if (denom > 0.0)
                alpha = xi.norm() * xi.norm() / denom;
        }
        u = retract(u, xi.scaled(alpha));
        ud = tt_to_dense(u);
        check_output_ranks(u.ranks(), cfg.rank.values);
        ++n;
    }
    rep.iterations = n;
    rep.rate_estimate = finish_rate(rep);
    return {std::move(u), std::move(rep)};
}

namespace {

// Normal-equation solve for min |d x - b|; near-singular systems get a
// 1e-12 ridge (scaled by the Gram diagonal), reported through `ridged`.
Vector solve_normal_equations(const Matrix& d, const Vector& b, bool& ridged) {
    Matrix g = d.transpose() * d;
    Vector rhs = d.transpose() * b;
    const double scale = std::max(g.diagonal().maxCoeff(), 1.0);
    Eigen::LDLT<Matrix> ldlt(g);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok && ldlt.vectorD().minCoeff() <= 1e-14 * scale)
        ok = false;
    if (!ok) {
        ridged = true;
        g.diagonal().array() += 1e-12 * scale;
        ldlt.compute(g);
    }
    return ldlt.solve(rhs);
}

DenseTensor reshape3(const Matrix& m, index_t r0, index_t n, index_t r1) {
    return DenseTensor(Shape({r0, n, r1}), std::vector<double>(m.data(), m.data() + m.size()));
}

// QR push of the orthogonality center from core t to core t+1; bond
// ranks may shrink.
void move_center_right(TTTensor& v, index_t t) {
    Matrix m = v.left_unfold(t);
    const index_t k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
    Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    const Shape& cs = v.core(t).shape();
    v.core(t) = reshape3(q, cs.dim(0), cs.dim(1), k);
    Matrix next = r_fac * v.right_unfold(t + 1);
    const Shape& ns = v.core(t + 1).shape();
    v.core(t + 1) = reshape3(next, k, ns.dim(1), ns.dim(2));
}

void move_center_left(TTTensor& v, index_t t) {
    Matrix m = v.right_unfold(t).transpose();
    const index_t k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
    Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    Matrix core_mat = q.transpose();
    const Shape& cs = v.core(t).shape();
    v.core(t) = reshape3(core_mat, k, cs.dim(1), cs.dim(2));
    Matrix prev = v.left_unfold(t - 1) * r_fac.transpose();
    const Shape& ps = v.core(t - 1).shape();
    v.core(t - 1) = reshape3(prev, ps.dim(0), ps.dim(1), k);
}

std::vector<Matrix> tt_right_interfaces(const TTTensor& v) {
    const index_t d = v.order();
    std::vector<Matrix> rights(static_cast<size_t>(d) + 1);
    rights[static_cast<size_t>(d)] = Matrix::Ones(1, 1);
    for (index_t i = d - 1; i >= 0; --i) {
        Matrix prod = v.left_unfold(i) * rights[static_cast<size_t>(i + 1)];
        rights[static_cast<size_t>(i)] = Eigen::Map<const Matrix>(
            prod.data(), v.core(i).shape().dim(0), prod.size() / v.core(i).shape().dim(0));
    }
    return rights;
}

// Dense basis tensor of the linear TT parametrization at center t:
// left(.,k0) (x) e_mu (x) right(k1,.).
DenseTensor tt_basis_tensor(const Shape& shape, index_t t, const Matrix& left, const Matrix& right,
                            index_t k0, index_t mu, index_t k1) {
    DenseTensor e(shape);
    const index_t p = left.rows();
    const index_t q = right.cols();
    const index_t n = shape.dim(t);
    double* data = e.data();
    for (index_t qq = 0; qq < q; ++qq) {
        const double rv = right(k1, qq);
        if (rv == 0.0)
            continue;
        double* slab = data + mu * p + qq * p * n;
        for (index_t pp = 0; pp < p; ++pp)
            slab[pp] = left(pp, k0) * rv;
    }
    return e;
}

Matrix tt_design_matrix(const MeasurementMap& a, const Shape& shape, index_t t, const Matrix& left,
                        const Matrix& right) {
    const index_t r0 = left.cols();
    const index_t r1 = right.rows();
    const index_t n = shape.dim(t);
    Matrix d(a.m(), r0 * n * r1);
    // unknown ordering matches the core buffer: k0 fastest, then mu, then k1
    for (index_t k1 = 0; k1 < r1; ++k1)
        for (index_t mu = 0; mu < n; ++mu)
            for (index_t k0 = 0; k0 < r0; ++k0)
                d.col(k0 + mu * r0 + k1 * r0 * n) =
                    a.apply(tt_basis_tensor(shape, t, left, right, k0, mu, k1));
    return d;
}

struct MicroStepLog {
    double j0 = 0.0;
    double j_prev = 0.0;

    void record(double j, RecoveryReport& rep) {
        if (j > j_prev + 1e-12 * j0)
            ++rep.monotonicity_violations;
        rep.j_history.push_back(j);
        j_prev = j;
    }
};

std::pair<TTTensor, RecoveryReport> als_tt(const MeasurementMap& a, const Vector& b,
                                           const RecoveryConfig& cfg, const TTTensor& init,
                                           const RecoveryDiagnostics* diag) {
    const Shape& shape = a.shape();
    const index_t d = shape.order();
    TTTensor v = tt_right_orthogonalize(init);

    RecoveryReport rep;
    const double b_norm = b.norm();

    std::vector<Matrix> rights = tt_right_interfaces(v);
    std::vector<Matrix> lefts(static_cast<size_t>(d) + 1);
    lefts[0] = Matrix::Ones(1, 1);

    const double j_start = objective(a, tt_to_dense(v), b);
    MicroStepLog log{j_start, j_start};
    rep.j_history.push_back(j_start);
    rep.residual_history.push_back(std::sqrt(2.0 * j_start));

    auto solve_core = [&](index_t t) {
        Matrix dmat = tt_design_matrix(a, shape, t, lefts[static_cast<size_t>(t)],
                                       rights[static_cast<size_t>(t + 1)]);
        bool ridged = false;
        Vector x = solve_normal_equations(dmat, b, ridged);
        if (ridged)
            ++rep.ridge_solves;
        v.core(t) = reshape3(Eigen::Map<const Matrix>(x.data(), x.size(), 1),
                             lefts[static_cast<size_t>(t)].cols(), shape.dim(t),
                             rights[static_cast<size_t>(t + 1)].rows());
        log.record(0.5 * (dmat * x - b).squaredNorm(), rep);
    };

    double j_prev_sweep = j_start;
    int sweep = 0;
    for (; sweep < cfg.max_iter; ++sweep) {
        for (index_t t = 0; t < d; ++t) {
            solve_core(t);
            if (t + 1 < d) {
                move_center_right(v, t);
                Matrix prod = lefts[static_cast<size_t>(t)] * v.right_unfold(t);
                lefts[static_cast<size_t>(t + 1)] = Eigen::Map<const Matrix>(
                    prod.data(), prod.size() / v.core(t).shape().dim(2), v.core(t).shape().dim(2));
            }
        }
        for (index_t t = d - 2; t >= 0; --t) {
            move_center_left(v, t + 1);
            Matrix prod = v.left_unfold(t + 1) * rights[static_cast<size_t>(t + 2)];
            rights[static_cast<size_t>(t + 1)] = Eigen::Map<const Matrix>(
                prod.data(), v.core(t + 1).shape().dim(0),
                prod.size() / v.core(t + 1).shape().dim(0));
            solve_core(t);
        }

        const double j_now = rep.j_history.back();
        rep.residual_history.push_back(std::sqrt(2.0 * j_now));
        if (diag != nullptr && diag->truth != nullptr) {
            const double err = norm(tt_to_dense(v) - *diag->truth);
            rep.error_history.push_back(err);
            if (rep.true_success_iter < 0 && err < diag->success_tol)
                rep.true_success_iter = sweep;
        }
        if (std::sqrt(2.0 * j_now) <= cfg.residual_tol * b_norm) {
            rep.converged = true;
            ++sweep;
            break;
        }
        if (std::abs(j_prev_sweep - j_now) <= 1e-12 * std::max(j_start, 1e-300)) {
            ++sweep;
            break;
        }
        j_prev_sweep = j_now;
    }
    rep.iterations = sweep;
    rep.rate_estimate = finish_rate(rep);
    return {std::move(v), std::move(rep)};
}

// Basis tensor for the mode-t factor unknowns of a Tucker tensor: the
// mode-t unfolding of the basis element is e_mu w_k^T with w_k the k-th
// row of the unfolded partial contraction.
DenseTensor tucker_factor_basis(const Shape& shape, index_t t, const Matrix& w, index_t mu,
                                index_t k) {
    DenseTensor e(shape);
    const index_t p = shape.prefix_size(t);
    const index_t n = shape.dim(t);
    const index_t cols = shape.size() / n;
    double* data = e.data();
    for (index_t c = 0; c < cols; ++c) {
        const double val = w(k, c);
        if (val == 0.0)
            continue;
        data[(c % p) + mu * p + (c / p) * p * n] = val;
    }
    return e;
}

std::pair<TuckerTensor, RecoveryReport> als_tucker(const MeasurementMap& a, const Vector& b,
                                                   const RecoveryConfig& cfg,
                                                   const TuckerTensor& init,
                                                   const RecoveryDiagnostics* diag) {
    const Shape& shape = a.shape();
    const index_t d = shape.order();

    std::vector<Matrix> factors = init.factors();
    DenseTensor core = init.core();
    // enforce orthonormal factors up front
    for (index_t t = 0; t < d; ++t) {
        Matrix& f = factors[static_cast<size_t>(t)];
        Eigen::HouseholderQR<Matrix> qr(f);
        const index_t k = std::min(f.rows(), f.cols());
        Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), k);
        Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        f = q;
        core = mode_product(core, r_fac, t);
    }

    RecoveryReport rep;
    const double b_norm = b.norm();

    auto rebuild = [&]() {
        DenseTensor out = core;
        for (index_t i = 0; i < d; ++i)
            out = mode_product(out, factors[static_cast<size_t>(i)], i);
        return out;
    };

    const double j_start = objective(a, rebuild(), b);
    MicroStepLog log{j_start, j_start};
    rep.j_history.push_back(j_start);
    rep.residual_history.push_back(std::sqrt(2.0 * j_start));

    auto solve_factor = [&](index_t t) {
        DenseTensor g = core;
        for (index_t j = 0; j < d; ++j)
            if (j != t)
                g = mode_product(g, factors[static_cast<size_t>(j)], j);
        Matrix w = unfold(g, {t}); // r_t x (N / n_t)
        const index_t n = shape.dim(t);
        const index_t r = w.rows();

        Matrix dmat(a.m(), n * r);
        for (index_t k = 0; k < r; ++k)
            for (index_t mu = 0; mu < n; ++mu)
                dmat.col(mu + k * n) = a.apply(tucker_factor_basis(shape, t, w, mu, k));
        bool ridged = false;
        Vector x = solve_normal_equations(dmat, b, ridged);
        if (ridged)
            ++rep.ridge_solves;
        Matrix f = Eigen::Map<const Matrix>(x.data(), n, r);
        log.record(0.5 * (dmat * x - b).squaredNorm(), rep);

        Eigen::HouseholderQR<Matrix> qr(f);
        const index_t kk = std::min(f.rows(), f.cols());
        Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), kk);
        Matrix r_fac = qr.matrixQR().topRows(kk).triangularView<Eigen::Upper>();
        factors[static_cast<size_t>(t)] = q;
        core = mode_product(core, r_fac, t);
    };

    auto solve_core = [&]() {
        const index_t k_total = core.size();
        Matrix dmat(a.m(), k_total);
        for (index_t c = 0; c < k_total; ++c) {
            MultiIndex kidx = delinearize(c, core.shape());
            std::vector<Vector> cols;
            for (index_t j = 0; j < d; ++j)
                cols.push_back(factors[static_cast<size_t>(j)].col(kidx[static_cast<size_t>(j)]));
            CanonicalTensor basis(shape, {cols});
            dmat.col(c) = a.apply(canonical_to_dense(basis));
        }
        bool ridged = false;
        Vector x = solve_normal_equations(dmat, b, ridged);
        if (ridged)
            ++rep.ridge_solves;
        core = DenseTensor(core.shape(), std::vector<double>(x.data(), x.data() + x.size()));
        log.record(0.5 * (dmat * x - b).squaredNorm(), rep);
    };

    double j_prev_sweep = j_start;
    int sweep = 0;
    for (; sweep < cfg.max_iter; ++sweep) {
        for (index_t t = 0; t < d; ++t)
            solve_factor(t);
        solve_core();
        for (index_t t = d - 1; t >= 0; --t)
            solve_factor(t);

        const double j_now = rep.j_history.back();
        rep.residual_history.push_back(std::sqrt(2.0 * j_now));
        if (diag != nullptr && diag->truth != nullptr) {
            const double err = norm(rebuild() - *diag->truth);
            rep.error_history.push_back(err);
            if (rep.true_success_iter < 0 && err < diag->success_tol)
                rep.true_success_iter = sweep;
        }
        if (std::sqrt(2.0 * j_now) <= cfg.residual_tol * b_norm) {
            rep.converged = true;
            ++sweep;
            break;
        }
        if (std::abs(j_prev_sweep - j_now) <= 1e-12 * std::max(j_start, 1e-300)) {
            ++sweep;
            break;
        }
        j_prev_sweep = j_now;
    }
    rep.iterations = sweep;
    rep.rate_estimate = finish_rate(rep);

    TuckerTensor out(shape, std::move(core), std::move(factors), {});
    return {std::move(out), std::move(rep)};
}

} // namespace

std::pair<FormatTensor, RecoveryReport> als(const MeasurementMap& a, const Vector& b,
                                            const RecoveryConfig& cfg, const FormatTensor& init,
                                            const RecoveryDiagnostics* diag) {
    cfg.validate(a.shape());
    if (b.size() != a.m())
        throw std::invalid_argument("als: measurement length mismatch");
    if (cfg.format == Format::tucker) {
        if (!std::holds_alternative<TuckerTensor>(init))
            throw std::invalid_argument("als: init format mismatch");
        auto [t, rep] = als_tucker(a, b, cfg, std::get<TuckerTensor>(init), diag);
        return {FormatTensor{std::move(t)}, std::move(rep)};
    }
    if (!std::holds_alternative<TTTensor>(init))
        throw std::invalid_argument("als: init format mismatch");
    auto [t, rep] = als_tt(a, b, cfg, std::get<TTTensor>(init), diag);
    return {FormatTensor{std::move(t)}, std::move(rep)};
}

TTTensor als_refine_step(const DenseTensor& y, const TTTensor& current) {
    if (!(y.shape() == current.shape()))
        throw std::invalid_argument("als_refine_step: shape mismatch");
    const index_t d = current.order();
    TTTensor v = tt_right_orthogonalize(current);
    std::vector<Matrix> rights = tt_right_interfaces(v);

    Matrix a_prev = Eigen::Map<const Matrix>(y.data(), 1, y.size());
    std::vector<DenseTensor> cores;
    for (index_t t = 0; t < d; ++t) {
        const index_t r0 = v.core(t).shape().dim(0);
        const index_t n = v.core(t).shape().dim(1);
        const index_t r1 = v.core(t).shape().dim(2);
        Eigen::Map<const Matrix> a_resh(a_prev.data(), r0 * n, a_prev.size() / (r0 * n));
        Matrix w = a_resh * rights[static_cast<size_t>(t + 1)].transpose();
        if (t + 1 < d) {
            Eigen::HouseholderQR<Matrix> qr(w);
            const index_t k = std::min(w.rows(), w.cols());
            Matrix q = qr.householderQ() * Matrix::Identity(w.rows(), k);
            cores.push_back(reshape3(q, r0, n, k));
            a_prev = q.transpose() * a_resh;
        } else {
            cores.push_back(reshape3(w, r0, n, 1));
        }
    }
    TTTensor out(current.shape(), std::move(cores));
    out.set_ortho(TTTensor::Ortho::left);
    return out;
}

TuckerTensor als_refine_step(const DenseTensor& y, const TuckerTensor& current) {
    if (!(y.shape() == current.shape()))
        throw std::invalid_argument("als_refine_step: shape mismatch");
    const Shape& shape = y.shape();
    const index_t d = shape.order();

    std::vector<Matrix> factors = current.factors();
    DenseTensor core = current.core();
    for (index_t t = 0; t < d; ++t) {
        Matrix& f = factors[static_cast<size_t>(t)];
        Eigen::HouseholderQR<Matrix> qr(f);
        const index_t k = std::min(f.rows(), f.cols());
        Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), k);
        Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        f = q;
        core = mode_product(core, r_fac, t);
    }

    for (index_t t = 0; t < d; ++t) {
        DenseTensor g = core;
        for (index_t j = 0; j < d; ++j)
            if (j != t)
                g = mode_product(g, factors[static_cast<size_t>(j)], j);
        Matrix w = unfold(g, {t});
        Matrix yt = unfold(y, {t});
        // min_B |Y_t - B W|_F
        Matrix gram = w * w.transpose();
        const double scale = std::max(gram.diagonal().maxCoeff(), 1.0);
        Eigen::LDLT<Matrix> ldlt(gram);
        if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14 * scale) {
            gram.diagonal().array() += 1e-12 * scale;
            ldlt.compute(gram);
        }
        Matrix f = ldlt.solve(w * yt.transpose()).transpose();

        Eigen::HouseholderQR<Matrix> qr(f);
        const index_t k = std::min(f.rows(), f.cols());
        Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), k);
        Matrix r_fac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        factors[static_cast<size_t>(t)] = q;
        core = mode_product(core, r_fac, t);
    }

    DenseTensor new_core = y;
    for (index_t t = 0; t < d; ++t)
        new_core = mode_product(new_core, factors[static_cast<size_t>(t)].transpose(), t);
    return {shape, std::move(new_core), std::move(factors), {}};
}

FormatTensor als_refine_step(const DenseTensor& y, const FormatTensor& current) {
    if (std::holds_alternative<TuckerTensor>(current))
        return FormatTensor{als_refine_step(y, std::get<TuckerTensor>(current))};
    return FormatTensor{als_refine_step(y, std::get<TTTensor>(current))};
}

} // namespace treco
