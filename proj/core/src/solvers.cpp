#include "prw/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "log_kernels.hpp"

namespace prw {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

// Bounded trace: once 10^4 records accumulate, the stride grows tenfold and
// already-stored records are thinned to match.
struct TraceKeeper {
    std::vector<TraceRecord> records;
    int stride = 1;
    static constexpr std::size_t cap = 10000;

    void add(const TraceRecord& rec, bool force = false) {
        if (!force && rec.iter % stride != 0) return;
        records.push_back(rec);
        // Forced records (the stopping iterate) are exempt from compaction.
        if (!force && records.size() >= cap) {
            const int next = stride * 10;
            std::vector<TraceRecord> kept;
            kept.reserve(records.size() / 10 + 2);
            for (const auto& r : records)
                if (r.iter % next == 0) kept.push_back(r);
            records = std::move(kept);
            stride = next;
        }
    }
};

struct LoopState {
    Vector u_out, v_out;
    Matrix proj_out;
    double best_g = std::numeric_limits<double>::infinity();

    void offer(double g, const Vector& u, const Vector& v, const Matrix& proj) {
        if (g < best_g) {
            best_g = g;
            u_out = u;
            v_out = v;
            proj_out = proj;
        }
    }
    void pin(const Vector& u, const Vector& v, const Matrix& proj) {
        u_out = u;
        v_out = v;
        proj_out = proj;
    }
};

SolveResult finalize(const ProblemInstance& instance, const ResolvedParams& params,
                     LoopState&& state, TraceKeeper&& trace, int iterations,
                     bool converged, PhaseTimings timings) {
    StiefelPoint u_hat = StiefelPoint::from_matrix(std::move(state.proj_out));
    const PlanContext ctx(instance, u_hat, params.eta);
    DualPotentials pots{std::move(state.u_out), std::move(state.v_out)};
    const TransportPlan raw = plan_from_potentials(ctx, pots);
    TransportPlan rounded = round_to_polytope(raw, ctx.row_weights(), ctx.col_weights());
    const double prw_value = transport_value(instance, rounded, u_hat);
    const double final_g =
        trace.records.empty() ? objective_g(ctx, pots) : trace.records.back().g;
    return SolveResult{std::move(u_hat),
                       std::move(rounded),
                       prw_value,
                       std::move(pots),
                       iterations,
                       converged,
                       std::move(trace.records),
                       trace.stride,
                       timings,
                       final_g,
                       params};
}

Index resolve_k(const ProblemInstance& instance, const SolverConfig& config,
                const StiefelPoint* u0) {
    const Index k = u0 ? u0->cols() : config.k;
    if (u0 && u0->rows() != instance.dim())
        throw invalid_input("U0 row count does not match the ambient dimension");
    if (k < 1 || k > instance.dim())
        throw invalid_input("projection dimension k must satisfy 1 <= k <= d");
    return k;
}

// Projection-dependent quantities shared by the solver loops.
struct Projected {
    const Matrix& x;
    const Matrix& y;
    Matrix u, xu, yu;
    Vector sx, sy;

    Projected(const ProblemInstance& instance)
        : x(instance.mu().cloud().points()), y(instance.nu().cloud().points()) {}

    void set(const Matrix& proj) {
        u = proj;
        xu.noalias() = x * proj;
        yu.noalias() = y * proj;
        sx = xu.rowwise().squaredNorm();
        sy = yu.rowwise().squaredNorm();
    }
    // A = -M/eta with M_ij = ||xu_i - yu_j||^2.
    void log_kernel_into(double eta, Matrix& a) const {
        a.noalias() = xu * yu.transpose();
        a *= 2.0 / eta;
        a.colwise() -= sx / eta;
        a.rowwise() -= (sy / eta).transpose();
    }
    void cost_into(Matrix& m) const {
        m.noalias() = xu * yu.transpose();
        m *= -2.0;
        m.colwise() += sx;
        m.rowwise() += sy.transpose();
        m = m.cwiseMax(0.0);
    }
    Matrix vpi_u(const Matrix& plan, const Vector& phi, const Vector& kappa) const {
        return x.transpose() * (phi.asDiagonal() * xu - plan * yu) +
               y.transpose() * (kappa.asDiagonal() * yu - plan.transpose() * xu);
    }
};

struct AdaptivePreconditioner {
    AdaptiveState state;
    double beta;

    AdaptivePreconditioner(Index d, Index k, double alpha, double beta_, double cost_sup)
        : beta(beta_) {
        const double floor = std::max(alpha * cost_sup * cost_sup, 1e-300);
        state.p = Vector::Zero(d);
        state.q = Vector::Zero(k);
        state.p_hat = Vector::Constant(d, floor);
        state.q_hat = Vector::Constant(k, floor);
    }

    // Weight recursions of the adaptive scheme; G is the scaled Riemannian
    // gradient. Returns Diag(p_hat)^{-1/4} G Diag(q_hat)^{-1/4}.
    Matrix update(const Matrix& g) {
        const Index k = g.cols();
        const Index d = g.rows();
        state.p = beta * state.p +
                  ((1.0 - beta) / static_cast<double>(k)) * g.rowwise().squaredNorm();
        state.q = beta * state.q + ((1.0 - beta) / static_cast<double>(d)) *
                                       g.colwise().squaredNorm().transpose();
        state.p_hat = state.p_hat.cwiseMax(state.p);
        state.q_hat = state.q_hat.cwiseMax(state.q);
        const Vector pw = state.p_hat.array().pow(-0.25).matrix();
        const Vector qw = state.q_hat.array().pow(-0.25).matrix();
        return pw.asDiagonal() * g * qw.asDiagonal();
    }
};

SolveResult run_bcd(const ProblemInstance& instance, const SolverConfig& config,
                    const StiefelPoint* u0, const ProgressObserver& observer,
                    bool adaptive) {
    config.validate();
    const Index n = instance.size();
    const Index d = instance.dim();
    const Index k = resolve_k(instance, config, u0);
    const Algorithm algo = adaptive ? Algorithm::rabcd : Algorithm::rbcd;
    const ResolvedParams params = resolve_params(config, instance, k, algo);
    const double eta = params.eta;
    const double cost_sup = instance.cost_sup();

    const Vector& r = instance.mu().weights();
    const Vector& c = instance.nu().weights();
    const Vector log_r = r.array().log().matrix();
    const Vector log_c = c.array().log().matrix();

    // Stopping thresholds. For the non-adaptive step xi carries a
    // 1/eta factor, hence the eps1/(4 eta) form.
    const double thr_grad = adaptive ? config.eps1 / 4.0 : config.eps1 / (4.0 * eta);
    const double thr_marg = config.eps2 / (8.0 * cost_sup);

    StiefelPoint point = u0 ? *u0 : StiefelPoint::random(d, k, config.seed);
    Projected proj(instance);
    proj.set(point.matrix());
    Matrix a;
    proj.log_kernel_into(eta, a);

    Vector u = Vector::Zero(n);
    Vector v = Vector::Zero(n);
    AdaptivePreconditioner precond(d, k, config.alpha, config.beta, cost_sup);

    Matrix plan(n, n);
    TraceKeeper trace;
    LoopState state;
    state.pin(u, v, point.matrix());
    PhaseTimings timings;
    const auto start = Clock::now();

    bool converged = false;
    int iterations = 0;
    for (int t = 0; t < config.max_iter; ++t) {
        auto mark = Clock::now();

        // Sinkhorn block; the stopping rule reads the row error
        // before the u update and the column error after it.
        const Vector log_phi = detail::log_row_marginals(a, u, v);
        const double err_row = (log_phi.array().exp() - r.array()).matrix().norm();
        const Vector u_next = u + log_r - log_phi;
        const Vector log_kappa = detail::log_col_marginals(a, u_next, v);
        const double err_col = (log_kappa.array().exp() - c.array()).abs().sum();
        const Vector v_next = v + log_c - log_kappa;

        auto now = Clock::now();
        timings.sinkhorn_ms += ms_between(mark, now);
        mark = now;

        // Riemannian gradient block at pi(u^{t+1}, v^{t+1}, U^t).
        if (detail::fill_plan(a, u_next, v_next, plan) > 700.0)
            throw numeric_error("plan overflow at iteration " + std::to_string(t) +
                                " (eta too small for the data scale)");
        const Vector phi_post = plan.rowwise().sum();
        const Vector kappa_post = plan.colwise().sum().transpose();
        const Matrix vu = proj.vpi_u(plan, phi_post, kappa_post);

        double grad_norm;
        Matrix step;
        if (adaptive) {
            const Matrix g_mat = project_tangent_raw(proj.u, -2.0 * vu);
            grad_norm = g_mat.norm();
            step = project_tangent_raw(proj.u, precond.update(g_mat)) / eta;
        } else {
            step = project_tangent_raw(proj.u, vu * (-2.0 / eta));
            grad_norm = step.norm();
        }
        const double g_val = plan.sum() - r.dot(u_next) - c.dot(v_next);

        now = Clock::now();
        timings.gradient_ms += ms_between(mark, now);
        mark = now;

        iterations = t + 1;
        const bool stop =
            grad_norm <= thr_grad && err_row <= thr_marg && err_col <= thr_marg;
        trace.add({t, g_val, grad_norm, err_row, err_col, ms_between(start, now)}, stop);
        if (observer)
            observer({t, g_val, grad_norm, err_row, err_col,
                      adaptive ? &precond.state : nullptr});
        state.offer(g_val, u_next, v, proj.u);

        if (stop) {
            // Algorithm output state: u_hat = u^{t+1}, v_hat = v^t, U_hat = U^t.
            converged = true;
            state.pin(u_next, v, proj.u);
            break;
        }
        u = u_next;
        v = v_next;

        point = retract(point, (-params.tau) * step, config.retraction);
        proj.set(point.matrix());
        proj.log_kernel_into(eta, a);
        timings.retraction_ms += ms_between(mark, Clock::now());
    }

    timings.total_ms = ms_between(start, Clock::now());
    return finalize(instance, params, std::move(state), std::move(trace), iterations,
                    converged, timings);
}

SolveResult run_gas(const ProblemInstance& instance, const SolverConfig& config,
                    const StiefelPoint* u0, const ProgressObserver& observer,
                    bool adaptive) {
    config.validate();
    const Index n = instance.size();
    const Index d = instance.dim();
    const Index k = resolve_k(instance, config, u0);
    const Algorithm algo = adaptive ? Algorithm::ragas : Algorithm::rgas;
    const ResolvedParams params = resolve_params(config, instance, k, algo);
    const double cost_sup = instance.cost_sup();

    const Vector& r = instance.mu().weights();
    const Vector& c = instance.nu().weights();

    const double thr_grad = config.eps1 / 4.0;
    const double thr_marg = config.eps2 / (8.0 * cost_sup);

    StiefelPoint point = u0 ? *u0 : StiefelPoint::random(d, k, config.seed);
    Projected proj(instance);
    proj.set(point.matrix());
    Matrix cost(n, n);

    DualPotentials pots{Vector::Zero(n), Vector::Zero(n)};
    AdaptivePreconditioner precond(d, k, config.alpha, config.beta, cost_sup);

    TraceKeeper trace;
    LoopState state;
    state.pin(pots.u, pots.v, point.matrix());
    PhaseTimings timings;
    const auto start = Clock::now();

    bool converged = false;
    int iterations = 0;
    for (int t = 0; t < config.max_iter; ++t) {
        auto mark = Clock::now();

        // Inner entropic OT at the current projection, warm-started from the
        // previous outer iteration.
        proj.cost_into(cost);
        RegOtResult inner = sinkhorn_regot(instance, cost, params.eta, params.inner_tol,
                                           config.inner_max_iter, &pots);
        if (!inner.converged)
            throw numeric_error(std::string(algorithm_name(algo)) +
                                ": inner Sinkhorn did not converge at outer iteration " +
                                std::to_string(t) + " (l1 error " +
                                std::to_string(inner.marginal_error) + ", tol " +
                                std::to_string(params.inner_tol) + ")");
        pots = inner.potentials;

        auto now = Clock::now();
        timings.sinkhorn_ms += ms_between(mark, now);
        mark = now;

        const Matrix& plan = inner.plan.matrix();
        const Vector phi = plan.rowwise().sum();
        const Vector kappa = plan.colwise().sum().transpose();
        const double err_row = (phi - r).norm();
        const double err_col = (kappa - c).lpNorm<1>();
        const Matrix vu = proj.vpi_u(plan, phi, kappa);

        // Ascent direction grad p(U) = Proj(2 V_pi U).
        const Matrix g_mat = project_tangent_raw(proj.u, 2.0 * vu);
        const double grad_norm = g_mat.norm();
        const Matrix step = adaptive ? project_tangent_raw(proj.u, precond.update(g_mat))
                                     : g_mat;
        const double g_val = plan.sum() - r.dot(pots.u) - c.dot(pots.v);

        now = Clock::now();
        timings.gradient_ms += ms_between(mark, now);
        mark = now;

        iterations = t + 1;
        const bool stop =
            grad_norm <= thr_grad && err_row <= thr_marg && err_col <= thr_marg;
        trace.add({t, g_val, grad_norm, err_row, err_col, ms_between(start, now)}, stop);
        if (observer)
            observer({t, g_val, grad_norm, err_row, err_col,
                      adaptive ? &precond.state : nullptr});
        state.offer(g_val, pots.u, pots.v, proj.u);

        if (stop) {
            converged = true;
            state.pin(pots.u, pots.v, proj.u);
            break;
        }

        point = retract(point, params.tau * step, config.retraction);
        proj.set(point.matrix());
        timings.retraction_ms += ms_between(mark, Clock::now());
    }

    timings.total_ms = ms_between(start, Clock::now());
    return finalize(instance, params, std::move(state), std::move(trace), iterations,
                    converged, timings);
}

}  // namespace

const char* algorithm_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::rbcd: return "rbcd";
        case Algorithm::rabcd: return "rabcd";
        case Algorithm::rgas: return "rgas";
        case Algorithm::ragas: return "ragas";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "rbcd") return Algorithm::rbcd;
    if (name == "rabcd") return Algorithm::rabcd;
    if (name == "rgas") return Algorithm::rgas;
    if (name == "ragas") return Algorithm::ragas;
    throw invalid_input("unknown algorithm: " + name);
}

void SolverConfig::validate() const {
    if (!(eps1 >= eps2) || !(eps2 > 0.0))
        throw invalid_input("tolerances must satisfy eps1 >= eps2 > 0");
    if (mode == ParamMode::practical && (eta <= 0.0 || tau <= 0.0))
        throw invalid_input("practical mode needs eta > 0 and tau > 0");
    if (max_iter < 1) throw invalid_input("max_iter must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
        throw invalid_input("alpha and beta must lie in (0, 1)");
    if (l1 <= 0.0 || l2 <= 0.0)
        throw invalid_input("retraction constants L1, L2 must be positive");
    if (inner_tol < 0.0) throw invalid_input("inner_tol must be nonnegative");
    if (inner_max_iter < 1) throw invalid_input("inner_max_iter must be at least 1");
    if (k < 1) throw invalid_input("k must be at least 1");
}

ResolvedParams resolve_params(const SolverConfig& config, const ProblemInstance& instance,
                              Index k, Algorithm algo) {
    config.validate();
    const bool gas = algo == Algorithm::rgas || algo == Algorithm::ragas;
    const double cost_sup = instance.cost_sup();

    ResolvedParams out;
    if (gas)
        out.inner_tol = config.inner_tol > 0.0
                            ? config.inner_tol
                            : config.eps2 / (16.0 * std::max(cost_sup, 1e-300));
    if (config.mode == ParamMode::practical) {
        out.eta = config.eta;
        out.tau = config.tau;
        return out;
    }

    const double n = static_cast<double>(instance.size());
    out.eta = config.eps2 / (4.0 * std::log(n) + 2.0);
    if (cost_sup == 0.0) {
        out.tau = 0.0;  // degenerate instance: the gradient vanishes identically
        return out;
    }
    out.rho = 2.0 * cost_sup / out.eta +
              4.0 * std::sqrt(static_cast<double>(k)) * cost_sup * cost_sup /
                  (out.eta * out.eta);
    const double l1sq = config.l1 * config.l1;
    const double tau_bcd =
        1.0 / (4.0 * config.l2 * cost_sup / out.eta + out.rho * l1sq);
    const double tau_abcd = config.alpha * cost_sup /
                            (8.0 * config.l2 * cost_sup / out.eta + 2.0 * out.rho * l1sq);
    switch (algo) {
        case Algorithm::rbcd: out.tau = tau_bcd; break;
        case Algorithm::rabcd: out.tau = tau_abcd; break;
        // The gradient-ascent baselines step along 2 V U rather than
        // (2/eta) V U, so the matched step size carries a 1/eta factor.
        case Algorithm::rgas: out.tau = tau_bcd / out.eta; break;
        case Algorithm::ragas: out.tau = tau_abcd / out.eta; break;
    }
    return out;
}

SolveResult rbcd(const ProblemInstance& instance, const SolverConfig& config,
                 const StiefelPoint* u0, const ProgressObserver& observer) {
    return run_bcd(instance, config, u0, observer, false);
}

SolveResult rabcd(const ProblemInstance& instance, const SolverConfig& config,
                  const StiefelPoint* u0, const ProgressObserver& observer) {
    return run_bcd(instance, config, u0, observer, true);
}

SolveResult rgas(const ProblemInstance& instance, const SolverConfig& config,
                 const StiefelPoint* u0, const ProgressObserver& observer) {
    return run_gas(instance, config, u0, observer, false);
}

SolveResult ragas(const ProblemInstance& instance, const SolverConfig& config,
                  const StiefelPoint* u0, const ProgressObserver& observer) {
    return run_gas(instance, config, u0, observer, true);
}

SolveResult solve(Algorithm algo, const ProblemInstance& instance, const SolverConfig& config,
                  const StiefelPoint* u0, const ProgressObserver& observer) {
    switch (algo) {
        case Algorithm::rbcd: return rbcd(instance, config, u0, observer);
        case Algorithm::rabcd: return rabcd(instance, config, u0, observer);
        case Algorithm::rgas: return rgas(instance, config, u0, observer);
        case Algorithm::ragas: return ragas(instance, config, u0, observer);
    }
    throw invalid_input("unknown algorithm");
}

Matrix grad_f(const ProblemInstance& instance, const TransportPlan& plan,
              const StiefelPoint& u) {
    return project_tangent_raw(u.matrix(), 2.0 * vpi_apply(instance, plan, u));
}

Matrix grad_g(const PlanContext& ctx, const DualPotentials& pot) {
    const TransportPlan plan = plan_from_potentials(ctx, pot);
    return project_tangent_raw(
        ctx.projection(),
        vpi_apply(ctx.instance(), plan, ctx.projection()) * (-2.0 / ctx.eta()));
}

StationarityReport stationarity_report(const ProblemInstance& instance,
                                       const SolveResult& result, double oracle_tol) {
    if (oracle_tol <= 0.0) throw invalid_input("oracle_tol must be positive");
    StationarityReport report;
    report.grad_norm = grad_f(instance, result.pi_hat, result.U_hat).norm();

    const double cost_sup = instance.cost_sup();
    if (cost_sup == 0.0) {
        report.oracle_converged = true;
        return report;  // all atoms coincide; both quantities vanish
    }

    const Matrix m = projected_cost_matrix(instance, result.U_hat);
    const double eta_ref = oracle_tol * cost_sup;
    const RegOtResult inner = sinkhorn_regot(instance, m, eta_ref, oracle_tol, 200000);
    if (!inner.converged)
        throw numeric_error("stationarity oracle did not converge (l1 error " +
                            std::to_string(inner.marginal_error) + ")");
    const TransportPlan reference =
        round_to_polytope(inner.plan, instance.mu().weights(), instance.nu().weights());
    const double f_min = (m.array() * reference.matrix().array()).sum();
    const double f_hat = (m.array() * result.pi_hat.matrix().array()).sum();
    report.primal_gap = f_hat - f_min;
    report.oracle_bound =
        eta_ref * (2.0 * std::log(static_cast<double>(instance.size())) + 1.0) +
        2.0 * m.maxCoeff() * inner.marginal_error;
    report.oracle_converged = true;
    return report;
}

nlohmann::json to_json(const SolverConfig& config) {
    return nlohmann::json{
        {"k", config.k},
        {"eta", config.eta},
        {"tau", config.tau},
        {"eps1", config.eps1},
        {"eps2", config.eps2},
        {"max_iter", config.max_iter},
        {"retraction", config.retraction == Retraction::qr ? "qr" : "polar"},
        {"mode", config.mode == ParamMode::practical ? "practical" : "theory"},
        {"alpha", config.alpha},
        {"beta", config.beta},
        {"seed", config.seed},
        {"l1", config.l1},
        {"l2", config.l2},
        {"inner_tol", config.inner_tol},
        {"inner_max_iter", config.inner_max_iter},
        {"deterministic", config.deterministic},
    };
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
    SolverConfig config;
    config.k = j.value("k", config.k);
    config.eta = j.value("eta", config.eta);
    config.tau = j.value("tau", config.tau);
    config.eps1 = j.value("eps1", config.eps1);
    config.eps2 = j.value("eps2", config.eps2);
    config.max_iter = j.value("max_iter", config.max_iter);
    if (j.contains("retraction")) {
        const std::string name = j["retraction"].get<std::string>();
        if (name == "qr")
            config.retraction = Retraction::qr;
        else if (name == "polar")
            config.retraction = Retraction::polar;
        else
            throw invalid_input("unknown retraction: " + name);
    }
    if (j.contains("mode")) {
        const std::string name = j["mode"].get<std::string>();
        if (name == "practical")
            config.mode = ParamMode::practical;
        else if (name == "theory")
            config.mode = ParamMode::theory;
        else
            throw invalid_input("unknown parameter mode: " + name);
    }
    config.alpha = j.value("alpha", config.alpha);
    config.beta = j.value("beta", config.beta);
    config.seed = j.value("seed", config.seed);
    config.l1 = j.value("l1", config.l1);
    config.l2 = j.value("l2", config.l2);
    config.inner_tol = j.value("inner_tol", config.inner_tol);
    config.inner_max_iter = j.value("inner_max_iter", config.inner_max_iter);
    config.deterministic = j.value("deterministic", config.deterministic);
    return config;
}

nlohmann::json to_json(const SolveResult& result, bool include_trace) {
    nlohmann::json j{
        {"prw_value", result.prw_value},
        {"iterations", result.iterations},
        {"converged", result.converged},
        {"final_g", result.final_g},
        {"params", {{"eta", result.params.eta},
                    {"tau", result.params.tau},
                    {"rho", result.params.rho},
                    {"inner_tol", result.params.inner_tol}}},
        {"timings", {{"sinkhorn_ms", result.timings.sinkhorn_ms},
                     {"gradient_ms", result.timings.gradient_ms},
                     {"retraction_ms", result.timings.retraction_ms},
                     {"total_ms", result.timings.total_ms}}},
    };
    if (include_trace) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& rec : result.trace)
            rows.push_back({{"iter", rec.iter},
                            {"g", rec.g},
                            {"grad_norm", rec.grad_norm},
                            {"err_row", rec.err_row},
                            {"err_col", rec.err_col},
                            {"wall_ms", rec.wall_ms}});
        j["trace"] = std::move(rows);
        j["trace_stride"] = result.trace_stride;
    }
    return j;
}

}  // namespace prw
