#include "prw/transport.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "log_kernels.hpp"

namespace prw {

namespace {

constexpr double kOverflowLog = 700.0;  // exp(709.78) is the double limit

Matrix projected_cost_from_clouds(const Matrix& xu, const Matrix& yu) {
    const Vector sx = xu.rowwise().squaredNorm();
    const Vector sy = yu.rowwise().squaredNorm();
    Matrix m = -2.0 * xu * yu.transpose();
    m.colwise() += sx;
    m.rowwise() += sy.transpose();
    return m.cwiseMax(0.0);
}

}  // namespace

TransportPlan TransportPlan::from_matrix(Matrix pi) {
    if (pi.rows() != pi.cols()) throw invalid_input("transport plan must be square");
    if (!pi.allFinite()) throw invalid_input("transport plan has non-finite entries");
    if ((pi.array() < 0.0).any()) throw invalid_input("transport plan has negative entries");
    TransportPlan plan;
    plan.pi_ = std::move(pi);
    return plan;
}

TransportPlan TransportPlan::from_log(Matrix log_pi) {
    if (log_pi.rows() != log_pi.cols()) throw invalid_input("transport plan must be square");
    if (log_pi.hasNaN()) throw invalid_input("log plan has NaN entries");
    if (log_pi.maxCoeff() > kOverflowLog)
        throw numeric_error("plan overflow: log entries exceed the double range "
                            "(eta too small for the data scale)");
    TransportPlan plan;
    plan.pi_ = log_pi.array().exp().matrix();
    plan.log_pi_ = std::move(log_pi);
    return plan;
}

PlanContext::PlanContext(const ProblemInstance& instance, const StiefelPoint& u, double eta)
    : PlanContext(instance, u.matrix(), eta) {}

PlanContext::PlanContext(const ProblemInstance& instance, Matrix projection, double eta)
    : instance_(&instance), projection_(std::move(projection)), eta_(eta) {
    if (eta_ <= 0.0) throw invalid_input("eta must be positive");
    if (projection_.rows() != instance.dim())
        throw invalid_input("projection rows do not match the ambient dimension");
    m_ = projected_cost_matrix(instance, projection_);
    a_ = m_ * (-1.0 / eta_);
    r_ = instance.mu().weights();
    c_ = instance.nu().weights();
    log_r_ = r_.array().log().matrix();
    log_c_ = c_.array().log().matrix();
}

Matrix projected_cost_matrix(const ProblemInstance& instance, const Matrix& projection) {
    if (projection.rows() != instance.dim())
        throw invalid_input("projection rows do not match the ambient dimension");
    const Matrix xu = instance.mu().cloud().points() * projection;
    const Matrix yu = instance.nu().cloud().points() * projection;
    return projected_cost_from_clouds(xu, yu);
}

Matrix projected_cost_matrix(const ProblemInstance& instance, const StiefelPoint& u) {
    return projected_cost_matrix(instance, u.matrix());
}

TransportPlan plan_from_potentials(const PlanContext& ctx, const DualPotentials& pot) {
    if (pot.u.size() != ctx.size() || pot.v.size() != ctx.size())
        throw invalid_input("potential length does not match the instance");
    if (!pot.u.allFinite() || !pot.v.allFinite())
        throw invalid_input("potentials must be finite");
    Matrix log_pi = ctx.log_kernel();
    log_pi.colwise() += pot.u;
    log_pi.rowwise() += pot.v.transpose();
    return TransportPlan::from_log(std::move(log_pi));
}

std::pair<Vector, Vector> marginals(const TransportPlan& plan) {
    if (const Matrix* log_pi = plan.log_matrix()) {
        // Scalar exp: Eigen's vectorized exp saturates -inf to a denormal
        // instead of zero.
        const auto scalar_exp = [](double x) { return std::exp(x); };
        const Vector zero = Vector::Zero(plan.size());
        Vector phi =
            detail::log_row_marginals(*log_pi, zero, zero).unaryExpr(scalar_exp);
        Vector kappa =
            detail::log_col_marginals(*log_pi, zero, zero).unaryExpr(scalar_exp);
        return {std::move(phi), std::move(kappa)};
    }
    return {plan.matrix().rowwise().sum(), plan.matrix().colwise().sum().transpose()};
}

double feasibility_error_l1(const TransportPlan& plan, const Vector& r, const Vector& c) {
    const auto [phi, kappa] = marginals(plan);
    return (phi - r).lpNorm<1>() + (kappa - c).lpNorm<1>();
}

DualPotentials u_update(const PlanContext& ctx, const DualPotentials& pot) {
    const Vector log_phi =
        detail::log_row_marginals(ctx.log_kernel(), pot.u, pot.v);
    if (!log_phi.allFinite())
        throw numeric_error("zero row marginal in u update (upstream overflow)");
    return {pot.u + ctx.log_row_weights() - log_phi, pot.v};
}

DualPotentials v_update(const PlanContext& ctx, const DualPotentials& pot) {
    const Vector log_kappa =
        detail::log_col_marginals(ctx.log_kernel(), pot.u, pot.v);
    if (!log_kappa.allFinite())
        throw numeric_error("zero column marginal in v update (upstream overflow)");
    return {pot.u, pot.v + ctx.log_col_weights() - log_kappa};
}

namespace {

Matrix vpi_apply_impl(const Matrix& x, const Matrix& y, const Matrix& pi,
                      const Matrix& projection) {
    const Matrix xu = x * projection;
    const Matrix yu = y * projection;
    const Vector phi = pi.rowwise().sum();
    const Vector kappa = pi.colwise().sum().transpose();
    return x.transpose() * (phi.asDiagonal() * xu - pi * yu) +
           y.transpose() * (kappa.asDiagonal() * yu - pi.transpose() * xu);
}

}  // namespace

Matrix vpi_apply(const ProblemInstance& instance, const TransportPlan& plan,
                 const Matrix& projection) {
    if (plan.size() != instance.size())
        throw invalid_input("plan size does not match the instance");
    if (projection.rows() != instance.dim())
        throw invalid_input("projection rows do not match the ambient dimension");
    return vpi_apply_impl(instance.mu().cloud().points(), instance.nu().cloud().points(),
                          plan.matrix(), projection);
}

Matrix vpi_apply(const ProblemInstance& instance, const TransportPlan& plan,
                 const StiefelPoint& u) {
    return vpi_apply(instance, plan, u.matrix());
}

Matrix vpi_dense(const ProblemInstance& instance, const TransportPlan& plan) {
    const Index d = instance.dim();
    if (d > 50) throw invalid_input("vpi_dense is a debug path, refused for d > 50");
    const Matrix& x = instance.mu().cloud().points();
    const Matrix& y = instance.nu().cloud().points();
    const Matrix& pi = plan.matrix();
    Matrix v = Matrix::Zero(d, d);
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < y.rows(); ++j) {
            const Vector z = (x.row(i) - y.row(j)).transpose();
            v += pi(i, j) * z * z.transpose();
        }
    return v;
}

double objective_g(const PlanContext& ctx, const DualPotentials& pot) {
    const double mass =
        std::exp(detail::log_total_mass(ctx.log_kernel(), pot.u, pot.v));
    return mass - ctx.row_weights().dot(pot.u) - ctx.col_weights().dot(pot.v);
}

double transport_value(const ProblemInstance& instance, const TransportPlan& plan,
                       const StiefelPoint& u) {
    const Matrix m = projected_cost_matrix(instance, u);
    return (m.array() * plan.matrix().array()).sum();
}

double entropy(const TransportPlan& plan) {
    const Matrix& pi = plan.matrix();
    double acc = 0.0;
    if (const Matrix* log_pi = plan.log_matrix()) {
        for (Index j = 0; j < pi.cols(); ++j)
            for (Index i = 0; i < pi.rows(); ++i) {
                const double p = pi(i, j);
                if (p > 0.0) acc += p * (*log_pi)(i, j) - p;
            }
    } else {
        for (Index j = 0; j < pi.cols(); ++j)
            for (Index i = 0; i < pi.rows(); ++i) {
                const double p = pi(i, j);
                if (p > 0.0) acc += p * std::log(p) - p;
            }
    }
    return -acc;
}

TransportPlan round_to_polytope(const TransportPlan& plan, const Vector& r, const Vector& c) {
    const Matrix& pi = plan.matrix();
    const Index n = pi.rows();
    if (r.size() != n || c.size() != n)
        throw invalid_input("marginal length does not match the plan");
    if (pi.sum() <= 0.0) throw invalid_input("cannot round a plan with zero total mass");

    const Vector phi = pi.rowwise().sum();
    Vector x(n);
    for (Index i = 0; i < n; ++i)
        x[i] = phi[i] > 0.0 ? std::min(r[i] / phi[i], 1.0) : 1.0;
    Matrix scaled = x.asDiagonal() * pi;

    const Vector kappa = scaled.colwise().sum().transpose();
    Vector y(n);
    for (Index j = 0; j < n; ++j)
        y[j] = kappa[j] > 0.0 ? std::min(c[j] / kappa[j], 1.0) : 1.0;
    scaled = scaled * y.asDiagonal();

    // The capped scalings only shrink mass, so both residuals are nonnegative;
    // clamping removes sign noise from the subtractions.
    const Vector err_r = (r - scaled.rowwise().sum()).cwiseMax(0.0);
    const Vector err_c = (c - scaled.colwise().sum().transpose()).cwiseMax(0.0);
    const double missing = err_r.sum();
    if (missing == 0.0) return TransportPlan::from_matrix(std::move(scaled));
    scaled.noalias() += err_r * (err_c.transpose() / missing);
    return TransportPlan::from_matrix(std::move(scaled));
}

RegOtResult sinkhorn_regot(const ProblemInstance& instance, const Matrix& cost,
                           double eta, double tol, int max_iter,
                           const DualPotentials* warm_start) {
    const Index n = instance.size();
    if (cost.rows() != n || cost.cols() != n)
        throw invalid_input("cost matrix size does not match the instance");
    if (eta <= 0.0 || tol <= 0.0) throw invalid_input("eta and tol must be positive");

    const Matrix a = cost * (-1.0 / eta);
    const Vector& r = instance.mu().weights();
    const Vector& c = instance.nu().weights();
    const Vector log_r = r.array().log().matrix();
    const Vector log_c = c.array().log().matrix();

    Vector u = warm_start ? warm_start->u : Vector::Zero(n);
    Vector v = warm_start ? warm_start->v : Vector::Zero(n);

    double err = std::numeric_limits<double>::infinity();
    bool converged = false;
    int sweeps = 0;
    for (int it = 0; it <= max_iter; ++it) {
        const Vector log_phi = detail::log_row_marginals(a, u, v);
        // After each sweep the column marginals match c exactly, so the l1
        // violation reduces to the row term once at least one sweep has run.
        err = (log_phi.array().exp() - r.array()).abs().sum();
        if (it > 0 && err <= tol) {
            converged = true;
            break;
        }
        if (it == max_iter) break;
        u += log_r - log_phi;
        v += log_c - detail::log_col_marginals(a, u, v);
        sweeps = it + 1;
    }

    Matrix log_pi = a;
    log_pi.colwise() += u;
    log_pi.rowwise() += v.transpose();
    RegOtResult result{TransportPlan::from_log(std::move(log_pi)),
                       DualPotentials{std::move(u), std::move(v)},
                       sweeps, converged, err};
    return result;
}

void export_plan_csv(const TransportPlan& plan, const std::string& path) {
    if (plan.size() > 1000)
        throw invalid_input("plan export refused for n > 1000 (n = " +
                            std::to_string(plan.size()) + ")");
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write " + path);
    out.precision(17);
    out << "# prw.plan.v1\nrow,col,value\n";
    const Matrix& pi = plan.matrix();
    for (Index i = 0; i < pi.rows(); ++i)
        for (Index j = 0; j < pi.cols(); ++j)
            out << i << ',' << j << ',' << pi(i, j) << '\n';
}

}  // namespace prw
