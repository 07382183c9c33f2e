#pragma once

#include <optional>
#include <string>
#include <utility>

#include "prw/measures.hpp"
#include "prw/stiefel.hpp"
#include "prw/types.hpp"

namespace prw {

// Sinkhorn block variables u, v. The plan they parameterize is
// pi_ij = exp(-M_ij/eta + u_i + v_j).
struct DualPotentials {
    Vector u;
    Vector v;
};

// Nonnegative n x n coupling. Plans produced from potentials keep their log
// representation so that marginals can be aggregated in log space.
class TransportPlan {
public:
    static TransportPlan from_matrix(Matrix pi);
    static TransportPlan from_log(Matrix log_pi);

    Index size() const { return pi_.rows(); }
    const Matrix& matrix() const { return pi_; }
    const Matrix* log_matrix() const { return log_pi_ ? &*log_pi_ : nullptr; }
    double total_mass() const { return pi_.sum(); }

private:
    TransportPlan() = default;
    Matrix pi_;
    std::optional<Matrix> log_pi_;
};

// Immutable snapshot of the data entering the plan parameterization: the
// projected cost M_ij = ||U^T(x_i - y_j)||^2 for a fixed projection and eta,
// together with the marginals r, c and their logs.
class PlanContext {
public:
    PlanContext(const ProblemInstance& instance, const StiefelPoint& u, double eta);
    // Off-manifold projections are allowed here so that gradients of g in U
    // can be finite-difference checked in the ambient space.
    PlanContext(const ProblemInstance& instance, Matrix projection, double eta);

    const ProblemInstance& instance() const { return *instance_; }
    const Matrix& projection() const { return projection_; }
    const Matrix& projected_cost() const { return m_; }
    const Matrix& log_kernel() const { return a_; }  // A = -M/eta
    double eta() const { return eta_; }
    Index size() const { return m_.rows(); }
    const Vector& row_weights() const { return r_; }
    const Vector& col_weights() const { return c_; }
    const Vector& log_row_weights() const { return log_r_; }
    const Vector& log_col_weights() const { return log_c_; }

private:
    const ProblemInstance* instance_;
    Matrix projection_;
    double eta_;
    Matrix m_;
    Matrix a_;
    Vector r_, c_, log_r_, log_c_;
};

// M_ij = ||U^T x_i - U^T y_j||^2 via the projected clouds; O(ndk + n^2 k).
Matrix projected_cost_matrix(const ProblemInstance& instance, const StiefelPoint& u);
Matrix projected_cost_matrix(const ProblemInstance& instance, const Matrix& projection);

// Entrywise pi_ij = exp(-M_ij/eta + u_i + v_j), exponentiated from the log
// representation. Throws numeric_error if any entry overflows.
TransportPlan plan_from_potentials(const PlanContext& ctx, const DualPotentials& pot);

// (phi, kappa) = (pi 1, pi^T 1); log-sum-exp aggregation when the plan carries
// its log representation.
std::pair<Vector, Vector> marginals(const TransportPlan& plan);

// ||phi - r||_1 + ||kappa - c||_1.
double feasibility_error_l1(const TransportPlan& plan, const Vector& r, const Vector& c);

// Closed-form block minimizers of g: u' = u + log(r ./ phi(pi(u,v,U))) and
// v' = v + log(c ./ kappa(pi(u,v,U))). After u_update the row marginals equal
// r exactly; after v_update the column marginals equal c and ||pi||_1 = 1.
DualPotentials u_update(const PlanContext& ctx, const DualPotentials& pot);
DualPotentials v_update(const PlanContext& ctx, const DualPotentials& pot);

// V_pi U without forming the d x d matrix V_pi:
//   X^T diag(phi) XU - X^T (pi YU) - Y^T (pi^T XU) + Y^T diag(kappa) YU.
Matrix vpi_apply(const ProblemInstance& instance, const TransportPlan& plan,
                 const StiefelPoint& u);
Matrix vpi_apply(const ProblemInstance& instance, const TransportPlan& plan,
                 const Matrix& projection);

// Debug path: the O(n^2 d^2) direct sum V_pi = sum_ij pi_ij (x_i-y_j)(x_i-y_j)^T,
// refused for d > 50.
Matrix vpi_dense(const ProblemInstance& instance, const TransportPlan& plan);

// g(u, v, U) = sum_ij pi(u,v,U)_ij - r^T u - c^T v, mass term via log-sum-exp.
double objective_g(const PlanContext& ctx, const DualPotentials& pot);

// f(pi, U) = <M, pi> with M the projected cost.
double transport_value(const ProblemInstance& instance, const TransportPlan& plan,
                       const StiefelPoint& u);

// Constant-shifted entropy H(pi) = -sum_ij (pi_ij log pi_ij - pi_ij), 0 log 0 = 0.
double entropy(const TransportPlan& plan);

// Rounding to the transportation polytope: diagonal scalings capped at one,
// then a rank-one correction. Output has marginals exactly (r, c) and satisfies
// ||out - pi||_1 <= 2 (||phi(pi) - r||_1 + ||kappa(pi) - c||_1).
TransportPlan round_to_polytope(const TransportPlan& plan, const Vector& r, const Vector& c);

struct RegOtResult {
    TransportPlan plan;
    DualPotentials potentials;
    int iterations = 0;
    bool converged = false;
    double marginal_error = 0.0;  // l1 violation at the returned iterate
};

// Entropic OT on a fixed cost matrix by alternating u/v updates until the l1
// marginal violation drops below tol. Non-convergence is reported through the
// flag; the best iterate is still returned.
RegOtResult sinkhorn_regot(const ProblemInstance& instance, const Matrix& cost,
                           double eta, double tol, int max_iter,
                           const DualPotentials* warm_start = nullptr);

// Dense "row,col,value" export; refused above n = 1000.
void export_plan_csv(const TransportPlan& plan, const std::string& path);

}  // namespace prw
