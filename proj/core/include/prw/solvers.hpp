#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prw/measures.hpp"
#include "prw/stiefel.hpp"
#include "prw/transport.hpp"
#include "prw/types.hpp"

namespace prw {

enum class Algorithm { rbcd, rabcd, rgas, ragas };
enum class ParamMode { practical, theory };

const char* algorithm_name(Algorithm algo);
Algorithm algorithm_from_name(const std::string& name);

struct SolverConfig {
    Index k = 2;           // projection dimension (ignored when U0 is supplied)
    double eta = 0.2;      // practical mode only; theory mode derives it
    double tau = 0.005;    // practical mode only
    double eps1 = 0.1;
    double eps2 = 0.1;     // requires eps1 >= eps2 > 0
    int max_iter = 20000;
    Retraction retraction = Retraction::qr;
    ParamMode mode = ParamMode::practical;
    double alpha = 1e-3;   // adaptive weight floor (rabcd/ragas)
    double beta = 0.8;     // adaptive averaging factor
    std::uint64_t seed = 0;
    // Retraction constants entering the theory-mode step size. No canonical
    // values exist, so they are configuration; the defaults sit above the
    // empirical estimates for both retractions (measured L1 <= 1.02,
    // L2 <= 0.60 over random tangent directions with ||xi|| <= 1).
    double l1 = 1.1;
    double l2 = 0.7;
    double inner_tol = 0.0;      // rgas/ragas inner l1 tolerance; 0 -> eps2/(16 ||C||_inf)
    int inner_max_iter = 100000;
    bool deterministic = true;   // fixed reduction order (always honored)

    void validate() const;
};

// Step size and regularization actually used by a solve, after applying the
// theory-mode formulas when requested.
struct ResolvedParams {
    double eta = 0.0;
    double tau = 0.0;
    double rho = 0.0;        // theory mode only, else 0
    double inner_tol = 0.0;  // rgas/ragas only, else 0
};

ResolvedParams resolve_params(const SolverConfig& config, const ProblemInstance& instance,
                              Index k, Algorithm algo);

struct TraceRecord {
    int iter = 0;
    double g = 0.0;          // g(u^{t+1}, v^{t+1}, U^t)
    double grad_norm = 0.0;  // ||xi||_F (rbcd/rgas) or ||G||_F (adaptive)
    double err_row = 0.0;    // ||r - phi||_2 at the stopping-rule state
    double err_col = 0.0;    // ||c - kappa||_1 at the stopping-rule state
    double wall_ms = 0.0;
};

struct PhaseTimings {
    double sinkhorn_ms = 0.0;
    double gradient_ms = 0.0;
    double retraction_ms = 0.0;
    double total_ms = 0.0;
};

// Adaptive preconditioner state (rabcd/ragas). p_hat and q_hat are clamped
// running maxima and therefore entrywise non-decreasing across iterations.
struct AdaptiveState {
    Vector p, p_hat;  // length d
    Vector q, q_hat;  // length k
};

struct SolveProgress {
    int iter;
    double g, grad_norm, err_row, err_col;
    const AdaptiveState* adaptive;  // null for rbcd/rgas
};
using ProgressObserver = std::function<void(const SolveProgress&)>;

struct SolveResult {
    StiefelPoint U_hat;
    TransportPlan pi_hat;  // rounded, feasible
    double prw_value = 0.0;
    DualPotentials potentials;  // (u_hat, v_hat) whose plan was rounded
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRecord> trace;
    int trace_stride = 1;
    PhaseTimings timings;
    double final_g = 0.0;
    ResolvedParams params;  // effective eta/tau for provenance
};

SolveResult rbcd(const ProblemInstance& instance, const SolverConfig& config,
                 const StiefelPoint* u0 = nullptr, const ProgressObserver& observer = {});
SolveResult rabcd(const ProblemInstance& instance, const SolverConfig& config,
                  const StiefelPoint* u0 = nullptr, const ProgressObserver& observer = {});
SolveResult rgas(const ProblemInstance& instance, const SolverConfig& config,
                 const StiefelPoint* u0 = nullptr, const ProgressObserver& observer = {});
SolveResult ragas(const ProblemInstance& instance, const SolverConfig& config,
                  const StiefelPoint* u0 = nullptr, const ProgressObserver& observer = {});

SolveResult solve(Algorithm algo, const ProblemInstance& instance, const SolverConfig& config,
                  const StiefelPoint* u0 = nullptr, const ProgressObserver& observer = {});

// Riemannian gradient of f(pi, .) at U: Proj_{T_U}(2 V_pi U).
Matrix grad_f(const ProblemInstance& instance, const TransportPlan& plan,
              const StiefelPoint& u);

// Riemannian gradient of g(u, v, .) at the context projection:
// Proj_{T_U}(-(2/eta) V_pi U) with pi = pi(u, v, U).
Matrix grad_g(const PlanContext& ctx, const DualPotentials& pot);

struct StationarityReport {
    double grad_norm = 0.0;   // ||grad_U f(pi_hat, U_hat)||_F
    double primal_gap = 0.0;  // f(pi_hat, U_hat) - (oracle estimate of min_pi f)
    double oracle_bound = 0.0;  // a-priori slack of the oracle estimate
    bool oracle_converged = false;
};

// Checks the two stationarity inequalities by re-deriving both quantities
// from the returned (pi_hat, U_hat); the inner minimum is estimated with a
// high-precision entropic solve at eta_ref = oracle_tol * ||C||_inf.
StationarityReport stationarity_report(const ProblemInstance& instance,
                                       const SolveResult& result, double oracle_tol);

nlohmann::json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolveResult& result, bool include_trace = true);

}  // namespace prw
