#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "prw/measures.hpp"
#include "prw/stiefel.hpp"
#include "prw/types.hpp"

namespace prw {

// Analytic answers attached to a generated instance. For the fragmented
// hypercube the squared Wasserstein distance is exactly 4 k_star and the
// optimal subspace is spanned by the first k_star canonical basis vectors.
struct GroundTruth {
    double wasserstein_sq = 0.0;
    std::optional<StiefelPoint> U_star;
    Index k_star = 0;
};

// Uniform sample of [-1,1]^d versus its pushforward under
// T(x) = x + 2 sign(x) (.) sum_{k<=k_star} e_k, with uniform weights.
std::pair<ProblemInstance, GroundTruth> gen_fragmented_hypercube(Index n, Index d,
                                                                 Index k_star,
                                                                 std::uint64_t seed);

// Two zero-mean Gaussian clouds with rank-k_star Wishart covariances
// (Sigma = A A^T, A a d x k_star standard Gaussian matrix), plus optional
// isotropic noise of standard deviation noise_sigma.
ProblemInstance gen_wishart_gaussian(Index n, Index d, Index k_star, double noise_sigma,
                                     std::uint64_t seed);

struct AssignmentResult {
    double value = 0.0;
    std::vector<Index> assignment;  // row i matched to column assignment[i]
};

// Exact OT for uniform marginals by enumerating all n! permutations (Birkhoff
// extremality). Refused above n = 8.
AssignmentResult permutation_ot_oracle(const Matrix& cost);

struct ReferenceValue {
    double value = 0.0;
    double gap_bound = 0.0;  // a-priori |value - W^2| bound
};

// High-precision entropic estimate of W^2 at eta = rel_eta * ||C||_inf,
// rounded to exact feasibility.
ReferenceValue reference_wasserstein(const ProblemInstance& instance, double rel_eta);

// ||U_hat U_hat^T - U_star U_star^T||_F via the trace identity
// k_hat + k_star - 2 ||U_hat^T U_star||_F^2 (no d x d intermediates).
double subspace_error(const StiefelPoint& u_hat, const StiefelPoint& u_star);

}  // namespace prw
