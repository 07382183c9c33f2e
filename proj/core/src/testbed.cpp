#include "prw/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prw/rng.hpp"
#include "prw/transport.hpp"

namespace prw {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

DiscreteMeasure uniform_measure(Matrix points) {
    const Index n = points.rows();
    return DiscreteMeasure(PointCloud(std::move(points)),
                           Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

}  // namespace

std::pair<ProblemInstance, GroundTruth> gen_fragmented_hypercube(Index n, Index d,
                                                                 Index k_star,
                                                                 std::uint64_t seed) {
    if (k_star < 1 || k_star > d)
        throw invalid_input("fragmented hypercube needs 1 <= k_star <= d");
    if (n < 1) throw invalid_input("n must be positive");
    Rng rng(seed);
    Matrix x = rng.uniform_matrix(n, d, -1.0, 1.0);
    Matrix y = rng.uniform_matrix(n, d, -1.0, 1.0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < k_star; ++j) y(i, j) += 2.0 * sign(y(i, j));

    Matrix u_star = Matrix::Zero(d, k_star);
    u_star.topLeftCorner(k_star, k_star).setIdentity();

    GroundTruth truth{4.0 * static_cast<double>(k_star),
                      StiefelPoint::from_matrix(std::move(u_star)), k_star};
    return {ProblemInstance(uniform_measure(std::move(x)), uniform_measure(std::move(y))),
            std::move(truth)};
}

ProblemInstance gen_wishart_gaussian(Index n, Index d, Index k_star, double noise_sigma,
                                     std::uint64_t seed) {
    if (k_star < 1 || k_star > d)
        throw invalid_input("wishart gaussian needs 1 <= k_star <= d");
    if (n < 1) throw invalid_input("n must be positive");
    if (noise_sigma < 0.0) throw invalid_input("noise_sigma must be nonnegative");
    Rng rng(seed);
    const Matrix a1 = rng.gaussian_matrix(d, k_star);
    const Matrix a2 = rng.gaussian_matrix(d, k_star);
    // x = A z gives cov(x) = A A^T, a rank-k_star Wishart draw.
    Matrix x = rng.gaussian_matrix(n, k_star) * a1.transpose();
    Matrix y = rng.gaussian_matrix(n, k_star) * a2.transpose();
    if (noise_sigma > 0.0) {
        x += noise_sigma * rng.gaussian_matrix(n, d);
        y += noise_sigma * rng.gaussian_matrix(n, d);
    }
    return ProblemInstance(uniform_measure(std::move(x)), uniform_measure(std::move(y)));
}

AssignmentResult permutation_ot_oracle(const Matrix& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw invalid_input("cost matrix must be square");
    if (n > 8) throw invalid_input("permutation oracle refused for n > 8");

    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<Index> best = perm;
    double best_sum = std::numeric_limits<double>::infinity();
    do {
        double sum = 0.0;
        for (Index i = 0; i < n; ++i) sum += cost(i, perm[i]);
        if (sum < best_sum) {
            best_sum = sum;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    return {best_sum / static_cast<double>(n), std::move(best)};
}

ReferenceValue reference_wasserstein(const ProblemInstance& instance, double rel_eta) {
    if (!(rel_eta > 0.0 && rel_eta <= 1e-2))
        throw invalid_input("rel_eta must lie in (0, 1e-2]");
    const double cost_sup = instance.cost_sup();
    if (cost_sup == 0.0) return {0.0, 0.0};

    const Matrix cost = instance.cost_matrix();
    const double eta = rel_eta * cost_sup;
    const RegOtResult inner = sinkhorn_regot(instance, cost, eta, rel_eta, 200000);
    if (!inner.converged)
        throw numeric_error("reference Wasserstein solve did not converge (l1 error " +
                            std::to_string(inner.marginal_error) + ")");
    const TransportPlan rounded =
        round_to_polytope(inner.plan, instance.mu().weights(), instance.nu().weights());
    const double value = (cost.array() * rounded.matrix().array()).sum();
    const double bound =
        eta * (2.0 * std::log(static_cast<double>(instance.size())) + 1.0) +
        2.0 * cost_sup * inner.marginal_error;
    return {value, bound};
}

double subspace_error(const StiefelPoint& u_hat, const StiefelPoint& u_star) {
    if (u_hat.rows() != u_star.rows())
        throw invalid_input("subspace error needs matching ambient dimensions");
    const double cross = (u_hat.matrix().transpose() * u_star.matrix()).squaredNorm();
    const double sq = static_cast<double>(u_hat.cols()) +
                      static_cast<double>(u_star.cols()) - 2.0 * cross;
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace prw
