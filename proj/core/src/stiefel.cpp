#include "prw/stiefel.hpp"

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "prw/rng.hpp"

namespace prw {

namespace {

double orth_error(const Matrix& u) {
    const Index k = u.cols();
    return (u.transpose() * u - Matrix::Identity(k, k)).norm();
}

// Thin QR with R forced to have a positive diagonal, so the factorization
// (and hence the retraction) is a deterministic function of its input.
Matrix qr_orthonormalize(const Matrix& a, bool check_rank) {
    const Index k = a.cols();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Index j = 0; j < k; ++j) {
        const double diag = r(j, j);
        if (check_rank && std::abs(diag) < 1e-12 * std::max(1.0, a.norm()))
            throw numeric_error("rank-deficient QR factor in retraction; shrink the step");
        if (diag < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

// Closest orthonormal matrix in Frobenius norm (polar factor via SVD).
Matrix polar_orthonormalize(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

StiefelPoint StiefelPoint::from_matrix(Matrix u) {
    if (u.rows() < u.cols() || u.cols() < 1)
        throw invalid_input("Stiefel point needs 1 <= k <= d");
    if (!u.allFinite()) throw invalid_input("Stiefel point has non-finite entries");
    const double err = orth_error(u);
    if (err > 1e-6)
        throw invalid_input("matrix is too far from the Stiefel manifold: ||U^T U - I||_F = " +
                            std::to_string(err));
    if (err > 1e-10) u = polar_orthonormalize(u);
    return StiefelPoint(std::move(u), unchecked_t{});
}

StiefelPoint StiefelPoint::random(Index d, Index k, std::uint64_t seed) {
    if (k < 1 || k > d) throw invalid_input("random Stiefel point needs 1 <= k <= d");
    Rng rng(seed);
    return StiefelPoint(qr_orthonormalize(rng.gaussian_matrix(d, k), true), unchecked_t{});
}

double StiefelPoint::orthonormality_error() const { return orth_error(u_); }

TangentVector::TangentVector(Matrix xi, const StiefelPoint& base)
    : xi_(std::move(xi)), base_(base.matrix()) {
    if (xi_.rows() != base_.rows() || xi_.cols() != base_.cols())
        throw invalid_input("tangent vector shape does not match base point");
    const Matrix skew = xi_.transpose() * base_ + base_.transpose() * xi_;
    if (skew.norm() > 1e-10 * std::max(1.0, xi_.norm()))
        throw invalid_input("matrix is not tangent at the base point");
}

Matrix project_tangent_raw(const Matrix& u, const Matrix& g) {
    const Matrix utg = u.transpose() * g;
    return g - u * (0.5 * (utg + utg.transpose()));
}

TangentVector project_tangent(const StiefelPoint& u, const Matrix& g) {
    if (g.rows() != u.rows() || g.cols() != u.cols())
        throw invalid_input("gradient shape does not match Stiefel point");
    return TangentVector(project_tangent_raw(u.matrix(), g), u);
}

StiefelPoint retract(const StiefelPoint& u, const Matrix& xi, Retraction method) {
    const Matrix moved = u.matrix() + xi;
    Matrix out = method == Retraction::qr ? qr_orthonormalize(moved, true)
                                          : polar_orthonormalize(moved);
    return StiefelPoint(std::move(out), StiefelPoint::unchecked_t{});
}

StiefelPoint retract(const StiefelPoint& u, const TangentVector& xi, Retraction method) {
    if ((xi.base() - u.matrix()).norm() > 1e-12 * std::max(1.0, u.matrix().norm()))
        throw invalid_input("tangent vector is based at a different point");
    return retract(u, xi.matrix(), method);
}

RetractionConstants estimate_retraction_constants(Retraction method, Index d, Index k,
                                                  int trials, std::uint64_t seed) {
    Rng rng(seed);
    double l1 = 0.0, l2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        const StiefelPoint u = StiefelPoint::random(d, k, rng.next_u64());
        Matrix xi = project_tangent_raw(u.matrix(), rng.gaussian_matrix(d, k));
        const double norm = xi.norm();
        if (norm < 1e-12) continue;
        xi *= rng.uniform(0.05, 1.0) / norm;  // ||xi||_F <= 1
        const double xi_norm = xi.norm();
        const Matrix moved = retract(u, xi, method).matrix();
        l1 = std::max(l1, (moved - u.matrix()).norm() / xi_norm);
        l2 = std::max(l2, (moved - (u.matrix() + xi)).norm() / (xi_norm * xi_norm));
    }
    return {l1, l2};
}

}  // namespace prw
