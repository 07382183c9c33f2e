#pragma once

#include <cstdint>

#include "prw/types.hpp"

namespace prw {

enum class Retraction { qr, polar };

// A d x k matrix with orthonormal columns. Construction re-orthonormalizes
// inputs whose deviation ||U^T U - I||_F lies in (1e-10, 1e-6] and rejects
// anything farther from the manifold.
class StiefelPoint {
public:
    static StiefelPoint from_matrix(Matrix u);

    // QR of an i.i.d. Gaussian matrix with the sign convention below, which
    // makes the column space Haar-uniform and the draw deterministic per seed.
    static StiefelPoint random(Index d, Index k, std::uint64_t seed);

    Index rows() const { return u_.rows(); }
    Index cols() const { return u_.cols(); }
    const Matrix& matrix() const { return u_; }

    // ||U^T U - I||_F of the stored matrix (diagnostic).
    double orthonormality_error() const;

private:
    struct unchecked_t {};
    StiefelPoint(Matrix u, unchecked_t) : u_(std::move(u)) {}
    friend StiefelPoint retract(const StiefelPoint&, const Matrix&, Retraction);
    Matrix u_;
};

// Tangent vector xi at a base point, satisfying xi^T U + U^T xi = 0.
class TangentVector {
public:
    TangentVector(Matrix xi, const StiefelPoint& base);

    const Matrix& matrix() const { return xi_; }
    const Matrix& base() const { return base_; }
    double norm() const { return xi_.norm(); }

private:
    Matrix xi_;
    Matrix base_;
};

// Orthogonal projection of an ambient gradient onto the tangent space:
// G - U sym(U^T G) with sym(A) = (A + A^T)/2.
TangentVector project_tangent(const StiefelPoint& u, const Matrix& g);

// Same formula without constructing a TangentVector (solver hot path).
Matrix project_tangent_raw(const Matrix& u, const Matrix& g);

StiefelPoint retract(const StiefelPoint& u, const TangentVector& xi, Retraction method);
StiefelPoint retract(const StiefelPoint& u, const Matrix& xi, Retraction method);

struct RetractionConstants {
    double l1;  // sup ||Retr_U(xi) - U||_F / ||xi||_F
    double l2;  // sup ||Retr_U(xi) - (U + xi)||_F / ||xi||_F^2
};

// Empirical estimates over random (U, xi) pairs with ||xi||_F <= 1.
RetractionConstants estimate_retraction_constants(Retraction method, Index d, Index k,
                                                  int trials, std::uint64_t seed);

}  // namespace prw
