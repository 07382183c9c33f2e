#include <doctest.h>

#include "prw/rng.hpp"
#include "prw/stiefel.hpp"

using namespace prw;

namespace {

double frob_inner(const Matrix& a, const Matrix& b) {
    return (a.array() * b.array()).sum();
}

}  // namespace

TEST_SUITE("stiefel") {

TEST_CASE("project_tangent: d=2 k=1 closed form") {
    Matrix u(2, 1);
    u << 1.0, 0.0;
    Matrix g(2, 1);
    g << 3.0, 4.0;
    const TangentVector xi = project_tangent(StiefelPoint::from_matrix(u), g);
    CHECK(xi.matrix()(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(xi.matrix()(1, 0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("project_tangent is idempotent and orthogonal") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const StiefelPoint u = StiefelPoint::random(5, 2, rng.next_u64());
        const Matrix g = rng.gaussian_matrix(5, 2);
        const TangentVector xi = project_tangent(u, g);
        const TangentVector xi2 = project_tangent(u, xi.matrix());
        CHECK((xi.matrix() - xi2.matrix()).norm() <= 1e-12);
        // <xi, g - xi> = 0: the projection is orthogonal.
        CHECK(std::abs(frob_inner(xi.matrix(), g - xi.matrix())) <= 1e-10);
    }
}

TEST_CASE("project_tangent is self-adjoint") {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        const Index d = 3 + static_cast<Index>(rng.next_u64() % 18);
        const Index k = 1 + static_cast<Index>(rng.next_u64() % std::min<Index>(d, 4));
        const StiefelPoint u = StiefelPoint::random(d, k, rng.next_u64());
        const Matrix a = rng.gaussian_matrix(d, k);
        const Matrix b = rng.gaussian_matrix(d, k);
        const double lhs = frob_inner(project_tangent(u, a).matrix(), b);
        const double rhs = frob_inner(a, project_tangent(u, b).matrix());
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("tangency invariant rejected for non-tangent matrices") {
    const StiefelPoint u = StiefelPoint::random(4, 2, 1);
    CHECK_THROWS_AS(TangentVector(u.matrix(), u), invalid_input);  // xi = U is not tangent
}

TEST_CASE("retract at zero returns the base point") {
    Rng rng(5);
    const StiefelPoint u = StiefelPoint::random(6, 3, rng.next_u64());
    const Matrix zero = Matrix::Zero(6, 3);
    for (Retraction method : {Retraction::qr, Retraction::polar}) {
        const StiefelPoint moved = retract(u, zero, method);
        CHECK((moved.matrix() - u.matrix()).norm() <= 1e-12);
    }
}

TEST_CASE("retraction first-order remainder vanishes linearly") {
    Rng rng(6);
    const StiefelPoint u = StiefelPoint::random(7, 2, rng.next_u64());
    Matrix dir = project_tangent(u, rng.gaussian_matrix(7, 2)).matrix();
    dir /= dir.norm();
    for (Retraction method : {Retraction::qr, Retraction::polar}) {
        double prev_ratio = -1.0;
        for (double scale : {1e-1, 1e-2, 1e-3}) {
            const Matrix xi = scale * dir;
            const double ratio =
                (retract(u, xi, method).matrix() - (u.matrix() + xi)).norm() / scale;
            if (prev_ratio > 0.0) CHECK(ratio <= 0.3 * prev_ratio);
            prev_ratio = ratio;
        }
    }
}

TEST_CASE("polar retraction closed form for k=1") {
    Matrix u(2, 1);
    u << 1.0, 0.0;
    const StiefelPoint base = StiefelPoint::from_matrix(u);
    for (double t : {0.3, 1.5, 4.0}) {
        Matrix xi(2, 1);
        xi << 0.0, t;
        const Matrix moved = retract(base, xi, Retraction::polar).matrix();
        const double scale = std::sqrt(1.0 + t * t);
        CHECK(moved(0, 0) == doctest::Approx(1.0 / scale).epsilon(1e-12));
        CHECK(moved(1, 0) == doctest::Approx(t / scale).epsilon(1e-12));
    }
}

TEST_CASE("retraction output stays orthonormal for large steps") {
    Rng rng(7);
    for (Retraction method : {Retraction::qr, Retraction::polar}) {
        for (int t = 0; t < 10; ++t) {
            const StiefelPoint u = StiefelPoint::random(8, 3, rng.next_u64());
            Matrix xi = project_tangent(u, rng.gaussian_matrix(8, 3)).matrix();
            xi *= 10.0 / xi.norm();
            const StiefelPoint moved = retract(u, xi, method);
            CHECK(moved.orthonormality_error() <= 1e-10);
        }
    }
}

TEST_CASE("rank-deficient QR step is signalled") {
    Matrix u(2, 1);
    u << 1.0, 0.0;
    const StiefelPoint base = StiefelPoint::from_matrix(u);
    Matrix xi(2, 1);
    xi << -1.0, 0.0;  // U + xi = 0
    CHECK_THROWS_AS(retract(base, xi, Retraction::qr), numeric_error);
}

TEST_CASE("random_point is deterministic per seed") {
    const StiefelPoint a = StiefelPoint::random(6, 2, 42);
    const StiefelPoint b = StiefelPoint::random(6, 2, 42);
    const StiefelPoint c = StiefelPoint::random(6, 2, 43);
    CHECK(a.matrix() == b.matrix());
    CHECK(a.matrix() != c.matrix());
}

TEST_CASE("random_point full rank case is orthogonal with |det| = 1") {
    const StiefelPoint u = StiefelPoint::random(3, 3, 9);
    CHECK(u.orthonormality_error() <= 1e-10);
    CHECK(std::abs(std::abs(u.matrix().determinant()) - 1.0) <= 1e-10);
}

TEST_CASE("random_point rejects k > d") {
    CHECK_THROWS_AS(StiefelPoint::random(2, 3, 1), invalid_input);
}

TEST_CASE("random_point column space is uniform (Monte Carlo)") {
    Matrix mean = Matrix::Zero(2, 2);
    for (int t = 0; t < 1000; ++t) {
        const Matrix u = StiefelPoint::random(2, 1, 1000 + t).matrix();
        mean += u * u.transpose();
    }
    mean /= 1000.0;
    CHECK((mean - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("from_matrix repairs small deviations and rejects large ones") {
    Rng rng(8);
    const Matrix u = StiefelPoint::random(5, 2, rng.next_u64()).matrix();
    const Matrix bump = rng.gaussian_matrix(5, 2);

    const Matrix slightly_off = u + 1e-8 * bump;
    const StiefelPoint repaired = StiefelPoint::from_matrix(slightly_off);
    CHECK(repaired.orthonormality_error() <= 1e-10);

    const Matrix badly_off = u + 0.1 * bump;
    CHECK_THROWS_AS(StiefelPoint::from_matrix(badly_off), invalid_input);
}

TEST_CASE("empirical retraction constants are finite and modest") {
    for (Retraction method : {Retraction::qr, Retraction::polar}) {
        const RetractionConstants est =
            estimate_retraction_constants(method, 8, 3, 1000, 17);
        INFO("method=", method == Retraction::qr ? "qr" : "polar", " L1=", est.l1,
             " L2=", est.l2);
        CHECK(est.l1 > 0.0);
        CHECK(est.l2 > 0.0);
        CHECK(est.l1 <= 1.5);
        CHECK(est.l2 <= 1.5);
    }
}

}  // TEST_SUITE
