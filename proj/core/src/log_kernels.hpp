#pragma once

// Column-sweep log-sum-exp kernels over the shifted log kernel
// B_ij = A_ij + u_i + v_j. Internal to the core library. Entries of A may be
// -inf (empty plan rows aggregate to a -inf log marginal, never NaN).

#include <cmath>
#include <limits>

#include "prw/types.hpp"

namespace prw::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log phi_i = u_i + LSE_j(A_ij + v_j).
inline Vector log_row_marginals(const Matrix& a, const Vector& u, const Vector& v) {
    const Index n = a.rows();
    Vector m = Vector::Constant(n, kNegInf);
    for (Index j = 0; j < a.cols(); ++j)
        m.array() = m.array().max(a.col(j).array() + v[j]);
    Vector s = Vector::Zero(n);
    for (Index j = 0; j < a.cols(); ++j)
        s.array() += (a.col(j).array() + v[j] - m.array()).exp();
    Vector out = (u.array() + m.array() + s.array().log()).matrix();
    for (Index i = 0; i < n; ++i)
        if (m[i] == kNegInf) out[i] = kNegInf;
    return out;
}

// log kappa_j = v_j + LSE_i(A_ij + u_i).
inline Vector log_col_marginals(const Matrix& a, const Vector& u, const Vector& v) {
    Vector out(a.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        const auto col = a.col(j).array() + u.array();
        const double m = col.maxCoeff();
        out[j] = m == kNegInf ? kNegInf : v[j] + m + std::log((col - m).exp().sum());
    }
    return out;
}

// LSE over all entries of B.
inline double log_total_mass(const Matrix& a, const Vector& u, const Vector& v) {
    double m = kNegInf;
    for (Index j = 0; j < a.cols(); ++j)
        m = std::max(m, (a.col(j).array() + u.array()).maxCoeff() + v[j]);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (Index j = 0; j < a.cols(); ++j)
        s += (a.col(j).array() + u.array() + (v[j] - m)).exp().sum();
    return m + std::log(s);
}

// P = exp(B), and the largest log entry (overflow sentinel).
inline double fill_plan(const Matrix& a, const Vector& u, const Vector& v, Matrix& p) {
    p.resize(a.rows(), a.cols());
    double max_log = kNegInf;
    for (Index j = 0; j < a.cols(); ++j) {
        const auto b = a.col(j).array() + u.array() + v[j];
        max_log = std::max(max_log, b.maxCoeff());
        p.col(j) = b.exp();
    }
    return max_log;
}

}  // namespace prw::detail
