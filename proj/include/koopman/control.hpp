#pragma once

#include "koopman/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace koopman {

// Continuous-time linearization x_dot = A (x - x_eq) + B u about an
// equilibrium x_eq.
struct LinearizedModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::VectorXd x_eq;
};

// Diagonal LQR weights: state cost diag(q) >= 0, control cost diag(r) > 0.
struct LqrWeights {
    Eigen::VectorXd q;
    Eigen::VectorXd r;
};

inline void validate(const LqrWeights& w) {
    if ((w.q.array() < 0.0).any())
        throw std::invalid_argument("LQR weights: Q diagonal entries must be >= 0");
    if (w.r.size() == 0 || (w.r.array() <= 0.0).any())
        throw std::invalid_argument("LQR weights: R diagonal entries must be > 0");
}

// State feedback u = -K (x - x_ref).
struct LqrController {
    Eigen::MatrixXd K; // l x n
    Eigen::VectorXd x_ref;

    double operator()(const Eigen::VectorXd& x) const { return -(K * (x - x_ref))(0, 0); }
};

namespace detail {

inline void check_equilibrium(const Eigen::VectorXd& residual) {
    if (residual.cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("linearize: x_eq is not an equilibrium (residual " +
                                    std::to_string(residual.cwiseAbs().maxCoeff()) + ")");
}

} // namespace detail

inline LinearizedModel linearize(const PendulumParams& p, const Eigen::VectorXd& x_eq) {
    validate(p);
    if (x_eq.size() != 2)
        throw std::invalid_argument("linearize: pendulum x_eq must have length 2");
    detail::check_equilibrium(pendulum_deriv(x_eq, 0.0, p));
    Eigen::MatrixXd A(2, 2), B(2, 1);
    A << 0.0, 1.0, (p.g / p.L) * std::cos(x_eq(0)), 0.0;
    B << 0.0, 1.0 / (p.m * p.L * p.L);
    return {A, B, x_eq};
}

// Analytic Jacobians at an equilibrium [., 0, theta*, 0] (sin(theta*) = 0,
// c = cos(theta*) = +/-1).
inline LinearizedModel linearize(const CartPoleParams& p, const Eigen::VectorXd& x_eq) {
    validate(p);
    if (x_eq.size() != 4)
        throw std::invalid_argument("linearize: cart-pole x_eq must have length 4");
    detail::check_equilibrium(cartpole_deriv(x_eq, 0.0, p));
    const double c = std::cos(x_eq(2));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 1);
    A(0, 1) = 1.0;
    A(1, 2) = -p.m * p.g * c * c / p.M;
    A(2, 3) = 1.0;
    A(3, 2) = (p.m + p.M) * p.g * c / (p.L * p.M);
    B(1, 0) = 1.0 / p.M;
    B(3, 0) = -c / (p.L * p.M);
    return {A, B, x_eq};
}

// Solves A'P + PA - P B R^-1 B' P + Q = 0 for the stabilizing P via the
// stable invariant subspace of the Hamiltonian matrix. The returned P is
// symmetric and satisfies the residual bound ||res||_F < 1e-8 (1 + ||P||_F).
inline Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                  const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
        R.cols() != B.cols())
        throw std::invalid_argument("solve_care: inconsistent matrix dimensions");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("solve_care: Q must be symmetric");
    if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("solve_care: R must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> r_chol(R);
    if (r_chol.info() != Eigen::Success)
        throw std::invalid_argument("solve_care: R must be positive definite");

    Eigen::MatrixXd H(2 * n, 2 * n);
    H << A, -B * r_chol.solve(B.transpose()), -Q, -A.transpose();

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(H.cast<std::complex<double>>());
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("solve_care: Hamiltonian eigendecomposition did not converge");

    // Stable invariant subspace; exactly n strictly stable eigenvalues exist
    // iff (A,B) is stabilizable and (A,Q) detectable.
    Eigen::MatrixXcd basis(2 * n, n);
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        if (eig.eigenvalues()(i).real() < 0.0) {
            if (count == n)
                throw std::runtime_error("solve_care: Hamiltonian has more than n stable eigenvalues");
            basis.col(count++) = eig.eigenvectors().col(i);
        }
    }
    if (count != n)
        throw std::runtime_error(
            "solve_care: pair is not stabilizable/detectable (Hamiltonian has " +
            std::to_string(count) + " stable eigenvalues, expected " + std::to_string(n) + ")");

    const Eigen::MatrixXcd X1 = basis.topRows(n);
    const Eigen::MatrixXcd X2 = basis.bottomRows(n);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1);
    if (!lu.isInvertible())
        throw std::runtime_error("solve_care: pair is not stabilizable (singular subspace basis)");
    Eigen::MatrixXd P = (X2 * lu.inverse()).real();
    P = 0.5 * (P + P.transpose().eval());

    const Eigen::MatrixXd residual =
        A.transpose() * P + P * A - P * B * r_chol.solve(B.transpose() * P) + Q;
    if (residual.norm() >= 1e-8 * (1.0 + P.norm()))
        throw std::runtime_error("solve_care: iteration did not converge (residual " +
                                 std::to_string(residual.norm()) + ")");
    return P;
}

// K = R^-1 B' P. The closed loop A - B K is verified Hurwitz.
inline LqrController lqr_gain(const LinearizedModel& model, const LqrWeights& weights,
                              const Eigen::VectorXd& x_ref) {
    validate(weights);
    const Eigen::Index n = model.A.rows();
    if (weights.q.size() != n)
        throw std::invalid_argument("lqr_gain: Q diagonal length must match state dimension");
    if (weights.r.size() != model.B.cols())
        throw std::invalid_argument("lqr_gain: R diagonal length must match input dimension");
    if (x_ref.size() != n)
        throw std::invalid_argument("lqr_gain: x_ref length must match state dimension");

    const Eigen::MatrixXd Q = weights.q.asDiagonal();
    const Eigen::MatrixXd R = weights.r.asDiagonal();
    const Eigen::MatrixXd P = solve_care(model.A, model.B, Q, R);
    const Eigen::MatrixXd K = R.llt().solve(model.B.transpose() * P);

    const Eigen::VectorXcd cl = (model.A - model.B * K).eigenvalues();
    if ((cl.real().array() >= 0.0).any())
        throw std::runtime_error("lqr_gain: closed loop is not Hurwitz");
    return {K, x_ref};
}

} // namespace koopman
