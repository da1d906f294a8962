#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace koopman {

// Inverted pendulum: point mass m on a rigid massless rod of length L.
// State is [theta, theta_dot] with theta measured from the upright position,
// so [0, 0] is the (unstable) upright equilibrium and [pi, 0] hangs down.
struct PendulumParams {
    double m = 1.0;  // mass [kg]
    double L = 2.0;  // arm length [m]
    double g = 9.81; // gravity [m/s^2]
};

// Cart-pole: cart of mass M on a frictionless track, pendulum mass m on a
// rigid rod of length L. State is [x, x_dot, theta, theta_dot] with theta
// measured from the upward vertical; [., 0, k*pi, 0] are the equilibria.
struct CartPoleParams {
    double m = 1.0;  // pendulum mass [kg]
    double M = 5.0;  // cart mass [kg]
    double L = 2.0;  // arm length [m]
    double g = 9.81; // gravity [m/s^2]
};

// Uniformly sampled state (and optionally input) history. Column k of
// `states` is the sample at time k*dt.
struct Trajectory {
    double dt = 0.0;
    Eigen::MatrixXd states;                 // n x m, one column per sample
    std::optional<Eigen::MatrixXd> inputs;  // l x m when present

    Eigen::Index dim() const { return states.rows(); }
    Eigen::Index samples() const { return states.cols(); }
};

inline void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
    if (!v.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

inline void validate(const PendulumParams& p) {
    if (!(p.m > 0.0 && p.L > 0.0 && p.g > 0.0))
        throw std::invalid_argument("pendulum params: m, L, g must be positive");
}

inline void validate(const CartPoleParams& p) {
    if (!(p.m > 0.0 && p.M > 0.0 && p.L > 0.0 && p.g > 0.0))
        throw std::invalid_argument("cart-pole params: m, M, L, g must be positive");
}

// theta_ddot = (g/L) sin(theta) + u / (m L^2); torque enters the theta_dot
// equation only.
inline Eigen::VectorXd pendulum_deriv(const Eigen::Ref<const Eigen::VectorXd>& state, double u,
                                      const PendulumParams& p) {
    if (state.size() != 2)
        throw std::invalid_argument("pendulum state must have length 2");
    require_finite(state, "pendulum state");
    if (!std::isfinite(u))
        throw std::invalid_argument("pendulum input: non-finite entry");
    validate(p);
    Eigen::VectorXd dx(2);
    dx << state(1), (p.g / p.L) * std::sin(state(0)) + u / (p.m * p.L * p.L);
    return dx;
}

// Frictionless cart-pole with force u on the cart:
//   D        = m L^2 (M + m sin^2(theta))
//   x_ddot   = [ -m^2 L^2 g cos(th) sin(th) + m L^2 (m L th_dot^2 sin(th)) + m L^2 u ] / D
//   th_ddot  = [ (m+M) m g L sin(th) - m L cos(th) (m L th_dot^2 sin(th)) - m L cos(th) u ] / D
inline Eigen::VectorXd cartpole_deriv(const Eigen::Ref<const Eigen::VectorXd>& state, double u,
                                      const CartPoleParams& p) {
    if (state.size() != 4)
        throw std::invalid_argument("cart-pole state must have length 4");
    require_finite(state, "cart-pole state");
    if (!std::isfinite(u))
        throw std::invalid_argument("cart-pole input: non-finite entry");
    validate(p);
    const double th = state(2), thd = state(3);
    const double s = std::sin(th), c = std::cos(th);
    const double mL = p.m * p.L;
    const double D = p.m * p.L * p.L * (p.M + p.m * s * s);
    const double centripetal = mL * thd * thd * s;
    const double x_dd = (-p.m * p.m * p.L * p.L * p.g * c * s + p.m * p.L * p.L * centripetal +
                         p.m * p.L * p.L * u) /
                        D;
    const double th_dd = ((p.m + p.M) * p.m * p.g * p.L * s - mL * c * centripetal - mL * c * u) / D;
    Eigen::VectorXd dx(4);
    dx << state(1), x_dd, thd, th_dd;
    return dx;
}

// Classical 4th-order Runge-Kutta step; the input u is held constant over
// the step (zero-order hold).
template <class Deriv>
Eigen::VectorXd rk4_step(Deriv&& deriv, const Eigen::VectorXd& state, double u, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("rk4_step: dt must be positive");
    const Eigen::VectorXd k1 = deriv(state, u);
    const Eigen::VectorXd k2 = deriv(state + 0.5 * dt * k1, u);
    const Eigen::VectorXd k3 = deriv(state + 0.5 * dt * k2, u);
    const Eigen::VectorXd k4 = deriv(state + dt * k3, u);
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// A simulatable system: state dimension plus the derivative rule.
struct Dynamics {
    Eigen::Index n = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> deriv;
};

inline Dynamics pendulum_dynamics(const PendulumParams& p = {}) {
    validate(p);
    return {2, [p](const Eigen::VectorXd& x, double u) { return pendulum_deriv(x, u, p); }};
}

inline Dynamics cartpole_dynamics(const CartPoleParams& p = {}) {
    validate(p);
    return {4, [p](const Eigen::VectorXd& x, double u) { return cartpole_deriv(x, u, p); }};
}

using Controller = std::function<double(const Eigen::VectorXd&)>;

// Fixed-step RK4 rollout for steps+1 samples. The controller, when given,
// is evaluated once per sample and held over the step; recorded inputs are
// zero otherwise. Any state entry exceeding 1e8 in magnitude aborts.
inline Trajectory simulate(const Dynamics& sys, const Eigen::VectorXd& x0, double dt, int steps,
                           const Controller& controller = nullptr) {
    if (steps < 1)
        throw std::invalid_argument("simulate: steps must be >= 1");
    if (!(dt > 0.0))
        throw std::invalid_argument("simulate: dt must be positive");
    if (x0.size() != sys.n)
        throw std::invalid_argument("simulate: x0 length " + std::to_string(x0.size()) +
                                    " does not match system dimension " + std::to_string(sys.n));
    require_finite(x0, "simulate: x0");

    const Eigen::Index m = steps + 1;
    Trajectory traj;
    traj.dt = dt;
    traj.states.resize(sys.n, m);
    traj.inputs = Eigen::MatrixXd::Zero(1, m);

    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k < m; ++k) {
        if (x.cwiseAbs().maxCoeff() > 1e8)
            throw std::runtime_error("simulate: state diverged at step " + std::to_string(k));
        const double u = controller ? controller(x) : 0.0;
        traj.states.col(k) = x;
        (*traj.inputs)(0, k) = u;
        if (k + 1 < m)
            x = rk4_step(sys.deriv, x, u, dt);
    }
    return traj;
}

} // namespace koopman
