#pragma once

#include "koopman/snapshots.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <complex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace koopman {

// Relative singular-value threshold: sigma_i below 1e-10 * sigma_1 are
// discarded even when an explicit rank asks for more.
inline constexpr double kSvTruncation = 1e-10;

// Discrete eigenvalues with |lambda| below this have no continuous-time
// counterpart and are excluded from reconstruction.
inline constexpr double kZeroEigenvalue = 1e-12;

// Thin SVD truncated to rank r, singular values descending.
struct SvdFactors {
    Eigen::MatrixXd U;  // n x r
    Eigen::VectorXd S;  // r, strictly positive
    Eigen::MatrixXd V;  // cols x r
    Eigen::Index r = 0;
};

// rank = nullopt keeps every sigma_i > 1e-10 * sigma_1; an explicit rank is
// honored up to that same floor.
inline SvdFactors truncated_svd(const Eigen::MatrixXd& X, std::optional<Eigen::Index> rank = {}) {
    if (X.size() == 0 || X.norm() == 0.0)
        throw std::invalid_argument("truncated_svd: input matrix is zero");
    const Eigen::Index max_rank = std::min(X.rows(), X.cols());
    if (rank && (*rank < 1 || *rank > max_rank))
        throw std::invalid_argument("truncated_svd: explicit rank " + std::to_string(*rank) +
                                    " outside [1, " + std::to_string(max_rank) + "]");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > kSvTruncation * sv(0))
        ++keep;
    const Eigen::Index r = rank ? std::min(*rank, keep) : keep;

    SvdFactors f;
    f.U = svd.matrixU().leftCols(r);
    f.S = sv.head(r);
    f.V = svd.matrixV().leftCols(r);
    f.r = r;
    return f;
}

// Minimum-norm least-squares solve; rank_deficient is set when the matrix
// rank falls short of its column count.
struct LeastSquares {
    Eigen::VectorXcd x;
    double residual = 0.0;
    bool rank_deficient = false;
};

inline LeastSquares solve_least_squares(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
    cod.setThreshold(kSvTruncation);
    LeastSquares out;
    out.x = cod.solve(b);
    out.residual = (A * out.x - b).norm();
    out.rank_deficient = cod.rank() < A.cols();
    return out;
}

// Rank-r linear model of the snapshot map Xp ~ A X:
//   A_tilde = U' Xp V S^-1        (reduced operator)
//   Phi     = Xp V S^-1 W         (exact modes, unit columns)
//   Omega_k = log(Lambda_k) / dt  (principal branch)
// Columns are ordered by descending |Lambda|, ties by descending imaginary
// part; mode phases are fixed so the largest-magnitude entry is real-positive.
struct DmdModel {
    Eigen::Index r = 0;
    Eigen::MatrixXd A_tilde;          // r x r
    Eigen::VectorXcd Lambda;          // r discrete eigenvalues
    Eigen::MatrixXcd W;               // r x r eigenvectors of A_tilde
    Eigen::MatrixXcd Phi;             // n x r DMD modes
    Eigen::VectorXcd Omega;           // r continuous eigenvalues
    std::vector<bool> omega_defined;  // false where |Lambda| < 1e-12
    Eigen::VectorXcd b;               // r mode amplitudes, Phi b ~ x_1
    double amplitude_residual = 0.0;
    bool amplitudes_warning = false;  // Phi was rank deficient; b is minimum-norm
    double dt = 0.0;
    Eigen::MatrixXd U;                // n x r projection basis
    bool rank_clamped = false;        // explicit rank reduced by the sigma floor

    Eigen::Index dim() const { return Phi.rows(); }
};

// b solves Phi b = x1 in the least-squares sense (Phi is generally tall and
// complex); x1 is the first snapshot column.
inline LeastSquares amplitudes(const Eigen::MatrixXcd& Phi, const Eigen::VectorXd& x1) {
    if (Phi.rows() != x1.size())
        throw std::invalid_argument("amplitudes: mode rows do not match state length");
    return solve_least_squares(Phi, x1.cast<std::complex<double>>());
}

inline DmdModel fit_dmd(const SnapshotPair& snap, std::optional<Eigen::Index> rank = {}) {
    if (snap.X.rows() != snap.Xp.rows() || snap.X.cols() != snap.Xp.cols())
        throw std::invalid_argument("fit_dmd: snapshot matrices must have identical shape");
    if (!(snap.dt > 0.0))
        throw std::invalid_argument("fit_dmd: snapshot dt must be positive");

    const SvdFactors svd = truncated_svd(snap.X, rank);

    DmdModel model;
    model.r = svd.r;
    model.dt = snap.dt;
    model.U = svd.U;
    model.rank_clamped = rank && svd.r < *rank;

    const Eigen::MatrixXd XpVSinv = snap.Xp * svd.V * svd.S.cwiseInverse().asDiagonal();
    model.A_tilde = svd.U.transpose() * XpVSinv;

    Eigen::EigenSolver<Eigen::MatrixXd> eig(model.A_tilde);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("fit_dmd: eigendecomposition of the reduced operator failed");
    Eigen::VectorXcd lambda = eig.eigenvalues();
    Eigen::MatrixXcd W = eig.eigenvectors();

    if (lambda.cwiseAbs().maxCoeff() < kZeroEigenvalue)
        throw std::runtime_error("fit_dmd: all eigenvalues are zero");

    // Deterministic ordering: descending |lambda|, ties by descending imag.
    std::vector<Eigen::Index> order(static_cast<size_t>(model.r));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
        const double ma = std::abs(lambda(a)), mc = std::abs(lambda(c));
        if (ma != mc)
            return ma > mc;
        return lambda(a).imag() > lambda(c).imag();
    });

    model.Lambda.resize(model.r);
    model.W.resize(model.r, model.r);
    for (Eigen::Index j = 0; j < model.r; ++j) {
        model.Lambda(j) = lambda(order[static_cast<size_t>(j)]);
        model.W.col(j) = W.col(order[static_cast<size_t>(j)]);
    }

    model.Phi = XpVSinv.cast<std::complex<double>>() * model.W;
    for (Eigen::Index j = 0; j < model.r; ++j) {
        const double norm = model.Phi.col(j).norm();
        if (norm > 0.0)
            model.Phi.col(j) /= norm;
        Eigen::Index imax = 0;
        model.Phi.col(j).cwiseAbs().maxCoeff(&imax);
        const std::complex<double> pivot = model.Phi(imax, j);
        if (std::abs(pivot) > 0.0)
            model.Phi.col(j) *= std::abs(pivot) / pivot;
    }

    model.Omega.resize(model.r);
    model.omega_defined.assign(static_cast<size_t>(model.r), true);
    for (Eigen::Index j = 0; j < model.r; ++j) {
        if (std::abs(model.Lambda(j)) < kZeroEigenvalue) {
            model.Omega(j) = 0.0;
            model.omega_defined[static_cast<size_t>(j)] = false;
        } else {
            model.Omega(j) = std::log(model.Lambda(j)) / snap.dt;
        }
    }

    const LeastSquares amp = amplitudes(model.Phi, snap.X.col(0));
    model.b = amp.x;
    model.amplitude_residual = amp.residual;
    model.amplitudes_warning = amp.rank_deficient;
    return model;
}

// Least-squares expansion of a sample in mode coordinates, Phi c ~ x_k.
inline LeastSquares mode_coefficients(const DmdModel& model, const Eigen::VectorXd& x_k) {
    if (x_k.size() != model.dim())
        throw std::invalid_argument("mode_coefficients: state length does not match model");
    return solve_least_squares(model.Phi, x_k.cast<std::complex<double>>());
}

// x(t) = sum_k phi_k exp(omega_k t) b_k over the modes with defined omega.
// The imaginary residue of every entry must stay below 1e-6 (1 + |value|);
// it is then discarded.
inline Eigen::MatrixXd reconstruct(const DmdModel& model, const std::vector<double>& times) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < model.r; ++j)
        if (model.omega_defined[static_cast<size_t>(j)])
            active.push_back(j);
    if (active.empty())
        throw std::runtime_error("reconstruct: no modes with defined continuous eigenvalues");

    Eigen::MatrixXd out(model.dim(), static_cast<Eigen::Index>(times.size()));
    Eigen::VectorXcd col(model.dim());
    for (size_t t = 0; t < times.size(); ++t) {
        col.setZero();
        for (const Eigen::Index j : active)
            col += model.Phi.col(j) * (std::exp(model.Omega(j) * times[t]) * model.b(j));
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (std::abs(col(i).imag()) >= 1e-6 * (1.0 + std::abs(col(i))))
                throw std::runtime_error("reconstruct: imaginary residue too large at state " +
                                         std::to_string(i) + ", time index " + std::to_string(t));
        }
        out.col(static_cast<Eigen::Index>(t)) = col.real();
    }
    return out;
}

} // namespace koopman
