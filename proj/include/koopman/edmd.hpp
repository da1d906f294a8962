#pragma once

#include "koopman/dmd.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace koopman {

enum class BasisKind {
    Polynomial, // constant + all monomials of total degree 1..order, graded-lex
    Fourier,    // raw states + sin/cos harmonics 1..order per coordinate
    States,     // raw states only (degenerate basis, reduces EDMD to DMD)
};

inline std::string to_string(BasisKind kind) {
    switch (kind) {
    case BasisKind::Polynomial: return "polynomial";
    case BasisKind::Fourier: return "fourier";
    case BasisKind::States: return "states";
    }
    throw std::logic_error("unreachable basis kind");
}

inline BasisKind basis_kind_from_string(const std::string& name) {
    if (name == "polynomial")
        return BasisKind::Polynomial;
    if (name == "fourier")
        return BasisKind::Fourier;
    if (name == "states")
        return BasisKind::States;
    throw std::invalid_argument("unknown basis '" + name +
                                "' (supported: polynomial, fourier, states)");
}

// Declarative lifting basis: maps a state x in R^n to the observable vector
// Theta(x) in R^p. The raw states are always present, so original states can
// be recovered from lifted data by row extraction.
//
// Polynomial entries are ordered constant first, then monomials by total
// degree and graded-lexicographically within a degree (x1^2, x1 x2, x2^2).
// Fourier entries are [x_1..x_n, sin(k x_i), cos(k x_i)] with the harmonic k
// as the outer index.
struct Dictionary {
    BasisKind kind = BasisKind::Polynomial;
    int order = 1; // total degree d, or harmonic count q
    int n = 0;     // state dimension

    Dictionary() = default;
    Dictionary(BasisKind kind_, int order_, int n_) : kind(kind_), order(order_), n(n_) {
        if (n < 1)
            throw std::invalid_argument("dictionary: state dimension must be >= 1");
        if (order < 1)
            throw std::invalid_argument("dictionary: order must be >= 1");
    }

    Eigen::Index p() const {
        switch (kind) {
        case BasisKind::Polynomial: {
            // C(n + d, d)
            Eigen::Index count = 1;
            for (int i = 1; i <= order; ++i)
                count = count * (n + i) / i;
            return count;
        }
        case BasisKind::Fourier:
            return static_cast<Eigen::Index>(n) + 2 * static_cast<Eigen::Index>(order) * n;
        case BasisKind::States:
            return n;
        }
        throw std::logic_error("unreachable basis kind");
    }

    // Indices of the raw-state entries within the lifted vector.
    std::vector<Eigen::Index> state_rows() const {
        std::vector<Eigen::Index> rows(static_cast<size_t>(n));
        const Eigen::Index offset = kind == BasisKind::Polynomial ? 1 : 0;
        std::iota(rows.begin(), rows.end(), offset);
        return rows;
    }

    // Monomial exponent tuples in lifted-entry order (polynomial kind only).
    std::vector<std::vector<int>> monomial_exponents() const {
        std::vector<std::vector<int>> exps;
        std::vector<int> current(static_cast<size_t>(n), 0);
        for (int deg = 0; deg <= order; ++deg)
            append_exponents(deg, 0, current, exps);
        return exps;
    }

private:
    void append_exponents(int remaining, int var, std::vector<int>& current,
                          std::vector<std::vector<int>>& out) const {
        if (var == n - 1) {
            current[static_cast<size_t>(var)] = remaining;
            out.push_back(current);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            current[static_cast<size_t>(var)] = k;
            append_exponents(remaining - k, var + 1, current, out);
        }
    }
};

inline Eigen::VectorXd lift(const Dictionary& dict, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != dict.n)
        throw std::invalid_argument("lift: state length " + std::to_string(x.size()) +
                                    " does not match dictionary dimension " +
                                    std::to_string(dict.n));
    require_finite(x, "lift: state");

    Eigen::VectorXd y(dict.p());
    switch (dict.kind) {
    case BasisKind::Polynomial: {
        const auto exps = dict.monomial_exponents();
        for (size_t i = 0; i < exps.size(); ++i) {
            double value = 1.0;
            for (int j = 0; j < dict.n; ++j)
                for (int k = 0; k < exps[i][static_cast<size_t>(j)]; ++k)
                    value *= x(j);
            y(static_cast<Eigen::Index>(i)) = value;
        }
        break;
    }
    case BasisKind::Fourier: {
        y.head(dict.n) = x;
        Eigen::Index row = dict.n;
        for (int k = 1; k <= dict.order; ++k) {
            for (int i = 0; i < dict.n; ++i) {
                y(row++) = std::sin(k * x(i));
                y(row++) = std::cos(k * x(i));
            }
        }
        break;
    }
    case BasisKind::States:
        y = x;
        break;
    }
    return y;
}

inline SnapshotPair lift_snapshots(const Dictionary& dict, const SnapshotPair& snap) {
    if (snap.X.rows() != dict.n)
        throw std::invalid_argument("lift_snapshots: snapshot dimension does not match dictionary");
    SnapshotPair lifted;
    lifted.dt = snap.dt;
    lifted.X.resize(dict.p(), snap.X.cols());
    lifted.Xp.resize(dict.p(), snap.Xp.cols());
    for (Eigen::Index j = 0; j < snap.X.cols(); ++j) {
        lifted.X.col(j) = lift(dict, snap.X.col(j));
        lifted.Xp.col(j) = lift(dict, snap.Xp.col(j));
    }
    return lifted;
}

// DMD fitted on lifted snapshots; state_rows locates the identity
// observables used for state recovery.
struct EdmdModel {
    Dictionary dictionary;
    DmdModel inner;
    std::vector<Eigen::Index> state_rows;
    bool conditioning_warning = false; // p exceeded the snapshot count
};

inline EdmdModel fit_edmd(const Trajectory& traj, const Dictionary& dict,
                          std::optional<Eigen::Index> rank = {}) {
    if (traj.samples() < 3)
        throw std::invalid_argument("fit_edmd: trajectory needs at least 3 samples");
    const SnapshotPair snap = build_snapshots(traj);
    const SnapshotPair lifted = lift_snapshots(dict, snap);

    EdmdModel model;
    model.dictionary = dict;
    model.inner = fit_dmd(lifted, rank);
    model.state_rows = dict.state_rows();
    model.conditioning_warning = dict.p() > lifted.X.cols();
    return model;
}

// Approximate Koopman eigenfunction phi(x) = Theta(x) . xi with
// phi(f(x)) ~ lambda phi(x).
struct KoopmanEigenpair {
    std::complex<double> lambda;
    Eigen::VectorXcd xi; // unit norm
};

struct KoopmanEigenfunctions {
    std::vector<KoopmanEigenpair> pairs; // descending |lambda|
    bool rank_deficient = false;         // minimum-norm pseudoinverse was rank deficient
};

namespace detail {

inline Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& A, bool& rank_deficient) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > kSvTruncation * sv(0))
        ++keep;
    rank_deficient = keep < std::min(A.rows(), A.cols());
    return svd.matrixV().leftCols(keep) * sv.head(keep).cwiseInverse().asDiagonal() *
           svd.matrixU().leftCols(keep).transpose();
}

} // namespace detail

// Eigenpairs of Theta(X)^+ Theta(X') with samples as rows, i.e. right
// eigenvectors of the transpose of the lifted best-fit operator.
inline KoopmanEigenfunctions koopman_eigenfunctions(const Trajectory& traj,
                                                    const Dictionary& dict) {
    if (traj.samples() < 3)
        throw std::invalid_argument("koopman_eigenfunctions: trajectory needs at least 3 samples");
    const SnapshotPair lifted = lift_snapshots(dict, build_snapshots(traj));

    KoopmanEigenfunctions out;
    const Eigen::MatrixXd pinvY = detail::pseudoinverse(lifted.X, out.rank_deficient);
    const Eigen::MatrixXd M = (lifted.Xp * pinvY).transpose();

    Eigen::EigenSolver<Eigen::MatrixXd> eig(M);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("koopman_eigenfunctions: eigendecomposition failed");

    const Eigen::Index p = M.rows();
    std::vector<Eigen::Index> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXcd& lambda = eig.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
        const double ma = std::abs(lambda(a)), mc = std::abs(lambda(c));
        if (ma != mc)
            return ma > mc;
        return lambda(a).imag() > lambda(c).imag();
    });

    out.pairs.reserve(static_cast<size_t>(p));
    for (const Eigen::Index idx : order) {
        KoopmanEigenpair pair;
        pair.lambda = lambda(idx);
        pair.xi = eig.eigenvectors().col(idx);
        pair.xi /= pair.xi.norm();
        Eigen::Index imax = 0;
        pair.xi.cwiseAbs().maxCoeff(&imax);
        const std::complex<double> pivot = pair.xi(imax);
        if (std::abs(pivot) > 0.0)
            pair.xi *= std::abs(pivot) / pivot;
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

// || phi(X') - lambda phi(X) ||_2 / max(|| phi(X) ||_2, 1e-300) with phi
// applied columnwise over the trajectory's snapshot pair.
inline double linearity_residual(const KoopmanEigenpair& pair, const Dictionary& dict,
                                 const Trajectory& traj) {
    const SnapshotPair lifted = lift_snapshots(dict, build_snapshots(traj));
    const Eigen::RowVectorXcd phi_X = pair.xi.transpose() * lifted.X.cast<std::complex<double>>();
    const Eigen::RowVectorXcd phi_Xp = pair.xi.transpose() * lifted.Xp.cast<std::complex<double>>();
    return (phi_Xp - pair.lambda * phi_X).norm() / std::max(phi_X.norm(), 1e-300);
}

// Lifted reconstruction with the raw-state rows extracted.
inline Eigen::MatrixXd reconstruct_states(const EdmdModel& model, const std::vector<double>& times) {
    const Eigen::MatrixXd lifted = reconstruct(model.inner, times);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(model.state_rows.size()), lifted.cols());
    for (size_t i = 0; i < model.state_rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = lifted.row(model.state_rows[i]);
    return out;
}

} // namespace koopman
