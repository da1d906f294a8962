#pragma once

#include "koopman/dynamics.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace koopman {

// Paired data matrices: column j of Xp is the sample one step after column j
// of X. Both are n x (m-1) for a trajectory of m samples.
struct SnapshotPair {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Xp;
    double dt = 0.0;
};

// Input columns of the trajectory, if any, are ignored.
inline SnapshotPair build_snapshots(const Trajectory& traj) {
    const Eigen::Index m = traj.samples();
    if (m < 2)
        throw std::invalid_argument("build_snapshots: trajectory needs at least 2 samples");
    SnapshotPair snap;
    snap.X = traj.states.leftCols(m - 1);
    snap.Xp = traj.states.rightCols(m - 1);
    snap.dt = traj.dt;
    return snap;
}

} // namespace koopman
