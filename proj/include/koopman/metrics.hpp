#pragma once

#include "koopman/dynamics.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace koopman {

// Statewise reconstruction-error summary against a reference trajectory.
// relative_rmse divides by the per-state RMS of the reference over the full
// window and is zero where that RMS vanishes.
struct ErrorReport {
    Eigen::VectorXd per_state_rmse;
    Eigen::VectorXd relative_rmse;
    Eigen::MatrixXd pointwise; // reconstruction - reference, n x m
    Eigen::VectorXd max_abs;
};

inline ErrorReport compare(const Trajectory& reference, const Eigen::MatrixXd& reconstruction) {
    if (reconstruction.rows() != reference.dim() || reconstruction.cols() != reference.samples())
        throw std::invalid_argument("compare: reconstruction shape does not match reference");
    if (!reference.states.allFinite() || !reconstruction.allFinite())
        throw std::invalid_argument("compare: inputs must be finite");

    ErrorReport report;
    report.pointwise = reconstruction - reference.states;
    const double m = static_cast<double>(reference.samples());
    report.per_state_rmse = (report.pointwise.array().square().rowwise().sum() / m).sqrt();
    const Eigen::VectorXd ref_rms =
        (reference.states.array().square().rowwise().sum() / m).sqrt();
    report.relative_rmse =
        (ref_rms.array() < 1e-300)
            .select(Eigen::VectorXd::Zero(reference.dim()),
                    report.per_state_rmse.array() / ref_rms.array().max(1e-300));
    report.max_abs = report.pointwise.cwiseAbs().rowwise().maxCoeff();
    return report;
}

} // namespace koopman
