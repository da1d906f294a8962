#pragma once

#include "koopman/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace koopman {

// Benchmark sweep defaults: 10 s at dt = 0.01 (1001 samples). The pendulum
// is released at pi/4 from upright; its LQR run regulates to upright with
// Q = diag(0, 10), R = 1. The controlled cart-pole translates from
// [-1,0,pi,0] to [1,0,pi,0] with Q = diag(5,10,0,0), R = 1. The uncontrolled
// cart-pole releases the pole 0.3 rad from the upward vertical so the free
// response actually swings ([-1,0,pi,0] is an equilibrium and would produce
// constant data).
inline constexpr double kReproDt = 0.01;
inline constexpr int kReproSteps = 1000;

struct ReproCell {
    std::string system;
    std::string control;
    std::string method;
    bool ok = false;
    std::string message;
    Eigen::VectorXd relative_rmse;
    double max_relative_rmse = 0.0;

    std::string name() const { return system + "_" + control + "_" + method; }
};

namespace detail {

struct ReproMethod {
    std::string label;
    Method method;
    BasisKind basis_kind;
    int basis_order;
    bool full_rank; // explicit rank = p ("no truncation")
};

inline const std::vector<ReproMethod>& repro_methods() {
    static const std::vector<ReproMethod> methods = {
        {"dmd", Method::Dmd, BasisKind::Polynomial, 0, false},
        {"edmd_poly2", Method::Edmd, BasisKind::Polynomial, 2, false},
        {"edmd_poly3", Method::Edmd, BasisKind::Polynomial, 3, true},
        {"edmd_fourier1", Method::Edmd, BasisKind::Fourier, 1, false},
        {"edmd_fourier2", Method::Edmd, BasisKind::Fourier, 2, false},
    };
    return methods;
}

} // namespace detail

inline RunSpec repro_cell_spec(SystemKind system, bool controlled,
                               const detail::ReproMethod& method, const std::string& outdir) {
    RunSpec spec;
    spec.system = system;
    spec.dt = kReproDt;
    spec.steps = kReproSteps;
    if (system == SystemKind::Pendulum) {
        spec.x0 = Eigen::Vector2d(M_PI / 4.0, 0.0);
        if (controlled) {
            ControlSpec control;
            control.q = Eigen::Vector2d(0.0, 10.0);
            control.r = Eigen::VectorXd::Ones(1);
            control.x_ref = Eigen::Vector2d::Zero();
            spec.control = control;
        }
    } else {
        if (controlled) {
            spec.x0 = Eigen::Vector4d(-1.0, 0.0, M_PI, 0.0);
            ControlSpec control;
            control.q = Eigen::Vector4d(5.0, 10.0, 0.0, 0.0);
            control.r = Eigen::VectorXd::Ones(1);
            control.x_ref = Eigen::Vector4d(1.0, 0.0, M_PI, 0.0);
            spec.control = control;
        } else {
            spec.x0 = Eigen::Vector4d(-1.0, 0.0, 0.3, 0.0);
        }
    }
    spec.method = method.method;
    spec.basis_kind = method.basis_kind;
    spec.basis_order = method.basis_order;
    if (method.full_rank && method.method == Method::Edmd)
        spec.rank = Dictionary(method.basis_kind, method.basis_order,
                               static_cast<int>(system_dim(system)))
                        .p();

    const std::string stem =
        (system == SystemKind::Pendulum ? std::string("pendulum") : std::string("cartpole")) +
        "_" + (controlled ? "lqr" : "uncontrolled") + "_" + method.label;
    spec.trajectory_path = outdir + "/" + stem + "_traj.csv";
    spec.reconstruction_path = outdir + "/" + stem + "_recon.csv";
    spec.metrics_path = outdir + "/" + stem + "_metrics.json";
    return spec;
}

inline std::string repro_summary_markdown(const std::vector<ReproCell>& cells) {
    std::ostringstream out;
    out << "# Reconstruction sweep summary\n\n";
    out << "Relative RMSE per state (reconstruction vs. training data), 10 s at dt = 0.01.\n\n";
    out << "| cell | relative RMSE per state | max | status |\n";
    out << "|------|-------------------------|-----|--------|\n";
    for (const ReproCell& cell : cells) {
        out << "| " << cell.name() << " | ";
        if (cell.ok) {
            for (Eigen::Index i = 0; i < cell.relative_rmse.size(); ++i)
                out << (i ? " " : "") << detail::format_double(cell.relative_rmse(i));
            out << " | " << detail::format_double(cell.max_relative_rmse) << " | ok |\n";
        } else {
            out << "- | - | failed: " << cell.message << " |\n";
        }
    }
    return out.str();
}

// Runs the 2 x 2 x 5 sweep, writing one trajectory CSV, reconstruction CSV,
// and metrics JSON per cell plus summary.md. Cell failures are recorded in
// the summary rather than aborting the sweep.
inline std::vector<ReproCell> run_repro(const std::string& outdir) {
    std::filesystem::create_directories(outdir);

    std::vector<ReproCell> cells;
    for (const SystemKind system : {SystemKind::Pendulum, SystemKind::CartPole}) {
        for (const bool controlled : {false, true}) {
            for (const auto& method : detail::repro_methods()) {
                ReproCell cell;
                cell.system = system == SystemKind::Pendulum ? "pendulum" : "cartpole";
                cell.control = controlled ? "lqr" : "uncontrolled";
                cell.method = method.label;
                try {
                    const RunSpec spec = repro_cell_spec(system, controlled, method, outdir);
                    const RunOutcome outcome = run_spec(spec);
                    cell.relative_rmse = outcome.errors.relative_rmse;
                    cell.max_relative_rmse = outcome.errors.relative_rmse.maxCoeff();
                    cell.ok = true;
                } catch (const std::exception& e) {
                    cell.message = e.what();
                }
                cells.push_back(std::move(cell));
            }
        }
    }

    std::ofstream summary(outdir + "/summary.md");
    if (!summary)
        throw std::invalid_argument("run_repro: cannot open '" + outdir + "/summary.md'");
    summary << repro_summary_markdown(cells);
    return cells;
}

} // namespace koopman
