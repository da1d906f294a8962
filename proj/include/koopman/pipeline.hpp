#pragma once

#include "koopman/control.hpp"
#include "koopman/dmd.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/metrics.hpp"
#include "koopman/model_io.hpp"
#include "koopman/snapshots.hpp"
#include "koopman/trajectory_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace koopman {

enum class SystemKind { Pendulum, CartPole };
enum class Method { Dmd, Edmd };

inline SystemKind system_from_string(const std::string& name) {
    if (name == "pendulum")
        return SystemKind::Pendulum;
    if (name == "cartpole")
        return SystemKind::CartPole;
    throw std::invalid_argument("unknown system '" + name + "' (supported: pendulum, cartpole)");
}

inline Method method_from_string(const std::string& name) {
    if (name == "dmd")
        return Method::Dmd;
    if (name == "edmd")
        return Method::Edmd;
    throw std::invalid_argument("unknown method '" + name + "' (supported: dmd, edmd)");
}

// LQR setup for a simulation: diagonal weights plus the regulation target.
struct ControlSpec {
    Eigen::VectorXd q;
    Eigen::VectorXd r;
    Eigen::VectorXd x_ref;
};

// One full experiment: simulate, fit, reconstruct on the training window,
// and report errors. Output paths may be empty to skip the file.
struct RunSpec {
    SystemKind system = SystemKind::Pendulum;
    PendulumParams pendulum;
    CartPoleParams cartpole;
    Eigen::VectorXd x0;
    double dt = 0.01;
    int steps = 1000;
    std::optional<ControlSpec> control;

    Method method = Method::Dmd;
    BasisKind basis_kind = BasisKind::Polynomial;
    int basis_order = 2;
    std::optional<Eigen::Index> rank;

    std::string trajectory_path;
    std::string model_path;
    std::string reconstruction_path;
    std::string metrics_path;
};

inline Eigen::Index system_dim(SystemKind system) {
    return system == SystemKind::Pendulum ? 2 : 4;
}

inline Dynamics make_dynamics(const RunSpec& spec) {
    return spec.system == SystemKind::Pendulum ? pendulum_dynamics(spec.pendulum)
                                               : cartpole_dynamics(spec.cartpole);
}

// The pendulum is regulated about its upright point [0, 0]; the cart-pole
// about [x_ref, 0, pi, 0].
inline LqrController make_controller(const RunSpec& spec, const ControlSpec& control) {
    const Eigen::Index n = system_dim(spec.system);
    if (control.x_ref.size() != n)
        throw std::invalid_argument("control: x_ref length must be " + std::to_string(n));
    LinearizedModel lin;
    if (spec.system == SystemKind::Pendulum) {
        lin = linearize(spec.pendulum, Eigen::VectorXd::Zero(2));
    } else {
        Eigen::VectorXd x_eq(4);
        x_eq << control.x_ref(0), 0.0, M_PI, 0.0;
        lin = linearize(spec.cartpole, x_eq);
    }
    return lqr_gain(lin, {control.q, control.r}, control.x_ref);
}

inline void validate_run_spec(const RunSpec& spec) {
    const Eigen::Index n = system_dim(spec.system);
    if (spec.x0.size() != n)
        throw std::invalid_argument("x0 length " + std::to_string(spec.x0.size()) +
                                    " does not match system dimension " + std::to_string(n));
    if (!(spec.dt > 0.0))
        throw std::invalid_argument("dt must be positive");
    if (spec.steps < 1)
        throw std::invalid_argument("steps must be >= 1");
    if (spec.control) {
        if (spec.control->q.size() != n)
            throw std::invalid_argument("control: Q diagonal length must be " + std::to_string(n));
        if (spec.control->r.size() != 1)
            throw std::invalid_argument("control: R diagonal length must be 1");
        validate(LqrWeights{spec.control->q, spec.control->r});
        if (spec.control->x_ref.size() != n)
            throw std::invalid_argument("control: x_ref length must be " + std::to_string(n));
    }
    if (spec.method == Method::Edmd && spec.basis_order < 1)
        throw std::invalid_argument("basis order must be >= 1");
}

inline Trajectory run_simulate(const RunSpec& spec) {
    validate_run_spec(spec);
    Controller controller;
    if (spec.control)
        controller = make_controller(spec, *spec.control);
    Trajectory traj = simulate(make_dynamics(spec), spec.x0, spec.dt, spec.steps, controller);
    if (!spec.trajectory_path.empty())
        save_trajectory(traj, spec.trajectory_path);
    return traj;
}

// One row of the printed eigenvalue table.
struct EigenvalueRow {
    std::complex<double> lambda;
    std::complex<double> omega;
    bool omega_defined = true;
};

struct FitReport {
    Eigen::Index rank = 0;
    std::vector<EigenvalueRow> eigenvalues;
    AnyModel model;
};

inline FitReport fit_from_trajectory(const Trajectory& traj, Method method, BasisKind basis_kind,
                                     int basis_order, std::optional<Eigen::Index> rank) {
    FitReport report;
    if (method == Method::Dmd) {
        report.model = fit_dmd(build_snapshots(traj), rank);
    } else {
        const Dictionary dict(basis_kind, basis_order, static_cast<int>(traj.dim()));
        report.model = fit_edmd(traj, dict, rank);
    }
    const DmdModel& inner = std::holds_alternative<DmdModel>(report.model)
                                ? std::get<DmdModel>(report.model)
                                : std::get<EdmdModel>(report.model).inner;
    report.rank = inner.r;
    for (Eigen::Index j = 0; j < inner.r; ++j)
        report.eigenvalues.push_back(
            {inner.Lambda(j), inner.Omega(j), inner.omega_defined[static_cast<size_t>(j)]});
    return report;
}

struct FitArgs {
    std::string in;
    std::string out;
    Method method = Method::Dmd;
    BasisKind basis_kind = BasisKind::Polynomial;
    int basis_order = 2;
    std::optional<Eigen::Index> rank;
};

inline FitReport run_fit(const FitArgs& args) {
    const Trajectory traj = load_trajectory(args.in);
    FitReport report =
        fit_from_trajectory(traj, args.method, args.basis_kind, args.basis_order, args.rank);
    if (!args.out.empty())
        std::visit([&](const auto& model) { save_model(model, args.out); }, report.model);
    return report;
}

inline nlohmann::json to_json(const ErrorReport& report) {
    nlohmann::json j;
    j["per_state_rmse"] = std::vector<double>(report.per_state_rmse.begin(),
                                              report.per_state_rmse.end());
    j["relative_rmse"] = std::vector<double>(report.relative_rmse.begin(),
                                             report.relative_rmse.end());
    j["max_abs"] = std::vector<double>(report.max_abs.begin(), report.max_abs.end());
    j["pointwise"] = detail::to_json(report.pointwise);
    return j;
}

inline void save_error_report(const ErrorReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("save_error_report: cannot open '" + path + "' for writing");
    out << to_json(report).dump(2) << '\n';
}

// Reconstruction CSV: same layout as a trajectory file, no input columns.
inline void save_reconstruction(const Eigen::MatrixXd& recon, double dt, const std::string& path) {
    Trajectory traj;
    traj.dt = dt;
    traj.states = recon;
    save_trajectory(traj, path);
}

inline Eigen::Index model_state_dim(const AnyModel& model) {
    if (std::holds_alternative<DmdModel>(model))
        return std::get<DmdModel>(model).dim();
    return std::get<EdmdModel>(model).dictionary.n;
}

inline Eigen::MatrixXd reconstruct_any(const AnyModel& model, const std::vector<double>& times) {
    if (std::holds_alternative<DmdModel>(model))
        return reconstruct(std::get<DmdModel>(model), times);
    return reconstruct_states(std::get<EdmdModel>(model), times);
}

struct ReconstructArgs {
    std::string model;
    std::string ref;
    std::string out;
    std::string metrics;
};

inline ErrorReport run_reconstruct(const ReconstructArgs& args) {
    const AnyModel model = load_model(args.model);
    const Trajectory ref = load_trajectory(args.ref);
    if (model_state_dim(model) != ref.dim())
        throw std::invalid_argument("reconstruct: model state dimension " +
                                    std::to_string(model_state_dim(model)) +
                                    " does not match trajectory dimension " +
                                    std::to_string(ref.dim()));
    std::vector<double> times(static_cast<size_t>(ref.samples()));
    for (size_t k = 0; k < times.size(); ++k)
        times[k] = static_cast<double>(k) * ref.dt;

    const Eigen::MatrixXd recon = reconstruct_any(model, times);
    const ErrorReport report = compare(ref, recon);
    if (!args.out.empty())
        save_reconstruction(recon, ref.dt, args.out);
    if (!args.metrics.empty())
        save_error_report(report, args.metrics);
    return report;
}

struct EigenPairRow {
    std::complex<double> lambda;
    double linearity = 0.0;
};

struct EigenArgs {
    std::string in;
    BasisKind basis_kind = BasisKind::Polynomial;
    int basis_order = 2;
    int top = 5;
    std::string json_out;
};

inline std::vector<EigenPairRow> run_eigen(const EigenArgs& args) {
    if (args.top < 1)
        throw std::invalid_argument("eigen: --top must be >= 1");
    const Trajectory traj = load_trajectory(args.in);
    const Dictionary dict(args.basis_kind, args.basis_order, static_cast<int>(traj.dim()));
    const KoopmanEigenfunctions funcs = koopman_eigenfunctions(traj, dict);

    std::vector<EigenPairRow> rows;
    const size_t count = std::min<size_t>(static_cast<size_t>(args.top), funcs.pairs.size());
    for (size_t i = 0; i < count; ++i)
        rows.push_back({funcs.pairs[i].lambda, linearity_residual(funcs.pairs[i], dict, traj)});

    if (!args.json_out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (size_t i = 0; i < count; ++i) {
            nlohmann::json entry;
            entry["lambda"] = {rows[i].lambda.real(), rows[i].lambda.imag()};
            entry["linearity_residual"] = rows[i].linearity;
            nlohmann::json xi = nlohmann::json::array();
            for (Eigen::Index k = 0; k < funcs.pairs[i].xi.size(); ++k)
                xi.push_back({funcs.pairs[i].xi(k).real(), funcs.pairs[i].xi(k).imag()});
            entry["xi"] = std::move(xi);
            j.push_back(std::move(entry));
        }
        std::ofstream out(args.json_out);
        if (!out)
            throw std::invalid_argument("eigen: cannot open '" + args.json_out + "' for writing");
        out << j.dump(2) << '\n';
    }
    return rows;
}

// Full pipeline for one RunSpec: simulate, fit, reconstruct on the training
// window, compare.
struct RunOutcome {
    Trajectory trajectory;
    FitReport fit;
    ErrorReport errors;
};

inline RunOutcome run_spec(const RunSpec& spec) {
    validate_run_spec(spec);
    RunOutcome outcome;
    outcome.trajectory = run_simulate(spec);
    outcome.fit = fit_from_trajectory(outcome.trajectory, spec.method, spec.basis_kind,
                                      spec.basis_order, spec.rank);
    if (!spec.model_path.empty())
        std::visit([&](const auto& model) { save_model(model, spec.model_path); },
                   outcome.fit.model);

    std::vector<double> times(static_cast<size_t>(outcome.trajectory.samples()));
    for (size_t k = 0; k < times.size(); ++k)
        times[k] = static_cast<double>(k) * outcome.trajectory.dt;
    const Eigen::MatrixXd recon = reconstruct_any(outcome.fit.model, times);
    if (!spec.reconstruction_path.empty())
        save_reconstruction(recon, outcome.trajectory.dt, spec.reconstruction_path);
    outcome.errors = compare(outcome.trajectory, recon);
    if (!spec.metrics_path.empty())
        save_error_report(outcome.errors, spec.metrics_path);
    return outcome;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j[static_cast<size_t>(i)].get<double>();
    return v;
}

// RunSpec JSON: {"system", "x0", "dt", "steps", "params"?, "control"?,
// "method", "basis"?, "rank"?, "output"?}.
inline RunSpec parse_run_spec(const nlohmann::json& j) {
    RunSpec spec;
    spec.system = system_from_string(j.at("system").get<std::string>());
    spec.x0 = vector_from_json(j.at("x0"));
    if (j.contains("dt"))
        spec.dt = j.at("dt").get<double>();
    if (j.contains("steps"))
        spec.steps = j.at("steps").get<int>();
    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (spec.system == SystemKind::Pendulum) {
            if (p.contains("m")) spec.pendulum.m = p.at("m").get<double>();
            if (p.contains("L")) spec.pendulum.L = p.at("L").get<double>();
            if (p.contains("g")) spec.pendulum.g = p.at("g").get<double>();
        } else {
            if (p.contains("m")) spec.cartpole.m = p.at("m").get<double>();
            if (p.contains("M")) spec.cartpole.M = p.at("M").get<double>();
            if (p.contains("L")) spec.cartpole.L = p.at("L").get<double>();
            if (p.contains("g")) spec.cartpole.g = p.at("g").get<double>();
        }
    }
    if (j.contains("control") && !j.at("control").is_null()) {
        const auto& c = j.at("control");
        spec.control = ControlSpec{vector_from_json(c.at("q")), vector_from_json(c.at("r")),
                                   vector_from_json(c.at("x_ref"))};
    }
    if (j.contains("method"))
        spec.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("basis")) {
        spec.basis_kind = basis_kind_from_string(j.at("basis").at("kind").get<std::string>());
        spec.basis_order = j.at("basis").at("order").get<int>();
    }
    if (j.contains("rank") && !j.at("rank").is_null()) {
        if (j.at("rank").is_string()) {
            if (j.at("rank").get<std::string>() != "auto")
                throw std::invalid_argument("rank must be \"auto\" or a positive integer");
        } else {
            spec.rank = j.at("rank").get<Eigen::Index>();
        }
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (o.contains("trajectory")) spec.trajectory_path = o.at("trajectory").get<std::string>();
        if (o.contains("model")) spec.model_path = o.at("model").get<std::string>();
        if (o.contains("reconstruction"))
            spec.reconstruction_path = o.at("reconstruction").get<std::string>();
        if (o.contains("metrics")) spec.metrics_path = o.at("metrics").get<std::string>();
    }
    return spec;
}

inline RunSpec load_run_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open spec file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("spec file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_spec(j);
}

} // namespace koopman
