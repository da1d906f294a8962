// Command-line pipeline: simulate the benchmark systems, fit DMD/EDMD
// models, reconstruct trajectories, inspect Koopman eigenfunctions, and run
// the full benchmark sweep.

#include "koopman/koopman.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

Eigen::VectorXd parse_vector(const std::string& text) {
    std::vector<double> values;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        size_t consumed = 0;
        values.push_back(std::stod(token, &consumed));
        if (consumed != token.size())
            throw std::invalid_argument("invalid number '" + token + "' in vector argument");
    }
    if (values.empty())
        throw std::invalid_argument("empty vector argument");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::pair<koopman::BasisKind, int> parse_basis(const std::string& text) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("basis must be <kind>:<order>, e.g. poly:2 or fourier:1");
    const std::string kind = text.substr(0, colon);
    const int order = std::stoi(text.substr(colon + 1));
    if (kind == "poly" || kind == "polynomial")
        return {koopman::BasisKind::Polynomial, order};
    if (kind == "fourier")
        return {koopman::BasisKind::Fourier, order};
    throw std::invalid_argument("unknown basis '" + kind + "' (supported: poly, fourier)");
}

std::optional<Eigen::Index> parse_rank(const std::string& text) {
    if (text == "auto")
        return std::nullopt;
    const long r = std::stol(text);
    if (r < 1)
        throw std::invalid_argument("rank must be \"auto\" or a positive integer");
    return static_cast<Eigen::Index>(r);
}

void print_state(const char* label, const Eigen::VectorXd& x) {
    std::printf("%s [", label);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        std::printf("%s%.10g", i ? ", " : "", x(i));
    std::printf("]\n");
}

void print_fit_report(const koopman::FitReport& report) {
    std::printf("rank: %ld\n", static_cast<long>(report.rank));
    std::printf("%4s  %12s  %12s  %28s\n", "#", "|lambda|", "arg(lambda)", "omega [1/s]");
    for (size_t i = 0; i < report.eigenvalues.size(); ++i) {
        const auto& row = report.eigenvalues[i];
        if (row.omega_defined)
            std::printf("%4zu  %12.8f  %12.8f  %14.8f %+14.8fi\n", i + 1, std::abs(row.lambda),
                        std::arg(row.lambda), row.omega.real(), row.omega.imag());
        else
            std::printf("%4zu  %12.8f  %12.8f  %28s\n", i + 1, std::abs(row.lambda),
                        std::arg(row.lambda), "undefined (lambda ~ 0)");
    }
}

struct SimulateOptions {
    std::string system = "pendulum";
    std::string x0;
    double dt = 0.01;
    int steps = 1000;
    std::string control = "none";
    std::string q, r = "1", xref;
    double m = 1.0, M = 5.0, L = 2.0, g = 9.81;
    std::string out;
};

int cmd_simulate(const SimulateOptions& opt) {
    koopman::RunSpec spec;
    spec.system = koopman::system_from_string(opt.system);
    spec.pendulum = {opt.m, opt.L, opt.g};
    spec.cartpole = {opt.m, opt.M, opt.L, opt.g};
    spec.x0 = parse_vector(opt.x0);
    spec.dt = opt.dt;
    spec.steps = opt.steps;
    if (opt.control == "lqr") {
        if (opt.q.empty() || opt.xref.empty())
            throw std::invalid_argument("--control lqr requires --q and --xref");
        spec.control = koopman::ControlSpec{parse_vector(opt.q), parse_vector(opt.r),
                                            parse_vector(opt.xref)};
    } else if (opt.control != "none") {
        throw std::invalid_argument("unknown controller '" + opt.control +
                                    "' (supported: none, lqr)");
    }
    spec.trajectory_path = opt.out;

    const koopman::Trajectory traj = koopman::run_simulate(spec);
    std::printf("samples: %ld  dt: %g\n", static_cast<long>(traj.samples()), traj.dt);
    print_state("final state:", traj.states.col(traj.samples() - 1));
    if (!opt.out.empty())
        std::printf("wrote %s\n", opt.out.c_str());
    return 0;
}

int cmd_run(const std::string& spec_path) {
    const koopman::RunSpec spec = koopman::load_run_spec(spec_path);
    const koopman::RunOutcome outcome = koopman::run_spec(spec);
    std::printf("samples: %ld  dt: %g\n", static_cast<long>(outcome.trajectory.samples()),
                outcome.trajectory.dt);
    print_fit_report(outcome.fit);
    print_state("relative RMSE per state:", outcome.errors.relative_rmse);
    return 0;
}

int cmd_repro(const std::string& outdir) {
    const std::vector<koopman::ReproCell> cells = koopman::run_repro(outdir);
    std::printf("%-40s  %12s  %s\n", "cell", "max rel RMSE", "status");
    bool any_failed = false;
    for (const auto& cell : cells) {
        if (cell.ok) {
            std::printf("%-40s  %12.6g  ok\n", cell.name().c_str(), cell.max_relative_rmse);
        } else {
            std::printf("%-40s  %12s  failed: %s\n", cell.name().c_str(), "-",
                        cell.message.c_str());
            any_failed = true;
        }
    }
    std::printf("wrote %s/summary.md\n", outdir.c_str());
    // Cell-level failures are data, not infrastructure errors; they are
    // recorded in the summary and do not change the exit code.
    (void)any_failed;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman-style linear model identification for the pendulum and cart-pole"};
    app.require_subcommand(1);

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "integrate a benchmark system to CSV");
    simulate->add_option("--system", sim.system, "pendulum | cartpole");
    simulate->add_option("--x0", sim.x0, "initial state, comma separated")->required();
    simulate->add_option("--dt", sim.dt, "step size [s]");
    simulate->add_option("--steps", sim.steps, "number of integration steps");
    simulate->add_option("--control", sim.control, "none | lqr");
    simulate->add_option("--q", sim.q, "LQR state weights, comma separated");
    simulate->add_option("--r", sim.r, "LQR control weight");
    simulate->add_option("--xref", sim.xref, "LQR reference state, comma separated");
    simulate->add_option("--m", sim.m, "pendulum mass [kg]");
    simulate->add_option("--M", sim.M, "cart mass [kg]");
    simulate->add_option("--L", sim.L, "arm length [m]");
    simulate->add_option("--g", sim.g, "gravity [m/s^2]");
    simulate->add_option("--out", sim.out, "output trajectory CSV");

    struct {
        std::string method = "dmd", in, out, rank = "auto", basis = "poly:2";
    } fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a DMD or EDMD model from a trajectory CSV");
    fit_cmd->add_option("--method", fit.method, "dmd | edmd");
    fit_cmd->add_option("--in", fit.in, "input trajectory CSV")->required();
    fit_cmd->add_option("--out", fit.out, "output model JSON");
    fit_cmd->add_option("--rank", fit.rank, "auto | explicit rank");
    fit_cmd->add_option("--basis", fit.basis, "edmd basis, <kind>:<order> (poly:2, fourier:1)");

    struct {
        std::string model, ref, out, metrics;
    } rec;
    CLI::App* rec_cmd =
        app.add_subcommand("reconstruct", "reconstruct a reference trajectory from a model");
    rec_cmd->add_option("--model", rec.model, "model JSON")->required();
    rec_cmd->add_option("--ref", rec.ref, "reference trajectory CSV")->required();
    rec_cmd->add_option("--out", rec.out, "output reconstruction CSV");
    rec_cmd->add_option("--metrics", rec.metrics, "output error-report JSON");

    struct {
        std::string in, basis = "poly:2", json;
        int top = 5;
    } eig;
    CLI::App* eig_cmd =
        app.add_subcommand("eigen", "approximate Koopman eigenfunctions and check linearity");
    eig_cmd->add_option("--in", eig.in, "input trajectory CSV")->required();
    eig_cmd->add_option("--basis", eig.basis, "basis, <kind>:<order>");
    eig_cmd->add_option("--top", eig.top, "number of eigenpairs to report");
    eig_cmd->add_option("--json", eig.json, "optional JSON dump of the reported eigenpairs");

    struct {
        std::string outdir;
    } rep;
    CLI::App* rep_cmd = app.add_subcommand("repro", "run the full benchmark sweep");
    rep_cmd->add_option("--outdir", rep.outdir, "output directory")->required();

    struct {
        std::string spec;
    } run;
    CLI::App* run_cmd = app.add_subcommand("run", "execute a full pipeline from a RunSpec JSON");
    run_cmd->add_option("--spec", run.spec, "RunSpec JSON file")->required();

    try {
        app.parse(argc, argv);
        if (simulate->parsed())
            return cmd_simulate(sim);
        if (fit_cmd->parsed()) {
            koopman::FitArgs args;
            args.method = koopman::method_from_string(fit.method);
            args.in = fit.in;
            args.out = fit.out;
            args.rank = parse_rank(fit.rank);
            const auto basis = parse_basis(fit.basis);
            args.basis_kind = basis.first;
            args.basis_order = basis.second;
            print_fit_report(koopman::run_fit(args));
            if (!fit.out.empty())
                std::printf("wrote %s\n", fit.out.c_str());
            return 0;
        }
        if (rec_cmd->parsed()) {
            const koopman::ErrorReport report =
                koopman::run_reconstruct({rec.model, rec.ref, rec.out, rec.metrics});
            print_state("relative RMSE per state:", report.relative_rmse);
            print_state("max abs error per state:", report.max_abs);
            return 0;
        }
        if (eig_cmd->parsed()) {
            koopman::EigenArgs args;
            args.in = eig.in;
            const auto basis = parse_basis(eig.basis);
            args.basis_kind = basis.first;
            args.basis_order = basis.second;
            args.top = eig.top;
            args.json_out = eig.json;
            const auto rows = koopman::run_eigen(args);
            std::printf("%4s  %28s  %12s  %s\n", "#", "lambda", "|lambda|", "linearity residual");
            for (size_t i = 0; i < rows.size(); ++i)
                std::printf("%4zu  %14.8f %+12.8fi  %12.8f  %.3e\n", i + 1, rows[i].lambda.real(),
                            rows[i].lambda.imag(), std::abs(rows[i].lambda), rows[i].linearity);
            return 0;
        }
        if (rep_cmd->parsed())
            return cmd_repro(rep.outdir);
        if (run_cmd->parsed())
            return cmd_run(run.spec);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
