#pragma once

#include "koopman/dynamics.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace koopman {

// Trajectory CSV format: UTF-8, header `t,<state names>[,<input names>]`,
// one row per sample in time order, values at 17 significant digits so
// round-trips are lossless. State names are `theta,theta_dot` for n=2,
// `x,x_dot,theta,theta_dot` for n=4, and `x1..xn` otherwise; input names are
// `u` or `u1..ul`.

namespace detail {

inline std::vector<std::string> state_names(Eigen::Index n) {
    if (n == 2)
        return {"theta", "theta_dot"};
    if (n == 4)
        return {"x", "x_dot", "theta", "theta_dot"};
    std::vector<std::string> names;
    for (Eigen::Index i = 1; i <= n; ++i)
        names.push_back("x" + std::to_string(i));
    return names;
}

inline std::vector<std::string> input_names(Eigen::Index l) {
    if (l == 1)
        return {"u"};
    std::vector<std::string> names;
    for (Eigen::Index i = 1; i <= l; ++i)
        names.push_back("u" + std::to_string(i));
    return names;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& token, int line_no, const std::string& column) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::invalid_argument("line " + std::to_string(line_no) + ": invalid number '" +
                                    token + "' in column '" + column + "'");
    return value;
}

} // namespace detail

inline void save_trajectory(const Trajectory& traj, const std::string& path) {
    if (traj.samples() < 2)
        throw std::invalid_argument("save_trajectory: trajectory needs at least 2 samples");
    if (!(traj.dt > 0.0))
        throw std::invalid_argument("save_trajectory: dt must be positive");
    if (traj.inputs && traj.inputs->cols() != traj.samples())
        throw std::invalid_argument("save_trajectory: input count does not match sample count");

    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("save_trajectory: cannot open '" + path + "' for writing");

    out << "t";
    for (const auto& name : detail::state_names(traj.dim()))
        out << ',' << name;
    if (traj.inputs)
        for (const auto& name : detail::input_names(traj.inputs->rows()))
            out << ',' << name;
    out << '\n';

    for (Eigen::Index k = 0; k < traj.samples(); ++k) {
        out << detail::format_double(static_cast<double>(k) * traj.dt);
        for (Eigen::Index i = 0; i < traj.dim(); ++i)
            out << ',' << detail::format_double(traj.states(i, k));
        if (traj.inputs)
            for (Eigen::Index i = 0; i < traj.inputs->rows(); ++i)
                out << ',' << detail::format_double((*traj.inputs)(i, k));
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("save_trajectory: write to '" + path + "' failed");
}

inline Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("load_trajectory: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("load_trajectory: '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    const std::vector<std::string> header = detail::split_csv_line(line);
    if (header.empty() || header[0] != "t")
        throw std::invalid_argument("line 1: malformed header, first column must be 't'");

    // Columns after t up to the first u* column are states.
    size_t n = 0;
    while (1 + n < header.size() && header[1 + n].rfind('u', 0) != 0)
        ++n;
    const size_t l = header.size() - 1 - n;
    if (n == 0)
        throw std::invalid_argument("line 1: malformed header, no state columns");

    // Known schemas must be complete.
    const std::string& first = header[1];
    const std::vector<std::string> expected =
        first == "theta" ? detail::state_names(2)
                         : (first == "x" ? detail::state_names(4) : std::vector<std::string>{});
    if (!expected.empty()) {
        for (size_t i = 0; i < expected.size(); ++i) {
            if (1 + i >= header.size() || header[1 + i] != expected[i])
                throw std::invalid_argument("line 1: missing column '" + expected[i] + "'");
        }
        if (n != expected.size())
            throw std::invalid_argument("line 1: unexpected state column '" + header[1 + expected.size()] +
                                        "'");
    }

    std::vector<double> ts;
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (size_t i = 0; i < fields.size(); ++i)
            row[i] = detail::parse_double(fields[i], line_no, header[i]);
        ts.push_back(row[0]);
        rows.push_back(std::move(row));
    }

    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    if (m < 2)
        throw std::invalid_argument("load_trajectory: '" + path + "' has fewer than 2 samples");

    const double dt = ts[1] - ts[0];
    if (!(dt > 0.0))
        throw std::invalid_argument("line 3: time must be strictly increasing");
    for (Eigen::Index k = 1; k < m; ++k) {
        if (std::abs(ts[static_cast<size_t>(k)] - ts[static_cast<size_t>(k) - 1] - dt) > 1e-9)
            throw std::invalid_argument("line " + std::to_string(k + 2) +
                                        ": non-uniform sampling interval");
    }

    Trajectory traj;
    traj.dt = dt;
    traj.states.resize(static_cast<Eigen::Index>(n), m);
    if (l > 0)
        traj.inputs = Eigen::MatrixXd(static_cast<Eigen::Index>(l), m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& row = rows[static_cast<size_t>(k)];
        for (size_t i = 0; i < n; ++i)
            traj.states(static_cast<Eigen::Index>(i), k) = row[1 + i];
        for (size_t i = 0; i < l; ++i)
            (*traj.inputs)(static_cast<Eigen::Index>(i), k) = row[1 + n + i];
    }
    return traj;
}

} // namespace koopman
