#pragma once

#include "koopman/edmd.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace koopman {

// Model files are JSON, schema_version 1. Real matrices are stored as
// {rows, cols, data} with row-major data; complex values as [re, im] pairs.
inline constexpr int kModelSchemaVersion = 1;

namespace detail {

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline nlohmann::json to_json(const Eigen::MatrixXcd& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            data.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Eigen::MatrixXd real_matrix_from_json(const nlohmann::json& j) {
    Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != m.size())
        throw std::invalid_argument("model file: matrix data length mismatch");
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index jcol = 0; jcol < m.cols(); ++jcol)
            m(i, jcol) = data[k++].get<double>();
    return m;
}

inline Eigen::MatrixXcd complex_matrix_from_json(const nlohmann::json& j) {
    Eigen::MatrixXcd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != m.size())
        throw std::invalid_argument("model file: matrix data length mismatch");
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index jcol = 0; jcol < m.cols(); ++jcol) {
            const auto& pair = data[k++];
            m(i, jcol) = {pair.at(0).get<double>(), pair.at(1).get<double>()};
        }
    return m;
}

inline nlohmann::json dmd_fields(const DmdModel& model) {
    nlohmann::json j;
    j["r"] = model.r;
    j["dt"] = model.dt;
    j["A_tilde"] = to_json(model.A_tilde);
    j["U"] = to_json(model.U);
    j["Lambda"] = to_json(Eigen::MatrixXcd(model.Lambda));
    j["W"] = to_json(model.W);
    j["Phi"] = to_json(model.Phi);
    j["Omega"] = to_json(Eigen::MatrixXcd(model.Omega));
    j["omega_defined"] = model.omega_defined;
    j["b"] = to_json(Eigen::MatrixXcd(model.b));
    j["amplitude_residual"] = model.amplitude_residual;
    j["amplitudes_warning"] = model.amplitudes_warning;
    j["rank_clamped"] = model.rank_clamped;
    return j;
}

inline DmdModel dmd_from_fields(const nlohmann::json& j) {
    DmdModel model;
    model.r = j.at("r").get<Eigen::Index>();
    model.dt = j.at("dt").get<double>();
    model.A_tilde = real_matrix_from_json(j.at("A_tilde"));
    model.U = real_matrix_from_json(j.at("U"));
    model.Lambda = complex_matrix_from_json(j.at("Lambda"));
    model.W = complex_matrix_from_json(j.at("W"));
    model.Phi = complex_matrix_from_json(j.at("Phi"));
    model.Omega = complex_matrix_from_json(j.at("Omega"));
    model.omega_defined = j.at("omega_defined").get<std::vector<bool>>();
    model.b = complex_matrix_from_json(j.at("b"));
    model.amplitude_residual = j.at("amplitude_residual").get<double>();
    model.amplitudes_warning = j.at("amplitudes_warning").get<bool>();
    model.rank_clamped = j.at("rank_clamped").get<bool>();
    return model;
}

inline void write_model_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("save_model: cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("save_model: write to '" + path + "' failed");
}

inline nlohmann::json read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("load_model: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("load_model: '" + path + "' is not valid JSON: " + e.what());
    }
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
        throw std::invalid_argument("load_model: unsupported schema_version " +
                                    std::to_string(version) + " (expected " +
                                    std::to_string(kModelSchemaVersion) + ")");
    return j;
}

} // namespace detail

inline void save_model(const DmdModel& model, const std::string& path) {
    nlohmann::json j = detail::dmd_fields(model);
    j["schema_version"] = kModelSchemaVersion;
    j["kind"] = "dmd";
    j["n"] = model.dim();
    j["p"] = model.dim();
    detail::write_model_file(j, path);
}

inline void save_model(const EdmdModel& model, const std::string& path) {
    nlohmann::json j = detail::dmd_fields(model.inner);
    j["schema_version"] = kModelSchemaVersion;
    j["kind"] = "edmd";
    j["n"] = model.dictionary.n;
    j["p"] = model.dictionary.p();
    j["basis"] = {{"kind", to_string(model.dictionary.kind)},
                  {"order", model.dictionary.order}};
    j["state_rows"] = model.state_rows;
    j["conditioning_warning"] = model.conditioning_warning;
    detail::write_model_file(j, path);
}

using AnyModel = std::variant<DmdModel, EdmdModel>;

inline AnyModel load_model(const std::string& path) {
    const nlohmann::json j = detail::read_model_file(path);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dmd")
        return detail::dmd_from_fields(j);
    if (kind != "edmd")
        throw std::invalid_argument("load_model: unknown model kind '" + kind +
                                    "' (supported: dmd, edmd)");

    EdmdModel model;
    const auto& basis = j.at("basis");
    model.dictionary = Dictionary(basis_kind_from_string(basis.at("kind").get<std::string>()),
                                  basis.at("order").get<int>(), j.at("n").get<int>());
    model.inner = detail::dmd_from_fields(j);
    model.state_rows = j.at("state_rows").get<std::vector<Eigen::Index>>();
    model.conditioning_warning = j.at("conditioning_warning").get<bool>();
    return model;
}

} // namespace koopman
