#include "rkhskit/serialize.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rkhs {
namespace io {

using nlohmann::json;

namespace {

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const json& arr) {
    Vector v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[Eigen::Index(i)] = arr[i].get<double>();
    return v;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    const auto nr = rows.size();
    require(nr > 0, "matrix_from_json: empty matrix");
    const auto nc = rows[0].size();
    Matrix m(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
        require(rows[i].size() == nc, "matrix_from_json: ragged rows");
        for (std::size_t j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

} // namespace

std::string kernel_spec_to_json(const KernelSpec& spec, bool with_state) {
    json j;
    j["kernel"] = kernel_base_name(spec.base);
    j["params"] = spec.params;
    json maps = json::array();
    for (const auto& m : spec.maps) maps.push_back(map_kind_name(m.kind));
    j["maps"] = std::move(maps);
    if (with_state) {
        json st = json::array();
        for (const auto& m : spec.maps) {
            json e;
            e["fitted"] = m.fitted;
            e["scale"] = m.scale;
            e["offset"] = m.offset;
            if (m.col_a.size()) e["col_a"] = vector_to_json(m.col_a);
            if (m.col_b.size()) e["col_b"] = vector_to_json(m.col_b);
            st.push_back(std::move(e));
        }
        j["state"] = std::move(st);
    }
    return j.dump();
}

KernelSpec kernel_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("kernel spec JSON: ") + e.what());
    }
    KernelSpec spec;
    require(j.contains("kernel"), "kernel spec JSON: missing \"kernel\"");
    spec.base = kernel_base_from_name(j["kernel"].get<std::string>());
    if (j.contains("params"))
        for (const auto& p : j["params"]) spec.params.push_back(p.get<double>());
    if (j.contains("maps"))
        for (const auto& m : j["maps"])
            spec.maps.push_back(MapSpec(map_kind_from_name(m.get<std::string>())));
    if (j.contains("state")) {
        const auto& st = j["state"];
        require(st.size() == spec.maps.size(), "kernel spec JSON: state/maps length mismatch");
        for (std::size_t i = 0; i < spec.maps.size(); ++i) {
            auto& m = spec.maps[i];
            m.fitted = st[i].value("fitted", false);
            m.scale = st[i].value("scale", 1.0);
            m.offset = st[i].value("offset", 0.0);
            if (st[i].contains("col_a")) m.col_a = vector_from_json(st[i]["col_a"]);
            if (st[i].contains("col_b")) m.col_b = vector_from_json(st[i]["col_b"]);
        }
    }
    spec.validate();
    return spec;
}

std::string regressor_to_json(const Regressor& reg) {
    json j;
    j["format"] = "rkhs-kit/regressor";
    j["version"] = 1;
    j["spec"] = json::parse(kernel_spec_to_json(reg.spec, true));
    j["train_x"] = matrix_to_json(reg.train_X);
    if (!reg.extrapolation_mode()) j["basis_y"] = matrix_to_json(reg.basis_Y);
    j["theta"] = matrix_to_json(reg.theta);
    j["epsilon"] = reg.epsilon;
    j["regularizer"] = reg.regularizer == Regularizer::Laplacian ? "laplacian" : "identity";
    return j.dump();
}

Regressor regressor_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("regressor JSON: ") + e.what());
    }
    require(j.value("format", "") == "rkhs-kit/regressor", "regressor JSON: wrong format tag");
    Regressor reg;
    reg.spec = kernel_spec_from_json(j["spec"].dump());
    reg.train_X = matrix_from_json(j["train_x"]);
    reg.basis_Y = j.contains("basis_y") ? matrix_from_json(j["basis_y"]) : reg.train_X;
    reg.theta = matrix_from_json(j["theta"]);
    reg.epsilon = j.value("epsilon", 0.0);
    reg.regularizer = j.value("regularizer", "identity") == std::string("laplacian")
                          ? Regularizer::Laplacian
                          : Regularizer::Identity;
    return reg;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Matrix read_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (first && header) {
            first = false;
            continue;
        }
        first = false;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                row.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ValidationError("CSV parse error in " + path + ": \"" + tok + "\"");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    require(!rows.empty(), "CSV file has no data rows: " + path);
    const std::size_t nc = rows[0].size();
    Matrix m(rows.size(), nc);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == nc, "CSV file has ragged rows: " + path);
        for (std::size_t j = 0; j < nc; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

void write_csv(const std::string& path, const Matrix& m,
               const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write CSV file: " + path);
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j) out << ',';
            out << header[j];
        }
        out << '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << text;
}

} // namespace io
} // namespace rkhs
