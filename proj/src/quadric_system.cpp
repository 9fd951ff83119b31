#include "quadrics/quadric_system.hpp"

#include <cmath>
#include <fstream>

#include "quadrics/errors.hpp"

namespace quadrics {

void QuadricSystem::validate() const {
    if (dim <= 0) throw ValidationError("system dim must be positive");
    if (static_cast<int>(factors.size()) != dim)
        throw ValidationError("factor count does not match dim");
    if (rhs.size() != dim) throw ValidationError("rhs length does not match dim");
    for (int i = 0; i < dim; ++i) {
        const Matrix& a = factors[i];
        if (a.rows() != dim || a.cols() != dim)
            throw ValidationError("factor " + std::to_string(i) + " is not dim x dim");
        if (!a.allFinite())
            throw ValidationError("factor " + std::to_string(i) + " has non-finite entries");
        if (!std::isfinite(rhs[i]) || rhs[i] <= 0.0)
            throw ValidationError("rhs entry " + std::to_string(i) + " must be positive and finite");
    }
}

Vector evaluate(const QuadricSystem& system, const Vector& x) {
    if (x.size() != system.dim) throw DimensionError("evaluate: x length does not match dim");
    Vector out(system.dim);
    for (int i = 0; i < system.dim; ++i)
        out[i] = (system.factors[i] * x).squaredNorm() - system.rhs[i];
    return out;
}

GramSystem gram(const QuadricSystem& system) {
    system.validate();
    GramSystem g;
    g.dim = system.dim;
    g.grams.reserve(system.dim);
    for (const Matrix& a : system.factors) {
        Matrix q = a.transpose() * a;
        g.grams.push_back(0.5 * (q + q.transpose()));
    }
    return g;
}

Matrix quadric_gradients(const QuadricSystem& system, const Vector& x) {
    if (x.size() != system.dim) throw DimensionError("quadric_gradients: x length does not match dim");
    Matrix rows(system.dim, system.dim);
    for (int k = 0; k < system.dim; ++k) {
        const Matrix& a = system.factors[k];
        rows.row(k) = 2.0 * (a.transpose() * (a * x)).transpose();
    }
    return rows;
}

QuadricSystem random_gaussian_system(int n, Rng& rng) {
    QuadricSystem s;
    s.dim = n;
    s.factors.reserve(n);
    for (int i = 0; i < n; ++i) {
        Matrix a(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) = rng.gaussian();
        s.factors.push_back(std::move(a));
    }
    s.rhs = Vector::Ones(n);
    return s;
}

QuadricSystem scaled_system(const QuadricSystem& system, double s) {
    QuadricSystem out = system;
    for (Matrix& a : out.factors) a *= s;
    out.rhs *= s * s;
    return out;
}

QuadricSystem to_unit_rhs(const QuadricSystem& system) {
    QuadricSystem out = system;
    for (int i = 0; i < system.dim; ++i) {
        out.factors[i] /= std::sqrt(system.rhs[i]);
        out.rhs[i] = 1.0;
    }
    return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) rows.push_back(m(r, c));
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
        throw ValidationError("matrix json has wrong element count");
    Matrix m(rows, cols);
    int idx = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = j[idx++].get<double>();
    return m;
}

nlohmann::json to_json(const QuadricSystem& system) {
    nlohmann::json j;
    j["dim"] = system.dim;
    nlohmann::json factors = nlohmann::json::array();
    for (const Matrix& a : system.factors) factors.push_back(matrix_to_json(a));
    j["factors"] = std::move(factors);
    std::vector<double> rhs(system.rhs.data(), system.rhs.data() + system.rhs.size());
    j["rhs"] = rhs;
    return j;
}

QuadricSystem system_from_json(const nlohmann::json& j) {
    QuadricSystem s;
    s.dim = j.at("dim").get<int>();
    for (const auto& f : j.at("factors"))
        s.factors.push_back(matrix_from_json(f, s.dim, s.dim));
    const auto rhs = j.at("rhs").get<std::vector<double>>();
    s.rhs = Eigen::Map<const Vector>(rhs.data(), static_cast<int>(rhs.size()));
    s.validate();
    return s;
}

void save_system(const QuadricSystem& system, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << to_json(system).dump(2) << "\n";
}

QuadricSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    return system_from_json(j);
}

} // namespace quadrics
