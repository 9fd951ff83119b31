#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quadrics/rng.hpp"

namespace quadrics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A system of n quadratic equations ||A_i x||^2 = r_i in n unknowns.
/// Stored through the factors A_i; grams Q_i = A_i^T A_i are derived on
/// demand so the state acted on by perturbations stays the factor tuple.
struct QuadricSystem {
    int dim = 0;
    std::vector<Matrix> factors;
    Vector rhs;

    /// Throws ValidationError on shape mismatch, non-finite entries,
    /// or non-positive right-hand sides.
    void validate() const;
};

/// The quadratic-form matrices Q_i = A_i^T A_i, symmetrized.
struct GramSystem {
    int dim = 0;
    std::vector<Matrix> grams;
};

/// Residual vector (||A_1 x||^2 - r_1, ..., ||A_n x||^2 - r_n).
Vector evaluate(const QuadricSystem& system, const Vector& x);

GramSystem gram(const QuadricSystem& system);

/// Row k is the gradient of x^T Q_k x, i.e. 2 A_k^T A_k x.
Matrix quadric_gradients(const QuadricSystem& system, const Vector& x);

/// n factors with i.i.d. N(0,1) entries, rhs all ones.
QuadricSystem random_gaussian_system(int n, Rng& rng);

/// Joint rescale (A_i, r_i) -> (s A_i, s^2 r_i); leaves the solution set fixed.
QuadricSystem scaled_system(const QuadricSystem& system, double s);

/// Rescales each equation so the right-hand side becomes 1.
QuadricSystem to_unit_rhs(const QuadricSystem& system);

nlohmann::json to_json(const QuadricSystem& system);
QuadricSystem system_from_json(const nlohmann::json& j);

void save_system(const QuadricSystem& system, const std::string& path);
QuadricSystem load_system(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols);

} // namespace quadrics
