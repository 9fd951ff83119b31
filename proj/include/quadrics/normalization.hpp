#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "quadrics/quadric_system.hpp"

namespace quadrics {

struct ScalingOptions {
    double gradient_tolerance = 1e-10;
    int max_iterations = 500;
    int corrector_steps = 0;
    Vector initial_t; // empty -> zero vector

    void validate() const;
};

/// The Barvinok-scaled form of a quadric system: unit-Frobenius factors
/// C_i = A_i Z / ||A_i Z||_F with sum C_i^T C_i close to the identity,
/// weights c_i = n / (g^2 ||A_i Z||_F^2) summing to n, and the scale
/// g = (sum_i ||A_i Z||_F^{-2})^{1/2}.
struct NormalizedSystem {
    int dim = 0;
    std::vector<Matrix> unit_factors;
    Vector weights;
    Matrix basis; // Z
    double scale = 0.0;

    // diagnostics
    double trace_distance = 0.0;     // ||(Trace T_i) - 1||_2 with T_i = alpha_i Z^T Q_i Z
    double summation_distance = 0.0; // ||sum C_i^T C_i - I||_F
    int iterations = 0;
    double wall_time = 0.0; // seconds
    bool converged = true;
    bool corrector_failed = false;
};

/// Constraint-eliminated scaling objective f(t) = ln det(sum e^{t_i} Q_i)
/// with t_n = -(t_1 + ... + t_{n-1}), together with its gradient.
/// Throws DegenerateSystemError when the sum fails a Cholesky test.
std::pair<double, Vector> scaling_objective(const Vector& t, const GramSystem& grams);

Matrix scaling_hessian(const Vector& t, const GramSystem& grams);

/// Quasi-Newton ran out of iterations; carries the best iterate found.
struct ConvergenceError : std::runtime_error {
    NormalizedSystem best;
    ConvergenceError(const std::string& what, NormalizedSystem b)
        : std::runtime_error(what), best(std::move(b)) {}
};

struct CorrectorResult {
    Vector t;
    bool improved = false;
};

/// Damped Newton refinement of a converged quasi-Newton iterate.
/// Returns the original t with improved = false when f fails to decrease
/// or a factorization fails; never throws for those cases.
CorrectorResult newton_corrector(const Vector& t, const GramSystem& grams, int steps);

NormalizedSystem normalize(const QuadricSystem& system, const ScalingOptions& opts = {});

nlohmann::json to_json(const NormalizedSystem& ns);
NormalizedSystem normalized_from_json(const nlohmann::json& j);

} // namespace quadrics
