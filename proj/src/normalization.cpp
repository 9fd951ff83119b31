#include "quadrics/normalization.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "quadrics/errors.hpp"

namespace quadrics {

void ScalingOptions::validate() const {
    if (gradient_tolerance <= 0.0) throw ValidationError("gradient_tolerance must be positive");
    if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
    if (corrector_steps < 0) throw ValidationError("corrector_steps must be non-negative");
}

namespace {

struct Assembled {
    std::vector<double> coeff; // e^{t_1},...,e^{t_{n-1}}, e^{-sum}
    Matrix s;
    Matrix e_n; // coeff[n-1] * Q_n
};

Assembled assemble(const Vector& t, const GramSystem& grams) {
    const int n = grams.dim;
    if (t.size() != n - 1) throw DimensionError("t must have length n-1");
    Assembled out;
    out.coeff.resize(n);
    double sum = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        out.coeff[i] = std::exp(t[i]);
        sum += t[i];
    }
    out.coeff[n - 1] = std::exp(-sum);
    out.s = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) out.s += out.coeff[i] * grams.grams[i];
    out.e_n = out.coeff[n - 1] * grams.grams[n - 1];
    return out;
}

// trace of Sinv * Q for symmetric arguments
double trace_prod(const Matrix& sinv, const Matrix& q) {
    return sinv.cwiseProduct(q).sum();
}

struct ObjectiveEval {
    double value;
    Vector gradient;
    Matrix sinv;
    Assembled parts;
};

ObjectiveEval eval_objective(const Vector& t, const GramSystem& grams) {
    const int n = grams.dim;
    ObjectiveEval out;
    out.parts = assemble(t, grams);
    Eigen::LLT<Matrix> llt(out.parts.s);
    if (llt.info() != Eigen::Success)
        throw DegenerateSystemError("gram sum is not positive-definite");
    double logdet = 0.0;
    const Matrix l = llt.matrixL();
    for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
    out.value = logdet;
    out.sinv = llt.solve(Matrix::Identity(n, n));
    const double tail = out.parts.coeff[n - 1] * trace_prod(out.sinv, grams.grams[n - 1]);
    out.gradient = Vector(n - 1);
    for (int j = 0; j + 1 < n; ++j)
        out.gradient[j] = out.parts.coeff[j] * trace_prod(out.sinv, grams.grams[j]) - tail;
    return out;
}

} // namespace

std::pair<double, Vector> scaling_objective(const Vector& t, const GramSystem& grams) {
    ObjectiveEval e = eval_objective(t, grams);
    return {e.value, std::move(e.gradient)};
}

Matrix scaling_hessian(const Vector& t, const GramSystem& grams) {
    const int n = grams.dim;
    ObjectiveEval e = eval_objective(t, grams);
    const double tail = trace_prod(e.sinv, e.parts.e_n);
    std::vector<Matrix> m(n - 1);
    for (int i = 0; i + 1 < n; ++i)
        m[i] = e.sinv * (e.parts.coeff[i] * grams.grams[i] - e.parts.e_n);
    Matrix h(n - 1, n - 1);
    for (int i = 0; i + 1 < n; ++i)
        for (int j = i; j + 1 < n; ++j) {
            double v = -m[i].cwiseProduct(m[j].transpose()).sum() + tail;
            if (i == j) v += e.parts.coeff[i] * trace_prod(e.sinv, grams.grams[i]);
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

namespace {

struct BfgsOutcome {
    Vector t;
    int iterations = 0;
    bool converged = false;
};

BfgsOutcome minimize_bfgs(const GramSystem& grams, const Vector& t0, double gtol, int max_iter) {
    const int m = static_cast<int>(t0.size());
    Vector x = t0;
    ObjectiveEval cur = eval_objective(x, grams);
    Matrix hinv = Matrix::Identity(m, m);
    const double armijo_c = 1e-4;
    int flat_iters = 0;

    BfgsOutcome out;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        if (cur.gradient.lpNorm<Eigen::Infinity>() <= gtol) {
            out.converged = true;
            break;
        }
        Vector dir = -(hinv * cur.gradient);
        double slope = cur.gradient.dot(dir);
        if (slope >= 0.0) { // reset on a non-descent direction
            hinv = Matrix::Identity(m, m);
            dir = -cur.gradient;
            slope = cur.gradient.dot(dir);
        }
        double step = 1.0;
        ObjectiveEval next = cur;
        bool accepted = false;
        for (int ls = 0; ls < 25; ++ls) {
            Vector cand = x + step * dir;
            next = eval_objective(cand, grams);
            if (next.value <= cur.value + armijo_c * step * slope) {
                x = std::move(cand);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // f is flat to machine precision; Newton polish takes over
        // descent below measurable precision: hand over to the polish phase
        if (cur.value - next.value <= 1e-13 * std::max(1.0, std::abs(cur.value))) {
            if (++flat_iters >= 3) {
                cur = std::move(next);
                break;
            }
        } else {
            flat_iters = 0;
        }

        Vector s = step * dir;
        Vector y = next.gradient - cur.gradient;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            Matrix iys = Matrix::Identity(m, m) - rho * s * y.transpose();
            hinv = iys * hinv * iys.transpose() + rho * s * s.transpose();
        }
        cur = std::move(next);
    }
    if (cur.gradient.lpNorm<Eigen::Infinity>() <= gtol) out.converged = true;
    out.t = std::move(x);
    return out;
}

// Damped Newton steps accepted on gradient-norm decrease; used when the
// quasi-Newton phase stalls within rounding error of the optimum.
void polish_with_newton(const GramSystem& grams, BfgsOutcome& out, double gtol, int max_steps) {
    Vector x = out.t;
    double gnorm = eval_objective(x, grams).gradient.lpNorm<Eigen::Infinity>();
    for (int k = 0; k < max_steps && gnorm > gtol; ++k) {
        const ObjectiveEval cur = eval_objective(x, grams);
        Eigen::LDLT<Matrix> ldlt(scaling_hessian(x, grams));
        if (ldlt.info() != Eigen::Success) return;
        const Vector dir = -ldlt.solve(cur.gradient);
        if (!dir.allFinite()) return;
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Vector cand = x + step * dir;
            const double cand_norm = eval_objective(cand, grams).gradient.lpNorm<Eigen::Infinity>();
            if (cand_norm < gnorm) {
                x = cand;
                gnorm = cand_norm;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) return;
        out.t = x;
        out.converged = gnorm <= gtol;
    }
}

NormalizedSystem finish(const QuadricSystem& unit, const GramSystem& grams, const Vector& t) {
    const int n = unit.dim;
    Assembled parts = assemble(t, grams);

    Eigen::SelfAdjointEigenSolver<Matrix> es(parts.s);
    const Vector lam = es.eigenvalues();
    const double lam_max = lam.maxCoeff();
    if (lam.minCoeff() < 1e-14 * lam_max)
        throw DegenerateSystemError("scaled gram sum is numerically singular");
    Matrix z = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
               es.eigenvectors().transpose();

    NormalizedSystem ns;
    ns.dim = n;
    ns.basis = z;
    ns.unit_factors.reserve(n);
    Vector fro(n);
    for (int i = 0; i < n; ++i) {
        Matrix az = unit.factors[i] * z;
        fro[i] = az.norm();
        ns.unit_factors.push_back(az / fro[i]);
    }
    double g2 = 0.0;
    for (int i = 0; i < n; ++i) g2 += 1.0 / (fro[i] * fro[i]);
    ns.scale = std::sqrt(g2);
    ns.weights = Vector(n);
    for (int i = 0; i < n; ++i) ns.weights[i] = double(n) / (g2 * fro[i] * fro[i]);

    // Trace(T_i) = alpha_i Trace(S^{-1} Q_i); sum T_i = I holds by Z = S^{-1/2}
    Matrix sinv = es.eigenvectors() * lam.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    double td2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double tr = parts.coeff[i] * sinv.cwiseProduct(grams.grams[i]).sum();
        td2 += (tr - 1.0) * (tr - 1.0);
    }
    ns.trace_distance = std::sqrt(td2);

    Matrix sum_c = Matrix::Zero(n, n);
    for (const Matrix& c : ns.unit_factors) sum_c += c.transpose() * c;
    ns.summation_distance = (sum_c - Matrix::Identity(n, n)).norm();
    return ns;
}

} // namespace

CorrectorResult newton_corrector(const Vector& t, const GramSystem& grams, int steps) {
    CorrectorResult res{t, false};
    if (steps == 0) return res;
    try {
        Vector x = t;
        double fx = eval_objective(x, grams).value;
        const double f0 = fx;
        for (int k = 0; k < steps; ++k) {
            ObjectiveEval cur = eval_objective(x, grams);
            Matrix h = scaling_hessian(x, grams);
            Eigen::LDLT<Matrix> ldlt(h);
            if (ldlt.info() != Eigen::Success) return {t, false};
            Vector dir = -ldlt.solve(cur.gradient);
            if (!dir.allFinite()) return {t, false};
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 30; ++ls) {
                Vector cand = x + step * dir;
                const double fc = eval_objective(cand, grams).value;
                if (fc <= fx) {
                    x = std::move(cand);
                    fx = fc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (fx < f0) {
            res.t = std::move(x);
            res.improved = true;
        }
    } catch (const DegenerateSystemError&) {
        return {t, false};
    }
    return res;
}

NormalizedSystem normalize(const QuadricSystem& system, const ScalingOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    opts.validate();
    system.validate();
    const int n = system.dim;

    // fold the right-hand sides into the factors: ||A x||^2 = r is
    // ||(A / sqrt(r)) x||^2 = 1, and the pipeline assumes unit rhs
    QuadricSystem unit = to_unit_rhs(system);
    GramSystem grams = gram(unit);

    Vector t0 = opts.initial_t;
    if (t0.size() == 0) t0 = Vector::Zero(n - 1);
    if (t0.size() != n - 1) throw DimensionError("initial_t must have length n-1");

    BfgsOutcome bfgs = minimize_bfgs(grams, t0, opts.gradient_tolerance, opts.max_iterations);
    if (!bfgs.converged) polish_with_newton(grams, bfgs, opts.gradient_tolerance, 8);

    Vector t_final = bfgs.t;
    bool corrector_failed = false;
    if (opts.corrector_steps > 0) {
        CorrectorResult cor = newton_corrector(bfgs.t, grams, opts.corrector_steps);
        if (cor.improved)
            t_final = cor.t;
        else
            corrector_failed = true;
    }

    NormalizedSystem ns = finish(unit, grams, t_final);
    ns.iterations = bfgs.iterations;
    ns.converged = bfgs.converged;
    ns.corrector_failed = corrector_failed;
    ns.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (!bfgs.converged)
        throw ConvergenceError("scaling did not reach gradient tolerance in " +
                                   std::to_string(opts.max_iterations) + " iterations",
                               ns);
    return ns;
}

nlohmann::json to_json(const NormalizedSystem& ns) {
    nlohmann::json j;
    j["dim"] = ns.dim;
    nlohmann::json factors = nlohmann::json::array();
    for (const Matrix& c : ns.unit_factors) factors.push_back(matrix_to_json(c));
    j["unit_factors"] = std::move(factors);
    std::vector<double> w(ns.weights.data(), ns.weights.data() + ns.weights.size());
    j["weights"] = w;
    j["basis"] = matrix_to_json(ns.basis);
    j["scale"] = ns.scale;
    j["diagnostics"] = {{"trace_distance", ns.trace_distance},
                        {"summation_distance", ns.summation_distance},
                        {"iterations", ns.iterations},
                        {"wall_time", ns.wall_time},
                        {"converged", ns.converged},
                        {"corrector_failed", ns.corrector_failed}};
    return j;
}

NormalizedSystem normalized_from_json(const nlohmann::json& j) {
    NormalizedSystem ns;
    ns.dim = j.at("dim").get<int>();
    for (const auto& f : j.at("unit_factors"))
        ns.unit_factors.push_back(matrix_from_json(f, ns.dim, ns.dim));
    const auto w = j.at("weights").get<std::vector<double>>();
    ns.weights = Eigen::Map<const Vector>(w.data(), static_cast<int>(w.size()));
    ns.basis = matrix_from_json(j.at("basis"), ns.dim, ns.dim);
    ns.scale = j.at("scale").get<double>();
    const auto& d = j.at("diagnostics");
    ns.trace_distance = d.at("trace_distance").get<double>();
    ns.summation_distance = d.at("summation_distance").get<double>();
    ns.iterations = d.at("iterations").get<int>();
    ns.wall_time = d.at("wall_time").get<double>();
    ns.converged = d.at("converged").get<bool>();
    ns.corrector_failed = d.at("corrector_failed").get<bool>();
    return ns;
}

} // namespace quadrics
