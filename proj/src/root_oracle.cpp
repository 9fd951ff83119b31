#include "quadrics/root_oracle.hpp"

#include <cmath>
#include <optional>

#include <Eigen/LU>

#include "quadrics/errors.hpp"

namespace quadrics {

void OracleOptions::validate() const {
    if (max_dim < 1) throw ValidationError("max_dim must be positive");
    if (starts < 0) throw ValidationError("starts must be non-negative");
    if (residual_tol <= 0.0 || dedup_tol <= 0.0)
        throw ValidationError("tolerances must be positive");
}

bool verify_solution(const QuadricSystem& system, const Vector& x, double tol) {
    return evaluate(system, x).lpNorm<Eigen::Infinity>() <= tol;
}

namespace {

long default_starts(int n) {
    long s = 200;
    for (int i = 0; i < n && s < 200000; ++i) s *= 2;
    return std::min<long>(s, 200000);
}

std::optional<Vector> newton_from(const QuadricSystem& system, Vector x,
                                  const OracleOptions& opts) {
    double res = evaluate(system, x).norm();
    for (int it = 0; it < opts.max_newton_iters; ++it) {
        const Vector f = evaluate(system, x);
        if (f.lpNorm<Eigen::Infinity>() <= opts.residual_tol) return x;
        const Matrix jac = quadric_gradients(system, x);
        const Vector dir = jac.partialPivLu().solve(-f);
        if (!dir.allFinite()) return std::nullopt;
        double step = 1.0;
        bool moved = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            const Vector cand = x + step * dir;
            const double cand_res = evaluate(system, cand).norm();
            if (cand_res < res) {
                x = cand;
                res = cand_res;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    if (evaluate(system, x).lpNorm<Eigen::Infinity>() <= opts.residual_tol) return x;
    return std::nullopt;
}

// solutions concentrate near the sqrt(n) shell, so compare directions there
double shell_distance(const Vector& a, const Vector& b) {
    const double rn = std::sqrt(static_cast<double>(a.size()));
    return (a * (rn / a.norm()) - b * (rn / b.norm())).norm();
}

struct Pass {
    std::vector<Vector> reps; // canonical representatives, +x convention
    long starts_used = 0;
    long converged = 0;
};

Vector canonical(const Vector& x) {
    for (int i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) return x;
        if (x[i] < 0.0) return -x;
    }
    return x;
}

void merge_point(std::vector<Vector>& reps, const Vector& x, double dedup_tol) {
    const Vector c = canonical(x);
    for (const Vector& r : reps)
        if (shell_distance(r, c) <= dedup_tol || shell_distance(r, -c) <= dedup_tol) return;
    reps.push_back(c);
}

Pass run_pass(const QuadricSystem& system, const OracleOptions& opts, long starts,
              std::uint64_t stream, std::vector<Vector> seed_reps) {
    const int n = system.dim;
    const double rn = std::sqrt(static_cast<double>(n));
    static constexpr double kRadii[] = {0.5, 0.75, 1.0, 1.25};

    std::vector<Vector> start_points(starts);
    Rng rng = Rng::stream(opts.seed, stream);
    for (long s = 0; s < starts; ++s) {
        Vector dir(n);
        for (int i = 0; i < n; ++i) dir[i] = rng.gaussian();
        dir.normalize();
        start_points[s] = dir * (rn * kRadii[s % 4]);
    }

    std::vector<std::optional<Vector>> found(starts);
#pragma omp parallel for schedule(static) num_threads(opts.workers > 0 ? opts.workers : 1)
    for (long s = 0; s < starts; ++s)
        found[s] = newton_from(system, start_points[s], opts);

    Pass pass;
    pass.reps = std::move(seed_reps);
    pass.starts_used = starts;
    for (long s = 0; s < starts; ++s) {
        if (!found[s]) continue;
        ++pass.converged;
        merge_point(pass.reps, *found[s], opts.dedup_tol);
    }
    return pass;
}

} // namespace

RootCountResult count_real_solutions(const QuadricSystem& system, const OracleOptions& opts) {
    opts.validate();
    system.validate();
    const int n = system.dim;
    if (n > opts.max_dim)
        throw RefusalError("oracle refuses dim " + std::to_string(n) + " > max_dim " +
                           std::to_string(opts.max_dim));

    const long starts = opts.starts > 0 ? opts.starts : default_starts(n);
    Pass first = run_pass(system, opts, starts, 0, {});

    RootCountResult result;
    result.dedup_tol = opts.dedup_tol;
    result.residual_tol = opts.residual_tol;
    result.starts_used = first.starts_used;
    result.converged = first.converged;

    std::vector<Vector> reps = first.reps;
    bool exhaustive = false;
    if (n <= 3) {
        const std::size_t before = reps.size();
        Pass second = run_pass(system, opts, 4 * starts, 1, std::move(reps));
        reps = std::move(second.reps);
        result.starts_used += second.starts_used;
        result.converged += second.converged;
        const long bezout = 1L << n;
        exhaustive = reps.size() == before && 2 * static_cast<long>(reps.size()) <= bezout;
    }
    result.exhaustive = exhaustive;

    result.count = 2 * static_cast<long>(reps.size());
    result.solutions.reserve(2 * reps.size());
    for (const Vector& r : reps) {
        result.solutions.push_back(r);
        result.solutions.push_back(-r);
    }
    return result;
}

nlohmann::json to_json(const RootCountResult& result, bool include_solutions) {
    nlohmann::json j;
    j["count"] = result.count;
    j["starts_used"] = result.starts_used;
    j["converged"] = result.converged;
    j["dedup_tol"] = result.dedup_tol;
    j["residual_tol"] = result.residual_tol;
    j["exhaustive"] = result.exhaustive;
    if (include_solutions) {
        nlohmann::json sols = nlohmann::json::array();
        for (const Vector& s : result.solutions)
            sols.push_back(std::vector<double>(s.data(), s.data() + s.size()));
        j["solutions"] = std::move(sols);
    }
    return j;
}

} // namespace quadrics
