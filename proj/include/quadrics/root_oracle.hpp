#pragma once

#include <vector>

#include "quadrics/quadric_system.hpp"

namespace quadrics {

struct OracleOptions {
    int max_dim = 10;          // refusal above this
    long starts = 0;           // 0 -> 200 * 2^n capped at 200000
    double residual_tol = 1e-9;
    double dedup_tol = 1e-6;   // in sqrt(n)-shell normalized coordinates
    int max_newton_iters = 100;
    int max_halvings = 30;
    std::uint64_t seed = 0;
    int workers = 0;           // 0 -> library default

    void validate() const;
};

struct RootCountResult {
    long count = 0;                 // always even; solutions close under negation
    std::vector<Vector> solutions;  // full list, +/- pairs adjacent
    long starts_used = 0;
    long converged = 0;
    double dedup_tol = 0.0;
    double residual_tol = 0.0;
    bool exhaustive = false; // true only for dim <= 3 corroborated by a 4x second pass
};

/// Multi-start damped Newton on the residual map, with residual filtering,
/// shell-normalized deduplication, and +/- closure. Replaces certified
/// homotopy continuation; counts for dim in 4..10 are heuristic and carry
/// exhaustive = false.
RootCountResult count_real_solutions(const QuadricSystem& system, const OracleOptions& opts = {});

bool verify_solution(const QuadricSystem& system, const Vector& x, double tol);

nlohmann::json to_json(const RootCountResult& result, bool include_solutions = true);

} // namespace quadrics
