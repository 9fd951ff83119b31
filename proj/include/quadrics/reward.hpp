#pragma once

#include <vector>

#include "quadrics/normalization.hpp"

namespace quadrics {

struct RewardConfig {
    double delta = 0.05;    // perturbation size, must satisfy 0 < delta <= 1/n
    int num_points = 100000;
    int num_tuples = 2500;
    double epsilon = 0.0;   // 0 -> auto: max(4/sqrt(n), 0.1)
    std::uint64_t seed = 0;
    int workers = 1;
    bool log_space = true;
    bool variance_rescale = false; // rescale the density update by delta^{-2}
    bool log_transform = false;    // report log(1 + value) instead of value

    double resolved_epsilon(int n) const;
    void validate(int n) const;
};

struct RewardEstimate {
    double value = 0.0;     // estimated expected root count
    double std_error = 0.0; // across tuples
    long accepted_points = 0;
    long rejected_points = 0;
    long pivot_fallbacks = 0;
    long discarded_samples = 0; // non-finite weights / degenerate pivots
    bool degenerate = false;    // normalization failed; value forced to 0
};

/// Standard Gaussian draws kept when (1-eps) sqrt(n) <= ||x|| <= sqrt(n)/(1-eps).
/// For eps >= 1 the annulus degenerates to all of R^n and every draw is kept.
/// Throws SamplingAnomalyError when acceptance stays below 0.5 after
/// 10*count draws.
std::vector<Vector> sample_annulus(int n, int count, double epsilon, Rng& rng,
                                   long* rejected = nullptr);

/// Index of the median-magnitude coordinate among those with x_j^2 >= 1/2
/// (lower-middle convention, lowest index on ties). Falls back to
/// argmax |x_j| when that set is empty.
int select_pivot(const Vector& x, bool* fallback = nullptr);

/// The conditioned (i,i) gram entry g = x_i^{-2} (c - x^T A^T A x + (A^T A)_{ii} x_i^2).
/// Throws NumericalError when |x_i| < 1e-6.
double condition_entry(const Matrix& factor, double c, const Vector& x, int i);

/// Log of the importance-sampling density update
///   sum_j [ (a^j_{ii} - b^j_{ii})^2 - (g_j - b^j_{ii})^2 ] / 2
/// with a from the sampled tuple and b from the unperturbed unit factors.
double importance_weight(const std::vector<Matrix>& tuple, const std::vector<Matrix>& unit_factors,
                         const Vector& c, const Vector& x, int i);

/// Jacobian of x -> (g(A_1,c_1,x), ..., g(A_n,c_n,x)) at fixed tuple:
/// -2 x_i^{-2} ( [Q_j x rows] + [(c_j - x^T Q_j x) grad log(x_i) rows] ).
Matrix jacobian_dxG(const std::vector<Matrix>& tuple, const Vector& c, const Vector& x, int i);

/// Monte-Carlo Kac-Rice estimate for the perturbed system A_i = C_i + delta X_i.
/// Deterministic given the seed for any worker count: points and per-tuple
/// perturbations come from seed-derived streams and the reduction over
/// tuples runs in index order.
RewardEstimate estimate_reward(const NormalizedSystem& ns, const RewardConfig& cfg);

/// Straight-line single-threaded reference of the same estimator, kept for
/// testing the OpenMP kernel against.
RewardEstimate estimate_reward_reference(const NormalizedSystem& ns, const RewardConfig& cfg);

/// normalize() then estimate_reward(); degenerate scalings map to a zero
/// reward with the degenerate flag set instead of an exception.
RewardEstimate reward_pipeline(const QuadricSystem& system, const RewardConfig& cfg,
                               const ScalingOptions& scaling = {});

nlohmann::json to_json(const RewardEstimate& estimate);

} // namespace quadrics
