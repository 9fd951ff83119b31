#include "quadrics/reward.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include <Eigen/LU>

#include "quadrics/errors.hpp"

namespace quadrics {

namespace {
constexpr double kPivotFloor = 1e-6;
} // namespace

double RewardConfig::resolved_epsilon(int n) const {
    if (epsilon > 0.0) return epsilon;
    return std::max(4.0 / std::sqrt(static_cast<double>(n)), 0.1);
}

void RewardConfig::validate(int n) const {
    if (num_points < 1 || num_tuples < 1)
        throw ValidationError("num_points and num_tuples must be >= 1");
    if (!(delta > 0.0) || delta > 1.0 / n)
        throw ValidationError("delta must satisfy 0 < delta <= 1/n");
    const double eps_floor = 4.0 / std::sqrt(static_cast<double>(n));
    if (epsilon > 0.0 && epsilon < eps_floor)
        throw ValidationError("epsilon must be >= 4/sqrt(n)");
    const double nd = n;
    if (num_tuples <= nd * nd)
        std::cerr << "[reward] warning: num_tuples <= n^2; estimate may be noisy\n";
    if (num_points <= nd * nd * nd * nd)
        std::cerr << "[reward] warning: num_points <= n^4; estimate may be noisy\n";
}

std::vector<Vector> sample_annulus(int n, int count, double epsilon, Rng& rng, long* rejected) {
    const double rn = std::sqrt(static_cast<double>(n));
    const bool accept_all = epsilon >= 1.0;
    const double lo = accept_all ? 0.0 : (1.0 - epsilon) * rn;
    const double hi = accept_all ? std::numeric_limits<double>::infinity() : rn / (1.0 - epsilon);

    std::vector<Vector> points;
    points.reserve(count);
    long rejects = 0;
    long draws = 0;
    while (static_cast<int>(points.size()) < count) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.gaussian();
        ++draws;
        const double norm = x.norm();
        if (norm >= lo && norm <= hi) {
            points.push_back(std::move(x));
        } else {
            ++rejects;
            if (draws >= 10L * count && points.size() < 0.5 * draws)
                throw SamplingAnomalyError("annulus acceptance below 0.5; expected >= 0.97");
        }
    }
    if (rejected) *rejected = rejects;
    return points;
}

int select_pivot(const Vector& x, bool* fallback) {
    std::vector<std::pair<double, int>> big;
    for (int j = 0; j < x.size(); ++j)
        if (x[j] * x[j] >= 0.5) big.emplace_back(std::abs(x[j]), j);
    if (big.empty()) {
        if (fallback) *fallback = true;
        int arg = 0;
        x.cwiseAbs().maxCoeff(&arg);
        return arg;
    }
    if (fallback) *fallback = false;
    std::sort(big.begin(), big.end());
    const double median = big[(big.size() - 1) / 2].first; // lower-middle
    int best = static_cast<int>(x.size());
    for (const auto& [mag, j] : big)
        if (mag == median) best = std::min(best, j);
    return best;
}

double condition_entry(const Matrix& factor, double c, const Vector& x, int i) {
    if (std::abs(x[i]) < kPivotFloor)
        throw NumericalError("pivot coordinate too small to condition on");
    const Vector ax = factor * x;
    const double quad = ax.squaredNorm();
    const double a_ii = factor.col(i).squaredNorm(); // (A^T A)_{ii}
    return (c - quad + a_ii * x[i] * x[i]) / (x[i] * x[i]);
}

double importance_weight(const std::vector<Matrix>& tuple, const std::vector<Matrix>& unit_factors,
                         const Vector& c, const Vector& x, int i) {
    double logw = 0.0;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
        const double a_ii = tuple[j].col(i).squaredNorm();
        const double b_ii = unit_factors[j].col(i).squaredNorm();
        const double g = condition_entry(tuple[j], c[static_cast<int>(j)], x, i);
        logw += 0.5 * ((a_ii - b_ii) * (a_ii - b_ii) - (g - b_ii) * (g - b_ii));
    }
    return logw;
}

Matrix jacobian_dxG(const std::vector<Matrix>& tuple, const Vector& c, const Vector& x, int i) {
    const int n = static_cast<int>(tuple.size());
    if (std::abs(x[i]) < kPivotFloor)
        throw NumericalError("pivot coordinate too small to condition on");
    const double xi2inv = 1.0 / (x[i] * x[i]);
    Matrix jac(n, n);
    for (int j = 0; j < n; ++j) {
        const Vector qx = tuple[j].transpose() * (tuple[j] * x);
        const double resid = c[j] - x.dot(qx);
        Vector row = qx;
        row[i] += resid / x[i]; // (c_j - x^T Q_j x) grad log(x_i)
        jac.row(j) = (-2.0 * xi2inv) * row.transpose();
    }
    return jac;
}

namespace {

struct SharedPrep {
    std::vector<Vector> points;
    std::vector<int> pivots;
    std::vector<char> valid;     // pivot coordinate large enough
    Matrix b_diag;               // b_diag(j, i) = (C_j^T C_j)_{ii}
    long rejected = 0;
    long fallbacks = 0;
    long invalid_points = 0;
};

SharedPrep prepare(const NormalizedSystem& ns, const RewardConfig& cfg) {
    const int n = ns.dim;
    SharedPrep prep;
    Rng point_rng = Rng::stream(cfg.seed, 0);
    prep.points =
        sample_annulus(n, cfg.num_points, cfg.resolved_epsilon(n), point_rng, &prep.rejected);
    prep.pivots.resize(prep.points.size());
    prep.valid.resize(prep.points.size());
    for (std::size_t p = 0; p < prep.points.size(); ++p) {
        bool fb = false;
        prep.pivots[p] = select_pivot(prep.points[p], &fb);
        if (fb) ++prep.fallbacks;
        prep.valid[p] = std::abs(prep.points[p][prep.pivots[p]]) >= kPivotFloor;
        if (!prep.valid[p]) ++prep.invalid_points;
    }
    prep.b_diag = Matrix(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) prep.b_diag(j, i) = ns.unit_factors[j].col(i).squaredNorm();
    return prep;
}

// One tuple of perturbed matrices, averaged over all points.
// log_space accumulates log-contributions and combines them with a
// max-shifted exp-sum-log; otherwise contributions are summed directly.
double tuple_value(const NormalizedSystem& ns, const RewardConfig& cfg, const SharedPrep& prep,
                   long t, long* discarded) {
    const int n = ns.dim;
    const double delta = cfg.delta;
    Rng rng = Rng::stream(cfg.seed, 1 + static_cast<std::uint64_t>(t));

    // A_j = C_j + delta X_j; grams stacked so all Q_j x come from one product
    Matrix q_stack(n * n, n);
    Vector q_diag_at(n * n); // Q_j(i,i) over all (j, i)
    for (int j = 0; j < n; ++j) {
        Matrix a = ns.unit_factors[j];
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) += delta * rng.gaussian();
        q_stack.middleRows(j * n, n) = a.transpose() * a;
        for (int i = 0; i < n; ++i) q_diag_at[j * n + i] = q_stack(j * n + i, i);
    }

    const double weight_scale = cfg.variance_rescale ? 1.0 / (delta * delta) : 1.0;
    std::vector<double> log_contrib;
    if (cfg.log_space) log_contrib.reserve(prep.points.size());
    double linear_sum = 0.0;
    Matrix jac(n, n);

    for (std::size_t p = 0; p < prep.points.size(); ++p) {
        if (!prep.valid[p]) continue;
        const Vector& x = prep.points[p];
        const int i = prep.pivots[p];
        const double xi = x[i];
        const double xi2inv = 1.0 / (xi * xi);

        const Vector qx = q_stack * x; // all Q_j x stacked
        double logw = 0.0;
        for (int j = 0; j < n; ++j) {
            const double s = x.dot(qx.segment(j * n, n));
            const double a_ii = q_diag_at[j * n + i];
            const double b_ii = prep.b_diag(j, i);
            const double g = xi2inv * (ns.weights[j] - s) + a_ii;
            logw += 0.5 * weight_scale * ((a_ii - b_ii) * (a_ii - b_ii) - (g - b_ii) * (g - b_ii));
            // row of D_x G; the residual term collapses into the conditioned
            // (i,i) entry: Q~_j x = Q_j x + (g - a_ii) x_i e_i
            jac.row(j) = qx.segment(j * n, n).transpose();
            jac(j, i) += (g - a_ii) * xi;
        }

        const auto lu = jac.partialPivLu();
        double log_absdet = n * std::log(2.0 * xi2inv);
        for (int d = 0; d < n; ++d) log_absdet += std::log(std::abs(lu.matrixLU()(d, d)));

        const double log_c = log_absdet + logw;
        if (std::isnan(log_c)) {
            ++*discarded;
            continue;
        }
        if (cfg.log_space) {
            if (log_c > -std::numeric_limits<double>::infinity()) log_contrib.push_back(log_c);
        } else {
            const double c = std::exp(log_c);
            if (!std::isfinite(c))
                throw NumericalError("reward contribution overflowed; enable log_space");
            linear_sum += c;
        }
    }

    const double inv_n_points = 1.0 / static_cast<double>(prep.points.size());
    if (!cfg.log_space) return linear_sum * inv_n_points;
    if (log_contrib.empty()) return 0.0;
    const double shift = *std::max_element(log_contrib.begin(), log_contrib.end());
    double acc = 0.0;
    for (const double lc : log_contrib) acc += std::exp(lc - shift);
    return std::exp(shift) * acc * inv_n_points;
}

RewardEstimate reduce_tuples(const RewardConfig& cfg, const SharedPrep& prep,
                             const std::vector<double>& values,
                             const std::vector<long>& discards) {
    RewardEstimate est;
    est.accepted_points = static_cast<long>(prep.points.size());
    est.rejected_points = prep.rejected;
    est.pivot_fallbacks = prep.fallbacks;
    est.discarded_samples = prep.invalid_points;
    for (const long d : discards) est.discarded_samples += d;

    const long m = cfg.num_tuples;
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    if (m > 1) {
        for (const double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(m - 1);
    }
    est.value = mean;
    est.std_error = std::sqrt(var / static_cast<double>(m));

    long usable = 0;
    for (std::size_t p = 0; p < prep.valid.size(); ++p) usable += prep.valid[p];
    if (usable == 0)
        throw EstimationFailedError("every sample point was discarded");

    if (cfg.log_transform) {
        est.std_error = est.std_error / (1.0 + est.value);
        est.value = std::log1p(est.value);
    }
    return est;
}

} // namespace

RewardEstimate estimate_reward(const NormalizedSystem& ns, const RewardConfig& cfg) {
    cfg.validate(ns.dim);
    SharedPrep prep = prepare(ns, cfg);
    const long m = cfg.num_tuples;
    std::vector<double> values(m, 0.0);
    std::vector<long> discards(m, 0);
    const int threads = cfg.workers > 0 ? cfg.workers : 1;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long t = 0; t < m; ++t) values[t] = tuple_value(ns, cfg, prep, t, &discards[t]);
    return reduce_tuples(cfg, prep, values, discards);
}

RewardEstimate estimate_reward_reference(const NormalizedSystem& ns, const RewardConfig& cfg) {
    cfg.validate(ns.dim);
    const int n = ns.dim;
    SharedPrep prep = prepare(ns, cfg);
    const long m = cfg.num_tuples;
    std::vector<double> values(m, 0.0);
    std::vector<long> discards(m, 0);

    for (long t = 0; t < m; ++t) {
        Rng rng = Rng::stream(cfg.seed, 1 + static_cast<std::uint64_t>(t));
        std::vector<Matrix> tuple;
        tuple.reserve(n);
        for (int j = 0; j < n; ++j) {
            Matrix a = ns.unit_factors[j];
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) a(r, c) += cfg.delta * rng.gaussian();
            tuple.push_back(std::move(a));
        }
        double sum = 0.0;
        for (std::size_t p = 0; p < prep.points.size(); ++p) {
            if (!prep.valid[p]) continue;
            const Vector& x = prep.points[p];
            const int i = prep.pivots[p];
            const double logw =
                importance_weight(tuple, ns.unit_factors, ns.weights, x, i) *
                (cfg.variance_rescale ? 1.0 / (cfg.delta * cfg.delta) : 1.0);
            const double det = jacobian_dxG(tuple, ns.weights, x, i).determinant();
            const double contrib = std::abs(det) * std::exp(logw);
            if (std::isnan(contrib)) {
                ++discards[t];
                continue;
            }
            sum += contrib;
        }
        values[t] = sum / static_cast<double>(prep.points.size());
    }
    return reduce_tuples(cfg, prep, values, discards);
}

RewardEstimate reward_pipeline(const QuadricSystem& system, const RewardConfig& cfg,
                               const ScalingOptions& scaling) {
    NormalizedSystem ns;
    try {
        ns = normalize(system, scaling);
    } catch (const DegenerateSystemError&) {
        RewardEstimate est;
        est.degenerate = true;
        return est;
    } catch (const ConvergenceError& e) {
        ns = e.best; // best iterate is still a usable scaling
    }
    return estimate_reward(ns, cfg);
}

nlohmann::json to_json(const RewardEstimate& estimate) {
    return nlohmann::json{{"value", estimate.value},
                          {"std_error", estimate.std_error},
                          {"accepted_points", estimate.accepted_points},
                          {"rejected_points", estimate.rejected_points},
                          {"pivot_fallbacks", estimate.pivot_fallbacks},
                          {"discarded_samples", estimate.discarded_samples},
                          {"degenerate", estimate.degenerate}};
}

} // namespace quadrics
