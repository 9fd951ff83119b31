#pragma once

#include <vector>

#include "quadrics/reward.hpp"

namespace quadrics {

struct EnvConfig {
    int n = 10;
    int episode_length = 10;
    double action_cap = 0.01;
    RewardConfig reward_cfg;
    ScalingOptions scaling;
    std::uint64_t seed = 0;

    void validate() const;
};

/// State: n matrices of size n x n with entries clamped to [-1, 1].
struct EnvState {
    std::vector<Matrix> factors;
    int step_index = 0;
};

/// The search MDP: states are factor tuples, actions are entrywise
/// perturbations capped at action_cap, reward is the Kac-Rice estimate of
/// the system with rhs all ones. Reward noise is re-seeded per step from
/// hash(cfg.seed, episode_seed, step) so trajectories replay exactly.
class Environment {
public:
    explicit Environment(EnvConfig cfg);

    const EnvState& reset(std::uint64_t episode_seed);

    struct StepResult {
        double reward = 0.0;
        bool done = false;
        bool degenerate = false;
    };

    StepResult step(const std::vector<Matrix>& action);

    const EnvState& state() const { return state_; }
    const EnvConfig& config() const { return cfg_; }

    /// Current factor tuple as a QuadricSystem with rhs all ones.
    QuadricSystem current_system() const;

    /// Flattened state, length n^3, row-major per factor.
    Vector observation() const;

    static EnvState state_from_flat(const Vector& flat, int n);

private:
    EnvConfig cfg_;
    EnvState state_;
    std::uint64_t episode_seed_ = 0;
};

} // namespace quadrics
