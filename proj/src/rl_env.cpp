#include "quadrics/rl_env.hpp"

#include <algorithm>

#include "quadrics/errors.hpp"

namespace quadrics {

void EnvConfig::validate() const {
    if (n < 2) throw ValidationError("env n must be >= 2");
    if (episode_length < 1) throw ValidationError("episode_length must be >= 1");
    if (action_cap <= 0.0) throw ValidationError("action_cap must be positive");
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    reset(0);
}

const EnvState& Environment::reset(std::uint64_t episode_seed) {
    episode_seed_ = episode_seed;
    Rng rng = Rng::stream(cfg_.seed, mix_seed(0x7265736574ULL, episode_seed));
    state_.factors.assign(cfg_.n, Matrix(cfg_.n, cfg_.n));
    for (Matrix& a : state_.factors)
        for (int r = 0; r < cfg_.n; ++r)
            for (int c = 0; c < cfg_.n; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
    state_.step_index = 0;
    return state_;
}

Environment::StepResult Environment::step(const std::vector<Matrix>& action) {
    if (static_cast<int>(action.size()) != cfg_.n)
        throw DimensionError("action tuple size does not match state");
    for (int j = 0; j < cfg_.n; ++j) {
        if (action[j].rows() != cfg_.n || action[j].cols() != cfg_.n)
            throw DimensionError("action matrix shape does not match state");
        const Matrix capped =
            action[j].cwiseMax(-cfg_.action_cap).cwiseMin(cfg_.action_cap);
        state_.factors[j] = (state_.factors[j] + capped).cwiseMax(-1.0).cwiseMin(1.0);
    }
    ++state_.step_index;

    RewardConfig rc = cfg_.reward_cfg;
    rc.seed = mix_seed(cfg_.seed, episode_seed_, static_cast<std::uint64_t>(state_.step_index));
    const RewardEstimate est = reward_pipeline(current_system(), rc, cfg_.scaling);

    StepResult out;
    out.reward = est.degenerate ? 0.0 : est.value;
    out.degenerate = est.degenerate;
    out.done = state_.step_index >= cfg_.episode_length;
    return out;
}

QuadricSystem Environment::current_system() const {
    QuadricSystem s;
    s.dim = cfg_.n;
    s.factors = state_.factors;
    s.rhs = Vector::Ones(cfg_.n);
    return s;
}

Vector Environment::observation() const {
    const int n = cfg_.n;
    Vector flat(n * n * n);
    int idx = 0;
    for (const Matrix& a : state_.factors)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) flat[idx++] = a(r, c);
    return flat;
}

EnvState Environment::state_from_flat(const Vector& flat, int n) {
    EnvState st;
    st.factors.assign(n, Matrix(n, n));
    int idx = 0;
    for (Matrix& a : st.factors)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) = flat[idx++];
    return st;
}

} // namespace quadrics
