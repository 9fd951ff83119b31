#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quadrics/rl_env.hpp"
#include "quadrics/root_oracle.hpp"

namespace quadrics::td3 {

using quadrics::Matrix;
using quadrics::Vector;

/// Fully connected stack with ReLU between layers. The output is either
/// linear (critics) or tanh scaled to [-out_scale, out_scale] (actor).
class Mlp {
public:
    enum class Output { Linear, Tanh };

    Mlp() = default;
    /// Uniform fan-in init; the final layer is additionally scaled by
    /// final_scale (1e-3 for actors keeps the initial policy near zero).
    Mlp(std::vector<int> dims, Output output, double out_scale, double final_scale, Rng& rng);

    /// Columns of the input are batch entries.
    Matrix forward(const Matrix& input) const;

    struct Cache {
        std::vector<Matrix> post; // post[0] = input, post[l] = activation after layer l
        Matrix out;
    };
    Matrix forward(const Matrix& input, Cache& cache) const;

    struct Grads {
        std::vector<Matrix> dw;
        std::vector<Vector> db;
        void accumulate_zero_like(const Mlp& net);
    };

    /// Fills grads and returns dL/dinput.
    Matrix backward(const Cache& cache, const Matrix& dout, Grads& grads) const;

    const std::vector<int>& dims() const { return dims_; }
    std::vector<Matrix>& weights() { return w_; }
    std::vector<Vector>& biases() { return b_; }
    const std::vector<Matrix>& weights() const { return w_; }
    const std::vector<Vector>& biases() const { return b_; }
    double out_scale() const { return out_scale_; }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

private:
    std::vector<int> dims_;
    std::vector<Matrix> w_; // w[l] is dims[l+1] x dims[l]
    std::vector<Vector> b_;
    Output output_ = Output::Linear;
    double out_scale_ = 1.0;
};

struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    long t = 0;

    void step(Mlp& net, const Mlp::Grads& grads);
};

struct Transition {
    Vector state;
    Vector action;
    double reward = 0.0;
    Vector next_state;
    bool done = false;
};

/// Fixed-capacity ring; batches sample uniformly without replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition tr);
    std::size_t size() const { return data_.size(); }
    std::vector<const Transition*> sample(int batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
};

struct TrainConfig {
    long total_steps = 50000;
    int batch_size = 100;
    double gamma = 0.99;
    double tau = 0.005;
    int policy_delay = 2;
    double target_policy_noise = 0.2; // fraction of the action cap
    double target_noise_clip = 0.5;   // fraction of the action cap
    double exploration_noise = 0.1;   // fraction of the action cap
    double lr_actor = 1e-3;
    double lr_critic = 1e-3;
    long warmup_steps = 1000;
    std::size_t buffer_capacity = 1000000;
    long checkpoint_interval = 0; // steps; 0 disables
    std::uint64_t seed = 0;

    void validate() const;
};

class Agent {
public:
    Agent() = default;
    Agent(int state_dim, int action_dim, double action_cap, const TrainConfig& cfg, Rng& rng);

    /// clamp(pi(state) + N(0, sigma * cap), -cap, cap); sigma = 0 for eval.
    Vector select_action(const Vector& state, double noise_sigma, Rng& rng) const;

    struct LossReport {
        double critic_loss = 0.0;
        double actor_loss = 0.0;
        bool actor_updated = false;
        bool targets_updated = false;
    };

    LossReport train_step(const ReplayBuffer& buffer, const TrainConfig& cfg, Rng& rng);

    double action_cap() const { return cap_; }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic1() const { return critic1_; }
    const Mlp& critic2() const { return critic2_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic1() const { return target_critic1_; }
    const Mlp& target_critic2() const { return target_critic2_; }
    long critic_updates() const { return critic_updates_; }

    nlohmann::json to_json() const;
    static Agent from_json(const nlohmann::json& j);

private:
    Mlp actor_, critic1_, critic2_;
    Mlp target_actor_, target_critic1_, target_critic2_;
    Adam actor_opt_, critic1_opt_, critic2_opt_;
    double cap_ = 0.01;
    long critic_updates_ = 0;
};

struct TrainLogRow {
    long step = 0;
    long episode = 0;
    double mean_reward = 0.0; // over the finished episode; NaN mid-episode
    double actor_loss = 0.0;
    double critic_loss = 0.0;
};

struct TrainResult {
    Agent agent;
    std::vector<TrainLogRow> log;
};

/// Off-policy loop: warmup with uniform random actions, then
/// act-store-train every environment step. Checkpoints (when enabled) are
/// written to out_dir/checkpoint.json and training resumes from them.
TrainResult train(const EnvConfig& env_cfg, const TrainConfig& train_cfg,
                  const std::string& out_dir = "", const std::string& resume_path = "");

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path);

struct EvalConfig {
    int runs = 20;
    int steps = 20;
    std::vector<double> thresholds = {80, 90, 100};
    bool use_oracle = false;
    OracleOptions oracle;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EvalResult {
    Matrix rewards;              // runs x steps
    Matrix counts;               // runs x steps when the oracle ran, else 0 x 0
    double average_count = 0.0;  // oracle counts when available, rewards otherwise
    std::vector<long> exceed_runs;      // per threshold
    std::vector<double> median_steps;   // per threshold; NaN means never exceeded
};

/// Deterministic policy rollout; pass agent = nullptr for the
/// random-action baseline column.
EvalResult evaluate_policy(const Agent* agent, const EnvConfig& env_cfg, const EvalConfig& eval_cfg);

void write_eval_csv(const EvalResult& result, const EvalConfig& cfg, const std::string& path);

void save_agent(const Agent& agent, const std::string& path);
Agent load_agent(const std::string& path);

} // namespace quadrics::td3
