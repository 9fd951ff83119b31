#include "quadrics/td3.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "quadrics/errors.hpp"

namespace quadrics::td3 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double uniform_signed(Rng& rng, double cap) { return rng.uniform(-cap, cap); }

std::uint64_t bounded_u64(Rng& rng, std::uint64_t bound) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = rng.next_u64();
    while (r >= limit) r = rng.next_u64();
    return r % bound;
}

void soft_update(Mlp& target, const Mlp& src, double tau) {
    for (std::size_t l = 0; l < src.weights().size(); ++l) {
        target.weights()[l] = (1.0 - tau) * target.weights()[l] + tau * src.weights()[l];
        target.biases()[l] = (1.0 - tau) * target.biases()[l] + tau * src.biases()[l];
    }
}

nlohmann::json adam_to_json(const Adam& a) {
    nlohmann::json j;
    j["lr"] = a.lr;
    j["t"] = a.t;
    j["mw"] = nlohmann::json::array();
    j["vw"] = nlohmann::json::array();
    j["mb"] = nlohmann::json::array();
    j["vb"] = nlohmann::json::array();
    for (const auto& m : a.mw) j["mw"].push_back(matrix_to_json(m));
    for (const auto& m : a.vw) j["vw"].push_back(matrix_to_json(m));
    for (const auto& v : a.mb) j["mb"].push_back(std::vector<double>(v.data(), v.data() + v.size()));
    for (const auto& v : a.vb) j["vb"].push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return j;
}

Adam adam_from_json(const nlohmann::json& j, const Mlp& net) {
    Adam a;
    a.lr = j.at("lr").get<double>();
    a.t = j.at("t").get<long>();
    // moments stay empty until the first step; nothing to restore
    if (j.at("mw").empty()) return a;
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        const int rows = static_cast<int>(net.weights()[l].rows());
        const int cols = static_cast<int>(net.weights()[l].cols());
        a.mw.push_back(matrix_from_json(j.at("mw").at(l), rows, cols));
        a.vw.push_back(matrix_from_json(j.at("vw").at(l), rows, cols));
        const auto mb = j.at("mb").at(l).get<std::vector<double>>();
        const auto vb = j.at("vb").at(l).get<std::vector<double>>();
        a.mb.push_back(Eigen::Map<const Vector>(mb.data(), static_cast<long>(mb.size())));
        a.vb.push_back(Eigen::Map<const Vector>(vb.data(), static_cast<long>(vb.size())));
    }
    return a;
}

} // namespace

Mlp::Mlp(std::vector<int> dims, Output output, double out_scale, double final_scale, Rng& rng)
    : dims_(std::move(dims)), output_(output), out_scale_(out_scale) {
    if (dims_.size() < 2) throw ValidationError("mlp needs at least one layer");
    const std::size_t layers = dims_.size() - 1;
    w_.resize(layers);
    b_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const int fan_in = dims_[l];
        const int fan_out = dims_[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        const double scale = (l + 1 == layers) ? final_scale : 1.0;
        w_[l].resize(fan_out, fan_in);
        b_[l].resize(fan_out);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w_[l](r, c) = scale * rng.uniform(-bound, bound);
        for (int r = 0; r < fan_out; ++r) b_[l][r] = scale * rng.uniform(-bound, bound);
    }
}

Matrix Mlp::forward(const Matrix& input) const {
    Cache cache;
    return forward(input, cache);
}

Matrix Mlp::forward(const Matrix& input, Cache& cache) const {
    if (input.rows() != dims_.front())
        throw DimensionError("mlp input dimension mismatch");
    const std::size_t layers = w_.size();
    cache.post.assign(layers + 1, Matrix());
    cache.post[0] = input;
    Matrix h = input;
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix z = (w_[l] * h).colwise() + b_[l];
        if (l + 1 < layers) {
            h = z.cwiseMax(0.0);
            cache.post[l + 1] = h;
        } else {
            if (output_ == Output::Tanh) {
                cache.out = z.array().tanh().matrix();
                h = out_scale_ * cache.out;
            } else {
                cache.out = z;
                h = z;
            }
            cache.post[l + 1] = h;
        }
    }
    return h;
}

void Mlp::Grads::accumulate_zero_like(const Mlp& net) {
    dw.clear();
    db.clear();
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        dw.push_back(Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        db.push_back(Vector::Zero(net.biases()[l].size()));
    }
}

Matrix Mlp::backward(const Cache& cache, const Matrix& dout, Grads& grads) const {
    const std::size_t layers = w_.size();
    if (grads.dw.size() != layers) grads.accumulate_zero_like(*this);

    Matrix dz;
    if (output_ == Output::Tanh) {
        // d/dz (s * tanh z) = s * (1 - tanh^2 z)
        dz = dout.cwiseProduct(out_scale_ * (1.0 - cache.out.array().square()).matrix());
    } else {
        dz = dout;
    }
    for (std::size_t l = layers; l-- > 0;) {
        grads.dw[l] += dz * cache.post[l].transpose();
        grads.db[l] += dz.rowwise().sum();
        if (l == 0) return w_[0].transpose() * dz;
        Matrix dh = w_[l].transpose() * dz;
        dz = dh.cwiseProduct((cache.post[l].array() > 0.0).cast<double>().matrix());
    }
    return Matrix();
}

nlohmann::json Mlp::to_json() const {
    nlohmann::json j;
    j["dims"] = dims_;
    j["output"] = output_ == Output::Tanh ? "tanh" : "linear";
    j["out_scale"] = out_scale_;
    j["w"] = nlohmann::json::array();
    j["b"] = nlohmann::json::array();
    for (const auto& m : w_) j["w"].push_back(matrix_to_json(m));
    for (const auto& v : b_) j["b"].push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
    Mlp net;
    net.dims_ = j.at("dims").get<std::vector<int>>();
    net.output_ = j.at("output").get<std::string>() == "tanh" ? Output::Tanh : Output::Linear;
    net.out_scale_ = j.at("out_scale").get<double>();
    for (std::size_t l = 0; l + 1 < net.dims_.size(); ++l) {
        net.w_.push_back(matrix_from_json(j.at("w").at(l), net.dims_[l + 1], net.dims_[l]));
        const auto b = j.at("b").at(l).get<std::vector<double>>();
        net.b_.push_back(Eigen::Map<const Vector>(b.data(), static_cast<long>(b.size())));
    }
    return net;
}

void Adam::step(Mlp& net, const Mlp::Grads& grads) {
    if (mw.empty()) {
        for (std::size_t l = 0; l < net.weights().size(); ++l) {
            mw.push_back(Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
            vw.push_back(Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
            mb.push_back(Vector::Zero(net.biases()[l].size()));
            vb.push_back(Vector::Zero(net.biases()[l].size()));
        }
    }
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        mw[l] = beta1 * mw[l] + (1.0 - beta1) * grads.dw[l];
        vw[l] = beta2 * vw[l] + (1.0 - beta2) * grads.dw[l].cwiseProduct(grads.dw[l]);
        net.weights()[l].array() -=
            lr * (mw[l].array() / bc1) / ((vw[l].array() / bc2).sqrt() + eps);
        mb[l] = beta1 * mb[l] + (1.0 - beta1) * grads.db[l];
        vb[l] = beta2 * vb[l] + (1.0 - beta2) * grads.db[l].cwiseProduct(grads.db[l]);
        net.biases()[l].array() -=
            lr * (mb[l].array() / bc1) / ((vb[l].array() / bc2).sqrt() + eps);
    }
}

void ReplayBuffer::push(Transition tr) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(tr));
    } else {
        data_[next_] = std::move(tr);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(int batch, Rng& rng) const {
    if (batch <= 0) throw ValidationError("batch size must be positive");
    if (data_.size() < static_cast<std::size_t>(batch))
        throw ValidationError("replay buffer smaller than batch");
    // Floyd's algorithm: batch distinct indices without materializing 0..n-1
    const std::uint64_t n = data_.size();
    std::unordered_set<std::uint64_t> chosen;
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::uint64_t j = n - static_cast<std::uint64_t>(batch); j < n; ++j) {
        std::uint64_t t = bounded_u64(rng, j + 1);
        if (!chosen.insert(t).second) {
            chosen.insert(j);
            t = j;
        }
        out.push_back(&data_[t]);
    }
    return out;
}

void TrainConfig::validate() const {
    if (total_steps < 1) throw ValidationError("total_steps must be >= 1");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (gamma < 0.0 || gamma > 1.0) throw ValidationError("gamma must lie in [0, 1]");
    if (tau <= 0.0 || tau > 1.0) throw ValidationError("tau must lie in (0, 1]");
    if (policy_delay < 1) throw ValidationError("policy_delay must be >= 1");
    if (warmup_steps < batch_size)
        throw ValidationError("warmup_steps must cover at least one batch");
    if (buffer_capacity < static_cast<std::size_t>(batch_size))
        throw ValidationError("buffer_capacity must cover at least one batch");
}

Agent::Agent(int state_dim, int action_dim, double action_cap, const TrainConfig& cfg, Rng& rng)
    : cap_(action_cap) {
    if (state_dim < 1 || action_dim < 1) throw ValidationError("network dims must be positive");
    if (action_cap <= 0.0) throw ValidationError("action cap must be positive");
    actor_ = Mlp({state_dim, 500, 400, 300, action_dim}, Mlp::Output::Tanh, cap_, 1e-3, rng);
    critic1_ = Mlp({state_dim + action_dim, 500, 400, 300, 1}, Mlp::Output::Linear, 1.0, 1.0, rng);
    critic2_ = Mlp({state_dim + action_dim, 500, 400, 300, 1}, Mlp::Output::Linear, 1.0, 1.0, rng);
    target_actor_ = actor_;
    target_critic1_ = critic1_;
    target_critic2_ = critic2_;
    actor_opt_.lr = cfg.lr_actor;
    critic1_opt_.lr = cfg.lr_critic;
    critic2_opt_.lr = cfg.lr_critic;
}

Vector Agent::select_action(const Vector& state, double noise_sigma, Rng& rng) const {
    Vector a = actor_.forward(state);
    if (!a.allFinite())
        throw NumericalError("actor produced a non-finite action");
    if (noise_sigma > 0.0) {
        for (long i = 0; i < a.size(); ++i) a[i] += noise_sigma * cap_ * rng.gaussian();
    }
    return a.cwiseMax(-cap_).cwiseMin(cap_);
}

Agent::LossReport Agent::train_step(const ReplayBuffer& buffer, const TrainConfig& cfg, Rng& rng) {
    const int B = cfg.batch_size;
    const auto batch = buffer.sample(B, rng);
    const int sdim = static_cast<int>(batch[0]->state.size());
    const int adim = static_cast<int>(batch[0]->action.size());

    Matrix S(sdim, B), A(adim, B), S2(sdim, B);
    Vector R(B), not_done(B);
    for (int k = 0; k < B; ++k) {
        S.col(k) = batch[k]->state;
        A.col(k) = batch[k]->action;
        S2.col(k) = batch[k]->next_state;
        R[k] = batch[k]->reward;
        not_done[k] = batch[k]->done ? 0.0 : 1.0;
    }

    // smoothed target action: clamp(pi'(s') + clipped noise, +-cap)
    Matrix a2 = target_actor_.forward(S2);
    const double clip = cfg.target_noise_clip * cap_;
    for (int k = 0; k < B; ++k)
        for (int i = 0; i < adim; ++i) {
            const double noise =
                std::clamp(cfg.target_policy_noise * cap_ * rng.gaussian(), -clip, clip);
            a2(i, k) = std::clamp(a2(i, k) + noise, -cap_, cap_);
        }

    Matrix X2(sdim + adim, B);
    X2.topRows(sdim) = S2;
    X2.bottomRows(adim) = a2;
    const Matrix q1t = target_critic1_.forward(X2);
    const Matrix q2t = target_critic2_.forward(X2);
    Vector y(B);
    for (int k = 0; k < B; ++k)
        y[k] = R[k] + cfg.gamma * not_done[k] * std::min(q1t(0, k), q2t(0, k));

    Matrix X(sdim + adim, B);
    X.topRows(sdim) = S;
    X.bottomRows(adim) = A;

    LossReport report;
    for (Mlp* critic : {&critic1_, &critic2_}) {
        Mlp::Cache cache;
        const Matrix q = critic->forward(X, cache);
        Matrix dout(1, B);
        double loss = 0.0;
        for (int k = 0; k < B; ++k) {
            const double err = q(0, k) - y[k];
            loss += err * err;
            dout(0, k) = 2.0 * err / B;
        }
        report.critic_loss += loss / (2.0 * B);
        Mlp::Grads grads;
        grads.accumulate_zero_like(*critic);
        critic->backward(cache, dout, grads);
        (critic == &critic1_ ? critic1_opt_ : critic2_opt_).step(*critic, grads);
    }
    if (!std::isfinite(report.critic_loss))
        throw NumericalError("critic loss diverged");
    ++critic_updates_;

    if (critic_updates_ % cfg.policy_delay == 0) {
        Mlp::Cache actor_cache;
        const Matrix a_pi = actor_.forward(S, actor_cache);
        Matrix Xa(sdim + adim, B);
        Xa.topRows(sdim) = S;
        Xa.bottomRows(adim) = a_pi;
        Mlp::Cache critic_cache;
        const Matrix q = critic1_.forward(Xa, critic_cache);
        report.actor_loss = -q.mean();
        if (!std::isfinite(report.actor_loss))
            throw NumericalError("actor loss diverged");

        Mlp::Grads scratch; // critic parameters stay fixed here
        scratch.accumulate_zero_like(critic1_);
        const Matrix dX = critic1_.backward(critic_cache, Matrix::Constant(1, B, -1.0 / B), scratch);
        Mlp::Grads actor_grads;
        actor_grads.accumulate_zero_like(actor_);
        actor_.backward(actor_cache, dX.bottomRows(adim), actor_grads);
        actor_opt_.step(actor_, actor_grads);
        report.actor_updated = true;

        soft_update(target_actor_, actor_, cfg.tau);
        soft_update(target_critic1_, critic1_, cfg.tau);
        soft_update(target_critic2_, critic2_, cfg.tau);
        report.targets_updated = true;
    } else {
        report.actor_loss = kNaN;
    }
    return report;
}

nlohmann::json Agent::to_json() const {
    nlohmann::json j;
    j["action_cap"] = cap_;
    j["critic_updates"] = critic_updates_;
    j["actor"] = actor_.to_json();
    j["critic1"] = critic1_.to_json();
    j["critic2"] = critic2_.to_json();
    j["target_actor"] = target_actor_.to_json();
    j["target_critic1"] = target_critic1_.to_json();
    j["target_critic2"] = target_critic2_.to_json();
    j["actor_opt"] = adam_to_json(actor_opt_);
    j["critic1_opt"] = adam_to_json(critic1_opt_);
    j["critic2_opt"] = adam_to_json(critic2_opt_);
    return j;
}

Agent Agent::from_json(const nlohmann::json& j) {
    Agent a;
    a.cap_ = j.at("action_cap").get<double>();
    a.critic_updates_ = j.at("critic_updates").get<long>();
    a.actor_ = Mlp::from_json(j.at("actor"));
    a.critic1_ = Mlp::from_json(j.at("critic1"));
    a.critic2_ = Mlp::from_json(j.at("critic2"));
    a.target_actor_ = Mlp::from_json(j.at("target_actor"));
    a.target_critic1_ = Mlp::from_json(j.at("target_critic1"));
    a.target_critic2_ = Mlp::from_json(j.at("target_critic2"));
    a.actor_opt_ = adam_from_json(j.at("actor_opt"), a.actor_);
    a.critic1_opt_ = adam_from_json(j.at("critic1_opt"), a.critic1_);
    a.critic2_opt_ = adam_from_json(j.at("critic2_opt"), a.critic2_);
    return a;
}

void save_agent(const Agent& agent, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << agent.to_json().dump(2) << "\n";
}

Agent load_agent(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return Agent::from_json(j);
}

TrainResult train(const EnvConfig& env_cfg, const TrainConfig& train_cfg,
                  const std::string& out_dir, const std::string& resume_path) {
    env_cfg.validate();
    train_cfg.validate();

    Environment env(env_cfg);
    const int n = env_cfg.n;
    const int dim = n * n * n;

    long start_step = 0;
    long episode_idx = 0;
    Agent agent;
    if (!resume_path.empty()) {
        std::ifstream in(resume_path);
        if (!in) throw ValidationError("cannot open checkpoint " + resume_path);
        nlohmann::json j;
        in >> j;
        agent = Agent::from_json(j.at("agent"));
        start_step = j.at("step").get<long>();
        episode_idx = j.at("episode").get<long>();
    } else {
        Rng init_rng = Rng::stream(train_cfg.seed, 1);
        agent = Agent(dim, dim, env_cfg.action_cap, train_cfg, init_rng);
    }

    // offsetting the streams by the start step keeps a resumed run from
    // replaying the exact pre-checkpoint noise
    Rng noise_rng = Rng::stream(train_cfg.seed, mix_seed(2, static_cast<std::uint64_t>(start_step)));
    Rng train_rng = Rng::stream(train_cfg.seed, mix_seed(3, static_cast<std::uint64_t>(start_step)));

    ReplayBuffer buffer(train_cfg.buffer_capacity);
    TrainResult result;
    long global = start_step;

    auto checkpoint = [&]() {
        if (out_dir.empty()) return;
        std::filesystem::create_directories(out_dir);
        nlohmann::json j;
        j["agent"] = agent.to_json();
        j["step"] = global;
        j["episode"] = episode_idx;
        const std::string path = out_dir + "/checkpoint.json";
        std::ofstream out(path + ".tmp");
        out << j.dump() << "\n";
        out.close();
        std::filesystem::rename(path + ".tmp", path);
    };

    while (global < train_cfg.total_steps) {
        env.reset(static_cast<std::uint64_t>(episode_idx));
        double episode_reward = 0.0;
        int episode_steps = 0;
        bool done = false;
        while (!done && global < train_cfg.total_steps) {
            const Vector obs = env.observation();
            Vector act(dim);
            if (global < train_cfg.warmup_steps) {
                for (int i = 0; i < dim; ++i) act[i] = uniform_signed(noise_rng, env_cfg.action_cap);
            } else {
                act = agent.select_action(obs, train_cfg.exploration_noise, noise_rng);
            }
            const auto sr = env.step(Environment::state_from_flat(act, n).factors);
            const Vector next_obs = env.observation();
            buffer.push({obs, act, sr.reward, next_obs, sr.done});
            episode_reward += sr.reward;
            ++episode_steps;
            ++global;
            done = sr.done;

            Agent::LossReport lr;
            lr.actor_loss = kNaN;
            lr.critic_loss = kNaN;
            if (global >= train_cfg.warmup_steps &&
                buffer.size() >= static_cast<std::size_t>(train_cfg.batch_size)) {
                lr = agent.train_step(buffer, train_cfg, train_rng);
            }
            TrainLogRow row;
            row.step = global;
            row.episode = episode_idx;
            row.mean_reward = done ? episode_reward / episode_steps : kNaN;
            row.actor_loss = lr.actor_loss;
            row.critic_loss = lr.critic_loss;
            result.log.push_back(row);

            if (train_cfg.checkpoint_interval > 0 && global % train_cfg.checkpoint_interval == 0)
                checkpoint();
        }
        ++episode_idx;
    }
    checkpoint();
    result.agent = std::move(agent);
    return result;
}

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "step,episode,episode_mean_reward,actor_loss,critic_loss\n";
    out.precision(17);
    for (const auto& row : log) {
        out << row.step << "," << row.episode << ",";
        if (std::isfinite(row.mean_reward)) out << row.mean_reward;
        out << ",";
        if (std::isfinite(row.actor_loss)) out << row.actor_loss;
        out << ",";
        if (std::isfinite(row.critic_loss)) out << row.critic_loss;
        out << "\n";
    }
}

void EvalConfig::validate() const {
    if (runs < 1) throw ValidationError("eval runs must be >= 1");
    if (steps < 1) throw ValidationError("eval steps must be >= 1");
}

EvalResult evaluate_policy(const Agent* agent, const EnvConfig& env_cfg, const EvalConfig& eval_cfg) {
    env_cfg.validate();
    eval_cfg.validate();

    EnvConfig cfg = env_cfg;
    cfg.episode_length = eval_cfg.steps;
    Environment env(cfg);
    const int n = cfg.n;
    const int dim = n * n * n;
    const bool oracle_ok = eval_cfg.use_oracle && n <= eval_cfg.oracle.max_dim;

    EvalResult res;
    res.rewards = Matrix::Zero(eval_cfg.runs, eval_cfg.steps);
    if (oracle_ok) res.counts = Matrix::Zero(eval_cfg.runs, eval_cfg.steps);

    for (int run = 0; run < eval_cfg.runs; ++run) {
        Rng rng = Rng::stream(eval_cfg.seed, mix_seed(11, static_cast<std::uint64_t>(run)));
        env.reset(mix_seed(eval_cfg.seed, static_cast<std::uint64_t>(run)));
        for (int step = 0; step < eval_cfg.steps; ++step) {
            Vector act(dim);
            if (agent) {
                act = agent->select_action(env.observation(), 0.0, rng);
            } else {
                for (int i = 0; i < dim; ++i) act[i] = uniform_signed(rng, cfg.action_cap);
            }
            const auto sr = env.step(Environment::state_from_flat(act, n).factors);
            res.rewards(run, step) = sr.reward;
            if (oracle_ok) {
                OracleOptions opts = eval_cfg.oracle;
                opts.seed = mix_seed(eval_cfg.seed, static_cast<std::uint64_t>(run),
                                     static_cast<std::uint64_t>(step));
                res.counts(run, step) =
                    static_cast<double>(count_real_solutions(env.current_system(), opts).count);
            }
        }
    }

    const Matrix& metric = oracle_ok ? res.counts : res.rewards;
    res.average_count = metric.mean();
    for (const double thr : eval_cfg.thresholds) {
        long exceed = 0;
        std::vector<double> first_steps;
        for (int run = 0; run < eval_cfg.runs; ++run) {
            for (int step = 0; step < eval_cfg.steps; ++step) {
                if (metric(run, step) > thr) {
                    ++exceed;
                    first_steps.push_back(static_cast<double>(step + 1));
                    break;
                }
            }
        }
        res.exceed_runs.push_back(exceed);
        if (first_steps.empty()) {
            res.median_steps.push_back(kNaN);
        } else {
            std::sort(first_steps.begin(), first_steps.end());
            const std::size_t m = first_steps.size();
            res.median_steps.push_back(m % 2 ? first_steps[m / 2]
                                             : 0.5 * (first_steps[m / 2 - 1] + first_steps[m / 2]));
        }
    }
    return res;
}

void write_eval_csv(const EvalResult& result, const EvalConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    const bool have_counts = result.counts.size() > 0;
    out << "run,step,reward";
    if (have_counts) out << ",root_count";
    out << "\n";
    out.precision(17);
    for (int run = 0; run < result.rewards.rows(); ++run)
        for (int step = 0; step < result.rewards.cols(); ++step) {
            out << run << "," << (step + 1) << "," << result.rewards(run, step);
            if (have_counts) out << "," << static_cast<long>(result.counts(run, step));
            out << "\n";
        }
    out << "\n";
    out << "threshold,runs_exceeding,median_first_step\n";
    for (std::size_t t = 0; t < cfg.thresholds.size(); ++t) {
        out << cfg.thresholds[t] << "," << result.exceed_runs[t] << ",";
        if (std::isfinite(result.median_steps[t]))
            out << result.median_steps[t];
        else
            out << "N/A";
        out << "\n";
    }
}

} // namespace quadrics::td3
