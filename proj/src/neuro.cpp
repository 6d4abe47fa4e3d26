#include <moqd/errors.hpp>
#include <moqd/neuro.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace moqd {

namespace {

void check_same_shape(const NetworkParams& a, const NetworkParams& b)
{
    if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size())
        throw DimensionError("networks have different layer counts");
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols() ||
            a.biases[l].size() != b.biases[l].size())
            throw DimensionError("networks differ in layer " + std::to_string(l));
    }
}

NetworkParams negated(NetworkParams p)
{
    for (auto& w : p.weights)
        w = -w;
    for (auto& b : p.biases)
        b = -b;
    return p;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom)
{
    Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

} // namespace

std::size_t MlpSpec::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        n += static_cast<std::size_t>(sizes[l]) * static_cast<std::size_t>(sizes[l + 1]) +
             static_cast<std::size_t>(sizes[l + 1]);
    return n;
}

void MlpSpec::validate() const
{
    if (sizes.size() < 3)
        throw ConfigError("network needs an input, at least one hidden layer and an output", "policy.hidden");
    for (auto s : sizes)
        if (s < 1)
            throw ConfigError("layer sizes must be positive", "policy.hidden");
}

NetworkParams zero_params(const MlpSpec& spec)
{
    spec.validate();
    NetworkParams p;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        p.weights.push_back(Eigen::MatrixXd::Zero(spec.sizes[l + 1], spec.sizes[l]));
        p.biases.push_back(Eigen::VectorXd::Zero(spec.sizes[l + 1]));
    }
    return p;
}

NetworkParams init_params(const MlpSpec& spec, std::mt19937_64& rng)
{
    auto p = zero_params(spec);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(spec.sizes[l]));
        std::uniform_real_distribution<double> u(-limit, limit);
        auto& w = p.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = u(rng);
        for (Eigen::Index r = 0; r < p.biases[l].size(); ++r)
            p.biases[l](r) = u(rng);
    }
    return p;
}

Genotype flatten(const NetworkParams& params)
{
    Genotype out;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const auto& w = params.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                out.push_back(w(r, c));
        for (Eigen::Index r = 0; r < params.biases[l].size(); ++r)
            out.push_back(params.biases[l](r));
    }
    return out;
}

NetworkParams unflatten(const MlpSpec& spec, std::span<const double> genotype)
{
    if (genotype.size() != spec.parameter_count())
        throw DimensionError("genotype of length " + std::to_string(genotype.size()) + ", network needs " +
                             std::to_string(spec.parameter_count()));
    auto p = zero_params(spec);
    std::size_t k = 0;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        auto& w = p.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = genotype[k++];
        for (Eigen::Index r = 0; r < p.biases[l].size(); ++r)
            p.biases[l](r) = genotype[k++];
    }
    return p;
}

ForwardCache mlp_forward_batch(const MlpSpec& spec, const NetworkParams& params, const Eigen::MatrixXd& inputs)
{
    if (inputs.rows() != spec.input_size())
        throw DimensionError("input of size " + std::to_string(inputs.rows()) + ", network expects " +
                             std::to_string(spec.input_size()));
    if (params.weights.size() != spec.layer_count())
        throw DimensionError("parameters do not match the network layout");

    ForwardCache cache;
    cache.activations.reserve(spec.layer_count() + 1);
    cache.activations.push_back(inputs);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        Eigen::MatrixXd z = params.weights[l] * cache.activations.back();
        z.colwise() += params.biases[l];
        const bool last = l + 1 == spec.layer_count();
        if (!last || spec.output == Activation::tanh)
            z = z.array().tanh().matrix();
        cache.activations.push_back(std::move(z));
    }
    return cache;
}

Eigen::VectorXd mlp_forward(const MlpSpec& spec, const NetworkParams& params, const Eigen::VectorXd& input)
{
    return mlp_forward_batch(spec, params, input).output().col(0);
}

BackwardResult mlp_backward(const MlpSpec& spec, const NetworkParams& params, const ForwardCache& cache,
                            const Eigen::MatrixXd& output_grad)
{
    BackwardResult out;
    out.grads = zero_params(spec);
    Eigen::MatrixXd delta = output_grad;
    for (std::size_t l = spec.layer_count(); l-- > 0;) {
        const bool last = l + 1 == spec.layer_count();
        if (!last || spec.output == Activation::tanh)
            delta = (delta.array() * (1.0 - cache.activations[l + 1].array().square())).matrix();
        out.grads.weights[l] = delta * cache.activations[l].transpose();
        out.grads.biases[l] = delta.rowwise().sum();
        delta = params.weights[l].transpose() * delta;
    }
    out.input_grad = std::move(delta);
    return out;
}

void soft_update(NetworkParams& target, const NetworkParams& online, double tau)
{
    check_same_shape(target, online);
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        target.weights[l] = tau * online.weights[l] + (1.0 - tau) * target.weights[l];
        target.biases[l] = tau * online.biases[l] + (1.0 - tau) * target.biases[l];
    }
}

Adam::Adam(const MlpSpec& spec, double learning_rate)
    : _lr(learning_rate), _m(zero_params(spec)), _v(zero_params(spec))
{
}

void Adam::step(NetworkParams& params, const NetworkParams& grads)
{
    check_same_shape(params, grads);
    if (_m.weights.empty()) {
        _m = grads;
        for (auto& w : _m.weights)
            w.setZero();
        for (auto& b : _m.biases)
            b.setZero();
        _v = _m;
    }
    ++_t;
    const double c1 = 1.0 - std::pow(_beta1, static_cast<double>(_t));
    const double c2 = 1.0 - std::pow(_beta2, static_cast<double>(_t));
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = _beta1 * m + (1.0 - _beta1) * g;
        v = (_beta2 * v.array() + (1.0 - _beta2) * g.array().square()).matrix();
        p = (p.array() - _lr * (m.array() / c1) / ((v.array() / c2).sqrt() + _eps)).matrix();
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        update(params.weights[l], grads.weights[l], _m.weights[l], _v.weights[l]);
        update(params.biases[l], grads.biases[l], _m.biases[l], _v.biases[l]);
    }
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim, int reward_dim)
    : _capacity(capacity)
    , _states(state_dim, static_cast<Eigen::Index>(capacity))
    , _actions(action_dim, static_cast<Eigen::Index>(capacity))
    , _rewards(reward_dim, static_cast<Eigen::Index>(capacity))
    , _next_states(state_dim, static_cast<Eigen::Index>(capacity))
    , _dones(static_cast<Eigen::Index>(capacity))
{
    if (capacity == 0)
        throw ConfigError("replay buffer capacity must be positive", "td3.buffer_size");
}

void ReplayBuffer::push(const Transition& t)
{
    if (t.state.size() != _states.rows() || t.next_state.size() != _states.rows() ||
        t.action.size() != _actions.rows() || t.reward.size() != _rewards.rows())
        throw DimensionError("transition does not match the buffer layout");
    const auto c = static_cast<Eigen::Index>(_cursor);
    _states.col(c) = t.state;
    _actions.col(c) = t.action;
    _rewards.col(c) = t.reward;
    _next_states.col(c) = t.next_state;
    _dones(c) = t.done ? 1.0 : 0.0;
    _cursor = (_cursor + 1) % _capacity;
    _size = std::min(_size + 1, _capacity);
}

void ReplayBuffer::push(std::span<const Transition> ts)
{
    for (const auto& t : ts)
        push(t);
}

Transition ReplayBuffer::at(std::size_t i) const
{
    if (i >= _size)
        throw std::out_of_range("replay buffer index out of range");
    const auto c = static_cast<Eigen::Index>(slot(i));
    return {_states.col(c), _actions.col(c), _rewards.col(c), _next_states.col(c), _dones(c) != 0.0};
}

TransitionBatch ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const
{
    if (_size < batch || _size == 0)
        throw InsufficientDataError("replay buffer holds " + std::to_string(_size) + " transitions, batch needs " +
                                    std::to_string(batch));
    const auto n = static_cast<Eigen::Index>(batch);
    TransitionBatch out{Eigen::MatrixXd(_states.rows(), n), Eigen::MatrixXd(_actions.rows(), n),
                        Eigen::MatrixXd(_rewards.rows(), n), Eigen::MatrixXd(_states.rows(), n), Eigen::VectorXd(n)};
    std::uniform_int_distribution<std::size_t> pick(0, _size - 1);
    for (Eigen::Index b = 0; b < n; ++b) {
        const auto c = static_cast<Eigen::Index>(slot(pick(rng)));
        out.states.col(b) = _states.col(c);
        out.actions.col(b) = _actions.col(c);
        out.rewards.col(b) = _rewards.col(c);
        out.next_states.col(b) = _next_states.col(c);
        out.dones(b) = _dones(c);
    }
    return out;
}

// ---------------------------------------------------------------------------

Td3Params Td3Params::full_scale()
{
    Td3Params hp;
    hp.buffer_size = 1000000;
    hp.batch_size = 256;
    hp.critic_hidden = {256, 256};
    hp.critic_steps = 300;
    hp.pg_steps = 100;
    return hp;
}

void Td3Params::validate() const
{
    if (buffer_size == 0)
        throw ConfigError("must be positive", "td3.buffer_size");
    if (batch_size == 0)
        throw ConfigError("must be positive", "td3.batch_size");
    if (critic_hidden.empty())
        throw ConfigError("critic needs at least one hidden layer", "td3.critic_hidden");
    for (auto h : critic_hidden)
        if (h < 1)
            throw ConfigError("layer sizes must be positive", "td3.critic_hidden");
    if (critic_steps < 0)
        throw ConfigError("must be non-negative", "td3.critic_steps");
    if (pg_steps < 0)
        throw ConfigError("must be non-negative", "td3.pg_steps");
    if (policy_delay < 1)
        throw ConfigError("must be at least 1", "td3.policy_delay");
    if (!(discount >= 0.0 && discount <= 1.0))
        throw ConfigError("must lie in [0, 1]", "td3.discount");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("must lie in [0, 1]", "td3.tau");
    if (!(policy_noise >= 0.0) || !(noise_clip >= 0.0))
        throw ConfigError("noise scales must be non-negative", "td3.policy_noise");
}

ObjectiveTrainState make_train_state(const MlpSpec& actor_spec, const Td3Params& hp, Eigen::VectorXd reward_weights,
                                     std::uint64_t seed)
{
    actor_spec.validate();
    ObjectiveTrainState s;
    s.actor_spec = actor_spec;
    s.critic_spec.sizes.push_back(actor_spec.input_size() + actor_spec.output_size());
    s.critic_spec.sizes.insert(s.critic_spec.sizes.end(), hp.critic_hidden.begin(), hp.critic_hidden.end());
    s.critic_spec.sizes.push_back(1);
    s.critic_spec.output = Activation::identity;
    s.reward_weights = std::move(reward_weights);
    s.rng.seed(seed);

    s.actor = init_params(s.actor_spec, s.rng);
    s.critic1 = init_params(s.critic_spec, s.rng);
    s.critic2 = init_params(s.critic_spec, s.rng);
    s.target_actor = s.actor;
    s.target_critic1 = s.critic1;
    s.target_critic2 = s.critic2;
    s.actor_opt = Adam(s.actor_spec, hp.actor_lr);
    s.critic1_opt = Adam(s.critic_spec, hp.critic_lr);
    s.critic2_opt = Adam(s.critic_spec, hp.critic_lr);
    return s;
}

ObjectiveTrainState make_objective_state(const MlpSpec& actor_spec, const Td3Params& hp, std::size_t objective,
                                         std::size_t objective_count, std::uint64_t seed)
{
    if (objective >= objective_count)
        throw ConfigError("objective index out of range", "algorithm.pg_objectives");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(objective_count));
    w(static_cast<Eigen::Index>(objective)) = 1.0;
    return make_train_state(actor_spec, hp, std::move(w), seed);
}

LossAndGrads critic_loss(const MlpSpec& critic_spec, const NetworkParams& critic, const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& actions, const Eigen::VectorXd& targets)
{
    const auto cache = mlp_forward_batch(critic_spec, critic, stack(states, actions));
    const Eigen::RowVectorXd diff = cache.output().row(0) - targets.transpose();
    const double n = static_cast<double>(diff.size());
    LossAndGrads out;
    out.value = diff.squaredNorm() / n;
    out.grads = mlp_backward(critic_spec, critic, cache, (2.0 / n) * diff).grads;
    return out;
}

LossAndGrads actor_objective(const MlpSpec& actor_spec, const NetworkParams& actor, const MlpSpec& critic_spec,
                             const NetworkParams& critic, const Eigen::MatrixXd& states)
{
    const auto actor_cache = mlp_forward_batch(actor_spec, actor, states);
    const auto critic_cache = mlp_forward_batch(critic_spec, critic, stack(states, actor_cache.output()));
    const double n = static_cast<double>(states.cols());

    LossAndGrads out;
    out.value = critic_cache.output().sum() / n;
    const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, states.cols(), 1.0 / n);
    const auto critic_back = mlp_backward(critic_spec, critic, critic_cache, dq);
    const Eigen::MatrixXd action_grad = critic_back.input_grad.bottomRows(actor_spec.output_size());
    out.grads = mlp_backward(actor_spec, actor, actor_cache, action_grad).grads;
    return out;
}

Eigen::VectorXd td3_targets(ObjectiveTrainState& state, const TransitionBatch& batch, const Td3Params& hp)
{
    Eigen::MatrixXd next_actions = mlp_forward_batch(state.actor_spec, state.target_actor, batch.next_states).output();
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index c = 0; c < next_actions.cols(); ++c)
        for (Eigen::Index r = 0; r < next_actions.rows(); ++r) {
            const double eps = std::clamp(hp.policy_noise * noise(state.rng), -hp.noise_clip, hp.noise_clip);
            next_actions(r, c) = std::clamp(next_actions(r, c) + eps, -1.0, 1.0);
        }

    const Eigen::MatrixXd inputs = stack(batch.next_states, next_actions);
    const Eigen::RowVectorXd q1 = mlp_forward_batch(state.critic_spec, state.target_critic1, inputs).output().row(0);
    const Eigen::RowVectorXd q2 = mlp_forward_batch(state.critic_spec, state.target_critic2, inputs).output().row(0);
    const Eigen::VectorXd rewards = batch.rewards.transpose() * state.reward_weights;
    const Eigen::VectorXd q_min = q1.cwiseMin(q2).transpose();
    return (rewards.array() + hp.discount * (1.0 - batch.dones.array()) * q_min.array()).matrix();
}

double critic_update(ObjectiveTrainState& state, const TransitionBatch& batch, const Td3Params& hp)
{
    if (batch.size() == 0)
        throw InsufficientDataError("empty critic batch");
    const auto targets = td3_targets(state, batch, hp);
    const auto l1 = critic_loss(state.critic_spec, state.critic1, batch.states, batch.actions, targets);
    const auto l2 = critic_loss(state.critic_spec, state.critic2, batch.states, batch.actions, targets);
    state.critic1_opt.step(state.critic1, l1.grads);
    state.critic2_opt.step(state.critic2, l2.grads);
    ++state.critic_steps;
    return l1.value + l2.value;
}

double actor_update(ObjectiveTrainState& state, const TransitionBatch& batch, const Td3Params& hp)
{
    const auto j = actor_objective(state.actor_spec, state.actor, state.critic_spec, state.critic1, batch.states);
    state.actor_opt.step(state.actor, negated(j.grads));
    soft_update(state.target_actor, state.actor, hp.tau);
    soft_update(state.target_critic1, state.critic1, hp.tau);
    soft_update(state.target_critic2, state.critic2, hp.tau);
    ++state.actor_steps;
    return j.value;
}

Genotype pg_mutate(std::span<const double> genotype, const ObjectiveTrainState& state, const ReplayBuffer& buffer,
                   int steps, double learning_rate, std::size_t batch_size, std::mt19937_64& rng)
{
    auto policy = unflatten(state.actor_spec, genotype);
    if (steps <= 0)
        return flatten(policy);
    if (buffer.size() < batch_size || buffer.size() == 0)
        throw InsufficientDataError("replay buffer too small for policy-gradient variation");

    Adam opt(state.actor_spec, learning_rate);
    for (int s = 0; s < steps; ++s) {
        const auto batch = buffer.sample(batch_size, rng);
        const auto j = actor_objective(state.actor_spec, policy, state.critic_spec, state.critic1, batch.states);
        opt.step(policy, negated(j.grads));
    }
    return flatten(policy);
}

TrainReport train_networks(std::span<ObjectiveTrainState> states, const ReplayBuffer& buffer, const Td3Params& hp)
{
    if (buffer.size() == 0)
        throw InsufficientDataError("cannot train on an empty replay buffer");
    TrainReport report;
    for (auto& state : states) {
        double loss = 0.0;
        double objective = 0.0;
        for (int step = 0; step < hp.critic_steps; ++step) {
            const auto batch = buffer.sample(hp.batch_size, state.rng);
            loss = critic_update(state, batch, hp);
            if (state.critic_steps % static_cast<std::uint64_t>(hp.policy_delay) == 0)
                objective = actor_update(state, batch, hp);
        }
        report.critic_loss.push_back(loss);
        report.actor_objective.push_back(objective);
    }
    return report;
}

} // namespace moqd
