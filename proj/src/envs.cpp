#include <moqd/envs.hpp>
#include <moqd/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace moqd {

void EnvSpec::validate() const
{
    if (episode_length < 1)
        throw ConfigError("must be at least 1", "env.episode_length");
    if (descriptor_bounds.dim() != static_cast<std::size_t>(descriptor_dim))
        throw ConfigError("bounds do not match the descriptor dimension", "env.descriptor_bounds");
    if (!(energy_weight >= 0.0))
        throw ConfigError("must be non-negative", "env.energy_weight");
    if (!(dt > 0.0))
        throw ConfigError("must be positive", "env.dt");
    if (phase_period < 1)
        throw ConfigError("must be at least 1", "env.phase_period");
}

PointWalkerStep pointwalker_step(const PointWalkerState& state, std::array<double, 2> action, const EnvSpec& spec)
{
    for (auto& a : action)
        a = std::clamp(a, -1.0, 1.0);

    PointWalkerStep out;
    out.next.v = 0.9 * state.v + 0.1 * (action[0] + action[1]) / 2.0;
    out.next.x = state.x + out.next.v * spec.dt;
    out.next.phase = state.phase + 1;
    out.reward[0] = -spec.energy_weight * std::hypot(action[0], action[1]);
    out.reward[1] = (out.next.x - state.x) / spec.dt;
    return out;
}

Eigen::VectorXd pointwalker_observation(const PointWalkerState& state, const EnvSpec& spec)
{
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(state.phase) / spec.phase_period;
    Eigen::VectorXd obs(3);
    obs << state.v, std::sin(angle), std::cos(angle);
    return obs;
}

std::array<double, 2> pointwalker_descriptor(std::span<const std::array<double, 2>> actions)
{
    std::array<double, 2> out{0.0, 0.0};
    if (actions.empty())
        return out;
    for (const auto& a : actions)
        for (int i = 0; i < 2; ++i)
            if (a[i] > 0.0)
                out[i] += 1.0;
    for (auto& c : out)
        c /= static_cast<double>(actions.size());
    return out;
}

MlpSpec pointwalker_policy_spec(const EnvSpec& spec, const std::vector<int>& hidden)
{
    MlpSpec policy;
    policy.sizes.push_back(spec.state_dim);
    policy.sizes.insert(policy.sizes.end(), hidden.begin(), hidden.end());
    policy.sizes.push_back(spec.action_dim);
    policy.output = Activation::tanh;
    policy.validate();
    return policy;
}

EpisodeResult rollout(std::span<const double> genotype, const EnvSpec& spec, const MlpSpec& policy)
{
    if (policy.input_size() != spec.state_dim || policy.output_size() != spec.action_dim)
        throw DimensionError("policy layout does not match the environment");
    const auto params = unflatten(policy, genotype);

    EpisodeResult result;
    result.scores.assign(2, 0.0);
    result.transitions.reserve(static_cast<std::size_t>(spec.episode_length));
    std::vector<std::array<double, 2>> actions;
    actions.reserve(static_cast<std::size_t>(spec.episode_length));

    PointWalkerState state;
    Eigen::VectorXd obs = pointwalker_observation(state, spec);
    for (int t = 0; t < spec.episode_length; ++t) {
        const Eigen::VectorXd out = mlp_forward(policy, params, obs);
        const std::array<double, 2> action{std::clamp(out(0), -1.0, 1.0), std::clamp(out(1), -1.0, 1.0)};
        const auto step = pointwalker_step(state, action, spec);

        Transition tr;
        tr.state = obs;
        tr.action = Eigen::Vector2d(action[0], action[1]);
        tr.reward = Eigen::Vector2d(step.reward[0], step.reward[1]);
        tr.next_state = pointwalker_observation(step.next, spec);
        // The walker never terminates; the horizon is a time limit, so targets bootstrap.
        tr.done = false;

        result.scores[0] += step.reward[0];
        result.scores[1] += step.reward[1];
        actions.push_back(action);
        obs = tr.next_state;
        state = step.next;
        result.transitions.push_back(std::move(tr));
    }
    const auto desc = pointwalker_descriptor(actions);
    result.descriptor = spec.descriptor_bounds.clip(desc);
    return result;
}

FunctionEvaluation bisphere_evaluate(std::span<const double> genotype)
{
    if (genotype.size() < 2)
        throw DimensionError("bisphere needs at least two genes");
    FunctionEvaluation out;
    out.scores.assign(2, 0.0);
    std::vector<double> z(genotype.size());
    for (std::size_t i = 0; i < genotype.size(); ++i) {
        z[i] = (std::tanh(genotype[i]) + 1.0) / 2.0;
        out.scores[0] -= (z[i] - 0.25) * (z[i] - 0.25);
        out.scores[1] -= (z[i] - 0.75) * (z[i] - 0.75);
    }
    out.descriptor = {z[0], z[1]};
    return out;
}

// ---------------------------------------------------------------------------

const MlpSpec& Task::policy_spec() const
{
    throw ConfigError("task '" + name() + "' has no policy network", "env.name");
}

PointWalkerTask::PointWalkerTask(EnvSpec spec, std::vector<int> hidden)
    : _spec(std::move(spec)), _policy(pointwalker_policy_spec(_spec, hidden))
{
    _spec.validate();
}

Genotype PointWalkerTask::random_genotype(std::mt19937_64& rng) const
{
    return flatten(init_params(_policy, rng));
}

Evaluation PointWalkerTask::evaluate(std::span<const double> genotype) const
{
    auto episode = rollout(genotype, _spec, _policy);
    return {std::move(episode.scores), std::move(episode.descriptor), std::move(episode.transitions)};
}

BiSphereTask::BiSphereTask(std::size_t genotype_size, double init_range) : _n(genotype_size), _init_range(init_range)
{
    if (_n < 2)
        throw ConfigError("bisphere needs at least two genes", "env.genotype_size");
    if (!(_init_range > 0.0))
        throw ConfigError("must be positive", "env.init_range");
}

Genotype BiSphereTask::random_genotype(std::mt19937_64& rng) const
{
    std::uniform_real_distribution<double> u(-_init_range, _init_range);
    Genotype g(_n);
    for (auto& x : g)
        x = u(rng);
    return g;
}

Evaluation BiSphereTask::evaluate(std::span<const double> genotype) const
{
    if (genotype.size() != _n)
        throw DimensionError("genotype of length " + std::to_string(genotype.size()) + ", task needs " +
                             std::to_string(_n));
    auto r = bisphere_evaluate(genotype);
    return {std::move(r.scores), std::move(r.descriptor), {}};
}

} // namespace moqd
