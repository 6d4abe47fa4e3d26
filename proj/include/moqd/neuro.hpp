#ifndef MOQD_NEURO_HPP
#define MOQD_NEURO_HPP

#include <moqd/archive.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace moqd {

// ---------------------------------------------------------------------------
// Multilayer perceptrons
// ---------------------------------------------------------------------------

enum class Activation { tanh, identity };

/// Layer sizes from input to output. Hidden layers always use tanh.
struct MlpSpec {
    std::vector<int> sizes;
    Activation output = Activation::tanh;

    int input_size() const { return sizes.front(); }
    int output_size() const { return sizes.back(); }
    std::size_t layer_count() const { return sizes.size() - 1; }
    std::size_t parameter_count() const;
    void validate() const;
};

/// weights[l] has shape (sizes[l+1], sizes[l]).
struct NetworkParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    bool operator==(const NetworkParams&) const = default;
};

NetworkParams zero_params(const MlpSpec& spec);
/// Uniform in +-1/sqrt(fan_in) for weights and biases.
NetworkParams init_params(const MlpSpec& spec, std::mt19937_64& rng);

/// Layer by layer: weights row-major, then biases.
Genotype flatten(const NetworkParams& params);
NetworkParams unflatten(const MlpSpec& spec, std::span<const double> genotype);

Eigen::VectorXd mlp_forward(const MlpSpec& spec, const NetworkParams& params, const Eigen::VectorXd& input);

/// Activations kept for the backward pass. Columns are batch entries.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations; ///< activations[0] is the input
    const Eigen::MatrixXd& output() const { return activations.back(); }
};

ForwardCache mlp_forward_batch(const MlpSpec& spec, const NetworkParams& params, const Eigen::MatrixXd& inputs);

struct BackwardResult {
    NetworkParams grads;
    Eigen::MatrixXd input_grad;
};

/// Reverse-mode pass given dL/d(output); gradients are summed over the batch.
BackwardResult mlp_backward(const MlpSpec& spec, const NetworkParams& params, const ForwardCache& cache,
                            const Eigen::MatrixXd& output_grad);

/// target <- tau * online + (1 - tau) * target
void soft_update(NetworkParams& target, const NetworkParams& online, double tau);

/// Adam on a NetworkParams-shaped parameter set; `step` descends along the given gradient.
class Adam {
public:
    Adam() = default;
    Adam(const MlpSpec& spec, double learning_rate);

    void step(NetworkParams& params, const NetworkParams& grads);
    double learning_rate() const { return _lr; }

private:
    double _lr = 1e-3;
    double _beta1 = 0.9;
    double _beta2 = 0.999;
    double _eps = 1e-8;
    std::int64_t _t = 0;
    NetworkParams _m;
    NetworkParams _v;
};

// ---------------------------------------------------------------------------
// Replay buffer
// ---------------------------------------------------------------------------

struct Transition {
    Eigen::VectorXd state;
    Eigen::VectorXd action;
    Eigen::VectorXd reward; ///< one entry per objective
    Eigen::VectorXd next_state;
    bool done = false;
};

/// Columns are transitions.
struct TransitionBatch {
    Eigen::MatrixXd states;
    Eigen::MatrixXd actions;
    Eigen::MatrixXd rewards;
    Eigen::MatrixXd next_states;
    Eigen::VectorXd dones;

    Eigen::Index size() const { return states.cols(); }
};

/// Fixed-capacity FIFO ring. Writes must be serialized; sampling is read-only.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int state_dim, int action_dim, int reward_dim);

    void push(const Transition& t);
    void push(std::span<const Transition> ts);

    std::size_t size() const { return _size; }
    std::size_t capacity() const { return _capacity; }
    int state_dim() const { return static_cast<int>(_states.rows()); }
    int action_dim() const { return static_cast<int>(_actions.rows()); }
    int reward_dim() const { return static_cast<int>(_rewards.rows()); }

    /// i-th oldest stored transition.
    Transition at(std::size_t i) const;

    /// Uniform with replacement. Throws InsufficientDataError when size() < batch.
    TransitionBatch sample(std::size_t batch, std::mt19937_64& rng) const;

private:
    std::size_t slot(std::size_t i) const { return (_cursor + _capacity - _size + i) % _capacity; }

    std::size_t _capacity;
    std::size_t _cursor = 0;
    std::size_t _size = 0;
    Eigen::MatrixXd _states;
    Eigen::MatrixXd _actions;
    Eigen::MatrixXd _rewards;
    Eigen::MatrixXd _next_states;
    Eigen::VectorXd _dones;
};

// ---------------------------------------------------------------------------
// TD3 machinery
// ---------------------------------------------------------------------------

struct Td3Params {
    std::size_t buffer_size = 100000;
    std::size_t batch_size = 128;
    std::vector<int> critic_hidden = {64, 64};
    double critic_lr = 3e-4;
    double actor_lr = 3e-4;
    double policy_lr = 1e-3;
    int critic_steps = 30;
    int pg_steps = 10;
    double policy_noise = 0.2;
    double noise_clip = 0.2;
    double discount = 0.99;
    double tau = 0.005;
    int policy_delay = 2;

    /// Large critics and long training; the full-scale preset.
    static Td3Params full_scale();
    void validate() const;
};

/// Actor, twin critics and their targets for one scalarized objective.
struct ObjectiveTrainState {
    MlpSpec actor_spec;
    MlpSpec critic_spec;
    /// Critic reward is reward_weights . r (unit vector for a single objective).
    Eigen::VectorXd reward_weights;

    NetworkParams actor, critic1, critic2;
    NetworkParams target_actor, target_critic1, target_critic2;
    Adam actor_opt, critic1_opt, critic2_opt;

    std::uint64_t critic_steps = 0;
    std::uint64_t actor_steps = 0;
    std::mt19937_64 rng;
};

ObjectiveTrainState make_train_state(const MlpSpec& actor_spec, const Td3Params& hp, Eigen::VectorXd reward_weights,
                                     std::uint64_t seed);
/// Critic on reward component `objective` out of `objective_count`.
ObjectiveTrainState make_objective_state(const MlpSpec& actor_spec, const Td3Params& hp, std::size_t objective,
                                         std::size_t objective_count, std::uint64_t seed);

struct LossAndGrads {
    double value = 0.0;
    NetworkParams grads;
};

/// mean((Q(s,a) - y)^2) and its parameter gradient.
LossAndGrads critic_loss(const MlpSpec& critic_spec, const NetworkParams& critic, const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& actions, const Eigen::VectorXd& targets);

/// mean Q(s, pi(s)) and its gradient with respect to the actor parameters.
LossAndGrads actor_objective(const MlpSpec& actor_spec, const NetworkParams& actor, const MlpSpec& critic_spec,
                             const NetworkParams& critic, const Eigen::MatrixXd& states);

/// Clipped double-Q targets with target-policy smoothing.
Eigen::VectorXd td3_targets(ObjectiveTrainState& state, const TransitionBatch& batch, const Td3Params& hp);

/// One gradient step on both critics; returns the summed loss before the step.
double critic_update(ObjectiveTrainState& state, const TransitionBatch& batch, const Td3Params& hp);

/// One ascent step on the actor followed by soft updates of every target; returns the objective.
double actor_update(ObjectiveTrainState& state, const TransitionBatch& batch, const Td3Params& hp);

/// Gradient ascent of a genotype's policy on mean Q1(s, pi(s)). The critic is not modified.
Genotype pg_mutate(std::span<const double> genotype, const ObjectiveTrainState& state, const ReplayBuffer& buffer,
                   int steps, double learning_rate, std::size_t batch_size, std::mt19937_64& rng);

struct TrainReport {
    std::vector<double> critic_loss; ///< final loss per objective
    std::vector<double> actor_objective;
};

/// critic_steps critic updates per objective, with an actor update every policy_delay steps.
TrainReport train_networks(std::span<ObjectiveTrainState> states, const ReplayBuffer& buffer, const Td3Params& hp);

} // namespace moqd

#endif
