#ifndef MOQD_ENVS_HPP
#define MOQD_ENVS_HPP

#include <moqd/archive.hpp>
#include <moqd/neuro.hpp>

#include <array>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace moqd {

struct EnvSpec {
    std::string name = "pointwalker";
    int state_dim = 3;
    int action_dim = 2;
    int episode_length = 100;
    int descriptor_dim = 2;
    Bounds descriptor_bounds{{{0.0, 1.0}, {0.0, 1.0}}};
    int objectives = 2;
    double energy_weight = 1.0; ///< w1, scales the energy penalty
    double dt = 0.1;
    int phase_period = 20;

    void validate() const;
};

// ---------------------------------------------------------------------------
// PointWalker: a 1-D body pushed by two actuators. Objective 0 is energy, 1 is velocity.
// ---------------------------------------------------------------------------

struct PointWalkerState {
    double x = 0.0;
    double v = 0.0;
    int phase = 0;
};

struct PointWalkerStep {
    PointWalkerState next;
    std::array<double, 2> reward{}; ///< (energy, velocity)
};

PointWalkerStep pointwalker_step(const PointWalkerState& state, std::array<double, 2> action, const EnvSpec& spec);

/// Policy input: (v, sin(2 pi phase / period), cos(2 pi phase / period)).
Eigen::VectorXd pointwalker_observation(const PointWalkerState& state, const EnvSpec& spec);

/// Fraction of steps in which each actuator command is strictly positive.
std::array<double, 2> pointwalker_descriptor(std::span<const std::array<double, 2>> actions);

struct EpisodeResult {
    ScoreVector scores;
    Descriptor descriptor;
    std::vector<Transition> transitions;
};

/// Deterministic episode from the rest state; scores are undiscounted reward sums.
EpisodeResult rollout(std::span<const double> genotype, const EnvSpec& spec, const MlpSpec& policy);

/// Policy network layout for the walker with the given hidden sizes.
MlpSpec pointwalker_policy_spec(const EnvSpec& spec, const std::vector<int>& hidden);

// ---------------------------------------------------------------------------
// BiSphere: closed-form bi-objective function with a known Pareto set.
// ---------------------------------------------------------------------------

struct FunctionEvaluation {
    ScoreVector scores;
    Descriptor descriptor;
};

/// z = (tanh(g) + 1) / 2, f1 = -sum (z - 0.25)^2, f2 = -sum (z - 0.75)^2, descriptor (z1, z2).
FunctionEvaluation bisphere_evaluate(std::span<const double> genotype);

// ---------------------------------------------------------------------------
// Task interface used by the optimization loops
// ---------------------------------------------------------------------------

struct Evaluation {
    ScoreVector scores;
    Descriptor descriptor;
    std::vector<Transition> transitions; ///< empty for non-sequential tasks
};

class Task {
public:
    virtual ~Task() = default;

    virtual std::string name() const = 0;
    /// Sequential decision task whose transitions can feed critics.
    virtual bool is_mdp() const = 0;
    virtual std::size_t genotype_size() const = 0;
    virtual std::size_t objective_count() const = 0;
    virtual Bounds descriptor_bounds() const = 0;
    virtual Genotype random_genotype(std::mt19937_64& rng) const = 0;
    virtual Evaluation evaluate(std::span<const double> genotype) const = 0;

    /// Only meaningful when is_mdp().
    virtual const MlpSpec& policy_spec() const;
    virtual int state_dim() const { return 0; }
    virtual int action_dim() const { return 0; }
};

class PointWalkerTask final : public Task {
public:
    PointWalkerTask(EnvSpec spec, std::vector<int> hidden);

    std::string name() const override { return "pointwalker"; }
    bool is_mdp() const override { return true; }
    std::size_t genotype_size() const override { return _policy.parameter_count(); }
    std::size_t objective_count() const override { return 2; }
    Bounds descriptor_bounds() const override { return _spec.descriptor_bounds; }
    Genotype random_genotype(std::mt19937_64& rng) const override;
    Evaluation evaluate(std::span<const double> genotype) const override;
    const MlpSpec& policy_spec() const override { return _policy; }
    int state_dim() const override { return _spec.state_dim; }
    int action_dim() const override { return _spec.action_dim; }

    const EnvSpec& spec() const { return _spec; }

private:
    EnvSpec _spec;
    MlpSpec _policy;
};

class BiSphereTask final : public Task {
public:
    /// Genotypes are drawn uniformly in [-init_range, init_range]^n.
    explicit BiSphereTask(std::size_t genotype_size, double init_range = 1.5);

    std::string name() const override { return "bisphere"; }
    bool is_mdp() const override { return false; }
    std::size_t genotype_size() const override { return _n; }
    std::size_t objective_count() const override { return 2; }
    Bounds descriptor_bounds() const override { return Bounds{{{0.0, 1.0}, {0.0, 1.0}}}; }
    Genotype random_genotype(std::mt19937_64& rng) const override;
    Evaluation evaluate(std::span<const double> genotype) const override;

private:
    std::size_t _n;
    double _init_range;
};

} // namespace moqd

#endif
