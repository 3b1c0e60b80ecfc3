// Simulation engine, instantaneous deviation d(t), ensemble statistics and
// exhaustive finite-horizon evaluation of the divergence criteria.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcr/agents.hpp"
#include "bcr/core.hpp"
#include "bcr/models.hpp"

namespace bcr {

//---------------------------------------------------------------------------//
// Simulation
//---------------------------------------------------------------------------//

/// Model suite shared by the agent (as hypotheses) and the environment pool.
/// The environment is always one of the suite members; d(t) is measured
/// against the reference member.
struct Experiment {
  std::vector<ModelPtr> suite;
  Distribution prior;
  std::size_t reference = 0;

  /// Throws InvalidArgument on an empty suite, prior size mismatch or
  /// out-of-range reference.
  void validate() const;
};

/// The two-model suite with uniform prior and reference P_0.
Experiment biased_pair_experiment();

struct Trajectory {
  std::vector<Interaction> steps;
  RunKey seed;
  UpdateMode agent_mode = UpdateMode::Causal;
  std::string env_id;
};

struct DeviationTrace {
  std::vector<double> values;
};

struct SimulationResult {
  Trajectory trajectory;
  DeviationTrace trace;
  /// Posterior after each step, row-major [t][m].
  std::vector<double> posteriors;
};

/// One agent/environment step: a_t from the agent, o_t from the environment,
/// o_t fed back to the agent.
Interaction step(MixtureAgent& agent, const IOModel& env, CounterRng& rng);

/// d(t) in bits: KL of the reference action law against the agent's action
/// law at the step boundary, plus KL of the reference observation law against
/// the agent's predictive observation law at `last_action`.
double deviation(const MixtureAgent& agent, const IOModel& reference,
                 Symbol last_action);

/// d(t) of an agent whose posterior sits entirely on `other`, evaluated at the
/// empty history.
double extreme_deviation(const IOModel& reference, const IOModel& other);

/// Runs `horizon` steps of a fresh agent against suite member `env_index`.
/// Bit-reproducible given (mode, env, horizon, key).
SimulationResult simulate(const Experiment& exp, UpdateMode mode,
                          std::size_t env_index, std::size_t horizon,
                          RunKey key);

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

class BasinSpec {
 public:
  /// Centers must be non-empty and strictly increasing.
  explicit BasinSpec(std::vector<double> centers);

  const std::vector<double>& centers() const noexcept { return centers_; }
  /// Index of the nearest center; ties go to the lower center.
  std::size_t classify(double value) const;

 private:
  std::vector<double> centers_;
};

struct TraceStats {
  std::size_t count = 0;
  std::vector<double> mean;
  /// Population standard deviation; NaN columns for an empty group.
  std::vector<double> stddev;
};

struct EnsembleSummary {
  std::size_t n_runs = 0;
  std::size_t horizon = 0;
  TraceStats overall;
  std::vector<std::size_t> basin_counts;
  std::vector<TraceStats> per_basin;
  /// Mean of d(t) over the final window of each run, in run order.
  std::vector<double> final_window_means;
  std::vector<std::size_t> basin_of_run;
};

/// Number of trailing steps used for basin classification (10%, at least 1).
std::size_t final_window_length(std::size_t horizon);

/// Runs `n_runs` independent simulations keyed (master_seed, run index) on
/// `jobs` threads. The result does not depend on `jobs`.
EnsembleSummary ensemble(const Experiment& exp, UpdateMode mode,
                         std::size_t env_index, std::size_t horizon,
                         std::size_t n_runs, std::uint64_t master_seed,
                         const BasinSpec& basins, unsigned jobs = 1);

/// Per-step mean and population standard deviation of equal-length traces.
TraceStats trace_stats(const std::vector<const std::vector<double>*>& traces,
                       std::size_t horizon);

//---------------------------------------------------------------------------//
// Divergence criteria
//---------------------------------------------------------------------------//

/// D weights histories by P_m(ao_{<t}); C treats actions as interventions and
/// weights them by the observation-only likelihood P(^ao_{<t} | m).
enum class Criterion { D, C };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view text);

/// Largest number of complete histories (|A||O|)^horizon that the exhaustive
/// evaluators accept.
inline constexpr std::size_t kMaxEnumeratedHistories = 256;

/// Throws InvalidArgument when exhaustive enumeration would exceed
/// kMaxEnumeratedHistories or horizon is zero.
void check_enumeration_size(const std::vector<ModelPtr>& suite,
                            std::size_t horizon);

/// Criterion value in bits of `candidate` against the suite, summed over
/// steps 1..horizon, by one recursive pass over the history tree.
double total_divergence(Criterion criterion, const IOModel& candidate,
                        const std::vector<ModelPtr>& suite,
                        const Distribution& prior, std::size_t horizon);

double total_divergence_naive(const IOModel& candidate,
                              const std::vector<ModelPtr>& suite,
                              const Distribution& prior, std::size_t horizon);

double total_divergence_causal(const IOModel& candidate,
                               const std::vector<ModelPtr>& suite,
                               const Distribution& prior, std::size_t horizon);

/// Per-step contributions (index tau-1), each computed on its own from the
/// histories of length tau-1 and sequence likelihoods.
std::vector<double> divergence_terms(Criterion criterion,
                                     const IOModel& candidate,
                                     const std::vector<ModelPtr>& suite,
                                     const Distribution& prior,
                                     std::size_t horizon);

/// The minimizer of the criterion: the naive mixture for D, the Bayesian
/// control rule agent for C.
ModelPtr optimal_agent(Criterion criterion, const std::vector<ModelPtr>& suite,
                       const Distribution& prior);

/// Base conditionals mixed with history-keyed random noise:
/// (1 - epsilon) base + epsilon noise(history). Stateless and deterministic.
class PerturbedModel final : public IOModel {
 public:
  PerturbedModel(ModelPtr base, double epsilon, std::uint64_t noise_key);

  Distribution action_dist(std::span<const Interaction> past) const override;
  Distribution obs_dist(std::span<const Interaction> past,
                        Symbol action) const override;
  std::size_t action_count() const override { return base_->action_count(); }
  std::size_t observation_count() const override {
    return base_->observation_count();
  }
  const std::string& label() const override { return label_; }

 private:
  Distribution blend(const Distribution& base, std::uint64_t history_hash) const;

  ModelPtr base_;
  double epsilon_;
  std::uint64_t noise_key_;
  std::string label_;
};

struct MinimizerReport {
  Criterion criterion = Criterion::D;
  std::size_t horizon = 0;
  double optimal_value = 0.0;
  std::vector<double> epsilons;
  std::vector<double> perturbed_values;

  /// perturbed - optimal for each candidate.
  std::vector<double> margins() const;
  /// Smallest margin; +inf when there are no perturbations.
  double min_margin() const;
  /// Number of candidates beating the optimum by more than `tolerance`.
  std::size_t beaten(double tolerance) const;
};

/// Evaluates the optimal agent and `n_perturbations` random perturbations of
/// it. Failures are reported, not thrown.
MinimizerReport minimizer_check(Criterion criterion,
                                const std::vector<ModelPtr>& suite,
                                const Distribution& prior, std::size_t horizon,
                                std::size_t n_perturbations, CounterRng& rng);

}  // namespace bcr
