// Mixture agents over a suite of I/O models.
//
// Both variants act by mixing the models' action laws under the current
// posterior. They differ only in how the posterior reacts to the agent's own
// actions:
//   - Naive: actions are evidence, w_m <- w_m * P_m(a_t | ao_{<t}).
//   - Causal: actions are interventions and leave the weights untouched; only
//     observations move them (the Bayesian control rule).
#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "bcr/core.hpp"
#include "bcr/models.hpp"

namespace bcr {

enum class UpdateMode { Naive, Causal };

std::string_view to_string(UpdateMode mode);
/// Accepts "naive" or "causal"; throws InvalidArgument otherwise.
UpdateMode parse_update_mode(std::string_view text);

/// Incremental mixture agent. Log-weights are kept unnormalized so that they
/// always equal ln P(m) plus the accumulated log-likelihood terms.
class MixtureAgent {
 public:
  MixtureAgent(std::vector<ModelPtr> models, Distribution prior,
               UpdateMode mode);

  /// Mixture action law for the current step, under the weights in force
  /// before a_t was issued.
  Distribution action_distribution() const;

  /// Samples a_t from action_distribution() (one draw) and records it.
  Symbol act(CounterRng& rng);

  /// Registers a_t as pending. Naive mode folds ln P_m(a_t | ao_{<t}) into the
  /// weights; Causal mode leaves them unchanged.
  void record_action(Symbol a);

  /// Folds ln P_m(o_t | ao_{<t} a_t) into the weights and closes the step.
  void record_observation(Symbol o);

  /// Mixture observation law for action `a` at the current step. Naive mode
  /// uses w_m(ao_{<t} a), Causal mode v_m(ao_{<t}). Always evaluated from the
  /// step-boundary weights, so it is valid before or after record_action.
  Distribution predictive_obs(Symbol a) const;

  Distribution posterior() const { return normalize(logw_); }

  const LogWeights& log_weights() const noexcept { return logw_; }
  const History& history() const noexcept { return history_; }
  UpdateMode mode() const noexcept { return mode_; }
  const std::vector<ModelPtr>& models() const noexcept { return models_; }
  const Distribution& prior() const noexcept { return prior_; }

 private:
  LogWeights with_action_evidence(Symbol a) const;

  std::vector<ModelPtr> models_;
  Distribution prior_;
  UpdateMode mode_;
  // Weights at the step boundary ao_{<t}.
  LogWeights boundary_logw_;
  // Current weights: boundary plus the pending action factor in Naive mode.
  LogWeights logw_;
  History history_;
};

/// The same mixture written as a stateless I/O system: every conditional is
/// recomputed from the prior and sequence likelihoods of the full history.
/// Serves as the candidate "optimal agent" in the divergence criteria.
class MixtureModel final : public IOModel {
 public:
  MixtureModel(std::vector<ModelPtr> models, Distribution prior,
               UpdateMode mode, std::string label = "");

  Distribution action_dist(std::span<const Interaction> past) const override;
  Distribution obs_dist(std::span<const Interaction> past,
                        Symbol action) const override;
  std::size_t action_count() const override;
  std::size_t observation_count() const override;
  const std::string& label() const override { return label_; }

  /// Posterior over the suite after `h` (w_m for Naive, v_m for Causal).
  Distribution weights(const History& h) const;

 private:
  std::vector<ModelPtr> models_;
  Distribution prior_;
  UpdateMode mode_;
  std::string label_;
};

}  // namespace bcr
