// I/O systems: hypothesis models P_m, environments Q_m, sequence likelihoods
// and the agent/environment coupling.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bcr/core.hpp"

namespace bcr {

/// An I/O system given by its per-step conditionals. Implementations must be
/// stateless: the same history always yields the same distribution.
class IOModel {
 public:
  virtual ~IOModel() = default;

  /// P(a_t | ao_{<t}).
  virtual Distribution action_dist(std::span<const Interaction> past) const = 0;
  /// P(o_t | ao_{<t} a_t).
  virtual Distribution obs_dist(std::span<const Interaction> past,
                                Symbol action) const = 0;

  virtual std::size_t action_count() const = 0;
  virtual std::size_t observation_count() const = 0;
  virtual const std::string& label() const = 0;
};

using ModelPtr = std::shared_ptr<const IOModel>;

/// Model whose action and observation laws ignore the history.
class MemorylessModel final : public IOModel {
 public:
  MemorylessModel(Distribution pa, Distribution po, std::string label = "");

  Distribution action_dist(std::span<const Interaction>) const override {
    return pa_;
  }
  Distribution obs_dist(std::span<const Interaction>, Symbol) const override {
    return po_;
  }
  std::size_t action_count() const override { return pa_.size(); }
  std::size_t observation_count() const override { return po_.size(); }
  const std::string& label() const override { return label_; }

  const Distribution& pa() const noexcept { return pa_; }
  const Distribution& po() const noexcept { return po_; }

 private:
  Distribution pa_;
  Distribution po_;
  std::string label_;
};

MemorylessModel make_memoryless(Distribution pa, Distribution po,
                                std::string label = "");

/// Swaps the two symbols of both the action and observation law. Throws
/// UnsupportedOperation for non-binary alphabets.
MemorylessModel complement(const MemorylessModel& m, std::string label = "");

/// ln P_m(ao_{<t}), including the pending action factor when present.
/// Impossible histories give -inf.
double seq_loglik_full(const IOModel& m, const History& h);

/// ln prod_tau P_m(o_tau | ao_{<tau} a_tau): observation factors only, the
/// actions being treated as interventions.
double seq_loglik_intervened(const IOModel& m, const History& h);

/// The two-model binary suite {P_0, P_1}: P_1 acts 1 with 0.9 and observes 1
/// with 0.6; P_0 is its complement.
std::vector<ModelPtr> biased_pair_suite();

/// Coupling of an agent-side and environment-side system. Actions are taken
/// from the agent, observations from the environment.
class InteractionSystem {
 public:
  InteractionSystem(ModelPtr agent, ModelPtr environment);

  const IOModel& agent() const noexcept { return *agent_; }
  const IOModel& environment() const noexcept { return *environment_; }

  /// ln G(ao_{<t}) under the generative distribution of the coupling.
  double log_prob(const History& h) const;
  /// Draws a realization of the given length.
  History generate(std::size_t length, CounterRng& rng) const;

 private:
  ModelPtr agent_;
  ModelPtr environment_;
};

}  // namespace bcr
