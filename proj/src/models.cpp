#include "bcr/models.hpp"

#include <cmath>

namespace bcr {

namespace {

double log_factor(const Distribution& d, Symbol s) {
  if (s >= d.size()) throw InvalidArgument("symbol out of alphabet range");
  return std::log(d[s]);
}

Distribution swapped(const Distribution& d) {
  return Distribution({d[1], d[0]});
}

}  // namespace

MemorylessModel::MemorylessModel(Distribution pa, Distribution po,
                                 std::string label)
    : pa_(std::move(pa)), po_(std::move(po)), label_(std::move(label)) {}

MemorylessModel make_memoryless(Distribution pa, Distribution po,
                                std::string label) {
  return MemorylessModel(std::move(pa), std::move(po), std::move(label));
}

MemorylessModel complement(const MemorylessModel& m, std::string label) {
  if (m.action_count() != 2 || m.observation_count() != 2) {
    throw UnsupportedOperation("complement requires binary alphabets");
  }
  return MemorylessModel(swapped(m.pa()), swapped(m.po()), std::move(label));
}

double seq_loglik_full(const IOModel& m, const History& h) {
  const auto steps = h.steps();
  double acc = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto past = steps.first(t);
    acc += log_factor(m.action_dist(past), steps[t].action);
    acc += log_factor(m.obs_dist(past, steps[t].action), steps[t].observation);
  }
  if (const auto& a = h.pending_action()) {
    acc += log_factor(m.action_dist(steps), *a);
  }
  return acc;
}

double seq_loglik_intervened(const IOModel& m, const History& h) {
  const auto steps = h.steps();
  double acc = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    acc += log_factor(m.obs_dist(steps.first(t), steps[t].action),
                      steps[t].observation);
  }
  return acc;
}

std::vector<ModelPtr> biased_pair_suite() {
  const MemorylessModel p1 = make_memoryless(Distribution({0.1, 0.9}),
                                             Distribution({0.4, 0.6}), "p1");
  return {std::make_shared<MemorylessModel>(complement(p1, "p0")),
          std::make_shared<MemorylessModel>(p1)};
}

InteractionSystem::InteractionSystem(ModelPtr agent, ModelPtr environment)
    : agent_(std::move(agent)), environment_(std::move(environment)) {
  if (!agent_ || !environment_) {
    throw InvalidArgument("interaction system needs both systems");
  }
  if (agent_->action_count() != environment_->action_count() ||
      agent_->observation_count() != environment_->observation_count()) {
    throw InvalidArgument("agent and environment alphabets disagree");
  }
}

double InteractionSystem::log_prob(const History& h) const {
  const auto steps = h.steps();
  double acc = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto past = steps.first(t);
    acc += log_factor(agent_->action_dist(past), steps[t].action);
    acc += log_factor(environment_->obs_dist(past, steps[t].action),
                      steps[t].observation);
  }
  if (const auto& a = h.pending_action()) {
    acc += log_factor(agent_->action_dist(steps), *a);
  }
  return acc;
}

History InteractionSystem::generate(std::size_t length, CounterRng& rng) const {
  History h;
  for (std::size_t t = 0; t < length; ++t) {
    const Symbol a = sample(agent_->action_dist(h.steps()), rng);
    h.push_action(a);
    h.push_observation(sample(environment_->obs_dist(h.steps(), a), rng));
  }
  return h;
}

}  // namespace bcr
