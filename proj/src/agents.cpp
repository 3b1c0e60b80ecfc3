#include "bcr/agents.hpp"

#include <cmath>
#include <string>

namespace bcr {

namespace {

void validate_suite(const std::vector<ModelPtr>& models,
                    const Distribution& prior) {
  if (models.empty()) throw InvalidArgument("model suite is empty");
  if (prior.size() != models.size()) {
    throw InvalidArgument("prior must have one entry per model");
  }
  for (const auto& m : models) {
    if (!m) throw InvalidArgument("null model in suite");
    if (m->action_count() != models.front()->action_count() ||
        m->observation_count() != models.front()->observation_count()) {
      throw InvalidArgument("suite models disagree on alphabets");
    }
  }
}

LogWeights log_prior(const Distribution& prior) {
  LogWeights out(prior.size());
  for (std::size_t m = 0; m < prior.size(); ++m) out[m] = std::log(prior[m]);
  return out;
}

template <class Conditional>
Distribution mix(const std::vector<ModelPtr>& models, const Distribution& w,
                 Conditional&& conditional) {
  std::vector<Distribution> parts;
  parts.reserve(models.size());
  for (const auto& m : models) parts.push_back(conditional(*m));
  return Distribution::mixture(parts, w);
}

}  // namespace

std::string_view to_string(UpdateMode mode) {
  return mode == UpdateMode::Naive ? "naive" : "causal";
}

UpdateMode parse_update_mode(std::string_view text) {
  if (text == "naive") return UpdateMode::Naive;
  if (text == "causal") return UpdateMode::Causal;
  throw InvalidArgument("unknown agent mode '" + std::string(text) +
                        "' (expected naive|causal)");
}

//---------------------------------------------------------------------------//
// MixtureAgent
//---------------------------------------------------------------------------//
MixtureAgent::MixtureAgent(std::vector<ModelPtr> models, Distribution prior,
                           UpdateMode mode)
    : models_(std::move(models)), prior_(std::move(prior)), mode_(mode) {
  validate_suite(models_, prior_);
  boundary_logw_ = log_prior(prior_);
  logw_ = boundary_logw_;
}

Distribution MixtureAgent::action_distribution() const {
  const auto past = history_.steps();
  return mix(models_, normalize(boundary_logw_),
             [&](const IOModel& m) { return m.action_dist(past); });
}

Symbol MixtureAgent::act(CounterRng& rng) {
  if (history_.pending_action()) {
    throw std::logic_error("act called with an action already pending");
  }
  const Symbol a = sample(action_distribution(), rng);
  record_action(a);
  return a;
}

LogWeights MixtureAgent::with_action_evidence(Symbol a) const {
  LogWeights out = boundary_logw_;
  const auto past = history_.steps();
  for (std::size_t m = 0; m < models_.size(); ++m) {
    out[m] += std::log(models_[m]->action_dist(past)[a]);
  }
  return out;
}

void MixtureAgent::record_action(Symbol a) {
  if (a >= models_.front()->action_count()) {
    throw InvalidArgument("action " + std::to_string(a) + " out of range");
  }
  if (history_.pending_action()) {
    throw std::logic_error("record_action called with an action pending");
  }
  if (mode_ == UpdateMode::Naive) logw_ = with_action_evidence(a);
  history_.push_action(a);
}

void MixtureAgent::record_observation(Symbol o) {
  if (o >= models_.front()->observation_count()) {
    throw InvalidArgument("observation " + std::to_string(o) + " out of range");
  }
  const auto& pending = history_.pending_action();
  if (!pending) throw std::logic_error("observation without pending action");
  const auto past = history_.steps();
  for (std::size_t m = 0; m < models_.size(); ++m) {
    logw_[m] += std::log(models_[m]->obs_dist(past, *pending)[o]);
  }
  history_.push_observation(o);
  boundary_logw_ = logw_;
}

Distribution MixtureAgent::predictive_obs(Symbol a) const {
  if (a >= models_.front()->action_count()) {
    throw InvalidArgument("action " + std::to_string(a) + " out of range");
  }
  const auto past = history_.steps();
  const Distribution w = mode_ == UpdateMode::Naive
                             ? normalize(with_action_evidence(a))
                             : normalize(boundary_logw_);
  return mix(models_, w,
             [&](const IOModel& m) { return m.obs_dist(past, a); });
}

//---------------------------------------------------------------------------//
// MixtureModel
//---------------------------------------------------------------------------//
MixtureModel::MixtureModel(std::vector<ModelPtr> models, Distribution prior,
                           UpdateMode mode, std::string label)
    : models_(std::move(models)),
      prior_(std::move(prior)),
      mode_(mode),
      label_(std::move(label)) {
  validate_suite(models_, prior_);
}

std::size_t MixtureModel::action_count() const {
  return models_.front()->action_count();
}

std::size_t MixtureModel::observation_count() const {
  return models_.front()->observation_count();
}

Distribution MixtureModel::weights(const History& h) const {
  LogWeights logw = log_prior(prior_);
  for (std::size_t m = 0; m < models_.size(); ++m) {
    logw[m] += mode_ == UpdateMode::Naive
                   ? seq_loglik_full(*models_[m], h)
                   : seq_loglik_intervened(*models_[m], h);
  }
  return normalize(logw);
}

Distribution MixtureModel::action_dist(std::span<const Interaction> past) const {
  const History h({past.begin(), past.end()});
  return mix(models_, weights(h),
             [&](const IOModel& m) { return m.action_dist(past); });
}

Distribution MixtureModel::obs_dist(std::span<const Interaction> past,
                                    Symbol action) const {
  const History h({past.begin(), past.end()}, action);
  return mix(models_, weights(h),
             [&](const IOModel& m) { return m.obs_dist(past, action); });
}

}  // namespace bcr
