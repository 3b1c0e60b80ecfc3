#include "bcr/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace bcr {

//---------------------------------------------------------------------------//
// Simulation
//---------------------------------------------------------------------------//
void Experiment::validate() const {
  if (suite.empty()) throw InvalidArgument("model suite is empty");
  if (prior.size() != suite.size()) {
    throw InvalidArgument("prior must have one entry per suite model");
  }
  if (reference >= suite.size()) {
    throw InvalidArgument("reference model index out of range");
  }
}

Experiment biased_pair_experiment() {
  return Experiment{biased_pair_suite(), Distribution::uniform(2), 0};
}

namespace {

// a_t from the agent, `on_action` at the step boundary, o_t from `env`.
template <class OnAction>
Interaction advance(MixtureAgent& agent, const IOModel& env, CounterRng& rng,
                    OnAction&& on_action) {
  const Symbol a = agent.act(rng);
  on_action(a);
  const Symbol o = sample(env.obs_dist(agent.history().steps(), a), rng);
  agent.record_observation(o);
  return {a, o};
}

}  // namespace

Interaction step(MixtureAgent& agent, const IOModel& env, CounterRng& rng) {
  return advance(agent, env, rng, [](Symbol) {});
}

double deviation(const MixtureAgent& agent, const IOModel& reference,
                 Symbol last_action) {
  const auto past = agent.history().steps();
  return kl_bits(reference.action_dist(past), agent.action_distribution()) +
         kl_bits(reference.obs_dist(past, last_action),
                 agent.predictive_obs(last_action));
}

double extreme_deviation(const IOModel& reference, const IOModel& other) {
  const std::span<const Interaction> empty;
  return kl_bits(reference.action_dist(empty), other.action_dist(empty)) +
         kl_bits(reference.obs_dist(empty, 0), other.obs_dist(empty, 0));
}

SimulationResult simulate(const Experiment& exp, UpdateMode mode,
                          std::size_t env_index, std::size_t horizon,
                          RunKey key) {
  exp.validate();
  if (horizon < 1) throw InvalidArgument("horizon must be ≥ 1");
  if (env_index >= exp.suite.size()) {
    throw InvalidArgument("environment index out of range");
  }
  const IOModel& env = *exp.suite[env_index];
  const IOModel& reference = *exp.suite[exp.reference];

  MixtureAgent agent(exp.suite, exp.prior, mode);
  CounterRng rng(key);

  SimulationResult out;
  out.trajectory.seed = key;
  out.trajectory.agent_mode = mode;
  out.trajectory.env_id = env.label();
  out.trajectory.steps.reserve(horizon);
  out.trace.values.reserve(horizon);
  out.posteriors.reserve(horizon * exp.suite.size());

  for (std::size_t t = 0; t < horizon; ++t) {
    const Interaction x = advance(agent, env, rng, [&](Symbol a) {
      out.trace.values.push_back(deviation(agent, reference, a));
    });
    out.trajectory.steps.push_back(x);
    const Distribution post = agent.posterior();
    out.posteriors.insert(out.posteriors.end(), post.probs().begin(),
                          post.probs().end());
  }
  return out;
}

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//
BasinSpec::BasinSpec(std::vector<double> centers) : centers_(std::move(centers)) {
  if (centers_.empty()) throw InvalidArgument("basin spec needs a center");
  for (std::size_t i = 1; i < centers_.size(); ++i) {
    if (!(centers_[i] > centers_[i - 1])) {
      throw InvalidArgument("basin centers must be strictly increasing");
    }
  }
}

std::size_t BasinSpec::classify(double value) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < centers_.size(); ++i) {
    if (std::abs(value - centers_[i]) < std::abs(value - centers_[best])) {
      best = i;
    }
  }
  return best;
}

std::size_t final_window_length(std::size_t horizon) {
  return std::max<std::size_t>(1, horizon / 10);
}

TraceStats trace_stats(const std::vector<const std::vector<double>*>& traces,
                       std::size_t horizon) {
  TraceStats s;
  s.count = traces.size();
  if (traces.empty()) {
    s.mean.assign(horizon, std::numeric_limits<double>::quiet_NaN());
    s.stddev = s.mean;
    return s;
  }
  const auto n = static_cast<double>(traces.size());
  s.mean.assign(horizon, 0.0);
  s.stddev.assign(horizon, 0.0);
  for (const auto* tr : traces) {
    for (std::size_t t = 0; t < horizon; ++t) s.mean[t] += (*tr)[t];
  }
  for (double& m : s.mean) m /= n;
  for (const auto* tr : traces) {
    for (std::size_t t = 0; t < horizon; ++t) {
      const double dev = (*tr)[t] - s.mean[t];
      s.stddev[t] += dev * dev;
    }
  }
  for (double& v : s.stddev) v = std::sqrt(v / n);
  return s;
}

EnsembleSummary ensemble(const Experiment& exp, UpdateMode mode,
                         std::size_t env_index, std::size_t horizon,
                         std::size_t n_runs, std::uint64_t master_seed,
                         const BasinSpec& basins, unsigned jobs) {
  if (n_runs < 1) throw InvalidArgument("n_runs must be ≥ 1");
  if (horizon < 1) throw InvalidArgument("horizon must be ≥ 1");
  exp.validate();

  std::vector<std::vector<double>> traces(n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        traces[i] =
            simulate(exp, mode, env_index, horizon, RunKey{master_seed, i})
                .trace.values;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const unsigned n_threads = std::clamp<unsigned>(
      jobs, 1, static_cast<unsigned>(std::min<std::size_t>(n_runs, 1024)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleSummary s;
  s.n_runs = n_runs;
  s.horizon = horizon;
  s.basin_counts.assign(basins.centers().size(), 0);

  const std::size_t window = final_window_length(horizon);
  std::vector<const std::vector<double>*> all;
  std::vector<std::vector<const std::vector<double>*>> grouped(
      basins.centers().size());
  for (const auto& tr : traces) {
    double acc = 0.0;
    for (std::size_t t = horizon - window; t < horizon; ++t) acc += tr[t];
    const double final_mean = acc / static_cast<double>(window);
    const std::size_t basin = basins.classify(final_mean);
    s.final_window_means.push_back(final_mean);
    s.basin_of_run.push_back(basin);
    ++s.basin_counts[basin];
    all.push_back(&tr);
    grouped[basin].push_back(&tr);
  }
  s.overall = trace_stats(all, horizon);
  for (const auto& g : grouped) s.per_basin.push_back(trace_stats(g, horizon));
  return s;
}

//---------------------------------------------------------------------------//
// Divergence criteria
//---------------------------------------------------------------------------//
std::string_view to_string(Criterion c) { return c == Criterion::D ? "D" : "C"; }

Criterion parse_criterion(std::string_view text) {
  if (text == "D" || text == "d") return Criterion::D;
  if (text == "C" || text == "c") return Criterion::C;
  throw InvalidArgument("unknown criterion '" + std::string(text) +
                        "' (expected D|C)");
}

namespace {

std::size_t pair_count(const std::vector<ModelPtr>& suite) {
  return suite.front()->action_count() * suite.front()->observation_count();
}

void check_problem(const IOModel& candidate, const std::vector<ModelPtr>& suite,
                   const Distribution& prior, std::size_t horizon) {
  check_enumeration_size(suite, horizon);
  if (prior.size() != suite.size()) {
    throw InvalidArgument("prior must have one entry per suite model");
  }
  if (candidate.action_count() != suite.front()->action_count() ||
      candidate.observation_count() != suite.front()->observation_count()) {
    throw InvalidArgument("candidate alphabets differ from the suite's");
  }
}

// weight * KL, with zero-weight branches contributing nothing even when the
// divergence itself is infinite.
double weighted_kl(double weight, const Distribution& p, const Distribution& q) {
  return weight == 0.0 ? 0.0 : weight * kl_bits(p, q);
}

class HistoryWalker {
 public:
  HistoryWalker(Criterion criterion, const IOModel& candidate,
                const std::vector<ModelPtr>& suite, const Distribution& prior,
                std::size_t horizon)
      : criterion_(criterion),
        candidate_(candidate),
        suite_(suite),
        prior_(prior),
        horizon_(horizon) {}

  double run() {
    std::vector<double> weights(suite_.size(), 1.0);
    std::vector<Interaction> past;
    return visit(past, weights);
  }

 private:
  // `weights[m]` is P_m(h) for D and P(^h | m) for C.
  double visit(std::vector<Interaction>& past,
               const std::vector<double>& weights) {
    const std::size_t n_actions = candidate_.action_count();
    const std::size_t n_obs = candidate_.observation_count();
    double total = 0.0;

    std::vector<Distribution> model_actions;
    const Distribution cand_action = candidate_.action_dist(past);
    for (std::size_t m = 0; m < suite_.size(); ++m) {
      model_actions.push_back(suite_[m]->action_dist(past));
      total += prior_[m] * weighted_kl(weights[m], model_actions[m], cand_action);
    }

    std::vector<double> with_action(suite_.size());
    std::vector<double> child(suite_.size());
    for (Symbol a = 0; a < n_actions; ++a) {
      const Distribution cand_obs = candidate_.obs_dist(past, a);
      std::vector<Distribution> model_obs;
      for (std::size_t m = 0; m < suite_.size(); ++m) {
        with_action[m] = criterion_ == Criterion::D
                             ? weights[m] * model_actions[m][a]
                             : weights[m];
        model_obs.push_back(suite_[m]->obs_dist(past, a));
        total += prior_[m] * weighted_kl(with_action[m], model_obs[m], cand_obs);
      }
      if (past.size() + 1 >= horizon_) continue;
      for (Symbol o = 0; o < n_obs; ++o) {
        for (std::size_t m = 0; m < suite_.size(); ++m) {
          child[m] = with_action[m] * model_obs[m][o];
        }
        past.push_back({a, o});
        total += visit(past, child);
        past.pop_back();
      }
    }
    return total;
  }

  Criterion criterion_;
  const IOModel& candidate_;
  const std::vector<ModelPtr>& suite_;
  const Distribution& prior_;
  std::size_t horizon_;
};

}  // namespace

void check_enumeration_size(const std::vector<ModelPtr>& suite,
                            std::size_t horizon) {
  if (suite.empty()) throw InvalidArgument("model suite is empty");
  if (horizon < 1) throw InvalidArgument("horizon must be ≥ 1");
  const std::size_t branching = pair_count(suite);
  std::size_t histories = 1;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (histories > kMaxEnumeratedHistories / branching) {
      histories = kMaxEnumeratedHistories + 1;
      break;
    }
    histories *= branching;
  }
  if (histories > kMaxEnumeratedHistories) {
    throw InvalidArgument("horizon " + std::to_string(horizon) +
                          " too large for exhaustive enumeration (limit " +
                          std::to_string(kMaxEnumeratedHistories) +
                          " histories)");
  }
}

double total_divergence(Criterion criterion, const IOModel& candidate,
                        const std::vector<ModelPtr>& suite,
                        const Distribution& prior, std::size_t horizon) {
  check_problem(candidate, suite, prior, horizon);
  return HistoryWalker(criterion, candidate, suite, prior, horizon).run();
}

double total_divergence_naive(const IOModel& candidate,
                              const std::vector<ModelPtr>& suite,
                              const Distribution& prior, std::size_t horizon) {
  return total_divergence(Criterion::D, candidate, suite, prior, horizon);
}

double total_divergence_causal(const IOModel& candidate,
                               const std::vector<ModelPtr>& suite,
                               const Distribution& prior, std::size_t horizon) {
  return total_divergence(Criterion::C, candidate, suite, prior, horizon);
}

std::vector<double> divergence_terms(Criterion criterion,
                                     const IOModel& candidate,
                                     const std::vector<ModelPtr>& suite,
                                     const Distribution& prior,
                                     std::size_t horizon) {
  check_problem(candidate, suite, prior, horizon);
  const std::size_t n_actions = candidate.action_count();
  const std::size_t n_obs = candidate.observation_count();
  const std::size_t branching = n_actions * n_obs;

  std::vector<double> terms;
  std::size_t n_histories = 1;
  for (std::size_t tau = 1; tau <= horizon; ++tau) {
    double term = 0.0;
    for (std::size_t code = 0; code < n_histories; ++code) {
      std::vector<Interaction> steps(tau - 1);
      std::size_t rest = code;
      for (auto& x : steps) {
        const std::size_t pair = rest % branching;
        rest /= branching;
        x = {pair / n_obs, pair % n_obs};
      }
      const History h(steps);
      const Distribution cand_action = candidate.action_dist(steps);
      for (std::size_t m = 0; m < suite.size(); ++m) {
        const IOModel& model = *suite[m];
        const double w = std::exp(criterion == Criterion::D
                                      ? seq_loglik_full(model, h)
                                      : seq_loglik_intervened(model, h));
        term += prior[m] * weighted_kl(w, model.action_dist(steps), cand_action);
        for (Symbol a = 0; a < n_actions; ++a) {
          const History ha(steps, a);
          const double wa = std::exp(criterion == Criterion::D
                                         ? seq_loglik_full(model, ha)
                                         : seq_loglik_intervened(model, ha));
          term += prior[m] * weighted_kl(wa, model.obs_dist(steps, a),
                                         candidate.obs_dist(steps, a));
        }
      }
    }
    terms.push_back(term);
    n_histories *= branching;
  }
  return terms;
}

ModelPtr optimal_agent(Criterion criterion, const std::vector<ModelPtr>& suite,
                       const Distribution& prior) {
  return std::make_shared<MixtureModel>(
      suite, prior,
      criterion == Criterion::D ? UpdateMode::Naive : UpdateMode::Causal,
      criterion == Criterion::D ? "bayes-mixture" : "control-rule");
}

//---------------------------------------------------------------------------//
// Perturbations
//---------------------------------------------------------------------------//
namespace {

std::uint64_t hash_history(std::span<const Interaction> past,
                           std::uint64_t tag) {
  std::uint64_t h = CounterRng::mix(tag + 0x51ED27A3ULL);
  for (const auto& x : past) {
    h = CounterRng::mix(h ^ (2 * x.action + 1));
    h = CounterRng::mix(h ^ (2 * x.observation + 2));
  }
  return h;
}

}  // namespace

PerturbedModel::PerturbedModel(ModelPtr base, double epsilon,
                               std::uint64_t noise_key)
    : base_(std::move(base)), epsilon_(epsilon), noise_key_(noise_key) {
  if (!base_) throw InvalidArgument("perturbed model needs a base");
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) {
    throw InvalidArgument("perturbation weight must lie in [0,1]");
  }
  label_ = base_->label() + "+noise";
}

Distribution PerturbedModel::blend(const Distribution& base,
                                   std::uint64_t history_hash) const {
  CounterRng rng(CounterRng::mix(noise_key_ ^ history_hash));
  std::vector<double> noise(base.size());
  double total = 0.0;
  for (double& v : noise) {
    v = rng.uniform() + 1e-3;
    total += v;
  }
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - epsilon_) * base[i] + epsilon_ * noise[i] / total;
  }
  return Distribution(std::move(out));
}

Distribution PerturbedModel::action_dist(
    std::span<const Interaction> past) const {
  return blend(base_->action_dist(past), hash_history(past, 0));
}

Distribution PerturbedModel::obs_dist(std::span<const Interaction> past,
                                      Symbol action) const {
  return blend(base_->obs_dist(past, action), hash_history(past, action + 1));
}

std::vector<double> MinimizerReport::margins() const {
  std::vector<double> out;
  out.reserve(perturbed_values.size());
  for (double v : perturbed_values) out.push_back(v - optimal_value);
  return out;
}

double MinimizerReport::min_margin() const {
  double lo = std::numeric_limits<double>::infinity();
  for (double m : margins()) lo = std::min(lo, m);
  return lo;
}

std::size_t MinimizerReport::beaten(double tolerance) const {
  const auto ms = margins();
  return static_cast<std::size_t>(
      std::count_if(ms.begin(), ms.end(),
                    [tolerance](double m) { return m < -tolerance; }));
}

MinimizerReport minimizer_check(Criterion criterion,
                                const std::vector<ModelPtr>& suite,
                                const Distribution& prior, std::size_t horizon,
                                std::size_t n_perturbations, CounterRng& rng) {
  MinimizerReport report;
  report.criterion = criterion;
  report.horizon = horizon;
  const ModelPtr optimum = optimal_agent(criterion, suite, prior);
  report.optimal_value =
      total_divergence(criterion, *optimum, suite, prior, horizon);
  for (std::size_t k = 0; k < n_perturbations; ++k) {
    const double epsilon = 0.01 + 0.49 * rng.uniform();
    const PerturbedModel candidate(optimum, epsilon, rng());
    report.epsilons.push_back(epsilon);
    report.perturbed_values.push_back(
        total_divergence(criterion, candidate, suite, prior, horizon));
  }
  return report;
}

}  // namespace bcr
