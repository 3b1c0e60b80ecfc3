#include "bcr/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "bcr/config.hpp"
#include "bcr/evaluation.hpp"
#include "bcr/intervention.hpp"

namespace bcr::cli {

namespace {

// Minimizer violations below this are treated as rounding.
constexpr double kMinimizerTolerance = 1e-9;

/// Output stream bound to a path or, for "-", to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) throw IoError("cannot open output file '" + path + "'");
    stream_ = &file_;
  }

  std::ostream& operator*() { return *stream_; }

  void close() {
    stream_->flush();
    if (file_.is_open()) file_.close();
    if (!*stream_ || (file_.is_open() && !file_)) {
      throw IoError("failed writing output '" + path_ + "'");
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void write_header(std::ostream& os, const std::string& command,
                  const ExperimentConfig& config) {
  os << "# command=" << command << '\n';
  for (const auto& [k, v] : provenance(config)) os << "# " << k << '=' << v << '\n';
}

struct Overrides {
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::string> env;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> summary;
  std::optional<std::string> criterion;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> perturbations;
  std::optional<unsigned> jobs;
  std::optional<std::string> chain;
  std::optional<std::vector<std::size_t>> evidence;
};

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c =
      o.config_path.empty() ? default_config() : load_config(o.config_path);
  try {
    if (o.mode) c.mode = parse_update_mode(*o.mode);
    if (o.criterion) c.criterion = parse_criterion(*o.criterion);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (o.env) c.env = *o.env;
  if (o.steps) c.steps = *o.steps;
  if (o.runs) c.runs = *o.runs;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.summary) c.summary = *o.summary;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.perturbations) c.perturbations = *o.perturbations;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.chain) {
    if (*o.chain == "witness" || *o.chain == "uninformative") {
      c.chain = *o.chain;
    } else {
      std::ifstream in(*o.chain);
      if (!in) throw IoError("cannot read chain file '" + *o.chain + "'");
      try {
        c.chain = nlohmann::json::parse(in, nullptr, true, true);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("chain file '" + *o.chain + "': " + e.what());
      }
    }
  }
  if (o.evidence) {
    if (o.evidence->size() != 3) {
      throw ConfigError("--evidence expects three indices d,s,dp");
    }
    c.evidence = {(*o.evidence)[0], (*o.evidence)[1], (*o.evidence)[2]};
  }
  c.validate();
  return c;
}

int cmd_simulate(const ExperimentConfig& c, std::ostream& out) {
  const Experiment exp = c.experiment();
  const auto result = simulate(exp, c.mode, c.env_index(), c.resolved_steps(),
                               RunKey{c.seed, 0});
  Sink sink(c.out, out);
  auto& os = *sink;
  write_header(os, "simulate", c);
  os << "t,action,observation,d_t_bits";
  for (const auto& m : exp.suite) os << ",posterior_" << m->label();
  os << '\n';
  const std::size_t n_models = exp.suite.size();
  for (std::size_t t = 0; t < result.trajectory.steps.size(); ++t) {
    const auto& x = result.trajectory.steps[t];
    os << t + 1 << ',' << x.action << ',' << x.observation << ','
       << format_number(result.trace.values[t]);
    for (std::size_t m = 0; m < n_models; ++m) {
      os << ',' << format_number(result.posteriors[t * n_models + m]);
    }
    os << '\n';
  }
  sink.close();
  return kOk;
}

int cmd_ensemble(const ExperimentConfig& c, std::ostream& out) {
  const Experiment exp = c.experiment();
  const BasinSpec basins = c.basin_spec();
  const std::size_t horizon = c.resolved_steps();
  const auto s = ensemble(exp, c.mode, c.env_index(), horizon, c.runs, c.seed,
                          basins, c.resolved_jobs());

  Sink sink(c.out, out);
  auto& os = *sink;
  write_header(os, "ensemble", c);
  os << "# final_window=" << final_window_length(horizon) << '\n';
  for (std::size_t b = 0; b < basins.centers().size(); ++b) {
    os << "# basin." << b << ".center=" << format_number(basins.centers()[b])
       << '\n';
    os << "# basin." << b << ".count=" << s.basin_counts[b] << '\n';
  }
  os << "t,mean,std";
  for (std::size_t b = 0; b < basins.centers().size(); ++b) {
    os << ",basin" << b << "_mean,basin" << b << "_std";
  }
  os << '\n';
  for (std::size_t t = 0; t < horizon; ++t) {
    os << t + 1 << ',' << format_number(s.overall.mean[t]) << ','
       << format_number(s.overall.stddev[t]);
    for (const auto& g : s.per_basin) {
      os << ',' << format_number(g.mean[t]) << ',' << format_number(g.stddev[t]);
    }
    os << '\n';
  }
  sink.close();

  if (!c.summary.empty()) {
    nlohmann::json doc;
    doc["config"] = c.to_json();
    doc["n_runs"] = s.n_runs;
    doc["horizon"] = s.horizon;
    doc["final_window"] = final_window_length(horizon);
    for (std::size_t b = 0; b < basins.centers().size(); ++b) {
      doc["basins"].push_back(
          {{"center", basins.centers()[b]}, {"count", s.basin_counts[b]}});
    }
    doc["final_window_means"] = s.final_window_means;
    Sink summary(c.summary, out);
    *summary << doc.dump(2) << '\n';
    summary.close();
  }
  return kOk;
}

int cmd_eval(const ExperimentConfig& c, std::ostream& out) {
  const Experiment exp = c.experiment();
  try {
    check_enumeration_size(exp.suite, c.horizon);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  CounterRng rng(RunKey{c.seed, 0});
  const auto report = minimizer_check(c.criterion, exp.suite, exp.prior,
                                      c.horizon, c.perturbations, rng);
  const std::size_t beaten = report.beaten(kMinimizerTolerance);

  Sink sink(c.out, out);
  auto& os = *sink;
  write_header(os, "eval", c);
  os << "candidate,epsilon,value_bits,margin_bits\n";
  os << "optimal,0," << format_number(report.optimal_value) << ",0\n";
  const auto margins = report.margins();
  for (std::size_t k = 0; k < margins.size(); ++k) {
    os << "perturbed_" << k + 1 << ',' << format_number(report.epsilons[k])
       << ',' << format_number(report.perturbed_values[k]) << ','
       << format_number(margins[k]) << '\n';
  }
  os << "# result=" << (beaten == 0 ? "pass" : "fail") << '\n';
  os << "# beaten=" << beaten << '\n';
  if (!margins.empty()) {
    os << "# min_margin=" << format_number(report.min_margin()) << '\n';
  }
  sink.close();
  return beaten == 0 ? kOk : kMinimizerViolated;
}

int cmd_intervene_demo(const ExperimentConfig& c, std::ostream& out) {
  const FiniteCausalChain chain = c.resolved_chain();
  const auto& ev = c.evidence;
  const auto& card = chain.cardinalities();
  if (ev.d >= card.d || ev.s >= card.s || ev.dp >= card.dp) {
    throw ConfigError("evidence index out of range for the chain");
  }
  const Distribution conditioned = posterior_conditioned(chain, ev.d, ev.s, ev.dp);
  const Distribution intervened = posterior_intervened(chain, ev.d, ev.s, ev.dp);

  Sink sink(c.out, out);
  auto& os = *sink;
  os << "# command=intervene-demo\n";
  os << "# evidence.d=" << ev.d << "\n# evidence.s=" << ev.s
     << "\n# evidence.dp=" << ev.dp << '\n';
  os << "theta,conditioned,intervened\n";
  double max_diff = 0.0;
  for (std::size_t th = 0; th < card.theta; ++th) {
    os << th << ',' << format_number(conditioned[th]) << ','
       << format_number(intervened[th]) << '\n';
    max_diff = std::max(max_diff, std::abs(conditioned[th] - intervened[th]));
  }
  os << "# max_abs_difference=" << format_number(max_diff) << '\n';
  sink.close();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Mixture agents: naive Bayes mixture vs. Bayesian control rule"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_path, "JSON experiment configuration")
      ->check(CLI::ExistingFile);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "agent update mode")
        ->check(CLI::IsMember({"naive", "causal"}));
    sub->add_option("--env", o.env, "environment id (e.g. q0)");
    sub->add_option("--seed", o.seed, "64-bit master seed");
    sub->add_option("--out", o.out, "output path ('-' for stdout)");
  };

  auto* sim = app.add_subcommand("simulate", "run one agent/environment realization");
  add_common(sim);
  sim->add_option("--steps", o.steps, "number of interaction steps");

  auto* ens = app.add_subcommand("ensemble", "run independent realizations and summarize d(t)");
  add_common(ens);
  ens->add_option("--steps", o.steps, "number of interaction steps");
  ens->add_option("--runs", o.runs, "number of realizations");
  ens->add_option("--jobs", o.jobs, "worker threads (0: all cores)");
  ens->add_option("--summary", o.summary, "optional JSON summary path");

  auto* ev = app.add_subcommand("eval", "exhaustive minimizer check of the D or C criterion");
  ev->add_option("--criterion", o.criterion, "D or C")
      ->check(CLI::IsMember({"D", "C", "d", "c"}));
  ev->add_option("--horizon", o.horizon, "enumeration horizon");
  ev->add_option("--perturbations", o.perturbations, "number of perturbed candidates");
  ev->add_option("--seed", o.seed, "64-bit seed for the perturbations");
  ev->add_option("--out", o.out, "output path ('-' for stdout)");

  auto* iv = app.add_subcommand("intervene-demo",
                                "conditioned vs intervened posterior on a causal chain");
  iv->add_option("--chain", o.chain, "witness | uninformative | path to chain JSON");
  iv->add_option("--evidence", o.evidence, "d,s,dp indices")->delimiter(',');
  iv->add_option("--out", o.out, "output path ('-' for stdout)");

  auto* dc = app.add_subcommand("default-config", "print the effective configuration as JSON");

  std::vector<const char*> argv{"bcr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  }

  try {
    const ExperimentConfig config = resolve(o);
    if (sim->parsed()) return cmd_simulate(config, out);
    if (ens->parsed()) return cmd_ensemble(config, out);
    if (ev->parsed()) return cmd_eval(config, out);
    if (iv->parsed()) return cmd_intervene_demo(config, out);
    if (dc->parsed()) {
      out << config.to_json().dump(2) << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const ImpossibleEvidence& e) {
    err << "error: " << e.what() << '\n';
    return kImpossibleEvidence;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  }
  return kBadConfig;
}

}  // namespace bcr::cli
