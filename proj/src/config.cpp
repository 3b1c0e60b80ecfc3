#include "bcr/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <thread>

namespace bcr {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_number(v[i]);
  }
  return out;
}

std::vector<double> probability_array(const json& value, const std::string& what) {
  if (!value.is_array() || value.empty()) {
    throw ConfigError(what + " must be a non-empty array of probabilities");
  }
  std::vector<double> out;
  for (const auto& v : value) out.push_back(parse_probability(v));
  return out;
}

Distribution as_distribution(const std::vector<double>& probs,
                             const std::string& what) {
  try {
    return Distribution(probs);
  } catch (const InvalidDistribution& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

template <class T>
T get_as(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

// Appends the leaves of a nested table and records its shape.
void flatten(const json& node, std::size_t depth, std::vector<std::size_t>& shape,
             std::vector<double>& out, const std::string& what) {
  if (depth == shape.size()) {
    out.push_back(parse_probability(node));
    return;
  }
  if (!node.is_array() || node.empty()) {
    throw ConfigError(what + " must be a nested array of depth " +
                      std::to_string(shape.size()));
  }
  if (shape[depth] == 0) {
    shape[depth] = node.size();
  } else if (shape[depth] != node.size()) {
    throw ConfigError(what + " is ragged at depth " + std::to_string(depth));
  }
  for (const auto& child : node) flatten(child, depth + 1, shape, out, what);
}

std::pair<std::vector<double>, std::vector<std::size_t>> table(
    const json& doc, const char* key, std::size_t depth) {
  if (!doc.contains(key)) {
    throw ConfigError(std::string("chain is missing '") + key + "'");
  }
  std::vector<std::size_t> shape(depth, 0);
  std::vector<double> flat;
  flatten(doc.at(key), 0, shape, flat, key);
  return {std::move(flat), std::move(shape)};
}

}  // namespace

double parse_probability(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    const auto slash = text.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
      } else {
        const std::string num_text = text.substr(0, slash);
        const std::string den_text = text.substr(slash + 1);
        std::size_t used_den = 0;
        const double num = std::stod(num_text, &used);
        const double den = std::stod(den_text, &used_den);
        if (used == num_text.size() && used_den == den_text.size() && den != 0.0) {
          return num / den;
        }
      }
    } catch (const std::exception&) {
    }
    throw ConfigError("cannot parse probability '" + text + "'");
  }
  throw ConfigError("probability must be a number or a \"num/den\" string");
}

FiniteCausalChain chain_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("chain must be an object");
  const auto prior = probability_array(doc.value("prior", json()), "chain prior");
  auto [lik_d, shape_d] = table(doc, "lik_d", 2);
  auto [lik_s, shape_s] = table(doc, "lik_s", 3);
  auto [lik_dp, shape_dp] = table(doc, "lik_dp", 4);
  const FiniteCausalChain::Cardinalities card{prior.size(), shape_d[1],
                                              shape_s[2], shape_dp[3]};
  if (shape_d[0] != card.theta || shape_s[0] != card.theta ||
      shape_dp[0] != card.theta || shape_s[1] != card.d ||
      shape_dp[1] != card.d || shape_dp[2] != card.s) {
    throw ConfigError("chain table shapes are inconsistent");
  }
  try {
    return FiniteCausalChain(card, Distribution(prior), std::move(lik_d),
                             std::move(lik_s), std::move(lik_dp));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("chain: ") + e.what());
  }
}

FiniteCausalChain bundled_chain(const std::string& name) {
  if (name == "witness") return difference_witness_chain();
  if (name == "uninformative") return uninformative_s_chain();
  throw ConfigError("unknown bundled chain '" + name +
                    "' (expected witness|uninformative)");
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.suite = {{"p0", "q0", {0.9, 0.1}, {0.6, 0.4}},
             {"p1", "q1", {0.1, 0.9}, {0.4, 0.6}}};
  c.prior = {0.5, 0.5};
  return c;
}

void ExperimentConfig::validate() const {
  if (suite.empty()) throw ConfigError("suite must contain at least one model");
  std::vector<std::string> names;
  for (const auto& e : suite) {
    if (e.id.empty()) throw ConfigError("every suite model needs an id");
    as_distribution(e.pa, "suite model '" + e.id + "' pa");
    as_distribution(e.po, "suite model '" + e.id + "' po");
    if (e.pa.size() != suite.front().pa.size() ||
        e.po.size() != suite.front().po.size()) {
      throw ConfigError("suite models disagree on alphabet sizes");
    }
    names.push_back(e.id);
    if (!e.env.empty() && e.env != e.id) names.push_back(e.env);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ConfigError("suite model and environment names must be unique");
  }
  if (prior.size() != suite.size()) {
    throw ConfigError("prior must have one entry per suite model");
  }
  as_distribution(prior, "prior");
  env_index();
  const bool reference_found =
      std::any_of(suite.begin(), suite.end(),
                  [&](const SuiteEntry& e) { return e.id == reference; });
  if (!reference_found) {
    throw ConfigError("reference model '" + reference + "' is not in the suite");
  }
  if (steps && *steps < 1) throw ConfigError("horizon must be ≥ 1");
  if (runs < 1) throw ConfigError("runs must be ≥ 1");
  if (horizon < 1) throw ConfigError("horizon must be ≥ 1");
  if (basins) {
    try {
      BasinSpec{*basins};
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
}

Experiment ExperimentConfig::experiment() const {
  Experiment exp{{}, as_distribution(prior, "prior"), 0};
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& e = suite[i];
    exp.suite.push_back(std::make_shared<MemorylessModel>(
        as_distribution(e.pa, e.id + " pa"), as_distribution(e.po, e.id + " po"),
        e.id));
    if (e.id == reference) exp.reference = i;
  }
  return exp;
}

std::size_t ExperimentConfig::env_index() const {
  for (std::size_t i = 0; i < suite.size(); ++i) {
    if (suite[i].env == env || suite[i].id == env) return i;
  }
  throw ConfigError("environment '" + env + "' is not in the suite");
}

std::size_t ExperimentConfig::resolved_steps() const {
  if (steps) return *steps;
  return mode == UpdateMode::Naive ? 200 : 2000;
}

BasinSpec ExperimentConfig::basin_spec() const {
  if (basins) return BasinSpec(*basins);
  const Experiment exp = experiment();
  double far = 0.0;
  for (const auto& m : exp.suite) {
    far = std::max(far, extreme_deviation(*exp.suite[exp.reference], *m));
  }
  return far > 0.0 ? BasinSpec({0.0, far}) : BasinSpec({0.0});
}

unsigned ExperimentConfig::resolved_jobs() const {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

FiniteCausalChain ExperimentConfig::resolved_chain() const {
  if (const auto* name = std::get_if<std::string>(&chain)) {
    return bundled_chain(*name);
  }
  return chain_from_json(std::get<json>(chain));
}

json ExperimentConfig::to_json() const {
  json doc;
  for (const auto& e : suite) {
    doc["suite"].push_back({{"id", e.id}, {"env", e.env}, {"pa", e.pa}, {"po", e.po}});
  }
  doc["prior"] = prior;
  auto& x = doc["experiment"];
  x["mode"] = std::string(to_string(mode));
  x["env"] = env;
  x["reference"] = reference;
  x["steps"] = resolved_steps();
  x["runs"] = runs;
  x["seed"] = seed;
  x["basins"] = basin_spec().centers();
  x["jobs"] = jobs;
  auto& ev = doc["eval"];
  ev["criterion"] = std::string(to_string(criterion));
  ev["horizon"] = horizon;
  ev["perturbations"] = perturbations;
  if (const auto* name = std::get_if<std::string>(&chain)) {
    doc["intervention"]["chain"] = *name;
  } else {
    doc["intervention"]["chain"] = std::get<json>(chain);
  }
  doc["intervention"]["evidence"] = {{"d", evidence.d}, {"s", evidence.s},
                                     {"dp", evidence.dp}};
  doc["output"] = {{"path", out}, {"summary", summary}};
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c = default_config();

  if (doc.contains("suite")) {
    const auto& suite = doc.at("suite");
    if (!suite.is_array()) throw ConfigError("suite must be an array");
    c.suite.clear();
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const auto& m = suite[i];
      SuiteEntry e;
      e.id = m.value("id", "p" + std::to_string(i));
      e.env = m.value("env", "q" + std::to_string(i));
      e.pa = probability_array(m.value("pa", json()), "suite[" + std::to_string(i) + "].pa");
      e.po = probability_array(m.value("po", json()), "suite[" + std::to_string(i) + "].po");
      c.suite.push_back(std::move(e));
    }
    if (!doc.contains("prior")) {
      c.prior.assign(c.suite.size(), 1.0 / static_cast<double>(c.suite.size()));
    }
  }
  if (doc.contains("prior")) c.prior = probability_array(doc.at("prior"), "prior");

  if (doc.contains("experiment")) {
    const auto& x = doc.at("experiment");
    try {
      if (x.contains("mode")) c.mode = parse_update_mode(get_as<std::string>(x, "mode"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (x.contains("env")) c.env = get_as<std::string>(x, "env");
    if (x.contains("reference")) c.reference = get_as<std::string>(x, "reference");
    if (x.contains("steps")) c.steps = get_as<std::size_t>(x, "steps");
    if (x.contains("runs")) c.runs = get_as<std::size_t>(x, "runs");
    if (x.contains("seed")) c.seed = get_as<std::uint64_t>(x, "seed");
    if (x.contains("basins")) c.basins = get_as<std::vector<double>>(x, "basins");
    if (x.contains("jobs")) c.jobs = get_as<unsigned>(x, "jobs");
  }
  if (doc.contains("eval")) {
    const auto& ev = doc.at("eval");
    try {
      if (ev.contains("criterion")) {
        c.criterion = parse_criterion(get_as<std::string>(ev, "criterion"));
      }
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (ev.contains("horizon")) c.horizon = get_as<std::size_t>(ev, "horizon");
    if (ev.contains("perturbations")) {
      c.perturbations = get_as<std::size_t>(ev, "perturbations");
    }
  }
  if (doc.contains("intervention")) {
    const auto& iv = doc.at("intervention");
    if (iv.contains("chain")) {
      const auto& ch = iv.at("chain");
      if (ch.is_string()) {
        c.chain = ch.get<std::string>();
      } else {
        c.chain = ch;
      }
    }
    if (iv.contains("evidence")) {
      const auto& e = iv.at("evidence");
      c.evidence = {e.value("d", std::size_t{0}), e.value("s", std::size_t{0}),
                    e.value("dp", std::size_t{0})};
    }
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    if (o.contains("path")) c.out = get_as<std::string>(o, "path");
    if (o.contains("summary")) c.summary = get_as<std::string>(o, "summary");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

std::vector<std::pair<std::string, std::string>> provenance(
    const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& e : c.suite) {
    kv.emplace_back("suite." + e.id + ".env", e.env);
    kv.emplace_back("suite." + e.id + ".pa", join(e.pa));
    kv.emplace_back("suite." + e.id + ".po", join(e.po));
  }
  kv.emplace_back("prior", join(c.prior));
  kv.emplace_back("mode", std::string(to_string(c.mode)));
  kv.emplace_back("env", c.env);
  kv.emplace_back("reference", c.reference);
  kv.emplace_back("steps", std::to_string(c.resolved_steps()));
  kv.emplace_back("runs", std::to_string(c.runs));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("basins", join(c.basin_spec().centers()));
  kv.emplace_back("criterion", std::string(to_string(c.criterion)));
  kv.emplace_back("horizon", std::to_string(c.horizon));
  kv.emplace_back("perturbations", std::to_string(c.perturbations));
  return kv;
}

}  // namespace bcr
