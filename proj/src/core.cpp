#include "bcr/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bcr {

Alphabet::Alphabet(std::size_t size, std::vector<std::string> labels)
    : size_(size), labels_(std::move(labels)) {
  if (size_ == 0) throw InvalidArgument("alphabet size must be >= 1");
  if (!labels_.empty() && labels_.size() != size_) {
    throw InvalidArgument("alphabet label count must equal its size");
  }
}

std::string Alphabet::label(Symbol s) const {
  if (!contains(s)) throw InvalidArgument("symbol out of alphabet range");
  return labels_.empty() ? std::to_string(s) : labels_[s];
}

void History::push_action(Symbol a) {
  if (pending_) throw std::logic_error("history already has a pending action");
  pending_ = a;
}

void History::push_observation(Symbol o) {
  if (!pending_) throw std::logic_error("observation without pending action");
  steps_.push_back({*pending_, o});
  pending_.reset();
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidDistribution("distribution has no entries");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0 + kDistributionTolerance)) {
      throw InvalidDistribution("probability outside [0,1]: " +
                                std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
  }
}

Distribution Distribution::uniform(std::size_t n) {
  if (n == 0) throw InvalidDistribution("distribution has no entries");
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(std::size_t n, Symbol s) {
  if (s >= n) throw InvalidDistribution("point mass outside support");
  std::vector<double> p(n, 0.0);
  p[s] = 1.0;
  return Distribution(std::move(p));
}

Distribution Distribution::mixture(std::span<const Distribution> components,
                                   const Distribution& weights) {
  if (components.empty() || components.size() != weights.size()) {
    throw InvalidArgument("mixture needs one weight per component");
  }
  std::vector<double> out(components.front().size(), 0.0);
  for (std::size_t m = 0; m < components.size(); ++m) {
    if (components[m].size() != out.size()) {
      throw InvalidArgument("mixture components over different alphabets");
    }
    const double w = weights[m];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * components[m][i];
  }
  return Distribution(std::move(out));
}

double log_sum_exp(std::span<const double> x) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (x.empty()) return kNegInf;
  const double hi = *std::max_element(x.begin(), x.end());
  if (hi == kNegInf) return kNegInf;
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

Distribution normalize(std::span<const double> logw) {
  const double lse = log_sum_exp(logw);
  if (!std::isfinite(lse)) {
    throw DegeneratePosterior("no hypothesis has finite log-weight");
  }
  std::vector<double> p(logw.size());
  std::transform(logw.begin(), logw.end(), p.begin(),
                 [lse](double v) { return std::exp(v - lse); });
  return Distribution(std::move(p));
}

Symbol sample(const Distribution& d, CounterRng& rng) {
  const double u = rng.uniform();
  const auto probs = d.probs();
  double cumulative = 0.0;
  Symbol last_positive = 0;
  for (Symbol i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  // Rounding left the cumulative sum just below one.
  return last_positive;
}

double kl_bits(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw InvalidArgument("kl_bits: distributions over different alphabets");
  }
  double acc = 0.0;
  for (Symbol i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    const double qi = q[i];
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    acc += pi * std::log2(pi / qi);
  }
  // Gibbs' inequality; only rounding can push the sum below zero.
  return std::max(acc, 0.0);
}

}  // namespace bcr
