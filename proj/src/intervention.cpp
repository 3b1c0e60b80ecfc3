#include "bcr/intervention.hpp"

#include <string>

namespace bcr {

namespace {

// Validates that `table` holds `rows` consecutive distributions of width
// `width`.
void check_table(const std::vector<double>& table, std::size_t rows,
                 std::size_t width, const char* name) {
  if (table.size() != rows * width) {
    throw InvalidArgument(std::string(name) + " has " +
                          std::to_string(table.size()) + " entries, expected " +
                          std::to_string(rows * width));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto first = table.begin() + static_cast<std::ptrdiff_t>(r * width);
    try {
      Distribution(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(width)));
    } catch (const InvalidDistribution& e) {
      throw InvalidDistribution(std::string(name) + " row " +
                                std::to_string(r) + ": " + e.what());
    }
  }
}

Distribution normalize_or_throw(std::vector<double> joint) {
  double total = 0.0;
  for (double v : joint) total += v;
  if (!(total > 0.0)) {
    throw ImpossibleEvidence("evidence has zero probability under the chain");
  }
  for (double& v : joint) v /= total;
  return Distribution(std::move(joint));
}

}  // namespace

FiniteCausalChain::FiniteCausalChain(Cardinalities card, Distribution prior,
                                     std::vector<double> lik_d,
                                     std::vector<double> lik_s,
                                     std::vector<double> lik_dp)
    : card_(card),
      prior_(std::move(prior)),
      lik_d_(std::move(lik_d)),
      lik_s_(std::move(lik_s)),
      lik_dp_(std::move(lik_dp)) {
  if (card_.theta == 0 || card_.d == 0 || card_.s == 0 || card_.dp == 0) {
    throw InvalidArgument("chain cardinalities must be positive");
  }
  if (prior_.size() != card_.theta) {
    throw InvalidArgument("prior size differs from theta cardinality");
  }
  check_table(lik_d_, card_.theta, card_.d, "lik_d");
  check_table(lik_s_, card_.theta * card_.d, card_.s, "lik_s");
  check_table(lik_dp_, card_.theta * card_.d * card_.s, card_.dp, "lik_dp");
}

void FiniteCausalChain::check_indices(std::size_t theta, std::size_t d,
                                      std::size_t s, std::size_t dp) const {
  if (theta >= card_.theta || d >= card_.d || s >= card_.s || dp >= card_.dp) {
    throw InvalidArgument("chain index out of range");
  }
}

double FiniteCausalChain::p_d(std::size_t theta, std::size_t d) const {
  check_indices(theta, d, 0, 0);
  return lik_d_[theta * card_.d + d];
}

double FiniteCausalChain::p_s(std::size_t theta, std::size_t d,
                              std::size_t s) const {
  check_indices(theta, d, s, 0);
  return lik_s_[(theta * card_.d + d) * card_.s + s];
}

double FiniteCausalChain::p_dp(std::size_t theta, std::size_t d, std::size_t s,
                               std::size_t dp) const {
  check_indices(theta, d, s, dp);
  return lik_dp_[((theta * card_.d + d) * card_.s + s) * card_.dp + dp];
}

Distribution posterior_conditioned(const FiniteCausalChain& c, std::size_t d,
                                   std::size_t s, std::size_t dp) {
  const auto n = c.cardinalities().theta;
  std::vector<double> joint(n);
  for (std::size_t th = 0; th < n; ++th) {
    joint[th] = c.prior()[th] * c.p_d(th, d) * c.p_s(th, d, s) *
                c.p_dp(th, d, s, dp);
  }
  return normalize_or_throw(std::move(joint));
}

FiniteCausalChain intervene_s(const FiniteCausalChain& c, std::size_t s_fixed) {
  const auto& card = c.cardinalities();
  if (s_fixed >= card.s) throw InvalidArgument("intervened value out of range");
  std::vector<double> lik_s(card.theta * card.d * card.s, 0.0);
  for (std::size_t row = 0; row < card.theta * card.d; ++row) {
    lik_s[row * card.s + s_fixed] = 1.0;
  }
  return FiniteCausalChain(card, c.prior(), c.lik_d(), std::move(lik_s),
                           c.lik_dp());
}

Distribution posterior_intervened(const FiniteCausalChain& c, std::size_t d,
                                  std::size_t s_hat, std::size_t dp) {
  const auto n = c.cardinalities().theta;
  std::vector<double> joint(n);
  for (std::size_t th = 0; th < n; ++th) {
    joint[th] = c.prior()[th] * c.p_d(th, d) * c.p_dp(th, d, s_hat, dp);
  }
  return normalize_or_throw(std::move(joint));
}

FiniteCausalChain difference_witness_chain() {
  return FiniteCausalChain({2, 2, 2, 2}, Distribution({0.5, 0.5}),
                           {0.7, 0.3,   //
                            0.3, 0.7},
                           {0.9, 0.1, 0.8, 0.2,   // theta = 0
                            0.1, 0.9, 0.2, 0.8},  // theta = 1
                           {0.6, 0.4, 0.5, 0.5, 0.5, 0.5, 0.7, 0.3,    //
                            0.4, 0.6, 0.5, 0.5, 0.3, 0.7, 0.5, 0.5});
}

FiniteCausalChain uninformative_s_chain() {
  return FiniteCausalChain({2, 2, 2, 2}, Distribution({0.5, 0.5}),
                           {0.7, 0.3,   //
                            0.3, 0.7},
                           {0.25, 0.75, 0.6, 0.4,   // theta = 0
                            0.25, 0.75, 0.6, 0.4},  // theta = 1
                           {0.6, 0.4, 0.5, 0.5, 0.5, 0.5, 0.7, 0.3,    //
                            0.4, 0.6, 0.5, 0.5, 0.3, 0.7, 0.5, 0.5});
}

}  // namespace bcr
