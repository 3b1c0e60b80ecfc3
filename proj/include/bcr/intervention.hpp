// Exact inference on a finite four-variable causal chain
//
//   theta -> D -> S -> D'   (with theta a parent of every variable and D a
//                            parent of S and D')
//
// factorized as p(theta) p(D|theta) p(S|D,theta) p(D'|D,S,theta).
// Conditioning on S keeps the factor p(S|D,theta) in the posterior;
// intervening on S replaces it by a point mass and drops it.
#pragma once

#include <cstddef>
#include <vector>

#include "bcr/core.hpp"

namespace bcr {

class FiniteCausalChain {
 public:
  struct Cardinalities {
    std::size_t theta = 0;
    std::size_t d = 0;
    std::size_t s = 0;
    std::size_t dp = 0;
  };

  /// Tables are row-major: lik_d[theta][d], lik_s[theta][d][s],
  /// lik_dp[theta][d][s][dp]. Every conditional slice must be a valid
  /// distribution; throws InvalidDistribution/InvalidArgument otherwise.
  FiniteCausalChain(Cardinalities card, Distribution prior,
                    std::vector<double> lik_d, std::vector<double> lik_s,
                    std::vector<double> lik_dp);

  const Cardinalities& cardinalities() const noexcept { return card_; }
  const Distribution& prior() const noexcept { return prior_; }

  double p_d(std::size_t theta, std::size_t d) const;
  double p_s(std::size_t theta, std::size_t d, std::size_t s) const;
  double p_dp(std::size_t theta, std::size_t d, std::size_t s,
              std::size_t dp) const;

  const std::vector<double>& lik_d() const noexcept { return lik_d_; }
  const std::vector<double>& lik_s() const noexcept { return lik_s_; }
  const std::vector<double>& lik_dp() const noexcept { return lik_dp_; }

 private:
  void check_indices(std::size_t theta, std::size_t d, std::size_t s,
                     std::size_t dp) const;

  Cardinalities card_;
  Distribution prior_;
  std::vector<double> lik_d_;
  std::vector<double> lik_s_;
  std::vector<double> lik_dp_;
};

/// p(theta | D=d, S=s, D'=dp) with all three treated as observations.
/// Throws ImpossibleEvidence if the evidence has zero joint probability.
Distribution posterior_conditioned(const FiniteCausalChain& c, std::size_t d,
                                   std::size_t s, std::size_t dp);

/// The chain p' identical to `c` except that p'(S|D,theta) is a point mass on
/// `s_fixed`.
FiniteCausalChain intervene_s(const FiniteCausalChain& c, std::size_t s_fixed);

/// p(theta | D=d, do(S=s_hat), D'=dp): the factor p(S|D,theta) is omitted.
/// Throws ImpossibleEvidence if the evidence has zero probability.
Distribution posterior_intervened(const FiniteCausalChain& c, std::size_t d,
                                  std::size_t s_hat, std::size_t dp);

/// Binary chain in which S depends strongly on theta, so conditioning on S
/// and intervening on S give visibly different posteriors.
FiniteCausalChain difference_witness_chain();

/// Binary chain in which p(S|D,theta) does not depend on theta; conditioning
/// and intervening agree on every query.
FiniteCausalChain uninformative_s_chain();

}  // namespace bcr
