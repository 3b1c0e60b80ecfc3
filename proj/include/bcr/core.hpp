// Finite alphabets, interaction histories, discrete distributions and the
// information-theoretic primitives shared by the rest of the library.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcr/rng.hpp"

namespace bcr {

using Symbol = std::size_t;

/// Absolute tolerance on the sum of a distribution's entries.
inline constexpr double kDistributionTolerance = 1e-12;

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidDistribution : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DegeneratePosterior : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class ImpossibleEvidence : public Error {
 public:
  using Error::Error;
};

//---------------------------------------------------------------------------//
// Alphabet / Interaction / History
//---------------------------------------------------------------------------//
class Alphabet {
 public:
  explicit Alphabet(std::size_t size, std::vector<std::string> labels = {});

  static Alphabet binary() { return Alphabet(2); }

  std::size_t size() const noexcept { return size_; }
  bool contains(Symbol s) const noexcept { return s < size_; }
  /// Display label; falls back to the decimal index.
  std::string label(Symbol s) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::size_t size_;
  std::vector<std::string> labels_;
};

struct Interaction {
  Symbol action = 0;
  Symbol observation = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Interaction string ao_{<t}, optionally followed by a pending action a_t.
class History {
 public:
  History() = default;
  explicit History(std::vector<Interaction> steps,
                   std::optional<Symbol> pending = std::nullopt)
      : steps_(std::move(steps)), pending_(pending) {}

  std::span<const Interaction> steps() const noexcept { return steps_; }
  std::size_t length() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty() && !pending_; }
  const std::optional<Symbol>& pending_action() const noexcept {
    return pending_;
  }

  /// Begins step t; throws std::logic_error if an action is already pending.
  void push_action(Symbol a);
  /// Completes step t; throws std::logic_error without a pending action.
  void push_observation(Symbol o);

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<Interaction> steps_;
  std::optional<Symbol> pending_;
};

//---------------------------------------------------------------------------//
// Distribution
//---------------------------------------------------------------------------//
/// Probability vector over the symbols of a finite alphabet.
class Distribution {
 public:
  /// Throws InvalidDistribution unless every entry is in [0,1] and the sum is
  /// within kDistributionTolerance of one.
  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t n);
  static Distribution point_mass(std::size_t n, Symbol s);
  /// Mixes `components` with the given weights (which must form a
  /// distribution over the components).
  static Distribution mixture(std::span<const Distribution> components,
                              const Distribution& weights);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](Symbol s) const { return probs_.at(s); }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Unnormalized natural-log weights, one per hypothesis.
using LogWeights = std::vector<double>;

/// ln sum exp(x); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

/// exp(logw - logsumexp(logw)). Throws DegeneratePosterior when no entry is
/// finite.
Distribution normalize(std::span<const double> logw);

/// Inverse-CDF draw consuming exactly one uniform from `rng`.
Symbol sample(const Distribution& d, CounterRng& rng);

/// KL divergence in bits with 0 log(0/q) = 0 and p log(p/0) = +inf.
/// Throws InvalidArgument on mismatched sizes.
double kl_bits(const Distribution& p, const Distribution& q);

}  // namespace bcr
