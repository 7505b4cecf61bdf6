#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tunav/arith.hpp"
#include "tunav/vcgen.hpp"

namespace tunav {

struct Limits {
  int max_rounds = 5;
  long max_instantiations = 10000;
  long max_splits = 10000;
  long time_budget_ms = 10000;
  int max_fm_eliminations = 12;
};

enum class Status { Verified, Failed, Unknown };
enum class UnknownReason { None, Rounds, Instantiations, Splits, Time };

const char* status_name(Status s);
const char* reason_name(UnknownReason r);

struct ProveMetrics {
  long instantiations = 0;
  int rounds = 0;  // most rounds used on any branch
  long splits = 0;
  double time_ms = 0;
  std::map<std::string, long> per_fact;  // origin label -> instances
};

struct Outcome {
  Status status = Status::Failed;
  UnknownReason reason = UnknownReason::None;
  // Origins of every ground hypothesis and of every quantified fact that was
  // instantiated at least once. An over-approximation of the facts needed.
  std::set<Origin> used_core;
  // Indices into the obligation's quantified facts that were instantiated.
  std::set<std::size_t> instantiated_facts;
  ProveMetrics metrics;
};

/// Decides one obligation by refutation.
Outcome prove(const Obligation& obligation, const Limits& limits);

/// Incremental access to the prover, used to exercise matching directly.
class Prover {
 public:
  explicit Prover(Limits limits = {});
  ~Prover();
  Prover(const Prover&) = delete;
  Prover& operator=(const Prover&) = delete;

  /// Asserts a ground formula (free variables are constants).
  void assert_ground(const Expr& e);
  /// Adds a quantified fact; returns its index.
  std::size_t add_fact(const QuantifiedFact& fact);
  /// Substitutions (binder -> rendered class representative) matching
  /// trigger group `group` of fact `fact` that are not in the instance log.
  std::vector<std::map<std::string, std::string>> ematch(std::size_t fact, std::size_t group);
  /// Runs one instantiation round against the current (frozen) term graph.
  long instantiate_round();
  /// Propagates and reports whether the current state is contradictory.
  bool refuted();
  std::size_t term_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Interpretation for the finite oracle: uninterpreted functions and free
/// constants take hash-derived values in [0, domain).
struct FiniteInterpretation {
  std::int64_t domain = 3;
  std::uint64_t seed = 0;
};

/// Exhaustively evaluates a boolean formula. Every quantifier must be guarded
/// as `forall|i| 0 <= i < k ==> ...` or `exists|i| 0 <= i < k && ...` with
/// literal bounds; throws std::domain_error otherwise.
bool eval_finite(const Expr& formula, const FiniteInterpretation& interp);

}  // namespace tunav
