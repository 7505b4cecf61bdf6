#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tunav/resolve.hpp"
#include "tunav/triggers.hpp"

namespace tunav {

enum class OriginKind { Axiom, BroadcastLemma, DefinitionalAxiom, LocalHypothesis };

/// Where a fact came from. Broadcast facts carry their registry id.
struct Origin {
  OriginKind kind = OriginKind::LocalHypothesis;
  std::string path;  // declaring path (no type arguments)
  std::string symbol;  // instance symbol for broadcast and definitional facts
  SourceSpan span;
  int fact_id = -1;

  bool is_broadcast() const { return kind == OriginKind::Axiom || kind == OriginKind::BroadcastLemma; }
  std::string label() const;
  bool operator==(const Origin& o) const { return label() == o.label(); }
  bool operator<(const Origin& o) const { return label() < o.label(); }
};

/// A closed universally quantified fact: forall binders. hypothesis ==> conclusion.
struct QuantifiedFact {
  std::vector<Binder> binders;
  Expr hypothesis;  // `true` when there is none
  Expr conclusion;
  std::vector<TriggerPatterns> triggers;
  TriggerSource trigger_source = TriggerSource::Conservative;
  std::vector<std::string> warnings;
  Origin origin;
  std::vector<std::string> groups_via;

  Expr formula() const;
};

using FactPtr = std::shared_ptr<const QuantifiedFact>;

struct GroundFact {
  Expr expr;
  Origin origin;
};

/// Facts visible at one proof point. `scope_chain` names the scopes that
/// contributed, outermost first.
struct FactContext {
  std::vector<GroundFact> ground;
  std::vector<FactPtr> quantified;
  std::vector<std::string> scope_chain;
};

enum class SiteKind { Assert, Ensures, LemmaPrecondition };

struct ObligationSite {
  SiteKind kind = SiteKind::Assert;
  SourceSpan span;
  std::size_t index = 0;
};

struct Obligation {
  Expr goal;
  FactContext context;
  ObligationSite site;
  std::string function;  // instance symbol
  std::string function_path;

  std::string describe() const;
};

struct VcConfig {
  TriggerStrategy strategy = TriggerStrategy::Conservative;
  int fuel = 1;
  bool default_prelude = true;
  // Extra module-level imports added to every non-prelude module.
  std::vector<std::string> ambient_uses;
};

/// Per-program state shared by all functions: lowered broadcast facts and
/// definitional axioms, computed once.
class VcGenerator {
 public:
  VcGenerator(const Program& program, const BroadcastRegistry& registry, VcConfig config);

  /// Broadcast fact for registry id `id` (lowered lazily, cached).
  FactPtr broadcast_fact(int id);
  /// Definitional facts for the spec fn instance with `symbol`.
  const std::vector<FactPtr>& definitional_facts(const std::string& symbol);

  std::vector<Obligation> generate(const FnInstance& fn);

  const Program& program() const { return program_; }
  const BroadcastRegistry& registry() const { return registry_; }
  const VcConfig& config() const { return config_; }

  /// Warnings (e.g. potential matching loops) gathered while lowering.
  std::vector<std::string> warnings;

 private:
  const Program& program_;
  const BroadcastRegistry& registry_;
  VcConfig config_;
  std::map<int, FactPtr> broadcast_cache_;
  std::map<std::string, std::vector<FactPtr>> definitional_cache_;
  std::map<std::string, std::set<std::string>> recursive_scc_;  // spec fn symbol -> its SCC (if recursive)
  bool scc_ready_ = false;

  void compute_recursion();
  friend class FunctionVc;
};

/// Lowers a broadcast proof/axiom fn instance to a quantified fact.
QuantifiedFact lower_quantified_fact(const FnInstance& fn, TriggerStrategy strategy);

/// Definitional facts for a spec fn at the given fuel. `recursive_group` is
/// the set of spec fn symbols mutually recursive with `fn` (empty if none).
std::vector<QuantifiedFact> definitional_axiom(const FnInstance& fn, int fuel,
                                               const std::set<std::string>& recursive_group);

/// Capture-avoiding substitution of variables.
Expr substitute_vars(const Expr& e, const std::map<std::string, Expr>& subst);

/// Replaces `nat` binders by `int` binders with a `>= 0` guard.
Expr lower_nat_binders(const Expr& e);

/// Standalone SMT-LIB 2 script for an obligation.
std::string emit_smtlib(const Obligation& ob);

/// Spec fn symbols called anywhere in `e`.
void collect_called_symbols(const Expr& e, std::set<std::string>& out);

}  // namespace tunav
