#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tunav/syntax.hpp"

namespace tunav {

enum class TriggerStrategy { Conservative, AllTriggers };

class TriggerError : public std::runtime_error {
 public:
  TriggerError(SourceSpan span, const std::string& message);
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

/// Pattern expressions that together mention every binder.
struct TriggerGroup {
  std::vector<Expr> exprs;
};

enum class TriggerSource { Manual, Conservative, AllTriggers };

struct TriggerSelection {
  std::vector<TriggerGroup> groups;
  TriggerSource strategy_used = TriggerSource::Conservative;
  std::vector<std::string> warnings;
};

/// Subterms of `body` usable as trigger expressions for `binders`: spec fn
/// applications mentioning a binder, and `+ - *` with a binder as a direct
/// argument. Listed in preorder, structural duplicates removed, trigger marks
/// cleared. Nested quantifiers are not entered.
std::vector<Expr> valid_trigger_candidates(const std::vector<Binder>& binders, const Expr& body);

/// Chooses trigger groups for a quantifier over `binders` with body `body`.
/// `#[trigger]` marks in `body` override the strategy; `all_triggers_attr`
/// (from `#![all_triggers]`) forces the all-triggers strategy.
TriggerSelection infer_triggers(const std::vector<Binder>& binders, const Expr& body, TriggerStrategy strategy,
                                bool all_triggers_attr, const SourceSpan& span);

/// True if `needle` occurs in `hay` (reflexively), modulo commutative
/// ordering of `+` and `*`.
bool is_subterm(const Expr& needle, const Expr& hay);

/// Fills `triggers` on every quantifier in `e`. Quantifiers that act
/// universally at polarity `positive` (forall when asserted, exists when
/// refuted) must have a trigger and raise TriggerError otherwise; the rest are
/// annotated on a best-effort basis.
void annotate_triggers(Expr& e, TriggerStrategy strategy, bool positive, std::vector<std::string>* warnings = nullptr);

}  // namespace tunav
