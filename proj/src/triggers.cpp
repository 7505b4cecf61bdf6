#include "tunav/triggers.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace tunav {

TriggerError::TriggerError(SourceSpan span, const std::string& message)
    : std::runtime_error(span.to_string() + ": " + message), span_(std::move(span)) {}

namespace {

using NameSet = std::set<std::string>;

NameSet binder_names(const std::vector<Binder>& binders) {
  NameSet out;
  for (const auto& b : binders) out.insert(b.name);
  return out;
}

void collect_mentions(const Expr& e, const NameSet& binders, NameSet& out) {
  if (e.kind == ExprKind::Var && binders.count(e.name)) out.insert(e.name);
  for (const auto& a : e.args) collect_mentions(a, binders, out);
}

NameSet mentions(const Expr& e, const NameSet& binders) {
  NameSet out;
  collect_mentions(e, binders, out);
  return out;
}

bool is_pattern_arith(const Expr& e) {
  return e.kind == ExprKind::Binary && (e.op == BinaryOp::Add || e.op == BinaryOp::Sub || e.op == BinaryOp::Mul);
}

// Node kinds the matcher understands inside a pattern.
bool pattern_shape_ok(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
    case ExprKind::Var:
      return true;
    case ExprKind::Call:
      break;
    case ExprKind::Binary:
      if (!is_pattern_arith(e)) return false;
      break;
    default:
      return false;
  }
  return std::all_of(e.args.begin(), e.args.end(), pattern_shape_ok);
}

bool is_binder_var(const Expr& e, const NameSet& binders) {
  return e.kind == ExprKind::Var && binders.count(e.name);
}

bool is_candidate(const Expr& e, const NameSet& binders) {
  if (!pattern_shape_ok(e)) return false;
  if (e.kind == ExprKind::Call) return !mentions(e, binders).empty();
  if (is_pattern_arith(e)) return is_binder_var(e.args[0], binders) || is_binder_var(e.args[1], binders);
  return false;
}

// Clears marks and orders commutative arguments canonically.
Expr normalize(const Expr& e) {
  Expr out = e;
  out.trigger_mark = false;
  out.span = {};
  for (auto& a : out.args) a = normalize(a);
  if (out.kind == ExprKind::Binary && (out.op == BinaryOp::Add || out.op == BinaryOp::Mul)) {
    if (structural_hash(out.args[1]) < structural_hash(out.args[0])) std::swap(out.args[0], out.args[1]);
  }
  return out;
}

bool subterm_normalized(const Expr& needle, const Expr& hay) {
  if (structurally_equal(needle, hay)) return true;
  for (const auto& a : hay.args)
    if (subterm_normalized(needle, a)) return true;
  return false;
}

std::size_t term_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args) n += term_size(a);
  return n;
}

Expr unmarked(const Expr& e) {
  Expr out = e;
  out.trigger_mark = false;
  for (auto& a : out.args) a = unmarked(a);
  return out;
}

void collect_marks(const Expr& e, std::vector<const Expr*>& out) {
  if (e.trigger_mark) out.push_back(&e);
  if (e.kind == ExprKind::Forall || e.kind == ExprKind::Exists) return;
  for (const auto& a : e.args) collect_marks(a, out);
}

bool covers(const std::vector<std::size_t>& group, const std::vector<NameSet>& ments, std::size_t nbinders) {
  NameSet all;
  for (auto i : group) all.insert(ments[i].begin(), ments[i].end());
  return all.size() == nbinders;
}

// Enumerates index combinations of size k in lexicographic order.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Multi-expression groups are searched over at most this many candidates.
constexpr std::size_t kMaxMultiCandidates = 16;

// B is below A when every expression of B occurs inside some expression of A.
bool group_below(const TriggerGroup& b, const TriggerGroup& a) {
  for (const auto& eb : b.exprs) {
    bool found = false;
    for (const auto& ea : a.exprs)
      if (subterm_normalized(normalize(eb), normalize(ea))) found = true;
    if (!found) return false;
  }
  return true;
}

bool same_group(const TriggerGroup& a, const TriggerGroup& b) {
  return group_below(a, b) && group_below(b, a) && a.exprs.size() == b.exprs.size();
}

std::vector<TriggerGroup> prune_redundant(const std::vector<TriggerGroup>& groups) {
  std::vector<TriggerGroup> kept;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    bool pruned = false;
    for (std::size_t j = 0; j < groups.size() && !pruned; ++j) {
      if (i == j || same_group(groups[i], groups[j])) continue;
      if (group_below(groups[j], groups[i]) && !group_below(groups[i], groups[j])) pruned = true;
    }
    if (pruned) continue;
    bool related = false;
    for (const auto& k : kept)
      if (group_below(k, groups[i]) || group_below(groups[i], k)) related = true;
    if (!related) kept.push_back(groups[i]);
  }
  return kept;
}

void check_matching_loops(const Expr& body, TriggerSelection& sel) {
  for (const auto& g : sel.groups) {
    for (const auto& t : g.exprs) {
      if (t.kind != ExprKind::Call) continue;
      Expr nt = normalize(t);
      bool loop = false;
      std::function<void(const Expr&)> walk = [&](const Expr& e) {
        if (loop) return;
        if (e.kind == ExprKind::Call && e.name == t.name && e.symbol == t.symbol) {
          for (const auto& a : e.args)
            if (subterm_normalized(nt, normalize(a))) loop = true;
        }
        for (const auto& a : e.args) walk(a);
      };
      walk(body);
      if (loop) sel.warnings.push_back("potential matching loop on trigger " + render_expr(t));
    }
  }
}

TriggerSelection conservative(const std::vector<Expr>& cands, const std::vector<NameSet>& ments,
                              std::size_t nbinders, const SourceSpan& span) {
  TriggerSelection sel;
  sel.strategy_used = TriggerSource::Conservative;
  std::vector<std::size_t> singles;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (ments[i].size() == nbinders) singles.push_back(i);
  if (!singles.empty()) {
    auto rank = [&](std::size_t i) {
      return std::make_tuple(cands[i].kind == ExprKind::Call ? 0 : 1, -static_cast<long>(term_size(cands[i])), i);
    };
    std::size_t best = *std::min_element(singles.begin(), singles.end(),
                                         [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
    sel.groups.push_back(TriggerGroup{{cands[best]}});
    return sel;
  }
  std::size_t n = std::min(cands.size(), kMaxMultiCandidates);
  for (std::size_t k = 2; k <= std::min(n, nbinders); ++k) {
    std::vector<std::size_t> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = i;
    do {
      if (covers(c, ments, nbinders)) {
        TriggerGroup g;
        for (auto i : c) g.exprs.push_back(cands[i]);
        sel.groups.push_back(std::move(g));
        return sel;
      }
    } while (next_combination(c, n));
  }
  throw TriggerError(span, "no valid trigger");
}

TriggerSelection all_triggers(const std::vector<Expr>& cands, const std::vector<NameSet>& ments,
                              const NameSet& binders, const SourceSpan& span) {
  const std::size_t nbinders = binders.size();
  // A binder that is a direct argument of arithmetic and also sits under a
  // function application: the arithmetic pattern would match too freely.
  NameSet arith_direct, in_calls;
  for (const auto& c : cands) {
    if (c.kind == ExprKind::Call) {
      auto m = mentions(c, binders);
      in_calls.insert(m.begin(), m.end());
    } else {
      for (const auto& a : c.args)
        if (is_binder_var(a, binders)) arith_direct.insert(a.name);
    }
  }
  for (const auto& b : arith_direct)
    if (in_calls.count(b)) return conservative(cands, ments, nbinders, span);

  TriggerSelection sel;
  sel.strategy_used = TriggerSource::AllTriggers;
  std::vector<TriggerGroup> groups;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (ments[i].size() == nbinders) groups.push_back(TriggerGroup{{cands[i]}});
  if (groups.empty()) {
    std::size_t n = std::min(cands.size(), kMaxMultiCandidates);
    std::vector<std::vector<std::size_t>> minimal;
    for (std::size_t k = 2; k <= std::min(n, nbinders); ++k) {
      std::vector<std::size_t> c(k);
      for (std::size_t i = 0; i < k; ++i) c[i] = i;
      do {
        if (!covers(c, ments, nbinders)) continue;
        bool has_smaller = false;
        for (const auto& m : minimal)
          if (std::includes(c.begin(), c.end(), m.begin(), m.end())) has_smaller = true;
        if (!has_smaller) minimal.push_back(c);
      } while (next_combination(c, n));
    }
    for (const auto& m : minimal) {
      TriggerGroup g;
      for (auto i : m) g.exprs.push_back(cands[i]);
      groups.push_back(std::move(g));
    }
  }
  if (groups.empty()) throw TriggerError(span, "no valid trigger");
  sel.groups = prune_redundant(groups);
  return sel;
}

void annotate(Expr& e, TriggerStrategy strategy, bool pos, bool neg, std::vector<std::string>* warnings) {
  switch (e.kind) {
    case ExprKind::Unary:
      if (e.uop == UnaryOp::Not) annotate(e.args[0], strategy, neg, pos, warnings);
      return;
    case ExprKind::Binary:
      if (e.op == BinaryOp::And || e.op == BinaryOp::Or) {
        for (auto& a : e.args) annotate(a, strategy, pos, neg, warnings);
      } else if (e.op == BinaryOp::Implies) {
        annotate(e.args[0], strategy, neg, pos, warnings);
        annotate(e.args[1], strategy, pos, neg, warnings);
      } else {
        for (auto& a : e.args) annotate(a, strategy, true, true, warnings);
      }
      return;
    case ExprKind::Ite:
      annotate(e.args[0], strategy, true, true, warnings);
      annotate(e.args[1], strategy, pos, neg, warnings);
      annotate(e.args[2], strategy, pos, neg, warnings);
      return;
    case ExprKind::Call:
      for (auto& a : e.args) annotate(a, strategy, true, true, warnings);
      return;
    case ExprKind::Forall:
    case ExprKind::Exists: {
      annotate(e.args[0], strategy, pos, neg, warnings);
      bool required = e.kind == ExprKind::Forall ? pos : neg;
      e.triggers.clear();
      try {
        TriggerSelection sel = infer_triggers(e.binders, e.args[0], strategy, e.all_triggers, e.span);
        for (auto& g : sel.groups) e.triggers.push_back(std::move(g.exprs));
        if (warnings && required)
          for (auto& w : sel.warnings) warnings->push_back(e.span.to_string() + ": " + w);
      } catch (const TriggerError&) {
        if (required) throw;
      }
      return;
    }
    default:
      return;
  }
}

}  // namespace

bool is_subterm(const Expr& needle, const Expr& hay) { return subterm_normalized(normalize(needle), normalize(hay)); }

std::vector<Expr> valid_trigger_candidates(const std::vector<Binder>& binders, const Expr& body) {
  NameSet names = binder_names(binders);
  std::vector<Expr> out;
  std::vector<Expr> normal;
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (e.kind == ExprKind::Forall || e.kind == ExprKind::Exists) return;
    if (is_candidate(e, names)) {
      Expr n = normalize(e);
      bool dup = std::any_of(normal.begin(), normal.end(), [&](const Expr& x) { return structurally_equal(x, n); });
      if (!dup) {
        normal.push_back(std::move(n));
        out.push_back(unmarked(e));
      }
    }
    for (const auto& a : e.args) walk(a);
  };
  walk(body);
  return out;
}

TriggerSelection infer_triggers(const std::vector<Binder>& binders, const Expr& body, TriggerStrategy strategy,
                                bool all_triggers_attr, const SourceSpan& span) {
  NameSet names = binder_names(binders);
  std::vector<const Expr*> marks;
  collect_marks(body, marks);
  TriggerSelection sel;
  if (!marks.empty()) {
    sel.strategy_used = TriggerSource::Manual;
    TriggerGroup g;
    NameSet covered;
    for (const Expr* m : marks) {
      Expr t = unmarked(*m);
      if (!is_candidate(t, names))
        throw TriggerError(m->span, "invalid trigger '" + render_expr(t) +
                                        "': a trigger must be a function application, or arithmetic with a "
                                        "quantified variable as an argument");
      auto ms = mentions(t, names);
      covered.insert(ms.begin(), ms.end());
      g.exprs.push_back(std::move(t));
    }
    if (covered.size() != names.size()) {
      std::string missing;
      for (const auto& n : names)
        if (!covered.count(n)) missing += (missing.empty() ? "" : ", ") + n;
      throw TriggerError(span, "trigger does not mention quantified variable(s) " + missing);
    }
    sel.groups.push_back(std::move(g));
  } else {
    std::vector<Expr> cands = valid_trigger_candidates(binders, body);
    std::vector<NameSet> ments;
    for (const auto& c : cands) ments.push_back(mentions(c, names));
    if (all_triggers_attr || strategy == TriggerStrategy::AllTriggers)
      sel = all_triggers(cands, ments, names, span);
    else
      sel = conservative(cands, ments, names.size(), span);
  }
  check_matching_loops(body, sel);
  return sel;
}

void annotate_triggers(Expr& e, TriggerStrategy strategy, bool positive, std::vector<std::string>* warnings) {
  annotate(e, strategy, positive, !positive, warnings);
}

}  // namespace tunav
