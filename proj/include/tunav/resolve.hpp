#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunav/syntax.hpp"

namespace tunav {

class ResolveError : public std::runtime_error {
 public:
  ResolveError(SourceSpan span, const std::string& message);
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

/// Raised when broadcast lemmas import each other's facts.
class CycleError : public std::runtime_error {
 public:
  explicit CycleError(std::vector<std::string> members);
  const std::vector<std::string>& members() const { return members_; }

 private:
  std::vector<std::string> members_;
};

/// `nat` is `int` for sorting purposes.
Type sort_of(const Type& t);

enum class FnKind { Spec, Proof, Axiom };

struct ParamInfo {
  std::string name;
  Type type;
  bool is_nat = false;
};

/// One monomorphized function: a spec fn, proof fn or axiom fn at concrete
/// type arguments.
struct FnInstance {
  FnKind kind = FnKind::Spec;
  std::string path;    // declared path, e.g. prelude::seq::len
  std::string symbol;  // path plus type arguments, e.g. prelude::seq::len<int>
  std::vector<Type> type_args;
  std::string module;
  bool broadcast = false;
  bool is_const = false;
  std::vector<ParamInfo> params;
  Type ret;
  bool ret_nat = false;
  std::optional<Expr> body;
  std::vector<Expr> requires_;
  std::vector<Expr> ensures;
  std::vector<Stmt> stmts;
  SourceSpan span;
  std::size_t source_index = 0;

  bool is_generic_instance() const { return !type_args.empty(); }
};

struct ModuleInfo {
  std::string name;
  std::string file;
  std::vector<std::string> uses;  // resolved paths from module-level `broadcast use`
  SourceSpan use_span;
};

struct GroupInfo {
  std::string path;
  std::vector<std::string> members;  // resolved paths: groups or broadcast fns
  SourceSpan span;
};

/// A fully resolved, type-checked and monomorphized program.
struct Program {
  std::vector<ModuleInfo> modules;
  std::vector<FnInstance> functions;
  std::map<std::string, std::size_t> by_symbol;
  std::map<std::string, std::vector<std::size_t>> instances_of;  // path -> instances
  std::map<std::string, GroupInfo> groups;
  std::set<std::string> sort_paths;

  const FnInstance& fn(const std::string& symbol) const { return functions.at(by_symbol.at(symbol)); }
  const ModuleInfo* module(const std::string& name) const;
};

Program resolve_program(const std::vector<ProgramAst>& asts);

struct FactEntry {
  int id = 0;
  std::string path;    // declaring fn path
  std::string symbol;  // instance symbol
  std::size_t fn_index = 0;
  bool axiom = false;
};

/// One fact reached through an import, with the chain of groups it came through.
struct ImportedFact {
  int fact = 0;
  std::vector<std::string> groups_via;
};

struct BroadcastRegistry {
  std::vector<FactEntry> facts;
  std::map<std::string, std::vector<int>> facts_by_path;
  std::map<std::string, std::set<int>> groups;  // flattened membership
  std::string default_group_path;
  std::set<int> default_group;

  /// Facts named by a `broadcast use` path (a fact path or a group path).
  std::vector<ImportedFact> expand(const Program& program, const std::string& path) const;
  /// Fact ids reached from a list of fact and group paths.
  std::set<int> flatten(const Program& program, const std::vector<std::string>& paths) const;
};

inline constexpr const char* kDefaultGroupPath = "prelude::group_default";

BroadcastRegistry build_registry(const Program& program);

struct Task {
  std::size_t fn_index = 0;
  std::string symbol;
  int layer = 0;
  std::set<int> imported_facts;
  std::vector<std::size_t> depends_on;  // indices into TaskOrder::tasks
};

struct TaskOrder {
  std::vector<Task> tasks;           // topologically sorted
  std::map<int, std::size_t> fact_task;  // fact id -> index of proving task
  int layer_count = 0;

  std::optional<std::size_t> task_of(const std::string& symbol) const;
};

/// Every fact id imported anywhere in a proof fn's contexts: default group,
/// module-level, function-level and block-level uses.
std::set<int> imported_fact_ids(const Program& program, const BroadcastRegistry& registry, const FnInstance& fn,
                                bool include_default = true);

TaskOrder order_tasks(const Program& program, const BroadcastRegistry& registry);

/// Tarjan's algorithm; components come out in reverse topological order of the
/// condensation (sinks first).
std::vector<std::vector<std::size_t>> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& graph);

}  // namespace tunav
