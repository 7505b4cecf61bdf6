#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace tunav {

/// sum(coeff * var) + constant <= 0, or == 0 when `equality`.
struct LinearConstraint {
  std::map<std::int64_t, std::int64_t> terms;
  std::int64_t constant = 0;
  bool equality = false;
};

enum class ArithResult { Consistent, Inconsistent, Unknown };

/// Integer feasibility by equality substitution, bound tightening and
/// Fourier-Motzkin elimination. Inconsistent answers are always correct;
/// Consistent may be wrong only where real relaxation misses an integer gap.
/// Unknown when more than `max_eliminations` variables need a genuine
/// elimination step or coefficients overflow.
ArithResult arith_consistent(std::vector<LinearConstraint> constraints, int max_eliminations = 12);

/// Equalities implied by the equality subsystem plus matching inequality
/// pairs and fixed bounds: returns groups of variables with equal value and
/// variables with a fixed constant value. Never fails; an empty result is
/// always acceptable.
struct ImpliedEqualities {
  std::vector<std::vector<std::int64_t>> equal_groups;
  std::map<std::int64_t, std::int64_t> fixed;
  bool inconsistent = false;
};
ImpliedEqualities implied_equalities(const std::vector<LinearConstraint>& constraints);

}  // namespace tunav
