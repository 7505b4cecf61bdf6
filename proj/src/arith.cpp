#include "tunav/arith.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace tunav {

namespace {

using Terms = std::map<std::int64_t, std::int64_t>;
using i128 = __int128;

struct Overflow {};

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX / 4 || v < INT64_MIN / 4) throw Overflow{};
  return static_cast<std::int64_t>(v);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// a := a + m * b
void add_scaled(LinearConstraint& a, const LinearConstraint& b, std::int64_t m) {
  for (const auto& [v, c] : b.terms) {
    std::int64_t nc = narrow(static_cast<i128>(a.terms[v]) + static_cast<i128>(m) * c);
    if (nc == 0)
      a.terms.erase(v);
    else
      a.terms[v] = nc;
  }
  a.constant = narrow(static_cast<i128>(a.constant) + static_cast<i128>(m) * b.constant);
}

LinearConstraint scaled(const LinearConstraint& c, std::int64_t m) {
  LinearConstraint out;
  out.equality = c.equality;
  for (const auto& [v, k] : c.terms) out.terms[v] = narrow(static_cast<i128>(k) * m);
  out.constant = narrow(static_cast<i128>(c.constant) * m);
  return out;
}

// Divides by the coefficient gcd, tightening inequalities. Returns false if
// the constraint is unsatisfiable on its own.
bool normalize(LinearConstraint& c) {
  for (auto it = c.terms.begin(); it != c.terms.end();) {
    if (it->second == 0)
      it = c.terms.erase(it);
    else
      ++it;
  }
  if (c.terms.empty()) return c.equality ? c.constant == 0 : c.constant <= 0;
  std::int64_t g = 0;
  for (const auto& [v, k] : c.terms) g = std::gcd(g, k < 0 ? -k : k);
  if (g > 1) {
    if (c.equality) {
      if (c.constant % g != 0) return false;
      c.constant /= g;
    } else {
      c.constant = ceil_div(c.constant, g);
    }
    for (auto& [v, k] : c.terms) k /= g;
  }
  return true;
}

ArithResult run_fm(std::vector<LinearConstraint> cs, int max_eliminations) {
  for (auto& c : cs)
    if (!normalize(c)) return ArithResult::Inconsistent;

  // Equalities: substitute unit-coefficient variables, split the rest.
  std::vector<LinearConstraint> ineqs;
  for (;;) {
    auto eq = std::find_if(cs.begin(), cs.end(), [](const LinearConstraint& c) { return c.equality; });
    if (eq == cs.end()) break;
    LinearConstraint e = *eq;
    cs.erase(eq);
    if (e.terms.empty()) {
      if (e.constant != 0) return ArithResult::Inconsistent;
      continue;
    }
    std::int64_t var = 0, coef = 0;
    for (const auto& [v, k] : e.terms)
      if (k == 1 || k == -1) var = v, coef = k;
    if (coef == 0) {
      LinearConstraint lo = e, hi = scaled(e, -1);
      lo.equality = hi.equality = false;
      cs.push_back(lo);
      cs.push_back(hi);
      continue;
    }
    for (auto& c : cs) {
      auto it = c.terms.find(var);
      if (it == c.terms.end()) continue;
      std::int64_t a = it->second;
      add_scaled(c, e, -a * coef);
      if (!normalize(c)) return ArithResult::Inconsistent;
    }
  }
  ineqs = std::move(cs);

  int eliminations = 0;
  for (;;) {
    // Keep the strongest constraint per coefficient vector.
    std::map<Terms, std::int64_t> best;
    for (auto& c : ineqs) {
      if (!normalize(c)) return ArithResult::Inconsistent;
      if (c.terms.empty()) continue;
      auto it = best.find(c.terms);
      if (it == best.end())
        best.emplace(c.terms, c.constant);
      else
        it->second = std::max(it->second, c.constant);
    }
    // Opposite pairs: a.x + k1 <= 0 and -a.x + k2 <= 0 need k1 + k2 <= 0.
    for (const auto& [terms, k] : best) {
      Terms neg;
      for (const auto& [v, c] : terms) neg[v] = -c;
      auto it = best.find(neg);
      if (it != best.end() && static_cast<i128>(k) + it->second > 0) return ArithResult::Inconsistent;
    }
    ineqs.clear();
    for (const auto& [terms, k] : best) ineqs.push_back(LinearConstraint{terms, k, false});
    if (ineqs.empty()) return ArithResult::Consistent;

    std::map<std::int64_t, std::pair<int, int>> signs;
    for (const auto& c : ineqs)
      for (const auto& [v, k] : c.terms) (k > 0 ? signs[v].first : signs[v].second)++;
    // One-sided variables can always be satisfied: drop their constraints.
    std::set<std::int64_t> one_sided;
    for (const auto& [v, pn] : signs)
      if (pn.first == 0 || pn.second == 0) one_sided.insert(v);
    if (!one_sided.empty()) {
      std::vector<LinearConstraint> kept;
      for (auto& c : ineqs) {
        bool drop = false;
        for (const auto& [v, k] : c.terms)
          if (one_sided.count(v)) drop = true;
        if (!drop) kept.push_back(std::move(c));
      }
      ineqs = std::move(kept);
      continue;
    }
    std::int64_t var = 0;
    long best_cost = -1;
    for (const auto& [v, pn] : signs) {
      long cost = static_cast<long>(pn.first) * pn.second;
      if (best_cost < 0 || cost < best_cost) best_cost = cost, var = v;
    }
    if (++eliminations > max_eliminations) return ArithResult::Unknown;
    std::vector<LinearConstraint> pos, neg, rest;
    for (auto& c : ineqs) {
      auto it = c.terms.find(var);
      if (it == c.terms.end())
        rest.push_back(std::move(c));
      else if (it->second > 0)
        pos.push_back(std::move(c));
      else
        neg.push_back(std::move(c));
    }
    for (const auto& p : pos) {
      for (const auto& n : neg) {
        std::int64_t a = p.terms.at(var), b = -n.terms.at(var);
        LinearConstraint c = scaled(p, b);
        add_scaled(c, n, a);
        c.terms.erase(var);
        rest.push_back(std::move(c));
      }
    }
    if (rest.size() > 4000) return ArithResult::Unknown;
    ineqs = std::move(rest);
  }
}

}  // namespace

ArithResult arith_consistent(std::vector<LinearConstraint> constraints, int max_eliminations) {
  try {
    return run_fm(std::move(constraints), max_eliminations);
  } catch (const Overflow&) {
    return ArithResult::Unknown;
  }
}

ImpliedEqualities implied_equalities(const std::vector<LinearConstraint>& constraints) {
  ImpliedEqualities out;
  try {
    std::vector<LinearConstraint> eqs;
    std::set<std::int64_t> vars;
    // Upper and lower bounds per coefficient vector (sign-normalized).
    std::map<Terms, std::pair<std::optional<std::int64_t>, std::optional<std::int64_t>>> bounds;
    for (auto c : constraints) {
      for (const auto& [v, k] : c.terms) vars.insert(v);
      if (!normalize(c)) {
        out.inconsistent = true;
        return out;
      }
      if (c.terms.empty()) continue;
      if (c.equality) {
        eqs.push_back(c);
        continue;
      }
      bool flip = c.terms.begin()->second < 0;
      if (!flip) {
        auto& u = bounds[c.terms].second;  // sum <= -k
        u = u ? std::min(*u, -c.constant) : -c.constant;
      } else {
        Terms t;
        for (const auto& [v, k] : c.terms) t[v] = -k;
        auto& l = bounds[t].first;  // sum >= k
        l = l ? std::max(*l, c.constant) : c.constant;
      }
    }
    for (const auto& [t, lu] : bounds) {
      if (lu.first && lu.second) {
        if (*lu.first > *lu.second) {
          out.inconsistent = true;
          return out;
        }
        if (*lu.first == *lu.second) eqs.push_back(LinearConstraint{t, -*lu.first, true});
      }
    }
    // var = sum + constant
    std::map<std::int64_t, LinearConstraint> solved;
    auto apply = [&](LinearConstraint& c) {
      bool changed = true;
      while (changed) {
        changed = false;
        for (auto it = c.terms.begin(); it != c.terms.end(); ++it) {
          auto s = solved.find(it->first);
          if (s == solved.end()) continue;
          std::int64_t a = it->second;
          c.terms.erase(it);
          add_scaled(c, s->second, a);
          changed = true;
          break;
        }
      }
    };
    for (auto e : eqs) {
      apply(e);
      if (!normalize(e)) {
        out.inconsistent = true;
        return out;
      }
      if (e.terms.empty()) continue;
      std::int64_t var = -1, coef = 0;
      for (auto it = e.terms.rbegin(); it != e.terms.rend(); ++it)
        if (it->second == 1 || it->second == -1) {
          var = it->first;
          coef = it->second;
          break;
        }
      if (coef == 0) continue;
      // coef*var + rest + k = 0  =>  var = -coef*(rest + k)
      LinearConstraint sol;
      for (const auto& [v, k] : e.terms)
        if (v != var) sol.terms[v] = narrow(static_cast<i128>(-coef) * k);
      sol.constant = narrow(static_cast<i128>(-coef) * e.constant);
      for (auto& [v, s] : solved) {
        auto it = s.terms.find(var);
        if (it == s.terms.end()) continue;
        std::int64_t a = it->second;
        s.terms.erase(it);
        add_scaled(s, sol, a);
      }
      solved[var] = sol;
    }
    std::map<std::pair<Terms, std::int64_t>, std::vector<std::int64_t>> groups;
    for (auto v : vars) {
      auto s = solved.find(v);
      if (s == solved.end()) {
        groups[{Terms{{v, 1}}, 0}].push_back(v);
      } else if (s->second.terms.empty()) {
        out.fixed[v] = s->second.constant;
      } else {
        groups[{s->second.terms, s->second.constant}].push_back(v);
      }
    }
    for (auto& [k, g] : groups)
      if (g.size() > 1) out.equal_groups.push_back(g);
  } catch (const Overflow&) {
    return ImpliedEqualities{};
  }
  return out;
}

}  // namespace tunav
