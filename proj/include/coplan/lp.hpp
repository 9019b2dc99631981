#pragma once

#include <cstddef>
#include <vector>

#include "coplan/errors.hpp"

namespace coplan::lp {

// Minimise objective . z  subject to  ineq * z <= ineq_rhs,  eq * z = eq_rhs,
// z >= 0. Rows may be empty; every variable is implicitly non-negative.
struct LinearProgram {
  std::size_t variable_count = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> ineq;
  std::vector<double> ineq_rhs;
  std::vector<std::vector<double>> eq;
  std::vector<double> eq_rhs;

  // Throws Error(Config) for shape mismatches or non-finite entries. A
  // malformed program is a structural defect, not an infeasible one.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> point;     // one entry per variable; empty unless Optimal
  double objective_value = 0.0;  // defined only when Optimal
};

// Two-phase dense simplex with Bland's pivoting rule (lowest eligible index
// enters, lowest basic index breaks ratio ties). Bland's rule rules out
// cycling and makes the solver fully deterministic: the same program always
// returns the same vertex, bit for bit.
Solution solve(const LinearProgram& lp);

struct VerificationReport {
  double max_equality_residual = 0.0;
  double max_inequality_violation = 0.0;  // positive means a violated row
  double min_variable_value = 0.0;
  double objective_gap = 0.0;  // |reported objective - objective . point|
};

// Recomputes residuals of an Optimal solution against the program it came
// from. Throws Error(Usage) when the solution is not Optimal.
VerificationReport verify_solution(const LinearProgram& lp, const Solution& sol);

}  // namespace coplan::lp
