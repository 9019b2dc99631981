#include "coplan/lp.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace coplan::lp {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;
constexpr std::size_t kMaxPivots = 200000;

// Dense simplex tableau in canonical form: basis columns are kept as identity
// columns by the pivot operation, the last column holds the right-hand side.
struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // includes the right-hand side column
  std::vector<double> cells;
  std::vector<std::size_t> basis;  // basic variable of each row

  double& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  double rhs(std::size_t r) const { return cells[r * cols + (cols - 1)]; }

  void pivot(std::size_t pivot_row, std::size_t pivot_col) {
    const double p = at(pivot_row, pivot_col);
    for (std::size_t c = 0; c < cols; ++c) at(pivot_row, c) /= p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pivot_row) continue;
      const double factor = at(r, pivot_col);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < cols; ++c) {
        at(r, c) -= factor * at(pivot_row, c);
      }
      at(r, pivot_col) = 0.0;  // keep the basis column exactly canonical
    }
    basis[pivot_row] = pivot_col;
  }
};

void check_finite_row(const std::vector<double>& row, std::size_t expect,
                      const char* what, std::size_t index) {
  if (row.size() != expect) {
    fail(ErrorCode::Config, std::string(what) + " row " + std::to_string(index) +
                                " has " + std::to_string(row.size()) +
                                " entries, expected " + std::to_string(expect));
  }
  for (double v : row) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::Config, std::string(what) + " row " +
                                  std::to_string(index) +
                                  " contains a non-finite coefficient");
    }
  }
}

enum class PhaseResult { Done, Unbounded };

// Runs simplex iterations for the given cost vector. Reduced costs are
// recomputed from scratch each iteration; the tableaus here are tiny (tens of
// columns), so the extra arithmetic buys numerical freshness for free.
PhaseResult run_simplex(Tableau& t, const std::vector<double>& cost,
                        std::size_t enterable_limit) {
  const std::size_t n_cols = t.cols - 1;
  for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
    // Entering column: Bland picks the lowest index with z_j - c_j above
    // tolerance (an improving direction for a minimisation).
    std::size_t entering = n_cols;
    for (std::size_t j = 0; j < enterable_limit; ++j) {
      double z = 0.0;
      for (std::size_t r = 0; r < t.rows; ++r) {
        z += cost[t.basis[r]] * t.at(r, j);
      }
      if (z - cost[j] > kPivotTol) {
        entering = j;
        break;
      }
    }
    if (entering == n_cols) return PhaseResult::Done;

    // Ratio test; ties go to the row whose basic variable has lowest index.
    double best_ratio = std::numeric_limits<double>::infinity();
    std::size_t best_row = t.rows;
    for (std::size_t r = 0; r < t.rows; ++r) {
      const double a = t.at(r, entering);
      if (a > kPivotTol) {
        const double ratio = t.rhs(r) / a;
        if (ratio < best_ratio ||
            (ratio == best_ratio && best_row < t.rows &&
             t.basis[r] < t.basis[best_row])) {
          best_ratio = ratio;
          best_row = r;
        }
      }
    }
    if (best_row == t.rows) return PhaseResult::Unbounded;
    t.pivot(best_row, entering);
  }
  fail(ErrorCode::Internal, "simplex exceeded the pivot budget");
}

}  // namespace

void LinearProgram::validate() const {
  if (variable_count == 0) {
    fail(ErrorCode::Config, "linear program needs at least one variable");
  }
  if (objective.size() != variable_count) {
    fail(ErrorCode::Config,
         "objective has " + std::to_string(objective.size()) +
             " entries, expected " + std::to_string(variable_count));
  }
  for (double v : objective) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::Config, "objective contains a non-finite coefficient");
    }
  }
  if (ineq.size() != ineq_rhs.size()) {
    fail(ErrorCode::Config, "inequality rows and right-hand sides disagree");
  }
  if (eq.size() != eq_rhs.size()) {
    fail(ErrorCode::Config, "equality rows and right-hand sides disagree");
  }
  for (std::size_t i = 0; i < ineq.size(); ++i) {
    check_finite_row(ineq[i], variable_count, "inequality", i);
    if (!std::isfinite(ineq_rhs[i])) {
      fail(ErrorCode::Config, "inequality right-hand side " +
                                  std::to_string(i) + " is not finite");
    }
  }
  for (std::size_t i = 0; i < eq.size(); ++i) {
    check_finite_row(eq[i], variable_count, "equality", i);
    if (!std::isfinite(eq_rhs[i])) {
      fail(ErrorCode::Config,
           "equality right-hand side " + std::to_string(i) + " is not finite");
    }
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

Solution solve(const LinearProgram& lp) {
  lp.validate();

  const std::size_t n = lp.variable_count;
  const std::size_t m_ineq = lp.ineq.size();
  const std::size_t m_eq = lp.eq.size();
  const std::size_t rows = m_ineq + m_eq;
  const std::size_t slack_base = n;
  const std::size_t art_base = n + m_ineq;
  const std::size_t total = n + m_ineq + rows;

  Tableau t;
  t.rows = rows;
  t.cols = total + 1;
  t.cells.assign(rows * t.cols, 0.0);
  t.basis.assign(rows, 0);

  double max_abs_rhs = 1.0;
  for (std::size_t r = 0; r < m_ineq; ++r) {
    for (std::size_t j = 0; j < n; ++j) t.at(r, j) = lp.ineq[r][j];
    t.at(r, slack_base + r) = 1.0;
    t.at(r, total) = lp.ineq_rhs[r];
  }
  for (std::size_t i = 0; i < m_eq; ++i) {
    const std::size_t r = m_ineq + i;
    for (std::size_t j = 0; j < n; ++j) t.at(r, j) = lp.eq[i][j];
    t.at(r, total) = lp.eq_rhs[i];
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (t.at(r, total) < 0.0) {
      for (std::size_t c = 0; c <= total; ++c) t.at(r, c) = -t.at(r, c);
    }
    max_abs_rhs = std::max(max_abs_rhs, std::abs(t.at(r, total)));
    // One artificial per row gives a trivially feasible starting basis.
    t.at(r, art_base + r) = 1.0;
    t.basis[r] = art_base + r;
  }

  Solution out;

  if (rows > 0) {
    // Phase one: minimise the sum of the artificials.
    std::vector<double> phase1_cost(total, 0.0);
    for (std::size_t r = 0; r < rows; ++r) phase1_cost[art_base + r] = 1.0;
    if (run_simplex(t, phase1_cost, art_base) == PhaseResult::Unbounded) {
      fail(ErrorCode::Internal, "phase one reported an unbounded program");
    }
    double artificial_sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (t.basis[r] >= art_base) artificial_sum += t.rhs(r);
    }
    if (artificial_sum > kFeasTol * max_abs_rhs) {
      out.status = SolveStatus::Infeasible;
      return out;
    }
    // Drive leftover artificials out of the basis where possible. A row whose
    // coefficients are all zero is redundant; its artificial stays basic at
    // zero and simply never re-enters (phase two cannot pick artificials).
    for (std::size_t r = 0; r < rows; ++r) {
      if (t.basis[r] < art_base) continue;
      for (std::size_t j = 0; j < art_base; ++j) {
        if (std::abs(t.at(r, j)) > kPivotTol) {
          t.pivot(r, j);
          break;
        }
      }
    }
  }

  // Phase two: the caller's objective; artificial columns are barred.
  std::vector<double> phase2_cost(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = lp.objective[j];
  if (run_simplex(t, phase2_cost, art_base) == PhaseResult::Unbounded) {
    out.status = SolveStatus::Unbounded;
    return out;
  }

  out.status = SolveStatus::Optimal;
  out.point.assign(n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (t.basis[r] < n) out.point[t.basis[r]] = t.rhs(r);
  }
  double objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) objective += lp.objective[j] * out.point[j];
  out.objective_value = objective;
  return out;
}

VerificationReport verify_solution(const LinearProgram& lp, const Solution& sol) {
  lp.validate();
  if (sol.status != SolveStatus::Optimal) {
    fail(ErrorCode::Usage, "verify_solution needs an Optimal solution");
  }
  if (sol.point.size() != lp.variable_count) {
    fail(ErrorCode::Usage, "solution point size does not match the program");
  }

  VerificationReport report;
  report.min_variable_value = std::numeric_limits<double>::infinity();
  if (lp.variable_count == 0) report.min_variable_value = 0.0;
  for (double v : sol.point) {
    report.min_variable_value = std::min(report.min_variable_value, v);
  }
  for (std::size_t r = 0; r < lp.ineq.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.variable_count; ++j) {
      lhs += lp.ineq[r][j] * sol.point[j];
    }
    report.max_inequality_violation =
        std::max(report.max_inequality_violation, lhs - lp.ineq_rhs[r]);
  }
  for (std::size_t r = 0; r < lp.eq.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.variable_count; ++j) {
      lhs += lp.eq[r][j] * sol.point[j];
    }
    report.max_equality_residual =
        std::max(report.max_equality_residual, std::abs(lhs - lp.eq_rhs[r]));
  }
  double objective = 0.0;
  for (std::size_t j = 0; j < lp.variable_count; ++j) {
    objective += lp.objective[j] * sol.point[j];
  }
  report.objective_gap = std::abs(objective - sol.objective_value);
  return report;
}

}  // namespace coplan::lp
