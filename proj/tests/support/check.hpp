// Minimal assertion helpers for the hand-rolled test binaries.  Each check
// prints nothing on success and a diagnostic line on failure; summary()
// prints one [PASS]/[FAIL] line and returns the process exit code.
#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace testsupport {

inline int failures = 0;
inline int checks = 0;

inline void report_failure(const char* file, int line, const std::string& what) {
  ++failures;
  std::printf("  check failed at %s:%d: %s\n", file, line, what.c_str());
}

inline bool check_true(bool condition, const char* expr, const char* file,
                       int line) {
  ++checks;
  if (!condition) report_failure(file, line, std::string(expr));
  return condition;
}

inline bool check_near(double actual, double expected, double tol,
                       const char* expr, const char* file, int line) {
  ++checks;
  const bool ok = std::isfinite(actual) && std::abs(actual - expected) <= tol;
  if (!ok) {
    char buffer[256];
    std::snprintf(buffer, sizeof(buffer), "%s: got %.17g, want %.17g (tol %g)",
                  expr, actual, expected, tol);
    report_failure(file, line, buffer);
  }
  return ok;
}

template <typename A, typename B>
inline bool check_eq(const A& actual, const B& expected, const char* expr,
                     const char* file, int line) {
  ++checks;
  const bool ok = actual == expected;
  if (!ok) report_failure(file, line, std::string(expr) + ": values differ");
  return ok;
}

inline int summary(const char* name) {
  if (failures == 0) {
    std::printf("[PASS] %s (%d checks)\n", name, checks);
    return 0;
  }
  std::printf("[FAIL] %s (%d of %d checks failed)\n", name, failures, checks);
  return 1;
}

}  // namespace testsupport

#define CHECK_TRUE(cond) \
  ::testsupport::check_true((cond), #cond, __FILE__, __LINE__)
#define CHECK_NEAR(actual, expected, tol) \
  ::testsupport::check_near((actual), (expected), (tol), #actual, __FILE__, \
                            __LINE__)
#define CHECK_EQ(actual, expected) \
  ::testsupport::check_eq((actual), (expected), #actual " == " #expected, \
                          __FILE__, __LINE__)
