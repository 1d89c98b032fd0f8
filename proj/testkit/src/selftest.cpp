#include "bpl/testkit/selftest.hpp"

#include <chrono>
#include <exception>
#include <iomanip>
#include <ostream>

#include "bpl/testkit/properties.hpp"

namespace bpl::testkit {

bool run_selftest(std::ostream& out) {
  int failed = 0;
  int total = 0;
  for (const auto& suite : all_suites()) {
    for (const auto& check : suite.checks) {
      const auto t0 = std::chrono::steady_clock::now();
      CheckResult r;
      try {
        r = check();
      } catch (const std::exception& e) {
        r = {"exception", false, e.what()};
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      ++total;
      failed += r.passed ? 0 : 1;
      out << (r.passed ? "PASS " : "FAIL ") << suite.module << "/" << r.name << ": " << r.detail << " ["
          << std::fixed << std::setprecision(2) << secs << "s]\n";
      out.unsetf(std::ios::fixed);
    }
  }
  out << (failed == 0 ? "selftest passed: " : "selftest FAILED: ") << total - failed << "/" << total
      << " checks\n";
  return failed == 0;
}

}  // namespace bpl::testkit
