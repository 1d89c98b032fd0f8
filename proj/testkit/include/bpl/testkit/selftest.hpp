#pragma once

#include <iosfwd>

namespace bpl::testkit {

// Runs every property suite, printing one PASS/FAIL line per check.
bool run_selftest(std::ostream& out);

}  // namespace bpl::testkit
