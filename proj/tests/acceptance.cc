// One line per acceptance criterion; nonzero exit if any fails.

#include <iostream>

#include "verify_suite.h"

int main() {
  rdalloc::cli::SuiteConfig config;
  config.enum_cap = rdalloc::oracle::enumeration_cap_from_env();
  int failed = 0;
  for (const auto& r : rdalloc::cli::run_suite(config)) {
    std::cout << rdalloc::cli::format_result(r) << '\n';
    if (!r.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed"
                            : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
