// One line per acceptance criterion; nonzero exit if any fails.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "ergo/acceptance.hpp"

int main(int argc, char** argv) {
  ergo::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) options.only.push_back(std::atoi(argv[i]));
  options.on_result = [](const ergo::CriterionResult& r) {
    std::printf("%s\n", ergo::format_line(r).c_str());
    std::fflush(stdout);
  };
  int failed = 0;
  for (const auto& r : ergo::run_acceptance(options)) failed += r.pass ? 0 : 1;
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
