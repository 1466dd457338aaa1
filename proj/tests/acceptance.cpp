// Acceptance run: one pass/fail line per criterion. Tolerances live in the
// experiment runners; this binary only reports them.

#include <cstdio>
#include <cstring>
#include <string>

#include "dimlab/experiments.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = dimlab::kCriterionSeed;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) seed = std::stoull(argv[++i]);
    else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::stoi(argv[++i]);
  }
  int failed = 0;
  for (int id = 1; id <= dimlab::kCriterionCount; ++id) {
    if (only != 0 && id != only) continue;
    dimlab::CriterionOutcome o;
    try {
      o = dimlab::run_criterion(id, seed);
    } catch (const std::exception& e) {
      o.id = id;
      o.title = "error";
      o.pass = false;
      o.detail = e.what();
    }
    std::printf("criterion %2d %s  %s | %s\n", o.id, o.pass ? "PASS" : "FAIL", o.title.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
