// Recover the sine intensity from 20 warped trials and compare the four
// mean estimators.

#include <cstdio>

#include "phasewarp/phasewarp.hpp"

using namespace phasewarp;

int main() {
  for (bool severe : {false, true}) {
    Sim1Options opt;
    opt.severe = severe;
    opt.seed = 42;
    const Sim1Result r = run_sim1(opt);
    std::printf("%s warps, %zu trials, total intensity %.1f (true %.1f)\n", severe ? "severe" : "mild",
                r.observed.size(), r.total_hat, r.true_total);
    std::printf("  %-16s %10s %10s %10s\n", "method", "L1", "L2", "Linf");
    for (const auto& o : r.outcomes) {
      std::printf("  %-16s %10.2f %10.2f %10.2f\n", to_string(o.method).c_str(), o.errors.l1, o.errors.l2,
                  o.errors.linf);
    }
  }
}
