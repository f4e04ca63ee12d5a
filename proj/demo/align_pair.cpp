// Align two kernel estimates and print their phase distances.
//   demo_align_pair [a]   warps the second sample by exp_warp(a), default 1.5

#include <cstdio>
#include <cstdlib>

#include "phasewarp/phasewarp.hpp"

using namespace phasewarp;

int main(int argc, char** argv) {
  const double a = argc > 1 ? std::atof(argv[1]) : 1.5;
  const GridFunction lambda = 200.0 / 300.0 * sine_intensity();
  const EventSequence x = simulate_pp(lambda, 1);
  const EventSequence y = warp_events(simulate_pp(lambda, 2), exp_warp(a));

  const auto f1 = kde_modified(x, KernelSpec{KernelKind::truncated_gaussian, plug_in_bandwidth(x)});
  const auto f2 = kde_modified(y, KernelSpec{KernelKind::truncated_gaussian, plug_in_bandwidth(y)});
  const PhaseAlignment al = phase_align(f1, f2);

  std::printf("events: %zu, %zu\n", x.count(), y.count());
  std::printf("d_ext %.4f  d_int %.4f  wasserstein %.4f  hellinger %.4f\n", al.distance_ext,
              al.distance_int, d_wasserstein(f1, f2), d_hellinger(f1, f2));
  std::printf("   t   gamma*(t)\n");
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    std::printf("%4.1f   %.4f\n", t, evaluate(al.gamma_star.base(), t));
  }
}
