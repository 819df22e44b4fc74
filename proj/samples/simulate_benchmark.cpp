// Simulates one benchmark path, prints its attempt structure, then compares
// a small Monte Carlo estimate of E tau with the certified bound.

#include "markov_up/markov_up.hpp"

#include <array>
#include <iostream>

int main() {
  using namespace markov_up;

  BenchmarkModelSpec spec;  // a = r = s = 0.5, N = 5
  const BenchmarkKernel kernel = build_benchmark(spec);

  CounterStream stream = CounterStream::for_path(7, 0);
  const Trajectory traj = simulate_path(kernel, 12, kDefaultMaxSteps, stream);
  std::cout << "path:";
  for (const State x : traj.states) std::cout << ' ' << x;
  std::cout << "\ntau = " << *traj.tau << '\n';

  const AttemptDecomposition d = decompose_attempts(traj);
  for (const Attempt& a : d.attempts) {
    std::cout << "attempt " << a.index << ": fall over [" << a.begin << ", " << a.end << "]"
              << (a.success ? " reaches the floor" : " stops above the floor") << '\n';
  }

  const std::array<unsigned, 1> orders{1};
  const auto estimates = estimate_tau_moments(kernel, 12, orders, BatchOptions{20'000, 7});
  const BoundSet bounds = compute_bound_set(spec, 1);
  std::cout << "E tau ~ " << estimates[0].mean << " +- " << estimates[0].std_error
            << ", bound " << theorem_bound(1, 12, bounds).value << '\n';
}
