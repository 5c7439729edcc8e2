// Recovers a random 8-site Hamiltonian from one of its eigenstates, then
// checks how far a small perturbation of the correlation matrix moves the answer.
//
//   reconstruct_chain [seed] [eigenstate index]

#include "hamrec.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
  using namespace hamrec;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  const std::size_t index = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 128;

  const auto basis = make_basis({8, 2, 2, Boundary::periodic});
  const auto h = random_disordered(basis, seed);
  const auto state = ith_eigenstate(h, index);
  std::printf("eigenstate %zu: E = %.6f, residual %.1e\n", state.index, state.energy, state.residual);

  const auto m = build_pure(state, basis);
  const auto result = recover(m, kDefaultZeroTolerance, h.coeffs);
  std::printf("verdict %s, lambda1 %.2e, lambda2 %.4f, angle to truth %.2e rad\n", to_string(result.verdict),
              result.lambda1, result.lambda2, result.angle_to_truth.value_or(-1.0));

  if (result.verdict != Verdict::unique) return 1;
  for (double eps : {1e-6, 1e-4}) {
    const auto p = random_perturbation(static_cast<Eigen::Index>(m.size()), eps, seed);
    const auto moved = recover(p.apply(m.entries), kDefaultZeroTolerance, h.coeffs);
    std::printf("eps %.0e: angle %.2e rad, bound on sin(2 theta)/2 %.2e\n", eps, moved.angle_to_truth.value_or(-1.0),
                davis_kahan_bound(result.lambda2, eps, 1.0));
  }
  return 0;
}
