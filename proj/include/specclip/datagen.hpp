#ifndef SPECCLIP_DATAGEN_HPP
#define SPECCLIP_DATAGEN_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include "specclip/matrix.hpp"
#include "specclip/sysid.hpp"

namespace specclip {

enum class GenKind { Linear, Controlled, Polynomial, Corrupted };

/// Recipe for a synthetic dataset. `truncate_to` shortens trajectories;
/// `failure_fraction` (Corrupted only) marks a fraction of trajectories as
/// failed demonstrations whose second half is overwritten with a
/// geometrically diverging drift away from the clean states.
struct GenSpec {
    GenKind kind = GenKind::Linear;
    int n = 2;
    int m = 0;
    double rho_target = 0.9;
    int n_traj = 1;
    int T = 2;
    double noise_sigma = 0.0;
    std::optional<int> truncate_to;
    double failure_fraction = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// A generated dataset plus the ground truth that produced it (absent for
/// the fixed polynomial system).
struct Generated {
    TrajectoryDataset data;
    std::optional<RealMatrix> A;
    std::optional<RealMatrix> B;
};

/// Random system with spectral radius exactly rho_target: M D M^-1 for a
/// well-conditioned seeded M (cond <= 100) and block-diagonal D mixing real
/// eigenvalues and rotation pairs with magnitudes in [0.2 rho, rho], one of
/// them exactly rho.
RealMatrix gen_stable_system(int n, double rho_target, std::uint64_t seed);

/// Simulates spec.n_traj trajectories of x' = A x (+ process noise of scale
/// noise_sigma), honoring truncate_to / failure_fraction per the spec kind.
TrajectoryDataset gen_trajectories(const RealMatrix& A, const GenSpec& spec);

/// Controlled variant: x' = A x + B u with i.i.d. unit-normal inputs.
TrajectoryDataset gen_trajectories(const RealMatrix& A, const RealMatrix& B, const GenSpec& spec);

/// The fixed two-state polynomial system x1' = 0.9 x1,
/// x2' = 0.8 x2 + 0.1 x1^2, which is exactly representable on the degree-2
/// state-inclusive lifting through its invariant {x1^2, x1, x2} block.
/// Returns seeded trajectories (initial states uniform in [-1,1]^2) and the
/// closed-form lifted matrix.
std::pair<TrajectoryDataset, RealMatrix> gen_polynomial_benchmark(std::uint64_t seed);

/// One step of the polynomial benchmark dynamics.
RealVector polynomial_benchmark_step(const RealVector& x);

/// Dispatches on spec.kind; the Linear/Controlled/Corrupted kinds draw their
/// ground-truth system from gen_stable_system(spec.n, spec.rho_target, seed).
Generated generate(const GenSpec& spec);

}  // namespace specclip

#endif  // SPECCLIP_DATAGEN_HPP
