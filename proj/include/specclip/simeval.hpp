#ifndef SPECCLIP_SIMEVAL_HPP
#define SPECCLIP_SIMEVAL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "specclip/matrix.hpp"

namespace specclip {

/// States visited by a rollout (columns are steps, x0 included). diverged_at
/// is set to the first step whose state 2-norm exceeded the bound; the
/// offending state is kept and the rollout stops there.
struct RolloutResult {
    RealMatrix states;
    std::optional<int> diverged_at;
    double max_norm = 0.0;
};

/// Per-step prediction error plus its mean.
struct ErrorCurve {
    RealVector per_step;
    double summary_mean = 0.0;
};

/// One timing sample of clip_spectrum at dimension n.
struct BenchRecord {
    int n = 0;
    double wall_time_seconds = 0.0;
    std::optional<std::int64_t> peak_extra_bytes;
};

/// Timing samples and the fitted log-log slope (absent with fewer than two
/// dimensions).
struct BenchResult {
    std::vector<BenchRecord> records;
    std::optional<double> slope;
};

enum class ErrorMetric { MeanAbsolute, MeanSquared };

RolloutResult rollout(const RealMatrix& A, const RealVector& x0, int horizon,
                      double bound = 1e12);

/// x_{k+1} = A x_k + B u_k for the columns of `inputs`; the horizon is the
/// number of input columns.
RolloutResult rollout_controlled(const RealMatrix& A, const RealMatrix& B, const RealVector& x0,
                                 const RealMatrix& inputs, double bound = 1e12);

/// Mean absolute (default) or mean squared error per step across
/// coordinates, for equal-shaped state sequences (columns are steps).
ErrorCurve reconstruction_error(const RealMatrix& predicted, const RealMatrix& truth,
                                ErrorMetric metric = ErrorMetric::MeanAbsolute);

/// Fraction of frame sequences whose final frame F_M still moves:
/// ||F_M - F_{M-2}||_1 > threshold (strict). Sequences need >= 3 frames.
double moving_ratio(const std::vector<RealMatrix>& sequences, double threshold = 9.0);

/// Discrete-time LQR gain from the Riccati fixed-point iteration; returns G
/// with u = -G x. Throws RiccatiNoConverge when `iters` pass without the
/// update dropping below `tol`.
RealMatrix lqr_gain(const RealMatrix& A, const RealMatrix& B, const RealMatrix& Q,
                    const RealMatrix& R, int iters = 10000, double tol = 1e-10);

/// Synthesizes an LQR gain from the model pair, then tracks `reference`
/// (columns are the reference states per step) on the true pair with
/// u_t = -G (x_t - ref_t), starting from x_0 = ref_0. Returns the per-step
/// tracking error.
ErrorCurve track_reference(const RealMatrix& A_true, const RealMatrix& B_true,
                           const RealMatrix& A_model, const RealMatrix& B_model,
                           const RealMatrix& reference, const RealMatrix& Q, const RealMatrix& R);

/// Times clip_spectrum on seeded random matrices at each dimension (best of
/// `repeats`) and fits the slope of log(time) against log(n).
BenchResult bench_clip(const std::vector<int>& dims, int repeats, std::uint64_t seed);

}  // namespace specclip

#endif  // SPECCLIP_SIMEVAL_HPP
