#ifndef SPECCLIP_SYSID_HPP
#define SPECCLIP_SYSID_HPP

#include <utility>
#include <vector>

#include "specclip/matrix.hpp"

namespace specclip {

/// One recorded trajectory. Columns of `states` are time steps; when the
/// system is controlled, column k of `inputs` is the input applied between
/// states k and k+1 (so inputs has one column fewer than states).
struct Trajectory {
    RealMatrix states;  ///< state_dim x T, T >= 2
    RealMatrix inputs;  ///< input_dim x (T-1); 0x0 when autonomous
};

/// Training corpus: N trajectories of a single system.
struct TrajectoryDataset {
    int state_dim = 0;
    int input_dim = 0;  ///< 0 = autonomous
    std::vector<Trajectory> trajectories;

    bool autonomous() const { return input_dim == 0; }

    /// Total number of transition pairs, sum_j (T_j - 1).
    Eigen::Index transition_count() const;

    /// Throws DimensionMismatch when any trajectory violates the dataset
    /// shape rules (wrong vector dimensions, T < 2, non-finite entries).
    void validate() const;
};

/// Stacked regression matrices: column k of Y is the within-trajectory
/// successor of column k of X; U (when present) is aligned with X.
struct DataMatrices {
    RealMatrix X;
    RealMatrix Y;
    RealMatrix U;  ///< 0 x K when autonomous
};

/// Affine subspace retained by svd_reduce: frame ~ mean + basis * reduced.
struct SvdBasis {
    RealVector mean;
    RealMatrix basis;            ///< d x r, orthonormal columns
    RealVector singular_values;  ///< r, nonincreasing
};

/// Which solver backs the minimum-norm least squares fit. Auto picks normal
/// equations for regressor dimension <= 512 and an SVD factorization above.
enum class LsRoute { Auto, NormalEquations, Orthogonal };

/// Minimum-Frobenius-norm Theta minimizing ||targets - Theta * regressors||_F,
/// with rank decided by the singular-value cutoff 1e-12 * sigma_max.
RealMatrix solve_min_norm(const RealMatrix& regressors, const RealMatrix& targets,
                          LsRoute route = LsRoute::Auto);

DataMatrices build_data_matrices(const TrajectoryDataset& dataset);

/// Least-squares estimate of A for an autonomous dataset (x' = A x).
RealMatrix fit_ls(const TrajectoryDataset& dataset);

/// Joint least-squares estimate of (A, B) for a controlled dataset
/// (x' = A x + B u), solved with the stacked regressor [X; U].
std::pair<RealMatrix, RealMatrix> fit_ls_controlled(const TrajectoryDataset& dataset);

/// Rank-r reduction of a frame sequence (columns of `frames`): mean-centers,
/// keeps the top r left singular vectors, and returns the r-dimensional
/// trajectory basis^T (frame - mean) alongside the basis.
std::pair<SvdBasis, RealMatrix> svd_reduce(const RealMatrix& frames, int r);

/// Inverse of svd_reduce: mean + basis * reduced, per column.
RealMatrix svd_lift(const SvdBasis& basis, const RealMatrix& reduced);

}  // namespace specclip

#endif  // SPECCLIP_SYSID_HPP
