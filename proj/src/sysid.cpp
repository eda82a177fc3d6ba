#include "specclip/sysid.hpp"

#include <Eigen/SVD>

#include <limits>
#include <string>

namespace specclip {

namespace {

constexpr double kSingularValueCutoff = 1e-12;

}  // namespace

Eigen::Index TrajectoryDataset::transition_count() const {
    Eigen::Index total = 0;
    for (const Trajectory& t : trajectories) {
        total += t.states.cols() - 1;
    }
    return total;
}

void TrajectoryDataset::validate() const {
    if (state_dim <= 0) {
        throw DimensionMismatch("dataset: state_dim must be positive");
    }
    if (input_dim < 0) {
        throw DimensionMismatch("dataset: input_dim must be nonnegative");
    }
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const Trajectory& t = trajectories[j];
        const std::string where = "dataset: trajectory " + std::to_string(j);
        if (t.states.rows() != state_dim) {
            throw DimensionMismatch(where + " has state dimension " +
                                    std::to_string(t.states.rows()) + ", expected " +
                                    std::to_string(state_dim));
        }
        if (t.states.cols() < 2) {
            throw DimensionMismatch(where + " has fewer than 2 states");
        }
        if (!t.states.allFinite()) {
            throw DimensionMismatch(where + " has non-finite states");
        }
        if (input_dim == 0) {
            if (t.inputs.size() != 0) {
                throw DimensionMismatch(where + " carries inputs in an autonomous dataset");
            }
        } else {
            if (t.inputs.rows() != input_dim || t.inputs.cols() != t.states.cols() - 1) {
                throw DimensionMismatch(where + " inputs must be " + std::to_string(input_dim) +
                                        "x" + std::to_string(t.states.cols() - 1));
            }
            if (!t.inputs.allFinite()) {
                throw DimensionMismatch(where + " has non-finite inputs");
            }
        }
    }
}

RealMatrix solve_min_norm(const RealMatrix& regressors, const RealMatrix& targets, LsRoute route) {
    if (regressors.cols() != targets.cols()) {
        throw DimensionMismatch("solve_min_norm: regressors and targets disagree on sample count");
    }
    const Eigen::Index p = regressors.rows();
    if (route == LsRoute::Auto) {
        route = p <= 512 ? LsRoute::NormalEquations : LsRoute::Orthogonal;
    }

    if (route == LsRoute::NormalEquations) {
        const RealMatrix gram = regressors * regressors.transpose();
        Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram);
        if (eig.info() != Eigen::Success) {
            throw EigFailure("solve_min_norm: Gram eigendecomposition failed");
        }
        // Eigenvalues of the Gram matrix are squared singular values of the
        // regressor matrix. Exactly-zero directions surface as eigenvalues of
        // order eps * lambda_max, so the rank cutoff must sit at that noise
        // floor; ranks below sqrt(eps) are not resolvable through the Gram.
        const RealVector& evals = eig.eigenvalues();
        const double lmax = std::max(0.0, evals(evals.size() - 1));
        const double noise_floor = 8.0 * static_cast<double>(p) *
                                   std::numeric_limits<double>::epsilon() * lmax;
        const double cut = std::max(kSingularValueCutoff * kSingularValueCutoff * lmax,
                                    noise_floor);
        RealVector inv = RealVector::Zero(evals.size());
        for (Eigen::Index i = 0; i < evals.size(); ++i) {
            if (evals(i) > cut) {
                inv(i) = 1.0 / evals(i);
            }
        }
        const RealMatrix gram_pinv =
            eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
        return targets * regressors.transpose() * gram_pinv;
    }

    Eigen::BDCSVD<RealMatrix> svd(regressors, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    const double cut = kSingularValueCutoff * (sv.size() > 0 ? sv(0) : 0.0);
    RealVector inv = RealVector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cut && sv(i) > 0.0) {
            inv(i) = 1.0 / sv(i);
        }
    }
    // Theta = targets * pinv(regressors) = targets * V S^+ U^T
    return targets * svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

DataMatrices build_data_matrices(const TrajectoryDataset& dataset) {
    dataset.validate();
    const Eigen::Index total = dataset.transition_count();

    DataMatrices out;
    out.X.resize(dataset.state_dim, total);
    out.Y.resize(dataset.state_dim, total);
    out.U.resize(dataset.input_dim, dataset.input_dim > 0 ? total : 0);

    Eigen::Index k = 0;
    for (const Trajectory& t : dataset.trajectories) {
        const Eigen::Index steps = t.states.cols() - 1;
        out.X.middleCols(k, steps) = t.states.leftCols(steps);
        out.Y.middleCols(k, steps) = t.states.rightCols(steps);
        if (dataset.input_dim > 0) {
            out.U.middleCols(k, steps) = t.inputs;
        }
        k += steps;
    }
    return out;
}

RealMatrix fit_ls(const TrajectoryDataset& dataset) {
    if (dataset.input_dim != 0) {
        throw DimensionMismatch("fit_ls: dataset must be autonomous; use fit_ls_controlled");
    }
    if (dataset.trajectories.empty()) {
        throw EmptyData("fit_ls: dataset has no trajectories");
    }
    const DataMatrices data = build_data_matrices(dataset);
    if (data.X.cols() < 1) {
        throw EmptyData("fit_ls: no transition pairs");
    }
    return solve_min_norm(data.X, data.Y);
}

std::pair<RealMatrix, RealMatrix> fit_ls_controlled(const TrajectoryDataset& dataset) {
    if (dataset.input_dim <= 0) {
        throw DimensionMismatch("fit_ls_controlled: dataset has no inputs");
    }
    if (dataset.trajectories.empty()) {
        throw EmptyData("fit_ls_controlled: dataset has no trajectories");
    }
    const DataMatrices data = build_data_matrices(dataset);
    if (data.X.cols() < 1) {
        throw EmptyData("fit_ls_controlled: no transition pairs");
    }

    RealMatrix stacked(data.X.rows() + data.U.rows(), data.X.cols());
    stacked.topRows(data.X.rows()) = data.X;
    stacked.bottomRows(data.U.rows()) = data.U;

    const RealMatrix theta = solve_min_norm(stacked, data.Y);
    return {theta.leftCols(dataset.state_dim), theta.rightCols(dataset.input_dim)};
}

std::pair<SvdBasis, RealMatrix> svd_reduce(const RealMatrix& frames, int r) {
    if (frames.cols() < 2) {
        throw DimensionMismatch("svd_reduce: need at least 2 frames");
    }
    if (!frames.allFinite()) {
        throw DimensionMismatch("svd_reduce: frames have non-finite entries");
    }
    if (r < 1 || r > std::min(frames.rows(), frames.cols())) {
        throw RankTooLarge("svd_reduce: rank " + std::to_string(r) + " not in [1, min(" +
                           std::to_string(frames.rows()) + ", " + std::to_string(frames.cols()) +
                           ")]");
    }

    SvdBasis basis;
    basis.mean = frames.rowwise().mean();
    const RealMatrix centered = frames.colwise() - basis.mean;

    Eigen::BDCSVD<RealMatrix> svd(centered, Eigen::ComputeThinU);
    basis.basis = svd.matrixU().leftCols(r);
    basis.singular_values = svd.singularValues().head(r);

    RealMatrix reduced = basis.basis.transpose() * centered;
    return {std::move(basis), std::move(reduced)};
}

RealMatrix svd_lift(const SvdBasis& basis, const RealMatrix& reduced) {
    if (reduced.rows() != basis.basis.cols()) {
        throw DimensionMismatch("svd_lift: reduced dimension " + std::to_string(reduced.rows()) +
                                " does not match basis rank " +
                                std::to_string(basis.basis.cols()));
    }
    return (basis.basis * reduced).colwise() + basis.mean;
}

}  // namespace specclip
