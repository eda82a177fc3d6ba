#include "specclip/simeval.hpp"

#include "specclip/clip.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace specclip {

namespace {

void check_vector(const RealMatrix& A, const RealVector& x0, const char* what) {
    if (x0.size() != A.rows()) {
        throw DimensionMismatch(std::string(what) + ": x0 has dimension " +
                                std::to_string(x0.size()) + ", expected " +
                                std::to_string(A.rows()));
    }
}

}  // namespace

RolloutResult rollout(const RealMatrix& A, const RealVector& x0, int horizon, double bound) {
    require_square_finite(A, "rollout");
    check_vector(A, x0, "rollout");
    if (horizon < 1) {
        throw DimensionMismatch("rollout: horizon must be at least 1");
    }

    RolloutResult result;
    result.states.resize(A.rows(), horizon + 1);
    result.states.col(0) = x0;
    result.max_norm = x0.norm();

    RealVector x = x0;
    int steps = 0;
    for (int k = 1; k <= horizon; ++k) {
        x = A * x;
        result.states.col(k) = x;
        const double norm = x.norm();
        result.max_norm = std::max(result.max_norm, norm);
        steps = k;
        if (norm > bound) {
            result.diverged_at = k;
            break;
        }
    }
    result.states.conservativeResize(Eigen::NoChange, steps + 1);
    return result;
}

RolloutResult rollout_controlled(const RealMatrix& A, const RealMatrix& B, const RealVector& x0,
                                 const RealMatrix& inputs, double bound) {
    require_square_finite(A, "rollout_controlled");
    check_vector(A, x0, "rollout_controlled");
    if (B.rows() != A.rows() || B.cols() != inputs.rows()) {
        throw DimensionMismatch("rollout_controlled: B and inputs disagree on dimensions");
    }
    const int horizon = static_cast<int>(inputs.cols());
    if (horizon < 1) {
        throw DimensionMismatch("rollout_controlled: need at least one input");
    }

    RolloutResult result;
    result.states.resize(A.rows(), horizon + 1);
    result.states.col(0) = x0;
    result.max_norm = x0.norm();

    RealVector x = x0;
    int steps = 0;
    for (int k = 1; k <= horizon; ++k) {
        x = A * x + B * inputs.col(k - 1);
        result.states.col(k) = x;
        const double norm = x.norm();
        result.max_norm = std::max(result.max_norm, norm);
        steps = k;
        if (norm > bound) {
            result.diverged_at = k;
            break;
        }
    }
    result.states.conservativeResize(Eigen::NoChange, steps + 1);
    return result;
}

ErrorCurve reconstruction_error(const RealMatrix& predicted, const RealMatrix& truth,
                                ErrorMetric metric) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
        throw DimensionMismatch("reconstruction_error: sequences have different shapes");
    }
    if (predicted.cols() == 0) {
        throw DimensionMismatch("reconstruction_error: empty sequences");
    }

    ErrorCurve curve;
    curve.per_step.resize(predicted.cols());
    for (Eigen::Index k = 0; k < predicted.cols(); ++k) {
        const RealVector diff = predicted.col(k) - truth.col(k);
        curve.per_step[k] = metric == ErrorMetric::MeanAbsolute
                                ? diff.cwiseAbs().mean()
                                : diff.squaredNorm() / static_cast<double>(diff.size());
    }
    curve.summary_mean = curve.per_step.mean();
    return curve;
}

double moving_ratio(const std::vector<RealMatrix>& sequences, double threshold) {
    if (sequences.empty()) {
        throw TooShort("moving_ratio: no sequences");
    }
    int moving = 0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const RealMatrix& seq = sequences[i];
        if (seq.cols() < 3) {
            throw TooShort("moving_ratio: sequence " + std::to_string(i) +
                           " has fewer than 3 frames");
        }
        const double gap =
            (seq.col(seq.cols() - 1) - seq.col(seq.cols() - 3)).cwiseAbs().sum();
        if (gap > threshold) {
            ++moving;
        }
    }
    return static_cast<double>(moving) / static_cast<double>(sequences.size());
}

RealMatrix lqr_gain(const RealMatrix& A, const RealMatrix& B, const RealMatrix& Q,
                    const RealMatrix& R, int iters, double tol) {
    require_square_finite(A, "lqr_gain");
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
        throw DimensionMismatch("lqr_gain: inconsistent dimensions");
    }
    if (!Q.isApprox(Q.transpose(), 1e-10)) {
        throw DimensionMismatch("lqr_gain: Q must be symmetric");
    }
    if (!R.isApprox(R.transpose(), 1e-10)) {
        throw DimensionMismatch("lqr_gain: R must be symmetric");
    }
    {
        Eigen::SelfAdjointEigenSolver<RealMatrix> qe(Q);
        if (qe.eigenvalues().minCoeff() < -1e-10) {
            throw DimensionMismatch("lqr_gain: Q must be positive semidefinite");
        }
        Eigen::SelfAdjointEigenSolver<RealMatrix> re(R);
        if (re.eigenvalues().minCoeff() <= 0.0) {
            throw DimensionMismatch("lqr_gain: R must be positive definite");
        }
    }

    RealMatrix P = Q;
    for (int k = 0; k < iters; ++k) {
        const RealMatrix BtP = B.transpose() * P;
        const RealMatrix gain_term = (R + BtP * B).ldlt().solve(BtP * A);
        const RealMatrix P_next =
            Q + A.transpose() * P * A - A.transpose() * P * B * gain_term;
        if (!P_next.allFinite()) {
            throw RiccatiNoConverge("lqr_gain: iteration produced non-finite values");
        }
        const double delta = (P_next - P).norm();
        P = P_next;
        if (delta <= tol) {
            const RealMatrix BtPf = B.transpose() * P;
            return (R + BtPf * B).ldlt().solve(BtPf * A);
        }
    }
    throw RiccatiNoConverge("lqr_gain: no convergence after " + std::to_string(iters) +
                            " iterations");
}

ErrorCurve track_reference(const RealMatrix& A_true, const RealMatrix& B_true,
                           const RealMatrix& A_model, const RealMatrix& B_model,
                           const RealMatrix& reference, const RealMatrix& Q,
                           const RealMatrix& R) {
    require_square_finite(A_true, "track_reference");
    if (reference.rows() != A_true.rows() || reference.cols() < 1) {
        throw DimensionMismatch("track_reference: reference shape does not match the system");
    }
    const RealMatrix gain = lqr_gain(A_model, B_model, Q, R);

    const Eigen::Index horizon = reference.cols();
    RealMatrix tracked(A_true.rows(), horizon);
    RealVector x = reference.col(0);
    for (Eigen::Index k = 0; k < horizon; ++k) {
        tracked.col(k) = x;
        if (k + 1 < horizon) {
            const RealVector u = -gain * (x - reference.col(k));
            x = A_true * x + B_true * u;
        }
    }
    return reconstruction_error(tracked, reference);
}

BenchResult bench_clip(const std::vector<int>& dims, int repeats, std::uint64_t seed) {
    if (repeats < 1) {
        throw DimensionMismatch("bench_clip: repeats must be at least 1");
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 16) {
            throw DimensionMismatch("bench_clip: dimensions must be at least 16");
        }
        if (i > 0 && dims[i] <= dims[i - 1]) {
            throw DimensionMismatch("bench_clip: dimensions must be strictly ascending");
        }
    }

    BenchResult result;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    {
        // untimed warmup so the first batch does not absorb cold-start costs
        RealMatrix W(dims.front(), dims.front());
        for (int j = 0; j < dims.front(); ++j) {
            for (int i = 0; i < dims.front(); ++i) {
                W(i, j) = normal(rng);
            }
        }
        (void)clip_spectrum(W, 0.0);
    }

    for (int n : dims) {
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < repeats; ++r) {
            RealMatrix A(n, n);
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    A(i, j) = normal(rng);
                }
            }
            const auto start = std::chrono::steady_clock::now();
            (void)clip_spectrum(A, 0.0);
            const auto stop = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double>(stop - start).count());
        }
        result.records.push_back({n, best, std::nullopt});
    }

    if (result.records.size() >= 2) {
        // least-squares slope of log(t) against log(n)
        const auto count = static_cast<double>(result.records.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const BenchRecord& rec : result.records) {
            const double lx = std::log(static_cast<double>(rec.n));
            const double ly = std::log(rec.wall_time_seconds);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        result.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    }
    return result;
}

}  // namespace specclip
