#include "specclip/datagen.hpp"

#include <cmath>
#include <random>
#include <string>

namespace specclip {

namespace {

// Growth factor of the divergent drift overwritten onto failed
// demonstrations; strong enough that a handful of failures destabilizes an
// unconstrained fit of an otherwise stable dataset.
constexpr double kFailureGrowth = 1.5;

// Splitmix-style mixing so every trajectory draws from its own stream;
// corrupting one trajectory cannot shift any other.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

RealVector random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    RealVector v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = normal(rng);
    }
    const double norm = v.norm();
    return norm > 0.0 ? RealVector(v / norm) : RealVector(RealVector::Unit(n, 0));
}

void simulate(const RealMatrix& A, const RealMatrix* B, const GenSpec& spec,
              TrajectoryDataset& out) {
    const int n = static_cast<int>(A.rows());
    const int m = B ? static_cast<int>(B->cols()) : 0;

    const int length = spec.truncate_to.value_or(spec.T);
    const int failures =
        spec.kind == GenKind::Corrupted
            ? static_cast<int>(std::floor(spec.failure_fraction * spec.n_traj))
            : 0;

    for (int j = 0; j < spec.n_traj; ++j) {
        std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(j)));
        std::normal_distribution<double> normal(0.0, 1.0);
        Trajectory traj;
        traj.states.resize(n, length);
        if (m > 0) {
            traj.inputs.resize(m, length - 1);
        }

        RealVector x(n);
        for (int i = 0; i < n; ++i) {
            x[i] = normal(rng);
        }
        traj.states.col(0) = x;
        for (int k = 1; k < length; ++k) {
            RealVector next = A * x;
            if (m > 0) {
                RealVector u(m);
                for (int i = 0; i < m; ++i) {
                    u[i] = normal(rng);
                }
                traj.inputs.col(k - 1) = u;
                next += (*B) * u;
            }
            if (spec.noise_sigma > 0.0) {
                for (int i = 0; i < n; ++i) {
                    next[i] += spec.noise_sigma * normal(rng);
                }
            }
            x = next;
            traj.states.col(k) = x;
        }

        // The leading `failures` trajectories become failed demonstrations:
        // from the midpoint on, the recorded states drift away from the clean
        // ones along a fixed direction with geometric growth.
        if (j < failures && length >= 3) {
            const int onset = length / 2;
            std::mt19937_64 fail_rng(
                mix_seed(spec.seed, static_cast<std::uint64_t>(j)) ^ 0xfa11ed0ull);
            const RealVector direction = random_unit(fail_rng, n);
            const double scale = std::max(spec.noise_sigma, 1e-2);
            for (int k = onset; k < length; ++k) {
                traj.states.col(k) +=
                    direction * (scale * std::pow(kFailureGrowth, k - onset + 1));
            }
        }

        out.trajectories.push_back(std::move(traj));
    }
}

}  // namespace

void GenSpec::validate() const {
    if (n < 1) {
        throw DimensionMismatch("GenSpec: n must be positive");
    }
    if (m < 0) {
        throw DimensionMismatch("GenSpec: m must be nonnegative");
    }
    if (T < 2) {
        throw DimensionMismatch("GenSpec: T must be at least 2");
    }
    if (n_traj < 1) {
        throw DimensionMismatch("GenSpec: n_traj must be positive");
    }
    if (truncate_to && (*truncate_to < 2 || *truncate_to > T)) {
        throw DimensionMismatch("GenSpec: truncate_to must lie in [2, T]");
    }
    if (failure_fraction < 0.0 || failure_fraction >= 1.0) {
        throw DimensionMismatch("GenSpec: failure_fraction must lie in [0, 1)");
    }
    if (failure_fraction > 0.0 && kind != GenKind::Corrupted) {
        throw DimensionMismatch("GenSpec: failure_fraction requires kind = corrupted");
    }
    if (!(rho_target > 0.0)) {
        throw DimensionMismatch("GenSpec: rho_target must be positive");
    }
    if (noise_sigma < 0.0) {
        throw DimensionMismatch("GenSpec: noise_sigma must be nonnegative");
    }
}

RealMatrix gen_stable_system(int n, double rho_target, std::uint64_t seed) {
    if (n < 1) {
        throw DimensionMismatch("gen_stable_system: n must be positive");
    }
    if (!(rho_target > 0.0)) {
        throw DimensionMismatch("gen_stable_system: rho_target must be positive");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.2 * rho_target, rho_target);
    std::uniform_real_distribution<double> angle(0.2, M_PI - 0.2);
    std::uniform_real_distribution<double> scale(1.0, 3.0);
    std::bernoulli_distribution coin(0.5);

    // Block-diagonal D: 2x2 rotation blocks (conjugate eigenvalue pairs) and
    // real 1x1 blocks, magnitudes in [0.2 rho, rho]; the first block is
    // pinned to magnitude exactly rho_target.
    RealMatrix D = RealMatrix::Zero(n, n);
    int i = 0;
    bool first = true;
    while (i < n) {
        const double magnitude = first ? rho_target : mag(rng);
        first = false;
        if (n - i >= 2 && coin(rng)) {
            const double theta = angle(rng);
            const double c = magnitude * std::cos(theta);
            const double s = magnitude * std::sin(theta);
            D(i, i) = c;
            D(i, i + 1) = -s;
            D(i + 1, i) = s;
            D(i + 1, i + 1) = c;
            i += 2;
        } else {
            D(i, i) = coin(rng) ? magnitude : -magnitude;
            i += 1;
        }
    }

    // Well-conditioned but genuinely non-normal similarity
    // M = Q1 diag(s) Q2^T, cond(M) = max(s)/min(s) <= 3.
    auto random_orthogonal = [&]() {
        RealMatrix G(n, n);
        for (int j = 0; j < n; ++j) {
            for (int r = 0; r < n; ++r) {
                G(r, j) = normal(rng);
            }
        }
        return RealMatrix(Eigen::HouseholderQR<RealMatrix>(G).householderQ());
    };
    const RealMatrix Q1 = random_orthogonal();
    const RealMatrix Q2 = random_orthogonal();
    RealVector s(n);
    for (int j = 0; j < n; ++j) {
        s[j] = scale(rng);
    }
    const RealMatrix M = Q1 * s.asDiagonal() * Q2.transpose();

    return M * D * M.partialPivLu().solve(RealMatrix::Identity(n, n));
}

TrajectoryDataset gen_trajectories(const RealMatrix& A, const GenSpec& spec) {
    spec.validate();
    require_square_finite(A, "gen_trajectories");
    if (A.rows() != spec.n) {
        throw DimensionMismatch("gen_trajectories: A does not match spec.n");
    }
    if (spec.m != 0) {
        throw DimensionMismatch("gen_trajectories: controlled spec needs a B matrix");
    }

    TrajectoryDataset out;
    out.state_dim = spec.n;
    out.input_dim = 0;
    simulate(A, nullptr, spec, out);
    out.validate();
    return out;
}

TrajectoryDataset gen_trajectories(const RealMatrix& A, const RealMatrix& B,
                                   const GenSpec& spec) {
    spec.validate();
    require_square_finite(A, "gen_trajectories");
    if (A.rows() != spec.n || B.rows() != spec.n || B.cols() != spec.m || spec.m < 1) {
        throw DimensionMismatch("gen_trajectories: (A, B) do not match spec dimensions");
    }

    TrajectoryDataset out;
    out.state_dim = spec.n;
    out.input_dim = spec.m;
    simulate(A, &B, spec, out);
    out.validate();
    return out;
}

RealVector polynomial_benchmark_step(const RealVector& x) {
    if (x.size() != 2) {
        throw DimensionMismatch("polynomial_benchmark_step: state must be 2-dimensional");
    }
    RealVector next(2);
    next[0] = 0.9 * x[0];
    next[1] = 0.8 * x[1] + 0.1 * x[0] * x[0];
    return next;
}

std::pair<TrajectoryDataset, RealMatrix> gen_polynomial_benchmark(std::uint64_t seed) {
    constexpr int kTrajectories = 10;
    constexpr int kSteps = 15;

    TrajectoryDataset data;
    data.state_dim = 2;
    data.input_dim = 0;

    for (int j = 0; j < kTrajectories; ++j) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(j)));
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        Trajectory traj;
        traj.states.resize(2, kSteps);
        RealVector x(2);
        x[0] = uniform(rng);
        x[1] = uniform(rng);
        traj.states.col(0) = x;
        for (int k = 1; k < kSteps; ++k) {
            x = polynomial_benchmark_step(x);
            traj.states.col(k) = x;
        }
        data.trajectories.push_back(std::move(traj));
    }

    // Closed-form lifted matrix on the basis [x1^2, x1 x2, x2^2, x1, x2].
    // The cross monomials x1 x2 and x2^2 pick up out-of-basis terms under the
    // dynamics; their rows keep only the in-basis part, which leaves the
    // invariant {x1^2, x1, x2} block driving the states exactly.
    RealMatrix K = RealMatrix::Zero(5, 5);
    K(0, 0) = 0.81;                  // (x1^2)' = 0.81 x1^2
    K(1, 1) = 0.72;                  // (x1 x2)' = 0.72 x1 x2 + (0.09 x1^3 dropped)
    K(2, 2) = 0.64;                  // (x2^2)'  = 0.64 x2^2 + (dropped)
    K(3, 3) = 0.9;                   // x1' = 0.9 x1
    K(4, 0) = 0.1;                   // x2' = 0.8 x2 + 0.1 x1^2
    K(4, 4) = 0.8;

    return {std::move(data), std::move(K)};
}

Generated generate(const GenSpec& spec) {
    spec.validate();

    Generated out;
    switch (spec.kind) {
        case GenKind::Polynomial: {
            if (spec.n != 2) {
                throw DimensionMismatch("generate: the polynomial benchmark is 2-dimensional");
            }
            TrajectoryDataset data;
            data.state_dim = 2;
            data.input_dim = 0;
            const int length = spec.truncate_to.value_or(spec.T);
            for (int j = 0; j < spec.n_traj; ++j) {
                std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(j)));
                std::uniform_real_distribution<double> uniform(-1.0, 1.0);
                std::normal_distribution<double> normal(0.0, 1.0);
                Trajectory traj;
                traj.states.resize(2, length);
                RealVector x(2);
                x[0] = uniform(rng);
                x[1] = uniform(rng);
                traj.states.col(0) = x;
                for (int k = 1; k < length; ++k) {
                    x = polynomial_benchmark_step(x);
                    if (spec.noise_sigma > 0.0) {
                        x[0] += spec.noise_sigma * normal(rng);
                        x[1] += spec.noise_sigma * normal(rng);
                    }
                    traj.states.col(k) = x;
                }
                data.trajectories.push_back(std::move(traj));
            }
            data.validate();
            out.data = std::move(data);
            return out;
        }
        case GenKind::Controlled: {
            if (spec.m < 1) {
                throw DimensionMismatch("generate: controlled kind needs m >= 1");
            }
            const RealMatrix A = gen_stable_system(spec.n, spec.rho_target, spec.seed);
            std::mt19937_64 rng(spec.seed + 0x9e3779b97f4a7c15ull);
            std::normal_distribution<double> normal(0.0, 1.0);
            RealMatrix B(spec.n, spec.m);
            for (int j = 0; j < spec.m; ++j) {
                for (int i = 0; i < spec.n; ++i) {
                    B(i, j) = normal(rng);
                }
            }
            out.data = gen_trajectories(A, B, spec);
            out.A = A;
            out.B = B;
            return out;
        }
        case GenKind::Linear:
        case GenKind::Corrupted: {
            const RealMatrix A = gen_stable_system(spec.n, spec.rho_target, spec.seed);
            out.data = gen_trajectories(A, spec);
            out.A = A;
            return out;
        }
    }
    throw DimensionMismatch("generate: unknown kind");
}

}  // namespace specclip
