#include "specclip/clip.hpp"

#include <cmath>
#include <random>
#include <string>

namespace specclip {

namespace {

// Internal defaults for the defective-input path of clip_spectrum. The seed
// is fixed so clipping stays a deterministic function of its arguments.
constexpr std::uint64_t kClipPerturbSeed = 0x5c11f0ed;

double default_perturb_gamma(const RealMatrix& A) {
    return 1e-10 * (1.0 + A.cwiseAbs().colwise().sum().maxCoeff());
}

void check_eps(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw DimensionMismatch("eps must lie in [0, 1), got " + std::to_string(eps));
    }
}

}  // namespace

std::pair<RealMatrix, ClipReport> clip_spectrum(const RealMatrix& A, double eps) {
    require_square_finite(A, "clip_spectrum");
    check_eps(eps);

    ClipReport report;
    report.eps = eps;

    Spectrum spectrum = eigendecompose(A);
    if (spectrum.defective) {
        auto [perturbed, gamma_used] =
            perturb_to_diagonalizable(A, default_perturb_gamma(A), kClipPerturbSeed);
        report.perturbation_applied = gamma_used;
        spectrum = eigendecompose(perturbed);
    }

    report.cond_modal = spectrum.cond_modal;
    report.radius_before = spectrum.eigenvalues.cwiseAbs().maxCoeff();

    const double target = 1.0 - eps;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        const double mag = std::abs(spectrum.eigenvalues[i]);
        if (mag >= target) {
            spectrum.eigenvalues[i] *= target / mag;
            ++report.n_clipped;
        }
    }
    report.radius_after = spectrum.eigenvalues.cwiseAbs().maxCoeff();

    return {reconstruct(spectrum), report};
}

LinearModel clip_controlled(const RealMatrix& A, const RealMatrix& B, double eps) {
    if (B.rows() != A.rows()) {
        throw DimensionMismatch("clip_controlled: B must have as many rows as A");
    }
    auto [clipped, report] = clip_spectrum(A, eps);

    LinearModel model;
    model.A = std::move(clipped);
    model.B = B;
    model.eps = eps;
    model.clip_report = report;
    return model;
}

std::pair<RealMatrix, double> perturb_to_diagonalizable(const RealMatrix& A, double gamma,
                                                        std::uint64_t seed) {
    require_square_finite(A, "perturb_to_diagonalizable");
    if (!(gamma > 0.0)) {
        throw DimensionMismatch("perturb_to_diagonalizable: gamma must be positive");
    }

    if (!eigendecompose(A).defective) {
        return {A, 0.0};
    }

    const Eigen::Index n = A.rows();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    RealMatrix direction(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            direction(i, j) = uniform(rng);
        }
    }
    const double direction_norm1 = direction.cwiseAbs().colwise().sum().maxCoeff();

    for (int k = 0; k <= 20; ++k) {
        const double budget = gamma * std::pow(2.0, k);
        const RealMatrix candidate = A + direction * (budget / direction_norm1);
        if (!eigendecompose(candidate).defective) {
            return {candidate, budget};
        }
    }
    throw PerturbationFailed(
        "perturb_to_diagonalizable: still defective after 20 doublings of gamma = " +
        std::to_string(gamma));
}

RealMatrix scale_baseline(const RealMatrix& A, double eps) {
    require_square_finite(A, "scale_baseline");
    check_eps(eps);
    const double radius = spectral_radius(A);
    return A * ((1.0 - eps) / std::max(1.0, radius));
}

}  // namespace specclip
