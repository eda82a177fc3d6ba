#ifndef SPECCLIP_CLIP_HPP
#define SPECCLIP_CLIP_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include "specclip/matrix.hpp"

namespace specclip {

/// What a clipping pass did. Radii are measured on the eigenvalue list that
/// was actually clipped (the perturbed matrix's list when a defective input
/// forced a perturbation), so radius_after == radius_before exactly whenever
/// n_clipped == 0.
struct ClipReport {
    double eps = 0.0;
    int n_clipped = 0;          ///< eigenvalues whose magnitude was reduced
    double radius_before = 0.0;
    double radius_after = 0.0;
    double perturbation_applied = 0.0;  ///< 1-norm budget used to diagonalize, 0 if none
    double cond_modal = 1.0;
};

/// A learned linear system, optionally controlled and optionally clipped.
struct LinearModel {
    RealMatrix A;
    std::optional<RealMatrix> B;
    double eps = 0.0;
    std::optional<ClipReport> clip_report;
};

/// Stabilizes A by rescaling every eigenvalue of magnitude >= 1 - eps down to
/// magnitude 1 - eps while keeping its complex argument and the eigenvectors
/// untouched, then reconstructs a real matrix. With eps = 0 this touches
/// exactly the eigenvalues of magnitude >= 1. The output spectral radius is
/// at most 1 - eps (+ reconstruction rounding). Defective inputs are first
/// nudged by perturb_to_diagonalizable with an internal seed and budget; the
/// budget used is recorded in the report.
std::pair<RealMatrix, ClipReport> clip_spectrum(const RealMatrix& A, double eps);

/// Clips A and keeps B bit-identical.
LinearModel clip_controlled(const RealMatrix& A, const RealMatrix& B, double eps);

/// Adds a seeded uniform random matrix E, rescaled to ||E||_1 = gamma * 2^k
/// for the smallest k <= 20 that makes the result numerically diagonalizable
/// (cond_modal <= 1e12). Returns the perturbed matrix and the 1-norm actually
/// used; an already-diagonalizable input comes back unchanged with 0.
/// Throws PerturbationFailed after 20 doublings.
std::pair<RealMatrix, double> perturb_to_diagonalizable(const RealMatrix& A, double gamma,
                                                        std::uint64_t seed);

/// Uniform-shrinkage baseline: A * (1 - eps) / max(1, spectral_radius(A)).
/// Stabilizes like clip_spectrum but scales the whole spectrum, stable modes
/// included.
RealMatrix scale_baseline(const RealMatrix& A, double eps);

}  // namespace specclip

#endif  // SPECCLIP_CLIP_HPP
