#include "specclip/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace specclip {

namespace {

// One real eigenvalue or the leading (positive-imaginary) member of a
// conjugate pair, together with its unit eigenvector.
struct EigGroup {
    Complex lambda;
    ComplexVector vec;
    bool is_pair = false;
};

// Rotate v so its first nonzero component is real and nonnegative, then
// normalize to unit 2-norm. Conjugating the input conjugates the output, so
// the fix is compatible with conjugate pairing.
ComplexVector canonicalize_phase(ComplexVector v) {
    const double vmax = v.cwiseAbs().maxCoeff();
    if (vmax == 0.0) {
        return v;  // zero vector; nothing to fix (rejected later by residual)
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]);
        if (mag > 1e-12 * vmax) {
            v *= std::conj(v[i]) / mag;
            break;
        }
    }
    v /= v.norm();
    return v;
}

bool group_order(const EigGroup& a, const EigGroup& b) {
    const double ma = std::abs(a.lambda);
    const double mb = std::abs(b.lambda);
    if (ma != mb) return ma > mb;
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
}

double cond_2norm(const ComplexMatrix& M) {
    // JacobiSVD is the more accurate choice for the small systems this
    // library mostly sees; BDCSVD keeps large benchmark matrices affordable.
    RealVector sv;
    if (M.rows() <= 32) {
        sv = Eigen::JacobiSVD<ComplexMatrix>(M).singularValues();
    } else {
        sv = Eigen::BDCSVD<ComplexMatrix>(M).singularValues();
    }
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv(0) / smin;
}

}  // namespace

void require_square_finite(const RealMatrix& A, const char* what) {
    if (A.rows() == 0 || A.rows() != A.cols()) {
        throw DimensionMismatch(std::string(what) + ": expected a nonempty square matrix, got " +
                                std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    }
    if (!A.allFinite()) {
        throw DimensionMismatch(std::string(what) + ": matrix has non-finite entries");
    }
}

Spectrum eigendecompose(const RealMatrix& A) {
    require_square_finite(A, "eigendecompose");
    const Eigen::Index n = A.rows();

    Eigen::EigenSolver<RealMatrix> solver(A, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw EigFailure("eigenvalue iteration did not converge");
    }
    const ComplexVector raw_values = solver.eigenvalues();
    const ComplexMatrix raw_vectors = solver.eigenvectors();

    // The real Schur form yields real eigenvalues with exactly zero imaginary
    // part and complex ones as exact conjugate pairs; keep one representative
    // per pair and regenerate the partner so closure under conjugation is
    // exact in the output.
    std::vector<EigGroup> groups;
    groups.reserve(static_cast<std::size_t>(n));
    Eigen::Index positive = 0;
    Eigen::Index negative = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex lambda = raw_values[i];
        if (lambda.imag() == 0.0) {
            ComplexVector v = canonicalize_phase(raw_vectors.col(i));
            // Eigenvectors of real simple eigenvalues are real up to phase;
            // drop the rounding-level imaginary residue.
            if (v.imag().norm() <= 1e-8 * v.norm()) {
                v = v.real().cast<Complex>();
                v /= v.norm();
            }
            groups.push_back({lambda, std::move(v), false});
        } else if (lambda.imag() > 0.0) {
            ++positive;
            groups.push_back({lambda, canonicalize_phase(raw_vectors.col(i)), true});
        } else {
            ++negative;
        }
    }
    if (positive != negative) {
        throw EigFailure("conjugate eigenvalue pairing is inconsistent");
    }

    // Sort whole groups so multiplicities cannot interleave two pairs.
    std::stable_sort(groups.begin(), groups.end(), group_order);

    Spectrum spectrum;
    spectrum.eigenvalues.resize(n);
    spectrum.modal.resize(n, n);
    Eigen::Index k = 0;
    for (const EigGroup& g : groups) {
        spectrum.eigenvalues[k] = g.lambda;
        spectrum.modal.col(k) = g.vec;
        ++k;
        if (g.is_pair) {
            spectrum.eigenvalues[k] = std::conj(g.lambda);
            spectrum.modal.col(k) = g.vec.conjugate();
            ++k;
        }
    }

    const double residual_tol = 1e-8 * static_cast<double>(n) * A.norm();
    const ComplexMatrix Ac = A.cast<Complex>();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double residual =
            (Ac * spectrum.modal.col(i) - spectrum.eigenvalues[i] * spectrum.modal.col(i)).norm();
        if (!(residual <= residual_tol)) {
            throw EigFailure("eigenpair residual " + std::to_string(residual) +
                             " exceeds tolerance " + std::to_string(residual_tol));
        }
    }

    spectrum.cond_modal = cond_2norm(spectrum.modal);
    spectrum.defective = !(spectrum.cond_modal <= kDefectiveCondThreshold);
    return spectrum;
}

RealMatrix reconstruct(const Spectrum& spectrum) {
    const Eigen::Index n = spectrum.size();
    if (n == 0 || spectrum.modal.rows() != n || spectrum.modal.cols() != n) {
        throw DimensionMismatch("reconstruct: modal matrix does not match eigenvalue count");
    }

    const ComplexMatrix scaled = spectrum.modal * spectrum.eigenvalues.asDiagonal();
    // A = scaled * modal^-1, solved as modal^T A^T = scaled^T.
    Eigen::FullPivLU<ComplexMatrix> lu(spectrum.modal.transpose());
    if (!lu.isInvertible()) {
        throw EigFailure("reconstruct: modal matrix is numerically singular");
    }
    const ComplexMatrix result_c = lu.solve(scaled.transpose()).transpose();

    const double imag_norm = result_c.imag().norm();
    RealMatrix result = result_c.real();
    if (!(imag_norm <= 1e-6 * (result.norm() + 1.0))) {
        throw NonRealResult("reconstruct: imaginary residue " + std::to_string(imag_norm) +
                            " too large; conjugate pairing is likely broken");
    }
    return result;
}

double spectral_radius(const RealMatrix& A) {
    require_square_finite(A, "spectral_radius");
    Eigen::EigenSolver<RealMatrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw EigFailure("eigenvalue iteration did not converge");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const RealMatrix& A, double margin) {
    if (margin < 0.0) {
        throw DimensionMismatch("is_schur_stable: margin must be nonnegative");
    }
    return spectral_radius(A) <= 1.0 - margin + 1e-10;
}

}  // namespace specclip
