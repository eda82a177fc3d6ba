#ifndef SPECCLIP_MATRIX_HPP
#define SPECCLIP_MATRIX_HPP

#include <Eigen/Dense>
#include <complex>

#include "specclip/errors.hpp"

namespace specclip {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Modal matrices with a 2-norm condition number above this are treated as
/// numerically defective (no trustworthy eigenvector basis).
inline constexpr double kDefectiveCondThreshold = 1e12;

/// Eigendecomposition of a real square matrix in a deterministic layout:
///  - complex eigenvalues appear in conjugate pairs stored adjacently with
///    the positive-imaginary member first, and the second member of a pair
///    is the exact conjugate of the first (eigenvalue and eigenvector);
///  - pairs and real eigenvalues are ordered by descending magnitude, then
///    descending real part, then descending imaginary part;
///  - every eigenvector has unit 2-norm and its first nonzero component is
///    rotated to be real and nonnegative.
struct Spectrum {
    ComplexVector eigenvalues;  ///< length n
    ComplexMatrix modal;        ///< n x n, column i pairs with eigenvalues[i]
    double cond_modal = 1.0;    ///< 2-norm condition number of `modal`
    bool defective = false;     ///< cond_modal > kDefectiveCondThreshold

    Eigen::Index size() const { return eigenvalues.size(); }
};

/// Throws DimensionMismatch unless A is square with at least one row and all
/// entries finite.
void require_square_finite(const RealMatrix& A, const char* what);

/// Decomposes A into eigenvalues and eigenvectors (see Spectrum for layout).
/// Verifies the per-pair residual ||A v - lambda v||_2 <= 1e-8 * n * ||A||_F
/// against the source matrix and throws EigFailure when the underlying
/// iteration fails or the residual check does not hold. A defective input is
/// not an error; it sets Spectrum::defective.
Spectrum eigendecompose(const RealMatrix& A);

/// Rebuilds the real matrix M diag(eigenvalues) M^-1 from a spectrum. The
/// imaginary residue discarded on the way out must satisfy
/// ||imag||_F <= 1e-6 * (||result||_F + 1); a violation indicates broken
/// conjugate pairing and raises NonRealResult.
RealMatrix reconstruct(const Spectrum& spectrum);

/// Largest eigenvalue magnitude max_i sqrt(Re^2 + Im^2).
double spectral_radius(const RealMatrix& A);

/// True iff spectral_radius(A) <= 1 - margin + 1e-10.
bool is_schur_stable(const RealMatrix& A, double margin = 0.0);

}  // namespace specclip

#endif  // SPECCLIP_MATRIX_HPP
