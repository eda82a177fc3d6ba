#ifndef SPECCLIP_KOOPMAN_HPP
#define SPECCLIP_KOOPMAN_HPP

#include <optional>
#include <vector>

#include "specclip/clip.hpp"
#include "specclip/matrix.hpp"
#include "specclip/sysid.hpp"

namespace specclip {

/// State-inclusive monomial lifting: all monomials of total degree 2..degree
/// over the state variables, in graded lexicographic order, followed by the
/// raw state itself. The original state always occupies the last state_dim
/// coordinates of a lifted vector.
struct LiftingSpec {
    int state_dim = 0;
    int degree = 2;
    std::vector<std::vector<int>> monomials;  ///< exponent vectors, graded-lex

    int monomial_count() const { return static_cast<int>(monomials.size()); }
    int lifted_dim() const { return monomial_count() + state_dim; }
};

/// Builds the canonical LiftingSpec for a state dimension and degree >= 2.
LiftingSpec make_lifting_spec(int state_dim, int degree);

/// A linear model of the lifted dynamics z' = K z.
struct KoopmanModel {
    RealMatrix K;
    LiftingSpec spec;
    double eps = 0.0;
    std::optional<ClipReport> clip_report;
};

/// Koopman mode decomposition: eigenvalues (core-matrix ordering), modes v_i
/// (eigenvectors of K) and adjoint vectors w_i (eigenvectors of K^H for the
/// conjugated eigenvalues), normalized so <v_i, w_i> = 1 with the convention
/// <a, b> = sum_i a_i conj(b_i). perturbation_applied records the 1-norm
/// budget spent when a defective K had to be nudged first (0 otherwise).
struct ModeSet {
    ComplexVector eigenvalues;
    ComplexMatrix modes;
    ComplexMatrix adjoint_vectors;
    double perturbation_applied = 0.0;

    Eigen::Index size() const { return eigenvalues.size(); }
};

/// Lifts a state: [monomials(xi, degrees 2..d); xi].
RealVector lift(const RealVector& xi, const LiftingSpec& spec);

/// Lifts every state of an autonomous dataset and least-squares fits K.
KoopmanModel fit_koopman(const TrajectoryDataset& dataset, const LiftingSpec& spec);

/// clip_spectrum applied to K; the lifting is unchanged.
KoopmanModel clip_koopman(const KoopmanModel& model, double eps);

/// Open-loop prediction: z_0 = lift(xi0), z_{k+1} = K z_k, reading the state
/// off the last state_dim coordinates. Returns state_dim x (horizon+1) with
/// column 0 equal to xi0 exactly. Throws NumericalOverflow when a lifted
/// entry passes 1e300 (an unclipped unstable model).
RealMatrix predict_states(const KoopmanModel& model, const RealVector& xi0, int horizon);

/// Eigenvalue/mode/adjoint decomposition of K (perturbing first if K is
/// numerically defective).
ModeSet mode_decompose(const KoopmanModel& model);

/// Rollout restricted to a subset of modes (zero-based indices):
/// z_k = sum_{i in subset} lambda_i^k <z0, w_i> v_i, returned as real lifted
/// vectors, lifted_dim x (horizon+1). The subset must not split a conjugate
/// pair (NonConjugateSubset), which keeps the imaginary residue at rounding
/// level; the residue is asserted <= 1e-6 relative.
RealMatrix rollout_modes(const ModeSet& modes, const std::vector<int>& subset,
                         const RealVector& z0, int horizon);

}  // namespace specclip

#endif  // SPECCLIP_KOOPMAN_HPP
