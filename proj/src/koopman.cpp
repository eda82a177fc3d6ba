#include "specclip/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace specclip {

namespace {

constexpr std::uint64_t kModePerturbSeed = 0x6d0de5e7;

// Exponent vectors of total degree `degree`, lexicographically descending in
// the leading variable (x1^2 before x1 x2 before x2^2).
void enumerate_degree(int vars, int degree, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
    if (vars == 1) {
        current.push_back(degree);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int e = degree; e >= 0; --e) {
        current.push_back(e);
        enumerate_degree(vars - 1, degree - e, current, out);
        current.pop_back();
    }
}

}  // namespace

LiftingSpec make_lifting_spec(int state_dim, int degree) {
    if (state_dim < 1) {
        throw DimensionMismatch("make_lifting_spec: state_dim must be positive");
    }
    if (degree < 2) {
        throw DimensionMismatch("make_lifting_spec: degree must be at least 2");
    }
    LiftingSpec spec;
    spec.state_dim = state_dim;
    spec.degree = degree;
    std::vector<int> current;
    for (int d = 2; d <= degree; ++d) {
        enumerate_degree(state_dim, d, current, spec.monomials);
    }
    return spec;
}

RealVector lift(const RealVector& xi, const LiftingSpec& spec) {
    if (xi.size() != spec.state_dim) {
        throw DimensionMismatch("lift: state has dimension " + std::to_string(xi.size()) +
                                ", expected " + std::to_string(spec.state_dim));
    }
    RealVector z(spec.lifted_dim());
    for (int k = 0; k < spec.monomial_count(); ++k) {
        double value = 1.0;
        const std::vector<int>& expo = spec.monomials[k];
        for (int v = 0; v < spec.state_dim; ++v) {
            for (int e = 0; e < expo[v]; ++e) {
                value *= xi[v];
            }
        }
        z[k] = value;
    }
    z.tail(spec.state_dim) = xi;
    return z;
}

KoopmanModel fit_koopman(const TrajectoryDataset& dataset, const LiftingSpec& spec) {
    if (dataset.input_dim != 0) {
        throw DimensionMismatch("fit_koopman: dataset must be autonomous");
    }
    if (dataset.state_dim != spec.state_dim) {
        throw DimensionMismatch("fit_koopman: dataset state_dim " +
                                std::to_string(dataset.state_dim) + " does not match lifting " +
                                std::to_string(spec.state_dim));
    }
    if (dataset.trajectories.empty()) {
        throw EmptyData("fit_koopman: dataset has no trajectories");
    }

    TrajectoryDataset lifted;
    lifted.state_dim = spec.lifted_dim();
    lifted.input_dim = 0;
    lifted.trajectories.reserve(dataset.trajectories.size());
    for (const Trajectory& t : dataset.trajectories) {
        Trajectory lt;
        lt.states.resize(spec.lifted_dim(), t.states.cols());
        for (Eigen::Index c = 0; c < t.states.cols(); ++c) {
            lt.states.col(c) = lift(t.states.col(c), spec);
        }
        lifted.trajectories.push_back(std::move(lt));
    }

    KoopmanModel model;
    model.K = fit_ls(lifted);
    model.spec = spec;
    return model;
}

KoopmanModel clip_koopman(const KoopmanModel& model, double eps) {
    auto [clipped, report] = clip_spectrum(model.K, eps);
    KoopmanModel out;
    out.K = std::move(clipped);
    out.spec = model.spec;
    out.eps = eps;
    out.clip_report = report;
    return out;
}

RealMatrix predict_states(const KoopmanModel& model, const RealVector& xi0, int horizon) {
    if (horizon < 1) {
        throw DimensionMismatch("predict_states: horizon must be at least 1");
    }
    if (model.K.rows() != model.spec.lifted_dim()) {
        throw DimensionMismatch("predict_states: K does not match the lifting dimension");
    }
    const int n = model.spec.state_dim;

    RealMatrix out(n, horizon + 1);
    out.col(0) = xi0;  // exact, not read back through the lift

    RealVector z = lift(xi0, model.spec);
    for (int k = 1; k <= horizon; ++k) {
        z = model.K * z;
        if (z.cwiseAbs().maxCoeff() > 1e300) {
            throw NumericalOverflow("predict_states: lifted state exceeded 1e300 at step " +
                                    std::to_string(k) + " (unstable unclipped model?)");
        }
        out.col(k) = z.tail(n);
    }
    return out;
}

ModeSet mode_decompose(const KoopmanModel& model) {
    require_square_finite(model.K, "mode_decompose");

    ModeSet set;
    Spectrum spectrum = eigendecompose(model.K);
    if (spectrum.defective) {
        const double gamma = 1e-10 * (1.0 + model.K.cwiseAbs().colwise().sum().maxCoeff());
        auto [perturbed, gamma_used] = perturb_to_diagonalizable(model.K, gamma, kModePerturbSeed);
        set.perturbation_applied = gamma_used;
        spectrum = eigendecompose(perturbed);
    }

    set.eigenvalues = spectrum.eigenvalues;
    set.modes = spectrum.modal;
    // Rows of modal^-1 are left eigenvectors; w_i = conj of row i gives
    // K^H w_i = conj(lambda_i) w_i and <v_j, w_i> = delta_ij exactly.
    Eigen::FullPivLU<ComplexMatrix> lu(spectrum.modal);
    if (!lu.isInvertible()) {
        throw EigFailure("mode_decompose: modal matrix is numerically singular");
    }
    const ComplexMatrix modal_inv = lu.inverse();
    set.adjoint_vectors = modal_inv.adjoint();
    return set;
}

RealMatrix rollout_modes(const ModeSet& modes, const std::vector<int>& subset,
                         const RealVector& z0, int horizon) {
    const Eigen::Index dim = modes.size();
    if (z0.size() != dim) {
        throw DimensionMismatch("rollout_modes: z0 has dimension " + std::to_string(z0.size()) +
                                ", expected " + std::to_string(dim));
    }
    if (horizon < 1) {
        throw DimensionMismatch("rollout_modes: horizon must be at least 1");
    }

    std::vector<int> index(subset);
    std::sort(index.begin(), index.end());
    index.erase(std::unique(index.begin(), index.end()), index.end());
    for (int idx : index) {
        if (idx < 0 || idx >= dim) {
            throw DimensionMismatch("rollout_modes: mode index " + std::to_string(idx) +
                                    " out of range");
        }
    }
    // A complex mode's conjugate partner is adjacent by construction
    // (positive-imaginary member first); both or neither must be selected.
    const std::unordered_set<int> chosen(index.begin(), index.end());
    for (int idx : index) {
        const Complex lambda = modes.eigenvalues[idx];
        if (lambda.imag() == 0.0) {
            continue;
        }
        const int partner = lambda.imag() > 0.0 ? idx + 1 : idx - 1;
        if (!chosen.count(partner)) {
            throw NonConjugateSubset("rollout_modes: subset splits the conjugate pair at index " +
                                     std::to_string(idx));
        }
    }

    const ComplexVector z0c = z0.cast<Complex>();
    RealMatrix out(dim, horizon + 1);
    double worst_imag = 0.0;
    double worst_real = 0.0;

    // coefficients <z0, w_i> = w_i^H z0, advanced by lambda_i each step
    std::vector<Complex> coeff;
    coeff.reserve(index.size());
    for (int idx : index) {
        coeff.push_back(modes.adjoint_vectors.col(idx).dot(z0c));
    }

    for (int k = 0; k <= horizon; ++k) {
        ComplexVector acc = ComplexVector::Zero(dim);
        for (std::size_t j = 0; j < index.size(); ++j) {
            acc += coeff[j] * modes.modes.col(index[j]);
        }
        out.col(k) = acc.real();
        worst_imag = std::max(worst_imag, acc.imag().cwiseAbs().maxCoeff());
        worst_real = std::max(worst_real, acc.real().cwiseAbs().maxCoeff());
        for (std::size_t j = 0; j < index.size(); ++j) {
            coeff[j] *= modes.eigenvalues[index[j]];
        }
    }

    if (worst_imag > 1e-6 * (worst_real + 1e-30)) {
        throw NonRealResult("rollout_modes: imaginary residue " + std::to_string(worst_imag) +
                            " relative to " + std::to_string(worst_real));
    }
    return out;
}

}  // namespace specclip
