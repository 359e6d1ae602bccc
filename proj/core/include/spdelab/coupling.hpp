#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spdelab/model.hpp"

namespace spdelab {

// Component-coupling tensor for multi-component equations; fully symmetric in
// its three indices. An empty value table means the scalar coupling 1.
struct GammaTensor {
    int components = 1;
    std::vector<double> values; // components^3 entries, index (i*d + j)*d + k

    double operator()(int i, int j, int k) const {
        if (values.empty()) return 1.0;
        const int d = components;
        return values[static_cast<std::size_t>((i * d + j) * d + k)];
    }
};

void validate_gamma(const GammaTensor& gamma);

enum class AssemblyMethod { closed_form, quadrature };

// Trilinear coupling array B[k][l][m] = <B(psi_k, psi_l), psi_m>, symmetric
// in the first two slots, stored sparsely per output index m (the drift hot
// loop iterates outputs). Indices are zero-based mode numbers; for several
// components they fold as component * mode_count + mode.
struct CouplingTensor {
    int mode_count = 0;
    int components = 1;

    struct PairEntry {
        int k; // k <= l
        int l;
        double value;
    };
    std::vector<std::vector<PairEntry>> by_output;

    int folded_count() const { return mode_count * components; }

    // Symmetric lookup; zero when the triple is not stored.
    double entry(int k, int l, int m) const;

    // r_m = sum_l B[l][l][m], the constant part subtracted by the drift.
    std::vector<double> renormalization() const;

    // Largest |B[k][l][m] + B[m][k][l] + B[l][m][k]| over all index triples.
    double max_cyclic_defect() const;
};

// Assembles the tensor over the model's eigenbasis. closed_form uses exact
// trigonometric integrals (conjugated through the change-of-basis matrix for
// numerically diagonalized models); quadrature integrates -psi_k psi_l psi_m'
// pointwise. The cosine frame adds the boundary compensation
// (1/3)(psi_k psi_l psi_m)|_0^1, which keeps the null-form and circular
// identities exact in the presence of nonvanishing endpoint values.
CouplingTensor assemble_coupling(const SpectralModel& model, AssemblyMethod method,
                                 const GammaTensor& gamma = {});

// Renormalized quadratic drift: component k (for k < level) is
// sum_{l,m < level} (u_l u_m - delta_lm) B[l][m][k]. The subtraction is
// always applied. u must have folded length; level counts modes per
// component.
Eigen::VectorXd drift_eval(const CouplingTensor& tensor, const Eigen::VectorXd& u, int level);

// sum_{k < level} dG_k/du_k for the drift above, from the tensor directly.
double drift_divergence(const CouplingTensor& tensor, const Eigen::VectorXd& u, int level);

// sum_{k,l,m} phi[k][l] f_m B[k][l][m].
double apply_B_pairing(const CouplingTensor& tensor, const Eigen::MatrixXd& phi,
                       const Eigen::VectorXd& f);

// Vector m -> sum_{k,l} phi[k][l] B[k][l][m] (the functional paired above).
Eigen::VectorXd b_of_tensor(const CouplingTensor& tensor, const Eigen::MatrixXd& phi);

// Tensor with both pair slots transported through r:
// B'[k][l][m] = sum_{a,b} r(a,k) r(b,l) B[a][b][m]. drift_eval on the result
// is the drift of the r-smoothed field, renormalization included.
CouplingTensor conjugate_pair_slots(const CouplingTensor& tensor, const Eigen::MatrixXd& r);

// Sparse triplet export, canonical (k <= l) entries, zero-based indices.
std::string tensor_to_csv(const CouplingTensor& tensor);

} // namespace spdelab
