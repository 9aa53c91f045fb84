#pragma once

#include "elastix/mesh.hpp"

#include <random>
#include <vector>

namespace elastix {

class PatchError : public std::runtime_error {
public:
    enum class Code {
        NotEvenInterior,
        NotInterior,
        IncompatibleData,
        ColinearNormals,
        AssumptionViolated,
        InfeasiblePrescription,
        DegenerateCombination,
    };
    PatchError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

/// Element of TT_e: per-element constant symmetric tensors acting in the
/// edge's cross-sectional plane (T t = 0), normal-continuous across the
/// patch's interior faces.
struct PatchTensor {
    std::vector<Mat3> blocks; // one per element K_1..K_m
};

/// Orthonormal basis (block-Frobenius inner product) of TT_e, computed as
/// the null space of the stacked continuity constraints.
std::vector<PatchTensor> tt_e_basis(const EdgePatch& patch);

/// Normal-normal values n_j^T T n_j per face position: m values for interior
/// patches, m+1 for boundary patches.
std::vector<double> nn_values(const EdgePatch& patch, const PatchTensor& T);

/// max_j || T|_{K_j} ||_F
double patch_tensor_norm(const PatchTensor& T);

/// Membership check: symmetry, T t = 0, and normal continuity across the
/// patch's interior faces, all within tol.
double tt_e_defect(const EdgePatch& patch, const PatchTensor& T);

/// c_j = (-1)^j (cot theta_{j-1} + cot theta_j), cyclic, 1-based j as in the
/// even-patch constraint sum_j c_j n_j^T T n_j = 0. Output is 0-based:
/// out[i] corresponds to face position i.
std::vector<double> even_constraint_coeffs(const EdgePatch& patch);

/// Residual of the per-element angle identity
///   (n_j^T T n_j - n_{j+1}^T T n_{j+1}) cot theta_j
///     - (n_j^T T t_j + n_{j+1}^T T t_{j+1})
/// evaluated on block K_j; vanishes for T in TT_e. j is 0-based in [0, m).
double angle_identity_residual(const EdgePatch& patch, const PatchTensor& T, int j);

/// Unique symmetric T with T t = 0, T n1 = l1, T n2 = l2 (data compatible:
/// l1.n2 = l2.n1). Satisfies ||T||_F^2 <= (3/2 + 2 cot^2 theta)(|l1|^2+|l2|^2)
/// with theta the angle between the in-plane face tangents n1 x t, n2 x t.
Mat3 sym_from_two_normals(const Vec3& n1, const Vec3& n2, const Vec3& t, const Vec3& l1,
                          const Vec3& l2);

/// Least-norm element of TT_e matching the prescribed normal-normal values
/// (NaN entries are unconstrained). Size m for interior patches, m+1 for
/// boundary patches. Throws InfeasiblePrescription when the residual exceeds
/// 1e-10.
PatchTensor nn_prescribed_tensor(const EdgePatch& patch, const std::vector<double>& nn);

/// The three-case closed-form construction on an interior patch:
/// n_1^T T n_1 = 1, n_2^T T n_2 = beta > 0 (even non-singular) or 0
/// (odd / singular), zero on the remaining faces. With oracle set, the
/// least-norm solve over tt_e_basis replaces the closed form.
PatchTensor nn_unit_tensor(const EdgePatch& patch, bool oracle = false);

/// Boundary-patch variant: prescribed nn value 1 on the chosen face position
/// and 0 on all others, by least-norm solve.
PatchTensor nn_unit_tensor_boundary(const EdgePatch& patch, int face_pos = 0);

/// T in TT_e with positive nn on the two faces of the element at ring
/// position pos (faces pos and pos+1) and zero nn on all other faces.
/// Interior patches use the closed-form construction (anchored/superposed);
/// boundary patches use the least-norm prescription.
PatchTensor nn_pair_tensor(const EdgePatch& patch, int pos);

// ---------------------------------------------------------------------------
// Synthetic patches (mesh-free; frames built from the recursion)
// ---------------------------------------------------------------------------

EdgePatch make_synthetic_patch(bool interior, const std::vector<double>& theta,
                               std::mt19937_64& rng);

/// Angles sampled uniformly with kappa margins; interior angles rescaled to
/// sum 2 pi. Singular patches get the exact (t, pi-t, t, pi-t) pattern.
EdgePatch random_patch(EdgeKind kind, int m, std::mt19937_64& rng, double kappa = 0.2);

} // namespace elastix
