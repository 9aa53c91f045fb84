#pragma once

#include "elastix/element.hpp"
#include "elastix/mesh.hpp"
#include "elastix/patch_tensors.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace elastix {

class SpaceError : public std::runtime_error {
public:
    enum class Code { RankFailure, SingularDofMatrix, AssumptionViolated, DegenerateCombination };
    SpaceError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

/// Rank-one block of a sparse functional / basis vector on per-element
/// coefficients: contribution cw^T C mv with C the element's 6 x 20
/// coefficient matrix.
struct Rank1Block {
    int element;
    Eigen::Matrix<double, 6, 1> cw;
    Eigen::Matrix<double, 20, 1> mv;
};

using ConstraintRow = std::vector<Rank1Block>;

struct BasisVector {
    std::vector<Rank1Block> blocks;
};

/// Continuity constraints tying the broken space to Sigma_h: face rows
/// (normal-trace match at the 10 P3 Lagrange nodes x 3 components per
/// interior face) and vertex rows (tensor match along a spanning tree of each
/// vertex star, reduced to the 3 tangential components when the pair shares a
/// face). `selected` indexes an independent subset of `rows`; the reduction
/// is exact because every row references a single geometric node, so ranks
/// decompose node by node.
struct ContinuityConstraints {
    std::vector<ConstraintRow> rows;
    std::vector<int> selected;
    int rank() const { return static_cast<int>(selected.size()); }
};

struct DiscreteSpace {
    ContinuityConstraints constraints;
    std::vector<BasisVector> basis; // sparse, node-supported
    int dim = 0;                    // = 120 |K| - rank
};

DiscreteSpace build_space(const TetMesh& mesh, const std::vector<EdgePatch>& patches);

double apply_constraint_row(const ConstraintRow& row, const std::vector<SymTensorPoly>& tau);

std::vector<SymTensorPoly> expand_basis_vector(const TetMesh& mesh, const BasisVector& v);
std::vector<SymTensorPoly> expand_coefficients(const TetMesh& mesh, const DiscreteSpace& space,
                                               const Eigen::VectorXd& coeffs);

/// DoF-evaluation matrix: D(i, j) = dof_i(basis_j).
Eigen::MatrixXd dof_matrix(const TetMesh& mesh, const DiscreteSpace& space,
                           const std::vector<DofFunctional>& dofs);

struct UnisolvenceReport {
    int dof_count = 0;
    int space_dim = 0;
    bool square = false;
    double sigma_min = 0;
    double sigma_max = 0;
    bool nonsingular = false; // sigma_min > 1e-10 sigma_max
    DofCounts counts;
    bool pass() const { return square && nonsingular; }
};

UnisolvenceReport verify_unisolvence(const TetMesh& mesh, const DiscreteSpace& space,
                                     const std::vector<DofFunctional>& dofs);

/// Dual face bubble of face F and P1 basis index i (0..2, the barycentric
/// function of F's i-th sorted vertex): a Sigma_h member whose face nn
/// moments satisfy int_F n^T delta n q_j dS = delta_ij |F| and vanish against
/// P1 on every other face. Built from the three edge patches at that vertex
/// of the owning element via nn_pair_tensor constructions.
struct DualFaceBubble {
    std::vector<SymTensorPoly> field; // per element, zero outside the support
    std::vector<int> support;
};

DualFaceBubble dual_face_bubble(const TetMesh& mesh, const std::vector<EdgePatch>& patches,
                                int face, int i);

struct Interpolant {
    Eigen::VectorXd coeffs;
    std::vector<SymTensorPoly> field;
};

/// DoF-matching projection of a smooth tensor field into Sigma_h (solves the
/// unisolvence system with quadrature-evaluated DoFs).
Interpolant canonical_interpolation(const std::function<Mat3(const Vec3&)>& sigma,
                                    const TetMesh& mesh, const std::vector<DofFunctional>& dofs,
                                    const DiscreteSpace& space);

} // namespace elastix
