#pragma once

#include "elastix/mesh.hpp"
#include "elastix/polynomial.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace elastix {

// Symmetric-component order used throughout: xx, yy, zz, yz, xz, xy.
constexpr int kSymComp = 6;
constexpr int kTetP3 = 20; // monomials of degree 3 in 4 barycentric variables

/// Component index of the symmetric pair (r,c).
int sym_index(int r, int c);

/// Weights of n^T S n in component coordinates: s = sum_c w_c S_c.
Eigen::Matrix<double, 6, 1> nn_weights(const Vec3& n1, const Vec3& n2);

/// Packs a symmetric matrix into component coordinates and back.
Eigen::Matrix<double, 6, 1> sym_pack(const Mat3& S);
Mat3 sym_unpack(const Eigen::Matrix<double, 6, 1>& c);

/// Degree-3 symmetric-tensor-valued polynomial on a tetrahedron in
/// homogeneous barycentric monomial coordinates: 6 components x 20 monomials.
struct SymTensorPoly {
    Eigen::Matrix<double, 6, 20> coeffs = Eigen::Matrix<double, 6, 20>::Zero();

    Mat3 eval(const Eigen::Vector4d& lambda) const;

    /// Row-wise divergence; degree-2 vector polynomial (3 x 10 coefficients).
    /// Needs the element's barycentric gradients.
    Eigen::Matrix<double, 3, 10> divergence(const TetGeometry& geom) const;

    SymTensorPoly& operator+=(const SymTensorPoly& o) {
        coeffs += o.coeffs;
        return *this;
    }
    SymTensorPoly& operator*=(double s) {
        coeffs *= s;
        return *this;
    }
};

/// Restriction of one component (20 tet coefficients) to a face or edge of
/// the element. local = positions of the sub-simplex vertices within the tet.
PolyVec restrict_tet_poly_to_face(const Eigen::Matrix<double, 6, 20>& coeffs, int comp,
                                  const std::array<int, 3>& local);
PolyVec restrict_tet_poly_to_edge(const Eigen::Matrix<double, 6, 20>& coeffs, int comp,
                                  const std::array<int, 2>& local);

/// Evaluate a degree-2 vector polynomial (e.g. a divergence) at a barycentric
/// point.
Vec3 eval_vec_p2(const Eigen::Matrix<double, 3, 10>& coeffs, const Eigen::Vector4d& lambda);

// ---------------------------------------------------------------------------
// H(div) bubble space (vanishing boundary normal trace), k = 3
// ---------------------------------------------------------------------------

struct BubbleBasis {
    std::vector<SymTensorPoly> spanning; // 24 = 6 edges x 4 linear factors
    std::vector<int> independent;        // indices of an independent subset
    int rank = 0;
};

/// Spanning set { lambda_i lambda_j p T_{ij} : p in {lambda_0..lambda_3},
/// 0 <= i < j <= 3 } with T_{ij} = t_{ij} t_{ij}^T, plus its numerical rank.
BubbleBasis bubble_basis(const TetGeometry& geom);

// ---------------------------------------------------------------------------
// Face Nedelec test space (dimension 8)
// ---------------------------------------------------------------------------

/// Basis of { p + s : p in P1(F; tangent plane),
///            s homogeneous quadratic tangential with s(x).x = 0 }.
/// Fields are stored as homogeneous degree-2 barycentric coefficients of the
/// three Cartesian components (for exact moment integration).
struct NedelecBasis {
    FaceGeometry geom;
    std::array<Eigen::Matrix<double, 3, 6>, 8> fields;

    Vec3 eval(int field, const Vec3& lambda) const;
    int verified_dimension() const; // rank of sampled evaluations
};

NedelecBasis nedelec_face_basis(const FaceGeometry& geom);

// ---------------------------------------------------------------------------
// Degrees of freedom
// ---------------------------------------------------------------------------

struct DofFunctional {
    enum class Kind { VertexValue, FaceNN, FaceTangential, Interior, EdgeNN, EdgeCrossNN };
    Kind kind{};
    int vertex = -1;      // VertexValue
    int component = -1;   // VertexValue: 0..5
    int face = -1;        // FaceNN / FaceTangential / EdgeNN (F_i) / EdgeCrossNN (evaluation face)
    int tet = -1;         // Interior
    int edge = -1;        // EdgeNN / EdgeCrossNN
    int basis_index = -1; // FaceTangential 0..7, Interior 0..23, Edge*: P1(e) index 0..1
    Vec3 n1 = Vec3::Zero(); // Edge*: patch-frame normals defining the component
    Vec3 n2 = Vec3::Zero();

    struct Side {
        int element;
        double weight;
    };
    std::vector<Side> sides; // designated evaluation element(s)
};

struct DofCounts {
    int vertex = 0, face_nn = 0, face_tangential = 0, interior = 0, edge = 0;
    int total() const { return vertex + face_nn + face_tangential + interior + edge; }
};

/// The complete DoF list: 6 per vertex, 1 + 8 per face, 24 per tet, and the
/// parity-dependent edge sets (2 per face slot, see the edge-kind cases).
std::vector<DofFunctional> dof_functionals(const TetMesh& mesh, const std::vector<EdgePatch>& patches);

DofCounts count_dofs(const std::vector<DofFunctional>& dofs);

/// A functional expressed as a sparse linear form on per-element coefficient
/// blocks; the workhorse behind eval_dof and the unisolvence matrix.
struct DofRow {
    struct Block {
        int element;
        Eigen::Matrix<double, 6, 20> w;
    };
    std::vector<Block> blocks;
};

DofRow dof_row(const TetMesh& mesh, const DofFunctional& dof);

/// Exact evaluation (barycentric moments) of a functional on per-element
/// polynomial data; tau is indexed by element id.
double eval_dof(const TetMesh& mesh, const DofFunctional& dof, const std::vector<SymTensorPoly>& tau);

/// Quadrature evaluation (degree-10) on a smooth tensor field.
double eval_dof_field(const TetMesh& mesh, const DofFunctional& dof,
                      const std::function<Mat3(const Vec3&)>& sigma);

// Local index helpers (positions of global entities within a tet).
int local_vertex(const TetMesh& mesh, int tet, int vertex);
std::array<int, 3> local_face(const TetMesh& mesh, int tet, int face); // ordered by sorted face vertices
std::array<int, 2> local_edge(const TetMesh& mesh, int tet, int edge); // ordered by sorted edge vertices

} // namespace elastix
