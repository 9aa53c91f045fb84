#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastix {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Error raised by mesh construction and ingestion.
class MeshError : public std::runtime_error {
public:
    enum class Code {
        NonConforming,
        DegenerateTet,
        BrokenRing,
        ParseError,
        UnsupportedElementType,
    };
    MeshError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

struct Face {
    std::array<int, 3> v{};          // vertex indices, sorted ascending
    std::array<int, 2> tets{-1, -1}; // owning tets; tets[1] < 0 on the boundary
    std::array<int, 3> edges{-1, -1, -1};
    bool boundary() const { return tets[1] < 0; }
};

struct Edge {
    std::array<int, 2> v{};  // vertex indices, sorted ascending
    std::vector<int> tets;   // incident tets (unordered)
    std::vector<int> faces;  // incident faces (unordered)
    bool boundary = false;   // lies on a boundary face
};

/// Conforming tetrahedral mesh with derived face/edge topology.
/// Immutable after build_topology; safe for concurrent reads.
struct TetMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets; // positively oriented
    std::vector<Face> faces;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> vertex_tets; // tets containing each vertex

    double tet_volume(int k) const;
    double face_area(int f) const;
    /// Unit normal computed from the sorted vertex triple (combinatorial
    /// orientation, not outward).
    Vec3 face_normal(int f) const;
    double edge_length(int e) const;
    double max_diameter() const;

    int num_boundary_faces() const;
    int num_interior_faces() const;
    int num_interior_edges() const;
    int find_edge(int a, int b) const;          // -1 if absent
    int find_face(int a, int b, int c) const;   // -1 if absent
};

/// Derives faces, edges and adjacency from raw connectivity. Reorients tets
/// to positive volume. Throws MeshError on degenerate tets, duplicated tets,
/// faces with more than two owners, or hanging nodes (a vertex strictly
/// inside another element's edge or face).
TetMesh build_topology(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets);

/// Kuhn (Freudenthal) subdivision of the box [0,nx]x[0,ny]x[0,nz] into unit
/// cells, 6 tets per cell sharing the cell's main diagonal.
TetMesh gen_kuhn_box(int nx, int ny, int nz);

/// Unit cube split into n^3 subcubes, each Kuhn-subdivided: 6 n^3 tets.
TetMesh gen_kuhn_mesh(int n);

TetMesh load_mesh_json(const std::string& path);
void save_mesh_json(const TetMesh& mesh, const std::string& path);

/// Gmsh ASCII v2.2 subset: $Nodes / $Elements, volume elements must be
/// 4-node tets (type 4); points, lines and triangles are skipped.
TetMesh load_msh(const std::string& path);
void save_msh(const TetMesh& mesh, const std::string& path);

/// Dispatches on file extension (.json / .msh).
TetMesh load_mesh(const std::string& path);

enum class EdgeKind { Boundary, InteriorOdd, InteriorEvenNonsingular, Singular };

std::string to_string(EdgeKind k);

/// The ordered ring of elements and faces around an edge, with the frame
/// (t, n_j, t_j) and signed dihedral angles theta_j.
///
/// Conventions: t points from the lower- to the higher-indexed endpoint; the
/// walk advances by positive rotation about t; n_j = t x w_j with w_j the
/// in-face direction from the edge towards the face's third vertex, and
/// t_j = n_j x t = w_j. These make the recursion
///     n_{j+1} = cos(theta_j) n_j - sin(theta_j) t_j
/// hold with theta_j in (0, pi).
struct EdgePatch {
    int edge = -1;             // mesh edge id; -1 for synthetic patches
    bool interior = false;
    std::vector<int> elements; // K_1..K_m (mesh ids; empty for synthetic)
    std::vector<int> faces;    // F_1..F_{m+1}; faces[m] == faces[0] when interior
    Vec3 t = Vec3::Zero();
    std::vector<Vec3> n;       // m+1 entries; n[m] == n[0] when interior
    std::vector<Vec3> tf;      // m+1 entries, tf[j] = n[j] x t
    std::vector<double> theta; // m entries
    EdgeKind kind = EdgeKind::Boundary;

    int size() const { return static_cast<int>(theta.size()); } // m_e
    double theta_sum() const;
};

/// Classification used by build_edge_patch and the synthetic generators.
/// Singular tolerance: |theta_i + theta_{i+1} - pi| <= 1e-9.
EdgeKind classify_edge(bool interior, const std::vector<double>& theta);

/// Orders the ring around an edge, computes frames and angles, classifies.
/// reverse flips t and the walk direction (testing hook for the
/// orientation-independence property).
EdgePatch build_edge_patch(const TetMesh& mesh, int edge, bool reverse = false);

std::vector<EdgePatch> build_all_patches(const TetMesh& mesh);

/// Cyclic relabeling of an interior patch so that ring position start
/// (0-based) becomes K_1. Frames and angles are shifted accordingly.
EdgePatch rotate_patch(const EdgePatch& patch, int start);

struct AssumptionReport {
    double kappa = 0;
    bool clause1_pass = false;
    double clause1_margin = 0; // min over j of min(theta_j - kappa, pi - kappa - theta_j)
    bool clause2_applicable = false;
    bool clause2_pass = true;
    double clause2_margin = 0; // min over j of (pi - kappa) - (theta_j + theta_{j+1})
    bool pass() const { return clause1_pass && (!clause2_applicable || clause2_pass); }
    /// Largest violating margin (0 when the report passes).
    double worst_violation() const;
};

/// Checks Assumption (1) kappa < theta_j < pi - kappa for all j, and
/// (2) for non-singular interior edges with even m_e,
/// theta_j + theta_{j+1} < pi - kappa (cyclic). Diagnostic only.
AssumptionReport check_assumption(const EdgePatch& patch, double kappa);

} // namespace elastix
