#include "elastix/element.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace elastix {

namespace {

constexpr int kSymDiag[3] = {0, 1, 2};

// component weights of S : E_c with unit-entry canonical tensors
constexpr double kCompWeight[6] = {1, 1, 1, 2, 2, 2};

} // namespace

int sym_index(int r, int c) {
    if (r == c) return kSymDiag[r];
    const int s = r + c; // 0+1=1 -> xy(5), 0+2=2 -> xz(4), 1+2=3 -> yz(3)
    if (s == 3) return 3;
    if (s == 2) return 4;
    return 5;
}

Eigen::Matrix<double, 6, 1> nn_weights(const Vec3& n1, const Vec3& n2) {
    Eigen::Matrix<double, 6, 1> w;
    w[0] = n1.x() * n2.x();
    w[1] = n1.y() * n2.y();
    w[2] = n1.z() * n2.z();
    w[3] = n1.y() * n2.z() + n1.z() * n2.y();
    w[4] = n1.x() * n2.z() + n1.z() * n2.x();
    w[5] = n1.x() * n2.y() + n1.y() * n2.x();
    return w;
}

Eigen::Matrix<double, 6, 1> sym_pack(const Mat3& S) {
    Eigen::Matrix<double, 6, 1> c;
    c << S(0, 0), S(1, 1), S(2, 2), S(1, 2), S(0, 2), S(0, 1);
    return c;
}

Mat3 sym_unpack(const Eigen::Matrix<double, 6, 1>& c) {
    Mat3 S;
    S << c[0], c[5], c[4], c[5], c[1], c[3], c[4], c[3], c[2];
    return S;
}

Mat3 SymTensorPoly::eval(const Eigen::Vector4d& lambda) const {
    const auto& exps = mono_exps(4, 3);
    Eigen::Matrix<double, 6, 1> comps = Eigen::Matrix<double, 6, 1>::Zero();
    for (int m = 0; m < kTetP3; ++m) {
        double mono = 1;
        for (int v = 0; v < 4; ++v)
            for (int p = 0; p < exps[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)]; ++p)
                mono *= lambda[v];
        comps += coeffs.col(m) * mono;
    }
    return sym_unpack(comps);
}

Eigen::Matrix<double, 3, 10> SymTensorPoly::divergence(const TetGeometry& geom) const {
    const auto& e3 = mono_exps(4, 3);
    Eigen::Matrix<double, 3, 10> out = Eigen::Matrix<double, 3, 10>::Zero();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const int comp = sym_index(r, c);
            for (int m = 0; m < kTetP3; ++m) {
                const double a = coeffs(comp, m);
                if (a == 0.0) continue;
                for (int k = 0; k < 4; ++k) {
                    int ak = e3[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
                    if (ak == 0) continue;
                    Exps low = e3[static_cast<std::size_t>(m)];
                    low[static_cast<std::size_t>(k)] -= 1;
                    out(r, mono_index(4, 2, low)) +=
                        a * ak * geom.grad_lambda[static_cast<std::size_t>(k)][c];
                }
            }
        }
    }
    return out;
}

PolyVec restrict_tet_poly_to_face(const Eigen::Matrix<double, 6, 20>& coeffs, int comp,
                                  const std::array<int, 3>& local) {
    const auto& tri = mono_exps(3, 3);
    PolyVec out = PolyVec::Zero(static_cast<Eigen::Index>(tri.size()));
    for (std::size_t b = 0; b < tri.size(); ++b) {
        Exps tet{0, 0, 0, 0};
        for (int i = 0; i < 3; ++i)
            tet[static_cast<std::size_t>(local[static_cast<std::size_t>(i)])] =
                tri[b][static_cast<std::size_t>(i)];
        out[static_cast<Eigen::Index>(b)] = coeffs(comp, mono_index(4, 3, tet));
    }
    return out;
}

PolyVec restrict_tet_poly_to_edge(const Eigen::Matrix<double, 6, 20>& coeffs, int comp,
                                  const std::array<int, 2>& local) {
    const auto& seg = mono_exps(2, 3);
    PolyVec out = PolyVec::Zero(static_cast<Eigen::Index>(seg.size()));
    for (std::size_t b = 0; b < seg.size(); ++b) {
        Exps tet{0, 0, 0, 0};
        for (int i = 0; i < 2; ++i)
            tet[static_cast<std::size_t>(local[static_cast<std::size_t>(i)])] =
                seg[b][static_cast<std::size_t>(i)];
        out[static_cast<Eigen::Index>(b)] = coeffs(comp, mono_index(4, 3, tet));
    }
    return out;
}

Vec3 eval_vec_p2(const Eigen::Matrix<double, 3, 10>& coeffs, const Eigen::Vector4d& lambda) {
    const auto& e2 = mono_exps(4, 2);
    Vec3 out = Vec3::Zero();
    for (int m = 0; m < 10; ++m) {
        double mono = 1;
        for (int v = 0; v < 4; ++v)
            for (int p = 0; p < e2[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)]; ++p)
                mono *= lambda[v];
        out += coeffs.col(m) * mono;
    }
    return out;
}

// ---------------------------------------------------------------------------

BubbleBasis bubble_basis(const TetGeometry& geom) {
    BubbleBasis bb;
    static const std::array<std::array<int, 2>, 6> edges = {
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    for (const auto& e : edges) {
        const Vec3 t = geom.x[static_cast<std::size_t>(e[1])] - geom.x[static_cast<std::size_t>(e[0])];
        const Eigen::Matrix<double, 6, 1> T = sym_pack(t * t.transpose());
        for (int p = 0; p < 4; ++p) {
            SymTensorPoly poly;
            Exps a{0, 0, 0, 0};
            a[static_cast<std::size_t>(e[0])] += 1;
            a[static_cast<std::size_t>(e[1])] += 1;
            a[static_cast<std::size_t>(p)] += 1;
            poly.coeffs.col(mono_index(4, 3, a)) = T;
            bb.spanning.push_back(poly);
        }
    }

    Eigen::MatrixXd M(static_cast<Eigen::Index>(bb.spanning.size()), 120);
    for (std::size_t i = 0; i < bb.spanning.size(); ++i)
        M.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(bb.spanning[i].coeffs.data(), 120).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M.transpose());
    qr.setThreshold(1e-10);
    bb.rank = static_cast<int>(qr.rank());
    const auto& perm = qr.colsPermutation().indices();
    for (int i = 0; i < bb.rank; ++i) bb.independent.push_back(perm[i]);
    std::sort(bb.independent.begin(), bb.independent.end());
    return bb;
}

// ---------------------------------------------------------------------------

namespace {

// P2 Vandermonde on the reference triangle nodes (3 vertices + 3 midpoints),
// against homogeneous degree-2 monomials.
Eigen::Matrix<double, 6, 6> tri_p2_vandermonde() {
    static const double nodes[6][3] = {{1, 0, 0},   {0, 1, 0},   {0, 0, 1},
                                       {.5, .5, 0}, {.5, 0, .5}, {0, .5, .5}};
    const auto& exps = mono_exps(3, 2);
    Eigen::Matrix<double, 6, 6> V;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            double m = 1;
            for (int v = 0; v < 3; ++v)
                for (int p = 0; p < exps[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)]; ++p)
                    m *= nodes[i][v];
            V(i, j) = m;
        }
    return V;
}

} // namespace

NedelecBasis nedelec_face_basis(const FaceGeometry& geom) {
    NedelecBasis nb;
    nb.geom = geom;
    static const Eigen::Matrix<double, 6, 6> Vinv = tri_p2_vandermonde().inverse();
    static const double nodes[6][3] = {{1, 0, 0},   {0, 1, 0},   {0, 0, 1},
                                       {.5, .5, 0}, {.5, 0, .5}, {0, .5, .5}};

    // local field value in the (e1, e2) frame, xi measured from the centroid
    auto local_value = [](int field, double x1, double x2) -> Eigen::Vector2d {
        switch (field) {
            case 0: return {1, 0};
            case 1: return {0, 1};
            case 2: return {x1, 0};
            case 3: return {0, x1};
            case 4: return {x2, 0};
            case 5: return {0, x2};
            case 6: return {x2 * x2, -x1 * x2}; // s . xi = 0
            case 7: return {x1 * x2, -x1 * x1}; // s . xi = 0
        }
        return {0, 0};
    };

    for (int f = 0; f < 8; ++f) {
        Eigen::Matrix<double, 6, 3> values;
        for (int i = 0; i < 6; ++i) {
            Vec3 p = nodes[i][0] * geom.x[0] + nodes[i][1] * geom.x[1] + nodes[i][2] * geom.x[2];
            const double x1 = geom.e1.dot(p - geom.centroid);
            const double x2 = geom.e2.dot(p - geom.centroid);
            const Eigen::Vector2d v = local_value(f, x1, x2);
            const Vec3 w = v[0] * geom.e1 + v[1] * geom.e2;
            values.row(i) = w.transpose();
        }
        nb.fields[static_cast<std::size_t>(f)] = (Vinv * values).transpose();
    }
    return nb;
}

Vec3 NedelecBasis::eval(int field, const Vec3& lambda) const {
    const auto& exps = mono_exps(3, 2);
    Vec3 out = Vec3::Zero();
    for (int m = 0; m < 6; ++m) {
        double mono = 1;
        for (int v = 0; v < 3; ++v)
            for (int p = 0; p < exps[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)]; ++p)
                mono *= lambda[v];
        out += fields[static_cast<std::size_t>(field)].col(m) * mono;
    }
    return out;
}

int NedelecBasis::verified_dimension() const {
    // sample on a deterministic interior grid
    std::vector<Vec3> pts;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j + i <= 4; ++j) {
            const double l1 = i / 5.0, l2 = j / 5.0;
            pts.emplace_back(1 - l1 - l2, l1, l2);
        }
    Eigen::MatrixXd M(8, static_cast<Eigen::Index>(3 * pts.size()));
    for (int f = 0; f < 8; ++f)
        for (std::size_t p = 0; p < pts.size(); ++p)
            M.block<1, 3>(f, static_cast<Eigen::Index>(3 * p)) = eval(f, pts[p]).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
    return rank;
}

// ---------------------------------------------------------------------------

int local_vertex(const TetMesh& mesh, int tet, int vertex) {
    const auto& t = mesh.tets[static_cast<std::size_t>(tet)];
    for (int i = 0; i < 4; ++i)
        if (t[static_cast<std::size_t>(i)] == vertex) return i;
    throw ElementError(ElementError::Code::MissingElementData, "vertex not in tet");
}

std::array<int, 3> local_face(const TetMesh& mesh, int tet, int face) {
    const auto& fv = mesh.faces[static_cast<std::size_t>(face)].v;
    return {local_vertex(mesh, tet, fv[0]), local_vertex(mesh, tet, fv[1]),
            local_vertex(mesh, tet, fv[2])};
}

std::array<int, 2> local_edge(const TetMesh& mesh, int tet, int edge) {
    const auto& ev = mesh.edges[static_cast<std::size_t>(edge)].v;
    return {local_vertex(mesh, tet, ev[0]), local_vertex(mesh, tet, ev[1])};
}

std::vector<DofFunctional> dof_functionals(const TetMesh& mesh, const std::vector<EdgePatch>& patches) {
    std::vector<DofFunctional> dofs;

    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (mesh.vertex_tets[v].empty())
            throw ElementError(ElementError::Code::MissingElementData, "isolated vertex");
        for (int c = 0; c < 6; ++c) {
            DofFunctional d;
            d.kind = DofFunctional::Kind::VertexValue;
            d.vertex = static_cast<int>(v);
            d.component = c;
            d.sides = {{mesh.vertex_tets[v][0], 1.0}};
            dofs.push_back(d);
        }
    }

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        DofFunctional nn;
        nn.kind = DofFunctional::Kind::FaceNN;
        nn.face = static_cast<int>(f);
        nn.sides = {{mesh.faces[f].tets[0], 1.0}};
        dofs.push_back(nn);
        for (int i = 0; i < 8; ++i) {
            DofFunctional d;
            d.kind = DofFunctional::Kind::FaceTangential;
            d.face = static_cast<int>(f);
            d.basis_index = i;
            d.sides = {{mesh.faces[f].tets[0], 1.0}};
            dofs.push_back(d);
        }
    }

    for (std::size_t k = 0; k < mesh.tets.size(); ++k)
        for (int i = 0; i < 24; ++i) {
            DofFunctional d;
            d.kind = DofFunctional::Kind::Interior;
            d.tet = static_cast<int>(k);
            d.basis_index = i;
            d.sides = {{static_cast<int>(k), 1.0}};
            dofs.push_back(d);
        }

    if (patches.size() != mesh.edges.size())
        throw ElementError(ElementError::Code::MissingElementData, "patches missing for some edges");

    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const EdgePatch& p = patches[e];
        const int m = p.size();
        auto edge_nn = [&](int face_pos, int q) {
            DofFunctional d;
            d.kind = DofFunctional::Kind::EdgeNN;
            d.edge = static_cast<int>(e);
            d.face = p.faces[static_cast<std::size_t>(face_pos)];
            d.basis_index = q;
            d.n1 = d.n2 = p.n[static_cast<std::size_t>(face_pos)];
            const int elem = face_pos < m ? p.elements[static_cast<std::size_t>(face_pos)]
                                          : p.elements[static_cast<std::size_t>(m - 1)];
            d.sides = {{elem, 1.0}};
            return d;
        };
        auto edge_cross = [&](int face_pos, int q) {
            DofFunctional d;
            d.kind = DofFunctional::Kind::EdgeCrossNN;
            d.edge = static_cast<int>(e);
            d.face = p.faces[static_cast<std::size_t>(face_pos)];
            d.basis_index = q;
            d.n1 = p.n[0];
            d.n2 = p.n[1];
            if (p.interior) {
                // trace on F_2, averaged over the two owners (equal on Sigma_h)
                d.sides = {{p.elements[0], 0.5}, {p.elements[1], 0.5}};
            } else {
                d.sides = {{p.elements[0], 1.0}};
            }
            return d;
        };

        switch (p.kind) {
            case EdgeKind::Boundary:
                for (int q = 0; q < 2; ++q) dofs.push_back(edge_cross(0, q));
                for (int i = 0; i <= m; ++i)
                    for (int q = 0; q < 2; ++q) dofs.push_back(edge_nn(i, q));
                break;
            case EdgeKind::InteriorOdd:
                for (int i = 0; i < m; ++i)
                    for (int q = 0; q < 2; ++q) dofs.push_back(edge_nn(i, q));
                break;
            case EdgeKind::InteriorEvenNonsingular:
                for (int q = 0; q < 2; ++q) dofs.push_back(edge_cross(1, q));
                for (int i = 1; i < m; ++i)
                    for (int q = 0; q < 2; ++q) dofs.push_back(edge_nn(i, q));
                break;
            case EdgeKind::Singular:
                for (int q = 0; q < 2; ++q) dofs.push_back(edge_cross(1, q));
                for (int i = 0; i < 4; ++i)
                    for (int q = 0; q < 2; ++q) dofs.push_back(edge_nn(i, q));
                break;
        }
    }
    return dofs;
}

DofCounts count_dofs(const std::vector<DofFunctional>& dofs) {
    DofCounts c;
    for (const auto& d : dofs) {
        switch (d.kind) {
            case DofFunctional::Kind::VertexValue: ++c.vertex; break;
            case DofFunctional::Kind::FaceNN: ++c.face_nn; break;
            case DofFunctional::Kind::FaceTangential: ++c.face_tangential; break;
            case DofFunctional::Kind::Interior: ++c.interior; break;
            case DofFunctional::Kind::EdgeNN:
            case DofFunctional::Kind::EdgeCrossNN: ++c.edge; break;
        }
    }
    return c;
}

namespace {

// integral over a face of (restricted tet monomial) times a degree-d face poly
double face_moment(const PolyVec& a, int deg_a, const PolyVec& b, int deg_b, double area) {
    return poly_integral(3, deg_a + deg_b, poly_mul(3, deg_a, a, deg_b, b), area);
}

Eigen::Matrix<double, 6, 20> face_nn_row(const TetMesh& mesh, int tet, int face, const Vec3& n1,
                                         const Vec3& n2, const PolyVec& q, int deg_q) {
    const auto local = local_face(mesh, tet, face);
    const double area = mesh.face_area(face);
    const auto w6 = nn_weights(n1, n2);
    Eigen::Matrix<double, 6, 20> row = Eigen::Matrix<double, 6, 20>::Zero();
    const auto& tri = mono_exps(3, 3);
    for (std::size_t b = 0; b < tri.size(); ++b) {
        Exps tetexp{0, 0, 0, 0};
        for (int i = 0; i < 3; ++i)
            tetexp[static_cast<std::size_t>(local[static_cast<std::size_t>(i)])] =
                tri[b][static_cast<std::size_t>(i)];
        PolyVec mono = PolyVec::Zero(static_cast<Eigen::Index>(tri.size()));
        mono[static_cast<Eigen::Index>(b)] = 1;
        const double mom = face_moment(mono, 3, q, deg_q, area);
        if (mom == 0.0) continue;
        const int col = mono_index(4, 3, tetexp);
        for (int c = 0; c < 6; ++c) row(c, col) += w6[c] * mom;
    }
    return row;
}

} // namespace

DofRow dof_row(const TetMesh& mesh, const DofFunctional& dof) {
    DofRow row;
    switch (dof.kind) {
        case DofFunctional::Kind::VertexValue: {
            for (const auto& side : dof.sides) {
                DofRow::Block blk;
                blk.element = side.element;
                blk.w.setZero();
                Exps a{0, 0, 0, 0};
                a[static_cast<std::size_t>(local_vertex(mesh, side.element, dof.vertex))] = 3;
                blk.w(dof.component, mono_index(4, 3, a)) = side.weight;
                row.blocks.push_back(blk);
            }
            break;
        }
        case DofFunctional::Kind::FaceNN: {
            const Vec3 n = mesh.face_normal(dof.face);
            PolyVec one = PolyVec::Ones(1);
            for (const auto& side : dof.sides) {
                DofRow::Block blk;
                blk.element = side.element;
                blk.w = side.weight * face_nn_row(mesh, side.element, dof.face, n, n, one, 0);
                row.blocks.push_back(blk);
            }
            break;
        }
        case DofFunctional::Kind::FaceTangential: {
            const NedelecBasis nb = nedelec_face_basis(face_geometry(mesh, dof.face));
            const auto& q = nb.fields[static_cast<std::size_t>(dof.basis_index)]; // 3 x 6
            for (const auto& side : dof.sides) {
                DofRow::Block blk;
                blk.element = side.element;
                blk.w.setZero();
                const auto local = local_face(mesh, side.element, dof.face);
                const double area = mesh.face_area(dof.face);
                const auto& tri = mono_exps(3, 3);
                // (tau n) . q  with q tangential, so the projection is implicit
                const Vec3 n = mesh.face_normal(dof.face);
                for (std::size_t b = 0; b < tri.size(); ++b) {
                    Exps tetexp{0, 0, 0, 0};
                    for (int i = 0; i < 3; ++i)
                        tetexp[static_cast<std::size_t>(local[static_cast<std::size_t>(i)])] =
                            tri[b][static_cast<std::size_t>(i)];
                    const int col = mono_index(4, 3, tetexp);
                    PolyVec mono = PolyVec::Zero(static_cast<Eigen::Index>(tri.size()));
                    mono[static_cast<Eigen::Index>(b)] = 1;
                    for (int r = 0; r < 3; ++r) {
                        const double mom = face_moment(mono, 3, q.row(r).transpose(), 2, area);
                        if (mom == 0.0) continue;
                        for (int k = 0; k < 3; ++k)
                            blk.w(sym_index(r, k), col) += side.weight * n[k] * mom;
                    }
                }
                row.blocks.push_back(blk);
            }
            break;
        }
        case DofFunctional::Kind::Interior: {
            const int a = dof.basis_index / 6;
            const int c = dof.basis_index % 6;
            DofRow::Block blk;
            blk.element = dof.tet;
            blk.w.setZero();
            const double vol = mesh.tet_volume(dof.tet);
            const auto& e3 = mono_exps(4, 3);
            for (int m = 0; m < kTetP3; ++m) {
                Exps s = e3[static_cast<std::size_t>(m)];
                s[static_cast<std::size_t>(a)] += 1;
                blk.w(c, m) = kCompWeight[c] * exact_simplex_integral(s, 4, vol);
            }
            row.blocks.push_back(blk);
            break;
        }
        case DofFunctional::Kind::EdgeNN:
        case DofFunctional::Kind::EdgeCrossNN: {
            const auto w6 = nn_weights(dof.n1, dof.n2);
            const double len = mesh.edge_length(dof.edge);
            for (const auto& side : dof.sides) {
                DofRow::Block blk;
                blk.element = side.element;
                blk.w.setZero();
                const auto local = local_edge(mesh, side.element, dof.edge);
                const auto& seg = mono_exps(2, 3);
                for (std::size_t b = 0; b < seg.size(); ++b) {
                    Exps tetexp{0, 0, 0, 0};
                    tetexp[static_cast<std::size_t>(local[0])] = seg[b][0];
                    tetexp[static_cast<std::size_t>(local[1])] = seg[b][1];
                    const int col = mono_index(4, 3, tetexp);
                    // q = endpoint hat function: add one to its exponent
                    Exps s = seg[b];
                    s[static_cast<std::size_t>(dof.basis_index)] += 1;
                    const double mom = exact_simplex_integral(s, 2, len);
                    for (int c = 0; c < 6; ++c) blk.w(c, col) += side.weight * w6[c] * mom;
                }
                row.blocks.push_back(blk);
            }
            break;
        }
    }
    return row;
}

double eval_dof(const TetMesh& mesh, const DofFunctional& dof, const std::vector<SymTensorPoly>& tau) {
    const DofRow row = dof_row(mesh, dof);
    double s = 0;
    for (const auto& blk : row.blocks) {
        if (blk.element < 0 || blk.element >= static_cast<int>(tau.size()))
            throw ElementError(ElementError::Code::MissingElementData, "eval_dof: element data missing");
        s += blk.w.cwiseProduct(tau[static_cast<std::size_t>(blk.element)].coeffs).sum();
    }
    return s;
}

double eval_dof_field(const TetMesh& mesh, const DofFunctional& dof,
                      const std::function<Mat3(const Vec3&)>& sigma) {
    switch (dof.kind) {
        case DofFunctional::Kind::VertexValue: {
            const Mat3 S = sigma(mesh.vertices[static_cast<std::size_t>(dof.vertex)]);
            return sym_pack(S)[dof.component];
        }
        case DofFunctional::Kind::FaceNN:
        case DofFunctional::Kind::FaceTangential: {
            const QuadratureRule rule = quadrature_rule(2, 10);
            const FaceGeometry geom = face_geometry(mesh, dof.face);
            const Vec3 n = geom.normal;
            NedelecBasis nb;
            if (dof.kind == DofFunctional::Kind::FaceTangential) nb = nedelec_face_basis(geom);
            double s = 0;
            for (std::size_t i = 0; i < rule.points.size(); ++i) {
                const Vec3 lam(rule.points[i][0], rule.points[i][1], rule.points[i][2]);
                const Vec3 p = geom.point(lam);
                const Mat3 S = sigma(p);
                double val;
                if (dof.kind == DofFunctional::Kind::FaceNN) {
                    val = n.dot(S * n);
                } else {
                    const Vec3 q = nb.eval(dof.basis_index, lam);
                    val = (S * n).dot(q);
                }
                s += rule.weights[i] * val;
            }
            return s * geom.area / 0.5;
        }
        case DofFunctional::Kind::Interior: {
            const QuadratureRule rule = quadrature_rule(3, 10);
            const TetGeometry geom = tet_geometry(mesh, dof.tet);
            const int a = dof.basis_index / 6;
            const int c = dof.basis_index % 6;
            double s = 0;
            for (std::size_t i = 0; i < rule.points.size(); ++i) {
                const Eigen::Vector4d lam = rule.points[i];
                const Mat3 S = sigma(geom.point(lam));
                s += rule.weights[i] * lam[a] * kCompWeight[c] * sym_pack(S)[c];
            }
            return s * geom.volume / (1.0 / 6.0);
        }
        case DofFunctional::Kind::EdgeNN:
        case DofFunctional::Kind::EdgeCrossNN: {
            const QuadratureRule rule = quadrature_rule(1, 10);
            const auto& ev = mesh.edges[static_cast<std::size_t>(dof.edge)].v;
            const Vec3 a = mesh.vertices[ev[0]], b = mesh.vertices[ev[1]];
            const double len = (b - a).norm();
            double s = 0;
            for (std::size_t i = 0; i < rule.points.size(); ++i) {
                const double l0 = rule.points[i][0], l1 = rule.points[i][1];
                const Vec3 p = l0 * a + l1 * b;
                const Mat3 S = sigma(p);
                const double q = dof.basis_index == 0 ? l0 : l1;
                s += rule.weights[i] * dof.n1.dot(S * dof.n2) * q;
            }
            return s * len;
        }
    }
    return 0;
}

} // namespace elastix
