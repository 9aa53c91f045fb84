#include "elastix/space.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace elastix {

namespace {

Eigen::Matrix<double, 20, 1> mono_values(const Eigen::Vector4d& lambda) {
    const auto& exps = mono_exps(4, 3);
    Eigen::Matrix<double, 20, 1> mv;
    for (int m = 0; m < 20; ++m) {
        double val = 1;
        for (int v = 0; v < 4; ++v)
            for (int p = 0; p < exps[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)]; ++p)
                val *= lambda[v];
        mv[m] = val;
    }
    return mv;
}

/// P3 Lagrange nodes coincide with the monomial multi-indices: node s sits at
/// barycentric exps[s]/3. V maps monomial coefficients to node values.
const Eigen::Matrix<double, 20, 20>& lagrange_vandermonde_inverse() {
    static const Eigen::Matrix<double, 20, 20> Vinv = [] {
        const auto& exps = mono_exps(4, 3);
        Eigen::Matrix<double, 20, 20> V;
        for (int s = 0; s < 20; ++s) {
            Eigen::Vector4d lam;
            for (int v = 0; v < 4; ++v) lam[v] = exps[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)] / 3.0;
            V.row(s) = mono_values(lam).transpose();
        }
        return Eigen::Matrix<double, 20, 20>(V.inverse());
    }();
    return Vinv;
}

// node keys: (0, vertex, 0), (1, edge, pos), (2, face, 0)
using NodeKey = std::tuple<int, int, int>;

struct CandidateRow {
    ConstraintRow row;                              // coefficient representation
    NodeKey node;
    std::vector<std::pair<int, Eigen::Matrix<double, 6, 1>>> value_entries; // per element
};

struct NodeRecord {
    std::vector<std::pair<int, int>> slots; // (element, slot), ascending element order
    std::vector<int> row_ids;               // candidate rows at this node
};

} // namespace

double apply_constraint_row(const ConstraintRow& row, const std::vector<SymTensorPoly>& tau) {
    double s = 0;
    for (const auto& blk : row)
        s += blk.cw.dot(tau[static_cast<std::size_t>(blk.element)].coeffs * blk.mv);
    return s;
}

std::vector<SymTensorPoly> expand_basis_vector(const TetMesh& mesh, const BasisVector& v) {
    std::vector<SymTensorPoly> tau(mesh.tets.size());
    for (const auto& blk : v.blocks)
        tau[static_cast<std::size_t>(blk.element)].coeffs += blk.cw * blk.mv.transpose();
    return tau;
}

std::vector<SymTensorPoly> expand_coefficients(const TetMesh& mesh, const DiscreteSpace& space,
                                               const Eigen::VectorXd& coeffs) {
    std::vector<SymTensorPoly> tau(mesh.tets.size());
    for (std::size_t j = 0; j < space.basis.size(); ++j) {
        const double c = coeffs[static_cast<Eigen::Index>(j)];
        if (c == 0.0) continue;
        for (const auto& blk : space.basis[j].blocks)
            tau[static_cast<std::size_t>(blk.element)].coeffs += c * blk.cw * blk.mv.transpose();
    }
    return tau;
}

DiscreteSpace build_space(const TetMesh& mesh, const std::vector<EdgePatch>& patches) {
    (void)patches; // continuity is set by the mesh topology alone
    const int num_elems = static_cast<int>(mesh.tets.size());
    const auto& exps = mono_exps(4, 3);
    const auto& Vinv = lagrange_vandermonde_inverse();

    std::map<std::array<int, 2>, int> edge_ids;
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) edge_ids[mesh.edges[e].v] = static_cast<int>(e);
    std::map<std::array<int, 3>, int> face_ids;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) face_ids[mesh.faces[f].v] = static_cast<int>(f);

    // classify every (element, slot) to a global node
    auto slot_key = [&](int k, int s) -> NodeKey {
        const auto& t = mesh.tets[static_cast<std::size_t>(k)];
        const Exps& a = exps[static_cast<std::size_t>(s)];
        std::vector<int> support;
        for (int v = 0; v < 4; ++v)
            if (a[static_cast<std::size_t>(v)] > 0) support.push_back(v);
        if (support.size() == 1) return {0, t[static_cast<std::size_t>(support[0])], 0};
        if (support.size() == 2) {
            const int va = t[static_cast<std::size_t>(support[0])];
            const int vb = t[static_cast<std::size_t>(support[1])];
            const int heavy = a[static_cast<std::size_t>(support[0])] == 2 ? va : vb;
            std::array<int, 2> key{std::min(va, vb), std::max(va, vb)};
            return {1, edge_ids.at(key), heavy == key[0] ? 0 : 1};
        }
        std::array<int, 3> key{t[static_cast<std::size_t>(support[0])], t[static_cast<std::size_t>(support[1])],
                               t[static_cast<std::size_t>(support[2])]};
        std::sort(key.begin(), key.end());
        return {2, face_ids.at(key), 0};
    };

    std::map<NodeKey, NodeRecord> nodes;
    for (int k = 0; k < num_elems; ++k)
        for (int s = 0; s < 20; ++s) nodes[slot_key(k, s)].slots.emplace_back(k, s);

    std::vector<CandidateRow> candidates;

    // face rows: 10 nodes x 3 components per interior face
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        if (face.boundary()) continue;
        const Vec3 n = mesh.face_normal(static_cast<int>(f));
        const int t0 = face.tets[0], t1 = face.tets[1];
        const auto loc0 = local_face(mesh, t0, static_cast<int>(f));
        const auto loc1 = local_face(mesh, t1, static_cast<int>(f));
        const auto& tri = mono_exps(3, 3);
        for (std::size_t b = 0; b < tri.size(); ++b) {
            Eigen::Vector4d lam0 = Eigen::Vector4d::Zero(), lam1 = Eigen::Vector4d::Zero();
            Exps e0{0, 0, 0, 0};
            for (int i = 0; i < 3; ++i) {
                lam0[loc0[static_cast<std::size_t>(i)]] = tri[b][static_cast<std::size_t>(i)] / 3.0;
                lam1[loc1[static_cast<std::size_t>(i)]] = tri[b][static_cast<std::size_t>(i)] / 3.0;
                e0[static_cast<std::size_t>(loc0[static_cast<std::size_t>(i)])] =
                    tri[b][static_cast<std::size_t>(i)];
            }
            const NodeKey key = slot_key(t0, mono_index(4, 3, e0));
            const auto mv0 = mono_values(lam0);
            const auto mv1 = mono_values(lam1);
            for (int r = 0; r < 3; ++r) {
                Eigen::Matrix<double, 6, 1> cw = nn_weights(Vec3::Unit(r), n);
                CandidateRow cand;
                cand.node = key;
                cand.row.push_back({t0, cw, mv0});
                cand.row.push_back({t1, -cw, mv1});
                cand.value_entries.emplace_back(t0, cw);
                cand.value_entries.emplace_back(t1, -cw);
                candidates.push_back(std::move(cand));
            }
        }
    }

    // vertex rows: full tensor match over a spanning tree of each vertex star
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const auto& star = mesh.vertex_tets[v];
        const int d = static_cast<int>(star.size());
        if (d <= 1) continue;
        std::map<int, int> pos;
        for (int i = 0; i < d; ++i) pos[star[static_cast<std::size_t>(i)]] = i;
        std::vector<int> parent(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) parent[static_cast<std::size_t>(i)] = i;
        std::function<int(int)> find = [&](int a) {
            while (parent[static_cast<std::size_t>(a)] != a) {
                parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                a = parent[static_cast<std::size_t>(a)];
            }
            return a;
        };
        std::vector<std::pair<int, int>> tree;
        auto try_join = [&](int ka, int kb) {
            const int ra = find(pos.at(ka)), rb = find(pos.at(kb));
            if (ra == rb) return;
            parent[static_cast<std::size_t>(rb)] = ra;
            tree.emplace_back(ka, kb);
        };
        // prefer face adjacencies (ascending face id), then chain leftovers
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            const Face& face = mesh.faces[f];
            if (face.boundary()) continue;
            if (face.v[0] != static_cast<int>(v) && face.v[1] != static_cast<int>(v) &&
                face.v[2] != static_cast<int>(v))
                continue;
            try_join(face.tets[0], face.tets[1]);
        }
        for (int i = 1; i < d; ++i) try_join(star[0], star[static_cast<std::size_t>(i)]);

        for (const auto& [ka, kb] : tree) {
            Eigen::Vector4d lama = Eigen::Vector4d::Unit(local_vertex(mesh, ka, static_cast<int>(v)));
            Eigen::Vector4d lamb = Eigen::Vector4d::Unit(local_vertex(mesh, kb, static_cast<int>(v)));
            const auto mva = mono_values(lama);
            const auto mvb = mono_values(lamb);
            for (int c = 0; c < 6; ++c) {
                CandidateRow cand;
                cand.node = {0, static_cast<int>(v), 0};
                Eigen::Matrix<double, 6, 1> cw = Eigen::Matrix<double, 6, 1>::Unit(c);
                cand.row.push_back({ka, cw, mva});
                cand.row.push_back({kb, -cw, mvb});
                cand.value_entries.emplace_back(ka, cw);
                cand.value_entries.emplace_back(kb, -cw);
                candidates.push_back(std::move(cand));
            }
        }
    }

    for (std::size_t r = 0; r < candidates.size(); ++r)
        nodes[candidates[r].node].row_ids.push_back(static_cast<int>(r));

    // node-local rank reduction and kernel extraction
    DiscreteSpace space;
    space.constraints.rows.reserve(candidates.size());
    for (auto& cand : candidates) space.constraints.rows.push_back(cand.row);

    int total_rank = 0, total_kernel = 0;
    for (const auto& [key, rec] : nodes) {
        const int d = static_cast<int>(rec.slots.size());
        std::map<int, int> elem_pos;
        for (int i = 0; i < d; ++i) elem_pos[rec.slots[static_cast<std::size_t>(i)].first] = i;

        const int nrows = static_cast<int>(rec.row_ids.size());
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nrows, 6 * d);
        for (int r = 0; r < nrows; ++r)
            for (const auto& [elem, cw] : candidates[static_cast<std::size_t>(rec.row_ids[static_cast<std::size_t>(r)])].value_entries)
                M.block<1, 6>(r, 6 * elem_pos.at(elem)) += cw.transpose();

        int rank = 0;
        Eigen::MatrixXd kernel;
        if (nrows == 0) {
            kernel = Eigen::MatrixXd::Identity(6 * d, 6 * d);
        } else {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M.transpose());
            qr.setThreshold(1e-10);
            rank = static_cast<int>(qr.rank());
            std::vector<int> sel;
            for (int i = 0; i < rank; ++i) sel.push_back(qr.colsPermutation().indices()[i]);
            std::sort(sel.begin(), sel.end());
            for (int s : sel)
                space.constraints.selected.push_back(rec.row_ids[static_cast<std::size_t>(s)]);

            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            lu.setThreshold(1e-10);
            Eigen::MatrixXd raw = lu.kernel();
            if (static_cast<int>(lu.rank()) != rank)
                throw SpaceError(SpaceError::Code::RankFailure,
                                 "rank mismatch between QR and LU at a node");
            if (raw.cols() == 1 && raw.isZero(0)) {
                kernel = Eigen::MatrixXd::Zero(6 * d, 0);
            } else {
                Eigen::HouseholderQR<Eigen::MatrixXd> oqr(raw);
                kernel = Eigen::MatrixXd(oqr.householderQ()) .leftCols(raw.cols());
            }
        }
        total_rank += rank;
        total_kernel += static_cast<int>(kernel.cols());

        for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
            BasisVector bv;
            for (int i = 0; i < d; ++i) {
                Eigen::Matrix<double, 6, 1> cw = kernel.block<6, 1>(6 * i, c);
                if (cw.norm() < 1e-14) continue;
                Rank1Block blk;
                blk.element = rec.slots[static_cast<std::size_t>(i)].first;
                blk.cw = cw;
                blk.mv = Vinv.col(rec.slots[static_cast<std::size_t>(i)].second);
                bv.blocks.push_back(blk);
            }
            space.basis.push_back(std::move(bv));
        }
    }

    std::sort(space.constraints.selected.begin(), space.constraints.selected.end());
    space.dim = 120 * num_elems - total_rank;
    if (space.dim != total_kernel)
        throw SpaceError(SpaceError::Code::RankFailure, "kernel dimension does not match 120|K| - rank");
    return space;
}

Eigen::MatrixXd dof_matrix(const TetMesh& mesh, const DiscreteSpace& space,
                           const std::vector<DofFunctional>& dofs) {
    std::vector<std::vector<std::pair<int, const Rank1Block*>>> by_element(mesh.tets.size());
    for (std::size_t j = 0; j < space.basis.size(); ++j)
        for (const auto& blk : space.basis[j].blocks)
            by_element[static_cast<std::size_t>(blk.element)].emplace_back(static_cast<int>(j), &blk);

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dofs.size()),
                                              static_cast<Eigen::Index>(space.basis.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        const DofRow row = dof_row(mesh, dofs[i]);
        for (const auto& rb : row.blocks)
            for (const auto& [j, blk] : by_element[static_cast<std::size_t>(rb.element)])
                D(static_cast<Eigen::Index>(i), j) += blk->cw.dot(rb.w * blk->mv);
    }
    return D;
}

UnisolvenceReport verify_unisolvence(const TetMesh& mesh, const DiscreteSpace& space,
                                     const std::vector<DofFunctional>& dofs) {
    UnisolvenceReport rep;
    rep.dof_count = static_cast<int>(dofs.size());
    rep.space_dim = space.dim;
    rep.square = rep.dof_count == rep.space_dim;
    rep.counts = count_dofs(dofs);
    const Eigen::MatrixXd D = dof_matrix(mesh, space, dofs);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(D);
    const auto& sv = svd.singularValues();
    rep.sigma_max = sv.size() ? sv[0] : 0;
    rep.sigma_min = sv.size() ? sv[sv.size() - 1] : 0;
    rep.nonsingular = rep.square && rep.sigma_min > 1e-10 * rep.sigma_max;
    return rep;
}

namespace {

int face_position(const EdgePatch& patch, int face) {
    for (int j = 0; j < patch.size(); ++j)
        if (patch.faces[static_cast<std::size_t>(j)] == face) return j;
    throw SpaceError(SpaceError::Code::DegenerateCombination, "face not in patch ring");
}

/// lambda_a lambda_b (lambda_a - 1/3) as homogeneous degree-3 coefficients
Eigen::Matrix<double, 20, 1> edge_bubble_scalar(int a, int b) {
    PolyVec p2 = PolyVec::Zero(10);
    Exps ab{0, 0, 0, 0};
    ab[static_cast<std::size_t>(a)] += 1;
    ab[static_cast<std::size_t>(b)] += 1;
    p2[mono_index(4, 2, ab)] = 1;
    PolyVec p1 = PolyVec::Constant(4, -1.0 / 3.0);
    p1[a] += 1.0;
    return Eigen::Matrix<double, 20, 1>(poly_mul(4, 2, p2, 1, p1));
}

} // namespace

DualFaceBubble dual_face_bubble(const TetMesh& mesh, const std::vector<EdgePatch>& patches,
                                int face, int i) {
    const Face& F = mesh.faces[static_cast<std::size_t>(face)];
    const int K = F.tets[0];
    const auto& tet = mesh.tets[static_cast<std::size_t>(K)];

    const int x0 = F.v[static_cast<std::size_t>(i)]; // dual to lambda_{x0} on F
    int x2 = -1;                                     // vertex of K opposite F
    for (int v : tet)
        if (v != F.v[0] && v != F.v[1] && v != F.v[2]) x2 = v;
    std::vector<int> others;
    for (int v : F.v)
        if (v != x0) others.push_back(v);
    std::sort(others.begin(), others.end());
    const int x1 = others[0], x3 = others[1];

    // edges of K at x0: e1 = (x0,x1) in F, e2 = (x0,x2) out of F, e3 = (x0,x3) in F
    const std::array<int, 3> other_vertex = {x1, x2, x3};
    // faces of K used by the cancellation: F2 = face (the target), F3 opposite
    // x3, F1 opposite x1
    const int face_F2 = face;
    const int face_F3 = mesh.find_face(x0, x1, x2);
    const int face_F1 = mesh.find_face(x0, x2, x3);
    if (face_F3 < 0 || face_F1 < 0)
        throw SpaceError(SpaceError::Code::DegenerateCombination, "owner faces not found");

    struct Piece {
        const EdgePatch* patch;
        PatchTensor T;
        std::vector<double> nn; // by face position
    };
    std::array<Piece, 3> pieces;
    for (int s = 0; s < 3; ++s) {
        const int edge = mesh.find_edge(x0, other_vertex[static_cast<std::size_t>(s)]);
        if (edge < 0) throw SpaceError(SpaceError::Code::DegenerateCombination, "edge not found");
        const EdgePatch& patch = patches[static_cast<std::size_t>(edge)];
        const auto rep = check_assumption(patch, 1e-6);
        if (!rep.pass())
            throw SpaceError(SpaceError::Code::AssumptionViolated,
                             "edge patch fails the angle assumption");
        int pos = -1;
        for (int j = 0; j < patch.size(); ++j)
            if (patch.elements[static_cast<std::size_t>(j)] == K) pos = j;
        if (pos < 0) throw SpaceError(SpaceError::Code::DegenerateCombination, "element not in patch");
        Piece piece;
        piece.patch = &patch;
        piece.T = nn_pair_tensor(patch, pos);
        piece.nn = nn_values(patch, piece.T);
        pieces[static_cast<std::size_t>(s)] = std::move(piece);
    }

    auto nn_on = [&](int s, int f) {
        const Piece& p = pieces[static_cast<std::size_t>(s)];
        return p.nn[static_cast<std::size_t>(face_position(*p.patch, f))];
    };

    const double den_r1 = nn_on(1, face_F3);
    const double den_r2 = nn_on(2, face_F1);
    if (std::abs(den_r1) < 1e-12 || std::abs(den_r2) < 1e-12)
        throw SpaceError(SpaceError::Code::DegenerateCombination, "vanishing cancellation moment");
    const double r1 = nn_on(0, face_F3) / den_r1;
    const double r2 = nn_on(1, face_F1) / den_r2;
    const double D = nn_on(0, face_F2) + r1 * r2 * nn_on(2, face_F2);
    if (std::abs(D) < 1e-12)
        throw SpaceError(SpaceError::Code::DegenerateCombination, "vanishing dual moment");

    const std::array<double, 3> comb = {180.0 / D, -r1 * 180.0 / D, r1 * r2 * 180.0 / D};

    DualFaceBubble out;
    out.field.resize(mesh.tets.size());
    std::vector<char> touched(mesh.tets.size(), 0);
    for (int s = 0; s < 3; ++s) {
        const Piece& p = pieces[static_cast<std::size_t>(s)];
        for (int j = 0; j < p.patch->size(); ++j) {
            const int elem = p.patch->elements[static_cast<std::size_t>(j)];
            const int la = local_vertex(mesh, elem, x0);
            const int lb = local_vertex(mesh, elem, other_vertex[static_cast<std::size_t>(s)]);
            const auto scalar = edge_bubble_scalar(la, lb);
            out.field[static_cast<std::size_t>(elem)].coeffs +=
                comb[static_cast<std::size_t>(s)] *
                sym_pack(p.T.blocks[static_cast<std::size_t>(j)]) * scalar.transpose();
            touched[static_cast<std::size_t>(elem)] = 1;
        }
    }
    for (std::size_t k = 0; k < touched.size(); ++k)
        if (touched[k]) out.support.push_back(static_cast<int>(k));
    return out;
}

Interpolant canonical_interpolation(const std::function<Mat3(const Vec3&)>& sigma,
                                    const TetMesh& mesh, const std::vector<DofFunctional>& dofs,
                                    const DiscreteSpace& space) {
    if (static_cast<int>(dofs.size()) != space.dim)
        throw SpaceError(SpaceError::Code::SingularDofMatrix,
                         "canonical interpolation needs a square DoF system");
    Eigen::VectorXd d(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i)
        d[static_cast<Eigen::Index>(i)] = eval_dof_field(mesh, dofs[i], sigma);
    const Eigen::MatrixXd M = dof_matrix(mesh, space, dofs);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Interpolant out;
    out.coeffs = lu.solve(d);
    if ((M * out.coeffs - d).norm() > 1e-8 * std::max(1.0, d.norm()))
        throw SpaceError(SpaceError::Code::SingularDofMatrix, "DoF system solve failed");
    out.field = expand_coefficients(mesh, space, out.coeffs);
    return out;
}

} // namespace elastix
