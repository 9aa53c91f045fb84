#include "elastix/patch_tensors.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>

namespace elastix {

namespace {

constexpr double kPi = std::numbers::pi;

/// In-plane symmetric basis, orthonormal in Frobenius: u u^T, v v^T,
/// (u v^T + v u^T)/sqrt(2), with (u, v) an orthonormal frame of the plane
/// perpendicular to t.
struct PlaneBasis {
    Vec3 u, v;
    Mat3 B[3];
};

PlaneBasis plane_basis(const EdgePatch& patch) {
    PlaneBasis pb;
    pb.u = patch.n[0];
    pb.v = patch.tf[0];
    pb.B[0] = pb.u * pb.u.transpose();
    pb.B[1] = pb.v * pb.v.transpose();
    pb.B[2] = (pb.u * pb.v.transpose() + pb.v * pb.u.transpose()) / std::sqrt(2.0);
    return pb;
}

/// Face position jf separates blocks left(jf) and right(jf) = jf. Interior
/// edges: all positions 0..m-1 are interior faces (position 0 sits between
/// K_m and K_1); boundary edges: positions 1..m-1.
int left_block(const EdgePatch& patch, int jf) {
    const int m = patch.size();
    return jf == 0 ? m - 1 : jf - 1;
}

std::vector<int> interior_face_positions(const EdgePatch& patch) {
    std::vector<int> pos;
    const int m = patch.size();
    if (patch.interior)
        for (int j = 0; j < m; ++j) pos.push_back(j);
    else
        for (int j = 1; j < m; ++j) pos.push_back(j);
    return pos;
}

double cot(double x) { return std::cos(x) / std::sin(x); }

} // namespace

std::vector<PatchTensor> tt_e_basis(const EdgePatch& patch) {
    const int m = patch.size();
    const PlaneBasis pb = plane_basis(patch);
    const auto ifaces = interior_face_positions(patch);

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * ifaces.size()), 3 * m);
    for (std::size_t r = 0; r < ifaces.size(); ++r) {
        const int jf = ifaces[r];
        const int kl = left_block(patch, jf);
        const int kr = jf;
        const Vec3& n = patch.n[static_cast<std::size_t>(jf)];
        for (int i = 0; i < 3; ++i) {
            const Vec3 Bn = pb.B[i] * n;
            C(static_cast<Eigen::Index>(2 * r), 3 * kl + i) += pb.u.dot(Bn);
            C(static_cast<Eigen::Index>(2 * r), 3 * kr + i) -= pb.u.dot(Bn);
            C(static_cast<Eigen::Index>(2 * r + 1), 3 * kl + i) += pb.v.dot(Bn);
            C(static_cast<Eigen::Index>(2 * r + 1), 3 * kr + i) -= pb.v.dot(Bn);
        }
    }

    Eigen::MatrixXd null_basis;
    if (C.rows() == 0) {
        null_basis = Eigen::MatrixXd::Identity(3 * m, 3 * m);
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] > 1e-10 * sv[0]) ++rank;
        null_basis = svd.matrixV().rightCols(3 * m - rank);
    }

    std::vector<PatchTensor> basis;
    for (Eigen::Index c = 0; c < null_basis.cols(); ++c) {
        PatchTensor T;
        T.blocks.resize(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) {
            Mat3 S = Mat3::Zero();
            for (int i = 0; i < 3; ++i) S += null_basis(3 * k + i, c) * pb.B[i];
            T.blocks[static_cast<std::size_t>(k)] = S;
        }
        basis.push_back(std::move(T));
    }
    return basis;
}

std::vector<double> nn_values(const EdgePatch& patch, const PatchTensor& T) {
    const int m = patch.size();
    const int nfaces = patch.interior ? m : m + 1;
    std::vector<double> nn(static_cast<std::size_t>(nfaces));
    for (int j = 0; j < nfaces; ++j) {
        const int blk = std::min(j, m - 1);
        const Vec3& n = patch.n[static_cast<std::size_t>(j)];
        nn[static_cast<std::size_t>(j)] = n.dot(T.blocks[static_cast<std::size_t>(blk)] * n);
    }
    return nn;
}

double patch_tensor_norm(const PatchTensor& T) {
    double n = 0;
    for (const auto& b : T.blocks) n = std::max(n, b.norm());
    return n;
}

double tt_e_defect(const EdgePatch& patch, const PatchTensor& T) {
    double d = 0;
    for (const auto& b : T.blocks) {
        d = std::max(d, (b - b.transpose()).norm());
        d = std::max(d, (b * patch.t).norm());
    }
    for (int jf : interior_face_positions(patch)) {
        const Mat3& L = T.blocks[static_cast<std::size_t>(left_block(patch, jf))];
        const Mat3& R = T.blocks[static_cast<std::size_t>(jf)];
        d = std::max(d, ((L - R) * patch.n[static_cast<std::size_t>(jf)]).norm());
    }
    return d;
}

std::vector<double> even_constraint_coeffs(const EdgePatch& patch) {
    const int m = patch.size();
    if (!patch.interior || m % 2 != 0)
        throw PatchError(PatchError::Code::NotEvenInterior,
                         "even_constraint_coeffs needs an even interior patch");
    std::vector<double> c(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double prev = patch.theta[static_cast<std::size_t>((i - 1 + m) % m)];
        const double cur = patch.theta[static_cast<std::size_t>(i)];
        const double sign = (i + 1) % 2 == 0 ? 1.0 : -1.0; // (-1)^j with 1-based j
        c[static_cast<std::size_t>(i)] = sign * (cot(prev) + cot(cur));
    }
    return c;
}

double angle_identity_residual(const EdgePatch& patch, const PatchTensor& T, int j) {
    const Mat3& S = T.blocks[static_cast<std::size_t>(j)];
    const Vec3& nj = patch.n[static_cast<std::size_t>(j)];
    const Vec3& nj1 = patch.n[static_cast<std::size_t>(j + 1)];
    const Vec3& tj = patch.tf[static_cast<std::size_t>(j)];
    const Vec3& tj1 = patch.tf[static_cast<std::size_t>(j + 1)];
    const double th = patch.theta[static_cast<std::size_t>(j)];
    return (nj.dot(S * nj) - nj1.dot(S * nj1)) * cot(th) - (nj.dot(S * tj) + nj1.dot(S * tj1));
}

Mat3 sym_from_two_normals(const Vec3& n1, const Vec3& n2, const Vec3& t, const Vec3& l1,
                          const Vec3& l2) {
    const Vec3 t1 = n1.cross(t).normalized();
    const Vec3 t2 = n2.cross(t).normalized();
    const double sin_theta = t1.cross(t2).dot(t);
    const double cos_theta = t1.dot(t2);
    if (std::abs(sin_theta) < 1e-12)
        throw PatchError(PatchError::Code::ColinearNormals, "sym_from_two_normals: colinear normals");
    const double scale = std::max(l1.norm(), l2.norm());
    if (std::abs(l1.dot(n2) - l2.dot(n1)) > 1e-10 * std::max(scale, 1e-30))
        throw PatchError(PatchError::Code::IncompatibleData,
                         "sym_from_two_normals: l1.n2 != l2.n1");

    const double c = 0.5 * (l1.dot(n2) + l2.dot(n1));
    const double a = l1.dot(t2);
    const double b = l2.dot(t1);
    const double A = c * cos_theta + a * sin_theta;
    const double C = -c * sin_theta + a * cos_theta;
    const double B = (C * cos_theta - b) / sin_theta;
    return A * n1 * n1.transpose() + B * t1 * t1.transpose() +
           C * (n1 * t1.transpose() + t1 * n1.transpose());
}

PatchTensor nn_prescribed_tensor(const EdgePatch& patch, const std::vector<double>& nn) {
    const auto basis = tt_e_basis(patch);
    const int m = patch.size();
    const int nfaces = patch.interior ? m : m + 1;
    if (static_cast<int>(nn.size()) != nfaces)
        throw PatchError(PatchError::Code::InfeasiblePrescription, "nn prescription has wrong length");

    std::vector<int> rows;
    for (int j = 0; j < nfaces; ++j)
        if (!std::isnan(nn[static_cast<std::size_t>(j)])) rows.push_back(j);

    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(basis.size()));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rhs[static_cast<Eigen::Index>(r)] = nn[static_cast<std::size_t>(rows[r])];
        for (std::size_t bidx = 0; bidx < basis.size(); ++bidx)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(bidx)) =
                nn_values(patch, basis[bidx])[static_cast<std::size_t>(rows[r])];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd x = svd.solve(rhs);
    const double resid = (M * x - rhs).norm();
    if (resid > 1e-10 * std::max(1.0, rhs.norm()))
        throw PatchError(PatchError::Code::InfeasiblePrescription,
                         "nn prescription infeasible, residual " + std::to_string(resid));

    PatchTensor T;
    T.blocks.assign(static_cast<std::size_t>(m), Mat3::Zero());
    for (std::size_t bidx = 0; bidx < basis.size(); ++bidx)
        for (int k = 0; k < m; ++k)
            T.blocks[static_cast<std::size_t>(k)] +=
                x[static_cast<Eigen::Index>(bidx)] * basis[bidx].blocks[static_cast<std::size_t>(k)];
    return T;
}

namespace {

void require_nondegenerate_angles(const EdgePatch& patch) {
    for (double th : patch.theta)
        if (th < 1e-8 || th > kPi - 1e-8)
            throw PatchError(PatchError::Code::AssumptionViolated,
                             "dihedral angle too close to 0 or pi");
}

PatchTensor closed_form_interior(const EdgePatch& patch) {
    const int m = patch.size();
    require_nondegenerate_angles(patch);
    const double th0 = patch.theta[0];
    const double thm = patch.theta[static_cast<std::size_t>(m - 1)];

    // prescribed face data l_j = T n_j per face position (ring: l[m] = l[0])
    std::vector<Vec3> l(static_cast<std::size_t>(m + 1), Vec3::Zero());
    if (patch.kind == EdgeKind::InteriorOdd) {
        const double a1 = (cot(th0) - cot(thm)) / 2;
        const double a2 = (cot(th0) + cot(thm)) / 2;
        l[0] = patch.n[0] + a1 * patch.tf[0];
        double aj = a2;
        for (int j = 1; j < m; ++j) {
            l[static_cast<std::size_t>(j)] = aj * patch.tf[static_cast<std::size_t>(j)];
            aj = -aj;
        }
    } else if (patch.kind == EdgeKind::Singular) {
        const double a1 = cot(th0);
        l[0] = patch.n[0] + a1 * patch.tf[0];
        // alpha_2 = alpha_3 = alpha_4 = 0
    } else if (patch.kind == EdgeKind::InteriorEvenNonsingular) {
        const double th1 = patch.theta[1];
        const double s12 = std::sin(th0 + th1);
        if (std::abs(s12) < 1e-12)
            throw PatchError(PatchError::Code::AssumptionViolated,
                             "even construction degenerate: sin(theta_1 + theta_2) = 0");
        const double beta = std::sin(th1) * std::sin(th0 + thm) / (std::sin(thm) * s12);
        const double a2 = (1 - beta) * cot(th0);
        const double a3 = cot(thm);
        l[0] = patch.n[0];
        l[1] = beta * patch.n[1] + a2 * patch.tf[1];
        double aj = a3;
        for (int j = 2; j < m; ++j) {
            l[static_cast<std::size_t>(j)] = aj * patch.tf[static_cast<std::size_t>(j)];
            aj = -aj;
        }
    } else {
        throw PatchError(PatchError::Code::NotInterior, "closed form needs an interior patch");
    }
    l[static_cast<std::size_t>(m)] = l[0];

    PatchTensor T;
    T.blocks.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        T.blocks[static_cast<std::size_t>(j)] =
            sym_from_two_normals(patch.n[static_cast<std::size_t>(j)],
                                 patch.n[static_cast<std::size_t>(j + 1)], patch.t,
                                 l[static_cast<std::size_t>(j)], l[static_cast<std::size_t>(j + 1)]);
    return T;
}

} // namespace

PatchTensor nn_unit_tensor(const EdgePatch& patch, bool oracle) {
    if (!patch.interior)
        throw PatchError(PatchError::Code::NotInterior, "nn_unit_tensor needs an interior patch");
    const int m = patch.size();
    if (m < 3)
        throw PatchError(PatchError::Code::NotInterior, "nn_unit_tensor needs m >= 3");
    if (!oracle) return closed_form_interior(patch);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> nn(static_cast<std::size_t>(m), 0.0);
    nn[0] = 1.0;
    if (patch.kind == EdgeKind::InteriorEvenNonsingular) nn[1] = nan; // forced by the parity constraint
    return nn_prescribed_tensor(patch, nn);
}

PatchTensor nn_unit_tensor_boundary(const EdgePatch& patch, int face_pos) {
    if (patch.interior)
        throw PatchError(PatchError::Code::InfeasiblePrescription,
                         "nn_unit_tensor_boundary needs a boundary patch");
    std::vector<double> nn(static_cast<std::size_t>(patch.size() + 1), 0.0);
    nn.at(static_cast<std::size_t>(face_pos)) = 1.0;
    return nn_prescribed_tensor(patch, nn);
}

namespace {

PatchTensor rotate_back(const PatchTensor& T, int m, int start) {
    PatchTensor out;
    out.blocks.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        out.blocks[static_cast<std::size_t>((start + j) % m)] = T.blocks[static_cast<std::size_t>(j)];
    return out;
}

PatchTensor add(const PatchTensor& a, const PatchTensor& b) {
    PatchTensor out = a;
    for (std::size_t i = 0; i < out.blocks.size(); ++i) out.blocks[i] += b.blocks[i];
    return out;
}

} // namespace

PatchTensor nn_pair_tensor(const EdgePatch& patch, int pos) {
    const int m = patch.size();
    if (!patch.interior) {
        std::vector<double> nn(static_cast<std::size_t>(m + 1), 0.0);
        nn.at(static_cast<std::size_t>(pos)) = 1.0;
        nn.at(static_cast<std::size_t>(pos + 1)) = 1.0;
        return nn_prescribed_tensor(patch, nn);
    }
    pos = ((pos % m) + m) % m;
    const PatchTensor anchored = rotate_back(closed_form_interior(rotate_patch(patch, pos)), m, pos);
    if (patch.kind == EdgeKind::InteriorEvenNonsingular) {
        const auto nn = nn_values(patch, anchored);
        if (nn[static_cast<std::size_t>((pos + 1) % m)] <= 1e-12)
            throw PatchError(PatchError::Code::DegenerateCombination,
                             "nn_pair_tensor: beta not positive");
        return anchored;
    }
    const int pos2 = (pos + 1) % m;
    const PatchTensor anchored2 = rotate_back(closed_form_interior(rotate_patch(patch, pos2)), m, pos2);
    return add(anchored, anchored2);
}

// ---------------------------------------------------------------------------

EdgePatch make_synthetic_patch(bool interior, const std::vector<double>& theta,
                               std::mt19937_64& rng) {
    EdgePatch p;
    const int m = static_cast<int>(theta.size());
    p.interior = interior;
    p.theta = theta;
    p.kind = classify_edge(interior, theta);
    p.edge = -1;
    for (int j = 0; j <= m; ++j) p.faces.push_back(interior && j == m ? 0 : j);

    std::uniform_real_distribution<double> unit(-1, 1);
    Vec3 t;
    do {
        t = Vec3(unit(rng), unit(rng), unit(rng));
    } while (t.norm() < 0.1);
    t.normalize();
    Vec3 helper;
    do {
        helper = Vec3(unit(rng), unit(rng), unit(rng));
    } while (helper.cross(t).norm() < 0.1);
    p.t = t;

    Vec3 n = helper.cross(t).normalized();
    p.n.resize(static_cast<std::size_t>(m + 1));
    p.tf.resize(static_cast<std::size_t>(m + 1));
    for (int j = 0; j <= m; ++j) {
        p.n[static_cast<std::size_t>(j)] = n;
        p.tf[static_cast<std::size_t>(j)] = n.cross(t);
        if (j < m)
            n = std::cos(theta[static_cast<std::size_t>(j)]) * p.n[static_cast<std::size_t>(j)] -
                std::sin(theta[static_cast<std::size_t>(j)]) * p.tf[static_cast<std::size_t>(j)];
    }
    return p;
}

EdgePatch random_patch(EdgeKind kind, int m, std::mt19937_64& rng, double kappa) {
    std::uniform_real_distribution<double> angle(kappa, kPi - kappa);
    std::vector<double> theta(static_cast<std::size_t>(m));
    if (kind == EdgeKind::Singular) {
        const double t0 = angle(rng);
        theta = {t0, kPi - t0, t0, kPi - t0};
        return make_synthetic_patch(true, theta, rng);
    }
    if (kind == EdgeKind::Boundary) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            double sum = 0;
            for (auto& th : theta) {
                th = angle(rng);
                sum += th;
            }
            if (sum < 2 * kPi - 0.1) return make_synthetic_patch(false, theta, rng);
        }
        throw PatchError(PatchError::Code::AssumptionViolated, "boundary patch sampling failed");
    }
    // interior: rescale to sum 2 pi, keep margins, reject singular lookalikes
    for (int attempt = 0; attempt < 1000; ++attempt) {
        double sum = 0;
        for (auto& th : theta) {
            th = angle(rng);
            sum += th;
        }
        for (auto& th : theta) th *= 2 * kPi / sum;
        bool ok = true;
        for (double th : theta) ok = ok && th > kappa && th < kPi - kappa;
        if (!ok) continue;
        if (kind == EdgeKind::InteriorEvenNonsingular) {
            if (m % 2 != 0) throw PatchError(PatchError::Code::NotEvenInterior, "even kind needs even m");
            // keep the construction formulas well away from degeneracy
            if (std::abs(std::sin(theta[0] + theta[1])) < 0.05) continue;
            if (std::abs(std::sin(theta[0] + theta[static_cast<std::size_t>(m - 1)])) < 0.05) continue;
            if (classify_edge(true, theta) != EdgeKind::InteriorEvenNonsingular) continue;
        } else if (kind == EdgeKind::InteriorOdd && m % 2 == 0) {
            throw PatchError(PatchError::Code::NotInterior, "odd kind needs odd m");
        }
        return make_synthetic_patch(true, theta, rng);
    }
    throw PatchError(PatchError::Code::AssumptionViolated, "interior patch sampling failed");
}

} // namespace elastix
