#include "elastix/solver.hpp"

#include "elastix/util.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>

namespace elastix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCompWeight[6] = {1, 1, 1, 2, 2, 2};

/// Compliance action on packed components with the : inner product folded in:
/// (A sigma : tau) = sigma_packed^T Acomp tau_packed.
Eigen::Matrix<double, 6, 6> compliance_comp_matrix(const ComplianceTensor& A) {
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
    const double k1 = 1.0 / (2 * A.mu);
    const double k2 = A.lambda / (2 * A.mu * (3 * A.lambda + 2 * A.mu));
    for (int c = 0; c < 6; ++c) M(c, c) = k1 * kCompWeight[c];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) M(r, c) -= k2;
    return M;
}

/// Reference moment matrices (unit measure): M(i,j) = integral of the i-th
/// times j-th monomial.
Eigen::MatrixXd moment_matrix(int deg_a, int deg_b) {
    const auto& ea = mono_exps(4, deg_a);
    const auto& eb = mono_exps(4, deg_b);
    Eigen::MatrixXd M(static_cast<Eigen::Index>(ea.size()), static_cast<Eigen::Index>(eb.size()));
    for (std::size_t i = 0; i < ea.size(); ++i)
        for (std::size_t j = 0; j < eb.size(); ++j) {
            Exps s;
            for (int v = 0; v < 4; ++v)
                s[static_cast<std::size_t>(v)] =
                    ea[i][static_cast<std::size_t>(v)] + eb[j][static_cast<std::size_t>(v)];
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                exact_simplex_integral(s, 4, 1.0);
        }
    return M;
}

/// comp-major flattening of a 6 x 20 coefficient block: flat[c*20+m]
Eigen::VectorXd flatten_block(const Eigen::Matrix<double, 6, 20>& C) {
    Eigen::VectorXd flat(120);
    for (int c = 0; c < 6; ++c)
        for (int m = 0; m < 20; ++m) flat[c * 20 + m] = C(c, m);
    return flat;
}

/// Divergence operator of one element as a 30 x 120 matrix: stress
/// coefficients (comp-major) to degree-2 vector coefficients (comp-major).
Eigen::MatrixXd divergence_matrix(const TetGeometry& geom) {
    const auto& e3 = mono_exps(4, 3);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(30, 120);
    for (int c = 0; c < 6; ++c)
        for (int m = 0; m < 20; ++m) {
            const int col = c * 20 + m;
            for (int r = 0; r < 3; ++r)
                for (int k = 0; k < 3; ++k) {
                    if (sym_index(r, k) != c) continue;
                    for (int v = 0; v < 4; ++v) {
                        const int av = e3[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)];
                        if (av == 0) continue;
                        Exps low = e3[static_cast<std::size_t>(m)];
                        low[static_cast<std::size_t>(v)] -= 1;
                        D(r * 10 + mono_index(4, 2, low), col) +=
                            av * geom.grad_lambda[static_cast<std::size_t>(v)][k];
                    }
                }
        }
    return D;
}

} // namespace

Mat3 ComplianceTensor::apply(const Mat3& sigma) const {
    return (sigma - lambda / (3 * lambda + 2 * mu) * sigma.trace() * Mat3::Identity()) / (2 * mu);
}

double ComplianceTensor::smallest_eigenvalue() const {
    // orthonormal basis of Sym: e1..e3 diag, off-diagonals scaled by 1/sqrt(2)
    Eigen::Matrix<double, 6, 6> M;
    for (int i = 0; i < 6; ++i) {
        Mat3 E = Mat3::Zero();
        if (i < 3)
            E(i, i) = 1;
        else {
            const int r = i == 3 ? 1 : 0;
            const int c = i == 3 ? 2 : (i == 4 ? 2 : 1);
            E(r, c) = E(c, r) = 1.0 / std::sqrt(2.0);
        }
        const Mat3 AE = apply(E);
        for (int j = 0; j < 6; ++j) {
            Mat3 F = Mat3::Zero();
            if (j < 3)
                F(j, j) = 1;
            else {
                const int r = j == 3 ? 1 : 0;
                const int c = j == 3 ? 2 : (j == 4 ? 2 : 1);
                F(r, c) = F(c, r) = 1.0 / std::sqrt(2.0);
            }
            M(i, j) = (AE.array() * F.array()).sum();
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(M);
    return es.eigenvalues().minCoeff();
}

SaddleSystem assemble(const TetMesh& mesh, const DiscreteSpace& space,
                      const ComplianceTensor& compliance,
                      const std::function<Vec3(const Vec3&)>& f, int displacement_degree) {
    SaddleSystem sys;
    sys.mesh = &mesh;
    sys.space = &space;
    sys.displacement_degree = displacement_degree;
    sys.compliance = compliance;
    const int ne = static_cast<int>(mesh.tets.size());
    const int nvm = mono_count(4, displacement_degree);
    sys.ns = 120 * ne;
    sys.nu = 3 * nvm * ne;
    sys.nc = space.constraints.rank();

    const Eigen::Matrix<double, 6, 6> Acomp = compliance_comp_matrix(compliance);
    const Eigen::MatrixXd M33 = moment_matrix(3, 3);
    const Eigen::MatrixXd Mv2 = moment_matrix(displacement_degree, 2);
    const QuadratureRule rule = quadrature_rule(3, 10);
    const auto& ev = mono_exps(4, displacement_degree);

    struct Local {
        std::vector<Eigen::Triplet<double>> a, b;
        Eigen::VectorXd load;
    };
    std::vector<Local> locals(static_cast<std::size_t>(ne));

    parallel_for(static_cast<std::size_t>(ne), [&](std::size_t k) {
        Local& loc = locals[k];
        const TetGeometry geom = tet_geometry(mesh, static_cast<int>(k));
        const double vol = geom.volume;
        const int s0 = static_cast<int>(k) * 120;
        const int u0 = static_cast<int>(k) * 3 * nvm;

        for (int c = 0; c < 6; ++c)
            for (int c2 = 0; c2 < 6; ++c2) {
                if (Acomp(c, c2) == 0.0) continue;
                for (int m = 0; m < 20; ++m)
                    for (int m2 = 0; m2 < 20; ++m2)
                        loc.a.emplace_back(s0 + c * 20 + m, s0 + c2 * 20 + m2,
                                           Acomp(c, c2) * M33(m, m2) * vol);
            }

        // B = (I3 (x) Mv3) * Div restricted to degree-2 divergence coefficients
        const Eigen::MatrixXd Div = divergence_matrix(geom);
        Eigen::MatrixXd Bk = Eigen::MatrixXd::Zero(3 * nvm, 120);
        for (int r = 0; r < 3; ++r)
            Bk.middleRows(r * nvm, nvm) = vol * Mv3.leftCols(10) * Div.middleRows(r * 10, 10);
        for (int i = 0; i < 3 * nvm; ++i)
            for (int j = 0; j < 120; ++j)
                if (Bk(i, j) != 0.0) loc.b.emplace_back(u0 + i, s0 + j, Bk(i, j));

        loc.load = Eigen::VectorXd::Zero(3 * nvm);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Eigen::Vector4d lam = rule.points[q];
            const Vec3 fx = f(geom.point(lam));
            const double w = rule.weights[q] * vol / (1.0 / 6.0);
            for (int m = 0; m < nvm; ++m) {
                double mono = 1;
                for (int v = 0; v < 4; ++v)
                    for (int p = 0; p < ev[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)]; ++p)
                        mono *= lam[v];
                for (int r = 0; r < 3; ++r) loc.load[r * nvm + m] += w * fx[r] * mono;
            }
        }
    });

    std::vector<Eigen::Triplet<double>> ta, tb, tc;
    sys.load = Eigen::VectorXd::Zero(sys.nu);
    for (std::size_t k = 0; k < locals.size(); ++k) {
        ta.insert(ta.end(), locals[k].a.begin(), locals[k].a.end());
        tb.insert(tb.end(), locals[k].b.begin(), locals[k].b.end());
        sys.load.segment(static_cast<Eigen::Index>(k) * 3 * nvm, 3 * nvm) = locals[k].load;
    }

    for (std::size_t r = 0; r < space.constraints.selected.size(); ++r) {
        const ConstraintRow& row =
            space.constraints.rows[static_cast<std::size_t>(space.constraints.selected[r])];
        for (const auto& blk : row)
            for (int c = 0; c < 6; ++c) {
                if (blk.cw[c] == 0.0) continue;
                for (int m = 0; m < 20; ++m) {
                    const double v = blk.cw[c] * blk.mv[m];
                    if (v != 0.0)
                        tc.emplace_back(static_cast<int>(r), blk.element * 120 + c * 20 + m, v);
                }
            }
    }

    sys.A.resize(sys.ns, sys.ns);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.resize(sys.nu, sys.ns);
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.C.resize(sys.nc, sys.ns);
    sys.C.setFromTriplets(tc.begin(), tc.end());
    return sys;
}

std::vector<SymTensorPoly> SolutionFields::stress_polys(const TetMesh& mesh) const {
    std::vector<SymTensorPoly> polys(mesh.tets.size());
    for (std::size_t k = 0; k < mesh.tets.size(); ++k)
        for (int c = 0; c < 6; ++c)
            for (int m = 0; m < 20; ++m)
                polys[k].coeffs(c, m) = stress[static_cast<Eigen::Index>(k * 120 + static_cast<std::size_t>(c * 20 + m))];
    return polys;
}

SolutionFields solve(const SaddleSystem& system) {
    const TetMesh& mesh = *system.mesh;
    const int ne = static_cast<int>(mesh.tets.size());
    const int nz = system.nu + system.nc;

    // per-element inverse of A: kron(Acomp, M33 vol) inverted exactly
    const Eigen::Matrix<double, 6, 6> Acomp = compliance_comp_matrix(system.compliance);
    const Eigen::Matrix<double, 6, 6> AcompInv = Acomp.inverse();
    const Eigen::MatrixXd M33 = moment_matrix(3, 3);
    const Eigen::MatrixXd M33Inv = M33.inverse();

    auto apply_ainv_block = [&](int k, const Eigen::MatrixXd& R) {
        // R: nrows x 120 (comp-major). A_k^{-1} = kron(AcompInv, M33Inv / vol)
        const double vol = mesh.tet_volume(k);
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(R.rows(), 120);
        for (int c = 0; c < 6; ++c)
            for (int c2 = 0; c2 < 6; ++c2) {
                if (AcompInv(c, c2) == 0.0) continue;
                out.middleCols(c * 20, 20) +=
                    (AcompInv(c, c2) / vol) * R.middleCols(c2 * 20, 20) * M33Inv;
            }
        return out;
    };

    // gather E = [B; C] rows per element
    std::vector<std::vector<std::pair<int, int>>> rows_by_elem(static_cast<std::size_t>(ne));
    // (global z row, dense slot) built lazily below
    Eigen::SparseMatrix<double, Eigen::RowMajor> Br = system.B;
    Eigen::SparseMatrix<double, Eigen::RowMajor> Cr = system.C;

    std::vector<std::vector<int>> elem_rows(static_cast<std::size_t>(ne));
    auto note_rows = [&](const Eigen::SparseMatrix<double, Eigen::RowMajor>& M, int offset) {
        for (int r = 0; r < M.rows(); ++r) {
            int last = -1;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(M, r); it; ++it) {
                const int k = static_cast<int>(it.col()) / 120;
                if (k != last) {
                    elem_rows[static_cast<std::size_t>(k)].push_back(offset + r);
                    last = k;
                }
            }
        }
    };
    note_rows(Br, 0);
    note_rows(Cr, system.nu);
    for (auto& v : elem_rows) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    auto z_row_segment = [&](int zrow, int k) {
        Eigen::RowVectorXd seg = Eigen::RowVectorXd::Zero(120);
        const auto& M = zrow < system.nu ? Br : Cr;
        const int r = zrow < system.nu ? zrow : zrow - system.nu;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(M, r); it; ++it) {
            const int col = static_cast<int>(it.col());
            if (col / 120 == k) seg(col % 120) = it.value();
        }
        return seg;
    };

    // Schur complement S = E A^{-1} E^T, assembled element by element
    std::vector<Eigen::Triplet<double>> ts;
    for (int k = 0; k < ne; ++k) {
        const auto& rows = elem_rows[static_cast<std::size_t>(k)];
        if (rows.empty()) continue;
        Eigen::MatrixXd R(static_cast<Eigen::Index>(rows.size()), 120);
        for (std::size_t i = 0; i < rows.size(); ++i)
            R.row(static_cast<Eigen::Index>(i)) = z_row_segment(rows[i], k);
        const Eigen::MatrixXd RA = apply_ainv_block(k, R);
        const Eigen::MatrixXd Sk = RA * R.transpose();
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows.size(); ++j)
                ts.emplace_back(rows[i], rows[j], Sk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    Eigen::SparseMatrix<double> S(nz, nz);
    S.setFromTriplets(ts.begin(), ts.end());

    Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
    g.head(system.nu) = system.load;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
    if (ldlt.info() != Eigen::Success)
        throw SolverError(SolverError::Code::SolveFailure, "Schur complement factorization failed");
    const Eigen::VectorXd z = ldlt.solve(-g);

    SolutionFields sol;
    sol.displacement = z.head(system.nu);
    sol.multipliers = z.tail(system.nc);

    // s = -A^{-1} (B^T u + C^T y)
    const Eigen::VectorXd Ets = system.B.transpose() * sol.displacement +
                                system.C.transpose() * sol.multipliers;
    sol.stress = Eigen::VectorXd::Zero(system.ns);
    for (int k = 0; k < ne; ++k) {
        Eigen::MatrixXd R = Ets.segment(k * 120, 120).transpose();
        sol.stress.segment(k * 120, 120) = -apply_ainv_block(k, R).transpose();
    }

    const Eigen::VectorXd r1 =
        system.A * sol.stress + system.B.transpose() * sol.displacement +
        system.C.transpose() * sol.multipliers;
    const Eigen::VectorXd r2 = system.B * sol.stress - system.load;
    const Eigen::VectorXd r3 = system.C * sol.stress;
    const double rnorm = std::sqrt(r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm());
    const double scale = std::max(system.load.norm(), 1e-300);
    sol.residual = system.load.norm() > 0 ? rnorm / scale : rnorm;
    if (sol.residual > 1e-10)
        throw SolverError(SolverError::Code::SolveFailure,
                          "KKT residual " + std::to_string(sol.residual) + " exceeds 1e-10");
    return sol;
}

ManufacturedCase manufactured_case(double lambda, double mu) {
    ManufacturedCase mc;
    mc.compliance = ComplianceTensor{lambda, mu};
    auto g = [](const Vec3& p) {
        return Vec3(std::sin(kPi * p.x()) * std::sin(kPi * p.y()) * std::sin(kPi * p.z()), 0, 0);
    };
    (void)g;
    auto grad_g = [](const Vec3& p) {
        const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
        const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
        const double sz = std::sin(kPi * p.z()), cz = std::cos(kPi * p.z());
        return Vec3(kPi * cx * sy * sz, kPi * sx * cy * sz, kPi * sx * sy * cz);
    };
    auto hess_g = [](const Vec3& p) {
        const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
        const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
        const double sz = std::sin(kPi * p.z()), cz = std::cos(kPi * p.z());
        Mat3 H;
        H(0, 0) = -kPi * kPi * sx * sy * sz;
        H(1, 1) = -kPi * kPi * sx * sy * sz;
        H(2, 2) = -kPi * kPi * sx * sy * sz;
        H(0, 1) = H(1, 0) = kPi * kPi * cx * cy * sz;
        H(0, 2) = H(2, 0) = kPi * kPi * cx * sy * cz;
        H(1, 2) = H(2, 1) = kPi * kPi * sx * cy * cz;
        return H;
    };

    mc.u = [](const Vec3& p) {
        const double v = std::sin(kPi * p.x()) * std::sin(kPi * p.y()) * std::sin(kPi * p.z());
        return Vec3(v, v, v);
    };
    mc.sigma = [lambda, mu, grad_g](const Vec3& p) {
        const Vec3 dg = grad_g(p);
        // grad u has identical rows dg; eps_ij = (dg_i + dg_j)/2
        Mat3 s;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s(i, j) = mu * (dg[i] + dg[j]);
        const double divu = dg.sum();
        for (int i = 0; i < 3; ++i) s(i, i) += lambda * divu;
        return s;
    };
    mc.f = [lambda, mu, hess_g](const Vec3& p) {
        const Mat3 H = hess_g(p);
        // f_i = mu (sum_j H_ij) + mu (tr H) + lambda (sum_k H_ki)
        Vec3 f;
        for (int i = 0; i < 3; ++i)
            f[i] = mu * H.row(i).sum() + mu * H.trace() + lambda * H.col(i).sum();
        return f;
    };
    return mc;
}

ErrorNorms error_norms(const TetMesh& mesh, const SolutionFields& solution,
                       const ManufacturedCase& exact) {
    const QuadratureRule rule = quadrature_rule(3, 10);
    const auto polys = solution.stress_polys(mesh);
    const int nvm = mono_count(4, solution.displacement.size() > 0
                                      ? (static_cast<int>(solution.displacement.size() /
                                                          (3 * mesh.tets.size())) == 10 ? 2 : 3)
                                      : 2);
    const auto& ev = mono_exps(4, 2);
    (void)ev;

    ErrorNorms err;
    for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
        const TetGeometry geom = tet_geometry(mesh, static_cast<int>(k));
        const auto div_coeffs = polys[k].divergence(geom);
        Eigen::Matrix<double, 3, 10> u_coeffs = Eigen::Matrix<double, 3, 10>::Zero();
        for (int r = 0; r < 3; ++r)
            for (int m = 0; m < nvm && m < 10; ++m)
                u_coeffs(r, m) =
                    solution.displacement[static_cast<Eigen::Index>(k) * 3 * nvm + r * nvm + m];

        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Eigen::Vector4d lam = rule.points[q];
            const Vec3 p = geom.point(lam);
            const double w = rule.weights[q] * geom.volume / (1.0 / 6.0);
            const Mat3 ds = polys[k].eval(lam) - exact.sigma(p);
            err.l2_stress += w * ds.squaredNorm();
            const Vec3 ddiv = eval_vec_p2(div_coeffs, lam) - exact.f(p);
            err.l2_div_stress += w * ddiv.squaredNorm();
            const Vec3 du = eval_vec_p2(u_coeffs, lam) - exact.u(p);
            err.l2_displacement += w * du.squaredNorm();
        }
    }
    err.l2_stress = std::sqrt(err.l2_stress);
    err.l2_div_stress = std::sqrt(err.l2_div_stress);
    err.l2_displacement = std::sqrt(err.l2_displacement);
    return err;
}

namespace {

/// Projects the broken operators onto the conforming basis.
struct ProjectedOperators {
    Eigen::MatrixXd X; // H(div) Gram on the basis
    Eigen::MatrixXd B; // nu x dim
    Eigen::SparseMatrix<double> M; // displacement mass
};

ProjectedOperators project_operators(const TetMesh& mesh, const DiscreteSpace& space,
                                     int displacement_degree) {
    const int ne = static_cast<int>(mesh.tets.size());
    const int dim = space.dim;
    const int nvm = mono_count(4, displacement_degree);
    const Eigen::MatrixXd M33 = moment_matrix(3, 3);
    const Eigen::MatrixXd M22 = moment_matrix(2, 2);
    const Eigen::MatrixXd Mv3 = moment_matrix(displacement_degree, 3);
    const Eigen::MatrixXd Mvv = moment_matrix(displacement_degree, displacement_degree);

    // per-element list of (basis index, coefficient block)
    std::vector<std::vector<std::pair<int, Eigen::Matrix<double, 6, 20>>>> by_elem(
        static_cast<std::size_t>(ne));
    for (std::size_t j = 0; j < space.basis.size(); ++j)
        for (const auto& blk : space.basis[j].blocks) {
            auto& list = by_elem[static_cast<std::size_t>(blk.element)];
            const Eigen::Matrix<double, 6, 20> C = blk.cw * blk.mv.transpose();
            bool merged = false;
            if (!list.empty() && list.back().first == static_cast<int>(j)) {
                list.back().second += C;
                merged = true;
            }
            if (!merged) list.emplace_back(static_cast<int>(j), C);
        }

    ProjectedOperators ops;
    ops.X = Eigen::MatrixXd::Zero(dim, dim);
    ops.B = Eigen::MatrixXd::Zero(3 * nvm * ne, dim);
    std::vector<Eigen::Triplet<double>> tm;

    for (int k = 0; k < ne; ++k) {
        const TetGeometry geom = tet_geometry(mesh, k);
        const double vol = geom.volume;
        const Eigen::MatrixXd Div = divergence_matrix(geom);
        const auto& list = by_elem[static_cast<std::size_t>(k)];

        std::vector<Eigen::Matrix<double, 3, 10>> divs(list.size());
        std::vector<Eigen::Matrix<double, 6, 20>> mcoef(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            Eigen::Map<const Eigen::VectorXd> flat(list[i].second.data(), 120);
            Eigen::VectorXd dv = Div * flat;
            divs[i] = Eigen::Map<Eigen::Matrix<double, 10, 3>>(dv.data()).transpose();
            mcoef[i] = list[i].second;
        }

        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = 0; j < list.size(); ++j) {
                double xij = 0;
                for (int c = 0; c < 6; ++c)
                    xij += kCompWeight[c] * vol *
                           (mcoef[i].row(c) * M33 * mcoef[j].row(c).transpose())(0, 0);
                for (int r = 0; r < 3; ++r)
                    xij += vol * (divs[i].row(r) * M22 * divs[j].row(r).transpose())(0, 0);
                ops.X(list[i].first, list[j].first) += xij;
            }

        for (std::size_t i = 0; i < list.size(); ++i)
            for (int r = 0; r < 3; ++r) {
                const Eigen::VectorXd col = vol * Mv3.leftCols(10) * divs[i].row(r).transpose();
                ops.B.block(k * 3 * nvm + r * nvm, list[i].first, nvm, 1) += col;
            }

        for (int r = 0; r < 3; ++r)
            for (int a = 0; a < nvm; ++a)
                for (int b = 0; b < nvm; ++b)
                    tm.emplace_back(k * 3 * nvm + r * nvm + a, k * 3 * nvm + r * nvm + b,
                                    vol * Mvv(a, b));
    }
    ops.M.resize(3 * nvm * ne, 3 * nvm * ne);
    ops.M.setFromTriplets(tm.begin(), tm.end());
    return ops;
}

} // namespace

double infsup_constant(const TetMesh& mesh, const DiscreteSpace& space, int displacement_degree) {
    const ProjectedOperators ops = project_operators(mesh, space, displacement_degree);
    Eigen::LLT<Eigen::MatrixXd> llt(ops.X);
    if (llt.info() != Eigen::Success)
        throw SolverError(SolverError::Code::EigensolveFailure, "H(div) Gram not positive definite");
    const Eigen::MatrixXd XiBt = llt.solve(ops.B.transpose());
    const Eigen::MatrixXd S = ops.B * XiBt;
    const Eigen::MatrixXd M = Eigen::MatrixXd(ops.M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M);
    if (es.info() != Eigen::Success)
        throw SolverError(SolverError::Code::EigensolveFailure, "generalized eigensolve failed");
    const double lmin = es.eigenvalues().minCoeff();
    return std::sqrt(std::max(lmin, 0.0));
}

KernelCheck kernel_div_check(const TetMesh& mesh, const DiscreteSpace& space) {
    const ProjectedOperators ops = project_operators(mesh, space, 2);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ops.B);
    lu.setThreshold(1e-10);
    const Eigen::MatrixXd kernel = lu.kernel();
    KernelCheck out;
    if (kernel.cols() == 1 && kernel.isZero(0)) return out;
    out.kernel_dim = static_cast<int>(kernel.cols());

    const QuadratureRule rule = quadrature_rule(3, 6);
    for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
        const auto tau = expand_coefficients(mesh, space, kernel.col(c));
        double max_div = 0, norm2 = 0;
        for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
            const TetGeometry geom = tet_geometry(mesh, static_cast<int>(k));
            const auto div_coeffs = tau[k].divergence(geom);
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double w = rule.weights[q] * geom.volume / (1.0 / 6.0);
                max_div = std::max(max_div,
                                   eval_vec_p2(div_coeffs, rule.points[q]).norm());
                norm2 += w * tau[k].eval(rule.points[q]).squaredNorm();
            }
        }
        out.max_relative_div = std::max(out.max_relative_div, max_div / std::sqrt(norm2));
    }
    return out;
}

} // namespace elastix
