#pragma once

#include "elastix/space.hpp"

#include <Eigen/Sparse>

#include <functional>

namespace elastix {

class SolverError : public std::runtime_error {
public:
    enum class Code { SolveFailure, EigensolveFailure };
    SolverError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

/// Isotropic compliance A sigma = (1/2mu)(sigma - lambda/(3lambda+2mu) tr(sigma) I).
struct ComplianceTensor {
    double lambda = 1.0;
    double mu = 1.0;

    Mat3 apply(const Mat3& sigma) const;
    /// Smallest eigenvalue of the operator on Sym (Frobenius inner product);
    /// positive for mu > 0, 3 lambda + 2 mu > 0.
    double smallest_eigenvalue() const;
};

/// Discrete mixed problem in the discontinuous representation: compliance
/// Gram A (block-diagonal per element), divergence coupling B, rank-reduced
/// continuity constraints C, and the load moments.
struct SaddleSystem {
    const TetMesh* mesh = nullptr;
    const DiscreteSpace* space = nullptr;
    int displacement_degree = 2;
    int ns = 0, nu = 0, nc = 0;
    Eigen::SparseMatrix<double> A; // ns x ns
    Eigen::SparseMatrix<double> B; // nu x ns
    Eigen::SparseMatrix<double> C; // nc x ns
    Eigen::VectorXd load;          // nu
    ComplianceTensor compliance;
};

SaddleSystem assemble(const TetMesh& mesh, const DiscreteSpace& space,
                      const ComplianceTensor& compliance,
                      const std::function<Vec3(const Vec3&)>& f, int displacement_degree = 2);

struct SolutionFields {
    Eigen::VectorXd stress;       // broken coefficients, 120 per element
    Eigen::VectorXd displacement; // 3 * mono_count(4, q) per element
    Eigen::VectorXd multipliers;
    double residual = 0; // relative KKT residual

    std::vector<SymTensorPoly> stress_polys(const TetMesh& mesh) const;
};

/// KKT solve: the SPD per-element A block is eliminated analytically and the
/// Schur complement on (u, multipliers) is factored sparsely. The contract is
/// the reported relative residual of the full KKT system (<= 1e-10).
SolutionFields solve(const SaddleSystem& system);

struct ManufacturedCase {
    std::function<Vec3(const Vec3&)> u;
    std::function<Mat3(const Vec3&)> sigma;
    std::function<Vec3(const Vec3&)> f; // = div sigma
    ComplianceTensor compliance;
};

/// u = sin(pi x) sin(pi y) sin(pi z) (1,1,1) on the unit cube,
/// sigma = 2 mu eps(u) + lambda div(u) I, f = div sigma.
ManufacturedCase manufactured_case(double lambda, double mu);

struct ErrorNorms {
    double l2_stress = 0;
    double l2_div_stress = 0;
    double l2_displacement = 0;
};

ErrorNorms error_norms(const TetMesh& mesh, const SolutionFields& solution,
                       const ManufacturedCase& exact);

/// beta_h = sqrt(lambda_min) of B X^{-1} B^T w = lambda M w over the
/// conforming basis, X = H(div) Gram, M = displacement mass matrix.
double infsup_constant(const TetMesh& mesh, const DiscreteSpace& space,
                       int displacement_degree = 2);

struct KernelCheck {
    int kernel_dim = 0;
    double max_relative_div = 0; // max over kernel vectors of |div|_inf / ||tau||_L2
};

/// Confirms that discretely divergence-free members of Sigma_h are pointwise
/// divergence-free (the K-ellipticity mechanism).
KernelCheck kernel_div_check(const TetMesh& mesh, const DiscreteSpace& space);

} // namespace elastix
