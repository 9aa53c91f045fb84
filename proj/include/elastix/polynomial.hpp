#pragma once

#include "elastix/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <initializer_list>
#include <vector>

namespace elastix {

class ElementError : public std::runtime_error {
public:
    enum class Code { UnsupportedDegree, MissingElementData, RankFailure };
    ElementError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

// ---------------------------------------------------------------------------
// Homogeneous barycentric monomials.
//
// A polynomial of degree <= d on a simplex with nv vertices is represented by
// its unique homogeneous expansion in the monomials lambda^alpha, |alpha| = d.
// Monomials are ordered lexicographically descending in (a0,...,a_{nv-1});
// exponent tuples are padded to length 4.
// ---------------------------------------------------------------------------

using Exps = std::array<int, 4>;

int mono_count(int nvars, int degree);
const std::vector<Exps>& mono_exps(int nvars, int degree);
int mono_index(int nvars, int degree, const Exps& e);

/// Exact moment of a barycentric monomial over a simplex:
/// integral of lambda^a = (prod a_i!) * dim! / (|a| + dim)! * measure,
/// where dim + 1 = number of exponents.
double exact_simplex_integral(std::initializer_list<int> exps, double measure);
double exact_simplex_integral(const Exps& exps, int nvars, double measure);

// Dense homogeneous polynomials: coefficient vectors against mono_exps.
using PolyVec = Eigen::VectorXd;

PolyVec poly_mul(int nvars, int deg_a, const PolyVec& a, int deg_b, const PolyVec& b);
double poly_eval(int nvars, int degree, const PolyVec& coeffs, const double* lambda);
double poly_integral(int nvars, int degree, const PolyVec& coeffs, double measure);

/// Raises the homogeneous degree by one using sum(lambda) = 1.
PolyVec poly_raise(int nvars, int degree, const PolyVec& coeffs);

// ---------------------------------------------------------------------------
// Simplex geometry caches
// ---------------------------------------------------------------------------

struct TetGeometry {
    std::array<Vec3, 4> x;
    double volume = 0;                  // positive
    std::array<Vec3, 4> grad_lambda{};  // constant barycentric gradients

    Vec3 point(const Eigen::Vector4d& lambda) const;
    Eigen::Vector4d barycentric(const Vec3& p) const;
    double diameter() const;
};

TetGeometry tet_geometry(const std::array<Vec3, 4>& x);
TetGeometry tet_geometry(const TetMesh& mesh, int k);

struct FaceGeometry {
    std::array<Vec3, 3> x;
    double area = 0;
    Vec3 normal;    // unit, from the stored vertex order
    Vec3 e1, e2;    // orthonormal tangent frame
    Vec3 centroid;

    Vec3 point(const Vec3& lambda) const;
};

FaceGeometry face_geometry(const std::array<Vec3, 3>& x);
FaceGeometry face_geometry(const TetMesh& mesh, int f);

// ---------------------------------------------------------------------------
// Quadrature (conical-product Gauss rules; degree <= 10)
// ---------------------------------------------------------------------------

struct QuadratureRule {
    int dim = 0;
    int degree = 0;
    std::vector<Eigen::Vector4d> points; // barycentric, trailing entries zero
    std::vector<double> weights;         // sum to the reference measure 1/dim!
};

QuadratureRule quadrature_rule(int dim, int degree);

} // namespace elastix
