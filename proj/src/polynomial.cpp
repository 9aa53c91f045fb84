#include "elastix/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace elastix {

namespace {

std::vector<Exps> enumerate_exps(int nvars, int degree) {
    std::vector<Exps> out;
    Exps e{0, 0, 0, 0};
    // lexicographic descending
    std::function<void(int, int)> rec = [&](int var, int rem) {
        if (var == nvars - 1) {
            e[static_cast<std::size_t>(var)] = rem;
            out.push_back(e);
            return;
        }
        for (int a = rem; a >= 0; --a) {
            e[static_cast<std::size_t>(var)] = a;
            rec(var + 1, rem - a);
        }
    };
    rec(0, degree);
    for (int v = nvars; v < 4; ++v)
        for (auto& ex : out) ex[static_cast<std::size_t>(v)] = 0;
    return out;
}

struct MonoTable {
    std::vector<Exps> exps;
    std::map<Exps, int> index;
};

const MonoTable& mono_table(int nvars, int degree) {
    static std::map<std::pair<int, int>, MonoTable> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(nvars, degree);
    auto it = cache.find(key);
    if (it == cache.end()) {
        MonoTable t;
        t.exps = enumerate_exps(nvars, degree);
        for (std::size_t i = 0; i < t.exps.size(); ++i) t.index[t.exps[i]] = static_cast<int>(i);
        it = cache.emplace(key, std::move(t)).first;
    }
    return it->second;
}

double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

int mono_count(int nvars, int degree) {
    return static_cast<int>(mono_exps(nvars, degree).size());
}

const std::vector<Exps>& mono_exps(int nvars, int degree) { return mono_table(nvars, degree).exps; }

int mono_index(int nvars, int degree, const Exps& e) {
    const auto& idx = mono_table(nvars, degree).index;
    auto it = idx.find(e);
    if (it == idx.end()) throw ElementError(ElementError::Code::MissingElementData, "bad multi-index");
    return it->second;
}

double exact_simplex_integral(const Exps& exps, int nvars, double measure) {
    const int dim = nvars - 1;
    int total = 0;
    double num = 1;
    for (int i = 0; i < nvars; ++i) {
        num *= factorial(exps[static_cast<std::size_t>(i)]);
        total += exps[static_cast<std::size_t>(i)];
    }
    return num * factorial(dim) / factorial(total + dim) * measure;
}

double exact_simplex_integral(std::initializer_list<int> exps, double measure) {
    Exps e{0, 0, 0, 0};
    int nv = 0;
    for (int a : exps) e[static_cast<std::size_t>(nv++)] = a;
    return exact_simplex_integral(e, nv, measure);
}

PolyVec poly_mul(int nvars, int deg_a, const PolyVec& a, int deg_b, const PolyVec& b) {
    const auto& ea = mono_exps(nvars, deg_a);
    const auto& eb = mono_exps(nvars, deg_b);
    PolyVec out = PolyVec::Zero(mono_count(nvars, deg_a + deg_b));
    for (std::size_t i = 0; i < ea.size(); ++i) {
        if (a[static_cast<Eigen::Index>(i)] == 0.0) continue;
        for (std::size_t j = 0; j < eb.size(); ++j) {
            if (b[static_cast<Eigen::Index>(j)] == 0.0) continue;
            Exps s;
            for (int v = 0; v < 4; ++v)
                s[static_cast<std::size_t>(v)] =
                    ea[i][static_cast<std::size_t>(v)] + eb[j][static_cast<std::size_t>(v)];
            out[mono_index(nvars, deg_a + deg_b, s)] +=
                a[static_cast<Eigen::Index>(i)] * b[static_cast<Eigen::Index>(j)];
        }
    }
    return out;
}

double poly_eval(int nvars, int degree, const PolyVec& coeffs, const double* lambda) {
    const auto& exps = mono_exps(nvars, degree);
    double s = 0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        double m = 1;
        for (int v = 0; v < nvars; ++v) {
            for (int p = 0; p < exps[i][static_cast<std::size_t>(v)]; ++p) m *= lambda[v];
        }
        s += coeffs[static_cast<Eigen::Index>(i)] * m;
    }
    return s;
}

double poly_integral(int nvars, int degree, const PolyVec& coeffs, double measure) {
    const auto& exps = mono_exps(nvars, degree);
    double s = 0;
    for (std::size_t i = 0; i < exps.size(); ++i)
        s += coeffs[static_cast<Eigen::Index>(i)] * exact_simplex_integral(exps[i], nvars, measure);
    return s;
}

PolyVec poly_raise(int nvars, int degree, const PolyVec& coeffs) {
    const auto& exps = mono_exps(nvars, degree);
    PolyVec out = PolyVec::Zero(mono_count(nvars, degree + 1));
    for (std::size_t i = 0; i < exps.size(); ++i) {
        if (coeffs[static_cast<Eigen::Index>(i)] == 0.0) continue;
        for (int v = 0; v < nvars; ++v) {
            Exps s = exps[i];
            s[static_cast<std::size_t>(v)] += 1;
            out[mono_index(nvars, degree + 1, s)] += coeffs[static_cast<Eigen::Index>(i)];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

TetGeometry tet_geometry(const std::array<Vec3, 4>& x) {
    TetGeometry g;
    g.x = x;
    Mat3 J;
    J.col(0) = x[1] - x[0];
    J.col(1) = x[2] - x[0];
    J.col(2) = x[3] - x[0];
    g.volume = J.determinant() / 6.0;
    Mat3 Jinv = J.inverse();
    // rows of J^{-1} are the gradients of lambda_1..lambda_3
    for (int i = 0; i < 3; ++i) g.grad_lambda[static_cast<std::size_t>(i + 1)] = Jinv.row(i);
    g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2] + g.grad_lambda[3]);
    return g;
}

TetGeometry tet_geometry(const TetMesh& mesh, int k) {
    const auto& t = mesh.tets[static_cast<std::size_t>(k)];
    return tet_geometry({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], mesh.vertices[t[3]]});
}

Vec3 TetGeometry::point(const Eigen::Vector4d& lambda) const {
    return lambda[0] * x[0] + lambda[1] * x[1] + lambda[2] * x[2] + lambda[3] * x[3];
}

Eigen::Vector4d TetGeometry::barycentric(const Vec3& p) const {
    Eigen::Vector4d l;
    for (int i = 1; i < 4; ++i) l[i] = grad_lambda[static_cast<std::size_t>(i)].dot(p - x[0]);
    l[0] = 1.0 - l[1] - l[2] - l[3];
    return l;
}

double TetGeometry::diameter() const {
    double h = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            h = std::max(h, (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]).norm());
    return h;
}

FaceGeometry face_geometry(const std::array<Vec3, 3>& x) {
    FaceGeometry g;
    g.x = x;
    Vec3 c = (x[1] - x[0]).cross(x[2] - x[0]);
    g.area = 0.5 * c.norm();
    g.normal = c.normalized();
    g.e1 = (x[1] - x[0]).normalized();
    g.e2 = g.normal.cross(g.e1);
    g.centroid = (x[0] + x[1] + x[2]) / 3.0;
    return g;
}

FaceGeometry face_geometry(const TetMesh& mesh, int f) {
    const auto& v = mesh.faces[static_cast<std::size_t>(f)].v;
    return face_geometry({mesh.vertices[v[0]], mesh.vertices[v[1]], mesh.vertices[v[2]]});
}

Vec3 FaceGeometry::point(const Vec3& lambda) const {
    return lambda[0] * x[0] + lambda[1] * x[1] + lambda[2] * x[2];
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace {

/// Gauss rule for weight u^a on [0,1]: Golub-Welsch on the Jacobi recurrence.
void gauss_jacobi01(int npts, int a, std::vector<double>& nodes, std::vector<double>& weights) {
    // Jacobi weight (1+x)^a on [-1,1], i.e. alpha = 0, beta = a.
    const double alpha = 0, beta = a;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
    for (int n = 0; n < npts; ++n) {
        const double den = (2 * n + alpha + beta) * (2 * n + alpha + beta + 2);
        double an = den == 0 ? (beta - alpha) / (alpha + beta + 2)
                             : (beta * beta - alpha * alpha) / den;
        J(n, n) = an;
        if (n + 1 < npts) {
            const double k = n + 1;
            const double num = 4 * k * (k + alpha) * (k + beta) * (k + alpha + beta);
            const double d1 = (2 * k + alpha + beta);
            const double bn2 = num / (d1 * d1 * (d1 + 1) * (d1 - 1));
            J(n, n + 1) = J(n + 1, n) = std::sqrt(bn2);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw ElementError(ElementError::Code::UnsupportedDegree, "Golub-Welsch eigensolve failed");
    // mu0 = int_{-1}^{1} (1+x)^a dx = 2^{a+1}/(a+1)
    const double mu0 = std::pow(2.0, a + 1) / (a + 1);
    nodes.resize(static_cast<std::size_t>(npts));
    weights.resize(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i) {
        const double x = es.eigenvalues()[i];
        const double w = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        // map to [0,1] with weight u^a: u = (1+x)/2, du = dx/2, (1+x)^a = (2u)^a
        nodes[static_cast<std::size_t>(i)] = (1 + x) / 2;
        weights[static_cast<std::size_t>(i)] = w / std::pow(2.0, a + 1);
    }
}

} // namespace

QuadratureRule quadrature_rule(int dim, int degree) {
    if (degree < 0 || degree > 10)
        throw ElementError(ElementError::Code::UnsupportedDegree,
                           "quadrature degree " + std::to_string(degree) + " not supported");
    if (dim < 1 || dim > 3)
        throw ElementError(ElementError::Code::UnsupportedDegree, "quadrature dim must be 1, 2 or 3");
    const int n = (degree + 2) / 2; // 2n-1 >= degree

    std::vector<double> x0, w0, x1, w1, x2, w2;
    gauss_jacobi01(n, 0, x0, w0);
    if (dim >= 2) gauss_jacobi01(n, 1, x1, w1);
    if (dim >= 3) gauss_jacobi01(n, 2, x2, w2);

    QuadratureRule rule;
    rule.dim = dim;
    rule.degree = degree;
    if (dim == 1) {
        for (int i = 0; i < n; ++i) {
            rule.points.push_back({1 - x0[static_cast<std::size_t>(i)], x0[static_cast<std::size_t>(i)], 0, 0});
            rule.weights.push_back(w0[static_cast<std::size_t>(i)]);
        }
    } else if (dim == 2) {
        // x = xi1, y = xi2 (1 - xi1); weight from the Jacobian (1 - xi1)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double xi1 = 1 - x1[static_cast<std::size_t>(i)]; // nodes of (1-u)^1 weight
                const double x = xi1;
                const double y = x0[static_cast<std::size_t>(j)] * (1 - xi1);
                rule.points.push_back({1 - x - y, x, y, 0});
                rule.weights.push_back(w1[static_cast<std::size_t>(i)] * w0[static_cast<std::size_t>(j)]);
            }
    } else {
        // x = xi1, y = xi2 (1-xi1), z = xi3 (1-xi1)(1-xi2); Jacobian (1-xi1)^2 (1-xi2)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double xi1 = 1 - x2[static_cast<std::size_t>(i)];
                    const double xi2 = 1 - x1[static_cast<std::size_t>(j)];
                    const double xi3 = x0[static_cast<std::size_t>(k)];
                    const double x = xi1;
                    const double y = xi2 * (1 - xi1);
                    const double z = xi3 * (1 - xi1) * (1 - xi2);
                    rule.points.push_back({1 - x - y - z, x, y, z});
                    rule.weights.push_back(w2[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)] *
                                           w0[static_cast<std::size_t>(k)]);
                }
    }
    return rule;
}

} // namespace elastix
