#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "fracfem/reference_solution.hpp"
#include "fracfem/spectral_basis.hpp"

namespace fracfem {

/// Uniform mesh of (0,1) with N interior nodes x_k = k h, h = 1/(N+1).
class Mesh1D {
public:
    explicit Mesh1D(int interior_nodes);

    int interior() const noexcept { return N_; }
    double h() const noexcept { return 1.0 / (N_ + 1); }
    double node(int k) const noexcept { return k * h(); }

private:
    int N_;
};

/// Uniform N x N subdivision of the unit square, every small square split
/// along its (0,0)-(1,1) diagonal. Interior nodes (i h, j h), 1 <= i,j <= N-1,
/// stored row-major with i running slowest.
class Mesh2D {
public:
    explicit Mesh2D(int subdivisions);

    int subdivisions() const noexcept { return N_; }
    int per_axis() const noexcept { return N_ - 1; }
    int interior() const noexcept { return (N_ - 1) * (N_ - 1); }
    double h() const noexcept { return 1.0 / N_; }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i - 1) * (N_ - 1) + static_cast<std::size_t>(j - 1);
    }

private:
    int N_;
};

using Mesh = std::variant<Mesh1D, Mesh2D>;

int node_count(const Mesh& mesh);
double mesh_size(const Mesh& mesh);
Domain mesh_domain(const Mesh& mesh);

enum class SchemeKind { Galerkin, LumpedMass };

/// Continuous piecewise-linear function given by its interior nodal values.
struct NodalField {
    Mesh mesh;
    std::vector<double> values;

    NodalField(Mesh m, std::vector<double> v);
    static NodalField zero(const Mesh& m);
};

/// Symmetric or general tridiagonal matrix; lower[0] and upper[n-1] unused.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const noexcept { return diag.size(); }
    std::vector<double> apply(const std::vector<double>& x) const;
    /// Thomas algorithm; throws Error on a zero pivot.
    std::vector<double> solve(const std::vector<double>& rhs) const;
};

struct FemMatrices1D {
    Tridiagonal stiffness;
    Tridiagonal mass;
    std::vector<double> lumped_mass;
};

using Coefficient = std::function<double(double)>;

/// Matrices of a(u, v) = (k u', v') + (q u, v), the consistent mass and the
/// vertex-rule mass, with 3-point Gauss per element. Throws DomainError when k
/// is not positive at a quadrature point.
FemMatrices1D assemble_matrices(const Mesh1D& mesh, const Coefficient& k, const Coefficient& q);

/// Matrix-free operators on the interior nodes of a mesh (constant coefficients).
std::vector<double> apply_stiffness(const Mesh& mesh, const std::vector<double>& x);
std::vector<double> apply_mass(const Mesh& mesh, const std::vector<double>& x);
double lumped_weight(const Mesh& mesh);

/// Conjugate gradients for the SPD operator `op`; throws EvaluationError when
/// the relative residual does not reach `tol`.
std::vector<double> conjugate_gradient(const std::function<std::vector<double>(const std::vector<double>&)>& op,
                                       const std::vector<double>& rhs, double tol = 1e-13);

/// Value of the hat function of interior node k (1D) or (i, j) (2D) at a point.
double hat_value(const Mesh1D& mesh, int k, double x);
double hat_value(const Mesh2D& mesh, int i, int j, double x, double y);

/// Load vector (g, hat_k) for every interior node, exact for every profile kind.
std::vector<double> load_vector(const Mesh& mesh, const SpatialProfile& profile);

enum class Projection { SchemeDefault, L2 };

/// P_h g (Galerkin, or Projection::L2) or the lumped projection (LumpedMass).
NodalField project_source(const Mesh& mesh, SchemeKind scheme, const SpatialProfile& profile,
                          Projection projection = Projection::SchemeDefault);

/// Closed-form eigenpairs of the discrete Laplacian. 1D modes j = 1..N; 2D
/// (lumped only) modes (n, m) with 1 <= n, m <= N-1. Eigenvectors are
/// normalized in the scheme's inner product and evaluated on demand.
class DiscreteSpectrum {
public:
    DiscreteSpectrum(Mesh mesh, SchemeKind scheme);

    const Mesh& mesh() const noexcept { return mesh_; }
    SchemeKind scheme() const noexcept { return scheme_; }
    int modes_per_axis() const noexcept { return M_; }
    int mode_count() const;

    double eigenvalue(ModeIndex idx) const;
    /// Nodal value of the normalized eigenvector at node k (1D) or (i, j) (2D).
    double eigenvector_value(ModeIndex idx, int i, int j = 0) const;
    NodalField eigenvector(ModeIndex idx) const;

    /// Coefficients sum_k b_k phi_idx(x_k) for every mode, same layout as
    /// SpectralField with J = modes_per_axis().
    std::vector<double> analyze(const std::vector<double>& nodal) const;
    /// Nodal values of sum_idx c_idx phi_idx.
    std::vector<double> synthesize(const std::vector<double>& coeffs) const;

    /// Inner product of the scheme: consistent for Galerkin, vertex rule for lumped.
    std::vector<double> apply_scheme_mass(const std::vector<double>& x) const;

private:
    double scale(ModeIndex idx) const;

    Mesh mesh_;
    SchemeKind scheme_;
    int M_;
    std::vector<double> sines_;  // sin(pi a b / (M+1)) for a, b in [1, M]
};

/// Semidiscrete solution u_h(t) = sum_j mode_response(lambda_j^h, t) (f_h, phi_j)_* phi_j.
class SemidiscreteSolution {
public:
    SemidiscreteSolution(const DiscreteSpectrum& spectrum, FracOrder alpha, const SourceTerm& source,
                         Projection projection = Projection::SchemeDefault);

    NodalField at(double t) const;
    const std::vector<double>& source_coefficients() const noexcept { return coeffs_; }

private:
    const DiscreteSpectrum* spectrum_;
    Relaxation relax_;
    TimeProfile temporal_;
    std::vector<double> coeffs_;
    std::vector<double> lambdas_;
};

NodalField semidiscrete_solve(const DiscreteSpectrum& spectrum, FracOrder alpha, const SourceTerm& source,
                              double t, Projection projection = Projection::SchemeDefault);

/// Q_h chi from (grad Q_h chi, grad psi) = (chi, psi)_h - (chi, psi) for every hat psi.
NodalField quadrature_error_apply(const NodalField& chi);

/// Exact (chi, chi) and (grad chi, grad chi) of a finite element function.
double fe_l2_norm_squared(const NodalField& u);
double fe_h1_seminorm_squared(const NodalField& u);

}  // namespace fracfem
