#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <string>
#include <vector>

namespace magbloch {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// Reduced flux p/q of the background field B0 = 2 pi p / q, with 0 <= p < q.
struct FluxRational {
    long p = 0;
    long q = 1;

    static FluxRational make(long p, long q);
    double B0() const;
    std::string str() const;
    bool operator==(const FluxRational& o) const { return p == o.p && q == o.q; }
};

// Parses "p/q" (or a bare integer) into canonical form.
FluxRational parse_flux(const std::string& text);

// Nearest rational B/(2 pi) ~ p/q with q <= max_denominator; throws ConfigError
// when the best candidate is farther than tol.
FluxRational snap_flux(double B, long max_denominator, double tol = 1e-9);

// One term c e^{i (n1 x1 + n2 x2)} of a 2 pi-periodic potential.
struct FourierTerm {
    int n1 = 0;
    int n2 = 0;
    cplx c{0.0, 0.0};
};

// V(x) = sum_n c_n e^{i n.x} + field . x, in macroscopic units x = eps * site.
struct PotentialSpec {
    std::vector<FourierTerm> bulk;
    Vec2 field = Vec2::Zero();

    void validate() const;
    bool has_bulk() const;
    bool has_field() const { return field.squaredNorm() > 0.0; }
    double value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    // The same potential expressed in coordinates mirrored along axis 1.
    PotentialSpec mirrored() const;

    // amp * cos(n.x + phase) as a Hermitian pair of terms.
    static PotentialSpec cosine(double amp, int n1, int n2, double phase);
    PotentialSpec operator+(const PotentialSpec& o) const;
};

enum class Boundary { magnetic_torus, open_box };

struct FiniteLattice {
    int L1 = 1;
    int L2 = 1;
    double B = 0.0;
    Boundary boundary = Boundary::magnetic_torus;
    double epsilon = 1.0;
    PotentialSpec potential;
    // Absolute coordinates of local site (0, 0); must be zero on the torus.
    int origin1 = 0;
    int origin2 = 0;

    void validate() const;
    long sites() const { return static_cast<long>(L1) * L2; }
    long index(int i1, int i2) const { return static_cast<long>(i2) * L1 + i1; }
};

// q x q Bloch symbol H0(k) of the Hofstadter model.
CMat bloch_matrix(const FluxRational& flux, const Vec2& k);
// Closed-form d H0 / d k_alpha, alpha in {0, 1}.
CMat bloch_derivative(const FluxRational& flux, const Vec2& k, int alpha);
// diag(1, e^{-i g1}, ..., e^{-i (q-1) g1}).
CMat tau(const FluxRational& flux, const Vec2& gstar);
// || H0(k + g*) - tau(-g*) H0(k) tau(g*) ||_F for g* in the dual lattice.
double tau_equivariance_residual(const FluxRational& flux, const Vec2& k, const Vec2& gstar);

// Symmetric-gauge magnetic Laplacian plus V(eps * site).
SpMat finite_hamiltonian(const FiniteLattice& lat);
CMat finite_hamiltonian_dense(const FiniteLattice& lat);
constexpr long kDenseSiteLimit = 10000;

// Dual magnetic translation by (g1, g2) on the torus.
SpMat dual_translation(const FiniteLattice& lat, int g1, int g2);
// max over the generators (q, 0), (0, 1) of ||[H, T~_g]||_F.
double dual_translation_residual(const FiniteLattice& lat);

}  // namespace magbloch
