// operators.hpp — Dense complex operators on composite spaces: ladder/Pauli
// builders, embeddings, displacement operators, partial trace.

#pragma once

#include <complex>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "etsim/space.hpp"

namespace etsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Square dense operator tagged with the space it lives on. Entries are
// dimensionless; energies are expressed in units of omega0 throughout.
struct Operator {
    SpaceSpec space;
    Matrix matrix;

    Operator() = default;
    Operator(SpaceSpec s, Matrix m);

    int dim() const { return static_cast<int>(matrix.rows()); }
    Operator adjoint() const { return Operator(space, matrix.adjoint()); }
    bool is_hermitian(double tol = 1e-12) const;
};

// Density matrix with Hermiticity/trace contracts checked at construction.
// The positivity contract (min eigenvalue >= -1e-8) is O(d^3) and checked
// separately via validate_positivity().
struct DensityMatrix {
    SpaceSpec space;
    Matrix matrix;

    DensityMatrix() = default;
    DensityMatrix(SpaceSpec s, Matrix m);

    int dim() const { return static_cast<int>(matrix.rows()); }
    double trace_real() const { return matrix.trace().real(); }
    double min_eigenvalue() const;
    void validate_positivity(double tol = 1e-8) const;

    static DensityMatrix pure(const SpaceSpec& s, const Vector& psi);
};

struct FockOps {
    Operator a;
    Operator a_dag;
    Operator n;
};

// Ladder operators on a single truncated mode: a[m, m+1] = sqrt(m+1).
FockOps fock_ops(int n_c);

struct PauliOps {
    Operator sx;
    Operator sy;
    Operator sz;
    Operator sp;
    Operator sm;
};

// Pauli operators in the basis {|up> = |D>, |down> = |A>}, sz|up> = +|up>.
PauliOps pauli_ops();

Operator identity_op(const SpaceSpec& space);

// Tensor-embed a single-factor operator at position `site` of `space`.
Operator embed(const Operator& op, int site, const SpaceSpec& space);

// Displacement operator exp(alpha a^dag - alpha^* a) on a truncated mode,
// evaluated by eigendecomposition of the Hermitian generator. Truncation
// degrades unitarity once |alpha| approaches sqrt(n_c); a warning is emitted
// when |alpha|^2 > n_c/4.
Operator displacement(Complex alpha, int n_c);

// Reduced density matrix on the kept factors (order preserved).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<int>& keep);

// Same reduction applied to a raw matrix on `space`; used for operators and
// for states mid-evolution where the DensityMatrix contracts are checked later.
Matrix partial_trace_matrix(const Matrix& m, const SpaceSpec& space, const std::set<int>& keep);

// Kronecker product helper matching the SpaceSpec index convention.
Matrix kron(const Matrix& a, const Matrix& b);

// Expectation value <op> = tr(op rho), real part (op assumed Hermitian).
double expectation(const Operator& op, const DensityMatrix& rho);

// Warning sink: messages about regimes where results degrade (truncation,
// perturbative-limit violations). Defaults to stderr; tests may redirect.
void warn(const std::string& message);
void set_warning_handler(void (*handler)(const std::string&));

}  // namespace etsim
