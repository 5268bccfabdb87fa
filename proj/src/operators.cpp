#include "etsim/operators.hpp"

#include <cmath>
#include <iostream>

namespace etsim {

namespace {

void (*g_warning_handler)(const std::string&) = nullptr;

}  // namespace

void warn(const std::string& message) {
    if (g_warning_handler != nullptr) {
        g_warning_handler(message);
    } else {
        std::cerr << "[etsim warning] " << message << "\n";
    }
}

void set_warning_handler(void (*handler)(const std::string&)) {
    g_warning_handler = handler;
}

Operator::Operator(SpaceSpec s, Matrix m) : space(std::move(s)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols()) {
        throw std::invalid_argument("Operator: matrix must be square");
    }
    if (matrix.rows() != space.dim()) {
        throw std::invalid_argument("Operator: matrix dimension " +
                                    std::to_string(matrix.rows()) +
                                    " does not match space dimension " +
                                    std::to_string(space.dim()));
    }
}

bool Operator::is_hermitian(double tol) const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() < tol;
}

DensityMatrix::DensityMatrix(SpaceSpec s, Matrix m) : space(std::move(s)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != space.dim()) {
        throw std::invalid_argument("DensityMatrix: dimension mismatch with space");
    }
    const double herm_dev = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > 1e-10) {
        throw std::invalid_argument("DensityMatrix: not Hermitian, max deviation " +
                                    std::to_string(herm_dev));
    }
    const double tr_dev = std::abs(matrix.trace() - Complex(1.0, 0.0));
    if (tr_dev > 1e-9) {
        throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                    std::to_string(tr_dev));
    }
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate_positivity(double tol) const {
    const double lo = min_eigenvalue();
    if (lo < -tol) {
        throw std::invalid_argument("DensityMatrix: min eigenvalue " + std::to_string(lo) +
                                    " below -" + std::to_string(tol));
    }
}

DensityMatrix DensityMatrix::pure(const SpaceSpec& s, const Vector& psi) {
    if (psi.size() != s.dim()) {
        throw std::invalid_argument("DensityMatrix::pure: vector dimension mismatch");
    }
    const double nrm = psi.norm();
    if (nrm <= 0.0) {
        throw std::invalid_argument("DensityMatrix::pure: zero vector");
    }
    Vector u = psi / nrm;
    return DensityMatrix(s, u * u.adjoint());
}

FockOps fock_ops(int n_c) {
    if (n_c < 2) {
        throw std::invalid_argument("fock_ops: n_c must be >= 2, got " + std::to_string(n_c));
    }
    SpaceSpec space({Factor::boson(n_c)});
    Matrix a = Matrix::Zero(n_c, n_c);
    for (int m = 0; m + 1 < n_c; ++m) {
        a(m, m + 1) = std::sqrt(static_cast<double>(m + 1));
    }
    Matrix adag = a.adjoint();
    return FockOps{Operator(space, a), Operator(space, adag), Operator(space, adag * a)};
}

PauliOps pauli_ops() {
    SpaceSpec space({Factor::qubit()});
    Matrix sx(2, 2), sy(2, 2), sz(2, 2), sp(2, 2), sm(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, Complex(0, -1), Complex(0, 1), 0;
    sz << 1, 0, 0, -1;
    sp << 0, 1, 0, 0;
    sm << 0, 0, 1, 0;
    return PauliOps{Operator(space, sx), Operator(space, sy), Operator(space, sz),
                    Operator(space, sp), Operator(space, sm)};
}

Operator identity_op(const SpaceSpec& space) {
    return Operator(space, Matrix::Identity(space.dim(), space.dim()));
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Operator embed(const Operator& op, int site, const SpaceSpec& space) {
    if (site < 0 || site >= space.num_factors()) {
        throw std::out_of_range("embed: factor index " + std::to_string(site) +
                                " out of range");
    }
    if (op.dim() != space.factor(site).dim()) {
        throw std::invalid_argument("embed: operator dimension " + std::to_string(op.dim()) +
                                    " does not match factor dimension " +
                                    std::to_string(space.factor(site).dim()));
    }
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < space.num_factors(); ++i) {
        if (i == site) {
            out = kron(out, op.matrix);
        } else {
            const int d = space.factor(i).dim();
            out = kron(out, Matrix::Identity(d, d));
        }
    }
    return Operator(space, std::move(out));
}

Operator displacement(Complex alpha, int n_c) {
    if (n_c < 2) {
        throw std::invalid_argument("displacement: n_c must be >= 2");
    }
    if (std::norm(alpha) > static_cast<double>(n_c) / 4.0) {
        warn("displacement: |alpha|^2 = " + std::to_string(std::norm(alpha)) +
             " exceeds n_c/4 = " + std::to_string(n_c / 4.0) +
             "; truncation degrades unitarity");
    }
    FockOps f = fock_ops(n_c);
    // alpha a^dag - alpha^* a is anti-Hermitian; exponentiate i K with
    // Hermitian K = -i (alpha a^dag - alpha^* a).
    Matrix gen = alpha * f.a_dag.matrix - std::conj(alpha) * f.a.matrix;
    Matrix k = Complex(0, -1) * gen;
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    Vector phases(n_c);
    for (int i = 0; i < n_c; ++i) {
        phases(i) = std::exp(Complex(0, 1) * es.eigenvalues()(i));
    }
    Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return Operator(f.a.space, std::move(u));
}

Matrix partial_trace_matrix(const Matrix& m, const SpaceSpec& space, const std::set<int>& keep) {
    if (keep.empty()) {
        throw std::invalid_argument("partial_trace: keep set must be nonempty");
    }
    for (int k : keep) {
        if (k < 0 || k >= space.num_factors()) {
            throw std::out_of_range("partial_trace: factor index " + std::to_string(k) +
                                    " out of range");
        }
    }
    std::vector<int> kept, traced;
    for (int i = 0; i < space.num_factors(); ++i) {
        if (keep.count(i)) {
            kept.push_back(i);
        } else {
            traced.push_back(i);
        }
    }

    int kept_dim = 1;
    for (int i : kept) kept_dim *= space.factor(i).dim();
    int traced_dim = 1;
    for (int i : traced) traced_dim *= space.factor(i).dim();

    // Full index = sum over kept and traced factor indices with the original
    // strides; enumerate (kept row, kept col, traced diagonal) triples.
    std::vector<int> kept_strides(kept.size()), traced_strides(traced.size());
    for (std::size_t i = 0; i < kept.size(); ++i) kept_strides[i] = space.stride(kept[i]);
    for (std::size_t i = 0; i < traced.size(); ++i) traced_strides[i] = space.stride(traced[i]);

    auto offset = [&](const std::vector<int>& strides, const std::vector<int>& sites, int packed) {
        int off = 0;
        for (int i = static_cast<int>(sites.size()) - 1; i >= 0; --i) {
            const int d = space.factor(sites[static_cast<std::size_t>(i)]).dim();
            off += (packed % d) * strides[static_cast<std::size_t>(i)];
            packed /= d;
        }
        return off;
    };

    Matrix out = Matrix::Zero(kept_dim, kept_dim);
    for (int r = 0; r < kept_dim; ++r) {
        const int row_off = offset(kept_strides, kept, r);
        for (int c = 0; c < kept_dim; ++c) {
            const int col_off = offset(kept_strides, kept, c);
            Complex sum = 0.0;
            for (int t = 0; t < traced_dim; ++t) {
                const int t_off = offset(traced_strides, traced, t);
                sum += m(row_off + t_off, col_off + t_off);
            }
            out(r, c) = sum;
        }
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<int>& keep) {
    Matrix reduced = partial_trace_matrix(rho.matrix, rho.space, keep);
    std::vector<Factor> kept_factors;
    for (int i = 0; i < rho.space.num_factors(); ++i) {
        if (keep.count(i)) kept_factors.push_back(rho.space.factor(i));
    }
    return DensityMatrix(SpaceSpec(kept_factors), std::move(reduced));
}

double expectation(const Operator& op, const DensityMatrix& rho) {
    if (op.dim() != rho.dim()) {
        throw std::invalid_argument("expectation: dimension mismatch");
    }
    return (op.matrix * rho.matrix).trace().real();
}

}  // namespace etsim
