#include "etsim/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etsim {

DensityMatrix thermal_state(double n0, int n_c) {
    if (n0 < 0.0) throw std::invalid_argument("thermal_state: n0 must be >= 0");
    if (n_c < 2) throw std::invalid_argument("thermal_state: n_c must be >= 2");
    SpaceSpec space({Factor::boson(n_c)});
    Matrix rho = Matrix::Zero(n_c, n_c);
    if (n0 == 0.0) {
        rho(0, 0) = 1.0;
        return DensityMatrix(space, rho);
    }
    const double q = n0 / (1.0 + n0);
    const double tail = std::pow(q, n_c);
    if (tail > 1e-6) {
        warn("thermal_state: truncated tail weight " + std::to_string(tail) +
             " exceeds 1e-6 at n_c = " + std::to_string(n_c));
    }
    double norm = 0.0;
    for (int n = 0; n < n_c; ++n) {
        const double p = std::pow(q, n) / (1.0 + n0);
        rho(n, n) = p;
        norm += p;
    }
    rho /= norm;
    return DensityMatrix(space, rho);
}

DensityMatrix displaced_thermal(double n0, Complex alpha, int n_c) {
    DensityMatrix th = thermal_state(n0, n_c);
    Operator u = displacement(alpha, n_c);
    Matrix rho = u.matrix * th.matrix * u.matrix.adjoint();
    rho = 0.5 * (rho + rho.adjoint().eval());
    return DensityMatrix(th.space, std::move(rho));
}

Vector dicke_state(int n, int m) {
    if (n < 1 || m < 0 || m > n) {
        throw std::invalid_argument("dicke_state: need N >= 1 and 0 <= m <= N");
    }
    const int dim = 1 << n;
    Vector v = Vector::Zero(dim);
    int count = 0;
    for (int mask = 0; mask < dim; ++mask) {
        // bit i set <=> qubit i down (local index 1); m up-spins means n - m set bits
        int ups = 0;
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1 << (n - 1 - i)))) ++ups;
        }
        if (ups == m) {
            v(mask) = 1.0;
            ++count;
        }
    }
    v /= std::sqrt(static_cast<double>(count));
    return v;
}

Vector boson_w_state(int n, int n_t) {
    if (n < 1) throw std::invalid_argument("boson_w_state: need N >= 1");
    if (n_t < 2) throw std::invalid_argument("boson_w_state: need n_t >= 2");
    long long dim = 1;
    for (int i = 0; i < n; ++i) dim *= n_t;
    Vector v = Vector::Zero(dim);
    long long stride = dim / n_t;  // stride of mode 0
    for (int i = 0; i < n; ++i) {
        v(stride) = 1.0 / std::sqrt(static_cast<double>(n));
        stride /= n_t;
    }
    // mode i has one quantum: index 1 * n_t^{n-1-i}; the loop above walks them
    return v;
}

Vector ghz_state(int n2, int sign) {
    if (n2 < 1) throw std::invalid_argument("ghz_state: need at least one qubit");
    if (sign != 1 && sign != -1) throw std::invalid_argument("ghz_state: sign must be +-1");
    const int dim = 1 << n2;
    Vector v = Vector::Zero(dim);
    v(0) = 1.0 / std::sqrt(2.0);
    v(dim - 1) = sign / std::sqrt(2.0);
    return v;
}

TargetState TargetState::dicke(int n, int m) {
    return TargetState{Kind::DickeSpin, dicke_state(n, m),
                       "W_" + std::to_string(n) + "^" + std::to_string(m)};
}

TargetState TargetState::boson_w(int n, int n_t) {
    return TargetState{Kind::BosonW, boson_w_state(n, n_t),
                       "boson W_" + std::to_string(n)};
}

TargetState TargetState::ghz(int n2, int sign) {
    return TargetState{Kind::GHZ, ghz_state(n2, sign),
                       std::string("GHZ") + (sign > 0 ? "+" : "-") + std::to_string(n2)};
}

TargetState TargetState::custom(Vector v, std::string label) {
    const double nrm = v.norm();
    if (nrm <= 0.0) throw std::invalid_argument("TargetState::custom: zero vector");
    return TargetState{Kind::Custom, v / nrm, std::move(label)};
}

double fidelity(const Matrix& rho, const Vector& psi) {
    if (rho.rows() != psi.size()) {
        throw std::invalid_argument("fidelity: dimension mismatch (rho " +
                                    std::to_string(rho.rows()) + ", target " +
                                    std::to_string(psi.size()) + ")");
    }
    const double f = std::real(Complex(psi.dot(rho * psi)));
    return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const TargetState& target) {
    return fidelity(rho.matrix, target.vector);
}

double population_overlap(const Matrix& rho, const Vector& psi) {
    if (rho.rows() != psi.size()) {
        throw std::invalid_argument("population_overlap: dimension mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        const double pop = std::max(0.0, rho(i, i).real());
        sum += std::sqrt(pop * std::norm(psi(i)));
    }
    return std::clamp(sum * sum, 0.0, 1.0);
}

DensityMatrix build_initial(const InitialStateSpec& spec, const ETParams& p,
                            const SpaceSpec& space, double g_sign) {
    p.validate();
    if (spec.boson_n0 < 0.0) throw std::invalid_argument("build_initial: n0 must be >= 0");
    if (space.num_factors() < 2 || space.factor(0).kind != Factor::Kind::Qubit ||
        space.factor(1).kind != Factor::Kind::Boson) {
        throw std::invalid_argument(
            "build_initial: space must be laid out as [Qubit, Boson, targets...]");
    }

    Matrix control = Matrix::Zero(2, 2);
    control(spec.control == Branch::Donor ? 0 : 1, spec.control == Branch::Donor ? 0 : 1) = 1.0;

    const double alpha =
        (spec.control == Branch::Donor ? -0.5 : 0.5) * g_sign * p.g_tilde();
    DensityMatrix boson = displaced_thermal(spec.boson_n0, alpha, space.factor(1).dim());

    Matrix rho = kron(control, boson.matrix);

    const int n_targets = space.num_factors() - 2;
    if (spec.target_init == InitialStateSpec::TargetInit::Custom &&
        static_cast<int>(spec.custom_targets.size()) != n_targets) {
        throw std::invalid_argument("build_initial: custom target list length mismatch");
    }
    for (int t = 0; t < n_targets; ++t) {
        const Factor& f = space.factor(2 + t);
        Matrix factor_rho;
        switch (spec.target_init) {
            case InitialStateSpec::TargetInit::AllDown: {
                if (f.kind != Factor::Kind::Qubit) {
                    throw std::invalid_argument("build_initial: AllDown requires qubit targets");
                }
                factor_rho = Matrix::Zero(2, 2);
                factor_rho(1, 1) = 1.0;
                break;
            }
            case InitialStateSpec::TargetInit::AllVacuum: {
                if (f.kind != Factor::Kind::Boson) {
                    throw std::invalid_argument("build_initial: AllVacuum requires boson targets");
                }
                factor_rho = Matrix::Zero(f.dim(), f.dim());
                factor_rho(0, 0) = 1.0;
                break;
            }
            case InitialStateSpec::TargetInit::Custom: {
                factor_rho = spec.custom_targets[static_cast<std::size_t>(t)];
                if (factor_rho.rows() != f.dim() || factor_rho.cols() != f.dim()) {
                    throw std::invalid_argument("build_initial: custom target " +
                                                std::to_string(t) + " has wrong dimension");
                }
                break;
            }
        }
        rho = kron(rho, factor_rho);
    }
    rho = 0.5 * (rho + rho.adjoint().eval());
    return DensityMatrix(space, std::move(rho));
}

CollectiveSpinOps collective_spin_ops(int n) {
    if (n < 1) throw std::invalid_argument("collective_spin_ops: need N >= 1");
    std::vector<Factor> factors(static_cast<std::size_t>(n), Factor::qubit());
    SpaceSpec space(factors);
    auto pauli = pauli_ops();
    const int d = space.dim();
    Matrix jx = Matrix::Zero(d, d), jy = Matrix::Zero(d, d), jz = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        jx += 0.5 * embed(pauli.sx, i, space).matrix;
        jy += 0.5 * embed(pauli.sy, i, space).matrix;
        jz += 0.5 * embed(pauli.sz, i, space).matrix;
    }
    Matrix jsq = jx * jx + jy * jy + jz * jz;
    return CollectiveSpinOps{Operator(space, jx), Operator(space, jy), Operator(space, jz),
                             Operator(space, jsq)};
}

}  // namespace etsim
