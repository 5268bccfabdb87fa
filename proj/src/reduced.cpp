#include "etsim/reduced.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace etsim {

double franck_condon(int n, double g_tilde) {
    if (n < 0) {
        throw std::invalid_argument("franck_condon: n must be >= 0");
    }
    double log_fact = 0.0;
    for (int k = 2; k <= n; ++k) log_fact += std::log(static_cast<double>(k));
    if (g_tilde == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    return std::exp(n * std::log(std::abs(g_tilde)) - 0.5 * g_tilde * g_tilde - 0.5 * log_fact);
}

Complex effective_rabi(double v, double g_tilde, Complex matrix_element) {
    return -v * g_tilde * std::exp(-0.5 * g_tilde * g_tilde) * matrix_element;
}

double dicke_step_rabi(int n_targets, int step, double j, double g_tilde, int n_quanta) {
    if (step > n_targets || step < 0) {
        throw std::invalid_argument("dicke_step_rabi: step must satisfy 0 <= m <= N");
    }
    const double cap = static_cast<double>((n_targets - step) * (step + 1));
    return std::sqrt(cap) * j * franck_condon(n_quanta, g_tilde);
}

double w_state_aggregate_rabi(const std::vector<double>& j, double g_tilde, int n_quanta) {
    double sum_sq = 0.0;
    const double fc = franck_condon(n_quanta, g_tilde);
    for (double jk : j) {
        const double vk = jk * fc;
        sum_sq += vk * vk;
    }
    return std::sqrt(sum_sq);
}

Eigen::Matrix3d ReducedModel::m_matrix() const {
    Eigen::Matrix3d m;
    m << 0.0, -2.0 * v_e, 0.0,
         v_e, -g_prime() * gamma, -v_e,
         0.0, 2.0 * v_e, -gamma;
    return m;
}

ReducedTrajectory solve_reduced(const ReducedModel& rm, const std::array<double, 3>& rho0,
                                const std::vector<double>& times) {
    if (rho0[0] < -1e-12 || rho0[0] > 1.0 + 1e-12 || rho0[2] < -1e-12 || rho0[2] > 1.0 + 1e-12) {
        throw std::invalid_argument("solve_reduced: initial populations must lie in [0, 1]");
    }
    const Eigen::Matrix3d m = rm.m_matrix();
    const Eigen::Vector3d v0(rho0[0], rho0[1], rho0[2]);

    Eigen::EigenSolver<Eigen::Matrix3d> es(m);
    bool use_expm = es.info() != Eigen::Success;
    Eigen::Matrix3cd vecs;
    Eigen::Vector3cd vals;
    Eigen::Vector3cd coeffs;
    if (!use_expm) {
        vecs = es.eigenvectors();
        vals = es.eigenvalues();
        Eigen::FullPivLU<Eigen::Matrix3cd> lu(vecs);
        // Near gamma ~ 2 Ve the eigenvectors can collide; rcond guards that.
        if (!lu.isInvertible() || lu.rcond() < 1e-10) {
            use_expm = true;
        } else {
            coeffs = lu.solve(v0.cast<Complex>());
        }
    }

    ReducedTrajectory out;
    out.times = times;
    out.rho11.reserve(times.size());
    out.im_rho12.reserve(times.size());
    out.rho22.reserve(times.size());
    out.rho33.reserve(times.size());

    for (double t : times) {
        Eigen::Vector3d v;
        if (use_expm) {
            Eigen::Matrix3d mt = (m * t).exp();
            v = mt * v0;
        } else {
            Eigen::Vector3cd vc = Eigen::Vector3cd::Zero();
            for (int k = 0; k < 3; ++k) {
                vc += coeffs(k) * std::exp(vals(k) * t) * vecs.col(k);
            }
            v = vc.real();
        }
        const double p11 = v(0);
        const double p22 = v(2);
        const double p33 = 1.0 - p11 - p22;
        if (p11 < -1e-9 || p11 > 1.0 + 1e-9 || p22 < -1e-9 || p22 > 1.0 + 1e-9 ||
            p33 < -1e-9 || p33 > 1.0 + 1e-9) {
            out.clamped = true;
        }
        out.rho11.push_back(p11);
        out.im_rho12.push_back(v(1));
        out.rho22.push_back(p22);
        out.rho33.push_back(p33);
    }
    return out;
}

TransferAnalysis transfer_rate(const ReducedModel& rm) {
    if (rm.v_e <= 0.0 || rm.gamma <= 0.0) {
        throw std::invalid_argument("transfer_rate: requires Ve > 0 and gamma > 0");
    }
    Eigen::EigenSolver<Eigen::Matrix3d> es(rm.m_matrix());
    TransferAnalysis out;
    double max_re = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        out.eigenvalues[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        max_re = std::max(max_re, es.eigenvalues()(k).real());
    }
    out.lambda_tilde = max_re;
    return out;
}

std::vector<TransferScanPoint> transfer_rate_scan(double v_e, double gamma_over_ve_min,
                                                  double gamma_over_ve_max, int points) {
    if (points < 2 || gamma_over_ve_min <= 0.0 || gamma_over_ve_max <= gamma_over_ve_min) {
        throw std::invalid_argument("transfer_rate_scan: bad grid");
    }
    std::vector<TransferScanPoint> out;
    out.reserve(static_cast<std::size_t>(points));
    const double log_lo = std::log(gamma_over_ve_min);
    const double log_hi = std::log(gamma_over_ve_max);
    for (int i = 0; i < points; ++i) {
        const double r = std::exp(log_lo + (log_hi - log_lo) * i / (points - 1));
        ReducedModel rm{v_e, r * v_e, 1.0};
        out.push_back({r, std::abs(transfer_rate(rm).lambda_tilde)});
    }
    return out;
}

ReducedProjection project_full_state(const Matrix& rho_full, const Vector& s1, const Vector& s2,
                                     const Vector& s3) {
    const Vector* basis[3] = {&s1, &s2, &s3};
    for (int i = 0; i < 3; ++i) {
        if (basis[i]->size() != rho_full.rows()) {
            throw std::invalid_argument("project_full_state: basis dimension mismatch");
        }
        for (int j = 0; j < 3; ++j) {
            const Complex ov = basis[i]->dot(*basis[j]);
            const Complex want = (i == j) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
            if (std::abs(ov - want) > 1e-8) {
                throw std::invalid_argument("project_full_state: basis not orthonormal");
            }
        }
    }
    auto elem = [&](int i, int j) { return Complex(basis[i]->dot(rho_full * (*basis[j]))); };
    ReducedProjection p;
    p.rho11 = elem(0, 0).real();
    p.rho22 = elem(1, 1).real();
    p.rho33 = elem(2, 2).real();
    p.im_rho12 = elem(0, 1).imag();
    p.abs_rho13 = std::abs(elem(0, 2));
    p.abs_rho23 = std::abs(elem(1, 2));
    return p;
}

}  // namespace etsim
