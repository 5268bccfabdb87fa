// reduced.hpp — Analytical 3-level reduced model: populations rho11, rho22 and
// coherence Im[rho12] evolve under a 3x3 real matrix M, with rho33 carried as
// the complement. Covers effective Rabi frequencies, transfer-rate analysis,
// and projections of full-model states onto the reduced basis.

#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "etsim/operators.hpp"

namespace etsim {

// Franck-Condon overlap <n| U(-g~) |0> magnitude: g~^n e^{-g~^2/2} / sqrt(n!).
// n = 1 is the factor entering V_e for the Delta E = omega0 resonance; higher
// n covers Delta E = n omega0.
double franck_condon(int n, double g_tilde);

// V_e = -V g~ e^{-g~^2/2} <e_i2|H_int|e_i1>, complex in general.
Complex effective_rabi(double v, double g_tilde, Complex matrix_element);

// Pumping-step Rabi frequency sqrt((N-m)(m+1)) J fc(n_quanta, g~). m == N
// gives zero (full polarization); m > N is rejected.
double dicke_step_rabi(int n_targets, int step, double j, double g_tilde, int n_quanta = 1);

// Aggregate W-pumping frequency V_s = sqrt(sum_k V'_k^2), V'_k = -J_k fc(n, g~).
double w_state_aggregate_rabi(const std::vector<double>& j, double g_tilde, int n_quanta = 1);

struct ReducedModel {
    double v_e{0.0};     // |V_e| in units of omega0
    double gamma{0.0};   // dissipation rate in units of omega0
    double g_tilde{0.0};

    double g_prime() const { return 0.5 * (1.0 + g_tilde * g_tilde); }

    // M = [[0, -2Ve, 0], [Ve, -g' gamma, -Ve], [0, 2Ve, -gamma]] acting on
    // (rho11, Im[rho12], rho22).
    Eigen::Matrix3d m_matrix() const;

    // det M = -2 Ve^2 gamma, the uniqueness argument for the null space.
    double det_m() const { return -2.0 * v_e * v_e * gamma; }
};

struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<double> rho11;
    std::vector<double> im_rho12;
    std::vector<double> rho22;
    std::vector<double> rho33;  // 1 - rho11 - rho22 identically
    bool clamped{false};        // populations left [-1e-9, 1+1e-9] at some sample
};

// Solve d/dt rho_vec = M rho_vec by eigendecomposition, falling back to a
// dense matrix exponential when the eigenvector basis is ill-conditioned
// (near-defective M around gamma ~ 2 Ve).
ReducedTrajectory solve_reduced(const ReducedModel& rm, const std::array<double, 3>& rho0,
                                const std::vector<double>& times);

struct TransferAnalysis {
    std::array<Complex, 3> eigenvalues;
    double lambda_tilde{0.0};  // max real part (negative for Ve, gamma > 0)
};

TransferAnalysis transfer_rate(const ReducedModel& rm);

// |lambda~| over a log grid of gamma values at fixed Ve.
struct TransferScanPoint {
    double gamma_over_ve;
    double lambda_abs;
};
std::vector<TransferScanPoint> transfer_rate_scan(double v_e, double gamma_over_ve_min,
                                                  double gamma_over_ve_max, int points);

struct ReducedProjection {
    double rho11{0.0};
    double rho22{0.0};
    double rho33{0.0};
    double im_rho12{0.0};
    double abs_rho13{0.0};
    double abs_rho23{0.0};
};

// Matrix elements <i|rho|j> of a full-model state in an orthonormal basis
// {|1>, |2>, |3>}; rejects non-orthonormal bases (tol 1e-8).
ReducedProjection project_full_state(const Matrix& rho_full, const Vector& s1, const Vector& s2,
                                     const Vector& s3);

}  // namespace etsim
