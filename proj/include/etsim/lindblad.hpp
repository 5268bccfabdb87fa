// lindblad.hpp — Master-equation right-hand side, adaptive time integration,
// and steady-state solvers.
//
// The right-hand side is evaluated matrix-free (operator products on the
// density matrix; no d^2 x d^2 superoperator is ever materialized by the
// integrator). When every collapse operator is an eigenoperator of the
// Hamiltonian diagonal, the integrator works in the interaction picture of
// that diagonal: the dissipator is then time independent and the coherent
// part oscillates only at the off-diagonal coupling frequencies, which cuts
// the step count several-fold. States are reported in the lab frame.

#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "etsim/models.hpp"
#include "etsim/operators.hpp"

namespace etsim {

struct LindbladChannel {
    Operator c;
    double rate{0.0};  // units omega0
};

struct LindbladModel {
    Operator h;
    std::vector<LindbladChannel> channels;

    void validate() const;  // shared space, rates >= 0
};

// gamma (n + 1) on a and gamma n on a^dag; zero-rate channels are dropped.
std::vector<LindbladChannel> thermal_channels(const Operator& a_embedded,
                                              const BathParams& bath);

struct IntegratorConfig {
    double rtol{1e-8};
    double atol{1e-10};
    double max_step{1.0};              // 1/omega0
    double sample_dt{2.0 * 3.14159265358979323846 * 20.0 * 0.05};  // 1/omega0
    double omega0_rad_per_ms{2.0 * 3.14159265358979323846 * 20.0};
    // Interaction picture of the Hamiltonian diagonal. Pays off when the
    // populated spectrum is wide (high Fock occupations, steady-state
    // relaxation); for the pump scenarios the trajectory concentrates at low
    // energies and the lab frame steps larger, so this is off by default.
    bool use_rotating_frame{false};
    int positivity_check_stride{0};    // samples between eigenvalue checks; 0 = auto

    void validate() const;
    // rtol 1e-8 / atol 1e-10 with 0.05 ms sampling at the scenario's omega0.
    static IntegratorConfig defaults_for(const ETParams& p);
};

struct Observable {
    std::string name;
    std::function<double(const Matrix& rho, const SpaceSpec& space)> eval;
};

Observable expectation_observable(std::string name, Operator op);
// <psi|rho_reduced|psi> on the kept factors.
Observable fidelity_observable(std::string name, Vector target_on_kept, std::set<int> keep);
// <psi|rho|psi> on the full space.
Observable projector_observable(std::string name, Vector psi);

struct QualityFlags {
    bool trace_ok{true};
    bool positivity_ok{true};
    bool converged{true};
    double max_trace_dev{0.0};
    double min_eigenvalue{1.0};
    std::vector<std::string> warnings;

    bool all_ok() const { return trace_ok && positivity_ok && converged; }
    void merge(const QualityFlags& other);
};

struct TimeSeries {
    std::vector<double> t_omega0;  // dimensionless times
    std::vector<double> t_ms;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;  // values[column][sample]
    DensityMatrix final_state;
    QualityFlags quality;
    long long steps_taken{0};
    long long steps_rejected{0};

    const std::vector<double>& column(const std::string& name) const;
    // value of a column at the sample closest to the given dimensionless time
    double value_at(const std::string& name, double t) const;
    void append(const TimeSeries& tail);  // stitch a continuation run
};

// d rho/dt = -i[H, rho] + sum_k rate_k (c rho c^dag - 1/2 {c^dag c, rho}),
// Hermitized as (X + X^dag)/2. Dense one-shot evaluation for tests and
// steady-state verification.
Matrix rhs(const LindbladModel& model, const Matrix& rho);
double rhs_max_norm(const LindbladModel& model, const Matrix& rho);

// Adaptive Dormand-Prince 5(4) integration to t_final (1/omega0 units),
// sampling observables every cfg.sample_dt. Reported times start at t0.
// Step-size underflow or non-finite states end the run early with
// quality.converged = false and the time reached in quality.warnings.
TimeSeries evolve(const LindbladModel& model, const DensityMatrix& rho0, double t_final,
                  const IntegratorConfig& cfg, const std::vector<Observable>& observables = {},
                  double t0 = 0.0);

class DegenerateSteadyStateError : public std::runtime_error {
public:
    DegenerateSteadyStateError(int dim, const std::string& what)
        : std::runtime_error(what), null_space_dimension(dim) {}
    int null_space_dimension;
};

struct SteadyStateOptions {
    enum class Route { Auto, DenseLiouvillian, LongTime };
    Route route{Route::Auto};
    double t_max{2e5};        // long-time cap, 1/omega0
    double rhs_tol{1e-9};     // long-time stop: ||rhs||_max below this
    double degeneracy_rel_tol{1e-9};  // singular values below this x sigma_max count as null
};

// Dense route (d^2 <= 4096): null space of the d^2 x d^2 Liouvillian via SVD.
// Long-time route: integrate from rho0 (default maximally mixed) until the
// rhs norm criterion. The returned state satisfies ||rhs||_max < 1e-8.
DensityMatrix steady_state(const LindbladModel& model, const SteadyStateOptions& opts = {});
DensityMatrix steady_state(const LindbladModel& model, const DensityMatrix& rho0,
                           const SteadyStateOptions& opts);

// Column-stacking superoperator of the model (for the dense route and tests).
Matrix liouvillian_matrix(const LindbladModel& model);

struct SweepPoint {
    double delta_e;
    double n_bar;
    double p_donor;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // outer loop n_bar, inner loop delta_e
    // (n_bar, delta_e at the donor-population minimum)
    std::vector<std::pair<double, double>> optimum;

    double p_donor_at(double delta_e, double n_bar) const;
};

// Steady-state donor population over a resonant Delta E = n omega0 grid for
// each bath occupation; gamma is the fixed sympathetic-cooling rate.
SweepResult delta_e_sweep(const ETParams& p_template, const std::vector<double>& n_bars,
                          const std::vector<double>& delta_es, double gamma, int n_c);

}  // namespace etsim
