// models.hpp — Hamiltonian and coupling-structure builders for the
// electron-transfer control system and its target networks, plus
// perturbative-validity checks and coupling-matrix ingestion.
//
// Conventions shared by all builders:
//   - energies in units of omega0 (omega0 = 1 internally); global constants
//     such as the -lambda/4 reorganization offset are dropped, so spectral
//     tests compare gaps, not absolute values;
//   - factor order is control qubit(s) first, then damped boson mode(s),
//     then target factors;
//   - |up> = |D> (donor), |down> = |A> (acceptor), sz|D> = +|D>.

#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etsim/operators.hpp"

namespace etsim {

// Desk-scale ceiling on composite dimensions accepted by the large builders.
int dimension_guard();
void set_dimension_guard(int guard);

struct ETParams {
    double delta_e{1.0};      // energy splitting, units omega0
    double g{1.0};            // spin-boson coupling, units omega0 (> 0)
    double v{0.0};            // donor-acceptor coupling, units omega0
    double omega0_khz{20.0};  // mode frequency in kHz; omega0 = 2*pi*this

    double g_tilde() const { return g; }
    double lambda_reorg() const { return g * g; }
    // omega0 in rad/ms: multiplying a time in ms gives dimensionless time.
    double omega0_rad_per_ms() const;
    void validate() const;
};

struct BathParams {
    double gamma{0.0};  // damping rate, units omega0 (>= 0)
    double n_bar{0.0};  // mean thermal occupation (>= 0)

    void validate() const;
};

// Control-target coupling network. Either a per-target list j (ideal,
// excitation-conserving form) or a full symmetric matrix j_matrix over all
// qubits with the control at row/column 0 (realistic form).
struct SpinNetwork {
    int n_targets{0};
    std::vector<double> j;                     // units omega0, length n_targets
    std::optional<Eigen::MatrixXd> j_matrix;   // (N+1)x(N+1), units omega0
    double b_field{0.0};                       // transverse field, units omega0
    bool include_counter_rotating{false};

    void validate() const;
    double delta_j() const;  // max_{i,j} |J_{0,i} - J_{0,j}|
    double j_res() const;    // max_{i,j != 0} |J_ij|
    double mean_control_coupling() const;
};

struct MSDriveSpec {
    std::vector<double> rabi;            // Omega_i, angular kHz
    Eigen::MatrixXd lamb_dicke;          // eta(i, m), dimensionless
    std::vector<double> mode_freq;       // omega_m, angular kHz
    double mu{0.0};                      // beat-note detuning, angular kHz
    std::vector<double> spin_phase;      // phi_i, radians
    std::vector<double> motional_phase;  // psi_i, radians

    void validate() const;
    bool dispersive() const;  // min_m |mu - omega_m| > 10 max_{i,m} |eta_im Omega_i|
};

struct GHZParams {
    double e0{0.2};   // units omega0 (> 0)
    double k{0.04};   // units omega0 (> 0)
    int n_half{1};    // N; the target register has 2N qubits

    void validate() const;
};

enum class Branch { Donor, Acceptor };

// H = dE/2 sz + g/2 sz (a + a^dag) + a^dag a + V sx on [Qubit, Boson(n_c)].
// g_sign flips the displacement coupling (pump-iteration alternation).
Operator build_single_site_et(const ETParams& p, int n_c, double g_sign = 1.0);

// The same ET terms embedded at (qubit_site, boson_site) of a larger space;
// used by the repump segments, which leave every other factor untouched.
Operator build_et_on_space(const ETParams& p, const SpaceSpec& space, int qubit_site,
                           int boson_site, double g_sign = 1.0, bool include_v = true);

// |D> (x) U(-g~/2)|n> or |A> (x) U(+g~/2)|n>, unit norm.
Vector vibronic_state(Branch branch, int n, const ETParams& p, int n_c, double g_sign = 1.0);

// Pump Hamiltonian on [Qubit(control), Boson(n_c), Qubit x N]. Ideal form:
// dE/2 sz0 + sum_i J_i (s0+ si- + h.c.) + boson terms. With a full j_matrix
// and include_counter_rotating, the realistic sum_{i<j} J_ij six sjx form;
// b_field adds B sum_i sz_i over all qubits either way.
Operator build_dicke_pump(const ETParams& p, const SpinNetwork& net, int n_c,
                          double g_sign = 1.0);

// M independent (control qubit + damped mode) blocks, each coupled to the
// same N targets; factors ordered [controls..., bosons..., targets...].
Operator build_multi_control_dicke(const ETParams& p, int m_controls, const SpinNetwork& net,
                                   int n_c);

struct BosonWModel {
    Operator h;
    std::vector<Operator> collapse_ops;  // damped ET-mode annihilation operator
};

// H = ET terms + J sum_i (s0+ b_i + h.c.) on [Qubit, Boson(n_c), Boson(n_t) x N].
BosonWModel build_boson_w(const ETParams& p, int n_modes, double j, int n_t, int n_c);

// J_ij = Omega_i Omega_j sum_m eta_im eta_jm omega_m / (mu^2 - omega_m^2).
Eigen::MatrixXd ms_coupling_matrix(const MSDriveSpec& spec);

struct SelectiveHoppingResult {
    Eigen::MatrixXd j_eff;  // J_ij cos(psi_i - psi_j) + J'_ij cos(psi'_i - psi'_j)
    double delta_j{0.0};
    double j_res{0.0};
};

// Combine a full-register hopping drive with a target-only cancellation
// drive; the control index 0 must be absent from the second drive.
SelectiveHoppingResult selective_hopping(const Eigen::MatrixXd& j_a,
                                         const std::vector<double>& psi_a,
                                         const Eigen::MatrixXd& j_b,
                                         const std::vector<double>& psi_b);

// dE/2 sz0 + V sx0 + E0/2 sz0 sum_i sz_i + E0/2 sum_i sz_i
//   + k/2 (prod_{i=1..N} sx_i + prod_{i=N+1..2N} sx_i) + boson terms,
// on [Qubit, Boson(n_c), Qubit x 2N].
Operator build_ghz(const ETParams& p, const GHZParams& gp, int n_c);

// External-register Hamiltonian on the 2N target qubits alone, with the
// control-conditioned shift added (+, control in |D>) or subtracted (-).
Operator ghz_external_hamiltonian(const GHZParams& gp, int sign);

enum class SchemeTag { SingleSite, DickePump, BosonW, GHZ };

struct InequalityCheck {
    std::string name;
    double lhs{0.0};
    double rhs{0.0};
    double margin{0.0};  // rhs / lhs
    bool pass{false};
};

struct PerturbativeReport {
    SchemeTag scheme{SchemeTag::SingleSite};
    std::vector<InequalityCheck> checks;
    double resonance_gap{0.0};     // min over n <= n_cutoff of |4B - n omega0|
    double vibronic_overlap{0.0};  // fc overlap at n' = n_cutoff + dE/omega0
    bool all_pass() const;
    std::string summary() const;
};

// Inequality report for the perturbative regime; warns, never blocks.
// "much less" passes at margin >= 5, "similar/lesssim" within a factor 3.
PerturbativeReport check_perturbative(const ETParams& p, const BathParams& bath);
// V <~ gamma << min dE, max dE << omega0, max dE << lambda for an explicit
// set of external energy gaps.
PerturbativeReport check_perturbative_gaps(const ETParams& p, const BathParams& bath,
                                           const std::vector<double>& delta_e_gaps);
PerturbativeReport check_perturbative(const ETParams& p, const BathParams& bath,
                                      const SpinNetwork& net, SchemeTag scheme,
                                      int n_cutoff = 8);
PerturbativeReport check_perturbative(const ETParams& p, const BathParams& bath,
                                      const GHZParams& gp);

// Coupling-matrix ingestion: plain-text CSV with header "# units: kHz",
// square, row-major, zero diagonal, symmetric to 1e-9 kHz.
Eigen::MatrixXd parse_coupling_matrix_khz(std::istream& in);
Eigen::MatrixXd load_coupling_matrix_khz(const std::string& path);

// Move the control qubit's row/column to index 0, preserving target order.
Eigen::MatrixXd reorder_control_first(const Eigen::MatrixXd& m, int control_index);

// Measured spin-hopping couplings (kHz) of the seven-ion chain demo: five
// qubit ions, control at index 2, near-balanced 0.4 kHz control couplings
// and ~1e-4 kHz target-target residuals.
Eigen::MatrixXd seven_ion_coupling_matrix_khz();

}  // namespace etsim
