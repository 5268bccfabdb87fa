// protocol.hpp — Multi-segment protocol composition (pump, pi-repump,
// dissipative repump), experimental-noise injection, and the end-to-end
// Dicke/boson-W/GHZ preparation runs.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etsim/lindblad.hpp"
#include "etsim/models.hpp"
#include "etsim/states.hpp"

namespace etsim {

enum class SegmentKind { Pump, PiPulse, DissipativeRepump };

struct ScheduleSegment {
    std::string label;
    LindbladModel model;
    double duration_ms{0.0};
    SegmentKind kind{SegmentKind::Pump};
};

struct Checkpoint {
    int after_segment{0};  // evaluated on the state at the end of this segment
    TargetState target;
    std::set<int> keep;  // factors kept before comparing against the target
    double band_lo{0.0};
    double band_hi{1.0};
};

struct ProtocolSchedule {
    SpaceSpec space;
    double omega0_rad_per_ms{0.0};
    std::vector<ScheduleSegment> segments;
    std::vector<Checkpoint> checkpoints;

    double total_duration_ms() const;
};

struct NoiseSpec {
    double delta_j{0.0};  // coupling imbalance, relative to J
    double j_res{0.0};    // residual target-target couplings, relative to J
    bool include_counter_rotating{false};
    double b_field{0.0};  // transverse field, units omega0
    double n_bar{0.0};    // bath occupation record (channels take BathParams)
    unsigned seed{1};
    // measured couplings (units omega0, control at row 0) take precedence
    // over synthesis
    std::optional<Eigen::MatrixXd> measured_j_matrix;
};

// Ideal network when the noise record is all zero; otherwise the measured
// matrix, or a seeded synthetic one: control row J(1 + u_i) with u_i uniform
// in [-delta_j/2, delta_j/2] and positive target-target residuals of
// magnitude <= j_res * J. Fixed seed gives a bit-reproducible draw.
SpinNetwork apply_noise(double j_ideal, int n_targets, const NoiseSpec& noise);

// Alternating pump / pi-pulse segments; the pump g sign flips each iteration
// and the last iteration omits the repump. Per-segment gamma defaults to
// 2 V_e^m (bath.gamma > 0 overrides); bath.n_bar feeds both channels.
ProtocolSchedule build_hybrid_dicke_schedule(int n_targets, int m_excitations,
                                             const ETParams& p, double j,
                                             const BathParams& bath, double tau1_ms,
                                             double tau2_ms, const NoiseSpec& noise,
                                             int n_c = 12);

// Pump segments interleaved with dissipative repumps: the ET Hamiltonian with
// Delta E reversed and drive repump_v on the control, target couplings off.
ProtocolSchedule build_dissipative_dicke_schedule(int n_targets, int m_excitations,
                                                  const ETParams& p, double j,
                                                  const BathParams& bath, double tau1_ms,
                                                  double tau2_ms, const NoiseSpec& noise,
                                                  int n_c = 12, double repump_v = 0.05);

struct CheckpointResult {
    std::string target_label;
    double t_ms{0.0};
    double fidelity{0.0};
    double population_overlap{0.0};
    double band_lo{0.0};
    double band_hi{1.0};
    bool in_band{false};
};

struct ProtocolResult {
    TimeSeries series;
    std::vector<CheckpointResult> checkpoints;
};

// Sequential evolution over the segments with the state threaded through;
// observables are sampled continuously and checkpoints evaluated on the
// segment-boundary states.
ProtocolResult run(const ProtocolSchedule& schedule, const DensityMatrix& rho0,
                   IntegratorConfig cfg, const std::vector<Observable>& observables);

// Standard observable set for the Dicke runs: fidelities of W_N^1..W_N^M on
// the targets, the control donor population, and the damped-mode occupation.
std::vector<Observable> dicke_observables(const SpaceSpec& space, int n_targets,
                                          int m_excitations);

// Donor-population projector (1 + sz)/2 on the control qubit.
Operator donor_projector(const SpaceSpec& space);

struct BosonWRun {
    double n_bar{0.0};
    double delta_e{0.0};
    double final_fidelity{0.0};
    TimeSeries series;
};

// Boson-W preparation at each bath occupation; Delta E = omega0 for the cold
// bath and 2 omega0 otherwise, gamma = 2 sqrt(N) J g~ e^{-g~^2/2}. Initial
// state: donor displaced thermal (x) thermal target modes with n0 = n_bar.
std::vector<BosonWRun> run_boson_w(const ETParams& p, int n_modes, double j,
                                   const std::vector<double>& n_bars, double t_final_ms,
                                   int n_t = 4, int n_c = 12);

struct GHZRun {
    double n_bar{0.0};
    double final_fidelity{0.0};
    TimeSeries series;
};

// Drive the 2N-qubit register into (|up..up> - |down..down>)/sqrt(2) through
// the acceptor-branch zero-energy eigenstate; gamma = 2 |V_e| with the
// 1/sqrt(2) overlap factor. The resonant initial register for the
// +E0-convention Hamiltonian is all-down (all-up with init_all_up).
std::vector<GHZRun> run_ghz(const ETParams& p, const GHZParams& gp,
                            const std::vector<double>& n_bars, double t_final_ms, int n_c = 12,
                            bool init_all_up = false);

}  // namespace etsim
