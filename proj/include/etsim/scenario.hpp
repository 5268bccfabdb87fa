// scenario.hpp — Scenario configuration, presets, batch execution, and
// CSV/JSON outputs behind the command-line tool.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etsim/protocol.hpp"

namespace etsim {

inline constexpr const char* kVersion = "etsim 0.1.0";

// Full parameter record for one scenario run. Physical quantities carry unit
// suffixes (_omega0, _khz, _ms); energies are in units of omega0.
struct ScenarioConfig {
    std::string id{"custom"};
    // reduced_scan | dicke | sweep | boson_w | ghz | reduced_compare
    std::string kind{"dicke"};
    std::string scheme{"hybrid"};  // dicke only: hybrid | dissipative

    ETParams et{1.0, 1.0, 0.0, 20.0};
    BathParams bath{0.0, 0.0};
    int n_c{12};

    // dicke
    int n_targets{4};
    int m_excitations{2};
    double j_omega0{0.025};
    double tau1_ms{3.0};
    double tau2_ms{0.001};
    double repump_v_omega0{0.05};

    // noise; couplings_csv (kHz file) with control_index takes precedence
    double delta_j_rel{0.0};
    double j_res_rel{0.0};
    bool include_counter_rotating{false};
    double b_field_omega0{0.0};
    unsigned seed{1};
    std::string couplings_csv;
    int control_index{0};
    bool use_builtin_couplings{false};  // the measured seven-ion table

    // initial state
    std::string initial_control{"donor"};
    double initial_n0{-1.0};  // < 0: follow bath.n_bar
    std::string target_init{"all_down"};  // all_down | all_vacuum | all_up

    // ghz
    GHZParams ghz{0.2, 0.04, 1};
    double t_final_ms{20.0};

    // boson_w
    int n_modes{2};
    int n_t{4};
    std::vector<double> n_bar_grid{0.0, 0.05, 0.1};

    // sweep
    std::vector<double> delta_e_grid{1.0, 2.0, 3.0, 4.0, 5.0};
    double sweep_gamma_omega0{0.02};

    // reduced_scan
    double scan_ratio_min{0.01};
    double scan_ratio_max{100.0};
    int scan_points{81};

    // integrator
    double rtol{1e-8};
    double atol{1e-10};
    double max_step_omega0{10.0};
    double sample_dt_ms{0.05};

    // expected fidelity bands: (label, t_ms, lo, hi)
    struct Band {
        std::string label;
        double t_ms{0.0};
        double lo{0.0};
        double hi{1.0};
    };
    std::vector<Band> bands;

    std::string out_dir{"out"};

    void validate() const;
    IntegratorConfig integrator_config() const;
};

// JSON round-trip; loading rejects unknown keys, naming the offending one.
std::string to_json_string(const ScenarioConfig& cfg);
ScenarioConfig config_from_json_string(const std::string& text);
ScenarioConfig load_config(const std::string& path);

struct PresetInfo {
    std::string id;
    std::string description;  // names its figure/appendix anchor
};

// Catalog of the built-in presets (fig2..fig8, appC, appE).
std::vector<PresetInfo> list_scenarios();
bool is_preset(const std::string& id);
ScenarioConfig preset(const std::string& id);

struct CheckpointReportEntry {
    std::string label;
    double t_ms{0.0};
    double value{0.0};
    double band_lo{0.0};
    double band_hi{1.0};
    bool in_band{false};
};

struct RunReport {
    std::string scenario;
    std::string version{kVersion};
    unsigned seed{1};
    double wall_time_s{0.0};
    bool quality_trace{true};
    bool quality_positivity{true};
    bool quality_converged{true};
    std::vector<std::string> quality_warnings;
    std::vector<CheckpointReportEntry> checkpoints;
    std::vector<std::string> written_files;

    bool quality_ok() const { return quality_trace && quality_positivity && quality_converged; }
    bool bands_ok() const;
    std::string to_json() const;
};

// Execute the configured scenario, writing CSV time series / tables and the
// JSON report into cfg.out_dir. Throws on configuration errors; integrator
// failures surface via the quality flags with partial outputs retained.
RunReport run_scenario(const ScenarioConfig& cfg);

// Deterministic CSV writer: "# key: value" header comments, a column-name
// row, then rows at fixed 12-significant-digit precision.
void write_csv(const std::string& path, const std::vector<std::string>& header_comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& data);

}  // namespace etsim
