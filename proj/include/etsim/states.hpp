// states.hpp — Initial-state constructors (donor vibronic products, displaced
// thermal modes) and target-state library (Dicke/W, boson W, GHZ) with
// fidelity and population observables.

#pragma once

#include <string>
#include <vector>

#include "etsim/models.hpp"
#include "etsim/operators.hpp"

namespace etsim {

// Boltzmann-diagonal thermal state with mean occupation n0, truncated at n_c
// (renormalized; warns when the discarded tail exceeds 1e-6).
DensityMatrix thermal_state(double n0, int n_c);

// U(alpha) rho_th(n0) U(alpha)^dag.
DensityMatrix displaced_thermal(double n0, Complex alpha, int n_c);

// Equal-amplitude superposition of all C(N, m) product states with m up-spins.
Vector dicke_state(int n, int m);

// (1/sqrt(N)) sum_i |0...1_i...0> over N modes of cutoff n_t.
Vector boson_w_state(int n, int n_t);

// (|up...up> + sign |down...down>)/sqrt(2) on n2 qubits.
Vector ghz_state(int n2, int sign = -1);

struct TargetState {
    enum class Kind { DickeSpin, BosonW, GHZ, Custom };
    Kind kind{Kind::Custom};
    Vector vector;  // on the target factors only
    std::string label;

    static TargetState dicke(int n, int m);
    static TargetState boson_w(int n, int n_t);
    static TargetState ghz(int n2, int sign = -1);
    static TargetState custom(Vector v, std::string label);
};

// <psi|rho|psi> for a pure target, clamped to [0, 1].
double fidelity(const Matrix& rho, const Vector& psi);
double fidelity(const DensityMatrix& rho, const TargetState& target);

// Classical (Bhattacharyya) fidelity between diag(rho) and |psi|^2 — the
// phase-insensitive companion diagnostic to fidelity().
double population_overlap(const Matrix& rho, const Vector& psi);

struct InitialStateSpec {
    enum class TargetInit { AllDown, AllVacuum, Custom };

    Branch control{Branch::Donor};
    double boson_n0{0.0};  // displaced thermal occupation; 0 = ground displaced
    TargetInit target_init{TargetInit::AllDown};
    std::vector<Matrix> custom_targets;  // one density matrix per target factor
};

// Product state control (x) displaced boson (x) targets on a space laid out
// as [Qubit, Boson(n_c), targets...]. The boson factor is displaced by
// -g~/2 (donor) or +g~/2 (acceptor), scaled by g_sign.
DensityMatrix build_initial(const InitialStateSpec& spec, const ETParams& p,
                            const SpaceSpec& space, double g_sign = 1.0);

struct CollectiveSpinOps {
    Operator jx;
    Operator jy;
    Operator jz;
    Operator j_squared;
};

// Collective spin operators (1/2) sum_i sigma^{x,y,z}_i on N qubits.
CollectiveSpinOps collective_spin_ops(int n);

}  // namespace etsim
