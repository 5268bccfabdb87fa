#include "etsim/models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "etsim/reduced.hpp"

namespace etsim {

namespace {

int g_dimension_guard = 4096;

constexpr double kMuchLessMargin = 5.0;   // pass threshold for "<<"
constexpr double kSimilarFactor = 3.0;    // tolerance band for "~" and "<~"
constexpr double kMarginSlack = 1e-9;

InequalityCheck much_less(const std::string& name, double lhs, double rhs) {
    InequalityCheck c{name, lhs, rhs, 0.0, false};
    c.margin = lhs > 0.0 ? rhs / lhs : std::numeric_limits<double>::infinity();
    c.pass = c.margin + kMarginSlack >= kMuchLessMargin;
    return c;
}

InequalityCheck lesssim(const std::string& name, double lhs, double rhs) {
    InequalityCheck c{name, lhs, rhs, 0.0, false};
    c.margin = lhs > 0.0 ? rhs / lhs : std::numeric_limits<double>::infinity();
    c.pass = lhs <= kSimilarFactor * rhs + kMarginSlack;
    return c;
}

InequalityCheck similar(const std::string& name, double a, double b) {
    InequalityCheck c{name, a, b, 0.0, false};
    if (a == 0.0 && b == 0.0) {
        c.margin = 1.0;
        c.pass = true;
        return c;
    }
    const double hi = std::max(a, b), lo = std::min(a, b);
    c.margin = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    c.pass = lo > 0.0 && c.margin <= kSimilarFactor + kMarginSlack;
    return c;
}

void check_guard(long long dim, const std::string& who) {
    if (dim > g_dimension_guard) {
        throw std::invalid_argument(who + ": composite dimension " + std::to_string(dim) +
                                    " exceeds guard " + std::to_string(g_dimension_guard));
    }
}

// dE/2 sz + g_eff/2 sz (a + a^dag) + a^dag a (+ V sx) embedded at the given
// qubit/boson factor positions.
Matrix et_terms(const SpaceSpec& space, const ETParams& p, int qubit_site, int boson_site,
                double g_sign, bool include_v) {
    auto pauli = pauli_ops();
    auto fock = fock_ops(space.factor(boson_site).dim());
    Matrix sz = embed(pauli.sz, qubit_site, space).matrix;
    Matrix x = embed(Operator(fock.a.space, fock.a.matrix + fock.a_dag.matrix), boson_site,
                     space).matrix;
    Matrix n = embed(fock.n, boson_site, space).matrix;
    Matrix h = 0.5 * p.delta_e * sz + 0.5 * g_sign * p.g * (sz * x) + n;
    if (include_v && p.v != 0.0) {
        h += p.v * embed(pauli.sx, qubit_site, space).matrix;
    }
    return h;
}

}  // namespace

int dimension_guard() { return g_dimension_guard; }

void set_dimension_guard(int guard) {
    if (guard < 2) {
        throw std::invalid_argument("set_dimension_guard: guard must be >= 2");
    }
    g_dimension_guard = guard;
}

double ETParams::omega0_rad_per_ms() const { return 2.0 * std::numbers::pi * omega0_khz; }

void ETParams::validate() const {
    if (g <= 0.0) throw std::invalid_argument("ETParams: g must be > 0");
    if (omega0_khz <= 0.0) throw std::invalid_argument("ETParams: omega0 must be > 0");
}

void BathParams::validate() const {
    if (gamma < 0.0) throw std::invalid_argument("BathParams: gamma must be >= 0");
    if (n_bar < 0.0) throw std::invalid_argument("BathParams: n_bar must be >= 0");
}

void SpinNetwork::validate() const {
    if (n_targets < 1) throw std::invalid_argument("SpinNetwork: n_targets must be >= 1");
    if (static_cast<int>(j.size()) != n_targets) {
        throw std::invalid_argument("SpinNetwork: j list length " + std::to_string(j.size()) +
                                    " != n_targets " + std::to_string(n_targets));
    }
    for (double jk : j) {
        if (!std::isfinite(jk)) throw std::invalid_argument("SpinNetwork: non-finite coupling");
    }
    if (j_matrix) {
        const auto& m = *j_matrix;
        if (m.rows() != n_targets + 1 || m.cols() != n_targets + 1) {
            throw std::invalid_argument("SpinNetwork: j_matrix must be (N+1)x(N+1)");
        }
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("SpinNetwork: j_matrix must be symmetric");
        }
        if (m.diagonal().cwiseAbs().maxCoeff() > 0.0) {
            throw std::invalid_argument("SpinNetwork: j_matrix diagonal must be zero");
        }
    }
}

double SpinNetwork::delta_j() const {
    const auto row = [&](int i) { return j_matrix ? (*j_matrix)(0, i + 1) : j[static_cast<std::size_t>(i)]; };
    double lo = row(0), hi = row(0);
    for (int i = 1; i < n_targets; ++i) {
        lo = std::min(lo, row(i));
        hi = std::max(hi, row(i));
    }
    return hi - lo;
}

double SpinNetwork::j_res() const {
    if (!j_matrix) return 0.0;
    double best = 0.0;
    for (int i = 1; i <= n_targets; ++i) {
        for (int k = i + 1; k <= n_targets; ++k) {
            best = std::max(best, std::abs((*j_matrix)(i, k)));
        }
    }
    return best;
}

double SpinNetwork::mean_control_coupling() const {
    double sum = 0.0;
    for (int i = 0; i < n_targets; ++i) {
        sum += j_matrix ? (*j_matrix)(0, i + 1) : j[static_cast<std::size_t>(i)];
    }
    return sum / n_targets;
}

void MSDriveSpec::validate() const {
    const auto n_ions = static_cast<Eigen::Index>(rabi.size());
    const auto n_modes = static_cast<Eigen::Index>(mode_freq.size());
    if (n_ions < 2) throw std::invalid_argument("MSDriveSpec: need at least two ions");
    if (lamb_dicke.rows() != n_ions || lamb_dicke.cols() != n_modes) {
        throw std::invalid_argument("MSDriveSpec: lamb_dicke must be (ions x modes)");
    }
    if (spin_phase.size() != rabi.size() || motional_phase.size() != rabi.size()) {
        throw std::invalid_argument("MSDriveSpec: phase lists must match ion count");
    }
}

bool MSDriveSpec::dispersive() const {
    double min_det = std::numeric_limits<double>::infinity();
    for (double wm : mode_freq) min_det = std::min(min_det, std::abs(mu - wm));
    double max_coupling = 0.0;
    for (std::size_t i = 0; i < rabi.size(); ++i) {
        for (Eigen::Index m = 0; m < lamb_dicke.cols(); ++m) {
            max_coupling = std::max(max_coupling,
                                    std::abs(lamb_dicke(static_cast<Eigen::Index>(i), m) * rabi[i]));
        }
    }
    return min_det > 10.0 * max_coupling;
}

void GHZParams::validate() const {
    if (e0 <= 0.0) throw std::invalid_argument("GHZParams: e0 must be > 0");
    if (k < 0.0) throw std::invalid_argument("GHZParams: k must be >= 0");
    if (n_half < 1) throw std::invalid_argument("GHZParams: n_half must be >= 1");
}

Operator build_single_site_et(const ETParams& p, int n_c, double g_sign) {
    p.validate();
    SpaceSpec space({Factor::qubit(), Factor::boson(n_c)});
    return Operator(space, et_terms(space, p, 0, 1, g_sign, true));
}

Operator build_et_on_space(const ETParams& p, const SpaceSpec& space, int qubit_site,
                           int boson_site, double g_sign, bool include_v) {
    p.validate();
    if (space.factor(qubit_site).kind != Factor::Kind::Qubit ||
        space.factor(boson_site).kind != Factor::Kind::Boson) {
        throw std::invalid_argument("build_et_on_space: factor kinds do not match the sites");
    }
    return Operator(space, et_terms(space, p, qubit_site, boson_site, g_sign, include_v));
}

Vector vibronic_state(Branch branch, int n, const ETParams& p, int n_c, double g_sign) {
    p.validate();
    if (n < 0 || n >= n_c) {
        throw std::out_of_range("vibronic_state: n must satisfy 0 <= n < n_c");
    }
    const double alpha = (branch == Branch::Donor ? -0.5 : 0.5) * g_sign * p.g_tilde();
    Operator u = displacement(alpha, n_c);
    Vector boson = u.matrix.col(n);
    Vector spin = Vector::Zero(2);
    spin(branch == Branch::Donor ? 0 : 1) = 1.0;
    Vector out(2 * n_c);
    out.head(n_c) = spin(0) * boson;
    out.tail(n_c) = spin(1) * boson;
    out.normalize();
    return out;
}

Operator build_dicke_pump(const ETParams& p, const SpinNetwork& net, int n_c, double g_sign) {
    p.validate();
    net.validate();
    const int n = net.n_targets;
    check_guard(2LL * n_c * (1LL << n), "build_dicke_pump");

    std::vector<Factor> factors{Factor::qubit(), Factor::boson(n_c)};
    for (int i = 0; i < n; ++i) factors.push_back(Factor::qubit());
    SpaceSpec space(factors);

    auto qubit_site = [](int q) { return q == 0 ? 0 : q + 1; };
    auto pauli = pauli_ops();

    Matrix h = et_terms(space, p, 0, 1, g_sign, false);

    if (net.include_counter_rotating) {
        if (!net.j_matrix) {
            throw std::invalid_argument(
                "build_dicke_pump: the sx sx form requires the full j_matrix");
        }
        for (int i = 0; i <= n; ++i) {
            Matrix sxi = embed(pauli.sx, qubit_site(i), space).matrix;
            for (int k = i + 1; k <= n; ++k) {
                const double jik = (*net.j_matrix)(i, k);
                if (jik == 0.0) continue;
                h += jik * (sxi * embed(pauli.sx, qubit_site(k), space).matrix);
            }
        }
    } else if (net.j_matrix) {
        for (int i = 0; i <= n; ++i) {
            Matrix spi = embed(pauli.sp, qubit_site(i), space).matrix;
            for (int k = i + 1; k <= n; ++k) {
                const double jik = (*net.j_matrix)(i, k);
                if (jik == 0.0) continue;
                Matrix hop = jik * (spi * embed(pauli.sm, qubit_site(k), space).matrix);
                h += hop + hop.adjoint().eval();
            }
        }
    } else {
        Matrix sp0 = embed(pauli.sp, 0, space).matrix;
        for (int i = 1; i <= n; ++i) {
            Matrix hop = net.j[static_cast<std::size_t>(i - 1)] *
                         (sp0 * embed(pauli.sm, qubit_site(i), space).matrix);
            h += hop + hop.adjoint().eval();
        }
    }

    if (net.b_field != 0.0) {
        for (int i = 0; i <= n; ++i) {
            h += net.b_field * embed(pauli.sz, qubit_site(i), space).matrix;
        }
    }
    return Operator(space, std::move(h));
}

Operator build_multi_control_dicke(const ETParams& p, int m_controls, const SpinNetwork& net,
                                   int n_c) {
    p.validate();
    net.validate();
    if (m_controls < 1) {
        throw std::invalid_argument("build_multi_control_dicke: m_controls must be >= 1");
    }
    const int n = net.n_targets;
    long long dim = 1;
    for (int i = 0; i < m_controls; ++i) dim *= 2LL * n_c;
    dim <<= n;
    check_guard(dim, "build_multi_control_dicke");

    std::vector<Factor> factors;
    for (int i = 0; i < m_controls; ++i) factors.push_back(Factor::qubit());
    for (int i = 0; i < m_controls; ++i) factors.push_back(Factor::boson(n_c));
    for (int i = 0; i < n; ++i) factors.push_back(Factor::qubit());
    SpaceSpec space(factors);

    auto pauli = pauli_ops();
    Matrix h = Matrix::Zero(space.dim(), space.dim());
    for (int c = 0; c < m_controls; ++c) {
        h += et_terms(space, p, c, m_controls + c, 1.0, false);
        Matrix spc = embed(pauli.sp, c, space).matrix;
        for (int i = 0; i < n; ++i) {
            Matrix hop = net.j[static_cast<std::size_t>(i)] *
                         (spc * embed(pauli.sm, 2 * m_controls + i, space).matrix);
            h += hop + hop.adjoint().eval();
        }
    }
    return Operator(space, std::move(h));
}

BosonWModel build_boson_w(const ETParams& p, int n_modes, double j, int n_t, int n_c) {
    p.validate();
    if (n_modes < 1) throw std::invalid_argument("build_boson_w: n_modes must be >= 1");
    if (n_t < 2) throw std::invalid_argument("build_boson_w: target cutoff n_t must be >= 2");
    long long dim = 2LL * n_c;
    for (int i = 0; i < n_modes; ++i) dim *= n_t;
    check_guard(dim, "build_boson_w");

    std::vector<Factor> factors{Factor::qubit(), Factor::boson(n_c)};
    for (int i = 0; i < n_modes; ++i) factors.push_back(Factor::boson(n_t));
    SpaceSpec space(factors);

    auto pauli = pauli_ops();
    auto target_fock = fock_ops(n_t);
    Matrix h = et_terms(space, p, 0, 1, 1.0, false);
    Matrix sp0 = embed(pauli.sp, 0, space).matrix;
    for (int i = 0; i < n_modes; ++i) {
        Matrix hop = j * (sp0 * embed(target_fock.a, 2 + i, space).matrix);
        h += hop + hop.adjoint().eval();
    }

    BosonWModel model;
    model.h = Operator(space, std::move(h));
    model.collapse_ops.push_back(embed(fock_ops(n_c).a, 1, space));
    return model;
}

Eigen::MatrixXd ms_coupling_matrix(const MSDriveSpec& spec) {
    spec.validate();
    if (!spec.dispersive()) {
        warn("ms_coupling_matrix: drive is outside the dispersive regime");
    }
    const int n_ions = static_cast<int>(spec.rabi.size());
    const int n_modes = static_cast<int>(spec.mode_freq.size());
    for (double wm : spec.mode_freq) {
        if (wm == spec.mu) {
            throw std::invalid_argument("ms_coupling_matrix: mu coincides with a mode frequency");
        }
    }
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n_ions, n_ions);
    for (int i = 0; i < n_ions; ++i) {
        for (int k = i + 1; k < n_ions; ++k) {
            double sum = 0.0;
            for (int m = 0; m < n_modes; ++m) {
                const double wm = spec.mode_freq[static_cast<std::size_t>(m)];
                sum += spec.lamb_dicke(i, m) * spec.lamb_dicke(k, m) * wm /
                       (spec.mu * spec.mu - wm * wm);
            }
            j(i, k) = j(k, i) = spec.rabi[static_cast<std::size_t>(i)] *
                                spec.rabi[static_cast<std::size_t>(k)] * sum;
        }
    }
    return j;
}

SelectiveHoppingResult selective_hopping(const Eigen::MatrixXd& j_a,
                                         const std::vector<double>& psi_a,
                                         const Eigen::MatrixXd& j_b,
                                         const std::vector<double>& psi_b) {
    const Eigen::Index n = j_a.rows();
    if (j_a.cols() != n || j_b.rows() != n || j_b.cols() != n ||
        static_cast<Eigen::Index>(psi_a.size()) != n ||
        static_cast<Eigen::Index>(psi_b.size()) != n) {
        throw std::invalid_argument("selective_hopping: shape mismatch");
    }
    if (j_b.row(0).cwiseAbs().maxCoeff() > 0.0 || j_b.col(0).cwiseAbs().maxCoeff() > 0.0) {
        // second drive must be absent on the control ion
        throw std::invalid_argument("selective_hopping: j_b must have zero control row/column");
    }

    SelectiveHoppingResult out;
    out.j_eff = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (i == k) continue;
            out.j_eff(i, k) =
                j_a(i, k) * std::cos(psi_a[static_cast<std::size_t>(i)] -
                                     psi_a[static_cast<std::size_t>(k)]) +
                j_b(i, k) * std::cos(psi_b[static_cast<std::size_t>(i)] -
                                     psi_b[static_cast<std::size_t>(k)]);
        }
    }

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 1; i < n; ++i) {
        lo = std::min(lo, out.j_eff(0, i));
        hi = std::max(hi, out.j_eff(0, i));
        for (Eigen::Index k = i + 1; k < n; ++k) {
            out.j_res = std::max(out.j_res, std::abs(out.j_eff(i, k)));
        }
    }
    out.delta_j = hi - lo;
    return out;
}

Operator build_ghz(const ETParams& p, const GHZParams& gp, int n_c) {
    p.validate();
    gp.validate();
    if (gp.n_half > 2) {
        throw std::invalid_argument("build_ghz: n_half must be 1 or 2 at desk scale");
    }
    const int n2 = 2 * gp.n_half;
    check_guard(2LL * n_c * (1LL << n2), "build_ghz");

    std::vector<Factor> factors{Factor::qubit(), Factor::boson(n_c)};
    for (int i = 0; i < n2; ++i) factors.push_back(Factor::qubit());
    SpaceSpec space(factors);

    auto pauli = pauli_ops();
    Matrix h = et_terms(space, p, 0, 1, 1.0, true);
    Matrix sz0 = embed(pauli.sz, 0, space).matrix;
    const int d = space.dim();

    Matrix sz_sum = Matrix::Zero(d, d);
    for (int i = 0; i < n2; ++i) sz_sum += embed(pauli.sz, 2 + i, space).matrix;
    h += 0.5 * gp.e0 * (sz0 * sz_sum) + 0.5 * gp.e0 * sz_sum;

    Matrix prod_lo = Matrix::Identity(d, d), prod_hi = Matrix::Identity(d, d);
    for (int i = 0; i < gp.n_half; ++i) {
        prod_lo = prod_lo * embed(pauli.sx, 2 + i, space).matrix;
        prod_hi = prod_hi * embed(pauli.sx, 2 + gp.n_half + i, space).matrix;
    }
    h += 0.5 * gp.k * (prod_lo + prod_hi);
    return Operator(space, std::move(h));
}

Operator ghz_external_hamiltonian(const GHZParams& gp, int sign) {
    gp.validate();
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("ghz_external_hamiltonian: sign must be +1 or -1");
    }
    const int n2 = 2 * gp.n_half;
    std::vector<Factor> factors(static_cast<std::size_t>(n2), Factor::qubit());
    SpaceSpec space(factors);
    auto pauli = pauli_ops();
    const int d = space.dim();

    Matrix h = Matrix::Zero(d, d);
    // H_ext +/- H_ex,z: the sz sum doubles on the donor branch and cancels on
    // the acceptor branch.
    if (sign == 1) {
        for (int i = 0; i < n2; ++i) h += gp.e0 * embed(pauli.sz, i, space).matrix;
    }
    Matrix prod_lo = Matrix::Identity(d, d), prod_hi = Matrix::Identity(d, d);
    for (int i = 0; i < gp.n_half; ++i) {
        prod_lo = prod_lo * embed(pauli.sx, i, space).matrix;
        prod_hi = prod_hi * embed(pauli.sx, gp.n_half + i, space).matrix;
    }
    h += 0.5 * gp.k * (prod_lo + prod_hi);
    return Operator(space, std::move(h));
}

bool PerturbativeReport::all_pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

std::string PerturbativeReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "  [ok]   " : "  [WARN] ") << c.name << "  (lhs=" << c.lhs
           << ", rhs=" << c.rhs << ", margin=" << c.margin << ")\n";
    }
    return os.str();
}

PerturbativeReport check_perturbative(const ETParams& p, const BathParams& bath) {
    p.validate();
    bath.validate();
    PerturbativeReport r;
    r.scheme = SchemeTag::SingleSite;
    r.checks.push_back(lesssim("V <~ gamma", p.v, bath.gamma));
    r.checks.push_back(much_less("V << omega0", p.v, 1.0));
    r.checks.push_back(much_less("V << lambda", p.v, p.lambda_reorg()));
    return r;
}

PerturbativeReport check_perturbative_gaps(const ETParams& p, const BathParams& bath,
                                           const std::vector<double>& delta_e_gaps) {
    p.validate();
    bath.validate();
    if (delta_e_gaps.empty()) {
        throw std::invalid_argument("check_perturbative_gaps: gap set must be nonempty");
    }
    double lo = delta_e_gaps.front(), hi = delta_e_gaps.front();
    for (double d : delta_e_gaps) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    PerturbativeReport r;
    r.scheme = SchemeTag::SingleSite;
    r.checks.push_back(lesssim("V <~ gamma", p.v, bath.gamma));
    r.checks.push_back(much_less("gamma << min dE", bath.gamma, lo));
    r.checks.push_back(much_less("max dE << omega0", hi, 1.0));
    r.checks.push_back(much_less("max dE << lambda", hi, p.lambda_reorg()));
    return r;
}

PerturbativeReport check_perturbative(const ETParams& p, const BathParams& bath,
                                      const SpinNetwork& net, SchemeTag scheme, int n_cutoff) {
    p.validate();
    bath.validate();
    net.validate();
    PerturbativeReport r;
    r.scheme = scheme;
    const double j = std::abs(net.mean_control_coupling());
    r.checks.push_back(similar("J ~ gamma", j, bath.gamma));
    r.checks.push_back(much_less("gamma << omega0", bath.gamma, 1.0));
    r.checks.push_back(much_less("J << omega0", j, 1.0));
    if (net.b_field > 0.0) {
        double gap = std::numeric_limits<double>::infinity();
        for (int n = 0; n <= n_cutoff; ++n) {
            gap = std::min(gap, std::abs(4.0 * net.b_field - static_cast<double>(n)));
        }
        r.resonance_gap = gap;
        r.vibronic_overlap =
            franck_condon(n_cutoff + static_cast<int>(std::lround(std::abs(p.delta_e))),
                          p.g_tilde());
        r.checks.push_back(much_less("gamma << min_n |4B - n omega0|", bath.gamma, gap));
        r.checks.push_back(much_less("J << min_n |4B - n omega0|", j, gap));
    }
    return r;
}

PerturbativeReport check_perturbative(const ETParams& p, const BathParams& bath,
                                      const GHZParams& gp) {
    p.validate();
    bath.validate();
    gp.validate();
    PerturbativeReport r;
    r.scheme = SchemeTag::GHZ;
    r.checks.push_back(lesssim("V <~ gamma", p.v, bath.gamma));
    r.checks.push_back(much_less("k << E0", gp.k, gp.e0));
    r.checks.push_back(much_less("V << k", p.v, gp.k));
    r.checks.push_back(much_less("N E0 << omega0", gp.n_half * gp.e0, 1.0));
    return r;
}

Eigen::MatrixXd parse_coupling_matrix_khz(std::istream& in) {
    std::string line;
    bool header_seen = false;
    std::vector<std::vector<double>> rows;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            std::string squashed;
            for (char ch : trimmed) {
                if (!std::isspace(static_cast<unsigned char>(ch))) squashed += ch;
            }
            if (squashed == "#units:kHz") header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(trimmed);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
            } catch (const std::exception&) {
                throw std::invalid_argument("coupling matrix: bad number '" + cell + "' at line " +
                                            std::to_string(line_no));
            }
        }
        rows.push_back(std::move(row));
    }
    if (!header_seen) {
        throw std::invalid_argument("coupling matrix: missing '# units: kHz' header");
    }
    const std::size_t n = rows.size();
    if (n == 0) throw std::invalid_argument("coupling matrix: no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw std::invalid_argument("coupling matrix: row " + std::to_string(i + 1) + " has " +
                                        std::to_string(rows[i].size()) + " entries, expected " +
                                        std::to_string(n));
        }
        for (std::size_t k = 0; k < n; ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }
    if (m.diagonal().cwiseAbs().maxCoeff() > 0.0) {
        throw std::invalid_argument("coupling matrix: diagonal must be zero");
    }
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9) {
        throw std::invalid_argument("coupling matrix: asymmetry " + std::to_string(asym) +
                                    " kHz exceeds 1e-9");
    }
    return m;
}

Eigen::MatrixXd load_coupling_matrix_khz(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("load_coupling_matrix_khz: cannot open " + path);
    }
    return parse_coupling_matrix_khz(in);
}

Eigen::MatrixXd reorder_control_first(const Eigen::MatrixXd& m, int control_index) {
    const Eigen::Index n = m.rows();
    if (control_index < 0 || control_index >= n) {
        throw std::out_of_range("reorder_control_first: control index out of range");
    }
    std::vector<Eigen::Index> perm;
    perm.push_back(control_index);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i != control_index) perm.push_back(i);
    }
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            out(i, k) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
        }
    }
    return out;
}

Eigen::MatrixXd seven_ion_coupling_matrix_khz() {
    Eigen::MatrixXd m(5, 5);
    m << 0.0,      2.25e-4, 0.398, 1.07e-4, 1.15e-4,
         2.25e-4,  0.0,     0.402, 1.03e-4, 1.07e-4,
         0.398,    0.402,   0.0,   0.402,   0.398,
         1.07e-4,  1.03e-4, 0.402, 0.0,     2.25e-4,
         1.15e-4,  1.07e-4, 0.398, 2.25e-4, 0.0;
    return m;
}

}  // namespace etsim
