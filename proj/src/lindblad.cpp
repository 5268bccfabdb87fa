#include "etsim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace etsim {

void LindbladModel::validate() const {
    if (h.dim() == 0) throw std::invalid_argument("LindbladModel: empty Hamiltonian");
    for (const auto& ch : channels) {
        if (ch.rate < 0.0) throw std::invalid_argument("LindbladModel: negative rate");
        if (!(ch.c.space == h.space)) {
            throw std::invalid_argument("LindbladModel: channel space differs from Hamiltonian");
        }
    }
}

std::vector<LindbladChannel> thermal_channels(const Operator& a_embedded,
                                              const BathParams& bath) {
    bath.validate();
    std::vector<LindbladChannel> out;
    if (bath.gamma * (bath.n_bar + 1.0) > 0.0) {
        out.push_back({a_embedded, bath.gamma * (bath.n_bar + 1.0)});
    }
    if (bath.gamma * bath.n_bar > 0.0) {
        out.push_back({a_embedded.adjoint(), bath.gamma * bath.n_bar});
    }
    return out;
}

void IntegratorConfig::validate() const {
    if (rtol <= 0.0 || atol <= 0.0) {
        throw std::invalid_argument("IntegratorConfig: rtol and atol must be > 0");
    }
    if (max_step <= 0.0 || sample_dt <= 0.0) {
        throw std::invalid_argument("IntegratorConfig: max_step and sample_dt must be > 0");
    }
    if (omega0_rad_per_ms <= 0.0) {
        throw std::invalid_argument("IntegratorConfig: omega0 must be > 0");
    }
}

IntegratorConfig IntegratorConfig::defaults_for(const ETParams& p) {
    IntegratorConfig cfg;
    cfg.omega0_rad_per_ms = p.omega0_rad_per_ms();
    cfg.sample_dt = 0.05 * cfg.omega0_rad_per_ms;  // 0.05 ms
    return cfg;
}

Observable expectation_observable(std::string name, Operator op) {
    return Observable{std::move(name),
                      [op = std::move(op)](const Matrix& rho, const SpaceSpec&) {
                          return (op.matrix * rho).trace().real();
                      }};
}

Observable fidelity_observable(std::string name, Vector target_on_kept, std::set<int> keep) {
    return Observable{std::move(name),
                      [target = std::move(target_on_kept), keep = std::move(keep)](
                          const Matrix& rho, const SpaceSpec& space) {
                          Matrix red = partial_trace_matrix(rho, space, keep);
                          const double f = std::real(Complex(target.dot(red * target)));
                          return std::clamp(f, 0.0, 1.0);
                      }};
}

Observable projector_observable(std::string name, Vector psi) {
    return Observable{std::move(name), [psi = std::move(psi)](const Matrix& rho,
                                                              const SpaceSpec&) {
                          return std::clamp(std::real(Complex(psi.dot(rho * psi))), 0.0, 1.0);
                      }};
}

void QualityFlags::merge(const QualityFlags& other) {
    trace_ok = trace_ok && other.trace_ok;
    positivity_ok = positivity_ok && other.positivity_ok;
    converged = converged && other.converged;
    max_trace_dev = std::max(max_trace_dev, other.max_trace_dev);
    min_eigenvalue = std::min(min_eigenvalue, other.min_eigenvalue);
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

const std::vector<double>& TimeSeries::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return values[i];
    }
    throw std::invalid_argument("TimeSeries: no column named '" + name + "'");
}

double TimeSeries::value_at(const std::string& name, double t) const {
    const auto& col = column(name);
    if (col.empty()) throw std::invalid_argument("TimeSeries: empty column");
    std::size_t best = 0;
    double best_dev = std::abs(t_omega0[0] - t);
    for (std::size_t i = 1; i < t_omega0.size(); ++i) {
        const double dev = std::abs(t_omega0[i] - t);
        if (dev < best_dev) {
            best_dev = dev;
            best = i;
        }
    }
    return col[best];
}

void TimeSeries::append(const TimeSeries& tail) {
    if (columns != tail.columns) {
        throw std::invalid_argument("TimeSeries::append: column mismatch");
    }
    std::size_t start = 0;
    if (!t_omega0.empty() && !tail.t_omega0.empty() &&
        std::abs(tail.t_omega0.front() - t_omega0.back()) < 1e-9) {
        start = 1;  // drop the duplicated boundary sample
    }
    t_omega0.insert(t_omega0.end(), tail.t_omega0.begin() + static_cast<long>(start),
                    tail.t_omega0.end());
    t_ms.insert(t_ms.end(), tail.t_ms.begin() + static_cast<long>(start), tail.t_ms.end());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i].insert(values[i].end(), tail.values[i].begin() + static_cast<long>(start),
                         tail.values[i].end());
    }
    final_state = tail.final_state;
    quality.merge(tail.quality);
    steps_taken += tail.steps_taken;
    steps_rejected += tail.steps_rejected;
}

Matrix rhs(const LindbladModel& model, const Matrix& rho) {
    model.validate();
    const int d = model.h.dim();
    if (rho.rows() != d || rho.cols() != d) {
        throw std::invalid_argument("rhs: state dimension mismatch");
    }
    const Complex mi(0.0, -1.0);
    Matrix out = mi * (model.h.matrix * rho - rho * model.h.matrix);
    for (const auto& ch : model.channels) {
        if (ch.rate == 0.0) continue;
        const Matrix& c = ch.c.matrix;
        Matrix cdc = c.adjoint() * c;
        out += ch.rate * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
    }
    return 0.5 * (out + out.adjoint().eval());
}

double rhs_max_norm(const LindbladModel& model, const Matrix& rho) {
    return rhs(model, rho).cwiseAbs().maxCoeff();
}

namespace {

using Sparse = Eigen::SparseMatrix<Complex>;

constexpr double kSparsityDropTol = 1e-15;

// Phase-modulated sparse matrix: value[i] = base[i] * exp(i freq[i] t).
struct ModulatedSparse {
    Sparse mat;
    std::vector<Complex> base;
    std::vector<double> freq;
    bool is_static{true};

    void finalize_from(std::unordered_map<long long, std::pair<Complex, double>>& entries,
                       int d) {
        std::vector<Eigen::Triplet<Complex>> trips;
        trips.reserve(entries.size());
        for (const auto& [key, bf] : entries) {
            trips.emplace_back(static_cast<int>(key / d), static_cast<int>(key % d), bf.first);
        }
        mat.resize(d, d);
        mat.setFromTriplets(trips.begin(), trips.end());
        mat.makeCompressed();
        base.resize(static_cast<std::size_t>(mat.nonZeros()));
        freq.resize(static_cast<std::size_t>(mat.nonZeros()));
        is_static = true;
        std::size_t idx = 0;
        for (int col = 0; col < mat.outerSize(); ++col) {
            for (Sparse::InnerIterator it(mat, col); it; ++it, ++idx) {
                const auto& bf = entries.at(static_cast<long long>(it.row()) * d + it.col());
                base[idx] = bf.first;
                freq[idx] = bf.second;
                if (bf.second != 0.0) is_static = false;
            }
        }
    }

    void set_time(double t) {
        if (is_static) return;
        Complex* vals = mat.valuePtr();
        for (std::size_t i = 0; i < base.size(); ++i) {
            vals[i] = freq[i] == 0.0 ? base[i]
                                     : base[i] * std::exp(Complex(0.0, freq[i] * t));
        }
    }
};

// Compiled form of the model used by the integrator: K(t) = -iH(t) - (1/2)
// sum rate c^dag c split into static and oscillating parts, plus the scaled
// jump operators. In the rotating frame the full Hamiltonian diagonal is
// factored out exactly.
struct CompiledModel {
    int d{0};
    bool rotating{false};
    Eigen::VectorXd frame_diag;
    ModulatedSparse k;        // K(t)
    ModulatedSparse k_adj;    // K(t)^dag
    std::vector<Sparse> jump;      // sqrt(rate) c
    std::vector<Sparse> jump_adj;  // sqrt(rate) c^dag
};

bool channels_are_eigenoperators(const LindbladModel& model, const Eigen::VectorXd& diag) {
    for (const auto& ch : model.channels) {
        if (ch.rate == 0.0) continue;
        bool have_theta = false;
        double theta = 0.0;
        const Matrix& c = ch.c.matrix;
        for (Eigen::Index j = 0; j < c.rows(); ++j) {
            for (Eigen::Index k = 0; k < c.cols(); ++k) {
                if (std::abs(c(j, k)) <= kSparsityDropTol) continue;
                const double w = diag(j) - diag(k);
                if (!have_theta) {
                    theta = w;
                    have_theta = true;
                } else if (std::abs(w - theta) > 1e-9) {
                    return false;
                }
            }
        }
    }
    return true;
}

CompiledModel compile(const LindbladModel& model, bool want_rotating) {
    model.validate();
    const int d = model.h.dim();
    CompiledModel cm;
    cm.d = d;

    const Matrix& h = model.h.matrix;
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("evolve: Hamiltonian must be Hermitian");
    }
    Eigen::VectorXd diag = h.diagonal().real();
    cm.rotating = want_rotating && channels_are_eigenoperators(model, diag);
    if (cm.rotating) cm.frame_diag = diag;

    // -(1/2) sum rate c^dag c is frame-static; -iH splits into the factored
    // diagonal (rotating) or stays whole (lab).
    std::unordered_map<long long, std::pair<Complex, double>> k_entries, kadj_entries;
    auto add = [&](std::unordered_map<long long, std::pair<Complex, double>>& m, Eigen::Index r,
                   Eigen::Index c, Complex v, double w) {
        auto [it, inserted] = m.try_emplace(static_cast<long long>(r) * d + c,
                                            std::make_pair(v, w));
        if (!inserted) {
            if (it->second.second != w) {
                throw std::logic_error("compile: conflicting frequencies on one entry");
            }
            it->second.first += v;
        }
    };

    const Complex mi(0.0, -1.0);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const Complex v = h(j, k);
            if (std::abs(v) <= kSparsityDropTol) continue;
            if (cm.rotating && j == k) continue;
            const double w = cm.rotating ? diag(j) - diag(k) : 0.0;
            add(k_entries, j, k, mi * v, w);
            add(kadj_entries, k, j, std::conj(mi * v), -w);
        }
    }

    for (const auto& ch : model.channels) {
        if (ch.rate == 0.0) continue;
        Matrix cdc = ch.c.matrix.adjoint() * ch.c.matrix;
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index k = 0; k < d; ++k) {
                const Complex v = -0.5 * ch.rate * cdc(j, k);
                if (std::abs(v) <= kSparsityDropTol) continue;
                // c^dag c is frame-invariant only entrywise when c is an
                // eigenoperator; its oscillation frequency is then zero.
                const double w = cm.rotating ? diag(j) - diag(k) : 0.0;
                add(k_entries, j, k, v, w);
                add(kadj_entries, k, j, std::conj(v), -w);
            }
        }
        const double s = std::sqrt(ch.rate);
        cm.jump.push_back(Sparse((s * ch.c.matrix).sparseView(1.0, kSparsityDropTol)));
        cm.jump_adj.push_back(
            Sparse((s * ch.c.matrix.adjoint()).sparseView(1.0, kSparsityDropTol)));
    }

    cm.k.finalize_from(k_entries, d);
    cm.k_adj.finalize_from(kadj_entries, d);
    return cm;
}

// Y = K(t) rho + rho K(t)^dag + sum_k (s c) rho (s c)^dag
void eval_rhs(CompiledModel& cm, double t, const Matrix& rho, Matrix& y, Matrix& work) {
    cm.k.set_time(t);
    cm.k_adj.set_time(t);
    y.noalias() = cm.k.mat * rho;
    y.noalias() += rho * cm.k_adj.mat;
    for (std::size_t i = 0; i < cm.jump.size(); ++i) {
        work.noalias() = cm.jump[i] * rho;
        y.noalias() += work * cm.jump_adj[i];
    }
}

double error_norm(const Matrix& err, const Matrix& y_old, const Matrix& y_new, double atol,
                  double rtol) {
    double acc = 0.0;
    const auto n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale =
            atol + rtol * std::max(std::abs(y_old.data()[i]), std::abs(y_new.data()[i]));
        const double q = std::abs(err.data()[i]) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

// Dormand-Prince 5(4) coefficients.
struct DP5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
    static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
    static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
    static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
    static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
    static constexpr double e7 = -1.0 / 40;
};

void to_lab_frame(const CompiledModel& cm, const Matrix& rho_rot, double t, Matrix& rho_lab) {
    if (!cm.rotating) {
        rho_lab = rho_rot;
        return;
    }
    Vector u(cm.d);
    for (int j = 0; j < cm.d; ++j) {
        u(j) = std::exp(Complex(0.0, -cm.frame_diag(j) * t));
    }
    rho_lab = (u * u.adjoint()).cwiseProduct(rho_rot);
}

int auto_positivity_stride(int d) {
    if (d <= 160) return 1;
    if (d <= 512) return 10;
    return 25;
}

}  // namespace

TimeSeries evolve(const LindbladModel& model, const DensityMatrix& rho0, double t_final,
                  const IntegratorConfig& cfg, const std::vector<Observable>& observables,
                  double t0) {
    cfg.validate();
    model.validate();
    if (!(rho0.space == model.h.space)) {
        throw std::invalid_argument("evolve: initial state space differs from model");
    }
    if (t_final < 0.0) throw std::invalid_argument("evolve: t_final must be >= 0");

    CompiledModel cm = compile(model, cfg.use_rotating_frame);
    const int d = cm.d;

    TimeSeries ts;
    for (const auto& obs : observables) {
        ts.columns.push_back(obs.name);
        ts.values.emplace_back();
    }
    ts.columns.push_back("trace");
    ts.values.emplace_back();

    const int stride = cfg.positivity_check_stride > 0 ? cfg.positivity_check_stride
                                                       : auto_positivity_stride(d);
    Matrix rho_lab(d, d);
    long long sample_index = 0;
    auto record = [&](const Matrix& rho_rot, double t, bool force_eig) {
        to_lab_frame(cm, rho_rot, t, rho_lab);
        rho_lab = 0.5 * (rho_lab + rho_lab.adjoint().eval());
        ts.t_omega0.push_back(t0 + t);
        ts.t_ms.push_back((t0 + t) / cfg.omega0_rad_per_ms);
        for (std::size_t i = 0; i < observables.size(); ++i) {
            ts.values[i].push_back(observables[i].eval(rho_lab, model.h.space));
        }
        const double tr = rho_lab.trace().real();
        ts.values[observables.size()].push_back(tr);
        ts.quality.max_trace_dev = std::max(ts.quality.max_trace_dev, std::abs(tr - 1.0));
        if (force_eig || sample_index % stride == 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(rho_lab, Eigen::EigenvaluesOnly);
            ts.quality.min_eigenvalue =
                std::min(ts.quality.min_eigenvalue, es.eigenvalues().minCoeff());
        }
        ++sample_index;
    };

    Matrix y = rho0.matrix;
    Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), k5(d, d), k6(d, d), k7(d, d);
    Matrix ytmp(d, d), ynew(d, d), yerr(d, d), work(d, d);

    double t = 0.0;
    record(y, 0.0, true);

    eval_rhs(cm, t, y, k1, work);

    // initial step from the scaled magnitudes of y and f
    double h;
    {
        const double d0 = error_norm(y, y, y, cfg.atol, cfg.rtol);
        const double d1 = error_norm(k1, y, y, cfg.atol, cfg.rtol);
        h = (d0 < 1e-10 || d1 < 1e-10) ? 1e-4 : 0.01 * d0 / d1;
        h = std::min({h, cfg.max_step, t_final > 0.0 ? t_final : cfg.max_step});
        if (h <= 0.0) h = 1e-4;
    }

    double next_sample = std::min(cfg.sample_dt, t_final);
    bool fsal_valid = true;
    double prev_err = 1.0;

    const double t_eps = 1e-12 * std::max(1.0, t_final);
    while (t_final - t > t_eps) {
        const double h_cap = std::min({cfg.max_step, next_sample - t, t_final - t});
        const double h_try = std::min(h, h_cap);

        // a stall is the controller collapsing, not a short endpoint-fitting step
        if (h < 1e-13 * std::max(1.0, std::abs(t)) || h_try <= 0.0) {
            ts.quality.converged = false;
            ts.quality.warnings.push_back("integration stalled at t = " + std::to_string(t0 + t) +
                                          " (step underflow)");
            warn(ts.quality.warnings.back());
            break;
        }

        if (!fsal_valid) eval_rhs(cm, t, y, k1, work);

        ytmp = y + h_try * (DP5::a21 * k1);
        eval_rhs(cm, t + DP5::c2 * h_try, ytmp, k2, work);
        ytmp = y + h_try * (DP5::a31 * k1 + DP5::a32 * k2);
        eval_rhs(cm, t + DP5::c3 * h_try, ytmp, k3, work);
        ytmp = y + h_try * (DP5::a41 * k1 + DP5::a42 * k2 + DP5::a43 * k3);
        eval_rhs(cm, t + DP5::c4 * h_try, ytmp, k4, work);
        ytmp = y + h_try * (DP5::a51 * k1 + DP5::a52 * k2 + DP5::a53 * k3 + DP5::a54 * k4);
        eval_rhs(cm, t + DP5::c5 * h_try, ytmp, k5, work);
        ytmp = y + h_try * (DP5::a61 * k1 + DP5::a62 * k2 + DP5::a63 * k3 + DP5::a64 * k4 +
                            DP5::a65 * k5);
        eval_rhs(cm, t + h_try, ytmp, k6, work);
        ynew = y + h_try * (DP5::b1 * k1 + DP5::b3 * k3 + DP5::b4 * k4 + DP5::b5 * k5 +
                            DP5::b6 * k6);
        eval_rhs(cm, t + h_try, ynew, k7, work);

        yerr = h_try * (DP5::e1 * k1 + DP5::e3 * k3 + DP5::e4 * k4 + DP5::e5 * k5 +
                        DP5::e6 * k6 + DP5::e7 * k7);
        double err = error_norm(yerr, y, ynew, cfg.atol, cfg.rtol);

        if (!std::isfinite(err)) {
            h = 0.1 * h_try;
            fsal_valid = false;
            ++ts.steps_rejected;
            continue;
        }

        if (err <= 1.0) {
            t += h_try;
            y = ynew;
            y = 0.5 * (y + y.adjoint().eval());
            k1 = k7;  // FSAL
            fsal_valid = true;
            ++ts.steps_taken;

            if (t >= next_sample - t_eps) {
                const bool is_final = t >= t_final - t_eps;
                record(y, t, is_final);
                next_sample = std::min(next_sample + cfg.sample_dt, t_final);
            }

            const double fac =
                0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0);
            h = h_try * std::clamp(fac, 0.2, 5.0);
            prev_err = std::max(err, 1e-10);
        } else {
            h = h_try * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            fsal_valid = true;  // k1 still matches (t, y)
            ++ts.steps_rejected;
        }
    }

    // final state in the lab frame
    to_lab_frame(cm, y, t, rho_lab);
    rho_lab = 0.5 * (rho_lab + rho_lab.adjoint().eval());
    const Complex tr = rho_lab.trace();
    ts.quality.max_trace_dev = std::max(ts.quality.max_trace_dev, std::abs(tr - Complex(1.0)));
    if (ts.quality.max_trace_dev > 1e-7) {
        ts.quality.trace_ok = false;
        ts.quality.warnings.push_back("trace deviation " +
                                      std::to_string(ts.quality.max_trace_dev) + " exceeds 1e-7");
    }
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho_lab, Eigen::EigenvaluesOnly);
        ts.quality.min_eigenvalue =
            std::min(ts.quality.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    if (ts.quality.min_eigenvalue < -1e-6) {
        ts.quality.positivity_ok = false;
        ts.quality.warnings.push_back("positivity violation: min eigenvalue " +
                                      std::to_string(ts.quality.min_eigenvalue));
    }
    rho_lab /= tr;  // exact unit trace for downstream contracts
    rho_lab = 0.5 * (rho_lab + rho_lab.adjoint().eval());
    ts.final_state = DensityMatrix(model.h.space, rho_lab);
    return ts;
}

Matrix liouvillian_matrix(const LindbladModel& model) {
    model.validate();
    const int d = model.h.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Complex mi(0.0, -1.0);
    // column-stacking convention: vec(A X B) = kron(B^T, A) vec(X)
    Matrix L = mi * (kron(id, model.h.matrix) - kron(model.h.matrix.transpose(), id));
    for (const auto& ch : model.channels) {
        if (ch.rate == 0.0) continue;
        const Matrix& c = ch.c.matrix;
        Matrix cdc = c.adjoint() * c;
        L += ch.rate * (kron(c.conjugate(), c) - 0.5 * kron(id, cdc) -
                        0.5 * kron(cdc.transpose(), id));
    }
    return L;
}

namespace {

DensityMatrix steady_state_dense(const LindbladModel& model, const SteadyStateOptions& opts) {
    const int d = model.h.dim();
    Matrix L = liouvillian_matrix(model);
    Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    int null_dim = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) <= opts.degeneracy_rel_tol * smax) ++null_dim;
    }
    if (null_dim > 1) {
        throw DegenerateSteadyStateError(
            null_dim, "steady_state: degenerate null space of dimension " +
                          std::to_string(null_dim) + "; pick an initial state explicitly");
    }
    Vector v = svd.matrixV().col(sigma.size() - 1);
    Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-10) {
        throw DegenerateSteadyStateError(
            2, "steady_state: null vector is traceless; steady state is not unique");
    }
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double res = rhs_max_norm(model, rho);
    if (res > 1e-8) {
        throw std::runtime_error("steady_state: dense-route residual " + std::to_string(res) +
                                 " exceeds 1e-8");
    }
    return DensityMatrix(model.h.space, rho);
}

DensityMatrix steady_state_long_time(const LindbladModel& model, const DensityMatrix& rho0,
                                     const SteadyStateOptions& opts) {
    IntegratorConfig cfg;
    cfg.rtol = 1e-8;
    cfg.atol = 1e-12;
    cfg.max_step = 20.0;
    cfg.omega0_rad_per_ms = 1.0;
    cfg.positivity_check_stride = 1 << 30;
    // lab frame: the steady state is static there, while in the rotating
    // frame its coherences would keep the controller phase-locked forever
    cfg.use_rotating_frame = false;

    DensityMatrix rho = rho0;
    double t = 0.0;
    const double chunk = 250.0;
    while (t < opts.t_max) {
        cfg.sample_dt = chunk;
        TimeSeries ts = evolve(model, rho, chunk, cfg);
        rho = ts.final_state;
        t += chunk;
        if (!ts.quality.converged) break;
        if (rhs_max_norm(model, rho.matrix) < opts.rhs_tol) break;
    }
    const double res = rhs_max_norm(model, rho.matrix);
    if (res > 1e-8) {
        throw std::runtime_error("steady_state: long-time residual " + std::to_string(res) +
                                 " above 1e-8 at t_max; slowest mode not yet relaxed");
    }
    return rho;
}

}  // namespace

DensityMatrix steady_state(const LindbladModel& model, const DensityMatrix& rho0,
                           const SteadyStateOptions& opts) {
    model.validate();
    const long long d = model.h.dim();
    bool dense = opts.route == SteadyStateOptions::Route::DenseLiouvillian;
    if (opts.route == SteadyStateOptions::Route::Auto) dense = d * d <= 4096;
    if (dense && d * d > 4096) {
        throw std::invalid_argument("steady_state: dense route limited to d^2 <= 4096");
    }
    return dense ? steady_state_dense(model, opts) : steady_state_long_time(model, rho0, opts);
}

DensityMatrix steady_state(const LindbladModel& model, const SteadyStateOptions& opts) {
    const int d = model.h.dim();
    DensityMatrix mixed(model.h.space, Matrix::Identity(d, d) / static_cast<double>(d));
    return steady_state(model, mixed, opts);
}

double SweepResult::p_donor_at(double delta_e, double n_bar) const {
    for (const auto& pt : points) {
        if (std::abs(pt.delta_e - delta_e) < 1e-12 && std::abs(pt.n_bar - n_bar) < 1e-12) {
            return pt.p_donor;
        }
    }
    throw std::invalid_argument("SweepResult: no such grid point");
}

SweepResult delta_e_sweep(const ETParams& p_template, const std::vector<double>& n_bars,
                          const std::vector<double>& delta_es, double gamma, int n_c) {
    p_template.validate();
    if (gamma <= 0.0) throw std::invalid_argument("delta_e_sweep: gamma must be > 0");
    for (double de : delta_es) {
        const double n = std::round(de);
        if (n < 1.0 || std::abs(de - n) > 1e-9) {
            throw std::invalid_argument(
                "delta_e_sweep: grid must sit on resonances delta_e = n omega0, n >= 1");
        }
    }

    SweepResult out;
    auto pauli = pauli_ops();
    for (double nb : n_bars) {
        double best_de = delta_es.front();
        double best_pd = std::numeric_limits<double>::infinity();
        for (double de : delta_es) {
            ETParams p = p_template;
            p.delta_e = de;
            Operator h = build_single_site_et(p, n_c);
            Operator a_emb = embed(fock_ops(n_c).a, 1, h.space);
            LindbladModel model{h, thermal_channels(a_emb, BathParams{gamma, nb})};
            DensityMatrix ss = steady_state(model);
            Operator p_donor = embed(Operator(pauli.sz.space,
                                              0.5 * (Matrix::Identity(2, 2) + pauli.sz.matrix)),
                                     0, h.space);
            const double pd = expectation(p_donor, ss);
            out.points.push_back({de, nb, pd});
            if (pd < best_pd) {
                best_pd = pd;
                best_de = de;
            }
        }
        out.optimum.emplace_back(nb, best_de);
    }
    return out;
}

}  // namespace etsim
