#include "omsim/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace omsim {

namespace {
using Mat = Eigen::MatrixXcd;

Mat to_eigen(const FockDensity& r) {
    const int D = r.dim();
    Mat m(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) m(a, b) = r.rho[static_cast<std::size_t>(a) * D + b];
    return m;
}

FockDensity from_eigen(const Mat& m, int dims_c, int dims_m) {
    FockDensity r;
    r.dims_c = dims_c;
    r.dims_m = dims_m;
    const int D = dims_c * dims_m;
    r.rho.assign(static_cast<std::size_t>(D) * D, cplx(0, 0));
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) r.rho[static_cast<std::size_t>(a) * D + b] = m(a, b);
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Moment maps and equations.

MomentSet bts_moments(const BtsState& s) {
    const double c2 = std::cos(s.theta) * std::cos(s.theta);
    const double s2 = std::sin(s.theta) * std::sin(s.theta);
    MomentSet m;
    m.N_c = s.n_c_th * c2 + s.n_m_th * s2;
    m.N_m = s.n_m_th * c2 + s.n_c_th * s2;
    m.C = cplx(0.0, 0.5) * std::exp(cplx(0.0, -s.phi_B)) * (s.n_c_th - s.n_m_th) *
          std::sin(2.0 * s.theta);
    m.S = cplx(0.0, 0.0);
    return m;
}

MomentSet tmsts_moments(const TmstsState& s) {
    const double c2 = std::cosh(s.u) * std::cosh(s.u);
    const double s2 = std::sinh(s.u) * std::sinh(s.u);
    MomentSet m;
    m.N_c = s.n_c_th * c2 + (s.n_m_th + 1.0) * s2;
    m.N_m = s.n_m_th * c2 + (s.n_c_th + 1.0) * s2;
    m.S = -0.5 * std::exp(cplx(0.0, s.phi_S)) * std::sinh(2.0 * s.u) *
          (s.n_c_th + s.n_m_th + 1.0);
    m.C = cplx(0.0, 0.0);
    return m;
}

BtsState bts_from_moments(const MomentSet& m) {
    const double n_sum = m.N_c + m.N_m;
    const double dN = m.N_c - m.N_m;
    const double D = std::sqrt(dN * dN + 4.0 * std::norm(m.C));
    BtsState s;
    if (D < 1e-300) {
        // Balanced thermal state: the mixing angle is pure gauge here.
        s.theta = 0.0;
        s.phi_B = 0.0;
        s.n_c_th = s.n_m_th = 0.5 * n_sum;
        return s;
    }
    // Branch choice: delta_n_th = n_m_th - n_c_th = +D, theta in [0, pi/2].
    const double cos2t = -dN / D;
    // C = (i/2) e^{-i phi_B} (n_c_th - n_m_th) sin 2theta
    //   => 2 i C / delta_n_th = sin(2 theta) e^{-i phi_B}.
    const cplx W = cplx(0.0, 2.0) * m.C / D;
    const double sin2t = std::abs(W);
    s.theta = 0.5 * std::atan2(sin2t, cos2t);
    s.phi_B = (sin2t > 0.0) ? -std::arg(W) : 0.0;
    s.n_m_th = 0.5 * (n_sum + D);
    s.n_c_th = 0.5 * (n_sum - D);
    if (s.n_c_th < 0.0 && s.n_c_th > -1e-12) s.n_c_th = 0.0;
    return s;
}

bool bts_extraction_conditioned(const MomentSet& m, bool require_phase) {
    const double n_sum = m.N_c + m.N_m;
    const double dN = m.N_c - m.N_m;
    const double D = std::sqrt(dN * dN + 4.0 * std::norm(m.C));
    if (!(D > 1e-8 * (1.0 + n_sum))) return false;
    if (require_phase) {
        const double sin2t = 2.0 * std::abs(m.C) / D;
        if (!(sin2t > 1e-6)) return false;
    }
    return true;
}

MomentSet moment_rhs_red_dimensionless(const MomentSet& m, double zeta, double g_r,
                                       double detuning_ratio, double n_c_b,
                                       double n_m_b) {
    const cplx i1(0.0, 1.0);
    MomentSet d;
    const cplx anti = m.C - std::conj(m.C);
    d.N_c = (i1 * 0.5 * g_r * anti).real() - (1.0 + zeta) * (m.N_c - n_c_b);
    d.N_m = (-i1 * 0.5 * g_r * anti).real() - (1.0 - zeta) * (m.N_m - n_m_b);
    d.C = -i1 * detuning_ratio * m.C + i1 * 0.5 * g_r * (m.N_c - m.N_m) - m.C;
    d.S = cplx(0.0, 0.0);  // pair channel stays empty under the beam-splitter drive
    return d;
}

MomentSet moment_rhs_blue_dimensionless(const MomentSet& m, double zeta, double g_b,
                                        double n_c_b, double n_m_b, double phi_L) {
    const cplx i1(0.0, 1.0);
    const cplx a = std::exp(cplx(0.0, phi_L));
    MomentSet d;
    const cplx pump = i1 * 0.5 * g_b * (a * std::conj(m.S) - std::conj(a) * m.S);
    d.N_c = pump.real() + (1.0 + zeta) * (n_c_b - m.N_c);
    d.N_m = pump.real() + (1.0 - zeta) * (n_m_b - m.N_m);
    d.S = i1 * 0.5 * g_b * a * (m.N_c + m.N_m + 1.0) - m.S;
    d.C = cplx(0.0, 0.0);
    return d;
}

MomentSet moment_rhs_red(const MomentSet& m, const SystemParams& p, double G,
                         double Delta_plus) {
    const auto dp = dimensionless_params(p);
    MomentSet d = moment_rhs_red_dimensionless(m, dp.zeta, 2.0 * G / dp.gamma_plus,
                                               Delta_plus / dp.gamma_plus, p.n_c_bath,
                                               p.n_m_bath);
    d.N_c *= dp.gamma_plus;
    d.N_m *= dp.gamma_plus;
    d.C *= dp.gamma_plus;
    d.S *= dp.gamma_plus;
    return d;
}

MomentSet moment_rhs_blue(const MomentSet& m, const SystemParams& p, double G,
                          double phi_L) {
    const auto dp = dimensionless_params(p);
    MomentSet d = moment_rhs_blue_dimensionless(m, dp.zeta, 2.0 * G / dp.gamma_plus,
                                                p.n_c_bath, p.n_m_bath, phi_L);
    d.N_c *= dp.gamma_plus;
    d.N_m *= dp.gamma_plus;
    d.C *= dp.gamma_plus;
    d.S *= dp.gamma_plus;
    return d;
}

MomentRun integrate_moments(double zeta, const PumpProfile& profile, double n_c_b,
                            double n_m_b, const MomentSet& m0, double t0, double t1,
                            const IntegratorConfig& cfg,
                            const std::vector<double>& sample_times) {
    profile.validate();
    cfg.validate();
    const bool red = profile.sideband == Sideband::Red;
    const double dtp = profile.detuning_over_gamma_plus;

    MomentRun run;
    auto to_vec = [&](const MomentSet& m) -> std::vector<double> {
        const cplx z = red ? m.C : m.S;
        return {m.N_c, m.N_m, z.real(), z.imag()};
    };
    auto from_vec = [&](const std::vector<double>& y) {
        MomentSet m;
        m.N_c = y[0];
        m.N_m = y[1];
        (red ? m.C : m.S) = cplx(y[2], y[3]);
        return m;
    };

    std::vector<double> bounds{t0};
    for (const auto& seg : profile.segments)
        if (seg.t_start > t0 && seg.t_start < t1) bounds.push_back(seg.t_start);
    bounds.push_back(t1);

    MomentSet m = m0;
    for (std::size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
        const double seg_a = bounds[bi], seg_b = bounds[bi + 1];
        const double g = profile.g_at(seg_a);
        auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
            (void)t;
            const MomentSet mm = from_vec(y);
            const MomentSet dm =
                red ? moment_rhs_red_dimensionless(mm, zeta, g, dtp, n_c_b, n_m_b)
                    : moment_rhs_blue_dimensionless(mm, zeta, g, n_c_b, n_m_b,
                                                    profile.phi_L);
            const cplx z = red ? dm.C : dm.S;
            dy = {dm.N_c, dm.N_m, z.real(), z.imag()};
        };
        std::vector<double> want;
        for (double ts : sample_times)
            if (ts >= seg_a && ts <= seg_b) want.push_back(ts);
        if (bi > 0 && !want.empty() && !run.times.empty() && want.front() == run.times.back())
            want.erase(want.begin());
        auto sink = [&](double ts, const std::vector<double>& y) {
            run.times.push_back(ts);
            run.moments.push_back(from_vec(y));
        };
        const OdeResult r = integrate(rhs, to_vec(m), seg_a, seg_b, cfg, {}, want, sink);
        m = from_vec(r.y_final);
    }
    run.final_state = m;
    return run;
}

double delta12_from_moments(const MomentSet& m, double beta_c, double beta_m) {
    return m.N_c + m.N_m + 1.0 +
           2.0 * (m.S * std::exp(cplx(0.0, beta_m + beta_c))).real();
}

double delta12_min_from_moments(const MomentSet& m) {
    return m.N_c + m.N_m + 1.0 - 2.0 * std::abs(m.S);
}

std::array<double, 16> covariance_from_moments(const MomentSet& m) {
    std::array<double, 16> sg{};
    auto at = [&](int r, int c) -> double& { return sg[static_cast<std::size_t>(4 * r + c)]; };
    const double vc = 0.25 * (2.0 * m.N_c + 1.0);
    const double vm = 0.25 * (2.0 * m.N_m + 1.0);
    at(0, 0) = vc;
    at(1, 1) = vc;
    at(2, 2) = vm;
    at(3, 3) = vm;
    const cplx sp = m.S + m.C;
    const cplx sm = m.S - m.C;
    at(0, 2) = at(2, 0) = 0.5 * sp.real();
    at(0, 3) = at(3, 0) = -0.5 * sp.imag();
    at(1, 2) = at(2, 1) = -0.5 * sm.imag();
    at(1, 3) = at(3, 1) = -0.5 * sm.real();
    return sg;
}

double physicality_min_eigenvalue(const std::array<double, 16>& sigma) {
    Mat M(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) M(r, c) = sigma[static_cast<std::size_t>(4 * r + c)];
    // [x, x(pi/2)] = -i/2 per mode: sigma + i Omega / 2 with Omega
    // block-diagonal [[0,-1/2],[1/2,0]].
    M(0, 1) += cplx(0.0, -0.25);
    M(1, 0) += cplx(0.0, 0.25);
    M(2, 3) += cplx(0.0, -0.25);
    M(3, 2) += cplx(0.0, 0.25);
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Fock-space machinery.

double FockDensity::trace() const {
    const int D = dim();
    double tr = 0.0;
    for (int a = 0; a < D; ++a) tr += rho[static_cast<std::size_t>(a) * D + a].real();
    return tr;
}

double FockDensity::hermiticity_residual() const {
    const int D = dim();
    double worst = 0.0;
    for (int a = 0; a < D; ++a)
        for (int b = a; b < D; ++b) {
            const cplx diff = rho[static_cast<std::size_t>(a) * D + b] -
                              std::conj(rho[static_cast<std::size_t>(b) * D + a]);
            worst = std::max(worst, std::abs(diff));
        }
    return worst;
}

double FockDensity::top_layer_occupancy() const {
    double p = 0.0;
    for (int j = 0; j < dims_m; ++j) p += at(dims_c - 1, j, dims_c - 1, j).real();
    for (int i = 0; i < dims_c; ++i)
        if (i != dims_c - 1) p += at(i, dims_m - 1, i, dims_m - 1).real();
    return p;
}

void FockDensity::validate() const {
    if (dims_c < 2 || dims_m < 2) throw ValidationError("FockDensity: dims must be >= 2");
    if (rho.size() != static_cast<std::size_t>(dim()) * dim())
        throw ValidationError("FockDensity: storage size mismatch");
    if (std::abs(trace() - 1.0) > 1e-6)
        throw ValidationError("FockDensity: trace must be within 1e-6 of 1");
    if (hermiticity_residual() > 1e-10)
        throw ValidationError("FockDensity: not Hermitian to 1e-10");
}

FockDensity fock_thermal(int dims_c, int dims_m, double n_c, double n_m) {
    if (dims_c < 2 || dims_m < 2) throw DomainError("fock_thermal: dims must be >= 2");
    if (n_c < 0.0 || n_m < 0.0) throw DomainError("fock_thermal: occupations must be >= 0");
    auto weights = [](int dims, double n) {
        std::vector<double> w(static_cast<std::size_t>(dims));
        double norm = 0.0;
        for (int k = 0; k < dims; ++k) {
            w[static_cast<std::size_t>(k)] =
                (n == 0.0) ? (k == 0 ? 1.0 : 0.0)
                           : std::pow(n / (1.0 + n), k) / (1.0 + n);
            norm += w[static_cast<std::size_t>(k)];
        }
        for (auto& x : w) x /= norm;  // renormalize the truncated tail
        return w;
    };
    const auto wc = weights(dims_c, n_c);
    const auto wm = weights(dims_m, n_m);
    FockDensity r;
    r.dims_c = dims_c;
    r.dims_m = dims_m;
    const int D = dims_c * dims_m;
    r.rho.assign(static_cast<std::size_t>(D) * D, cplx(0, 0));
    for (int i = 0; i < dims_c; ++i)
        for (int j = 0; j < dims_m; ++j)
            r.at(i, j, i, j) = wc[static_cast<std::size_t>(i)] * wm[static_cast<std::size_t>(j)];
    return r;
}

FockDensity fock_vacuum(int dims_c, int dims_m) {
    return fock_thermal(dims_c, dims_m, 0.0, 0.0);
}

FockDensity fock_single_phonon(int dims_c, int dims_m) {
    FockDensity r = fock_vacuum(dims_c, dims_m);
    r.at(0, 0, 0, 0) = 0.0;
    r.at(0, 1, 0, 1) = 1.0;
    return r;
}

namespace {

Mat mode_annihilation(int dims_c, int dims_m, bool cavity) {
    const int D = dims_c * dims_m;
    Mat a = Mat::Zero(D, D);
    for (int i = 0; i < dims_c; ++i)
        for (int j = 0; j < dims_m; ++j) {
            if (cavity && i + 1 < dims_c)
                a((i)*dims_m + j, (i + 1) * dims_m + j) = std::sqrt(i + 1.0);
            if (!cavity && j + 1 < dims_m)
                a(i * dims_m + j, i * dims_m + (j + 1)) = std::sqrt(j + 1.0);
        }
    return a;
}

FockDensity conjugate_by_exp_i(const FockDensity& r, const Mat& herm) {
    Eigen::SelfAdjointEigenSolver<Mat> es(herm);
    const int D = r.dim();
    Mat phases = Mat::Zero(D, D);
    for (int k = 0; k < D; ++k)
        phases(k, k) = std::exp(cplx(0.0, es.eigenvalues()(k)));
    const Mat U = es.eigenvectors() * phases * es.eigenvectors().adjoint();
    const Mat out = U * to_eigen(r) * U.adjoint();
    return from_eigen(out, r.dims_c, r.dims_m);
}

}  // namespace

FockDensity apply_beam_splitter(const FockDensity& r, double theta, double phi_B) {
    const Mat d = mode_annihilation(r.dims_c, r.dims_m, true);
    const Mat b = mode_annihilation(r.dims_c, r.dims_m, false);
    const cplx ei = std::exp(cplx(0.0, phi_B));
    const Mat herm = theta * (d.adjoint() * b * ei + d * b.adjoint() * std::conj(ei));
    return conjugate_by_exp_i(r, herm);
}

FockDensity apply_two_mode_squeeze(const FockDensity& r, double u, double phi_S) {
    const Mat d = mode_annihilation(r.dims_c, r.dims_m, true);
    const Mat b = mode_annihilation(r.dims_c, r.dims_m, false);
    const cplx xi = u * std::exp(cplx(0.0, phi_S));
    // S = exp(xi* d b - xi d^dag b^dag) = exp(i H), H Hermitian.
    const Mat gen = std::conj(xi) * (d * b) - xi * (d.adjoint() * b.adjoint());
    const Mat herm = cplx(0.0, -1.0) * gen;
    return conjugate_by_exp_i(r, herm);
}

double fidelity(const FockDensity& rho, const FockDensity& sigma) {
    const Mat R = to_eigen(rho), S = to_eigen(sigma);
    Eigen::SelfAdjointEigenSolver<Mat> es(R);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Mat sqrtR = es.eigenvectors() * ev.cwiseSqrt().asDiagonal().toDenseMatrix().cast<cplx>() *
                es.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es2(sqrtR * S * sqrtR);
    Eigen::VectorXd ev2 = es2.eigenvalues().cwiseMax(0.0);
    const double tr = ev2.cwiseSqrt().sum();
    return tr * tr;
}

double fock_min_eigenvalue(const FockDensity& rho) {
    Eigen::SelfAdjointEigenSolver<Mat> es(to_eigen(rho));
    return es.eigenvalues().minCoeff();
}

void fock_lindblad_rhs(const FockParams& fp, const std::vector<cplx>& rho,
                       std::vector<cplx>& drho) {
    const int Nc = fp.dims_c, Nm = fp.dims_m;
    const int D = Nc * Nm;
    drho.assign(rho.size(), cplx(0, 0));
    std::vector<double> sq(static_cast<std::size_t>(std::max(Nc, Nm)) + 1);
    for (std::size_t n = 0; n < sq.size(); ++n) sq[n] = std::sqrt(static_cast<double>(n));

    const double kap = 1.0 + fp.zeta;           // cavity rate over Gamma_plus
    const double gam = 1.0 - fp.zeta;           // mechanical rate
    const double half_g = 0.5 * fp.g;
    const cplx i1(0.0, 1.0);
    const cplx eL = std::exp(cplx(0.0, fp.phi_L));
    const bool red = fp.sideband == Sideband::Red;

    auto R = [&](int i, int j, int k, int l) -> cplx {
        if (i < 0 || j < 0 || k < 0 || l < 0 || i >= Nc || j >= Nm || k >= Nc || l >= Nm)
            return cplx(0, 0);
        return rho[static_cast<std::size_t>(i * Nm + j) * D + (k * Nm + l)];
    };

    for (int i = 0; i < Nc; ++i)
        for (int j = 0; j < Nm; ++j)
            for (int k = 0; k < Nc; ++k)
                for (int l = 0; l < Nm; ++l) {
                    cplx acc(0, 0);
                    const cplx r0 = R(i, j, k, l);

                    // -i [H, rho]
                    cplx Hr(0, 0), rH(0, 0);
                    if (red) {
                        Hr += -fp.detuning_ratio * static_cast<double>(i) * r0;
                        rH += -fp.detuning_ratio * static_cast<double>(k) * r0;
                        Hr += -half_g * (sq[i + 1] * sq[j] * R(i + 1, j - 1, k, l) +
                                         sq[i] * sq[j + 1] * R(i - 1, j + 1, k, l));
                        rH += -half_g * (sq[k] * sq[l + 1] * R(i, j, k - 1, l + 1) +
                                         sq[k + 1] * sq[l] * R(i, j, k + 1, l - 1));
                    } else {
                        // H = -(g/2)(e^{i phi_L} d^dag b^dag + e^{-i phi_L} d b)
                        Hr += -half_g * (eL * sq[i] * sq[j] * R(i - 1, j - 1, k, l) +
                                         std::conj(eL) * sq[i + 1] * sq[j + 1] *
                                             R(i + 1, j + 1, k, l));
                        rH += -half_g * (eL * sq[k + 1] * sq[l + 1] * R(i, j, k + 1, l + 1) +
                                         std::conj(eL) * sq[k] * sq[l] * R(i, j, k - 1, l - 1));
                    }
                    acc += -i1 * (Hr - rH);

                    // kappa (n_c_b + 1) D[d]
                    acc += kap * (fp.n_c_b + 1.0) *
                           (sq[i + 1] * sq[k + 1] * R(i + 1, j, k + 1, l) -
                            0.5 * static_cast<double>(i + k) * r0);
                    // kappa n_c_b D[d^dag]
                    if (fp.n_c_b != 0.0)
                        acc += kap * fp.n_c_b *
                               (sq[i] * sq[k] * R(i - 1, j, k - 1, l) -
                                0.5 * static_cast<double>(i + k + 2) * r0);
                    // gamma_m (n_m_b + 1) D[b]
                    acc += gam * (fp.n_m_b + 1.0) *
                           (sq[j + 1] * sq[l + 1] * R(i, j + 1, k, l + 1) -
                            0.5 * static_cast<double>(j + l) * r0);
                    // gamma_m n_m_b D[b^dag]
                    if (fp.n_m_b != 0.0)
                        acc += gam * fp.n_m_b *
                               (sq[j] * sq[l] * R(i, j - 1, k, l - 1) -
                                0.5 * static_cast<double>(j + l + 2) * r0);

                    drho[static_cast<std::size_t>(i * Nm + j) * D + (k * Nm + l)] = acc;
                }
}

FockDensity fock_lindblad_rhs(const FockDensity& rho, const SystemParams& p,
                              const PumpProfile& pump) {
    pump.validate();
    const auto dp = dimensionless_params(p);
    FockParams fp;
    fp.dims_c = rho.dims_c;
    fp.dims_m = rho.dims_m;
    fp.sideband = pump.sideband;
    fp.zeta = dp.zeta;
    fp.g = pump.g_at(0.0);
    fp.detuning_ratio = pump.detuning_over_gamma_plus;
    fp.phi_L = pump.phi_L;
    fp.n_c_b = p.n_c_bath;
    fp.n_m_b = p.n_m_bath;
    FockDensity out;
    out.dims_c = rho.dims_c;
    out.dims_m = rho.dims_m;
    fock_lindblad_rhs(fp, rho.rho, out.rho);
    for (auto& z : out.rho) z *= dp.gamma_plus;
    return out;
}

FockMoments moments_from_fock(const FockDensity& r) {
    const int Nc = r.dims_c, Nm = r.dims_m;
    FockMoments m;
    for (int i = 0; i < Nc; ++i)
        for (int j = 0; j < Nm; ++j) {
            const double p = r.at(i, j, i, j).real();
            m.N_c += i * p;
            m.N_m += j * p;
            if (i + 1 < Nc && j >= 1)
                m.C += r.at(i, j, i + 1, j - 1) * std::sqrt((i + 1.0) * j);
            if (i >= 1 && j >= 1) m.S += r.at(i, j, i - 1, j - 1) * std::sqrt(1.0 * i * j);
            if (i >= 1) m.mean_d += r.at(i, j, i - 1, j) * std::sqrt(1.0 * i);
            if (j >= 1) m.mean_b += r.at(i, j, i, j - 1) * std::sqrt(1.0 * j);
            if (i >= 2) m.dd += r.at(i, j, i - 2, j) * std::sqrt(i * (i - 1.0));
            if (j >= 2) m.bb += r.at(i, j, i, j - 2) * std::sqrt(j * (j - 1.0));
        }
    return m;
}

double FockMoments::x_variance(double beta_c, double beta_m) const {
    const cplx ec = std::exp(cplx(0.0, beta_c)), em = std::exp(cplx(0.0, beta_m));
    const double x2 =
        0.25 * ((2.0 * N_m + 1.0) + (2.0 * N_c + 1.0) + 2.0 * (bb * em * em).real() +
                2.0 * (dd * ec * ec).real() + 4.0 * (S * em * ec).real() +
                4.0 * (C * em * std::conj(ec)).real());
    const double xm = (mean_b * em).real() + (mean_d * ec).real();
    return x2 - xm * xm;
}

double FockMoments::y_variance(double beta_c, double beta_m) const {
    const cplx ec = std::exp(cplx(0.0, beta_c)), em = std::exp(cplx(0.0, beta_m));
    const double y2 =
        0.25 * ((2.0 * N_m + 1.0) + (2.0 * N_c + 1.0) - 2.0 * (bb * em * em).real() -
                2.0 * (dd * ec * ec).real() + 4.0 * (S * em * ec).real() -
                4.0 * (C * em * std::conj(ec)).real());
    const double ym = -(mean_b * em).imag() + (mean_d * ec).imag();
    return y2 - ym * ym;
}

double FockMoments::delta12(double beta_c, double beta_m) const {
    return x_variance(beta_c, beta_m) + y_variance(beta_c, beta_m);
}

FockRun integrate_fock(const FockParams& fp, const FockDensity& rho0, double t0, double t1,
                       const IntegratorConfig& cfg,
                       const std::vector<double>& sample_times) {
    rho0.validate();
    cfg.validate();
    if (rho0.dims_c != fp.dims_c || rho0.dims_m != fp.dims_m)
        throw ValidationError("integrate_fock: dims mismatch");
    const std::size_t ncplx = rho0.rho.size();

    std::vector<cplx> work_in(ncplx), work_out(ncplx);
    auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        (void)t;
        const cplx* yin = reinterpret_cast<const cplx*>(y.data());
        std::copy(yin, yin + ncplx, work_in.begin());
        fock_lindblad_rhs(fp, work_in, work_out);
        dy.resize(2 * ncplx);
        std::copy(reinterpret_cast<const double*>(work_out.data()),
                  reinterpret_cast<const double*>(work_out.data()) + 2 * ncplx, dy.begin());
    };

    std::vector<double> y0(2 * ncplx);
    std::copy(reinterpret_cast<const double*>(rho0.rho.data()),
              reinterpret_cast<const double*>(rho0.rho.data()) + 2 * ncplx, y0.begin());

    FockRun run;
    FockDensity snap;
    snap.dims_c = fp.dims_c;
    snap.dims_m = fp.dims_m;
    snap.rho.resize(ncplx);
    const double trace0 = rho0.trace();
    auto sink = [&](double ts, const std::vector<double>& y) {
        const cplx* z = reinterpret_cast<const cplx*>(y.data());
        std::copy(z, z + ncplx, snap.rho.begin());
        run.times.push_back(ts);
        run.moments.push_back(moments_from_fock(snap));
        run.trace.push_back(snap.trace());
        run.top_layer.push_back(snap.top_layer_occupancy());
        run.trace_drift = std::max(run.trace_drift, std::abs(run.trace.back() - trace0));
        run.max_top_layer = std::max(run.max_top_layer, run.top_layer.back());
        run.max_hermiticity = std::max(run.max_hermiticity, snap.hermiticity_residual());
    };

    const OdeResult r = integrate(rhs, y0, t0, t1, cfg, {}, sample_times, sink);
    run.final_state.dims_c = fp.dims_c;
    run.final_state.dims_m = fp.dims_m;
    run.final_state.rho.resize(ncplx);
    const cplx* z = reinterpret_cast<const cplx*>(r.y_final.data());
    std::copy(z, z + ncplx, run.final_state.rho.begin());
    run.trusted = run.max_top_layer < 1e-6;
    return run;
}

DeviationReport compare_trajectories(const std::vector<double>& times_a,
                                     const std::map<std::string, std::vector<double>>& a,
                                     const std::vector<double>& times_b,
                                     const std::map<std::string, std::vector<double>>& b,
                                     double tol) {
    if (times_a.size() != times_b.size())
        throw GridMismatchError("compare_trajectories: different grid sizes");
    for (std::size_t i = 0; i < times_a.size(); ++i)
        if (std::abs(times_a[i] - times_b[i]) >
            1e-12 * std::max(1.0, std::abs(times_b[i])))
            throw GridMismatchError("compare_trajectories: grids differ at index " +
                                    std::to_string(i));
    DeviationReport rep;
    rep.tol = tol;
    for (const auto& [name, series_b] : b) {
        const auto it = a.find(name);
        if (it == a.end()) continue;
        const auto& series_a = it->second;
        if (series_a.size() != series_b.size())
            throw GridMismatchError("compare_trajectories: column length mismatch for " +
                                    name);
        SeriesDeviation dev;
        dev.name = name;
        for (std::size_t i = 0; i < series_b.size(); ++i) {
            dev.max_abs = std::max(dev.max_abs, std::abs(series_a[i] - series_b[i]));
            dev.scale = std::max(dev.scale, std::abs(series_b[i]));
        }
        dev.rel = dev.max_abs / std::max(dev.scale, 1e-30);
        rep.max_rel = std::max(rep.max_rel, dev.rel);
        rep.per_series.push_back(dev);
    }
    rep.pass = rep.max_rel <= tol;
    return rep;
}

}  // namespace omsim
