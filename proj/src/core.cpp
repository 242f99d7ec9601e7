#include "omsim/core.hpp"

#include <algorithm>

namespace omsim {

void SystemParams::validate() const {
    if (!(kappa > 0.0)) throw ValidationError("SystemParams: kappa must be > 0");
    if (!(gamma_m >= 0.0)) throw ValidationError("SystemParams: gamma_m must be >= 0");
    if (!(gamma0 >= 0.0)) throw ValidationError("SystemParams: gamma0 must be >= 0");
    if (!(n_c_bath >= 0.0)) throw ValidationError("SystemParams: n_c_bath must be >= 0");
    if (!(n_m_bath >= 0.0)) throw ValidationError("SystemParams: n_m_bath must be >= 0");
    // kappa > 0 and gamma_m >= 0 already pin zeta to (-1, 1] and gamma_plus > 0.
}

DimensionlessParams dimensionless_params(const SystemParams& p) {
    p.validate();
    return DimensionlessParams{p.gamma_plus(), p.zeta(),
                               0.5 * (p.n_m_bath + p.n_c_bath),
                               p.n_m_bath - p.n_c_bath};
}

double occupation_from_temperature(double omega, double temperature_K) {
    if (!(omega > 0.0)) throw DomainError("occupation_from_temperature: omega must be > 0");
    if (!(temperature_K > 0.0)) throw DomainError("occupation_from_temperature: T must be > 0");
    const double x = kHbar * omega / (kBoltzmann * temperature_K);
    // 1/(e^x - 1); expm1 overflows to inf for large x, giving a clean 0.
    return 1.0 / std::expm1(x);
}

void PumpProfile::validate() const {
    if (segments.empty()) throw ValidationError("PumpProfile: at least one segment required");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (!(segments[i].g >= 0.0))
            throw ValidationError("PumpProfile: segment strength must be >= 0");
        if (i > 0 && !(segments[i].t_start > segments[i - 1].t_start))
            throw ValidationError("PumpProfile: segments must be sorted strictly by t_start");
    }
    if (sideband == Sideband::Blue && detuning_over_gamma_plus != 0.0)
        throw ValidationError("PumpProfile: detuned blue pumping is not supported");
}

double PumpProfile::g_at(double t_tilde) const {
    double g = 0.0;  // pump off before the first segment
    for (const auto& s : segments) {
        if (s.t_start <= t_tilde)
            g = s.g;
        else
            break;
    }
    return g;
}

PumpProfile PumpProfile::constant(Sideband sb, double g, double detuning, double phi_L) {
    PumpProfile p;
    p.sideband = sb;
    p.segments = {{0.0, g}};
    p.detuning_over_gamma_plus = detuning;
    p.phi_L = phi_L;
    p.validate();
    return p;
}

void BtsState::validate() const {
    if (!(n_c_th >= 0.0) || !(n_m_th >= 0.0))
        throw ValidationError("BtsState: thermal populations must be >= 0");
    if (!std::isfinite(theta) || !std::isfinite(phi_B))
        throw ValidationError("BtsState: angles must be finite");
}

void TmstsState::validate() const {
    if (!(u >= 0.0)) throw ValidationError("TmstsState: squeeze amplitude must be >= 0");
    if (!(n_c_th >= 0.0) || !(n_m_th >= 0.0))
        throw ValidationError("TmstsState: thermal populations must be >= 0");
    if (!std::isfinite(phi_S)) throw ValidationError("TmstsState: phi_S must be finite");
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
    if (n < 2 || !(t1 > t0)) throw DomainError("uniform_grid: need n >= 2 and t1 > t0");
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i)
        ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    ts.back() = t1;
    return ts;
}

}  // namespace omsim
