#include "corkit/mbvd.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace corkit {

namespace {

constexpr double pi = 3.14159265358979323846;

// Motional reactance of the lossless branch; strictly increasing in f.
double motional_reactance(const MbvdModel& m, double f) {
    double w = 2.0 * pi * f;
    return w * m.lm - 1.0 / (w * m.cm);
}

double bisect(double lo, double hi, const auto& fn) {
    double flo = fn(lo);
    for (int i = 0; i < 200 && (hi - lo) > hi * 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        if ((fn(mid) < 0.0) == (flo < 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double MbvdModel::f_p() const { return f_s * std::sqrt(1.0 + cm / c0); }

MbvdModel mbvd_from_physics(double f_s, double kt2, double q, double c0, double rs) {
    if (!(f_s > 0.0)) throw std::invalid_argument("f_s must be > 0");
    if (!(kt2 > 0.0)) throw std::invalid_argument("kt2 must be > 0");
    if (!(kt2 < pi * pi / 8.0)) throw std::invalid_argument("kt2 must be < pi^2/8");
    if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
    if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be > 0");
    if (rs < 0.0) throw std::invalid_argument("rs must be >= 0");

    MbvdModel m;
    m.f_s = f_s;
    m.kt2 = kt2;
    m.q = q;
    m.c0 = c0;
    m.rs = rs;
    m.cm = c0 * (8.0 / (pi * pi)) * kt2;
    double ws = 2.0 * pi * f_s;
    m.lm = 1.0 / (ws * ws * m.cm);
    m.rm = 1.0 / (ws * m.cm * q);
    return m;
}

std::complex<double> admittance(const MbvdModel& m, double f) {
    if (!(f > 0.0)) throw std::invalid_argument("frequency must be > 0");
    double w = 2.0 * pi * f;
    std::complex<double> zm(m.rm, w * m.lm - 1.0 / (w * m.cm));
    std::complex<double> y = std::complex<double>(0.0, w * m.c0) + 1.0 / zm;
    if (m.rs > 0.0) y = 1.0 / (m.rs + 1.0 / y);
    return y;
}

double size_for_termination(double f_s, double z_target) {
    if (!(f_s > 0.0)) throw std::invalid_argument("f_s must be > 0");
    if (!(z_target > 0.0)) throw std::invalid_argument("termination impedance must be > 0");
    return 1.0 / (2.0 * pi * f_s * z_target);
}

ResonancePair resonance_pair(const MbvdModel& m) {
    ResonancePair p;
    p.f_s = bisect(0.3 * m.f_s, 3.0 * m.f_s, [&](double f) { return motional_reactance(m, f); });
    // Above f_s the motional branch is inductive, so the total susceptance
    // rises from -inf through its single zero at f_p.
    p.f_p = bisect(p.f_s * (1.0 + 1e-12), 3.0 * p.f_s, [&](double f) {
        return 2.0 * pi * f * m.c0 - 1.0 / motional_reactance(m, f);
    });
    return p;
}

double loaded_q(const MbvdModel& m) {
    auto conductance = [&](double f) { return admittance(m, f).real(); };

    double half = 8.0 * m.f_s / m.q;
    for (int widen = 0; widen < 6; ++widen, half *= 2.0) {
        double lo = m.f_s - half, hi = m.f_s + half;
        int n = 2000;
        double step = (hi - lo) / n;
        int best = 0;
        double gbest = -1.0;
        for (int i = 0; i <= n; ++i) {
            double g = conductance(lo + i * step);
            if (g > gbest) {
                gbest = g;
                best = i;
            }
        }
        if (best == 0 || best == n) continue;

        // Golden-section refinement of the unimodal peak.
        double a = lo + (best - 1) * step, b = lo + (best + 1) * step;
        constexpr double gr = 0.61803398874989485;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double g1 = conductance(x1), g2 = conductance(x2);
        for (int i = 0; i < 90; ++i) {
            if (g1 < g2) {
                a = x1;
                x1 = x2;
                g1 = g2;
                x2 = a + gr * (b - a);
                g2 = conductance(x2);
            } else {
                b = x2;
                x2 = x1;
                g2 = g1;
                x1 = b - gr * (b - a);
                g1 = conductance(x1);
            }
        }
        double f_peak = 0.5 * (a + b);
        double target = 0.5 * conductance(f_peak);
        if (conductance(lo) >= target || conductance(hi) >= target) continue;

        double f_lo = bisect(lo, f_peak, [&](double f) { return conductance(f) - target; });
        double f_hi = bisect(f_peak, hi, [&](double f) { return target - conductance(f); });
        return f_peak / (f_hi - f_lo);
    }
    throw std::runtime_error("conductance half-maximum not bracketed");
}

void write_touchstone_y(const MbvdModel& m, const std::vector<double>& f_grid,
                        const std::string& path, double z0) {
    if (f_grid.empty()) throw std::invalid_argument("frequency grid must be nonempty");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "! one-port admittance, f_s = " << m.f_s << " Hz\n";
    out << "# Hz Y RI R " << z0 << "\n";
    out.precision(12);
    for (double f : f_grid) {
        std::complex<double> y = admittance(m, f);
        out << f << " " << y.real() << " " << y.imag() << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string model_json(const MbvdModel& m) {
    nlohmann::ordered_json j;
    j["f_s_hz"] = m.f_s;
    j["f_p_hz"] = m.f_p();
    j["kt2"] = m.kt2;
    j["q"] = m.q;
    j["c0_f"] = m.c0;
    j["rs_ohm"] = m.rs;
    j["cm_f"] = m.cm;
    j["lm_h"] = m.lm;
    j["rm_ohm"] = m.rm;
    return j.dump(2);
}

}  // namespace corkit
