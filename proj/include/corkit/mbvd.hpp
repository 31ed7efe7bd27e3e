#pragma once

#include <complex>
#include <string>
#include <vector>

namespace corkit {

// Modified Butterworth-Van Dyke one-port: static branch C0 in parallel with
// the motional branch Rm-Lm-Cm, all behind an optional series resistance Rs.
// Cm/C0 = (8/pi^2) * kt2, so the series/parallel pair reproduces kt2 exactly
// through the frequency-pair formula.
struct MbvdModel {
    double f_s = 0.0;  // motional series resonance, Hz
    double kt2 = 0.0;
    double q = 0.0;    // motional quality factor
    double c0 = 0.0;   // static capacitance, F
    double rs = 0.0;   // series electrode resistance, Ohm

    double cm = 0.0;   // derived motional elements
    double lm = 0.0;
    double rm = 0.0;

    double f_p() const;  // f_s * sqrt(1 + cm/c0)
};

// Throws std::invalid_argument unless f_s, kt2, q, c0 > 0, rs >= 0 and
// kt2 < pi^2/8 (the pole of the frequency-pair inversion).
MbvdModel mbvd_from_physics(double f_s, double kt2, double q, double c0, double rs = 0.0);

// Y = j w C0 + 1/(Rm + j w Lm + 1/(j w Cm)), then Rs in series when set.
std::complex<double> admittance(const MbvdModel& m, double f);

// Aperture sizing: C0 = 1/(2 pi f_s Z_target).
double size_for_termination(double f_s, double z_target);

// Series and parallel resonances recovered from the lossless admittance by
// bisection: f_s where the motional reactance vanishes, f_p where the total
// susceptance does. Round-trips kt2 through the frequency-pair formula.
struct ResonancePair {
    double f_s = 0.0;
    double f_p = 0.0;
};

ResonancePair resonance_pair(const MbvdModel& m);

// Loaded quality factor by the 3-dB method on Re{Y}: peak search around f_s,
// then half-maximum crossings by bisection. Equals q when rs = 0; any rs > 0
// flattens the conductance peak and lowers it.
double loaded_q(const MbvdModel& m);

// Touchstone-style one-port export: header line "# Hz Y RI R <z0>", then one
// "f Re{Y} Im{Y}" row per grid point.
void write_touchstone_y(const MbvdModel& m, const std::vector<double>& f_grid,
                        const std::string& path, double z0 = 50.0);

// JSON dump of the inputs and the derived elements.
std::string model_json(const MbvdModel& m);

}  // namespace corkit
