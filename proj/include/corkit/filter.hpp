#pragma once

#include "corkit/mbvd.hpp"

#include <complex>
#include <string>
#include <vector>

namespace corkit {

// Ladder filter of `order` resonators alternating series, shunt, series, ...
// so the default third-order network is a series-shunt-series T. The shunt
// resonator is detuned below the series one and the pair is placed so the
// passband centers on the design frequency.
struct FilterNetwork {
    MbvdModel series;
    MbvdModel shunt;
    double z0 = 50.0;
    int order = 3;  // resonator count
    double f_center = 0.0;
};

struct SparamPoint {
    double frequency = 0.0;
    std::complex<double> s11, s21, s12, s22;
};

struct FilterReport {
    double f_center = 0.0;   // midpoint of the 3-dB band
    double bw_3db = 0.0;
    double il_min = 0.0;     // dB, minimum insertion loss in band
    double rejection = 0.0;  // dB, minimum attenuation outside band +- one BW guard
    double band_lo = 0.0, band_hi = 0.0;
    std::vector<SparamPoint> s_grid;
};

// Throws std::invalid_argument unless f_center, q, z0 > 0, kt2 in (0, pi^2/8)
// and order >= 1. The series resonator gets C0 = 1/(2 pi f_center z0); the
// shunt resonator is smaller by a fixed ratio and detuned a fixed number of
// gamma-factors below it (gamma = f_p/f_s).
FilterNetwork synthesize_ladder(double f_center, double kt2, double q, double z0 = 50.0,
                                int order = 3);

// ABCD cascade of the branch two-ports converted to S at z0. The band is the
// 3-dB-below-minimum-insertion-loss interval around the best grid point,
// with edges interpolated between grid samples. Throws std::runtime_error
// when the grid does not resolve both band edges.
FilterReport evaluate_sparams(const FilterNetwork& net, const std::vector<double>& f_grid);

// Uniform grid spanning the expected passband with margin; convenience for
// reports and the bank synthesis.
std::vector<double> default_filter_grid(double f_center, double kt2, int points = 1601);

struct FilterBank {
    std::vector<FilterNetwork> members;
    std::vector<FilterReport> reports;
    double aggregated_bw = 0.0;            // sum of member 3-dB bandwidths
    std::vector<double> crossover_il_db;   // worse member insertion loss at each tiling boundary
};

// Contiguous bank: the first member centers at f_start and each next center
// steps by the previous member's 3-dB bandwidth.
FilterBank synthesize_bank(double f_start, int n_filters, double kt2, double q,
                           double z0 = 50.0);

struct BwIlRow {
    double f_center = 0.0;
    double bw_3db = 0.0;
    double il_min = 0.0;
    double fractional_bw = 0.0;
};

// Per-frequency synthesis and evaluation; f_list must be ascending.
std::vector<BwIlRow> bw_il_scaling_table(const std::vector<double>& f_list, double kt2,
                                         double q, double z0 = 50.0);

// Touchstone-style two-port export: "# Hz S MA R <z0>" then per row
// f |S11| ang |S21| ang |S12| ang |S22| ang, angles in degrees.
void write_touchstone_s2p(const FilterReport& r, const std::string& path, double z0 = 50.0);

// CSV plot columns: f_hz, s21_db, s11_db.
void write_sparams_csv(const FilterReport& r, const std::string& path);

std::string report_json(const FilterReport& r);

}  // namespace corkit
