#include "corkit/filter.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace corkit {

namespace {

constexpr double pi = 3.14159265358979323846;

// Shunt placement below the series resonator, in powers of the series-to-
// parallel frequency ratio gamma, and the shunt-to-series static capacitance
// ratio. Fixed so the third-order T ladder realizes its target bandwidth and
// loss at both the strong and the weak coupling level; exponent 1 is the
// textbook alignment (shunt f_p on series f_s), which squeezes the
// transmission zeros so close that the 3-dB band cannot exceed ~60% of the
// zero spacing.
constexpr double detune_exponent = 1.75;
constexpr double shunt_c0_ratio = 0.6;

struct Abcd {
    std::complex<double> a{1.0}, b{0.0}, c{0.0}, d{1.0};

    Abcd then(const Abcd& r) const {
        return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
    }
};

Abcd series_branch(const MbvdModel& m, double f) {
    return {1.0, 1.0 / admittance(m, f), 0.0, 1.0};
}

Abcd shunt_branch(const MbvdModel& m, double f) { return {1.0, 0.0, admittance(m, f), 1.0}; }

// Resonators alternate series, shunt, series, ... so an odd order puts a
// series resonator at both ports.
Abcd cascade(const FilterNetwork& net, double f) {
    Abcd t;
    for (int k = 0; k < net.order; ++k)
        t = t.then(k % 2 == 0 ? series_branch(net.series, f) : shunt_branch(net.shunt, f));
    return t;
}

SparamPoint to_sparams(const Abcd& t, double f, double z0) {
    std::complex<double> den = t.a + t.b / z0 + t.c * z0 + t.d;
    SparamPoint p;
    p.frequency = f;
    p.s11 = (t.a + t.b / z0 - t.c * z0 - t.d) / den;
    p.s21 = 2.0 / den;
    p.s12 = 2.0 * (t.a * t.d - t.b * t.c) / den;
    p.s22 = (-t.a + t.b / z0 - t.c * z0 + t.d) / den;
    return p;
}

double il_db(const SparamPoint& p) { return -20.0 * std::log10(std::abs(p.s21)); }

// Linear interpolation of the frequency where the insertion loss crosses
// `target` between two adjacent samples.
double cross_frequency(const SparamPoint& a, const SparamPoint& b, double target) {
    double ia = il_db(a), ib = il_db(b);
    double t = (target - ia) / (ib - ia);
    return a.frequency + t * (b.frequency - a.frequency);
}

}  // namespace

FilterNetwork synthesize_ladder(double f_center, double kt2, double q, double z0, int order) {
    if (!(f_center > 0.0)) throw std::invalid_argument("center frequency must be > 0");
    if (!(kt2 > 0.0) || !(kt2 < pi * pi / 8.0))
        throw std::invalid_argument("kt2 must be in (0, pi^2/8)");
    if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
    if (!(z0 > 0.0)) throw std::invalid_argument("termination impedance must be > 0");
    if (order < 1) throw std::invalid_argument("order must be >= 1");

    double c0 = size_for_termination(f_center, z0);
    double gamma = std::sqrt(1.0 + (8.0 / (pi * pi)) * kt2);
    // The transmission zeros sit at the shunt f_s and the series f_p; this
    // placement puts their geometric mean exactly on the design center.
    double fs_series = f_center * std::pow(gamma, (detune_exponent - 1.0) / 2.0);

    FilterNetwork net;
    net.series = mbvd_from_physics(fs_series, kt2, q, c0);
    net.shunt = mbvd_from_physics(fs_series / std::pow(gamma, detune_exponent), kt2, q,
                                  shunt_c0_ratio * c0);
    net.z0 = z0;
    net.order = order;
    net.f_center = f_center;
    return net;
}

FilterReport evaluate_sparams(const FilterNetwork& net, const std::vector<double>& f_grid) {
    if (f_grid.size() < 3) throw std::invalid_argument("frequency grid needs >= 3 points");
    if (!std::is_sorted(f_grid.begin(), f_grid.end()))
        throw std::invalid_argument("frequency grid must be ascending");

    FilterReport r;
    r.s_grid.reserve(f_grid.size());
    for (double f : f_grid) r.s_grid.push_back(to_sparams(cascade(net, f), f, net.z0));

    size_t best = 0;
    for (size_t i = 1; i < r.s_grid.size(); ++i)
        if (il_db(r.s_grid[i]) < il_db(r.s_grid[best])) best = i;
    r.il_min = il_db(r.s_grid[best]);

    double edge = r.il_min + 3.0;
    size_t lo = best, hi = best;
    while (lo > 0 && il_db(r.s_grid[lo]) < edge) --lo;
    while (hi + 1 < r.s_grid.size() && il_db(r.s_grid[hi]) < edge) ++hi;
    if (il_db(r.s_grid[lo]) < edge || il_db(r.s_grid[hi]) < edge)
        throw std::runtime_error("passband edges not resolved by the frequency grid");

    r.band_lo = cross_frequency(r.s_grid[lo], r.s_grid[lo + 1], edge);
    r.band_hi = cross_frequency(r.s_grid[hi - 1], r.s_grid[hi], edge);
    r.bw_3db = r.band_hi - r.band_lo;
    r.f_center = 0.5 * (r.band_lo + r.band_hi);

    double guard = r.bw_3db;
    double best_out = std::numeric_limits<double>::infinity();
    for (const SparamPoint& p : r.s_grid) {
        if (p.frequency >= r.band_lo - guard && p.frequency <= r.band_hi + guard) continue;
        best_out = std::min(best_out, il_db(p));
    }
    r.rejection = std::isfinite(best_out) ? best_out : 0.0;
    return r;
}

std::vector<double> default_filter_grid(double f_center, double kt2, int points) {
    if (points < 3) throw std::invalid_argument("grid needs >= 3 points");
    // The full series-to-parallel span is (8/pi^2) kt2 of the center; five
    // spans leave room for the skirts and the rejection guard.
    double half_span = 2.5 * (8.0 / (pi * pi)) * kt2 * f_center;
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = f_center - half_span + 2.0 * half_span * i / (points - 1);
    return grid;
}

FilterBank synthesize_bank(double f_start, int n_filters, double kt2, double q, double z0) {
    if (n_filters < 1) throw std::invalid_argument("bank needs >= 1 filter");

    FilterBank bank;
    double fc = f_start;
    for (int i = 0; i < n_filters; ++i) {
        FilterNetwork net = synthesize_ladder(fc, kt2, q, z0);
        FilterReport rep = evaluate_sparams(net, default_filter_grid(fc, kt2));
        bank.aggregated_bw += rep.bw_3db;
        fc += rep.bw_3db;
        bank.members.push_back(net);
        bank.reports.push_back(std::move(rep));
    }

    for (int i = 0; i + 1 < n_filters; ++i) {
        // Tiling boundary: the upper band edge of member i, by construction
        // also the lower edge of member i+1.
        double f_edge = bank.reports[i].band_hi;
        double worst = 0.0;
        for (int m : {i, i + 1})
            worst = std::max(
                worst, il_db(to_sparams(cascade(bank.members[m], f_edge), f_edge,
                                        bank.members[m].z0)));
        bank.crossover_il_db.push_back(worst);
    }
    return bank;
}

std::vector<BwIlRow> bw_il_scaling_table(const std::vector<double>& f_list, double kt2,
                                         double q, double z0) {
    if (f_list.empty()) throw std::invalid_argument("frequency list must be nonempty");
    if (!std::is_sorted(f_list.begin(), f_list.end()))
        throw std::invalid_argument("frequency list must be ascending");

    std::vector<BwIlRow> rows;
    rows.reserve(f_list.size());
    for (double f : f_list) {
        FilterNetwork net = synthesize_ladder(f, kt2, q, z0);
        FilterReport rep = evaluate_sparams(net, default_filter_grid(f, kt2));
        rows.push_back({f, rep.bw_3db, rep.il_min, rep.bw_3db / f});
    }
    return rows;
}

void write_touchstone_s2p(const FilterReport& r, const std::string& path, double z0) {
    if (r.s_grid.empty()) throw std::invalid_argument("report has no S-parameter grid");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "! two-port ladder filter, f_center = " << r.f_center << " Hz\n";
    out << "# Hz S MA R " << z0 << "\n";
    out.precision(12);
    auto ma = [&](std::complex<double> s) {
        out << " " << std::abs(s) << " " << std::arg(s) * 180.0 / pi;
    };
    for (const SparamPoint& p : r.s_grid) {
        out << p.frequency;
        ma(p.s11);
        ma(p.s21);
        ma(p.s12);
        ma(p.s22);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_sparams_csv(const FilterReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "f_hz,s21_db,s11_db\n";
    out.precision(12);
    for (const SparamPoint& p : r.s_grid)
        out << p.frequency << "," << 20.0 * std::log10(std::abs(p.s21)) << ","
            << 20.0 * std::log10(std::abs(p.s11)) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string report_json(const FilterReport& r) {
    nlohmann::ordered_json j;
    j["f_center_hz"] = r.f_center;
    j["bw_3db_hz"] = r.bw_3db;
    j["il_min_db"] = r.il_min;
    j["rejection_db"] = r.rejection;
    j["band_lo_hz"] = r.band_lo;
    j["band_hi_hz"] = r.band_hi;
    return j.dump(2);
}

}  // namespace corkit
