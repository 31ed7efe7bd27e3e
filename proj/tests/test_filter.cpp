#include "corkit/filter.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace corkit;

namespace {

constexpr double pi = 3.14159265358979323846;
using cplx = std::complex<double>;

cplx det3(cplx a11, cplx a12, cplx a13, cplx a21, cplx a22, cplx a23, cplx a31, cplx a32,
          cplx a33) {
    return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) +
           a13 * (a21 * a32 - a22 * a31);
}

// Independent two-port solve for the third-order T: three node voltages with
// the unit source behind z0 and a z0 load, S-parameters read off the nodes.
std::pair<cplx, cplx> nodal_t_sparams(const FilterNetwork& net, double f) {
    cplx yse = admittance(net.series, f), ysh = admittance(net.shunt, f);
    cplx y0 = 1.0 / net.z0;
    cplx a11 = y0 + yse, a12 = -yse, a13 = 0.0;
    cplx a21 = -yse, a22 = 2.0 * yse + ysh, a23 = -yse;
    cplx a31 = 0.0, a32 = -yse, a33 = yse + y0;
    cplx d = det3(a11, a12, a13, a21, a22, a23, a31, a32, a33);
    cplx v1 = det3(y0, a12, a13, 0.0, a22, a23, 0.0, a32, a33) / d;
    cplx v3 = det3(a11, a12, y0, a21, a22, 0.0, a31, a32, 0.0) / d;
    return {2.0 * v1 - 1.0, 2.0 * v3};
}

// Same idea for a single series branch between the terminations.
std::pair<cplx, cplx> nodal_series_sparams(const FilterNetwork& net, double f) {
    cplx yse = admittance(net.series, f);
    cplx y0 = 1.0 / net.z0;
    cplx a11 = y0 + yse, a12 = -yse;
    cplx a21 = -yse, a22 = yse + y0;
    cplx d = a11 * a22 - a12 * a21;
    cplx v1 = (y0 * a22 - a12 * 0.0) / d;
    cplx v2 = (a11 * 0.0 - y0 * a21) / d;
    return {2.0 * v1 - 1.0, 2.0 * v2};
}

double il_db(cplx s21) { return -20.0 * std::log10(std::abs(s21)); }

FilterReport quick_report(double f_center, double kt2, double q, int order = 3) {
    FilterNetwork net = synthesize_ladder(f_center, kt2, q, 50.0, order);
    return evaluate_sparams(net, default_filter_grid(f_center, kt2));
}

}  // namespace

TEST_CASE("synthesis validates its inputs") {
    CHECK_THROWS_AS(synthesize_ladder(0.0, 0.019, 750.0), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_ladder(24e9, 0.0, 750.0), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_ladder(24e9, pi * pi / 8.0, 750.0), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_ladder(24e9, 0.019, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_ladder(24e9, 0.019, 750.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_ladder(24e9, 0.019, 750.0, 50.0, 0), std::invalid_argument);
}

TEST_CASE("synthesized network places resonators around the design center") {
    FilterNetwork net = synthesize_ladder(24e9, 0.019, 750.0);
    CHECK(net.order == 3);
    CHECK(net.z0 == 50.0);
    CHECK(net.series.c0 == doctest::Approx(1.0 / (2.0 * pi * 24e9 * 50.0)).epsilon(1e-12));
    CHECK(net.shunt.c0 < net.series.c0);

    // Shunt detuned below the series resonator, its pole under the series zero.
    CHECK(net.shunt.f_s < net.series.f_s);
    CHECK(net.shunt.f_p() < net.series.f_s);

    // The transmission zeros (shunt f_s, series f_p) straddle the center with
    // their geometric mean exactly on it.
    CHECK(std::sqrt(net.shunt.f_s * net.series.f_p()) == doctest::Approx(24e9).epsilon(1e-12));

    // Both resonators carry the same coupling and quality factor.
    CHECK(net.series.kt2 == doctest::Approx(0.019).epsilon(1e-12));
    CHECK(net.shunt.kt2 == doctest::Approx(0.019).epsilon(1e-12));
    CHECK(net.shunt.q == doctest::Approx(net.series.q).epsilon(1e-12));
}

TEST_CASE("cascade agrees with a brute-force nodal two-port solve") {
    FilterNetwork net = synthesize_ladder(24e9, 0.019, 750.0);
    std::vector<double> grid = default_filter_grid(24e9, 0.019, 161);
    FilterReport r = evaluate_sparams(net, grid);

    for (size_t i = 0; i < grid.size(); i += 7) {
        auto [s11, s21] = nodal_t_sparams(net, grid[i]);
        CHECK(std::abs(s21 - r.s_grid[i].s21) < 1e-10 * (1.0 + std::abs(s21)));
        CHECK(std::abs(s11 - r.s_grid[i].s11) < 1e-10 * (1.0 + std::abs(s11)));
    }
}

TEST_CASE("single series branch matches its oracle and opens up off resonance") {
    FilterNetwork net = synthesize_ladder(24e9, 0.019, 750.0, 50.0, 1);
    // A lone series branch passes most of the spectrum; its 3-dB edges sit far
    // outside the usual band, so probe on a wide grid.
    std::vector<double> wide(2001);
    for (size_t i = 0; i < wide.size(); ++i) wide[i] = 6e9 + (30e9 - 6e9) * i / (wide.size() - 1);
    FilterReport full = evaluate_sparams(net, wide);
    for (size_t i = 0; i < full.s_grid.size(); i += 13) {
        auto [s11, s21] = nodal_series_sparams(net, full.s_grid[i].frequency);
        CHECK(std::abs(s21 - full.s_grid[i].s21) < 1e-10 * (1.0 + std::abs(s21)));
        CHECK(std::abs(s11 - full.s_grid[i].s11) < 1e-10 * (1.0 + std::abs(s11)));
    }

    // Far above the band the branch is a shrinking capacitive reactance, so
    // the through loss decays toward 0 dB.
    double prev = 1e9;
    for (double f : {2.0 * 24e9, 3.0 * 24e9, 4.0 * 24e9, 6.0 * 24e9}) {
        auto [s11, s21] = nodal_series_sparams(net, f);
        double il = il_db(s21);
        CHECK(il < prev);
        prev = il;
    }
    CHECK(prev < 1.0);
}

TEST_CASE("network is reciprocal and passive across the grid") {
    FilterNetwork net = synthesize_ladder(24e9, 0.019, 750.0);
    FilterReport r = evaluate_sparams(net, default_filter_grid(24e9, 0.019));
    double worst_power = 0.0;
    for (const SparamPoint& p : r.s_grid) {
        CHECK(std::abs(p.s12 - p.s21) <= 1e-12 * (1.0 + std::abs(p.s21)));
        worst_power = std::max(worst_power,
                               std::norm(p.s11) + std::norm(p.s21));
        CHECK(std::abs(p.s21) <= 1.0 + 1e-9);
    }
    CHECK(worst_power <= 1.0 + 1e-9);
}

TEST_CASE("strong-coupling design meets its band and loss targets") {
    FilterReport r = quick_report(24e9, 0.019, 750.0);
    CHECK(r.bw_3db > 312.4e6);
    CHECK(r.bw_3db < 397.6e6);
    CHECK(r.il_min <= 1.2);
    CHECK(r.il_min >= 0.0);
    CHECK(r.band_lo < 24e9);
    CHECK(r.band_hi > 24e9);
    CHECK(r.rejection > 3.0);
    CHECK(r.rejection > r.il_min);

    // Regression pin for the realized response.
    CHECK(r.bw_3db == doctest::Approx(376.6e6).epsilon(0.005));
    CHECK(r.il_min == doctest::Approx(0.879).epsilon(0.01));

    FilterReport degraded = quick_report(24e9, 0.019, 500.0);
    CHECK(degraded.il_min <= 1.5);
    CHECK(degraded.il_min > r.il_min);
}

TEST_CASE("weak-coupling design meets its band and loss targets") {
    FilterReport r = quick_report(24e9, 0.008, 750.0);
    CHECK(r.bw_3db > 132e6);
    CHECK(r.bw_3db < 168e6);
    CHECK(r.il_min <= 2.0);

    CHECK(r.bw_3db == doctest::Approx(150.8e6).epsilon(0.005));
    CHECK(r.il_min == doctest::Approx(1.700).epsilon(0.01));

    FilterReport degraded = quick_report(24e9, 0.008, 500.0);
    CHECK(degraded.il_min <= 2.5);
}

TEST_CASE("bandwidth doubles with the coupling in the small-coupling regime") {
    double b1 = quick_report(24e9, 0.004, 750.0).bw_3db;
    double b2 = quick_report(24e9, 0.008, 750.0).bw_3db;
    CHECK(b2 / b1 > 1.8);
    CHECK(b2 / b1 < 2.2);
}

TEST_CASE("fractional bandwidth is frequency-invariant") {
    std::vector<double> f_list = {24e9, 28e9, 32e9, 36e9, 40e9};
    std::vector<BwIlRow> rows = bw_il_scaling_table(f_list, 0.019, 750.0);
    REQUIRE(rows.size() == f_list.size());
    for (size_t i = 1; i < rows.size(); ++i) {
        // The network and the grid both scale with f, so the realized
        // fractional band is identical, not merely close.
        CHECK(rows[i].fractional_bw ==
              doctest::Approx(rows[0].fractional_bw).epsilon(1e-9));
        CHECK(rows[i].il_min == doctest::Approx(rows[0].il_min).epsilon(1e-9));
    }
    // End rows in physical units.
    CHECK(rows.front().bw_3db == doctest::Approx(355e6).epsilon(0.12));
    CHECK(rows.back().bw_3db == doctest::Approx(592e6).epsilon(0.12));

    CHECK_THROWS_AS(bw_il_scaling_table({}, 0.019, 750.0), std::invalid_argument);
    CHECK_THROWS_AS(bw_il_scaling_table({28e9, 24e9}, 0.019, 750.0), std::invalid_argument);
}

TEST_CASE("insertion loss falls with coupling and quality factor") {
    std::vector<double> kt2s = {0.008, 0.012, 0.019};
    std::vector<double> qs = {500.0, 750.0, 1500.0};
    double il[3][3];
    for (size_t i = 0; i < kt2s.size(); ++i)
        for (size_t j = 0; j < qs.size(); ++j) il[i][j] = quick_report(24e9, kt2s[i], qs[j]).il_min;

    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j + 1 < 3; ++j) CHECK(il[i][j] > il[i][j + 1]);
    for (size_t j = 0; j < 3; ++j)
        for (size_t i = 0; i + 1 < 3; ++i) CHECK(il[i][j] > il[i + 1][j]);
}

TEST_CASE("contiguous bank tiles the spectrum and aggregates member bands") {
    FilterBank strong = synthesize_bank(24e9, 5, 0.019, 750.0);
    REQUIRE(strong.members.size() == 5);
    REQUIRE(strong.reports.size() == 5);
    CHECK(strong.aggregated_bw > 1.6e9);
    REQUIRE(strong.crossover_il_db.size() == 4);
    for (size_t i = 0; i + 1 < strong.reports.size(); ++i) {
        // Members tile: each upper band edge meets the next lower edge.
        double gap = strong.reports[i + 1].band_lo - strong.reports[i].band_hi;
        CHECK(std::abs(gap) < 0.1 * strong.reports[i].bw_3db);
    }
    for (double x : strong.crossover_il_db) {
        CHECK(x > strong.reports[0].il_min);
        CHECK(x < strong.reports[0].il_min + 6.0);
    }

    FilterBank weak = synthesize_bank(24e9, 7, 0.008, 750.0);
    CHECK(weak.aggregated_bw > 1.0e9);

    FilterBank single = synthesize_bank(24e9, 1, 0.019, 750.0);
    CHECK(single.aggregated_bw == single.reports[0].bw_3db);
    CHECK(single.crossover_il_db.empty());

    CHECK_THROWS_AS(synthesize_bank(24e9, 0, 0.019, 750.0), std::invalid_argument);
}

TEST_CASE("evaluation rejects unusable grids") {
    FilterNetwork net = synthesize_ladder(24e9, 0.019, 750.0);
    CHECK_THROWS_AS(evaluate_sparams(net, {24e9, 24.1e9}), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_sparams(net, {24.1e9, 24e9, 24.2e9}), std::invalid_argument);
    CHECK_THROWS_AS(default_filter_grid(24e9, 0.019, 2), std::invalid_argument);

    // A grid trapped inside the passband cannot resolve the 3-dB edges.
    std::vector<double> inside;
    for (int i = 0; i < 41; ++i) inside.push_back(24e9 - 20e6 + 1e6 * i);
    CHECK_THROWS_AS(evaluate_sparams(net, inside), std::runtime_error);
}

TEST_CASE("touchstone and csv exports round-trip the response") {
    namespace fs = std::filesystem;
    FilterNetwork net = synthesize_ladder(24e9, 0.019, 750.0);
    FilterReport r = evaluate_sparams(net, default_filter_grid(24e9, 0.019, 201));

    fs::path dir = fs::temp_directory_path() / "corkit_filter_test";
    fs::create_directories(dir);
    fs::path s2p = dir / "ladder.s2p";
    fs::path csv = dir / "ladder.csv";

    write_touchstone_s2p(r, s2p.string());
    std::ifstream in(s2p);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line.find('!') == 0);
    std::getline(in, line);
    CHECK(line == "# Hz S MA R 50");
    size_t rows = 0;
    double f = 0.0, s11_mag = 0.0, s11_ang = 0.0, s21_mag = 0.0;
    while (std::getline(in, line)) {
        if (rows == 100) {
            std::istringstream row(line);
            row >> f >> s11_mag >> s11_ang >> s21_mag;
        }
        ++rows;
    }
    CHECK(rows == r.s_grid.size());
    CHECK(f == doctest::Approx(r.s_grid[100].frequency).epsilon(1e-9));
    CHECK(s21_mag == doctest::Approx(std::abs(r.s_grid[100].s21)).epsilon(1e-9));

    write_sparams_csv(r, csv.string());
    std::ifstream cin_(csv);
    std::getline(cin_, line);
    CHECK(line == "f_hz,s21_db,s11_db");
    size_t csv_rows = 0;
    while (std::getline(cin_, line)) ++csv_rows;
    CHECK(csv_rows == r.s_grid.size());

    fs::remove_all(dir);
}

TEST_CASE("report json carries the band summary") {
    FilterReport r = quick_report(24e9, 0.019, 750.0);
    std::string j = report_json(r);
    CHECK(j.find("\"f_center_hz\"") != std::string::npos);
    CHECK(j.find("\"bw_3db_hz\"") != std::string::npos);
    CHECK(j.find("\"il_min_db\"") != std::string::npos);
    CHECK(j.find("\"rejection_db\"") != std::string::npos);
    CHECK(j.find("\"band_lo_hz\"") != std::string::npos);
    CHECK(j.find("\"band_hi_hz\"") != std::string::npos);
}
