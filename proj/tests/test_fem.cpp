#include "corkit/fem.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

using namespace corkit;

namespace {

UnitCellGeometry bare_cell(double w = 1e-6, double t = 1e-6, int n = 2) {
    UnitCellGeometry g;
    g.pitch = w;
    g.t_plate = t;
    g.n_periods = n;
    g.scheme = Scheme::electrodeless_open;
    return g;
}

UnitCellGeometry fabricated_lfe() {
    UnitCellGeometry g;
    g.pitch = 1.15e-6;
    g.t_plate = 1e-6;
    g.t_electrode = 85e-9;
    g.alpha = 0.57;
    g.n_periods = 2;
    g.scheme = Scheme::lfe;
    return g;
}

const MaterialDb& db() { return default_material_db(); }

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("element matrices are symmetric and mass-consistent") {
    const auto& aln = db().get("AlN");
    std::array<double, 4> xe = {0.0, 1e-7, 1e-7, 0.0};
    std::array<double, 4> ze = {0.0, 0.0, 2e-7, 2e-7};
    ElementMatrices em = element_matrices(aln, xe, ze);

    CHECK((em.kuu - em.kuu.transpose()).cwiseAbs().maxCoeff() <
          1e-9 * em.kuu.cwiseAbs().maxCoeff());
    CHECK((em.kphi - em.kphi.transpose()).cwiseAbs().maxCoeff() <
          1e-9 * em.kphi.cwiseAbs().maxCoeff());
    CHECK((em.m - em.m.transpose()).cwiseAbs().maxCoeff() < 1e-9 * em.m.cwiseAbs().maxCoeff());
    CHECK(em.area == doctest::Approx(2e-14).epsilon(1e-12));
    // Row sums of the consistent mass add up to the element mass per direction.
    CHECK(em.m.sum() == doctest::Approx(2.0 * aln.density * em.area).epsilon(1e-12));
}

TEST_CASE("zero piezoelectric constants decouple the blocks") {
    MaterialDb plain = parse_material_db(R"(
material AlN {
    class = hexagonal
    density = 3260
    c11_gpa = 345
    c12_gpa = 125
    c13_gpa = 120
    c33_gpa = 382
    c44_gpa = 118
    eps11_r = 8.0
    eps33_r = 9.5
}
)", "<test>");
    AssembledSystem sys = assemble(build_unit_cell(bare_cell(), 8, 8), plain);
    CHECK(sys.A.norm() == 0.0);
    CHECK(sys.Kphi.norm() > 0.0);
}

TEST_CASE("assembled blocks are symmetric") {
    AssembledSystem sys = assemble(build_unit_cell(fabricated_lfe(), 12, 8), db());
    Eigen::SparseMatrix<double> dk = sys.Kuu - Eigen::SparseMatrix<double>(sys.Kuu.transpose());
    Eigen::SparseMatrix<double> dp = sys.Kphi - Eigen::SparseMatrix<double>(sys.Kphi.transpose());
    Eigen::SparseMatrix<double> dm = sys.M - Eigen::SparseMatrix<double>(sys.M.transpose());
    CHECK(dk.norm() < 1e-9 * sys.Kuu.norm());
    CHECK(dp.norm() < 1e-9 * sys.Kphi.norm());
    CHECK(dm.norm() < 1e-9 * sys.M.norm());
}

TEST_CASE("missing material is rejected") {
    Mesh m = build_unit_cell(bare_cell(), 8, 8);
    m.regions[0].material = "Adamantium";
    CHECK_THROWS_AS(assemble(m, db()), std::invalid_argument);
}

TEST_CASE("all-conductor mesh is rejected (no dielectric)") {
    Mesh m = build_unit_cell(bare_cell(), 8, 8);
    m.regions[0].material = "Al";
    CHECK_THROWS_AS(assemble(m, db()), std::invalid_argument);
}

TEST_CASE("wide bare plate: thickness mode lands in the nitride window") {
    // W >> t makes the cell quasi-1-D; the fundamental thickness-extensional
    // mode of a 1 um free plate must sit between 5.4 and 5.7 GHz.
    // W >> t gives a dense lateral Lamb spectrum around the thickness cutoff;
    // the pure thickness mode is the one with an (almost) x-free u_z field.
    UnitCellGeometry g = bare_cell(20e-6, 1e-6, 1);
    AssembledSystem sys = assemble(build_unit_cell(g, 40, 8), db());
    auto modes = eigensolve(sys, ElectricalState::bare, 10, 5.5e9);
    REQUIRE(!modes.empty());
    double best_f = 0.0, best_score = -1.0;
    for (const auto& md : modes) {
        double sum_z = 0.0, sum_all = 0.0;
        for (int n = 0; n < sys.mesh.node_count(); ++n) {
            sum_z += std::abs(md.u[2 * n + 1]);
            sum_all += std::abs(md.u[2 * n]) + std::abs(md.u[2 * n + 1]);
        }
        double score = sum_z / sum_all;
        if (score > best_score) {
            best_score = score;
            best_f = md.frequency;
        }
    }
    CHECK(best_score > 0.9);
    CHECK(best_f >= 5.4e9);
    CHECK(best_f <= 5.7e9);
}

TEST_CASE("metallized surfaces soften the thickness mode") {
    UnitCellGeometry g = bare_cell(20e-6, 1e-6, 1);
    AssembledSystem sys = assemble(build_unit_cell(g, 40, 8), db());
    auto open_modes = eigensolve(sys, ElectricalState::bare, 1, 5.6e9);
    auto met_modes = eigensolve(sys, ElectricalState::metallized_grounded, 1, 5.4e9);
    REQUIRE(!open_modes.empty());
    REQUIRE(!met_modes.empty());
    CHECK(met_modes[0].frequency < open_modes[0].frequency);
    double k2 = (open_modes[0].frequency * open_modes[0].frequency -
                 met_modes[0].frequency * met_modes[0].frequency) /
                (met_modes[0].frequency * met_modes[0].frequency);
    CHECK(k2 > 0.0);
    CHECK(k2 < 0.15);  // sanity bound, not a calibration
}

TEST_CASE("geometric scaling halves every eigenfrequency") {
    UnitCellGeometry g = bare_cell(1e-6, 1e-6, 1);
    AssembledSystem s1 = assemble(build_unit_cell(g, 10, 10), db());
    AssembledSystem s2 = assemble(build_unit_cell(g.scaled(2.0), 10, 10), db());
    auto m1 = eigensolve(s1, ElectricalState::bare, 4, 9.7e9);
    auto m2 = eigensolve(s2, ElectricalState::bare, 4, 9.7e9 / 2.0);
    REQUIRE(m1.size() == m2.size());
    for (size_t i = 0; i < m1.size(); ++i)
        CHECK(m2[i].frequency == doctest::Approx(m1[i].frequency / 2.0).epsilon(1e-3));
}

TEST_CASE("rigid x-translation of the mesh leaves the spectrum unchanged") {
    UnitCellGeometry g = bare_cell(1e-6, 1e-6, 1);
    Mesh a = build_unit_cell(g, 10, 10);
    Mesh b = a;
    for (auto& xv : b.x) xv += g.pitch;
    auto ma = eigensolve(assemble(a, db()), ElectricalState::bare, 3, 9.7e9);
    auto mb = eigensolve(assemble(b, db()), ElectricalState::bare, 3, 9.7e9);
    REQUIRE(ma.size() == mb.size());
    for (size_t i = 0; i < ma.size(); ++i)
        CHECK(mb[i].frequency == doctest::Approx(ma[i].frequency).epsilon(1e-9));
}

TEST_CASE("modes are mass-normalized") {
    AssembledSystem sys = assemble(build_unit_cell(bare_cell(1e-6, 1e-6, 1), 10, 10), db());
    auto modes = eigensolve(sys, ElectricalState::bare, 2, 9.7e9);
    for (const auto& md : modes) {
        // Rebuild u^T M u from the nodal field through the dof map.
        Eigen::VectorXd ured(sys.n_u);
        for (int n = 0; n < sys.mesh.node_count(); ++n) {
            ured[sys.u_dof[n]] = md.u[2 * n];
            ured[sys.u_dof[n] + 1] = md.u[2 * n + 1];
        }
        CHECK(ured.dot(sys.M * ured) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("quasi-static admittance equals the static capacitance") {
    UnitCellGeometry g = fabricated_lfe();
    AssembledSystem sys = assemble(build_unit_cell(g, 12, 8), db());
    auto pattern = terminal_pattern(g);
    double c0 = static_capacitance(sys, pattern);
    CHECK(c0 > 0.0);
    auto pts = harmonic_admittance(sys, pattern, {5e6}, 1e9);
    double c_low = pts[0].admittance.imag() / (2.0 * 3.14159265358979323846 * 5e6);
    CHECK(c_low == doctest::Approx(c0).epsilon(1e-2));
}

TEST_CASE("harmonic solve conserves energy and meets the residual bound") {
    UnitCellGeometry g = fabricated_lfe();
    AssembledSystem sys = assemble(build_unit_cell(g, 12, 8), db());
    auto pattern = terminal_pattern(g);
    auto modes = eigensolve(sys, ElectricalState::short_circuit, 1, 9.0e9, pattern);
    REQUIRE(!modes.empty());
    double fs = modes[0].frequency;
    for (double f : {0.97 * fs, fs, 1.005 * fs}) {
        HarmonicSolution hs = harmonic_solve(sys, pattern, f, 1100.0);
        CHECK(hs.residual < 1e-8);
        CHECK(hs.power_in == doctest::Approx(hs.power_dissipated).epsilon(1e-6));
        CHECK(hs.power_in > 0.0);
    }
}

TEST_CASE("reciprocity: swapping drive polarity negates charges, keeps Y") {
    UnitCellGeometry g = fabricated_lfe();
    AssembledSystem sys = assemble(build_unit_cell(g, 12, 8), db());
    auto pattern = terminal_pattern(g);
    auto swapped = pattern;
    for (auto& t : swapped)
        t = (t == Terminal::drive_plus) ? Terminal::drive_minus : Terminal::drive_plus;
    HarmonicSolution a = harmonic_solve(sys, pattern, 9.2e9, 800.0);
    HarmonicSolution b = harmonic_solve(sys, swapped, 9.2e9, 800.0);
    REQUIRE(a.terminal_charge.size() == b.terminal_charge.size());
    for (size_t i = 0; i < a.terminal_charge.size(); ++i)
        CHECK(std::abs(a.terminal_charge[i] + b.terminal_charge[i]) <
              1e-9 * std::abs(a.terminal_charge[i]));
    CHECK(std::abs(a.admittance - b.admittance) < 1e-9 * std::abs(a.admittance));
}

TEST_CASE("short-circuit eigenfrequency matches the admittance peak") {
    UnitCellGeometry g = fabricated_lfe();
    AssembledSystem sys = assemble(build_unit_cell(g, 12, 8), db());
    auto pattern = terminal_pattern(g);
    auto modes = eigensolve(sys, ElectricalState::short_circuit, 3, 9.0e9, pattern);
    REQUIRE(!modes.empty());
    // Strongest electrical activity marks the series resonance.
    double fs = modes[0].frequency, best = -1.0;
    for (const auto& md : modes) {
        double drive = 0.0;
        for (size_t t = 0; t < md.terminal_charge.size(); ++t)
            drive += (pattern[t] == Terminal::drive_plus ? 1.0 : -1.0) * md.terminal_charge[t];
        if (std::abs(drive) > best) {
            best = std::abs(drive);
            fs = md.frequency;
        }
    }
    std::vector<double> grid;
    double lo = fs * 0.997, hi = fs * 1.003;
    for (int i = 0; i <= 60; ++i) grid.push_back(lo + (hi - lo) * i / 60.0);
    auto pts = harmonic_admittance(sys, pattern, grid, 2000.0);
    size_t imax = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        if (std::abs(pts[i].admittance) > std::abs(pts[imax].admittance)) imax = i;
    double step = (hi - lo) / 60.0;
    CHECK(std::abs(pts[imax].frequency - fs) <= 1.001 * step);
}

TEST_CASE("resonance linewidth follows the structural Q") {
    // A strongly coupled cell keeps the antiresonance many linewidths above
    // the series peak, so |Y| is locally Lorentzian with 3 dB width fs/Q.
    UnitCellGeometry g;
    g.pitch = 1.1e-6;
    g.t_plate = 1.0e-6;
    g.t_electrode = 110e-9;
    g.alpha = 0.5;
    g.scheme = Scheme::tfe2;
    g.n_periods = 2;
    AssembledSystem sys = assemble(build_unit_cell(g, 12, 8), db());
    auto pattern = terminal_pattern(g);
    auto modes = eigensolve(sys, ElectricalState::short_circuit, 8, 9.0e9, pattern);
    REQUIRE(!modes.empty());
    double fs = modes[0].frequency, best = -1.0;
    for (const auto& md : modes) {
        double drive = 0.0;
        for (size_t t = 0; t < md.terminal_charge.size(); ++t)
            drive += (pattern[t] == Terminal::drive_plus ? 1.0 : -1.0) * md.terminal_charge[t];
        if (std::abs(drive) > best) {
            best = std::abs(drive);
            fs = md.frequency;
        }
    }
    const double q = 1100.0;
    // Fine grid over a few linewidths around the series peak.
    std::vector<double> grid;
    double half = 4.0 * fs / q;
    for (int i = 0; i <= 400; ++i) grid.push_back(fs - half + 2.0 * half * i / 400.0);
    auto pts = harmonic_admittance(sys, pattern, grid, q);
    size_t imax = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        if (std::abs(pts[i].admittance) > std::abs(pts[imax].admittance)) imax = i;
    double peak = std::abs(pts[imax].admittance);
    double target = peak / std::sqrt(2.0);
    // Walk outward, then interpolate the exact half-power crossings.
    size_t ilo = imax, ihi = imax;
    while (ilo > 0 && std::abs(pts[ilo].admittance) > target) --ilo;
    while (ihi + 1 < pts.size() && std::abs(pts[ihi].admittance) > target) ++ihi;
    REQUIRE(ilo > 0);
    REQUIRE(ihi + 1 < pts.size());
    auto cross = [&](size_t below, size_t above) {
        double ya = std::abs(pts[below].admittance), yb = std::abs(pts[above].admittance);
        double fa = pts[below].frequency, fb = pts[above].frequency;
        return fa + (target - ya) / (yb - ya) * (fb - fa);
    };
    double f_lo = cross(ilo, ilo + 1);
    double f_hi = cross(ihi, ihi - 1);
    CHECK(f_hi - f_lo == doctest::Approx(fs / q).epsilon(0.05));
}

TEST_CASE("gauss fields: uniform drive with clamped mechanics has zero stress") {
    UnitCellGeometry g = fabricated_lfe();
    AssembledSystem sys = assemble(build_unit_cell(g, 12, 8), db());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * sys.mesh.node_count());
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(sys.mesh.node_count());
    for (int n = 0; n < sys.mesh.node_count(); ++n) phi[n] = sys.mesh.z[n] * 1e6;  // 1 V/um
    auto fields = evaluate_gauss_fields(sys, u, phi);
    for (const auto& gf : fields) {
        if (sys.mesh.regions[gf.region].is_electrode) continue;
        CHECK(gf.efield[0] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(gf.efield[1] == doctest::Approx(-1e6).epsilon(1e-9));
        // Stress here is purely piezoelectric back-action, bounded by |e||E|.
        CHECK(gf.stress.norm() < 10e6);
    }
}

}  // TEST_SUITE
