#include "corkit/geometry.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

using namespace corkit;

namespace {

UnitCellGeometry bare_cell() {
    UnitCellGeometry g;
    g.pitch = 1e-6;
    g.t_plate = 1e-6;
    g.t_electrode = 0.0;
    g.alpha = 0.5;
    g.n_periods = 2;
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

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("electrodeless cell element counting") {
    Mesh m = build_unit_cell(bare_cell(), 16, 16);
    CHECK(m.elems.size() == 512);  // 2 periods * 16 * 16
    CHECK(m.regions.size() == 1);
    CHECK(m.finger_nodes.empty());
    CHECK(m.node_count() == 33 * 17);
}

TEST_CASE("lfe cell puts fingers on top only, width alpha*pitch") {
    UnitCellGeometry g = fabricated_lfe();
    Mesh m = build_unit_cell(g, 16, 12);
    REQUIRE(m.finger_nodes.size() == 2);
    for (size_t f = 0; f < m.finger_nodes.size(); ++f) {
        const MeshRegion& r = m.regions[f + 1];
        CHECK(r.is_electrode);
        CHECK(r.top);
        double xmin = 1e9, xmax = -1e9;
        for (int n : m.finger_nodes[f]) {
            xmin = std::min(xmin, m.x[n]);
            xmax = std::max(xmax, m.x[n]);
            CHECK(m.z[n] >= g.t_plate - 1e-15);
        }
        CHECK(xmax - xmin == doctest::Approx(g.alpha * g.pitch).epsilon(1e-12));
    }
    // 0.6555 um finger width for the fabricated device
    double w0 = g.alpha * g.pitch;
    CHECK(w0 == doctest::Approx(0.6555e-6).epsilon(1e-9));
}

TEST_CASE("tfe cells mirror fingers to the bottom") {
    UnitCellGeometry g = fabricated_lfe();
    g.scheme = Scheme::tfe2;
    g.alpha = 0.5;
    Mesh m = build_unit_cell(g, 16, 12);
    REQUIRE(m.finger_nodes.size() == 4);
    CHECK(m.regions[1].top);
    CHECK(m.regions[2].top);
    CHECK(!m.regions[3].top);
    CHECK(!m.regions[4].top);
    for (int n : m.finger_nodes[2]) CHECK(m.z[n] <= 1e-15);
}

TEST_CASE("scaling halves node coordinates exactly") {
    UnitCellGeometry g = fabricated_lfe();
    Mesh a = build_unit_cell(g, 16, 12);
    Mesh b = build_unit_cell(g.scaled(0.5), 16, 12);
    REQUIRE(a.node_count() == b.node_count());
    for (int i = 0; i < a.node_count(); ++i) {
        CHECK(b.x[i] == 0.5 * a.x[i]);
        CHECK(b.z[i] == 0.5 * a.z[i]);
    }
}

TEST_CASE("periodic pairs are congruent") {
    UnitCellGeometry g = fabricated_lfe();
    Mesh m = build_unit_cell(g, 16, 12);
    REQUIRE(!m.periodic_pairs.empty());
    for (auto [l, r] : m.periodic_pairs) {
        CHECK(m.z[l] == m.z[r]);
        CHECK(m.x[r] - m.x[l] == doctest::Approx(g.n_periods * g.pitch).epsilon(1e-12));
        CHECK(m.x[l] == 0.0);
    }
}

TEST_CASE("no inverted elements") {
    CHECK(build_unit_cell(bare_cell(), 16, 16).min_corner_jacobian() > 0.0);
    UnitCellGeometry g = fabricated_lfe();
    g.scheme = Scheme::tfe1;
    CHECK(build_unit_cell(g, 20, 10).min_corner_jacobian() > 0.0);
}

TEST_CASE("every element belongs to exactly one valid region") {
    Mesh m = build_unit_cell(fabricated_lfe(), 16, 12);
    REQUIRE(m.elem_region.size() == m.elems.size());
    for (int r : m.elem_region) {
        CHECK(r >= 0);
        CHECK(r < static_cast<int>(m.regions.size()));
    }
    size_t electrode_elems = 0;
    for (int r : m.elem_region) electrode_elems += (r > 0);
    CHECK(electrode_elems > 0);
}

TEST_CASE("terminal patterns by scheme") {
    UnitCellGeometry g = fabricated_lfe();

    auto lfe = terminal_pattern(g);
    REQUIRE(lfe.size() == 2);
    CHECK(lfe[0] == Terminal::drive_plus);
    CHECK(lfe[1] == Terminal::drive_minus);

    g.scheme = Scheme::tfe2;
    auto tfe2 = terminal_pattern(g);
    REQUIRE(tfe2.size() == 4);
    CHECK(tfe2[0] == Terminal::drive_plus);
    CHECK(tfe2[1] == Terminal::drive_minus);
    CHECK(tfe2[2] == Terminal::drive_plus);   // bottom mirrors top
    CHECK(tfe2[3] == Terminal::drive_minus);

    g.scheme = Scheme::tfe1;
    auto tfe1 = terminal_pattern(g);
    REQUIRE(tfe1.size() == 4);
    CHECK(tfe1[0] == Terminal::drive_plus);
    CHECK(tfe1[1] == Terminal::drive_minus);
    CHECK(tfe1[2] == Terminal::drive_minus);  // bottom inverted
    CHECK(tfe1[3] == Terminal::drive_plus);

    g = bare_cell();
    CHECK_THROWS_AS(terminal_pattern(g), std::invalid_argument);
}

TEST_CASE("geometry validation") {
    UnitCellGeometry g = bare_cell();
    g.alpha = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    g = bare_cell();
    g.t_electrode = 50e-9;  // electrodeless with metal
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    g = fabricated_lfe();
    g.t_electrode = 0.0;  // lfe without metal
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    g = bare_cell();
    g.n_periods = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    CHECK_THROWS_AS(build_unit_cell(bare_cell(), 4, 16), std::invalid_argument);
    CHECK_THROWS_AS(build_unit_cell(bare_cell(), 16, 4), std::invalid_argument);

    g = fabricated_lfe();
    g.alpha = 0.05;  // unresolvable finger at nx=16
    CHECK_THROWS_AS(build_unit_cell(g, 16, 12), std::invalid_argument);
}

TEST_CASE("interface nodes are shared, not duplicated") {
    UnitCellGeometry g = fabricated_lfe();
    g.scheme = Scheme::tfe2;
    Mesh m = build_unit_cell(g, 16, 12);
    // Finger nodes on the plate skin must be plate lattice ids.
    int plate_nodes = (m.total_cols + 1) * (m.plate_layers + 1);
    for (size_t f = 0; f < m.finger_nodes.size(); ++f) {
        int on_skin = 0;
        for (int n : m.finger_nodes[f]) on_skin += (n < plate_nodes);
        CHECK(on_skin > 0);
    }
}

}  // TEST_SUITE
