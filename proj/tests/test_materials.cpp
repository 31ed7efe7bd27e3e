#include "corkit/materials.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

using namespace corkit;

TEST_SUITE("materials") {

TEST_CASE("default database loads AlN and Al") {
    const MaterialDb& db = default_material_db();
    CHECK(db.has("AlN"));
    CHECK(db.has("Al"));
    CHECK_THROWS_AS(db.get("Unobtainium"), std::invalid_argument);
}

TEST_CASE("default AlN longitudinal velocity sits in the nitride window") {
    const auto& aln = default_material_db().get("AlN");
    double v = std::sqrt(aln.c(2, 2) / aln.density);
    CHECK(v >= 10800.0);
    CHECK(v <= 11400.0);
}

TEST_CASE("shipped tensors are positive-definite") {
    for (const auto& m : default_material_db().entries) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(m.c);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        if (!m.is_conductor) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ep(m.eps);
            CHECK(ep.eigenvalues().minCoeff() > 0.0);
        }
    }
}

TEST_CASE("isotropic constants accepted as degenerate hexagonal") {
    MaterialDb db = parse_material_db(R"(
material dummy {
    class = hexagonal
    density = 1000
    c11_gpa = 100
    c12_gpa = 40
    c13_gpa = 40
    c33_gpa = 100
    c44_gpa = 30
    eps11_r = 5
    eps33_r = 5
}
)", "<test>");
    const auto& m = db.get("dummy");
    CHECK(m.c(3, 3) == doctest::Approx((m.c(0, 0) - m.c(0, 1)) / 2.0));
}

TEST_CASE("zero density rejected") {
    CHECK_THROWS_WITH_AS(parse_material_db(R"(
material bad {
    class = isotropic
    density = 0
    youngs_gpa = 70
    poisson = 0.3
}
)", "<test>"), doctest::Contains("density must be > 0"), std::invalid_argument);
}

TEST_CASE("unknown keys rejected with location") {
    try {
        parse_material_db(R"(
material bad {
    class = isotropic
    density = 2700
    youngs_gpa = 70
    poisson = 0.35
    hardness = 3
}
)", "probe.mat");
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("unknown key 'hardness'") != std::string::npos);
        CHECK(msg.find("probe.mat:") != std::string::npos);
    }
}

TEST_CASE("hexagonal pattern enforced on explicit matrices") {
    CHECK_THROWS_WITH_AS(parse_material_db(R"(
material bad {
    class = hexagonal
    density = 3000
    c_gpa = [ 345 125 120 0 0 0
              125 345 120 0 0 0
              120 120 395 0 0 0
              0 0 0 118 0 0
              0 0 0 0 118 0
              0 0 0 0 0 80 ]
    e = [ 0 0 0 0 -0.48 0
          0 0 0 -0.48 0 0
          -0.58 -0.58 1.55 0 0 0 ]
    eps_r = [ 8 0 0
              0 8 0
              0 0 9.5 ]
}
)", "<test>"), doctest::Contains("hexagonal 6mm pattern"), std::invalid_argument);
}

TEST_CASE("non-positive-definite stiffness rejected") {
    CHECK_THROWS_WITH_AS(parse_material_db(R"(
material bad {
    class = hexagonal
    density = 3000
    c11_gpa = 100
    c12_gpa = 150
    c13_gpa = 0
    c33_gpa = 100
    c44_gpa = 30
    eps11_r = 5
    eps33_r = 5
}
)", "<test>"), doctest::Contains("not positive-definite"), std::invalid_argument);
}

TEST_CASE("conductor carries no piezo terms") {
    const auto& al = default_material_db().get("Al");
    CHECK(al.is_conductor);
    CHECK(al.e.cwiseAbs().maxCoeff() == 0.0);

    MaterialTensors bad = al;
    bad.e(2, 2) = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("voigt round trip is exact") {
    const auto& aln = default_material_db().get("AlN");
    FullTensors full = voigt_to_full(aln);
    CHECK(full.e[0][0][2] == aln.e(0, 4));  // e_113 = e15
    CHECK(full.e[2][2][2] == aln.e(2, 2));
    CHECK(full.c[0][0][0][0] == aln.c(0, 0));
    CHECK(full.c[0][2][0][2] == aln.c(4, 4));

    CHECK(full_to_voigt_c(full) == aln.c);  // bitwise
    CHECK(full_to_voigt_e(full) == aln.e);
}

TEST_CASE("identity stiffness maps to identity blocks") {
    MaterialTensors m;
    m.name = "ident";
    m.density = 1.0;
    m.c = Eigen::Matrix<double, 6, 6>::Identity();
    m.e.setZero();
    m.eps = Eigen::Matrix3d::Identity();
    FullTensors full = voigt_to_full(m);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    bool same_pair = (i == k && j == l) || (i == l && j == k);
                    CHECK(full.c[i][j][k][l] == (same_pair ? 1.0 : 0.0));
                }
}

TEST_CASE("derived strain-form quantities") {
    const auto& aln = default_material_db().get("AlN");
    auto s = aln.compliance();
    CHECK((aln.c * s - Eigen::Matrix<double, 6, 6>::Identity()).cwiseAbs().maxCoeff() < 1e-12);

    // eps_free - eps_clamped = d e^T is positive semidefinite.
    Eigen::Matrix3d gap = aln.eps_free() - aln.eps;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gap);
    CHECK(es.eigenvalues().minCoeff() >= -1e-18);
    CHECK(gap(2, 2) > 0.0);
}

}  // TEST_SUITE
