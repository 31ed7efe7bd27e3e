#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace corkit {

// Stress-charge form constants for one material. c and eps are the clamped
// (constant-strain) tensors; compliance and free permittivity are derived.
struct MaterialTensors {
    std::string name;
    double density = 0.0;                 // kg/m^3
    Eigen::Matrix<double, 6, 6> c;        // Pa, Voigt
    Eigen::Matrix<double, 3, 6> e;        // C/m^2
    Eigen::Matrix3d eps;                  // F/m, clamped
    bool is_conductor = false;

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;

    Eigen::Matrix<double, 6, 6> compliance() const;       // s = c^-1
    Eigen::Matrix<double, 3, 6> strain_coupling() const;  // d = e s
    Eigen::Matrix3d eps_free() const;                     // eps^T = eps^S + e s e^T
};

// Full-index views of the Voigt tensors, plain index bookkeeping with no
// engineering-strain factors: c_full[i][j][k][l] = c(V(i,j), V(k,l)).
struct FullTensors {
    double c[3][3][3][3];
    double e[3][3][3];
};

FullTensors voigt_to_full(const MaterialTensors& m);
Eigen::Matrix<double, 6, 6> full_to_voigt_c(const FullTensors& t);
Eigen::Matrix<double, 3, 6> full_to_voigt_e(const FullTensors& t);

struct MaterialDb {
    std::vector<MaterialTensors> entries;

    const MaterialTensors& get(const std::string& name) const;
    bool has(const std::string& name) const;
};

// Loads and validates a material database file; rejects unknown keys.
MaterialDb load_material_db(const std::string& path);

// Parses database text directly (used for the built-in defaults).
MaterialDb parse_material_db(std::string_view text, std::string_view source);

// Built-in AlN/Al set used when no --materials override is given.
const MaterialDb& default_material_db();
std::string_view default_material_db_text();

constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m

}  // namespace corkit
