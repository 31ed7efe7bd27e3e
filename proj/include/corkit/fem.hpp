#pragma once

#include "corkit/geometry.hpp"
#include "corkit/materials.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace corkit {

// Coupled plane-strain piezoelectric system on the unit cell, after periodic
// identification and per-finger equipotential collapse. Blocks follow
//   [ Kuu  A  ] [u  ]   [f]          q = Kphi*phi - A^T*u
//   [ A^T -Kphi] [phi] = [-q]   with q the free charge at potential rows.
// Mechanical DOFs interleave as (ux, uz) per master node.
struct AssembledSystem {
    Mesh mesh;
    std::vector<MaterialTensors> region_materials;  // aligned with mesh.regions

    std::vector<int> u_dof;       // node -> ux equation (uz = +1); slaves share masters
    std::vector<int> phi_dof;     // node -> potential equation, -1 if none
    std::vector<int> finger_phi;  // finger -> master potential equation
    int n_u = 0;
    int n_phi = 0;

    Eigen::SparseMatrix<double> Kuu, A, Kphi, M;

    int equations() const { return n_u + n_phi; }
};

AssembledSystem assemble(const Mesh& mesh, const MaterialDb& db);

// Electrical boundary condition applied at solve time. SHORT and OPEN act on
// finger terminals; METALLIZED_GROUNDED and BARE act on bare plate surfaces.
enum class ElectricalState { short_circuit, open_circuit, metallized_grounded, bare };

struct EigenOptions {
    int basis = 0;          // Lanczos basis size; 0 picks a default
    bool force_dense = false;
    double tol = 1e-9;
};

struct ModalSolution {
    double frequency = 0.0;            // Hz
    Eigen::VectorXd u;                 // 2*nodes, (ux, uz) per node
    Eigen::VectorXd phi;               // nodes, 0 where no potential DOF
    std::vector<double> terminal_charge;  // per finger, modal scale
};

// Returns n_modes eigenpairs nearest f_center, ascending in frequency,
// mass-normalized (u^T M u = 1). `pattern` is required for OPEN (it fixes the
// bus wiring); other states ignore it.
std::vector<ModalSolution> eigensolve(const AssembledSystem& sys, ElectricalState state,
                                      int n_modes, double f_center,
                                      const std::vector<Terminal>& pattern = {},
                                      const EigenOptions& opts = {});

struct HarmonicPoint {
    double frequency = 0.0;
    std::complex<double> admittance;  // S per meter depth
    double power_in = 0.0;            // W per meter depth
    double power_dissipated = 0.0;
    double residual = 0.0;            // relative discrete balance
};

struct HarmonicSolution {
    double frequency = 0.0;
    Eigen::VectorXcd u;    // 2*nodes
    Eigen::VectorXcd phi;  // nodes
    std::vector<std::complex<double>> terminal_charge;
    std::complex<double> admittance;
    double power_in = 0.0, power_dissipated = 0.0, residual = 0.0;
};

// Drives DRIVE+ at +0.5 V and DRIVE- at -0.5 V with hysteretic loss factor
// 1/q_struct on the mechanical stiffness; Y = j*2*pi*f * q_plus / 1 V.
std::vector<HarmonicPoint> harmonic_admittance(const AssembledSystem& sys,
                                               const std::vector<Terminal>& pattern,
                                               const std::vector<double>& f_grid,
                                               double q_struct);

HarmonicSolution harmonic_solve(const AssembledSystem& sys, const std::vector<Terminal>& pattern,
                                double f, double q_struct);

// Free (low-frequency) capacitance between the drive buses, F per meter depth.
double static_capacitance(const AssembledSystem& sys, const std::vector<Terminal>& pattern);

// Per-Gauss-point stress and electric field derived from nodal fields, for
// energy integrals. 4 points per element, element-major order.
struct GaussPointField {
    double weight = 0.0;     // quadrature weight * |J|
    Eigen::Vector3d stress;  // T_xx, T_zz, T_xz (Pa)
    Eigen::Vector2d efield;  // E_x, E_z (V/m)
    int region = 0;
};

std::vector<GaussPointField> evaluate_gauss_fields(const AssembledSystem& sys,
                                                   const Eigen::VectorXd& u,
                                                   const Eigen::VectorXd& phi);

// Single-element matrices, exposed for consistency checks.
struct ElementMatrices {
    Eigen::Matrix<double, 8, 8> kuu;
    Eigen::Matrix<double, 8, 4> a;
    Eigen::Matrix4d kphi;
    Eigen::Matrix<double, 8, 8> m;
    double area = 0.0;
};

ElementMatrices element_matrices(const MaterialTensors& mat, const std::array<double, 4>& xe,
                                 const std::array<double, 4>& ze);

void dump_fields_csv(const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
                     const std::string& path);

}  // namespace corkit
