#pragma once

#include <array>
#include <optional>
#include <vector>

#include <corkit/fem.hpp>
#include <corkit/geometry.hpp>
#include <corkit/materials.hpp>

namespace corkit {

// Combined-overtone modeshape over one electrode period, z measured from the
// plate's bottom face:
//   mu_x(x, z) = -xbar * cos(beta_x x) * cos(beta_zx (z - z0))
//   mu_z(x, z) = -zbar * sin(beta_x x) * cos(beta_zz (z - z0))
// beta_x = pi/W, beta_zx = 3*pi/t, beta_zz = 2*pi/t. mu_x is odd about the
// midplane with 3 sign reversals through thickness, mu_z even with 2. The
// x period is 2W, so meshes sampling it need an even period count.
struct AnalyticModeShape {
    double xbar = 1.0;
    double zbar = 1.0;
    double beta_x = 0.0;
    double beta_zx = 0.0;
    double beta_zz = 0.0;
    double z0 = 0.0;  // plate bottom-face height

    std::array<double, 2> operator()(double x, double z) const;
};

AnalyticModeShape analytic_modeshape(const UnitCellGeometry& g, double xbar = 1.0,
                                     double zbar = 1.0);

constexpr double spurious_mac_threshold = 0.6;

struct ComMatch {
    int index = -1;        // position in the mode list, -1 when the list is empty
    double mac = 0.0;      // mode-match score in [0, 1]
    bool spurious = true;  // mac below spurious_mac_threshold
};

// Picks the eigenmode whose plate displacement best matches the analytic
// field: the normalized squared inner product against the shape, maximized
// over its lateral offset only. The amplitude ratio and the relative sign of
// the two components stay fixed; they are branch invariants, so hybrids with
// the opposite component sign and single-component branches both score low.
ComMatch identify_com(const Mesh& mesh, const std::vector<ModalSolution>& modes,
                      const AnalyticModeShape& shape);

// Frequency pair with the derived coupling coefficient and, when computed by
// the energy route, the underlying energy integrals (J per meter depth).
struct CouplingReport {
    double f_low = 0.0;   // f_s or f_m, Hz
    double f_high = 0.0;  // f_p or f_o, Hz
    double kt2 = 0.0;     // (pi^2/8) * (f_high^2 - f_low^2) / f_low^2
    double um = 0.0;
    double ue = 0.0;
    double ucoupling = 0.0;
    double mac = 0.0;
    Scheme scheme = Scheme::electrodeless_open;
    bool spurious = false;
};

double coupling_from_pair(double f_low, double f_high);

struct DispersionRow {
    double w = 0.0;
    double f_open = 0.0;   // electrically open (bare) COM frequency
    double f_metal = 0.0;  // massless grounded-surface COM frequency
    double k2 = 0.0;
    double mac_open = 0.0;
    double mac_metal = 0.0;
    bool spurious = false;
};

struct DispersionTable {
    std::vector<DispersionRow> rows;
    int peak_index = -1;  // -1 when every row is spurious
    double peak_w = 0.0;  // parabolic refinement of the best row
    double peak_k2 = 0.0;
};

struct ScanOptions {
    int nx = 20;  // element columns per period
    int nz = 16;  // element layers through the plate
    int n_modes = 10;
    int n_periods = 2;
};

// Electrode-less dispersion: for each width solves the bare and the
// grounded-surface cell, identifies the COM in both, and tabulates
// K2 = (pi^2/8) (f_o^2 - f_m^2) / f_m^2. Spurious rows are kept but flagged
// and excluded from the peak search.
DispersionTable dispersion_scan(double t_plate, const std::vector<double>& w_list,
                                const MaterialDb& db, const std::string& plate_material = "AlN",
                                const ScanOptions& opts = {});

// Short/open eigen pair on an electroded cell; the COM is identified by the
// mode-match score in both spectra, never by index. The window bounds the
// short-circuit search; modes outside it are ignored.
CouplingReport extract_kt2(const AssembledSystem& sys, const std::vector<Terminal>& pattern,
                           const UnitCellGeometry& g, double f_lo, double f_hi,
                           int n_modes = 12);

// Berlincourt route: mechanical energy of the modal stress field, electric
// energy of the drive field, and their mutual energy, integrated over the
// dielectric regions with the stress-based material forms.
CouplingReport energy_integral_kt2(const AssembledSystem& sys,
                                   const std::vector<GaussPointField>& modal_fields,
                                   const std::vector<GaussPointField>& drive_fields);

struct QBudget {
    std::optional<double> q_anchor;
    std::optional<double> q_interface;
    std::optional<double> q_material;
    std::optional<double> q_electrical;
    std::optional<double> q_dielectric;
    std::optional<double> q_intrinsic;
};

// Harmonic combination of the set loss channels; unset channels are lossless.
double q_total(const QBudget& b);

}  // namespace corkit
