#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <corkit/geometry.hpp>
#include <corkit/materials.hpp>

namespace corkit {

// The solve finished but nothing passed mode identification; distinct from
// solver breakdown so callers can report "no usable result" separately.
struct spurious_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mesh density and worker count shared by the sweep drivers. Sweep points
// are independent jobs on a bounded pool; results land in input order, so
// any worker count produces identical output.
struct StudioOptions {
    int nx = 20;       // element columns per period
    int nz = 16;       // element layers through the plate
    int n_modes = 12;  // eigenpairs per solve
    int jobs = 1;      // worker threads; clamped to the point count
    const MaterialDb* materials = nullptr;  // null uses the built-in set
};

struct SweepRow {
    double x = 0.0;             // swept parameter value
    double f_r = 0.0;           // short-circuit resonance, 0 on spurious rows
    std::optional<double> kt2;  // absent on spurious rows
    double mac = 0.0;
    bool spurious = false;
};

struct SweepArgmax {
    double x = 0.0;
    double value = 0.0;
    int index = -1;  // best raw row, -1 when every row is spurious
};

// Rows align 1:1 with the input grid. The argmax refines the best row by a
// parabola through the three highest non-spurious points, falling back to
// the raw best when the fit is not concave or leaves the fitted span.
struct SweepResult {
    std::string axis;
    std::vector<SweepRow> rows;
    SweepArgmax argmax;
};

// Coupling versus electrode thickness at fixed plate and pitch. The search
// window is anchored once on the electrode-less metallized cell, so the
// t_electrode -> 0 limit stays continuous with the dispersion K2. Throws
// std::invalid_argument unless base has electrodes and every thickness > 0.
SweepResult sweep_electrode_thickness(const UnitCellGeometry& base,
                                      const std::vector<double>& t_al_list,
                                      const StudioOptions& opts = {});

// Resonance and coupling versus pitch at fixed thicknesses: the lithographic
// tuning curve. Each width is re-anchored on its own bare cell; widths where
// the combined-overtone match fails are flagged, never reported as numbers.
SweepResult litho_tuning_scan(const UnitCellGeometry& base, const std::vector<double>& w_list,
                              const StudioOptions& opts = {});

// (max f_r - min f_r) / midpoint over non-spurious rows; 0 with fewer than
// two usable rows.
double tuning_range(const SweepResult& result);

// min kt2 / max kt2 over non-spurious rows; 1 with fewer than two usable rows.
double retained_coupling(const SweepResult& result);

struct DimensionRecipe {
    double f_target = 0.0;  // Hz
    double w = 0.0;         // m
    double t_aln = 0.0;     // m
    double t_al = 0.0;      // m
    Scheme scheme = Scheme::lfe;
    double achieved_f = 0.0;  // Hz, from the verification solve
};

// Similarity-scales the scheme's calibrated 24 GHz base design (all lengths
// by f_base/f_target), then verifies with one short-circuit FEM solve whose
// combined-overtone frequency becomes achieved_f. Valid for 6-60 GHz and the
// lfe/tfe2 schemes; throws std::invalid_argument otherwise and
// std::runtime_error when the verification solve finds no matching mode.
DimensionRecipe synthesize_dimensions(double f_target, Scheme scheme,
                                      const StudioOptions& opts = {});

// The scheme's frozen base design (the 24 GHz reference row); lfe/tfe2 only.
UnitCellGeometry base_design(Scheme scheme);

struct CorBawRow {
    double t = 0.0;      // plate thickness, m
    double f_cor = 0.0;  // bare combined-overtone frequency at W = t, Hz
    double f_baw = 0.0;  // fundamental thickness-extensional frequency, Hz
    double ratio = 0.0;  // f_cor / f_baw
};

// Electrode-less frequency comparison on the same plate: combined-overtone
// cell at W = t versus the plain thickness mode. Thicknesses must be > 0.
std::vector<CorBawRow> cor_vs_baw(const std::vector<double>& t_list,
                                  const StudioOptions& opts = {});

struct SensitivityRow {
    double dt_rel = 0.0;      // signed thickness perturbation
    double df_cor_rel = 0.0;  // relative frequency shift of the overtone cell
    double df_baw_rel = 0.0;  // relative shift of the thickness mode
};

// Relative frequency shift per signed thickness perturbation, each point
// re-meshed at the perturbed thickness with the pitch held fixed. Both
// geometries must be electrode-less and |dt_rel| <= 10%.
std::vector<SensitivityRow> thickness_sensitivity(const UnitCellGeometry& cor_cell,
                                                  const UnitCellGeometry& baw_cell,
                                                  const std::vector<double>& dt_rel_list,
                                                  const StudioOptions& opts = {});

// Least-squares slope of df/f against dt/t through the origin over the
// nonzero rows; the thickness mode gives -1, the overtone cell less.
double sensitivity_slope(const std::vector<SensitivityRow>& rows, bool for_baw);

// CSV with one row per sweep point; spurious rows leave the frequency and
// coupling cells empty and set the flag column.
std::string sweep_csv(const SweepResult& result);
std::string sweep_json(const SweepResult& result);

std::string cor_baw_csv(const std::vector<CorBawRow>& rows);
std::string sensitivity_csv(const std::vector<SensitivityRow>& rows);

std::string recipe_json(const DimensionRecipe& r);

// Writes the recipe as a `geometry` design block loadable by
// load_design_file, achieved frequency recorded in a comment.
void write_recipe_design(const DimensionRecipe& r, const std::string& path,
                         const std::string& name = "recipe");

}  // namespace corkit
