#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corkit {

enum class Scheme {
    electrodeless_open,
    electrodeless_metallized,
    lfe,
    tfe1,
    tfe2,
};

Scheme scheme_from_string(std::string_view s);
std::string_view to_string(Scheme s);

// Periodic unit-cell cross-section. x spans n_periods pitches, z spans the
// plate thickness plus any electrode layers.
struct UnitCellGeometry {
    double pitch = 0.0;        // W, m
    double t_plate = 0.0;      // t_AlN, m
    double t_electrode = 0.0;  // t_Al, m; 0 iff electrodeless
    double alpha = 0.5;        // electrode width / pitch, in (0,1)
    int n_periods = 2;
    Scheme scheme = Scheme::electrodeless_open;

    std::string plate_material = "AlN";
    std::string electrode_material = "Al";

    void validate() const;
    UnitCellGeometry scaled(double s) const;
    bool has_electrodes() const;
    bool has_bottom_electrodes() const;
};

enum class Terminal { drive_plus, drive_minus, ground };

// Per-finger drive assignment, finger order: top fingers left to right, then
// bottom fingers left to right (same order as Mesh::finger_nodes).
std::vector<Terminal> terminal_pattern(const UnitCellGeometry& g);

struct MeshRegion {
    std::string name;
    std::string material;
    bool is_electrode = false;
    int period = -1;  // -1 for the plate
    bool top = true;  // electrode side
};

struct Mesh {
    std::vector<double> x, z;               // node coordinates
    std::vector<std::array<int, 4>> elems;  // ccw: (x0z0, x1z0, x1z1, x0z1)
    std::vector<int> elem_region;
    std::vector<MeshRegion> regions;  // [0] is the plate; finger f is region f+1

    std::vector<std::pair<int, int>> periodic_pairs;  // (left node, right node)
    std::vector<int> top_surface, bottom_surface;     // plate skin, left to right
    std::vector<std::vector<int>> finger_nodes;       // per finger, interface included

    int cols_per_period = 0;
    int total_cols = 0;   // n_periods * cols_per_period
    int plate_layers = 0; // element layers through the plate

    int node_count() const { return static_cast<int>(x.size()); }
    int plate_node(int ix, int iz) const { return iz * (total_cols + 1) + ix; }

    // Smallest corner Jacobian over all elements; > 0 means no inversion.
    double min_corner_jacobian() const;
};

// Structured quad mesh: nx element columns per period (electrode edges become
// grid lines, so the realized column count can differ slightly from nx when
// electrodes are present), nz layers through the plate.
Mesh build_unit_cell(const UnitCellGeometry& g, int nx, int nz);

void dump_mesh_csv(const Mesh& m, const std::string& nodes_path, const std::string& elems_path);

// Reads `geometry name { ... }` design blocks (same format as material files).
UnitCellGeometry load_design_file(const std::string& path, const std::string& name);

}  // namespace corkit
