#include "corkit/geometry.hpp"

#include "corkit/structext.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace corkit {

namespace {

// Column grid inside one period as fractions of the pitch. Electrode edges
// land exactly on grid lines; gaps split evenly left/right of the finger.
struct PeriodGrid {
    std::vector<double> frac;  // size cols+1, frac[0]=0, frac[cols]=1
    int n_gap = 0;             // columns per gap side
    int n_el = 0;              // columns across the finger
};

PeriodGrid period_grid(const UnitCellGeometry& g, int nx) {
    PeriodGrid pg;
    if (!g.has_electrodes()) {
        for (int j = 0; j <= nx; ++j) pg.frac.push_back(static_cast<double>(j) / nx);
        return pg;
    }
    pg.n_el = static_cast<int>(std::lround(nx * g.alpha));
    if (pg.n_el < 2)
        throw std::invalid_argument("electrode width unresolvable: alpha*nx < 2 element columns");
    pg.n_gap = std::max(1, static_cast<int>(std::lround(nx * (1.0 - g.alpha) / 2.0)));
    double gap_frac = (1.0 - g.alpha) / 2.0;
    for (int j = 0; j < pg.n_gap; ++j) pg.frac.push_back(gap_frac * j / pg.n_gap);
    for (int j = 0; j < pg.n_el; ++j) pg.frac.push_back(gap_frac + g.alpha * j / pg.n_el);
    for (int j = 0; j < pg.n_gap; ++j)
        pg.frac.push_back(gap_frac + g.alpha + gap_frac * j / pg.n_gap);
    pg.frac.push_back(1.0);
    return pg;
}

}  // namespace

Scheme scheme_from_string(std::string_view s) {
    if (s == "open" || s == "electrodeless_open") return Scheme::electrodeless_open;
    if (s == "metallized" || s == "electrodeless_metallized")
        return Scheme::electrodeless_metallized;
    if (s == "lfe" || s == "LFE") return Scheme::lfe;
    if (s == "tfe1" || s == "TFE1" || s == "tfe-1") return Scheme::tfe1;
    if (s == "tfe2" || s == "TFE2" || s == "tfe-2") return Scheme::tfe2;
    throw std::invalid_argument("unknown excitation scheme '" + std::string(s) + "'");
}

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::electrodeless_open: return "open";
        case Scheme::electrodeless_metallized: return "metallized";
        case Scheme::lfe: return "lfe";
        case Scheme::tfe1: return "tfe1";
        case Scheme::tfe2: return "tfe2";
    }
    return "?";
}

bool UnitCellGeometry::has_electrodes() const {
    return scheme == Scheme::lfe || scheme == Scheme::tfe1 || scheme == Scheme::tfe2;
}

bool UnitCellGeometry::has_bottom_electrodes() const {
    return scheme == Scheme::tfe1 || scheme == Scheme::tfe2;
}

void UnitCellGeometry::validate() const {
    if (!(pitch > 0.0)) throw std::invalid_argument("pitch must be > 0");
    if (!(t_plate > 0.0)) throw std::invalid_argument("plate thickness must be > 0");
    if (t_electrode < 0.0) throw std::invalid_argument("electrode thickness must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (n_periods < 1) throw std::invalid_argument("n_periods must be >= 1");
    if (has_electrodes() && t_electrode == 0.0)
        throw std::invalid_argument("electroded scheme needs t_electrode > 0");
    if (!has_electrodes() && t_electrode != 0.0)
        throw std::invalid_argument("electrodeless scheme needs t_electrode = 0");
}

UnitCellGeometry UnitCellGeometry::scaled(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("scale factor must be > 0");
    UnitCellGeometry out = *this;
    out.pitch = pitch * s;
    out.t_plate = t_plate * s;
    out.t_electrode = t_electrode * s;
    return out;
}

std::vector<Terminal> terminal_pattern(const UnitCellGeometry& g) {
    g.validate();
    if (!g.has_electrodes())
        throw std::invalid_argument("terminal_pattern: scheme has no electrodes");
    std::vector<Terminal> top(g.n_periods), bottom;
    for (int p = 0; p < g.n_periods; ++p)
        top[p] = (p % 2 == 0) ? Terminal::drive_plus : Terminal::drive_minus;
    if (g.has_bottom_electrodes()) {
        bottom.resize(g.n_periods);
        for (int p = 0; p < g.n_periods; ++p) {
            if (g.scheme == Scheme::tfe2) {
                bottom[p] = top[p];
            } else {
                bottom[p] = (top[p] == Terminal::drive_plus) ? Terminal::drive_minus
                                                             : Terminal::drive_plus;
            }
        }
    }
    std::vector<Terminal> all = top;
    all.insert(all.end(), bottom.begin(), bottom.end());
    return all;
}

Mesh build_unit_cell(const UnitCellGeometry& g, int nx, int nz) {
    g.validate();
    if (nx < 8) throw std::invalid_argument("nx must be >= 8 per period");
    if (nz < 8) throw std::invalid_argument("nz must be >= 8 through the plate");

    PeriodGrid pg = period_grid(g, nx);
    const int cols = static_cast<int>(pg.frac.size()) - 1;
    const int NX = g.n_periods * cols;

    Mesh m;
    m.cols_per_period = cols;
    m.total_cols = NX;
    m.plate_layers = nz;
    m.regions.push_back({"plate", g.plate_material, false, -1, true});

    // Plate lattice, row-major bottom to top: id = iz*(NX+1) + ix.
    std::vector<double> xs(NX + 1);
    for (int p = 0; p < g.n_periods; ++p)
        for (int j = 0; j < cols; ++j) xs[p * cols + j] = (p + pg.frac[j]) * g.pitch;
    xs[NX] = g.n_periods * g.pitch;

    for (int iz = 0; iz <= nz; ++iz) {
        double zz = (static_cast<double>(iz) / nz) * g.t_plate;
        for (int ix = 0; ix <= NX; ++ix) {
            m.x.push_back(xs[ix]);
            m.z.push_back(zz);
        }
    }
    for (int iz = 0; iz < nz; ++iz)
        for (int ix = 0; ix < NX; ++ix) {
            m.elems.push_back({m.plate_node(ix, iz), m.plate_node(ix + 1, iz),
                               m.plate_node(ix + 1, iz + 1), m.plate_node(ix, iz + 1)});
            m.elem_region.push_back(0);
        }

    for (int ix = 0; ix <= NX; ++ix) {
        m.bottom_surface.push_back(m.plate_node(ix, 0));
        m.top_surface.push_back(m.plate_node(ix, nz));
    }
    for (int iz = 0; iz <= nz; ++iz)
        m.periodic_pairs.emplace_back(m.plate_node(0, iz), m.plate_node(NX, iz));

    if (!g.has_electrodes()) return m;

    const int nz_el =
        std::max(2, static_cast<int>(std::lround(nz * g.t_electrode / g.t_plate)));

    // One finger: nz_el layers stacked on the plate skin over the electrode
    // band of period p. `top` selects the side.
    auto add_finger = [&](int p, bool top) {
        int region = static_cast<int>(m.regions.size());
        std::string name = (top ? "top" : "bot") + std::to_string(p);
        m.regions.push_back({name, g.electrode_material, true, p, top});

        const int c0 = p * cols + pg.n_gap;  // leftmost electrode node column
        std::vector<int> nodes;
        // layer(k=0) is the plate skin; layers 1..nz_el are new nodes.
        std::vector<std::vector<int>> layer(nz_el + 1);
        for (int c = c0; c <= c0 + pg.n_el; ++c) {
            int skin = top ? m.plate_node(c, nz) : m.plate_node(c, 0);
            layer[0].push_back(skin);
            nodes.push_back(skin);
        }
        for (int k = 1; k <= nz_el; ++k) {
            double zz = top ? g.t_plate + (static_cast<double>(k) / nz_el) * g.t_electrode
                            : -(static_cast<double>(k) / nz_el) * g.t_electrode;
            for (int c = c0; c <= c0 + pg.n_el; ++c) {
                layer[k].push_back(static_cast<int>(m.x.size()));
                nodes.push_back(static_cast<int>(m.x.size()));
                m.x.push_back(xs[c]);
                m.z.push_back(zz);
            }
        }
        for (int k = 0; k < nz_el; ++k)
            for (int c = 0; c < pg.n_el; ++c) {
                int lo = top ? k : k + 1;  // ccw needs the lower-z pair first
                int hi = top ? k + 1 : k;
                m.elems.push_back(
                    {layer[lo][c], layer[lo][c + 1], layer[hi][c + 1], layer[hi][c]});
                m.elem_region.push_back(region);
            }
        m.finger_nodes.push_back(std::move(nodes));
    };

    for (int p = 0; p < g.n_periods; ++p) add_finger(p, true);
    if (g.has_bottom_electrodes())
        for (int p = 0; p < g.n_periods; ++p) add_finger(p, false);
    return m;
}

double Mesh::min_corner_jacobian() const {
    double best = std::numeric_limits<double>::max();
    for (const auto& el : elems)
        for (int corner = 0; corner < 4; ++corner) {
            int a = el[corner], b = el[(corner + 1) % 4], c = el[(corner + 3) % 4];
            double j = (x[b] - x[a]) * (z[c] - z[a]) - (x[c] - x[a]) * (z[b] - z[a]);
            best = std::min(best, j);
        }
    return best;
}

void dump_mesh_csv(const Mesh& m, const std::string& nodes_path, const std::string& elems_path) {
    std::ofstream nodes(nodes_path);
    if (!nodes) throw std::runtime_error("cannot write '" + nodes_path + "'");
    nodes << "node,x,z\n";
    for (int i = 0; i < m.node_count(); ++i)
        nodes << i << "," << m.x[i] << "," << m.z[i] << "\n";

    std::ofstream elems(elems_path);
    if (!elems) throw std::runtime_error("cannot write '" + elems_path + "'");
    elems << "element,n0,n1,n2,n3,region\n";
    for (size_t i = 0; i < m.elems.size(); ++i) {
        const auto& el = m.elems[i];
        elems << i << "," << el[0] << "," << el[1] << "," << el[2] << "," << el[3] << ","
              << m.regions[m.elem_region[i]].name << "\n";
    }
}

UnitCellGeometry load_design_file(const std::string& path, const std::string& name) {
    UnitCellGeometry g;
    bool found = false;
    for (const TextBlock& block : parse_blocks_file(path)) {
        if (block.kind != "geometry")
            throw std::invalid_argument(path + ": expected 'geometry' blocks, got '" +
                                        block.kind + "'");
        if (!name.empty() && block.name != name) continue;
        if (found)
            throw std::invalid_argument(path + ": several geometry blocks match; pass a name");
        found = true;

        std::vector<std::string> known = {"pitch_nm",  "t_plate_nm", "t_electrode_nm",
                                          "alpha",     "periods",    "scheme",
                                          "plate_material", "electrode_material"};
        for (const auto& [key, value] : block.entries)
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw std::invalid_argument(path + ":" + std::to_string(value.line) +
                                            ": unknown key '" + key + "'");

        auto num = [&](const char* key, bool required, double fallback) {
            const TextValue* v = block.find(key);
            if (!v) {
                if (required)
                    throw std::invalid_argument(path + ": geometry '" + block.name +
                                                "' missing key '" + key + "'");
                return fallback;
            }
            return v->as_number(key);
        };
        g.pitch = num("pitch_nm", true, 0) * 1e-9;
        g.t_plate = num("t_plate_nm", true, 0) * 1e-9;
        g.t_electrode = num("t_electrode_nm", false, 0) * 1e-9;
        g.alpha = num("alpha", false, 0.5);
        g.n_periods = static_cast<int>(num("periods", false, 2));
        if (const TextValue* v = block.find("scheme")) g.scheme = scheme_from_string(v->scalar);
        if (const TextValue* v = block.find("plate_material")) g.plate_material = v->scalar;
        if (const TextValue* v = block.find("electrode_material"))
            g.electrode_material = v->scalar;
    }
    if (!found)
        throw std::invalid_argument(path + ": no geometry block named '" + name + "'");
    g.validate();
    return g;
}

}  // namespace corkit
