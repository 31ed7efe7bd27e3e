#include "corkit/studio.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "corkit/fem.hpp"
#include "corkit/modal.hpp"

namespace corkit {

namespace {

constexpr double pi = 3.14159265358979323846;

// Both calibrated base rows sit at 24 GHz.
constexpr double base_design_frequency = 24.0e9;

const MaterialDb& materials_of(const StudioOptions& opts) {
    return opts.materials ? *opts.materials : default_material_db();
}

void check_options(const StudioOptions& opts) {
    if (opts.nx < 4 || opts.nz < 4) throw std::invalid_argument("mesh options too coarse");
    if (opts.n_modes < 4) throw std::invalid_argument("n_modes must be >= 4");
    if (opts.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

// Runs body(0..n-1) on a bounded pool. Each job owns its result slot, so the
// gathered output is index-ordered no matter the worker count; the first
// failing index rethrows after the pool drains.
template <typename Body>
void run_jobs(int n, int jobs, const Body& body) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    for (int i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
}

// Stiffened thickness-extensional estimate v/2t from the plate material; the
// anchor solves are centered on multiples of it.
double te_estimate(double t_plate, const std::string& material, const MaterialDb& db) {
    const MaterialTensors& m = db.get(material);
    double c33 = m.c(2, 2);
    if (!m.is_conductor && m.eps(2, 2) > 0.0) c33 += m.e(2, 2) * m.e(2, 2) / m.eps(2, 2);
    return std::sqrt(c33 / m.density) / (2.0 * t_plate);
}

// Combined-overtone frequency sits near 1.75x the thickness estimate at
// W = t and drifts weakly with width; good to a few percent as a solver
// center across W/t in [0.7, 1.5].
double com_estimate(double pitch, double t_plate, const std::string& material,
                    const MaterialDb& db) {
    double f_te = te_estimate(t_plate, material, db);
    return 1.753 * f_te * (1.0 - 0.083 * (pitch / t_plate - 1.0));
}

struct BareAnchor {
    double f = 0.0;
    double mac = 0.0;
};

// Metallized-surface frequency of the electrode-less cell with the same
// plate; the sweep windows hang off it.
BareAnchor bare_anchor(const UnitCellGeometry& base, const MaterialDb& db,
                       const StudioOptions& opts) {
    UnitCellGeometry g = base;
    g.scheme = Scheme::electrodeless_metallized;
    g.t_electrode = 0.0;
    Mesh mesh = build_unit_cell(g, opts.nx, opts.nz);
    AssembledSystem sys = assemble(mesh, db);
    double center = com_estimate(g.pitch, g.t_plate, g.plate_material, db);
    auto modes = eigensolve(sys, ElectricalState::metallized_grounded, opts.n_modes, center);
    ComMatch m = identify_com(sys.mesh, modes, analytic_modeshape(g));
    if (m.spurious)
        throw spurious_error("anchor cell has no combined-overtone match near " +
                                 std::to_string(center) + " Hz");
    return {modes[m.index].frequency, m.mac};
}

// Electrode mass per plate mass; scales the expected loading shift of the
// short-circuit resonance below the metallized anchor.
double mass_loading(const UnitCellGeometry& g, const MaterialDb& db) {
    double faces = g.has_bottom_electrodes() ? 2.0 : 1.0;
    double rho_el = db.get(g.electrode_material).density;
    double rho_plate = db.get(g.plate_material).density;
    return rho_el * g.t_electrode * g.alpha * faces / (rho_plate * g.t_plate);
}

SweepRow coupling_row(double x, const UnitCellGeometry& g, double f_anchor,
                      const MaterialDb& db, const StudioOptions& opts) {
    Mesh mesh = build_unit_cell(g, opts.nx, opts.nz);
    AssembledSystem sys = assemble(mesh, db);
    double f_est = f_anchor * (1.0 - 0.55 * mass_loading(g, db));
    double f_lo = 0.88 * f_est;
    double f_hi = std::min(1.10 * f_est, 1.04 * f_anchor);
    CouplingReport rep =
        extract_kt2(sys, terminal_pattern(g), g, f_lo, f_hi, opts.n_modes);
    SweepRow row;
    row.x = x;
    row.mac = rep.mac;
    row.spurious = rep.spurious;
    if (!rep.spurious) {
        row.f_r = rep.f_low;
        row.kt2 = rep.kt2;
    }
    return row;
}

// Parabola through the three highest non-spurious rows; the raw best stands
// in when fewer than three rows survive, the fit is not concave, or the
// vertex leaves the fitted span.
SweepArgmax refine_argmax(const std::vector<SweepRow>& rows) {
    SweepArgmax best;
    std::vector<int> usable;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].spurious) continue;
        usable.push_back(static_cast<int>(i));
        if (best.index < 0 || *rows[i].kt2 > best.value) {
            best.index = static_cast<int>(i);
            best.x = rows[i].x;
            best.value = *rows[i].kt2;
        }
    }
    if (best.index < 0 || usable.size() < 3) return best;

    std::sort(usable.begin(), usable.end(),
              [&](int a, int b) { return *rows[a].kt2 > *rows[b].kt2; });
    std::array<int, 3> top = {usable[0], usable[1], usable[2]};
    std::sort(top.begin(), top.end(), [&](int a, int b) { return rows[a].x < rows[b].x; });
    double x1 = rows[top[0]].x, y1 = *rows[top[0]].kt2;
    double x2 = rows[top[1]].x, y2 = *rows[top[1]].kt2;
    double x3 = rows[top[2]].x, y3 = *rows[top[2]].kt2;
    double denom = (x1 - x2) * (x1 - x3) * (x2 - x3);
    if (denom == 0.0) return best;
    double a = (x3 * (y2 - y1) + x2 * (y1 - y3) + x1 * (y3 - y2)) / denom;
    double b = (x3 * x3 * (y1 - y2) + x2 * x2 * (y3 - y1) + x1 * x1 * (y2 - y3)) / denom;
    if (!(a < 0.0)) return best;
    double xv = -b / (2.0 * a);
    if (xv < x1 || xv > x3) return best;
    double c = y1 - a * x1 * x1 - b * x1;
    best.x = xv;
    best.value = a * xv * xv + b * xv + c;
    return best;
}

struct TeMatch {
    double f = 0.0;
    double mac = 0.0;
};

// Picks the eigenmode closest in shape to the fundamental free-plate
// thickness-extensional field: u_z ~ cos(pi z / t), u_x = 0, uniform in x.
TeMatch identify_te(const Mesh& mesh, const std::vector<ModalSolution>& modes,
                    double t_plate) {
    int n = mesh.node_count();
    Eigen::VectorXd shape = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) shape[2 * i + 1] = std::cos(pi * mesh.z[i] / t_plate);
    double ss = shape.squaredNorm();
    TeMatch best;
    for (const ModalSolution& m : modes) {
        double num = shape.dot(m.u);
        double mac = num * num / (ss * m.u.squaredNorm());
        if (mac > best.mac) {
            best.mac = mac;
            best.f = m.frequency;
        }
    }
    if (best.mac < spurious_mac_threshold)
        throw spurious_error("no thickness-extensional mode in the solved window");
    return best;
}

// Bare-cell frequencies used by the scaling comparison and the sensitivity
// table: open-surface combined overtone and fundamental thickness mode.
double bare_com_frequency(const UnitCellGeometry& g, const MaterialDb& db,
                          const StudioOptions& opts) {
    Mesh mesh = build_unit_cell(g, opts.nx, opts.nz);
    AssembledSystem sys = assemble(mesh, db);
    double center = com_estimate(g.pitch, g.t_plate, g.plate_material, db);
    auto modes = eigensolve(sys, ElectricalState::bare, opts.n_modes, center);
    ComMatch m = identify_com(sys.mesh, modes, analytic_modeshape(g));
    if (m.spurious)
        throw spurious_error("no combined-overtone match at t = " +
                                 std::to_string(g.t_plate));
    return modes[m.index].frequency;
}

double bare_te_frequency(const UnitCellGeometry& g, const MaterialDb& db,
                         const StudioOptions& opts) {
    Mesh mesh = build_unit_cell(g, opts.nx, opts.nz);
    AssembledSystem sys = assemble(mesh, db);
    double center = te_estimate(g.t_plate, g.plate_material, db);
    auto modes = eigensolve(sys, ElectricalState::bare, opts.n_modes, center);
    return identify_te(sys.mesh, modes, g.t_plate).f;
}

UnitCellGeometry bare_cell(double pitch, double t_plate) {
    UnitCellGeometry g;
    g.pitch = pitch;
    g.t_plate = t_plate;
    g.t_electrode = 0.0;
    g.scheme = Scheme::electrodeless_open;
    g.n_periods = 2;
    return g;
}

}  // namespace

SweepResult sweep_electrode_thickness(const UnitCellGeometry& base,
                                      const std::vector<double>& t_al_list,
                                      const StudioOptions& opts) {
    check_options(opts);
    base.validate();
    if (!base.has_electrodes())
        throw std::invalid_argument("electrode sweep needs an electroded scheme");
    if (t_al_list.empty()) throw std::invalid_argument("empty thickness list");
    for (double t : t_al_list)
        if (!(t > 0.0)) throw std::invalid_argument("electrode thickness must be > 0");

    const MaterialDb& db = materials_of(opts);
    // One anchor serves the whole sweep: the plate does not change.
    BareAnchor anchor = bare_anchor(base, db, opts);

    SweepResult result;
    result.axis = "t_electrode_m";
    result.rows.resize(t_al_list.size());
    run_jobs(static_cast<int>(t_al_list.size()), opts.jobs, [&](int i) {
        UnitCellGeometry g = base;
        g.t_electrode = t_al_list[i];
        result.rows[i] = coupling_row(t_al_list[i], g, anchor.f, db, opts);
    });
    result.argmax = refine_argmax(result.rows);
    return result;
}

SweepResult litho_tuning_scan(const UnitCellGeometry& base, const std::vector<double>& w_list,
                              const StudioOptions& opts) {
    check_options(opts);
    base.validate();
    if (!base.has_electrodes())
        throw std::invalid_argument("tuning scan needs an electroded scheme");
    if (w_list.empty()) throw std::invalid_argument("empty width list");
    for (double w : w_list)
        if (!(w > 0.0)) throw std::invalid_argument("pitch must be > 0");

    const MaterialDb& db = materials_of(opts);
    SweepResult result;
    result.axis = "pitch_m";
    result.rows.resize(w_list.size());
    run_jobs(static_cast<int>(w_list.size()), opts.jobs, [&](int i) {
        UnitCellGeometry g = base;
        g.pitch = w_list[i];
        // Each width gets its own anchor; a failed anchor marks the row the
        // same way a failed electroded match does.
        try {
            BareAnchor anchor = bare_anchor(g, db, opts);
            result.rows[i] = coupling_row(w_list[i], g, anchor.f, db, opts);
        } catch (const spurious_error&) {
            result.rows[i].x = w_list[i];
            result.rows[i].spurious = true;
        }
    });
    result.argmax = refine_argmax(result.rows);
    return result;
}

double tuning_range(const SweepResult& result) {
    double lo = 0.0, hi = 0.0;
    int found = 0;
    for (const SweepRow& r : result.rows) {
        if (r.spurious) continue;
        if (found == 0) {
            lo = hi = r.f_r;
        } else {
            lo = std::min(lo, r.f_r);
            hi = std::max(hi, r.f_r);
        }
        ++found;
    }
    if (found < 2 || hi + lo == 0.0) return 0.0;
    return (hi - lo) / (0.5 * (hi + lo));
}

double retained_coupling(const SweepResult& result) {
    double lo = 0.0, hi = 0.0;
    int found = 0;
    for (const SweepRow& r : result.rows) {
        if (r.spurious) continue;
        if (found == 0) {
            lo = hi = *r.kt2;
        } else {
            lo = std::min(lo, *r.kt2);
            hi = std::max(hi, *r.kt2);
        }
        ++found;
    }
    if (found < 2) return 1.0;
    return hi > 0.0 ? lo / hi : 1.0;
}

UnitCellGeometry base_design(Scheme scheme) {
    UnitCellGeometry g;
    g.n_periods = 2;
    g.scheme = scheme;
    if (scheme == Scheme::lfe) {
        g.pitch = 431e-9;
        g.t_plate = 375e-9;
        g.t_electrode = 45e-9;
        g.alpha = 0.35;
    } else if (scheme == Scheme::tfe2) {
        g.pitch = 422e-9;
        g.t_plate = 383e-9;
        g.t_electrode = 42e-9;
        g.alpha = 0.50;
    } else {
        throw std::invalid_argument("no calibrated base design for scheme '" +
                                    std::string(to_string(scheme)) + "'");
    }
    return g;
}

DimensionRecipe synthesize_dimensions(double f_target, Scheme scheme,
                                      const StudioOptions& opts) {
    check_options(opts);
    if (!(f_target >= 6.0e9 && f_target <= 60.0e9))
        throw std::invalid_argument("target frequency outside the 6-60 GHz validity window");

    UnitCellGeometry g = base_design(scheme).scaled(base_design_frequency / f_target);

    const MaterialDb& db = materials_of(opts);
    Mesh mesh = build_unit_cell(g, opts.nx, opts.nz);
    AssembledSystem sys = assemble(mesh, db);
    auto modes =
        eigensolve(sys, ElectricalState::short_circuit, opts.n_modes, f_target,
                   terminal_pattern(g));
    ComMatch m = identify_com(sys.mesh, modes, analytic_modeshape(g));
    if (m.spurious)
        throw spurious_error("verification solve found no combined-overtone mode");

    DimensionRecipe r;
    r.f_target = f_target;
    r.w = g.pitch;
    r.t_aln = g.t_plate;
    r.t_al = g.t_electrode;
    r.scheme = scheme;
    r.achieved_f = modes[m.index].frequency;
    return r;
}

std::vector<CorBawRow> cor_vs_baw(const std::vector<double>& t_list,
                                  const StudioOptions& opts) {
    check_options(opts);
    if (t_list.empty()) throw std::invalid_argument("empty thickness list");
    for (double t : t_list)
        if (!(t > 0.0)) throw std::invalid_argument("thickness must be > 0");

    const MaterialDb& db = materials_of(opts);
    std::vector<CorBawRow> rows(t_list.size());
    run_jobs(static_cast<int>(t_list.size()), opts.jobs, [&](int i) {
        double t = t_list[i];
        CorBawRow& row = rows[i];
        row.t = t;
        row.f_cor = bare_com_frequency(bare_cell(t, t), db, opts);
        row.f_baw = bare_te_frequency(bare_cell(t, t), db, opts);
        row.ratio = row.f_cor / row.f_baw;
    });
    return rows;
}

std::vector<SensitivityRow> thickness_sensitivity(const UnitCellGeometry& cor_cell,
                                                  const UnitCellGeometry& baw_cell,
                                                  const std::vector<double>& dt_rel_list,
                                                  const StudioOptions& opts) {
    check_options(opts);
    cor_cell.validate();
    baw_cell.validate();
    if (cor_cell.has_electrodes() || baw_cell.has_electrodes())
        throw std::invalid_argument("sensitivity comparison is electrode-less");
    if (dt_rel_list.empty()) throw std::invalid_argument("empty perturbation list");
    for (double d : dt_rel_list)
        if (!(std::abs(d) <= 0.10)) throw std::invalid_argument("perturbation beyond 10%");

    const MaterialDb& db = materials_of(opts);
    double f_cor0 = bare_com_frequency(cor_cell, db, opts);
    double f_baw0 = bare_te_frequency(baw_cell, db, opts);

    std::vector<SensitivityRow> rows(dt_rel_list.size());
    run_jobs(static_cast<int>(dt_rel_list.size()), opts.jobs, [&](int i) {
        double d = dt_rel_list[i];
        SensitivityRow& row = rows[i];
        row.dt_rel = d;
        if (d == 0.0) return;
        UnitCellGeometry cg = cor_cell;
        cg.t_plate = cor_cell.t_plate * (1.0 + d);
        UnitCellGeometry bg = baw_cell;
        bg.t_plate = baw_cell.t_plate * (1.0 + d);
        row.df_cor_rel = bare_com_frequency(cg, db, opts) / f_cor0 - 1.0;
        row.df_baw_rel = bare_te_frequency(bg, db, opts) / f_baw0 - 1.0;
    });
    return rows;
}

double sensitivity_slope(const std::vector<SensitivityRow>& rows, bool for_baw) {
    double num = 0.0, den = 0.0;
    for (const SensitivityRow& r : rows) {
        if (r.dt_rel == 0.0) continue;
        num += r.dt_rel * (for_baw ? r.df_baw_rel : r.df_cor_rel);
        den += r.dt_rel * r.dt_rel;
    }
    if (den == 0.0) throw std::invalid_argument("no nonzero perturbations");
    return num / den;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out.precision(12);
    out << result.axis << ",f_r_hz,kt2,mac,flag\n";
    for (const SweepRow& r : result.rows) {
        out << r.x << ",";
        if (r.spurious) {
            out << ",,";
        } else {
            out << r.f_r << "," << *r.kt2 << ",";
        }
        out << r.mac << "," << (r.spurious ? "SPURIOUS" : "ok") << "\n";
    }
    return out.str();
}

std::string sweep_json(const SweepResult& result) {
    nlohmann::ordered_json j;
    j["axis"] = result.axis;
    j["rows"] = nlohmann::ordered_json::array();
    for (const SweepRow& r : result.rows) {
        nlohmann::ordered_json row;
        row["x"] = r.x;
        if (r.spurious) {
            row["f_r_hz"] = nullptr;
            row["kt2"] = nullptr;
        } else {
            row["f_r_hz"] = r.f_r;
            row["kt2"] = *r.kt2;
        }
        row["mac"] = r.mac;
        row["spurious"] = r.spurious;
        j["rows"].push_back(std::move(row));
    }
    if (result.argmax.index >= 0) {
        j["argmax"]["x"] = result.argmax.x;
        j["argmax"]["value"] = result.argmax.value;
        j["argmax"]["index"] = result.argmax.index;
    } else {
        j["argmax"] = nullptr;
    }
    return j.dump(2);
}

std::string cor_baw_csv(const std::vector<CorBawRow>& rows) {
    std::ostringstream out;
    out.precision(12);
    out << "t_m,f_cor_hz,f_baw_hz,ratio\n";
    for (const CorBawRow& r : rows)
        out << r.t << "," << r.f_cor << "," << r.f_baw << "," << r.ratio << "\n";
    return out.str();
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
    std::ostringstream out;
    out.precision(12);
    out << "dt_rel,df_cor_rel,df_baw_rel\n";
    for (const SensitivityRow& r : rows)
        out << r.dt_rel << "," << r.df_cor_rel << "," << r.df_baw_rel << "\n";
    return out.str();
}

std::string recipe_json(const DimensionRecipe& r) {
    nlohmann::ordered_json j;
    j["f_target_hz"] = r.f_target;
    j["scheme"] = std::string(to_string(r.scheme));
    j["w_m"] = r.w;
    j["t_aln_m"] = r.t_aln;
    j["t_al_m"] = r.t_al;
    j["achieved_f_hz"] = r.achieved_f;
    return j.dump(2);
}

void write_recipe_design(const DimensionRecipe& r, const std::string& path,
                         const std::string& name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(12);
    out << "# dimension recipe: f_target = " << r.f_target
        << " Hz, verification solve achieved " << r.achieved_f << " Hz\n";
    out << "geometry " << name << " {\n";
    out << "    pitch_nm = " << r.w * 1e9 << "\n";
    out << "    t_plate_nm = " << r.t_aln * 1e9 << "\n";
    out << "    t_electrode_nm = " << r.t_al * 1e9 << "\n";
    out << "    alpha = " << base_design(r.scheme).alpha << "\n";
    out << "    periods = 2\n";
    out << "    scheme = " << to_string(r.scheme) << "\n";
    out << "}\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace corkit
