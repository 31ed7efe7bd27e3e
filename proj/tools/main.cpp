// Command-line front end: one subcommand per pipeline stage, SI-suffixed
// flags, CSV/JSON artifacts plus a manifest with content hashes per run.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corkit/fem.hpp"
#include "corkit/filter.hpp"
#include "corkit/geometry.hpp"
#include "corkit/materials.hpp"
#include "corkit/mbvd.hpp"
#include "corkit/modal.hpp"
#include "corkit/studio.hpp"
#include "corkit/units.hpp"

namespace {

using namespace corkit;

constexpr const char* tool_version = "0.1.0";

constexpr int exit_config = 2;
constexpr int exit_solver = 3;
constexpr int exit_spurious = 4;

struct RunConfig {
    std::string materials_path;
    std::string out_dir = ".";
    std::string format = "csv";  // primary table format: csv or json
    int nx = 20;
    int nz = 16;
    int jobs = 1;

    MaterialDb loaded;
    bool use_loaded = false;

    const MaterialDb& db() const { return use_loaded ? loaded : default_material_db(); }

    StudioOptions studio() const {
        StudioOptions o;
        o.nx = nx;
        o.nz = nz;
        o.jobs = jobs;
        o.materials = &db();
        return o;
    }
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--materials", cfg.materials_path, "material database file");
    cmd->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", cfg.format, "primary table format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--nx", cfg.nx, "element columns per period")->capture_default_str();
    cmd->add_option("--nz", cfg.nz, "element layers through the plate")
        ->capture_default_str();
    cmd->add_option("--jobs", cfg.jobs, "worker threads for sweeps")->capture_default_str();
}

void finish_config(RunConfig& cfg) {
    if (!cfg.materials_path.empty()) {
        cfg.loaded = load_material_db(cfg.materials_path);
        cfg.use_loaded = true;
    }
    std::filesystem::create_directories(cfg.out_dir);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Artifacts written by one run; the manifest records each file's hash so a
// rerun can be checked byte for byte.
struct ArtifactSet {
    const RunConfig& cfg;
    std::string command;
    std::vector<std::string> args;
    std::vector<std::pair<std::string, std::string>> entries;  // name, hash

    std::string path_of(const std::string& name) const {
        return (std::filesystem::path(cfg.out_dir) / name).string();
    }

    void write(const std::string& name, const std::string& content) {
        std::string path = path_of(name);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << content;
        if (!out) throw std::runtime_error("write failed for " + path);
        entries.emplace_back(name, hex64(fnv1a64(content)));
    }

    // For writers that stream to a path themselves.
    void record(const std::string& name) {
        std::ifstream in(path_of(name), std::ios::binary);
        if (!in) throw std::runtime_error("cannot read back " + path_of(name));
        std::ostringstream buf;
        buf << in.rdbuf();
        entries.emplace_back(name, hex64(fnv1a64(buf.str())));
    }

    void manifest() {
        nlohmann::ordered_json j;
        j["tool"] = "corkit";
        j["version"] = tool_version;
        j["command"] = command;
        j["args"] = args;
        j["materials"] = cfg.use_loaded ? cfg.materials_path : "<built-in>";
        j["format"] = cfg.format;
        j["nx"] = cfg.nx;
        j["nz"] = cfg.nz;
        j["jobs"] = cfg.jobs;
        j["outputs"] = nlohmann::ordered_json::array();
        for (const auto& [name, hash] : entries)
            j["outputs"].push_back({{"file", name}, {"fnv1a64", hash}});
        std::string path = path_of("manifest.json");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << j.dump(2) << "\n";
    }
};

// Exit status carrying a partial result state (artifacts already written).
struct StatusExit {
    int code;
};

double length_flag(const std::string& text, const char* what) {
    try {
        return parse_length(text);
    } catch (const std::exception& e) {
        throw CLI::ValidationError(std::string(what) + ": " + e.what());
    }
}

std::vector<double> length_list_flag(const std::string& text, const char* what) {
    try {
        return parse_length_list(text);
    } catch (const std::exception& e) {
        throw CLI::ValidationError(std::string(what) + ": " + e.what());
    }
}

double frequency_flag(const std::string& text, const char* what) {
    try {
        return parse_frequency(text);
    } catch (const std::exception& e) {
        throw CLI::ValidationError(std::string(what) + ": " + e.what());
    }
}

// Geometry assembled from flags or loaded from a design file; --design wins.
struct GeometryFlags {
    std::string design_path;
    std::string design_name;
    std::string scheme = "lfe";
    std::string w, t_aln, t_al;
    double alpha = -1.0;
    int periods = 2;

    UnitCellGeometry build() const {
        if (!design_path.empty()) return load_design_file(design_path, design_name);
        UnitCellGeometry g;
        g.scheme = scheme_from_string(scheme);
        if (w.empty() || t_aln.empty())
            throw CLI::ValidationError("geometry needs --w and --t-aln (or --design)");
        g.pitch = length_flag(w, "--w");
        g.t_plate = length_flag(t_aln, "--t-aln");
        g.t_electrode = t_al.empty() ? 0.0 : length_flag(t_al, "--t-al");
        if (alpha > 0.0) g.alpha = alpha;
        g.n_periods = periods;
        g.validate();
        return g;
    }
};

void add_geometry(CLI::App* cmd, GeometryFlags& gf) {
    cmd->add_option("--design", gf.design_path, "geometry design file (see synth-dims)");
    cmd->add_option("--name", gf.design_name, "block name inside the design file");
    cmd->add_option("--scheme", gf.scheme,
                    "excitation scheme: lfe, tfe1, tfe2, electrodeless_open, "
                    "electrodeless_metallized")
        ->capture_default_str();
    cmd->add_option("--w", gf.w, "pitch, length suffix allowed");
    cmd->add_option("--t-aln", gf.t_aln, "plate thickness");
    cmd->add_option("--t-al", gf.t_al, "electrode thickness");
    cmd->add_option("--alpha", gf.alpha, "electrode coverage in (0,1)");
    cmd->add_option("--periods", gf.periods, "unit-cell period count")
        ->capture_default_str();
}

// Thickness-extensional speed estimate used to center modal solves when no
// explicit --f-center is given.
double te_speed(const MaterialTensors& m) {
    double c33 = m.c(2, 2);
    if (!m.is_conductor && m.eps(2, 2) > 0.0) c33 += m.e(2, 2) * m.e(2, 2) / m.eps(2, 2);
    return std::sqrt(c33 / m.density);
}

double default_center(const UnitCellGeometry& g, const MaterialDb& db) {
    double f_te = te_speed(db.get(g.plate_material)) / (2.0 * g.t_plate);
    return 1.753 * f_te * (1.0 - 0.083 * (g.pitch / g.t_plate - 1.0));
}

// ---- dispersion ------------------------------------------------------------

int run_dispersion(const RunConfig& cfg, ArtifactSet& art, const std::string& t_aln,
                   const std::string& w_list, const std::string& plate) {
    ScanOptions sopts;
    sopts.nx = cfg.nx;
    sopts.nz = cfg.nz;
    DispersionTable table = dispersion_scan(length_flag(t_aln, "--t-aln"),
                                            length_list_flag(w_list, "--w"), cfg.db(),
                                            plate, sopts);
    std::ostringstream csv;
    csv.precision(12);
    csv << "w_m,f_open_hz,f_metal_hz,k2,mac_open,mac_metal,flag\n";
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const DispersionRow& r = table.rows[i];
        csv << r.w << ",";
        if (r.spurious) {
            csv << ",,,";
        } else {
            csv << r.f_open << "," << r.f_metal << "," << r.k2 << ",";
        }
        csv << r.mac_open << "," << r.mac_metal << ",";
        csv << (r.spurious ? "SPURIOUS"
                           : (static_cast<int>(i) == table.peak_index ? "PEAK" : "ok"));
        csv << "\n";
    }
    if (cfg.format == "csv") {
        art.write("dispersion.csv", csv.str());
    } else {
        nlohmann::ordered_json j;
        j["rows"] = nlohmann::ordered_json::array();
        for (size_t i = 0; i < table.rows.size(); ++i) {
            const DispersionRow& r = table.rows[i];
            nlohmann::ordered_json row;
            row["w_m"] = r.w;
            if (r.spurious) {
                row["f_open_hz"] = nullptr;
                row["f_metal_hz"] = nullptr;
                row["k2"] = nullptr;
            } else {
                row["f_open_hz"] = r.f_open;
                row["f_metal_hz"] = r.f_metal;
                row["k2"] = r.k2;
            }
            row["mac_open"] = r.mac_open;
            row["mac_metal"] = r.mac_metal;
            row["peak"] = static_cast<int>(i) == table.peak_index;
            row["spurious"] = r.spurious;
            j["rows"].push_back(std::move(row));
        }
        if (table.peak_index >= 0) {
            j["peak"]["w_m"] = table.peak_w;
            j["peak"]["k2"] = table.peak_k2;
        } else {
            j["peak"] = nullptr;
        }
        art.write("dispersion.json", j.dump(2) + "\n");
    }
    if (table.peak_index < 0) {
        std::fprintf(stderr, "dispersion: every width is spurious\n");
        throw StatusExit{exit_spurious};
    }
    std::printf("peak K2 = %s at W = %s m (refined)\n",
                format_double(table.peak_k2).c_str(), format_double(table.peak_w).c_str());
    return 0;
}

// ---- modal -----------------------------------------------------------------

int run_modal(const RunConfig& cfg, ArtifactSet& art, const GeometryFlags& gf,
              const std::string& state_name, const std::string& f_center, int n_modes) {
    UnitCellGeometry g = gf.build();
    ElectricalState state;
    std::string chosen = state_name;
    if (chosen.empty()) chosen = g.has_electrodes() ? "short" : "bare";
    if (chosen == "short")
        state = ElectricalState::short_circuit;
    else if (chosen == "open")
        state = ElectricalState::open_circuit;
    else if (chosen == "bare")
        state = ElectricalState::bare;
    else if (chosen == "metallized")
        state = ElectricalState::metallized_grounded;
    else
        throw CLI::ValidationError("--state must be short, open, bare, or metallized");

    const MaterialDb& db = cfg.db();
    double center = f_center.empty() ? default_center(g, db)
                                     : frequency_flag(f_center, "--f-center");
    Mesh mesh = build_unit_cell(g, cfg.nx, cfg.nz);
    AssembledSystem sys = assemble(mesh, db);
    std::vector<Terminal> pattern;
    if (g.has_electrodes()) pattern = terminal_pattern(g);
    auto modes = eigensolve(sys, state, n_modes, center, pattern);

    AnalyticModeShape shape = analytic_modeshape(g);
    ComMatch best = identify_com(sys.mesh, modes, shape);

    std::ostringstream csv;
    csv.precision(12);
    csv << "mode,f_hz,mac,com\n";
    for (size_t i = 0; i < modes.size(); ++i) {
        std::vector<ModalSolution> one;
        one.push_back(modes[i]);
        ComMatch m = identify_com(sys.mesh, one, shape);
        csv << i << "," << modes[i].frequency << "," << m.mac << ","
            << (static_cast<int>(i) == best.index && !best.spurious ? "COM" : "") << "\n";
    }
    if (cfg.format == "csv") {
        art.write("modal.csv", csv.str());
    } else {
        nlohmann::ordered_json j;
        j["rows"] = nlohmann::ordered_json::array();
        for (size_t i = 0; i < modes.size(); ++i) {
            std::vector<ModalSolution> one;
            one.push_back(modes[i]);
            ComMatch m = identify_com(sys.mesh, one, shape);
            j["rows"].push_back({{"mode", i},
                                 {"f_hz", modes[i].frequency},
                                 {"mac", m.mac},
                                 {"com", static_cast<int>(i) == best.index && !best.spurious}});
        }
        art.write("modal.json", j.dump(2) + "\n");
    }
    if (best.spurious) {
        std::fprintf(stderr, "modal: no combined-overtone match (best mac %s)\n",
                     format_double(best.mac).c_str());
        throw StatusExit{exit_spurious};
    }
    std::printf("COM: f = %s Hz, mac = %s (mode %d of %zu, %s)\n",
                format_double(modes[best.index].frequency).c_str(),
                format_double(best.mac).c_str(), best.index, modes.size(), chosen.c_str());
    return 0;
}

// ---- kt2 -------------------------------------------------------------------

int run_kt2(const RunConfig& cfg, ArtifactSet& art, const GeometryFlags& gf,
            const std::string& t_al_list, const std::string& w_list) {
    UnitCellGeometry base = gf.build();
    std::vector<double> tals =
        t_al_list.empty() ? std::vector<double>{} : length_list_flag(t_al_list, "--t-al");
    std::vector<double> ws =
        w_list.empty() ? std::vector<double>{} : length_list_flag(w_list, "--w");
    if (tals.size() > 1 && ws.size() > 1)
        throw CLI::ValidationError("sweep either --t-al or --w, not both");

    SweepResult result;
    bool litho = ws.size() > 1;
    if (litho) {
        result = litho_tuning_scan(base, ws, cfg.studio());
    } else {
        if (tals.empty()) tals.push_back(base.t_electrode);
        result = sweep_electrode_thickness(base, tals, cfg.studio());
    }
    if (cfg.format == "csv")
        art.write("kt2.csv", sweep_csv(result));
    else
        art.write("kt2.json", sweep_json(result) + "\n");

    if (result.argmax.index < 0) {
        std::fprintf(stderr, "kt2: every sweep point is spurious\n");
        throw StatusExit{exit_spurious};
    }
    if (litho)
        std::printf("tuning range = %s, retained coupling = %s, peak kt2 = %s at %s m\n",
                    format_double(tuning_range(result)).c_str(),
                    format_double(retained_coupling(result)).c_str(),
                    format_double(result.argmax.value).c_str(),
                    format_double(result.argmax.x).c_str());
    else
        std::printf("peak kt2 = %s at t_Al = %s m\n",
                    format_double(result.argmax.value).c_str(),
                    format_double(result.argmax.x).c_str());
    return 0;
}

// ---- qbudget ---------------------------------------------------------------

int run_qbudget(ArtifactSet& art, const std::vector<std::pair<const char*, double>>& set) {
    QBudget b;
    for (const auto& [name, v] : set) {
        std::string key = name;
        if (key == "anchor")
            b.q_anchor = v;
        else if (key == "interface")
            b.q_interface = v;
        else if (key == "material")
            b.q_material = v;
        else if (key == "electrical")
            b.q_electrical = v;
        else if (key == "dielectric")
            b.q_dielectric = v;
        else
            b.q_intrinsic = v;
    }
    double q = q_total(b);
    nlohmann::ordered_json j;
    for (const auto& [name, v] : set) j[std::string("q_") + name] = v;
    j["q_total"] = q;
    art.write("qbudget.json", j.dump(2) + "\n");
    std::printf("%s\n", format_double(q).c_str());
    return 0;
}

// ---- mbvd ------------------------------------------------------------------

int run_mbvd(ArtifactSet& art, const std::string& f, double kt2, double q,
             double c0, double z0, double rs, int points) {
    double f_s = frequency_flag(f, "--f");
    double c0_used = c0 > 0.0 ? c0 : size_for_termination(f_s, z0);
    MbvdModel m = mbvd_from_physics(f_s, kt2, q, c0_used, rs);

    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = f_s * (0.9 + 0.2 * i / (points - 1.0));

    art.write("mbvd.json", model_json(m) + "\n");
    write_touchstone_y(m, grid, art.path_of("mbvd.y1p"));
    art.record("mbvd.y1p");
    std::ostringstream csv;
    csv.precision(12);
    csv << "f_hz,y_re,y_im,y_abs_db\n";
    for (double fg : grid) {
        std::complex<double> y = admittance(m, fg);
        csv << fg << "," << y.real() << "," << y.imag() << ","
            << 20.0 * std::log10(std::abs(y)) << "\n";
    }
    art.write("admittance.csv", csv.str());

    ResonancePair pair = resonance_pair(m);
    std::printf("f_s = %s Hz, f_p = %s Hz, C0 = %s F, loaded Q = %s\n",
                format_double(pair.f_s).c_str(), format_double(pair.f_p).c_str(),
                format_double(c0_used).c_str(), format_double(loaded_q(m)).c_str());
    return 0;
}

// ---- filter / bank ---------------------------------------------------------

double scheme_default_kt2(const std::string& scheme) {
    if (scheme == "tfe2") return 0.019;
    if (scheme == "lfe") return 0.008;
    throw CLI::ValidationError("pass --kt2 for scheme '" + scheme + "'");
}

int run_filter(ArtifactSet& art, const std::string& f, const std::string& scheme,
               double kt2, double q, double z0, int order, int points) {
    double f_center = frequency_flag(f, "--f");
    double kt2_used = kt2 > 0.0 ? kt2 : scheme_default_kt2(scheme);
    FilterNetwork net = synthesize_ladder(f_center, kt2_used, q, z0, order);
    FilterReport rep = evaluate_sparams(net, default_filter_grid(f_center, kt2_used, points));

    art.write("filter.json", report_json(rep) + "\n");
    write_touchstone_s2p(rep, art.path_of("filter.s2p"), z0);
    art.record("filter.s2p");
    write_sparams_csv(rep, art.path_of("sparams.csv"));
    art.record("sparams.csv");

    std::printf("BW = %s Hz, IL = %s dB, rejection = %s dB, band = [%s, %s] Hz\n",
                format_double(rep.bw_3db).c_str(), format_double(rep.il_min).c_str(),
                format_double(rep.rejection).c_str(), format_double(rep.band_lo).c_str(),
                format_double(rep.band_hi).c_str());
    return 0;
}

int run_bank(const RunConfig& cfg, ArtifactSet& art, const std::string& f_start, int n,
             const std::string& scheme, double kt2, double q, double z0) {
    double f0 = frequency_flag(f_start, "--f-start");
    double kt2_used = kt2 > 0.0 ? kt2 : scheme_default_kt2(scheme);
    FilterBank bank = synthesize_bank(f0, n, kt2_used, q, z0);

    std::ostringstream csv;
    csv.precision(12);
    csv << "member,f_center_hz,bw_3db_hz,il_min_db,band_lo_hz,band_hi_hz\n";
    for (size_t i = 0; i < bank.reports.size(); ++i) {
        const FilterReport& r = bank.reports[i];
        csv << i << "," << r.f_center << "," << r.bw_3db << "," << r.il_min << ","
            << r.band_lo << "," << r.band_hi << "\n";
    }
    if (cfg.format == "csv") {
        art.write("bank.csv", csv.str());
        std::ostringstream xcsv;
        xcsv.precision(12);
        xcsv << "boundary,crossover_il_db\n";
        for (size_t i = 0; i < bank.crossover_il_db.size(); ++i)
            xcsv << i << "," << bank.crossover_il_db[i] << "\n";
        art.write("crossovers.csv", xcsv.str());
    } else {
        nlohmann::ordered_json j;
        j["members"] = nlohmann::ordered_json::array();
        for (const FilterReport& r : bank.reports)
            j["members"].push_back(nlohmann::ordered_json::parse(report_json(r)));
        j["aggregated_bw_hz"] = bank.aggregated_bw;
        j["crossover_il_db"] = bank.crossover_il_db;
        art.write("bank.json", j.dump(2) + "\n");
    }
    std::printf("aggregated 3-dB bandwidth = %s Hz over %d members\n",
                format_double(bank.aggregated_bw).c_str(), n);
    return 0;
}

// ---- synth-dims ------------------------------------------------------------

int run_synth_dims(const RunConfig& cfg, ArtifactSet& art, const std::string& f,
                   const std::string& scheme, const std::string& name) {
    DimensionRecipe r = synthesize_dimensions(frequency_flag(f, "--f"),
                                              scheme_from_string(scheme), cfg.studio());
    art.write("recipe.json", recipe_json(r) + "\n");
    write_recipe_design(r, art.path_of("recipe.design"), name);
    art.record("recipe.design");
    std::printf("W = %s m, t_AlN = %s m, t_Al = %s m, achieved f = %s Hz (target %s Hz)\n",
                format_double(r.w).c_str(), format_double(r.t_aln).c_str(),
                format_double(r.t_al).c_str(), format_double(r.achieved_f).c_str(),
                format_double(r.f_target).c_str());
    return 0;
}

// ---- sensitivity -----------------------------------------------------------

int run_sensitivity(const RunConfig& cfg, ArtifactSet& art, const std::string& w,
                    const std::string& t_aln, std::vector<double> deltas) {
    UnitCellGeometry cell;
    cell.pitch = length_flag(w, "--w");
    cell.t_plate = length_flag(t_aln, "--t-aln");
    cell.scheme = Scheme::electrodeless_open;
    cell.n_periods = 2;
    if (deltas.empty()) deltas = {-0.05, -0.02, -0.01, 0.0, 0.01, 0.02, 0.05};
    auto rows = thickness_sensitivity(cell, cell, deltas, cfg.studio());
    if (cfg.format == "csv") {
        art.write("sensitivity.csv", sensitivity_csv(rows));
    } else {
        nlohmann::ordered_json j;
        j["rows"] = nlohmann::ordered_json::array();
        for (const SensitivityRow& r : rows)
            j["rows"].push_back({{"dt_rel", r.dt_rel},
                                 {"df_cor_rel", r.df_cor_rel},
                                 {"df_baw_rel", r.df_baw_rel}});
        j["slope_cor"] = sensitivity_slope(rows, false);
        j["slope_baw"] = sensitivity_slope(rows, true);
        art.write("sensitivity.json", j.dump(2) + "\n");
    }
    std::printf("slope: overtone cell %s, thickness mode %s\n",
                format_double(sensitivity_slope(rows, false)).c_str(),
                format_double(sensitivity_slope(rows, true)).c_str());
    return 0;
}

// ---- cor-vs-baw ------------------------------------------------------------

int run_cor_vs_baw(const RunConfig& cfg, ArtifactSet& art, const std::string& t_list) {
    auto rows = cor_vs_baw(length_list_flag(t_list, "--t"), cfg.studio());
    if (cfg.format == "csv") {
        art.write("cor_vs_baw.csv", cor_baw_csv(rows));
    } else {
        nlohmann::ordered_json j;
        j["rows"] = nlohmann::ordered_json::array();
        for (const CorBawRow& r : rows)
            j["rows"].push_back({{"t_m", r.t},
                                 {"f_cor_hz", r.f_cor},
                                 {"f_baw_hz", r.f_baw},
                                 {"ratio", r.ratio}});
        art.write("cor_vs_baw.json", j.dump(2) + "\n");
    }
    for (const CorBawRow& r : rows)
        std::printf("t = %s m: ratio = %s\n", format_double(r.t).c_str(),
                    format_double(r.ratio).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"combined-overtone resonator design toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    RunConfig cfg;
    std::vector<std::string> args(argv + 1, argv + argc);

    // dispersion
    auto* c_disp = app.add_subcommand("dispersion", "electrode-less K2 versus width");
    std::string d_t, d_w, d_plate = "AlN";
    c_disp->add_option("--t-aln", d_t, "plate thickness")->required();
    c_disp->add_option("--w", d_w, "width list or start:stop:step")->required();
    c_disp->add_option("--plate", d_plate, "plate material name")->capture_default_str();
    add_common(c_disp, cfg);

    // modal
    auto* c_modal = app.add_subcommand("modal", "eigenmodes with mode-match scores");
    GeometryFlags m_geo;
    std::string m_state, m_center;
    int m_nmodes = 12;
    add_geometry(c_modal, m_geo);
    c_modal->add_option("--state", m_state, "short, open, bare, or metallized");
    c_modal->add_option("--f-center", m_center, "solver center frequency");
    c_modal->add_option("--n-modes", m_nmodes, "eigenpairs to report")->capture_default_str();
    add_common(c_modal, cfg);

    // kt2
    auto* c_kt2 = app.add_subcommand("kt2", "coupling extraction: point or sweep");
    GeometryFlags k_geo;
    std::string k_tal_list, k_w_list;
    add_geometry(c_kt2, k_geo);
    c_kt2->add_option("--t-al-sweep", k_tal_list, "electrode thickness list or range");
    c_kt2->add_option("--w-sweep", k_w_list, "pitch list or range (tuning scan)");
    add_common(c_kt2, cfg);

    // qbudget
    auto* c_q = app.add_subcommand("qbudget", "harmonic combination of loss channels");
    double q_anchor = 0, q_interface = 0, q_material = 0, q_electrical = 0,
           q_dielectric = 0, q_intrinsic = 0;
    c_q->add_option("--anchor", q_anchor, "anchor Q");
    c_q->add_option("--interface", q_interface, "interface Q");
    c_q->add_option("--material", q_material, "material Q");
    c_q->add_option("--electrical", q_electrical, "electrical Q");
    c_q->add_option("--dielectric", q_dielectric, "dielectric Q");
    c_q->add_option("--intrinsic", q_intrinsic, "intrinsic Q");
    add_common(c_q, cfg);

    // mbvd
    auto* c_mbvd = app.add_subcommand("mbvd", "equivalent circuit and admittance grid");
    std::string v_f;
    double v_kt2 = 0.02, v_q = 750, v_c0 = 0, v_z0 = 50, v_rs = 0;
    int v_points = 1001;
    c_mbvd->add_option("--f", v_f, "series resonance")->required();
    c_mbvd->add_option("--kt2", v_kt2, "coupling coefficient")->capture_default_str();
    c_mbvd->add_option("--q", v_q, "motional Q")->capture_default_str();
    c_mbvd->add_option("--c0", v_c0, "static capacitance in F (overrides --z0 sizing)");
    c_mbvd->add_option("--z0", v_z0, "termination for C0 sizing")->capture_default_str();
    c_mbvd->add_option("--rs", v_rs, "series resistance")->capture_default_str();
    c_mbvd->add_option("--points", v_points, "admittance grid points")->capture_default_str();
    add_common(c_mbvd, cfg);

    // filter
    auto* c_filt = app.add_subcommand("filter", "ladder synthesis and S-parameters");
    std::string f_f, f_scheme = "tfe2";
    double f_kt2 = 0, f_q = 750, f_z0 = 50;
    int f_order = 3, f_points = 1601;
    c_filt->add_option("--f", f_f, "center frequency")->required();
    c_filt->add_option("--scheme", f_scheme, "sets the default kt2")->capture_default_str();
    c_filt->add_option("--kt2", f_kt2, "coupling coefficient (overrides scheme default)");
    c_filt->add_option("--q", f_q, "resonator Q")->capture_default_str();
    c_filt->add_option("--z0", f_z0, "termination impedance")->capture_default_str();
    c_filt->add_option("--order", f_order, "resonator count")->capture_default_str();
    c_filt->add_option("--points", f_points, "frequency grid points")->capture_default_str();
    add_common(c_filt, cfg);

    // bank
    auto* c_bank = app.add_subcommand("bank", "contiguous filter bank");
    std::string b_f;
    std::string b_scheme = "tfe2";
    double b_kt2 = 0, b_q = 750, b_z0 = 50;
    int b_n = 5;
    c_bank->add_option("--f-start", b_f, "first member center")->required();
    c_bank->add_option("--n", b_n, "member count")->capture_default_str();
    c_bank->add_option("--scheme", b_scheme, "sets the default kt2")->capture_default_str();
    c_bank->add_option("--kt2", b_kt2, "coupling coefficient (overrides scheme default)");
    c_bank->add_option("--q", b_q, "resonator Q")->capture_default_str();
    c_bank->add_option("--z0", b_z0, "termination impedance")->capture_default_str();
    add_common(c_bank, cfg);

    // synth-dims
    auto* c_dims = app.add_subcommand("synth-dims", "dimensions for a target frequency");
    std::string s_f, s_scheme = "lfe", s_name = "recipe";
    c_dims->add_option("--f", s_f, "target frequency")->required();
    c_dims->add_option("--scheme", s_scheme, "lfe or tfe2")->capture_default_str();
    c_dims->add_option("--recipe-name", s_name, "geometry block name in the design file")
        ->capture_default_str();
    add_common(c_dims, cfg);

    // sensitivity
    auto* c_sens = app.add_subcommand("sensitivity", "frequency shift per thickness change");
    std::string x_w, x_t;
    std::vector<double> x_deltas;
    c_sens->add_option("--w", x_w, "pitch of the overtone cell")->required();
    c_sens->add_option("--t-aln", x_t, "plate thickness")->required();
    c_sens->add_option("--deltas", x_deltas, "relative perturbations, e.g. -0.02 0.02");
    add_common(c_sens, cfg);

    // cor-vs-baw
    auto* c_cb = app.add_subcommand("cor-vs-baw", "overtone versus thickness-mode scaling");
    std::string cb_t;
    c_cb->add_option("--t", cb_t, "thickness list or start:stop:step")->required();
    add_common(c_cb, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    CLI::App* cmd = app.get_subcommands().front();
    ArtifactSet art{cfg, cmd->get_name(), args, {}};
    try {
        finish_config(cfg);
        int rc = 0;
        if (cmd == c_disp) {
            rc = run_dispersion(cfg, art, d_t, d_w, d_plate);
        } else if (cmd == c_modal) {
            rc = run_modal(cfg, art, m_geo, m_state, m_center, m_nmodes);
        } else if (cmd == c_kt2) {
            rc = run_kt2(cfg, art, k_geo, k_tal_list, k_w_list);
        } else if (cmd == c_q) {
            std::vector<std::pair<const char*, double>> set;
            if (c_q->count("--anchor")) set.emplace_back("anchor", q_anchor);
            if (c_q->count("--interface")) set.emplace_back("interface", q_interface);
            if (c_q->count("--material")) set.emplace_back("material", q_material);
            if (c_q->count("--electrical")) set.emplace_back("electrical", q_electrical);
            if (c_q->count("--dielectric")) set.emplace_back("dielectric", q_dielectric);
            if (c_q->count("--intrinsic")) set.emplace_back("intrinsic", q_intrinsic);
            rc = run_qbudget(art, set);
        } else if (cmd == c_mbvd) {
            rc = run_mbvd(art, v_f, v_kt2, v_q, v_c0, v_z0, v_rs, v_points);
        } else if (cmd == c_filt) {
            rc = run_filter(art, f_f, f_scheme, f_kt2, f_q, f_z0, f_order, f_points);
        } else if (cmd == c_bank) {
            rc = run_bank(cfg, art, b_f, b_n, b_scheme, b_kt2, b_q, b_z0);
        } else if (cmd == c_dims) {
            rc = run_synth_dims(cfg, art, s_f, s_scheme, s_name);
        } else if (cmd == c_sens) {
            rc = run_sensitivity(cfg, art, x_w, x_t, x_deltas);
        } else if (cmd == c_cb) {
            rc = run_cor_vs_baw(cfg, art, cb_t);
        }
        art.manifest();
        return rc;
    } catch (const StatusExit& s) {
        art.manifest();
        return s.code;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "corkit: %s\n", e.what());
        return exit_config;
    } catch (const spurious_error& e) {
        std::fprintf(stderr, "corkit: %s\n", e.what());
        return exit_spurious;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "corkit: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "corkit: %s\n", e.what());
        return exit_solver;
    }
}
