#include <corkit/modal.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace corkit {

namespace {

constexpr double pi = std::numbers::pi;

int plate_node_count(const Mesh& mesh) {
    return (mesh.total_cols + 1) * (mesh.plate_layers + 1);
}

// Lateral quadratures of the shape on the plate nodes. Shifting the shape
// laterally by s turns the ux part into cos(b(x-s)) and the uz part into
// sin(b(x-s)) with the SAME s; mirroring lands back in the same family (the
// ux component sign flips with the x axis), so the relative sign of the two
// components is a branch invariant and is NOT searched over.
struct ComBasis {
    Eigen::MatrixXd b;  // 2*np x 4: ux*(cos, sin), uz*(sin, cos)
    Eigen::Matrix4d gram;
    double xbar = 1.0, zbar = 1.0;
};

ComBasis com_basis(const Mesh& mesh, const AnalyticModeShape& shape) {
    const int np = plate_node_count(mesh);
    ComBasis cb;
    cb.xbar = shape.xbar;
    cb.zbar = shape.zbar;
    cb.b = Eigen::MatrixXd::Zero(2 * np, 4);
    for (int n = 0; n < np; ++n) {
        double x = mesh.x[n];
        double zz = mesh.z[n] - shape.z0;
        double czx = std::cos(shape.beta_zx * zz);
        double czz = std::cos(shape.beta_zz * zz);
        cb.b(2 * n, 0) = std::cos(shape.beta_x * x) * czx;
        cb.b(2 * n, 1) = std::sin(shape.beta_x * x) * czx;
        cb.b(2 * n + 1, 2) = std::sin(shape.beta_x * x) * czz;
        cb.b(2 * n + 1, 3) = std::cos(shape.beta_x * x) * czz;
    }
    cb.gram = cb.b.transpose() * cb.b;
    return cb;
}

// Normalized squared inner product of the plate displacement against the
// analytic field m(t) = xbar*(c*B0 + s*B1) + zbar*(c*B2 - s*B3), maximized
// over the lateral offset t. Keeping the amplitude ratio and the relative
// component sign fixed rejects both single-family branches and the
// opposite-sign hybrid branch.
double mac_score(const ComBasis& cb, const Mesh& mesh, const Eigen::VectorXd& u) {
    const int np = plate_node_count(mesh);
    Eigen::VectorXd up(2 * np);
    for (int n = 0; n < np; ++n) {
        up[2 * n] = u[2 * n];
        up[2 * n + 1] = u[2 * n + 1];
    }
    double norm2 = up.squaredNorm();
    if (!(norm2 > 0.0)) return 0.0;
    Eigen::Vector4d p = cb.b.transpose() * up;
    const double xb = cb.xbar, zb = cb.zbar;
    double best = 0.0;
    const int n_phase = 720;
    for (int k = 0; k < n_phase; ++k) {
        double t = pi * k / n_phase;  // the family has period pi in phase
        double c = std::cos(t), s = std::sin(t);
        double den_x = c * c * cb.gram(0, 0) + 2 * c * s * cb.gram(0, 1) + s * s * cb.gram(1, 1);
        double den_z = c * c * cb.gram(2, 2) - 2 * c * s * cb.gram(2, 3) + s * s * cb.gram(3, 3);
        double den = xb * xb * den_x + zb * zb * den_z;
        if (!(den > 0.0)) continue;
        double num = xb * (c * p[0] + s * p[1]) + zb * (c * p[2] - s * p[3]);
        best = std::max(best, num * num / den);
    }
    return best / norm2;
}

struct ComSolve {
    ModalSolution mode;
    double mac = 0.0;
    bool spurious = true;
};

// Identifies the COM among modes near one of the candidate centers; stops at
// the first center giving a confident match.
std::optional<ComSolve> find_com(const AssembledSystem& sys, ElectricalState state,
                                 const AnalyticModeShape& shape,
                                 const std::vector<double>& centers, int n_modes,
                                 const std::vector<Terminal>& pattern = {}) {
    ComBasis basis = com_basis(sys.mesh, shape);
    std::optional<ComSolve> best;
    for (double fc : centers) {
        auto modes = eigensolve(sys, state, n_modes, fc, pattern);
        for (auto& md : modes) {
            double mac = mac_score(basis, sys.mesh, md.u);
            if (!best || mac > best->mac)
                best = ComSolve{std::move(md), mac, mac < spurious_mac_threshold};
        }
        if (best && best->mac >= 0.8) break;
    }
    return best;
}

std::vector<double> bootstrap_centers(double t_plate) {
    // Frequency-thickness products bracketing the overtone family.
    std::vector<double> fc;
    for (double ghz_um : {8.0, 9.5, 11.0, 12.5, 6.5, 14.0, 5.0, 16.0})
        fc.push_back(ghz_um * 1e9 * 1e-6 / t_plate);
    return fc;
}

}  // namespace

std::array<double, 2> AnalyticModeShape::operator()(double x, double z) const {
    double zz = z - z0;
    double ux = -xbar * std::cos(beta_x * x) * std::cos(beta_zx * zz);
    double uz = -zbar * std::sin(beta_x * x) * std::cos(beta_zz * zz);
    return {ux, uz};
}

AnalyticModeShape analytic_modeshape(const UnitCellGeometry& g, double xbar, double zbar) {
    if (!(g.pitch > 0.0) || !(g.t_plate > 0.0))
        throw std::invalid_argument("modeshape needs positive width and thickness");
    AnalyticModeShape s;
    s.xbar = xbar;
    s.zbar = zbar;
    s.beta_x = pi / g.pitch;
    s.beta_zx = 3.0 * pi / g.t_plate;
    s.beta_zz = 2.0 * pi / g.t_plate;
    s.z0 = 0.0;
    return s;
}

ComMatch identify_com(const Mesh& mesh, const std::vector<ModalSolution>& modes,
                      const AnalyticModeShape& shape) {
    ComMatch out;
    if (modes.empty()) return out;
    ComBasis basis = com_basis(mesh, shape);
    for (size_t i = 0; i < modes.size(); ++i) {
        double mac = mac_score(basis, mesh, modes[i].u);
        if (mac > out.mac || out.index < 0) {
            out.index = static_cast<int>(i);
            out.mac = mac;
        }
    }
    out.spurious = out.mac < spurious_mac_threshold;
    return out;
}

double coupling_from_pair(double f_low, double f_high) {
    if (!(f_low > 0.0)) throw std::invalid_argument("lower frequency must be > 0");
    return (pi * pi / 8.0) * (f_high * f_high - f_low * f_low) / (f_low * f_low);
}

DispersionTable dispersion_scan(double t_plate, const std::vector<double>& w_list,
                                const MaterialDb& db, const std::string& plate_material,
                                const ScanOptions& opts) {
    if (w_list.empty()) throw std::invalid_argument("width list must be nonempty");
    if (!std::is_sorted(w_list.begin(), w_list.end()))
        throw std::invalid_argument("width list must be ascending");

    DispersionTable table;
    double f_prev = 0.0;
    for (double w : w_list) {
        UnitCellGeometry g;
        g.pitch = w;
        g.t_plate = t_plate;
        g.t_electrode = 0.0;
        g.n_periods = opts.n_periods;
        g.scheme = Scheme::electrodeless_open;
        g.plate_material = plate_material;
        AssembledSystem sys = assemble(build_unit_cell(g, opts.nx, opts.nz), db);
        AnalyticModeShape shape = analytic_modeshape(g);

        std::vector<double> centers;
        if (f_prev > 0.0) {
            // The COM moves a few percent per width step; chain from the
            // previous row before falling back to the broad sweep.
            for (double r : {1.0, 0.95, 1.05, 0.9, 1.1}) centers.push_back(f_prev * r);
        }
        for (double fc : bootstrap_centers(t_plate)) centers.push_back(fc);

        auto open = find_com(sys, ElectricalState::bare, shape, centers, opts.n_modes);

        DispersionRow row;
        row.w = w;
        if (open) {
            row.f_open = open->mode.frequency;
            row.mac_open = open->mac;
        }
        if (open && !open->spurious) {
            std::vector<double> mc = {row.f_open * 0.995, row.f_open * 0.98, row.f_open};
            for (double fc : bootstrap_centers(t_plate)) mc.push_back(fc);
            auto metal =
                find_com(sys, ElectricalState::metallized_grounded, shape, mc, opts.n_modes);
            if (metal) {
                row.f_metal = metal->mode.frequency;
                row.mac_metal = metal->mac;
            }
            row.spurious = !metal || metal->spurious;
        } else {
            row.spurious = true;
        }
        if (!row.spurious) {
            row.k2 = coupling_from_pair(row.f_metal, row.f_open);
            f_prev = row.f_open;
        }
        table.rows.push_back(row);
    }

    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.spurious) continue;
        if (table.peak_index < 0 || r.k2 > table.rows[table.peak_index].k2)
            table.peak_index = static_cast<int>(i);
    }
    if (table.peak_index >= 0) {
        size_t i = static_cast<size_t>(table.peak_index);
        table.peak_w = table.rows[i].w;
        table.peak_k2 = table.rows[i].k2;
        if (i > 0 && i + 1 < table.rows.size() && !table.rows[i - 1].spurious &&
            !table.rows[i + 1].spurious) {
            // Parabolic refinement through the best row and its neighbors.
            double x0 = table.rows[i - 1].w, x1 = table.rows[i].w, x2 = table.rows[i + 1].w;
            double y0 = table.rows[i - 1].k2, y1 = table.rows[i].k2, y2 = table.rows[i + 1].k2;
            double d0 = (y1 - y0) / (x1 - x0), d1 = (y2 - y1) / (x2 - x1);
            double curv = (d1 - d0) / (x2 - x0);
            if (curv < 0.0) {
                double xv = 0.5 * (x0 + x1 - d0 / curv);
                if (xv > x0 && xv < x2) {
                    table.peak_w = xv;
                    table.peak_k2 = y1 + curv * (xv - x1) * (xv - x1) +
                                    (d0 + curv * (x1 - x0)) * (xv - x1);
                }
            }
        }
    }
    return table;
}

CouplingReport extract_kt2(const AssembledSystem& sys, const std::vector<Terminal>& pattern,
                           const UnitCellGeometry& g, double f_lo, double f_hi, int n_modes) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) throw std::invalid_argument("bad frequency window");
    if (pattern.size() != sys.finger_phi.size())
        throw std::invalid_argument("terminal pattern does not match the finger count");

    AnalyticModeShape shape = analytic_modeshape(g);
    ComBasis basis = com_basis(sys.mesh, shape);

    CouplingReport report;
    report.scheme = g.scheme;

    auto shorts = eigensolve(sys, ElectricalState::short_circuit, n_modes,
                             0.5 * (f_lo + f_hi), pattern);
    int is_best = -1;
    for (size_t i = 0; i < shorts.size(); ++i) {
        if (shorts[i].frequency < f_lo || shorts[i].frequency > f_hi) continue;
        double mac = mac_score(basis, sys.mesh, shorts[i].u);
        if (mac > report.mac) {
            report.mac = mac;
            is_best = static_cast<int>(i);
        }
    }
    if (is_best < 0 || report.mac < spurious_mac_threshold) {
        report.spurious = true;
        return report;
    }
    double fs = shorts[is_best].frequency;

    // The open-circuit partner sits above fs by at most the spacing a few
    // percent of coupling can produce; twice that bound limits the pairing.
    double pair_hi = fs * (1.0 + 2.0 * (std::sqrt(1.0 + 8.0 * 0.05 / (pi * pi)) - 1.0));
    auto opens = eigensolve(sys, ElectricalState::open_circuit, n_modes, fs, pattern);
    int ip_best = -1;
    double mac_open = 0.0;
    for (size_t i = 0; i < opens.size(); ++i) {
        if (opens[i].frequency < fs * (1.0 - 1e-9) || opens[i].frequency > pair_hi) continue;
        double mac = mac_score(basis, sys.mesh, opens[i].u);
        if (mac > mac_open) {
            mac_open = mac;
            ip_best = static_cast<int>(i);
        }
    }
    // A short-circuit match without an open-circuit partner is the same
    // unusable point as no match at all: flag it, keep the resonance.
    if (ip_best < 0 || mac_open < spurious_mac_threshold) {
        report.spurious = true;
        report.f_low = fs;
        return report;
    }

    report.f_low = fs;
    report.f_high = opens[ip_best].frequency;
    report.kt2 = coupling_from_pair(report.f_low, report.f_high);
    report.mac = std::min(report.mac, mac_open);
    return report;
}

CouplingReport energy_integral_kt2(const AssembledSystem& sys,
                                   const std::vector<GaussPointField>& modal_fields,
                                   const std::vector<GaussPointField>& drive_fields) {
    if (modal_fields.size() != drive_fields.size())
        throw std::invalid_argument("field sets sampled on different meshes");

    // Stress-based material forms restricted to the in-plane components.
    struct RegionForms {
        bool skip = true;
        Eigen::Matrix3d s;       // inverse of the active stiffness block
        Eigen::Matrix<double, 2, 3> d;  // strain coefficient e * s
        Eigen::Matrix2d eps_t;   // free permittivity
    };
    const int ac[3] = {0, 2, 4};  // xx, zz, xz
    const int ae[2] = {0, 2};     // x, z
    std::vector<RegionForms> forms(sys.region_materials.size());
    for (size_t r = 0; r < sys.region_materials.size(); ++r) {
        const MaterialTensors& mat = sys.region_materials[r];
        if (mat.is_conductor) continue;
        Eigen::Matrix3d c_aa;
        Eigen::Matrix<double, 2, 3> e_a;
        Eigen::Matrix2d eps_aa;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c_aa(i, j) = mat.c(ac[i], ac[j]);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) e_a(i, j) = mat.e(ae[i], ac[j]);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) eps_aa(i, j) = mat.eps(ae[i], ae[j]);
        RegionForms& f = forms[r];
        f.skip = false;
        f.s = c_aa.inverse();
        f.d = e_a * f.s;
        f.eps_t = eps_aa + f.d * e_a.transpose();
    }

    CouplingReport report;
    for (size_t i = 0; i < modal_fields.size(); ++i) {
        const GaussPointField& mf = modal_fields[i];
        const GaussPointField& df = drive_fields[i];
        if (mf.region != df.region)
            throw std::invalid_argument("field sets sampled on different meshes");
        const RegionForms& f = forms[mf.region];
        if (f.skip) continue;
        report.um += 0.5 * mf.weight * mf.stress.dot(f.s * mf.stress);
        report.ue += 0.5 * df.weight * df.efield.dot(f.eps_t * df.efield);
        report.ucoupling += 0.5 * mf.weight * df.efield.dot(f.d * mf.stress);
    }
    if (report.um > 0.0 && report.ue > 0.0)
        report.kt2 = (pi * pi / 8.0) * report.ucoupling * report.ucoupling /
                     (report.um * report.ue);
    return report;
}

double q_total(const QBudget& b) {
    const std::optional<double>* channels[] = {&b.q_anchor,     &b.q_interface,
                                               &b.q_material,   &b.q_electrical,
                                               &b.q_dielectric, &b.q_intrinsic};
    double inv = 0.0;
    int set = 0;
    for (const auto* ch : channels) {
        if (!ch->has_value()) continue;
        if (!(**ch > 0.0)) throw std::invalid_argument("loss channels must be > 0");
        inv += 1.0 / **ch;
        ++set;
    }
    if (set == 0) throw std::invalid_argument("at least one loss channel must be set");
    return 1.0 / inv;
}

}  // namespace corkit
