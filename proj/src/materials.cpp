#include "corkit/materials.hpp"

#include "corkit/structext.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace corkit {

namespace {

// Voigt index for an (i,j) pair, 0-based: xx yy zz yz xz xy.
constexpr int voigt_index[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};
constexpr int voigt_pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};

bool nearly_equal(double a, double b, double scale) {
    return std::abs(a - b) <= 1e-9 * scale;
}

void check_symmetric(const Eigen::MatrixXd& m, const std::string& what) {
    double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument(what + " is not symmetric");
}

void check_positive_definite(const Eigen::MatrixXd& m, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument(what + " is not positive-definite");
}

// 6mm pattern: 5 elastic constants, e15/e31/e33, diagonal eps. The isotropic
// degenerate case (c12 = c13, c44 = (c11 - c12)/2) satisfies it too.
void check_hexagonal_pattern(const MaterialTensors& m) {
    const auto& c = m.c;
    double cs = c.cwiseAbs().maxCoeff();
    Eigen::Matrix<double, 6, 6> want = Eigen::Matrix<double, 6, 6>::Zero();
    want(0, 0) = want(1, 1) = c(0, 0);
    want(0, 1) = want(1, 0) = c(0, 1);
    want(0, 2) = want(2, 0) = want(1, 2) = want(2, 1) = c(0, 2);
    want(2, 2) = c(2, 2);
    want(3, 3) = want(4, 4) = c(3, 3);
    want(5, 5) = (c(0, 0) - c(0, 1)) / 2.0;
    if ((c - want).cwiseAbs().maxCoeff() > 1e-9 * cs)
        throw std::invalid_argument(m.name + ": c violates the hexagonal 6mm pattern");

    const auto& e = m.e;
    double es = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::Matrix<double, 3, 6> ew = Eigen::Matrix<double, 3, 6>::Zero();
    ew(0, 4) = ew(1, 3) = e(0, 4);
    ew(2, 0) = ew(2, 1) = e(2, 0);
    ew(2, 2) = e(2, 2);
    if ((e - ew).cwiseAbs().maxCoeff() > 1e-9 * es)
        throw std::invalid_argument(m.name + ": e violates the hexagonal 6mm pattern");

    const auto& p = m.eps;
    double ps = p.cwiseAbs().maxCoeff();
    if (!nearly_equal(p(0, 0), p(1, 1), ps) || std::abs(p(0, 1)) > 1e-9 * ps ||
        std::abs(p(0, 2)) > 1e-9 * ps || std::abs(p(1, 2)) > 1e-9 * ps)
        throw std::invalid_argument(m.name + ": eps violates the hexagonal 6mm pattern");
}

const char* default_db_text = R"(# Built-in material set, SI units unless a key suffix says otherwise.
# Stress-charge form: c and eps are the clamped (constant-strain) tensors.

material AlN {
    class = hexagonal
    density = 3260           # kg/m^3
    c11_gpa = 407
    c12_gpa = 125
    c13_gpa = 99
    c33_gpa = 382
    c44_gpa = 125
    e15 = -0.48              # C/m^2
    e31 = -0.58
    e33 = 1.40
    eps11_r = 8.0
    eps33_r = 9.5
}

material Al {
    class = isotropic
    conductor = true
    density = 2700
    youngs_gpa = 70
    poisson = 0.35
}
)";

struct KeyTracker {
    const TextBlock& block;
    std::set<std::string> seen;

    double number(std::string_view key) {
        const TextValue* v = block.find(key);
        if (!v) throw std::invalid_argument(block.name + ": missing key '" + std::string(key) + "'");
        seen.insert(std::string(key));
        return v->as_number(key);
    }
    double number_or(std::string_view key, double fallback) {
        const TextValue* v = block.find(key);
        if (!v) return fallback;
        seen.insert(std::string(key));
        return v->as_number(key);
    }
    bool flag_or(std::string_view key, bool fallback) {
        const TextValue* v = block.find(key);
        if (!v) return fallback;
        seen.insert(std::string(key));
        return v->as_bool(key);
    }
    std::string word(std::string_view key) {
        const TextValue* v = block.find(key);
        if (!v) throw std::invalid_argument(block.name + ": missing key '" + std::string(key) + "'");
        if (v->is_matrix())
            throw std::invalid_argument(block.name + ": '" + std::string(key) + "' must be a word");
        seen.insert(std::string(key));
        return v->scalar;
    }
    Eigen::MatrixXd matrix(std::string_view key, int nrows, int ncols) {
        const TextValue* v = block.find(key);
        if (!v) throw std::invalid_argument(block.name + ": missing key '" + std::string(key) + "'");
        seen.insert(std::string(key));
        if (static_cast<int>(v->rows.size()) != nrows)
            throw std::invalid_argument(block.name + ": '" + std::string(key) + "' needs " +
                                        std::to_string(nrows) + " rows");
        Eigen::MatrixXd out(nrows, ncols);
        for (int r = 0; r < nrows; ++r) {
            if (static_cast<int>(v->rows[r].size()) != ncols)
                throw std::invalid_argument(block.name + ": '" + std::string(key) + "' row " +
                                            std::to_string(r + 1) + " needs " +
                                            std::to_string(ncols) + " entries");
            for (int cidx = 0; cidx < ncols; ++cidx) out(r, cidx) = v->rows[r][cidx];
        }
        return out;
    }
    bool has(std::string_view key) const { return block.find(key) != nullptr; }

    void reject_unknown(std::string_view source) const {
        for (const auto& [key, value] : block.entries) {
            if (!seen.count(key)) {
                std::ostringstream os;
                os << source << ":" << value.line << ": unknown key '" << key << "' in material '"
                   << block.name << "'";
                throw std::invalid_argument(os.str());
            }
        }
    }
};

MaterialTensors build_material(const TextBlock& block, std::string_view source) {
    KeyTracker keys{block, {}};
    MaterialTensors m;
    m.name = block.name;
    m.density = keys.number("density");
    m.is_conductor = keys.flag_or("conductor", false);
    std::string cls = keys.word("class");

    m.c.setZero();
    m.e.setZero();
    m.eps = vacuum_permittivity * Eigen::Matrix3d::Identity();

    if (cls == "hexagonal") {
        if (keys.has("c_gpa")) {
            m.c = keys.matrix("c_gpa", 6, 6) * 1e9;
            m.e = keys.matrix("e", 3, 6);
            m.eps = keys.matrix("eps_r", 3, 3) * vacuum_permittivity;
        } else {
            double c11 = keys.number("c11_gpa") * 1e9;
            double c12 = keys.number("c12_gpa") * 1e9;
            double c13 = keys.number("c13_gpa") * 1e9;
            double c33 = keys.number("c33_gpa") * 1e9;
            double c44 = keys.number("c44_gpa") * 1e9;
            m.c(0, 0) = m.c(1, 1) = c11;
            m.c(0, 1) = m.c(1, 0) = c12;
            m.c(0, 2) = m.c(2, 0) = m.c(1, 2) = m.c(2, 1) = c13;
            m.c(2, 2) = c33;
            m.c(3, 3) = m.c(4, 4) = c44;
            m.c(5, 5) = (c11 - c12) / 2.0;
            if (!m.is_conductor) {
                m.e(0, 4) = m.e(1, 3) = keys.number_or("e15", 0.0);
                m.e(2, 0) = m.e(2, 1) = keys.number_or("e31", 0.0);
                m.e(2, 2) = keys.number_or("e33", 0.0);
                double eps11 = keys.number("eps11_r") * vacuum_permittivity;
                double eps33 = keys.number("eps33_r") * vacuum_permittivity;
                m.eps = Eigen::Vector3d(eps11, eps11, eps33).asDiagonal();
            }
        }
        check_hexagonal_pattern(m);
    } else if (cls == "isotropic") {
        double youngs = keys.number("youngs_gpa") * 1e9;
        double poisson = keys.number("poisson");
        if (poisson <= -1.0 || poisson >= 0.5)
            throw std::invalid_argument(m.name + ": poisson must lie in (-1, 0.5)");
        double mu = youngs / (2.0 * (1.0 + poisson));
        double lambda = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m.c(i, j) = (i == j) ? lambda + 2.0 * mu : lambda;
        m.c(3, 3) = m.c(4, 4) = m.c(5, 5) = mu;
        if (!m.is_conductor)
            m.eps = keys.number_or("eps_r", 1.0) * vacuum_permittivity *
                    Eigen::Matrix3d::Identity();
    } else if (cls == "generic") {
        m.c = keys.matrix("c_gpa", 6, 6) * 1e9;
        if (!m.is_conductor) {
            m.e = keys.matrix("e", 3, 6);
            m.eps = keys.matrix("eps_r", 3, 3) * vacuum_permittivity;
        }
    } else {
        throw std::invalid_argument(m.name + ": unknown class '" + cls +
                                    "' (expected hexagonal, isotropic, or generic)");
    }

    keys.reject_unknown(source);
    m.validate();
    return m;
}

}  // namespace

void MaterialTensors::validate() const {
    if (name.empty()) throw std::invalid_argument("material has no name");
    if (!(density > 0.0)) throw std::invalid_argument(name + ": density must be > 0");
    check_symmetric(c, name + ": c");
    check_positive_definite(c, name + ": c");
    if (is_conductor) {
        if (e.cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument(name + ": conductors must have e = 0");
        return;
    }
    check_symmetric(eps, name + ": eps");
    check_positive_definite(eps, name + ": eps");
}

Eigen::Matrix<double, 6, 6> MaterialTensors::compliance() const {
    return c.llt().solve(Eigen::Matrix<double, 6, 6>::Identity());
}

Eigen::Matrix<double, 3, 6> MaterialTensors::strain_coupling() const {
    return e * compliance();
}

Eigen::Matrix3d MaterialTensors::eps_free() const {
    return eps + strain_coupling() * e.transpose();
}

FullTensors voigt_to_full(const MaterialTensors& m) {
    FullTensors t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                t.e[i][j][k] = m.e(i, voigt_index[j][k]);
                for (int l = 0; l < 3; ++l)
                    t.c[i][j][k][l] = m.c(voigt_index[i][j], voigt_index[k][l]);
            }
    return t;
}

Eigen::Matrix<double, 6, 6> full_to_voigt_c(const FullTensors& t) {
    Eigen::Matrix<double, 6, 6> c;
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
            c(a, b) = t.c[voigt_pairs[a][0]][voigt_pairs[a][1]][voigt_pairs[b][0]][voigt_pairs[b][1]];
    return c;
}

Eigen::Matrix<double, 3, 6> full_to_voigt_e(const FullTensors& t) {
    Eigen::Matrix<double, 3, 6> e;
    for (int i = 0; i < 3; ++i)
        for (int b = 0; b < 6; ++b) e(i, b) = t.e[i][voigt_pairs[b][0]][voigt_pairs[b][1]];
    return e;
}

const MaterialTensors& MaterialDb::get(const std::string& name) const {
    for (const auto& m : entries)
        if (m.name == name) return m;
    throw std::invalid_argument("unknown material '" + name + "'");
}

bool MaterialDb::has(const std::string& name) const {
    return std::any_of(entries.begin(), entries.end(),
                       [&](const MaterialTensors& m) { return m.name == name; });
}

MaterialDb parse_material_db(std::string_view text, std::string_view source) {
    MaterialDb db;
    for (const TextBlock& block : parse_blocks(text, source)) {
        if (block.kind != "material") {
            std::ostringstream os;
            os << source << ":" << block.line << ": expected a 'material' block, got '"
               << block.kind << "'";
            throw std::invalid_argument(os.str());
        }
        if (db.has(block.name))
            throw std::invalid_argument(std::string(source) + ": duplicate material '" +
                                        block.name + "'");
        db.entries.push_back(build_material(block, source));
    }
    if (db.entries.empty())
        throw std::invalid_argument(std::string(source) + ": no material blocks found");
    return db;
}

MaterialDb load_material_db(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_material_db(buf.str(), path);
}

const MaterialDb& default_material_db() {
    static const MaterialDb db = parse_material_db(default_db_text, "<built-in>");
    return db;
}

std::string_view default_material_db_text() { return default_db_text; }

}  // namespace corkit
