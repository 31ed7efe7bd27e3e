#include "corkit/fem.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace corkit {

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

// Plane strain in the xz cross-section: active Voigt strains (xx, zz, xz) and
// field components (x, z).
constexpr int active_strain[3] = {0, 2, 4};
constexpr int active_field[2] = {0, 2};

struct ReducedMaterial {
    Eigen::Matrix3d c;
    Eigen::Matrix<double, 2, 3> e;
    Eigen::Matrix2d eps;
    double density = 0.0;
    bool conductor = false;
};

ReducedMaterial reduce_material(const MaterialTensors& m) {
    ReducedMaterial r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.c(i, j) = m.c(active_strain[i], active_strain[j]);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) r.e(i, j) = m.e(active_field[i], active_strain[j]);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.eps(i, j) = m.eps(active_field[i], active_field[j]);
    r.density = m.density;
    r.conductor = m.is_conductor;
    return r;
}

struct GaussPoint {
    double xi, eta, w;
};

constexpr double g1 = 0.57735026918962576451;  // 1/sqrt(3)
constexpr GaussPoint gauss4[4] = {
    {-g1, -g1, 1.0}, {g1, -g1, 1.0}, {g1, g1, 1.0}, {-g1, g1, 1.0}};

// Shape gradients in natural coordinates; corner order matches element
// connectivity (x0z0, x1z0, x1z1, x0z1).
void shape(double xi, double eta, double n[4], double dxi[4], double deta[4]) {
    n[0] = 0.25 * (1 - xi) * (1 - eta);
    n[1] = 0.25 * (1 + xi) * (1 - eta);
    n[2] = 0.25 * (1 + xi) * (1 + eta);
    n[3] = 0.25 * (1 - xi) * (1 + eta);
    dxi[0] = -0.25 * (1 - eta);
    dxi[1] = 0.25 * (1 - eta);
    dxi[2] = 0.25 * (1 + eta);
    dxi[3] = -0.25 * (1 + eta);
    deta[0] = -0.25 * (1 - xi);
    deta[1] = -0.25 * (1 + xi);
    deta[2] = 0.25 * (1 + xi);
    deta[3] = 0.25 * (1 - xi);
}

// Gradient operators at one quadrature point: B (3x8) strain-displacement,
// G (2x4) potential gradient, plus w*|J|.
struct PointOps {
    Eigen::Matrix<double, 3, 8> b;
    Eigen::Matrix<double, 2, 4> g;
    Eigen::Matrix<double, 2, 8> nmat;
    double wdet = 0.0;
};

PointOps point_ops(const GaussPoint& gp, const std::array<double, 4>& xe,
                   const std::array<double, 4>& ze) {
    double n[4], dxi[4], deta[4];
    shape(gp.xi, gp.eta, n, dxi, deta);
    double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
    for (int i = 0; i < 4; ++i) {
        j00 += dxi[i] * xe[i];
        j01 += dxi[i] * ze[i];
        j10 += deta[i] * xe[i];
        j11 += deta[i] * ze[i];
    }
    double det = j00 * j11 - j01 * j10;
    if (det <= 0.0) throw std::invalid_argument("inverted element (non-positive Jacobian)");

    PointOps ops;
    ops.wdet = gp.w * det;
    ops.b.setZero();
    ops.g.setZero();
    ops.nmat.setZero();
    for (int i = 0; i < 4; ++i) {
        double dx = (j11 * dxi[i] - j01 * deta[i]) / det;
        double dz = (-j10 * dxi[i] + j00 * deta[i]) / det;
        ops.b(0, 2 * i) = dx;
        ops.b(1, 2 * i + 1) = dz;
        ops.b(2, 2 * i) = dz;
        ops.b(2, 2 * i + 1) = dx;
        ops.g(0, i) = dx;
        ops.g(1, i) = dz;
        ops.nmat(0, 2 * i) = n[i];
        ops.nmat(1, 2 * i + 1) = n[i];
    }
    return ops;
}

// phi_full = T * phi_retained + fixed. Captures SHORT/OPEN/METALLIZED/BARE
// and harmonic drive patterns uniformly.
struct PhiReduction {
    Eigen::SparseMatrix<double> t;  // n_phi x n_retained
    Eigen::VectorXd fixed;          // n_phi
};

PhiReduction make_reduction(const AssembledSystem& sys, const std::vector<int>& target,
                            const std::vector<double>& value, int n_targets) {
    // target[full dof]: -1 keep as own column, -2 prescribed (value), else
    // grouped onto shared column id in [0, n_targets).
    PhiReduction red;
    red.fixed = Eigen::VectorXd::Zero(sys.n_phi);
    std::vector<Eigen::Triplet<double>> trip;
    int next = n_targets;
    for (int d = 0; d < sys.n_phi; ++d) {
        if (target[d] == -2) {
            red.fixed[d] = value[d];
        } else if (target[d] == -1) {
            trip.emplace_back(d, next++, 1.0);
        } else {
            trip.emplace_back(d, target[d], 1.0);
        }
    }
    red.t.resize(sys.n_phi, next);
    red.t.setFromTriplets(trip.begin(), trip.end());
    return red;
}

void require_fingers(const AssembledSystem& sys, const std::vector<Terminal>& pattern) {
    if (sys.finger_phi.empty())
        throw std::invalid_argument("electrical state needs electrode terminals");
    if (pattern.size() != sys.finger_phi.size())
        throw std::invalid_argument("terminal pattern size does not match finger count");
}

PhiReduction state_reduction(const AssembledSystem& sys, ElectricalState state,
                             const std::vector<Terminal>& pattern) {
    std::vector<int> target(sys.n_phi, -1);
    std::vector<double> value(sys.n_phi, 0.0);
    switch (state) {
        case ElectricalState::short_circuit:
            if (sys.finger_phi.empty())
                throw std::invalid_argument("SHORT needs electrode terminals");
            for (int d : sys.finger_phi) target[d] = -2;
            return make_reduction(sys, target, value, 0);
        case ElectricalState::open_circuit: {
            require_fingers(sys, pattern);
            // DRIVE+ fingers share one floating bus; DRIVE- is the gauge pin.
            // Zero net charge on the pinned bus follows from total-charge
            // conservation once every other potential row carries none.
            for (size_t f = 0; f < pattern.size(); ++f) {
                int d = sys.finger_phi[f];
                if (pattern[f] == Terminal::drive_plus) target[d] = 0;
                else target[d] = -2;
            }
            return make_reduction(sys, target, value, 1);
        }
        case ElectricalState::metallized_grounded: {
            if (!sys.finger_phi.empty())
                throw std::invalid_argument("METALLIZED_GROUNDED applies to bare plates");
            for (int n : sys.mesh.top_surface) target[sys.phi_dof[n]] = -2;
            for (int n : sys.mesh.bottom_surface) target[sys.phi_dof[n]] = -2;
            return make_reduction(sys, target, value, 0);
        }
        case ElectricalState::bare: {
            // Charge-free everywhere; one gauge pin removes the constant
            // potential null space.
            int pin = -1;
            for (int n = 0; n < sys.mesh.node_count() && pin < 0; ++n)
                if (sys.phi_dof[n] >= 0) pin = sys.phi_dof[n];
            if (pin < 0) throw std::invalid_argument("no potential DOFs to solve");
            target[pin] = -2;
            return make_reduction(sys, target, value, 0);
        }
    }
    throw std::logic_error("unhandled electrical state");
}

PhiReduction drive_reduction(const AssembledSystem& sys, const std::vector<Terminal>& pattern,
                             double volts) {
    require_fingers(sys, pattern);
    std::vector<int> target(sys.n_phi, -1);
    std::vector<double> value(sys.n_phi, 0.0);
    for (size_t f = 0; f < pattern.size(); ++f) {
        int d = sys.finger_phi[f];
        target[d] = -2;
        if (pattern[f] == Terminal::drive_plus) value[d] = 0.5 * volts;
        else if (pattern[f] == Terminal::drive_minus) value[d] = -0.5 * volts;
    }
    return make_reduction(sys, target, value, 0);
}

// Symmetric coupled block [[UU, UP], [UP^T, -PP]].
template <typename Scalar>
Eigen::SparseMatrix<Scalar> coupled_matrix(const Eigen::SparseMatrix<Scalar>& uu,
                                           const Eigen::SparseMatrix<Scalar>& up,
                                           const Eigen::SparseMatrix<Scalar>& pp) {
    const int nu = static_cast<int>(uu.rows());
    const int np = static_cast<int>(pp.rows());
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(uu.nonZeros() + 2 * up.nonZeros() + pp.nonZeros());
    for (int k = 0; k < uu.outerSize(); ++k)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(uu, k); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < up.outerSize(); ++k)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(up, k); it; ++it) {
            trip.emplace_back(it.row(), nu + it.col(), it.value());
            trip.emplace_back(nu + it.col(), it.row(), it.value());
        }
    for (int k = 0; k < pp.outerSize(); ++k)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(pp, k); it; ++it)
            trip.emplace_back(nu + it.row(), nu + it.col(), -it.value());
    Eigen::SparseMatrix<Scalar> out(nu + np, nu + np);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

struct RitzPair {
    double lambda = 0.0;  // omega^2
    Eigen::VectorXd x;    // coupled vector (u, phi_retained)
};

// Shift-invert Lanczos on P x = lambda B x with B = diag(M, 0), full
// reorthogonalization in the B-inner product. Deterministic (fixed seed).
std::vector<RitzPair> lanczos_nearest(const Eigen::SparseMatrix<double>& p,
                                      const Eigen::SparseMatrix<double>& m, int n_u,
                                      double sigma, int want, int basis, double tol) {
    const int n = static_cast<int>(p.rows());
    basis = std::min(basis, n);

    Eigen::SparseMatrix<double> shifted = p;
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 0; k < m.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
                trip.emplace_back(it.row(), it.col(), -sigma * it.value());
        Eigen::SparseMatrix<double> sb(n, n);
        sb.setFromTriplets(trip.begin(), trip.end());
        shifted += sb;
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) {
        // Landed exactly on an eigenvalue; nudge the shift.
        Eigen::SparseMatrix<double> eye(n, n);
        eye.setIdentity();
        shifted += (1e-6 * sigma) * eye;
        lu.compute(shifted);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("eigensolver: shifted factorization failed");
    }

    auto bmul = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
        out.head(n_u) = m * v.head(n_u);
        return out;
    };

    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = uni(rng);
    r = lu.solve(bmul(r));  // purge components outside the pencil range

    std::vector<Eigen::VectorXd> vbasis, wbasis;  // v_j and B v_j
    std::vector<double> alpha, beta;
    Eigen::VectorXd w = bmul(r);
    double b0 = std::sqrt(std::max(r.dot(w), 0.0));
    if (b0 <= 0.0) throw std::runtime_error("eigensolver: start vector lies in the mass null space");

    for (int j = 0; j < basis; ++j) {
        Eigen::VectorXd v = r / b0;
        Eigen::VectorXd wv = w / b0;
        vbasis.push_back(v);
        wbasis.push_back(wv);

        r = lu.solve(wv);
        double a = r.dot(wv);
        alpha.push_back(a);
        r -= a * v;
        if (j > 0) r -= b0 * vbasis[j - 1];
        // Full reorthogonalization, twice for stability.
        for (int pass = 0; pass < 2; ++pass)
            for (size_t i = 0; i < vbasis.size(); ++i) r -= r.dot(wbasis[i]) * vbasis[i];

        w = bmul(r);
        b0 = std::sqrt(std::max(r.dot(w), 0.0));
        beta.push_back(b0);
        if (b0 < 1e-14) break;  // invariant subspace
    }

    const int k = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        tri(i, i) = alpha[i];
        if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);

    std::vector<std::pair<double, int>> order;  // |lambda - sigma| ascending
    for (int i = 0; i < k; ++i) {
        double theta = es.eigenvalues()[i];
        if (std::abs(theta) < 1e-300) continue;
        double resid = (k == static_cast<int>(beta.size()))
                           ? std::abs(beta[k - 1] * es.eigenvectors()(k - 1, i))
                           : 0.0;
        if (resid > tol * std::max(std::abs(theta), 1e-12)) continue;
        double lambda = sigma + 1.0 / theta;
        order.emplace_back(std::abs(lambda - sigma), i);
    }
    std::sort(order.begin(), order.end());

    std::vector<RitzPair> out;
    for (auto [dist, i] : order) {
        if (static_cast<int>(out.size()) >= want) break;
        RitzPair rp;
        rp.lambda = sigma + 1.0 / es.eigenvalues()[i];
        rp.x = Eigen::VectorXd::Zero(n);
        for (int j2 = 0; j2 < k; ++j2) rp.x += es.eigenvectors()(j2, i) * vbasis[j2];
        out.push_back(std::move(rp));
    }
    return out;
}

// Dense fallback: condense phi through the Schur complement and solve the
// symmetric-definite pencil directly.
std::vector<RitzPair> dense_nearest(const Eigen::SparseMatrix<double>& kuu,
                                    const Eigen::SparseMatrix<double>& a_r,
                                    const Eigen::SparseMatrix<double>& kphi_r,
                                    const Eigen::SparseMatrix<double>& m, double sigma,
                                    int want) {
    const int nu = static_cast<int>(kuu.rows());
    const int np = static_cast<int>(kphi_r.rows());
    Eigen::MatrixXd kstar = Eigen::MatrixXd(kuu);
    Eigen::MatrixXd phi_of_u;  // np x nu, phi = phi_of_u * u
    if (np > 0) {
        Eigen::MatrixXd kp = Eigen::MatrixXd(kphi_r);
        Eigen::LLT<Eigen::MatrixXd> llt(kp);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("eigensolver: dielectric block not positive-definite");
        Eigen::MatrixXd at = Eigen::MatrixXd(a_r).transpose();
        phi_of_u = llt.solve(at);
        kstar += Eigen::MatrixXd(a_r) * phi_of_u;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(kstar, Eigen::MatrixXd(m));
    if (ges.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");

    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < nu; ++i)
        order.emplace_back(std::abs(ges.eigenvalues()[i] - sigma), i);
    std::sort(order.begin(), order.end());

    std::vector<RitzPair> out;
    for (auto [dist, i] : order) {
        if (static_cast<int>(out.size()) >= want) break;
        RitzPair rp;
        rp.lambda = ges.eigenvalues()[i];
        rp.x = Eigen::VectorXd::Zero(nu + np);
        rp.x.head(nu) = ges.eigenvectors().col(i);
        if (np > 0) rp.x.tail(np) = phi_of_u * ges.eigenvectors().col(i);
        out.push_back(std::move(rp));
    }
    return out;
}

}  // namespace

ElementMatrices element_matrices(const MaterialTensors& mat, const std::array<double, 4>& xe,
                                 const std::array<double, 4>& ze) {
    ReducedMaterial rm = reduce_material(mat);
    ElementMatrices em;
    em.kuu.setZero();
    em.a.setZero();
    em.kphi.setZero();
    em.m.setZero();
    PointOps centroid = point_ops({0.0, 0.0, 0.0}, xe, ze);
    for (const GaussPoint& gp : gauss4) {
        PointOps ops = point_ops(gp, xe, ze);
        // Assumed shear strain: the shear row of B is taken at the centroid,
        // which removes the parasitic shear stiffness of the bilinear quad.
        ops.b.row(2) = centroid.b.row(2);
        em.area += ops.wdet;
        em.kuu += ops.wdet * ops.b.transpose() * rm.c * ops.b;
        em.m += (ops.wdet * rm.density) * ops.nmat.transpose() * ops.nmat;
        if (!rm.conductor) {
            em.a += ops.wdet * ops.b.transpose() * rm.e.transpose() * ops.g;
            em.kphi += ops.wdet * ops.g.transpose() * rm.eps * ops.g;
        }
    }
    // Averaged mass (half consistent, half row-sum lumped) cancels the
    // leading dispersion error of the bilinear element.
    Eigen::Matrix<double, 8, 8> lumped = Eigen::Matrix<double, 8, 8>::Zero();
    for (int i = 0; i < 8; ++i) lumped(i, i) = em.m.row(i).sum();
    em.m = 0.5 * (em.m + lumped);
    return em;
}

AssembledSystem assemble(const Mesh& mesh, const MaterialDb& db) {
    AssembledSystem sys;
    sys.mesh = mesh;
    for (const MeshRegion& r : mesh.regions) {
        if (!db.has(r.material))
            throw std::invalid_argument("no material '" + r.material + "' for region '" +
                                        r.name + "'");
        sys.region_materials.push_back(db.get(r.material));
    }

    const int nn = mesh.node_count();
    std::vector<int> mech_master(nn);
    for (int i = 0; i < nn; ++i) mech_master[i] = i;
    for (auto [l, r] : mesh.periodic_pairs) mech_master[r] = l;

    sys.u_dof.assign(nn, -1);
    for (int i = 0; i < nn; ++i)
        if (mech_master[i] == i) {
            sys.u_dof[i] = sys.n_u;
            sys.n_u += 2;
        }
    for (int i = 0; i < nn; ++i)
        if (mech_master[i] != i) sys.u_dof[i] = sys.u_dof[mech_master[i]];

    std::vector<int> node_finger(nn, -1);
    for (size_t f = 0; f < mesh.finger_nodes.size(); ++f)
        for (int n : mesh.finger_nodes[f]) node_finger[n] = static_cast<int>(f);

    std::vector<char> touches_dielectric(nn, 0);
    for (size_t e = 0; e < mesh.elems.size(); ++e)
        if (!sys.region_materials[mesh.elem_region[e]].is_conductor)
            for (int n : mesh.elems[e]) touches_dielectric[n] = 1;

    sys.phi_dof.assign(nn, -1);
    for (int i = 0; i < nn; ++i)
        if (mech_master[i] == i && node_finger[i] < 0 && touches_dielectric[i])
            sys.phi_dof[i] = sys.n_phi++;
    sys.finger_phi.resize(mesh.finger_nodes.size());
    for (size_t f = 0; f < mesh.finger_nodes.size(); ++f) sys.finger_phi[f] = sys.n_phi++;
    for (int i = 0; i < nn; ++i) {
        if (node_finger[i] >= 0) sys.phi_dof[i] = sys.finger_phi[node_finger[i]];
        else if (mech_master[i] != i) sys.phi_dof[i] = sys.phi_dof[mech_master[i]];
    }
    if (sys.n_phi == static_cast<int>(mesh.finger_nodes.size()))
        throw std::invalid_argument("assemble: no dielectric present (Kphi singular)");

    std::vector<Eigen::Triplet<double>> tk, ta, tp, tm;
    for (size_t e = 0; e < mesh.elems.size(); ++e) {
        const auto& el = mesh.elems[e];
        std::array<double, 4> xe, ze;
        for (int i = 0; i < 4; ++i) {
            xe[i] = mesh.x[el[i]];
            ze[i] = mesh.z[el[i]];
        }
        const MaterialTensors& mat = sys.region_materials[mesh.elem_region[e]];
        ElementMatrices em = element_matrices(mat, xe, ze);

        int udof[8], pdof[4];
        for (int i = 0; i < 4; ++i) {
            udof[2 * i] = sys.u_dof[el[i]];
            udof[2 * i + 1] = sys.u_dof[el[i]] + 1;
            pdof[i] = sys.phi_dof[el[i]];
        }
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                tk.emplace_back(udof[i], udof[j], em.kuu(i, j));
                tm.emplace_back(udof[i], udof[j], em.m(i, j));
            }
        if (!mat.is_conductor) {
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 4; ++j) ta.emplace_back(udof[i], pdof[j], em.a(i, j));
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) tp.emplace_back(pdof[i], pdof[j], em.kphi(i, j));
        }
    }
    sys.Kuu.resize(sys.n_u, sys.n_u);
    sys.Kuu.setFromTriplets(tk.begin(), tk.end());
    sys.A.resize(sys.n_u, sys.n_phi);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.Kphi.resize(sys.n_phi, sys.n_phi);
    sys.Kphi.setFromTriplets(tp.begin(), tp.end());
    sys.M.resize(sys.n_u, sys.n_u);
    sys.M.setFromTriplets(tm.begin(), tm.end());
    return sys;
}

namespace {

ModalSolution expand_modal(const AssembledSystem& sys, const PhiReduction& red,
                           const RitzPair& rp) {
    const int n_red = static_cast<int>(red.t.cols());
    Eigen::VectorXd u_red = rp.x.head(sys.n_u);
    Eigen::VectorXd phi_red = rp.x.tail(n_red);

    double norm = std::sqrt(u_red.dot(sys.M * u_red));
    if (norm <= 0.0) throw std::runtime_error("eigensolver: massless eigenvector");
    u_red /= norm;
    phi_red /= norm;

    Eigen::VectorXd phi_full = red.t * phi_red + red.fixed;
    Eigen::VectorXd q = sys.Kphi * phi_full - sys.A.transpose() * u_red;

    ModalSolution ms;
    ms.frequency = std::sqrt(std::max(rp.lambda, 0.0)) / two_pi;
    const int nn = sys.mesh.node_count();
    ms.u.resize(2 * nn);
    ms.phi = Eigen::VectorXd::Zero(nn);
    for (int n = 0; n < nn; ++n) {
        ms.u[2 * n] = u_red[sys.u_dof[n]];
        ms.u[2 * n + 1] = u_red[sys.u_dof[n] + 1];
        if (sys.phi_dof[n] >= 0) ms.phi[n] = phi_full[sys.phi_dof[n]];
    }
    for (int d : sys.finger_phi) ms.terminal_charge.push_back(q[d]);
    return ms;
}

}  // namespace

std::vector<ModalSolution> eigensolve(const AssembledSystem& sys, ElectricalState state,
                                      int n_modes, double f_center,
                                      const std::vector<Terminal>& pattern,
                                      const EigenOptions& opts) {
    if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
    if (!(f_center > 0.0)) throw std::invalid_argument("f_center must be > 0");

    PhiReduction red = state_reduction(sys, state, pattern);
    Eigen::SparseMatrix<double> a_r = sys.A * red.t;
    Eigen::SparseMatrix<double> kphi_r =
        Eigen::SparseMatrix<double>(red.t.transpose()) * sys.Kphi * red.t;
    const double sigma = std::pow(two_pi * f_center, 2.0);

    std::vector<RitzPair> pairs;
    if (opts.force_dense || sys.n_u <= 900) {
        pairs = dense_nearest(sys.Kuu, a_r, kphi_r, sys.M, sigma, n_modes);
    } else {
        Eigen::SparseMatrix<double> p = coupled_matrix(sys.Kuu, a_r, kphi_r);
        int basis = opts.basis > 0 ? opts.basis : std::max(70, 6 * n_modes + 30);
        pairs = lanczos_nearest(p, sys.M, sys.n_u, sigma, n_modes, basis, opts.tol);
        if (static_cast<int>(pairs.size()) < n_modes)
            pairs = lanczos_nearest(p, sys.M, sys.n_u, sigma, n_modes, 2 * basis, opts.tol);
        if (static_cast<int>(pairs.size()) < n_modes)
            pairs = dense_nearest(sys.Kuu, a_r, kphi_r, sys.M, sigma, n_modes);
    }
    if (pairs.empty()) throw std::runtime_error("eigensolver: empty spectrum in window");

    std::vector<ModalSolution> out;
    for (const RitzPair& rp : pairs) out.push_back(expand_modal(sys, red, rp));
    std::sort(out.begin(), out.end(),
              [](const ModalSolution& a, const ModalSolution& b) {
                  return a.frequency < b.frequency;
              });
    return out;
}

HarmonicSolution harmonic_solve(const AssembledSystem& sys, const std::vector<Terminal>& pattern,
                                double f, double q_struct) {
    if (!(f > 0.0)) throw std::invalid_argument("frequency must be > 0");
    if (!(q_struct > 0.0)) throw std::invalid_argument("Q_struct must be > 0");
    using cd = std::complex<double>;
    const double omega = two_pi * f;
    const double eta = 1.0 / q_struct;

    PhiReduction red = drive_reduction(sys, pattern, 1.0);
    Eigen::SparseMatrix<double> a_r = sys.A * red.t;
    Eigen::SparseMatrix<double> kphi_r =
        Eigen::SparseMatrix<double>(red.t.transpose()) * sys.Kphi * red.t;

    Eigen::SparseMatrix<cd> top =
        sys.Kuu.cast<cd>() * cd(1.0, eta) - sys.M.cast<cd>() * cd(omega * omega, 0.0);
    Eigen::SparseMatrix<cd> a_rc = a_r.cast<cd>();
    Eigen::SparseMatrix<cd> kphi_rc = kphi_r.cast<cd>();
    Eigen::SparseMatrix<cd> sysm = coupled_matrix<cd>(top, a_rc, kphi_rc);

    const int n_red = static_cast<int>(red.t.cols());
    Eigen::VectorXcd rhs(sys.n_u + n_red);
    rhs.head(sys.n_u) = (-(sys.A * red.fixed)).cast<cd>();
    rhs.tail(n_red) =
        (Eigen::SparseMatrix<double>(red.t.transpose()) * (sys.Kphi * red.fixed)).cast<cd>();

    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
    lu.compute(sysm);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("harmonic solve: factorization failed");
    Eigen::VectorXcd x = lu.solve(rhs);

    HarmonicSolution hs;
    hs.frequency = f;
    hs.residual = (sysm * x - rhs).norm() / std::max(rhs.norm(), 1e-300);

    Eigen::VectorXcd u_red = x.head(sys.n_u);
    Eigen::VectorXcd phi_full = red.t.cast<cd>() * x.tail(n_red) + red.fixed.cast<cd>();
    Eigen::VectorXcd q =
        sys.Kphi.cast<cd>() * phi_full - sys.A.transpose().cast<cd>() * u_red;

    cd q_plus = 0.0;
    double p_in = 0.0;
    for (size_t fng = 0; fng < pattern.size(); ++fng) {
        cd qf = q[sys.finger_phi[fng]];
        hs.terminal_charge.push_back(qf);
        double volt = pattern[fng] == Terminal::drive_plus    ? 0.5
                      : pattern[fng] == Terminal::drive_minus ? -0.5
                                                              : 0.0;
        if (pattern[fng] == Terminal::drive_plus) q_plus += qf;
        p_in += -0.5 * omega * volt * qf.imag();
    }
    hs.admittance = cd(0.0, omega) * q_plus;
    hs.power_in = p_in;

    Eigen::VectorXcd ku = sys.Kuu.cast<cd>() * u_red;
    hs.power_dissipated = 0.5 * omega * eta * u_red.dot(ku).real();

    const int nn = sys.mesh.node_count();
    hs.u.resize(2 * nn);
    hs.phi = Eigen::VectorXcd::Zero(nn);
    for (int n = 0; n < nn; ++n) {
        hs.u[2 * n] = u_red[sys.u_dof[n]];
        hs.u[2 * n + 1] = u_red[sys.u_dof[n] + 1];
        if (sys.phi_dof[n] >= 0) hs.phi[n] = phi_full[sys.phi_dof[n]];
    }
    return hs;
}

std::vector<HarmonicPoint> harmonic_admittance(const AssembledSystem& sys,
                                               const std::vector<Terminal>& pattern,
                                               const std::vector<double>& f_grid,
                                               double q_struct) {
    std::vector<HarmonicPoint> out;
    out.reserve(f_grid.size());
    for (double f : f_grid) {
        HarmonicSolution hs = harmonic_solve(sys, pattern, f, q_struct);
        out.push_back({f, hs.admittance, hs.power_in, hs.power_dissipated, hs.residual});
    }
    return out;
}

double static_capacitance(const AssembledSystem& sys, const std::vector<Terminal>& pattern) {
    // Quasi-static: far below every structural resonance the admittance is
    // j*omega*C0 with the mechanics following adiabatically (free capacitance).
    const double f_low = 1e6;
    HarmonicSolution hs = harmonic_solve(sys, pattern, f_low, 1e12);
    return hs.admittance.imag() / (two_pi * f_low);
}

std::vector<GaussPointField> evaluate_gauss_fields(const AssembledSystem& sys,
                                                   const Eigen::VectorXd& u,
                                                   const Eigen::VectorXd& phi) {
    const Mesh& mesh = sys.mesh;
    if (u.size() != 2 * mesh.node_count() || phi.size() != mesh.node_count())
        throw std::invalid_argument("field vectors do not match the mesh");

    std::vector<GaussPointField> out;
    out.reserve(4 * mesh.elems.size());
    for (size_t e = 0; e < mesh.elems.size(); ++e) {
        const auto& el = mesh.elems[e];
        const MaterialTensors& mat = sys.region_materials[mesh.elem_region[e]];
        ReducedMaterial rm = reduce_material(mat);
        std::array<double, 4> xe, ze;
        Eigen::Matrix<double, 8, 1> ue;
        Eigen::Vector4d pe;
        for (int i = 0; i < 4; ++i) {
            xe[i] = mesh.x[el[i]];
            ze[i] = mesh.z[el[i]];
            ue[2 * i] = u[2 * el[i]];
            ue[2 * i + 1] = u[2 * el[i] + 1];
            pe[i] = phi[el[i]];
        }
        PointOps centroid = point_ops({0.0, 0.0, 0.0}, xe, ze);
        for (const GaussPoint& gp : gauss4) {
            PointOps ops = point_ops(gp, xe, ze);
            // Same assumed shear strain as the element matrices.
            ops.b.row(2) = centroid.b.row(2);
            GaussPointField gf;
            gf.weight = ops.wdet;
            gf.region = mesh.elem_region[e];
            Eigen::Vector3d strain = ops.b * ue;
            Eigen::Vector2d efield = rm.conductor ? Eigen::Vector2d::Zero().eval()
                                                  : (-(ops.g * pe)).eval();
            gf.stress = rm.c * strain - rm.e.transpose() * efield;
            gf.efield = efield;
            out.push_back(gf);
        }
    }
    return out;
}

void dump_fields_csv(const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
                     const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << "node,x,z,ux,uz,phi\n";
    for (int n = 0; n < mesh.node_count(); ++n)
        f << n << "," << mesh.x[n] << "," << mesh.z[n] << "," << u[2 * n] << "," << u[2 * n + 1]
          << "," << phi[n] << "\n";
}

}  // namespace corkit
