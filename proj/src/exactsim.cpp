#include "srsync/exactsim.hpp"
#include "srsync/closedform.hpp"
#include "srsync/detail/dopri.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace srsync::exact {

namespace {

constexpr cplx I1{0.0, 1.0};

SpMat sparse_identity(int d) {
    SpMat I(d, d);
    I.setIdentity();
    return I;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int d) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

cplx trace_product(const SpMat& op, const Eigen::MatrixXcd& rho) {
    cplx s = 0.0;
    for (int c = 0; c < op.outerSize(); ++c)
        for (SpMat::InnerIterator it(op, c); it; ++it) s += it.value() * rho(it.col(), it.row());
    return s;
}

}

Operators::Operators(const Layout& l) : l_(l) {
    if (l.n_a < 1 || l.n_b < 1) throw std::invalid_argument("each ensemble needs at least one atom");
}

SpMat Operators::embed(const Eigen::MatrixXcd& local, int stride, int ld) const {
    const int d = dim();
    std::vector<Eigen::Triplet<cplx>> t;
    for (int b = 0; b < d; ++b) {
        int l = (b / stride) % ld;
        for (int lp = 0; lp < ld; ++lp) {
            cplx v = local(lp, l);
            if (v != 0.0) t.emplace_back(b + (lp - l) * stride, b, v);
        }
    }
    SpMat m(d, d);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SpMat Operators::identity() const { return sparse_identity(dim()); }

SpMat Operators::sigma_plus(int k) const {
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    s(1, 0) = 1.0;
    return embed(s, 1 << k, 2);
}

SpMat Operators::sigma_minus(int k) const {
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    s(0, 1) = 1.0;
    return embed(s, 1 << k, 2);
}

SpMat Operators::sigma_z(int k) const {
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    s(0, 0) = -1.0;
    s(1, 1) = 1.0;
    return embed(s, 1 << k, 2);
}

SpMat Operators::j_minus(int e) const {
    SpMat m(dim(), dim());
    int first = e == 0 ? 0 : l_.n_a, n = e == 0 ? l_.n_a : l_.n_b;
    for (int k = first; k < first + n; ++k) m += sigma_minus(k);
    return m;
}

SpMat Operators::j_plus(int e) const { return SpMat(j_minus(e).adjoint()); }

SpMat Operators::j_z(int e) const {
    SpMat m(dim(), dim());
    int first = e == 0 ? 0 : l_.n_a, n = e == 0 ? l_.n_a : l_.n_b;
    for (int k = first; k < first + n; ++k) m += sigma_z(k);
    return 0.5 * m;
}

SpMat Operators::annihilate(int mode) const {
    if (mode < 0 || mode >= l_.n_modes) throw std::invalid_argument("no such cavity mode");
    int ld = l_.n_max + 1;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(ld, ld);
    for (int n = 1; n < ld; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    int stride = l_.atom_dim() * (mode == 0 ? 1 : ld);
    return embed(a, stride, ld);
}

SpMat Operators::number(int mode) const {
    SpMat a = annihilate(mode);
    return SpMat(a.adjoint() * a);
}

LindbladSpec lindblad_spec(Scenario sc, const ModelParams& p, int n_small, const Mode& mode) {
    validate(p, sc);
    const double g = p.gamma(), w = p.pump, d = p.detuning, xi = p.feedback_strength;
    Layout lay{n_small, n_small, 0, 0};
    if (mode.kind == Mode::FullCavity) {
        lay.n_modes = sc == Scenario::BiQuantum ? 1 : 2;
        lay.n_max = mode.n_max;
    }
    Operators op(lay);
    LindbladSpec s;
    SpMat JmA = op.j_minus(0), JmB = op.j_minus(1);
    SpMat JpA = op.j_plus(0), JpB = op.j_plus(1);
    for (int k = 0; k < 2 * n_small; ++k) s.collapse.push_back({w, op.sigma_plus(k), 0.0});

    if (mode.kind == Mode::Eliminated) {
        switch (sc) {
        case Scenario::BiQuantum:
            s.hamiltonian = (0.5 * d) * (op.j_z(0) - op.j_z(1));
            s.collapse.push_back({g, JmA + JmB, 0.0});
            break;
        case Scenario::UniQuantum:
        case Scenario::UniClassical: {
            SpMat K = SpMat(JpA * JmB) - SpMat(JpB * JmA);
            s.hamiltonian = (-d) * op.j_z(1) + cplx(0.0, -0.5 * g) * K;
            s.collapse.push_back({g, JmA - JmB, 0.0});
            if (sc == Scenario::UniClassical) {
                s.collapse.push_back({g, JmB, 0.0});
                s.collapse.push_back({g, JpB, 0.0});
            }
            break;
        }
        case Scenario::BiClassical: {
            auto cc = closedform::coupling_coefficients(xi);
            s.hamiltonian = (0.5 * d) * (op.j_z(0) - op.j_z(1));
            s.collapse.push_back({0.5 * g * (1.0 - xi), JmA - JmB, cc.n_plus});
            s.collapse.push_back({0.5 * g * (1.0 + xi), JmA + JmB, cc.n_minus});
            break;
        }
        }
        return s;
    }

    const double kappa = mode.kappa > 0.0 ? mode.kappa : 50.0 * std::max(w, n_small * g);
    const double Om = std::sqrt(g * kappa);
    SpMat a = op.annihilate(0);
    SpMat ad = SpMat(a.adjoint());
    if (sc == Scenario::BiQuantum) {
        SpMat Jm = JmA + JmB;
        SpMat c = SpMat(ad * Jm);
        s.hamiltonian = (0.5 * d) * (op.j_z(0) - op.j_z(1)) + (0.5 * Om) * (c + SpMat(c.adjoint()));
        s.collapse.push_back({kappa, a, 0.0});
        return s;
    }
    SpMat b = op.annihilate(1);
    SpMat bd = SpMat(b.adjoint());
    SpMat coup = SpMat(JpA * a) + SpMat(JpB * b);
    SpMat Hc = (0.5 * Om) * (coup + SpMat(coup.adjoint()));
    if (sc == Scenario::BiClassical) {
        double kt = kappa / ((1.0 - xi) * (1.0 + xi));
        s.hamiltonian = Hc + (0.5 * d) * (op.j_z(0) - op.j_z(1));
        s.collapse.push_back({kt, a + xi * b, 0.0});
        s.collapse.push_back({xi * xi * kt, bd, 0.0});
        s.collapse.push_back({kt, b + xi * a, 0.0});
        s.collapse.push_back({xi * xi * kt, ad, 0.0});
        return s;
    }
    SpMat K = SpMat(ad * b) - SpMat(bd * a);
    s.hamiltonian = Hc + (-d) * op.j_z(1) + cplx(0.0, 0.5 * kappa) * K;
    s.collapse.push_back({kappa, a + b, 0.0});
    if (sc == Scenario::UniClassical) {
        s.collapse.push_back({kappa, b, 0.0});
        s.collapse.push_back({kappa, bd, 0.0});
    }
    return s;
}

Liouvillian assemble(const Layout& layout, const LindbladSpec& spec) {
    const int d = layout.dim();
    if (static_cast<long>(d) * d > 700000) throw ExactError("superoperator dimension exceeds the guard");
    SpMat I = sparse_identity(d);
    SpMat H = spec.hamiltonian.size() ? spec.hamiltonian : SpMat(d, d);
    SpMat Ht = SpMat(H.transpose());
    SpMat L = -I1 * (SpMat(Eigen::kroneckerProduct(I, H)) - SpMat(Eigen::kroneckerProduct(Ht, I)));
    auto add_dissipator = [&](double rate, const SpMat& C) {
        if (rate == 0.0) return;
        SpMat CdC = SpMat(C.adjoint() * C);
        SpMat CdCt = SpMat(CdC.transpose());
        SpMat Cc = SpMat(C.conjugate());
        L += rate * (SpMat(Eigen::kroneckerProduct(Cc, C)) - 0.5 * SpMat(Eigen::kroneckerProduct(I, CdC)) -
                     0.5 * SpMat(Eigen::kroneckerProduct(CdCt, I)));
    };
    for (auto& c : spec.collapse) {
        if (c.rate < 0.0 || c.nbar < 0.0) throw std::invalid_argument("negative Lindblad rate");
        add_dissipator(c.rate * (1.0 + c.nbar), c.op);
        if (c.nbar > 0.0) add_dissipator(c.rate * c.nbar, SpMat(c.op.adjoint()));
    }
    L.prune(cplx(0.0, 0.0));
    L.makeCompressed();
    return {layout, L};
}

Liouvillian build_liouvillian(Scenario sc, const ModelParams& p, int n_small, const Mode& mode) {
    if (n_small < 1) throw std::invalid_argument("n_small must be >= 1");
    if (mode.kind == Mode::Eliminated && n_small > 4)
        throw ExactError("eliminated mode supports at most 4 atoms per ensemble");
    if (mode.kind == Mode::FullCavity && (n_small > 2 || mode.n_max < 1 || mode.n_max > 6))
        throw ExactError("full-cavity mode supports n_small <= 2 and 1 <= n_max <= 6");
    Layout lay{n_small, n_small, 0, 0};
    if (mode.kind == Mode::FullCavity) {
        lay.n_modes = sc == Scenario::BiQuantum ? 1 : 2;
        lay.n_max = mode.n_max;
    }
    return assemble(lay, lindblad_spec(sc, p, n_small, mode));
}

InvariantReport check_invariants(const DensityMatrix& r) {
    InvariantReport rep;
    rep.trace_error = std::abs(r.rho.trace() - 1.0);
    rep.hermiticity_error = (r.rho - r.rho.adjoint()).cwiseAbs().maxCoeff();
    Eigen::MatrixXcd h = 0.5 * (r.rho + r.rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = es.eigenvalues().minCoeff();
    return rep;
}

namespace {

Eigen::VectorXcd solve_bordered(const SpMat& L, int d, int replaced_row, bool& ok) {
    const int n = d * d;
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(L.nonZeros() + d);
    for (int c = 0; c < L.outerSize(); ++c)
        for (SpMat::InnerIterator it(L, c); it; ++it)
            if (it.row() != replaced_row) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < d; ++k) t.emplace_back(replaced_row, k * (d + 1), 1.0);
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    ok = lu.info() == Eigen::Success;
    if (!ok) return {};
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    rhs[replaced_row] = 1.0;
    Eigen::VectorXcd x = lu.solve(rhs);
    ok = lu.info() == Eigen::Success && x.allFinite();
    return x;
}

std::string smallest_eigenvalues(const SpMat& L) {
    if (L.rows() > 1024) return "(too large to list eigenvalues)";
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(L), false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + L.rows());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    std::ostringstream os;
    os << "two smallest eigenvalues: " << ev[0] << ", " << ev[1];
    return os.str();
}

}

DensityMatrix steady_state_exact(const Liouvillian& Lv) {
    const int d = Lv.layout.dim();
    const SpMat& L = Lv.L;
    bool ok1 = false, ok2 = false;
    Eigen::VectorXcd x1 = solve_bordered(L, d, 0, ok1);
    Eigen::VectorXcd x2 = solve_bordered(L, d, d * d - 1, ok2);
    double lmax = 0.0;
    for (int c = 0; c < L.outerSize(); ++c)
        for (SpMat::InnerIterator it(L, c); it; ++it) lmax = std::max(lmax, std::abs(it.value()));
    bool unique = ok1 && ok2 && (x1 - x2).lpNorm<Eigen::Infinity>() <= 1e-8 &&
                  (L * x1).lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(lmax, 1.0);
    if (!unique) throw ExactError("steady state is not unique (degenerate null space); " + smallest_eigenvalues(L));
    DensityMatrix r{Lv.layout, unvec(x1, d)};
    r.rho = 0.5 * (r.rho + r.rho.adjoint());
    r.rho /= r.rho.trace();
    auto rep = check_invariants(r);
    if (!rep.ok()) {
        std::ostringstream os;
        os << "steady state violates density-matrix invariants (trace " << rep.trace_error
           << ", min eigenvalue " << rep.min_eigenvalue << ")";
        throw ExactError(os.str());
    }
    return r;
}

DensityMatrix evolve(const DensityMatrix& rho0, const Liouvillian& Lv, double t) {
    const int d = Lv.layout.dim();
    if (rho0.dim() != d) throw std::invalid_argument("state and Liouvillian dimensions differ");
    if (t < 0.0) throw std::invalid_argument("negative evolution time");
    DensityMatrix out{Lv.layout, rho0.rho};
    if (t == 0.0) return out;
    Eigen::VectorXcd v = vec(rho0.rho);
    if (d * d <= 1024) {
        Eigen::MatrixXcd E = (Eigen::MatrixXcd(Lv.L) * t).exp();
        v = E * v;
    } else {
        auto f = [&](double, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) { dx = Lv.L * x; };
        double lmax = 0.0;
        for (int c = 0; c < Lv.L.outerSize(); ++c)
            for (SpMat::InnerIterator it(Lv.L, c); it; ++it) lmax = std::max(lmax, std::abs(it.value()));
        detail::dopri5(f, v, 0.0, t, 0.1 / std::max(lmax, 1e-12), 1e-10, 1e-13, 1e-14 * t, 50'000'000, 0.0,
                       [](double, const Eigen::VectorXcd&) {});
    }
    out.rho = unvec(v, d);
    auto rep = check_invariants(out);
    if (!rep.ok(1e-9, 1e-10, -1e-9)) {
        std::ostringstream os;
        os << "evolution broke density-matrix invariants (trace " << rep.trace_error << ", hermiticity "
           << rep.hermiticity_error << ", min eigenvalue " << rep.min_eigenvalue << ")";
        throw ExactError(os.str());
    }
    return out;
}

CorrelationState expectations(const DensityMatrix& r, double tol) {
    const Layout& l = r.layout;
    Operators op(l);
    auto ev = [&](const SpMat& o) { return trace_product(o, r.rho); };
    auto agree = [&](cplx ref, cplx v, const char* what) {
        if (std::abs(ref - v) > tol) {
            std::ostringstream os;
            os << "exchange symmetry violated for " << what << ": " << ref << " vs " << v;
            throw ExactError(os.str());
        }
    };
    CorrelationState s;
    const int na = l.n_a, nb = l.n_b;
    s.z_a = ev(op.sigma_z(0)).real();
    for (int k = 1; k < na; ++k) agree(s.z_a, ev(op.sigma_z(k)), "z_a");
    s.z_b = ev(op.sigma_z(na)).real();
    for (int k = na + 1; k < na + nb; ++k) agree(s.z_b, ev(op.sigma_z(k)), "z_b");
    auto pair = [&](int i, int j) { return ev(SpMat(op.sigma_plus(i) * op.sigma_minus(j))); };
    if (na > 1) {
        s.aa = pair(0, 1);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j)
                if (i != j) agree(s.aa, pair(i, j), "aa");
    }
    if (nb > 1) {
        s.bb = pair(na, na + 1);
        for (int i = na; i < na + nb; ++i)
            for (int j = na; j < na + nb; ++j)
                if (i != j) agree(s.bb, pair(i, j), "bb");
    }
    s.ab = pair(0, na);
    for (int i = 0; i < na; ++i)
        for (int j = na; j < na + nb; ++j) agree(s.ab, pair(i, j), "ab");
    return s;
}

double top_fock_population(const DensityMatrix& r) {
    const Layout& l = r.layout;
    if (l.n_modes == 0) return 0.0;
    const int ld = l.n_max + 1, ad = l.atom_dim();
    double worst = 0.0;
    for (int m = 0; m < l.n_modes; ++m) {
        double pop = 0.0;
        for (int b = 0; b < l.dim(); ++b) {
            int n = (b / ad / (m == 0 ? 1 : ld)) % ld;
            if (n >= l.n_max - 1) pop += r.rho(b, b).real();
        }
        worst = std::max(worst, pop);
    }
    return worst;
}

DensityMatrix steady_state_full_cavity(Scenario sc, const ModelParams& p, int n_small, Mode mode) {
    mode.kind = Mode::FullCavity;
    double last = 1.0;
    for (int nm = std::max(mode.n_max, 2); nm <= 6; ++nm) {
        mode.n_max = nm;
        DensityMatrix r = steady_state_exact(build_liouvillian(sc, p, n_small, mode));
        last = top_fock_population(r);
        if (last < 1e-4) return r;
    }
    std::ostringstream os;
    os << "photon truncation not converged at n_max = 6 (top-level population " << last << ")";
    throw ExactError(os.str());
}

DensityMatrix product_state(const Layout& l, const std::vector<double>& pe) {
    const int na = l.n_a + l.n_b;
    if (static_cast<int>(pe.size()) != na) throw std::invalid_argument("one probability per atom expected");
    DensityMatrix r{l, Eigen::MatrixXcd::Zero(l.dim(), l.dim())};
    for (int b = 0; b < l.atom_dim(); ++b) {
        double prob = 1.0;
        for (int k = 0; k < na; ++k) prob *= (b >> k) & 1 ? pe[k] : 1.0 - pe[k];
        r.rho(b, b) = prob;
    }
    return r;
}

DensityMatrix maximally_mixed(const Layout& l) {
    DensityMatrix r{l, Eigen::MatrixXcd::Identity(l.dim(), l.dim())};
    r.rho /= static_cast<double>(l.dim());
    return r;
}

cplx expectation_rate(const Liouvillian& L, const DensityMatrix& r, const SpMat& op) {
    const int d = L.layout.dim();
    Eigen::MatrixXcd dr = unvec(L.L * vec(r.rho), d);
    return trace_product(op, dr);
}

}
