#pragma once

#include "srsync/model.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

// Exact density-matrix oracle for a few atoms per ensemble. Atoms are qubits
// with |e> = 1; ensemble A occupies sites 0..n-1 and B sites n..2n-1, followed
// by up to two truncated cavity modes. Site 0 is the fastest-varying index.
namespace srsync::exact {

using SpMat = Eigen::SparseMatrix<cplx>;

class ExactError : public SolverError {
public:
    using SolverError::SolverError;
};

struct Layout {
    int n_a = 1;
    int n_b = 1;
    int n_modes = 0;
    int n_max = 0;  // photon cutoff per mode

    int atom_dim() const { return 1 << (n_a + n_b); }
    int mode_dim() const { return n_modes == 0 ? 1 : n_modes == 1 ? n_max + 1 : (n_max + 1) * (n_max + 1); }
    int dim() const { return atom_dim() * mode_dim(); }
};

// Operator factory over a Layout.
class Operators {
public:
    explicit Operators(const Layout& l);
    const Layout& layout() const { return l_; }
    int dim() const { return l_.dim(); }

    SpMat identity() const;
    // atom index k in [0, n_a + n_b)
    SpMat sigma_plus(int k) const;
    SpMat sigma_minus(int k) const;
    SpMat sigma_z(int k) const;
    // ensemble 0 = A, 1 = B
    SpMat j_minus(int ensemble) const;
    SpMat j_plus(int ensemble) const;
    SpMat j_z(int ensemble) const;  // (1/2) sum sigma_z
    // mode 0 = a, 1 = b
    SpMat annihilate(int mode) const;
    SpMat number(int mode) const;

private:
    SpMat embed(const Eigen::MatrixXcd& local, int site_stride, int local_dim) const;
    Layout l_;
};

struct Collapse {
    double rate = 0.0;
    SpMat op;
    double nbar = 0.0;  // adds rate * nbar * D[op^dag] and scales D[op] by 1 + nbar
};

struct LindbladSpec {
    SpMat hamiltonian;
    std::vector<Collapse> collapse;
};

struct Mode {
    enum Kind { Eliminated, FullCavity } kind = Eliminated;
    int n_max = 5;
    // 0 selects 50 * max(w, n_small * gamma).
    double kappa = 0.0;
};

struct Liouvillian {
    Layout layout;
    SpMat L;
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(L); }
};

LindbladSpec lindblad_spec(Scenario sc, const ModelParams& p, int n_small, const Mode& mode);
Liouvillian assemble(const Layout& layout, const LindbladSpec& spec);

// gamma is taken from p (collective_rate / n_atoms); n_small atoms per ensemble.
Liouvillian build_liouvillian(Scenario sc, const ModelParams& p, int n_small,
                              const Mode& mode = {});

struct DensityMatrix {
    Layout layout;
    Eigen::MatrixXcd rho;
    int dim() const { return static_cast<int>(rho.rows()); }
};

struct InvariantReport {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    bool ok(double trace_tol = 1e-9, double herm_tol = 1e-12, double pos_tol = -1e-9) const {
        return trace_error <= trace_tol && hermiticity_error <= herm_tol && min_eigenvalue >= pos_tol;
    }
};

InvariantReport check_invariants(const DensityMatrix& r);

DensityMatrix steady_state_exact(const Liouvillian& L);
DensityMatrix evolve(const DensityMatrix& rho0, const Liouvillian& L, double t);

CorrelationState expectations(const DensityMatrix& r, double symmetry_tol = 1e-10);

// Population of the top two Fock levels, maximised over modes.
double top_fock_population(const DensityMatrix& r);

// Full-cavity steady state that raises n_max from mode.n_max up to 6 until the
// top two Fock levels hold less than 1e-4.
DensityMatrix steady_state_full_cavity(Scenario sc, const ModelParams& p, int n_small, Mode mode);

DensityMatrix product_state(const Layout& l, const std::vector<double>& excited_prob);
DensityMatrix maximally_mixed(const Layout& l);

// d<O>/dt = Tr(O L[rho]).
cplx expectation_rate(const Liouvillian& L, const DensityMatrix& r, const SpMat& op);

}
