#pragma once
#include <array>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "stab/errors.hpp"

namespace stab {

using cplx = std::complex<double>;

// Graded discretization of [0, Y_max] with finite-difference stencils and
// interpolatory per-cell quadrature. Immutable after construction.
struct Mesh {
  std::vector<double> nodes;  // strictly increasing, nodes[0] == 0 for built meshes
  double Ymax = 0.0;
  int order = 4;          // nominal stencil order (even, >= 2)
  double bl_scale = 1.0;  // grading descriptor: cluster scale near the wall
  double stretch = 0.0;   // grading descriptor: exponential stretch factor (0 = uniform)
  std::vector<double> weights;  // global quadrature weights (sum of cell weights)

  int n() const { return static_cast<int>(nodes.size()); }
  int max_deriv() const { return 4; }

  // k-th derivative of nodal samples, k in 1..4. One-sided windows at the
  // boundaries, centered inside; exact on polynomials of degree <= order+k-1.
  std::vector<cplx> derivative(std::span<const cplx> f, int k) const;
  std::vector<double> derivative(std::span<const double> f, int k) const;

  double integrate(std::span<const double> f) const;
  cplx integrate(std::span<const cplx> f) const;

  // cumulative integral: out[i] = integral of the interpolant over [0, Y_i]
  std::vector<double> cumint(std::span<const double> f) const;
  std::vector<cplx> cumint(std::span<const cplx> f) const;

  // integral of the interpolant over [a, b], 0 <= a <= b <= Ymax
  double integrate_between(std::span<const double> f, double a, double b) const;
  cplx integrate_between(std::span<const cplx> f, double a, double b) const;

  double interpolate(std::span<const double> f, double x) const;
  cplx interpolate(std::span<const cplx> f, double x) const;

  // derivative stencil row i for order-k derivative: window [start, start+m)
  struct Stencil {
    int start;
    int m;
    const double* w;
  };
  Stencil stencil(int i, int k) const;

  // weights of the k-th derivative (k=0 allowed) at arbitrary x. side=-1 pins
  // the window to the left boundary, +1 to the right, 0 centers it around x.
  std::pair<int, std::vector<double>> point_stencil(double x, int k, int side) const;

  int cell_of(double x) const;          // i with nodes[i] <= x, clamped to [0, n-2]
  int largest_node_leq(double x) const;

  static Mesh from_nodes(std::vector<double> nodes, int order, double bl_scale);

  // --- internal tables (built by finalize) ---
  struct DerivTable {
    int m = 0;
    std::vector<int> start;   // per row
    std::vector<double> w;    // row-major, n x m
  };
  std::array<DerivTable, 4> dtab;  // k = 1..4
  std::vector<int> cell_start;     // per cell: quadrature window start
  std::vector<double> cell_w;      // per cell: window weights, (n-1) x (order+2)

  void finalize();  // builds tables + quadrature, verifies exactness on monomials
};

// Graded mesh: uniform parameter through an exponential stretch so that at
// least min_bl_points nodes land in [0, bl_scale].
Mesh build_mesh(double Y_max, int n_nodes, double bl_scale, int min_bl_points = 24,
                int order = 4);

// Fornberg finite-difference weights: all derivatives 0..M at x0 over given
// nodes; out[k*m + j] = weight of f(x[j]) in the k-th derivative.
void fornberg_weights(const double* x, int m, double x0, int M, double* out);

double norm_l2(const Mesh& mesh, std::span<const cplx> f);
double norm_sup(std::span<const cplx> f);

// ----------------------------------------------------------------------------
// Banded complex linear algebra (LAPACK-style band storage, partial pivoting).

struct BandedMatrix {
  int n = 0, kl = 0, ku = 0;
  std::vector<cplx> ab;  // column-major, ldab = 2*kl + ku + 1; top kl rows = fill

  int ldab() const { return 2 * kl + ku + 1; }
  cplx& at(int i, int j) { return ab[static_cast<size_t>(j) * ldab() + (kl + ku + i - j)]; }
  cplx get(int i, int j) const {
    if (j - i > ku || i - j > kl) return {0.0, 0.0};
    return ab[static_cast<size_t>(j) * ldab() + (kl + ku + i - j)];
  }
  void init(int n_, int kl_, int ku_) {
    n = n_;
    kl = kl_;
    ku = ku_;
    ab.assign(static_cast<size_t>(ldab()) * n, cplx{0.0, 0.0});
  }
  std::vector<cplx> multiply(std::span<const cplx> x) const;
};

struct BandedLU {
  BandedMatrix m;         // factored in place (U in band, L multipliers below)
  std::vector<int> ipiv;
  double min_pivot = 0.0;

  // throws StabError{pivot_degeneracy} when a pivot falls below tol * max|A|
  static BandedLU factor(BandedMatrix a, double rel_pivot_tol = 1e-14);
  void solve(std::span<cplx> b) const;
};

// ----------------------------------------------------------------------------
// Boundary-value system: operator stencils on interior rows, boundary rows
// replacing the first nbc_lo / last nbc_hi rows.

struct BvpReport {
  double rel_residual = 0.0;
  double min_pivot = 0.0;
};

class BvpSystem {
 public:
  BvpSystem(const Mesh& mesh, int nbc_lo, int nbc_hi);

  // adds coeff(Y) * d^k/dY^k (k = 0..4) to every interior row
  void add_term(std::span<const cplx> coeff, int k);
  void add_term(cplx c, int k);
  void add_term(std::span<const double> coeff, cplx scale, int k);

  // boundary row: sum over (k, c) of c * (d^k u)(Y_eval) = value, where Y_eval
  // is the boundary node of the row's side. Row must be one of the first
  // nbc_lo or last nbc_hi rows; rows 0 / n-1 accept k <= 1, inner boundary
  // rows accept k <= 3 (band-width limits).
  void set_boundary(int row, std::initializer_list<std::pair<int, cplx>> terms,
                    cplx value);

  // right-hand side on interior rows (boundary rows keep set_boundary values)
  void set_rhs(std::span<const cplx> f);

  const Mesh& mesh() const { return *mesh_; }
  int first_interior() const { return nbc_lo_; }
  int last_interior() const { return mesh_->n() - 1 - nbc_hi_; }
  const BandedMatrix& matrix() const { return band_; }
  const std::vector<cplx>& rhs_vector() const { return rhs_; }

 private:
  const Mesh* mesh_;
  int nbc_lo_, nbc_hi_;
  BandedMatrix band_;
  std::vector<cplx> rhs_;
};

// banded LU solve; reports relative residual ||Ax-b||/||b|| and smallest pivot
std::vector<cplx> solve_bvp(const BvpSystem& sys, BvpReport* report = nullptr);

}  // namespace stab
