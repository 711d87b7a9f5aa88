#pragma once
#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stab/mesh.hpp"

namespace stab {

// Admissible background shear: U_s(0)=0, U_s>0, du0>0, cubic-decay derivatives.
struct ShearProfile {
  std::function<double(double)> u, du, ddu;
  double u_inf = 1.0;      // U_E
  double du0 = 1.0;        // U_s'(0)
  double ddu0 = 0.0;       // U_s''(0)
  double y0 = 1.0;         // monotonicity radius: du > 0 on [0, 4*y0]
  double decay_norm = 0.0; // sup (1+Y)^3 (|du|+|ddu|)
  std::string kind;

  std::vector<double> sample(const Mesh& m, int deriv = 0) const;
};

// kind: "exp" (U_E(1-e^-Y)), "tanh" (U_E tanh Y), "table" (cubic spline of
// (Y, U_s) samples). Throws StabError{assumption} naming the violated
// admissibility assumption.
ShearProfile make_profile(const std::string& kind, double U_E = 1.0,
                          const std::vector<std::array<double, 2>>& table = {});

// Complex samples over a shared mesh with lazily cached norms.
class Field {
 public:
  Field() = default;
  Field(std::shared_ptr<const Mesh> mesh, std::vector<cplx> values);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const std::vector<cplx>& values() const { return v_; }
  std::span<const cplx> span() const { return {v_.data(), v_.size()}; }
  int n() const { return static_cast<int>(v_.size()); }
  cplx operator[](int i) const { return v_[i]; }

  double l2() const;   // quadrature-weighted L2 norm
  double sup() const;  // max modulus

  Field(const Field& o) : mesh_(o.mesh_), v_(o.v_) {}
  Field& operator=(const Field& o) {
    mesh_ = o.mesh_;
    v_ = o.v_;
    l2c_.store(-1.0);
    supc_.store(-1.0);
    return *this;
  }
  Field(Field&&) noexcept = default;
  Field& operator=(Field&&) noexcept = default;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<cplx> v_;
  mutable std::atomic<double> l2c_{-1.0}, supc_{-1.0};  // negative = not cached
};

// Relative mismatch of the two quadrature routes at the probe point y0/2;
// degraded set when it exceeds the configured tolerance.
struct AccuracyReport {
  double split_mismatch = 0.0;
  bool degraded = false;
};

// sigma[f](Y) = int_Y^inf f, truncated-tail estimated from an exponential fit.
std::vector<cplx> op_sigma(const Mesh& m, std::span<const cplx> f);

// L[f](Y) = U_s(Y) int_Y^inf f/U_s^2, integrated by parts against (1/U_s)'
// below the monotonicity radius so no 0*inf is ever formed; L[f](0) = f(0)/du0.
std::vector<cplx> op_L(const Mesh& m, const ShearProfile& p, std::span<const cplx> f,
                       AccuracyReport* rep = nullptr, double tol = 1e-5);

// K[f] = L[sigma[f]]
std::vector<cplx> op_K(const Mesh& m, const ShearProfile& p, std::span<const cplx> f,
                       AccuracyReport* rep = nullptr, double tol = 1e-5);

// G_s(Y) = U_s(Y) int_Y^{y0} 1/U_s^2; G_s(0) = 1/du0 exactly.
std::vector<double> compute_Gs(const Mesh& m, const ShearProfile& p,
                               AccuracyReport* rep = nullptr, double tol = 1e-5);

// f/U_s with the L'Hopital limit f'(0)/du0 at the wall (callers pass f(0)=0).
std::vector<cplx> div_by_us(const Mesh& m, const ShearProfile& p, std::span<const cplx> f);

Field op_sigma(const Field& f);
Field op_L(const Field& f, const ShearProfile& p);
Field op_K(const Field& f, const ShearProfile& p);

}  // namespace stab
