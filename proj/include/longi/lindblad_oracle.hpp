#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "longi/cavity_dynamics.hpp"
#include "longi/cd_floquet.hpp"
#include "longi/pulse_design.hpp"

namespace longi {

enum class Frame { Rotating, Lab };
enum class Integrator { RK4, RK45 };

std::string_view to_string(Frame f);
std::string_view to_string(Integrator m);
Frame frame_from_string(std::string_view name);
Integrator integrator_from_string(std::string_view name);

/// Density matrix on qubit x Fock space truncated at N photons. Basis index
/// q * (N + 1) + n with q = 0 for |e> (sigma^z = +1) and q = 1 for |g>.
struct QubitCavityState {
  int fock_truncation = 0;
  Eigen::MatrixXcd rho;

  int dim_fock() const { return fock_truncation + 1; }
  int dim() const { return 2 * dim_fock(); }

  /// Hermiticity, unit trace and positivity (eigenvalue floor). The
  /// eigen-decomposition is skipped above dimension 512.
  void validate(double hermitian_tol = 1e-12, double trace_tol = 1e-10,
                double eigen_floor = -1e-10) const;

  /// (c_e |e> + c_g |g>) (x) |alpha>; the coherent state is normalized on the
  /// truncated space.
  static QubitCavityState pure(Complex c_e, Complex c_g, int fock_truncation, Complex alpha = 0.0);
  /// p_e |e><e| + (1 - p_e) |g><g|, cavity in vacuum.
  static QubitCavityState branch_mixture(double p_e, int fock_truncation);
};

struct EvolutionConfig {
  /// Step for RK4, initial step for RK45; 0 selects the default.
  double dt = 0.0;
  Integrator method = Integrator::RK4;
  int fock_truncation = 20;
  Frame frame = Frame::Rotating;
  bool store_states = false;
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Fock levels whose population in every branch stays below this value are
  /// left out of the integration window. |rho_nm| <= sqrt(rho_nn rho_mm) bounds
  /// what is dropped. Values near the rounding floor let round-off noise widen
  /// the window without improving accuracy.
  double support_threshold = 1e-14;

  void validate() const;
  /// min(2 pi / (200 omega_r), t_f / 20000) in the lab frame, t_f / 20000 otherwise.
  double default_dt(const SystemParams& p) const;
};

/// H(t) = (chi'(t)/2) sigma^z + Phi'(t) a^dag a + sigma^z (beta(t) a^dag + conj(beta(t)) a).
/// The oracle integrates in the frame rotating with the number term, where
/// the coupling becomes beta(t) e^{i Phi(t)}.
struct CouplingModel {
  std::function<Complex(double)> beta;
  std::function<double(double)> cavity_angle;
  std::function<double(double)> qubit_angle;
  /// Largest frequency in H, used for the step-size guard.
  double max_rate = 0.0;
  std::string label;
};

/// g_z(t) sigma^z (a^dag + a).
CouplingModel rotating_model(const Modulation& gz);
/// omega_q/2 sigma^z + omega_r a^dag a + g_z(t) sigma^z (a^dag + a).
CouplingModel lab_model(const SystemParams& p, const Modulation& gz);
/// Counter-diabatic term -i (g_z'/omega_r) sigma^z (a^dag - a), optionally on
/// top of the rotating-frame coupling.
CouplingModel cd_model(const Modulation& gz, double omega_r, bool with_coupling);
/// Floquet Hamiltonian Omega nu sin(nu t)(sigma^z + a^dag a) + lambda(t) sigma^z (a^dag + a).
CouplingModel floquet_model(const FloquetDrive& drive);

/// Dense H(t) on the 2(N+1) space in the given frame.
Eigen::MatrixXcd build_hamiltonian(const SystemParams& p, const Modulation& gz, Frame frame, double t,
                                   int fock_truncation);

Eigen::MatrixXcd annihilation(int fock_truncation);
/// I_2 (x) op and sigma^z (x) I on the joint space.
Eigen::MatrixXcd embed_cavity(const Eigen::MatrixXcd& op);
Eigen::MatrixXcd sigma_z_operator(int fock_truncation);

/// Tr(op rho); DimensionError on mismatch.
Complex expectation(const Eigen::MatrixXcd& op, const QubitCavityState& state);

struct OracleResult {
  std::vector<double> times;
  /// Conditional <a> per branch, Tr(a rho_ss) / Tr(rho_ss); 0 for an empty branch.
  std::vector<Complex> alpha_e;
  std::vector<Complex> alpha_g;
  std::vector<double> n_mean;
  std::vector<double> sigma_z;
  std::vector<double> purity;
  std::vector<double> trace;
  std::vector<QubitCavityState> states;
  double kappa = 0.0;
  long steps = 0;
  int fock_truncation = 0;

  CavityTrajectory trajectory() const;
  double max_trace_drift() const;
  double max_sigma_z_drift() const;
};

/// Lindblad evolution drho/dt = -i[H, rho] + kappa (a rho a^dag - {a^dag a, rho}/2)
/// on `grid` (strictly increasing, rho0 given at grid[0]). Throws
/// TruncationError when the top two Fock levels hold more than 1e-6.
OracleResult evolve_master(const SystemParams& p, const Modulation& gz, const QubitCavityState& rho0,
                           const EvolutionConfig& cfg, std::span<const double> grid);
OracleResult evolve_model(const CouplingModel& model, double kappa, const QubitCavityState& rho0,
                          const EvolutionConfig& cfg, std::span<const double> grid);

/// Largest relative deviation max_t |<a>_oracle - <a>_analytic| / max_t |<a>_analytic|
/// over both branches.
double oracle_agreement(const OracleResult& oracle, const CavityTrajectory& analytic);

/// max over 1000 points of |g_c'' + omega_r^2 (g_c - g_z)| / (omega_r^2 max|g_c|).
double euler_lagrange_residual(const Modulation& gc, const Modulation& gz, double omega_r);

struct FrameCheckConfig {
  int fock_truncation = 20;
  double dt = 0.0;
  Branch branch = Branch::Excited;
  double el_tolerance = 1e-6;
};

struct FrameCheckResult {
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<double> theta;
};

/// Lab-frame Schroedinger evolution of |l>|0> (kappa ignored) against the
/// ansatz e^{-i E_LC t} V(t)|0>|l>. Throws PreconditionError if (gc, gz)
/// violate the Euler-Lagrange relation beyond cfg.el_tolerance.
FrameCheckResult frame_elimination_check(const SystemParams& p, const Modulation& gc, const Modulation& gz,
                                         std::span<const double> grid, const FrameCheckConfig& cfg = {});

/// Trajectory CSV columns plus n and purity.
std::string oracle_csv(const OracleResult& result);

}  // namespace longi
