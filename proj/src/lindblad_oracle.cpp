#include "longi/lindblad_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "longi/errors.hpp"
#include "longi/io.hpp"
#include "longi/quadrature.hpp"

namespace longi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTopPopulationLimit = 1e-6;
constexpr int kWindowMargin = 8;

inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

void require_grid(std::span<const double> grid) {
  if (grid.size() < 2) throw InputError("time grid needs at least two points");
  if (grid[0] < 0.0) throw InputError("time grid must start at t >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InputError("time grid must be strictly increasing");
  }
}

double peak_abs(const std::function<double(double)>& f, double t0, double t1) {
  double peak = 0.0;
  constexpr int kScan = 257;
  for (int i = 0; i < kScan; ++i) peak = std::max(peak, std::abs(f(t0 + (t1 - t0) * i / (kScan - 1))));
  return peak;
}

struct Window {
  int lo = 0;
  int hi = -1;
  bool empty() const { return hi < lo; }
  bool operator==(const Window&) const = default;
};

// One qubit block rho_{ss'} of the density matrix. Storage is padded by a zero
// border so that element (n, m) lives at (n + 1, m + 1) and neighbours never
// need bounds checks. Diagonal blocks are Hermitian and only their upper
// triangle plus first subdiagonal is maintained.
struct Block {
  int row_branch = 0;
  int col_branch = 0;
  double s = 1.0;
  double sp = 1.0;
  bool upper = false;
  Window rows, cols;
  Eigen::MatrixXcd y, tmp;
  std::array<Eigen::MatrixXcd, 7> k;
};

class BlockPropagator {
 public:
  BlockPropagator(const CouplingModel& model, double kappa, const QubitCavityState& rho0,
                  const EvolutionConfig& cfg)
      : model_(model), kappa_(kappa), cfg_(cfg), n_(rho0.fock_truncation) {
    const int ld = n_ + 3;
    sq_.resize(n_ + 2);
    for (int i = 0; i <= n_ + 1; ++i) sq_[i] = std::sqrt(static_cast<double>(i));
    const int nf = n_ + 1;
    std::array<bool, 2> branch_active{};
    for (int q = 0; q < 2; ++q) {
      branch_active[q] = rho0.rho.block(q * nf, q * nf, nf, nf).diagonal().real().maxCoeff() > 0.0;
    }
    const auto make_block = [&](int rq, int cq) {
      Block b;
      b.row_branch = rq;
      b.col_branch = cq;
      b.s = rq == 0 ? 1.0 : -1.0;
      b.sp = cq == 0 ? 1.0 : -1.0;
      b.upper = rq == cq;
      b.y = Eigen::MatrixXcd::Zero(ld, ld);
      b.tmp = Eigen::MatrixXcd::Zero(ld, ld);
      for (auto& m : b.k) m = Eigen::MatrixXcd::Zero(ld, ld);
      return b;
    };
    for (int q = 0; q < 2; ++q) {
      if (branch_active[q]) blocks_.push_back(make_block(q, q));
    }
    if (branch_active[0] && branch_active[1] && rho0.rho.block(0, nf, nf, nf).cwiseAbs().maxCoeff() > 0.0) {
      blocks_.push_back(make_block(0, 1));
    }
    // Windows come from the initial diagonal, then the data inside them is copied.
    update_windows(&rho0);
    for (auto& b : blocks_) {
      for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
        for (int i = b.rows.lo; i <= b.rows.hi; ++i) {
          b.y(i + 1, m + 1) = rho0.rho(b.row_branch * nf + i, b.col_branch * nf + m);
        }
      }
    }
  }

  long steps() const { return steps_; }
  int truncation() const { return n_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  Complex beta_interaction(double t) const {
    return model_.beta(t) * std::polar(1.0, model_.cavity_angle(t));
  }

  void advance(double t0, double t1, double& h) {
    if (cfg_.method == Integrator::RK4) {
      const int sub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h - 1e-9)));
      const double step = (t1 - t0) / sub;
      for (int i = 0; i < sub; ++i) {
        rk4_step(t0 + i * step, step);
        ++steps_;
        update_windows(nullptr);
      }
      return;
    }
    double t = t0;
    int guard = 0;
    while (t < t1) {
      const bool last = t + h >= t1 * (1.0 - 1e-15) - 0.0 || t + h >= t1;
      const double step = last ? t1 - t : h;
      const double err = dopri_trial(t, step);
      if (!std::isfinite(err)) throw ResolutionError("RK45 step produced a non-finite state");
      if (err <= 1.0) {
        for (auto& b : blocks_) {
          std::swap(b.y, b.tmp);
          std::swap(b.k[0], b.k[6]);
        }
        fsal_ = true;
        t = last ? t1 : t + step;
        ++steps_;
        if (update_windows(nullptr)) fsal_ = false;
      }
      const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      const double proposal = step * std::clamp(factor, 0.2, 5.0);
      // A short final step must not shrink the carried step size.
      if (!(last && err <= 1.0)) h = proposal;
      if (h < 1e-14 * std::max(t1, 1e-300) || ++guard > 50'000'000) {
        throw ResolutionError("RK45 step size underflow");
      }
    }
  }

  // Observables in the interaction frame; <a> is rotated back by the caller.
  struct Snapshot {
    std::array<double, 2> population{};
    std::array<Complex, 2> a{};
    double n_mean = 0.0;
    double purity = 0.0;
    double top = 0.0;
  };

  Snapshot snapshot() const {
    Snapshot snap;
    for (const auto& b : blocks_) {
      if (b.upper) {
        const int q = b.row_branch;
        double pop = 0.0, nsum = 0.0, top = 0.0, pur = 0.0;
        Complex a = 0.0;
        for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
          const double d = b.y(m + 1, m + 1).real();
          pop += d;
          nsum += m * d;
          if (m >= n_ - 1) top += d;
          // <a> = sum_n sqrt(n+1) rho_{n+1,n} = sum_n sqrt(n+1) conj(rho_{n,n+1})
          if (m + 1 <= b.cols.hi) a += sq_[m + 1] * std::conj(b.y(m + 1, m + 2));
          for (int n = b.rows.lo; n < m; ++n) pur += 2.0 * std::norm(b.y(n + 1, m + 1));
          pur += d * d;
        }
        snap.population[q] = pop;
        snap.n_mean += nsum;
        snap.top += top;
        snap.purity += pur;
        snap.a[q] = pop > 0.0 ? a / pop : Complex(0.0);
      } else {
        double pur = 0.0;
        for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
          for (int n = b.rows.lo; n <= b.rows.hi; ++n) pur += std::norm(b.y(n + 1, m + 1));
        }
        snap.purity += 2.0 * pur;
      }
    }
    return snap;
  }

  // Dense state in the Schroedinger frame at time t.
  QubitCavityState dense_state(double t) const {
    const int nf = n_ + 1;
    QubitCavityState st;
    st.fock_truncation = n_;
    st.rho = Eigen::MatrixXcd::Zero(2 * nf, 2 * nf);
    const double phi = model_.cavity_angle(t);
    const double chi = model_.qubit_angle(t);
    for (const auto& b : blocks_) {
      const Complex qubit_phase = b.upper ? Complex(1.0) : std::polar(1.0, -chi);
      for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
        const int n_hi = b.upper ? m : b.rows.hi;
        for (int n = b.rows.lo; n <= n_hi; ++n) {
          const Complex v = b.y(n + 1, m + 1) * std::polar(1.0, -phi * (n - m)) * qubit_phase;
          const int r = b.row_branch * nf + n;
          const int c = b.col_branch * nf + m;
          st.rho(r, c) = v;
          st.rho(c, r) = std::conj(v);
        }
      }
    }
    return st;
  }

 private:
  // Active windows per branch from the diagonal of each populated branch.
  // Returns true when any block window changed.
  bool update_windows(const QubitCavityState* initial) {
    std::array<Window, 2> support{};
    const double thr = cfg_.support_threshold;
    const int nf = n_ + 1;
    for (int q = 0; q < 2; ++q) {
      int lo = -1, hi = -1;
      for (int i = 0; i <= n_; ++i) {
        double d = 0.0;
        if (initial) {
          d = initial->rho(q * nf + i, q * nf + i).real();
        } else {
          for (const auto& b : blocks_) {
            if (b.upper && b.row_branch == q) d = b.y(i + 1, i + 1).real();
          }
        }
        if (d > thr) {
          if (lo < 0) lo = i;
          hi = i;
        }
      }
      if (lo < 0) {
        support[q] = Window{};
        continue;
      }
      const Window want{std::max(0, lo - kWindowMargin), std::min(n_, hi + kWindowMargin)};
      const Window cur = branch_window_[q];
      const bool keep = !initial && !cur.empty() && cur.lo <= std::max(0, lo - kWindowMargin / 2) &&
                        cur.hi >= std::min(n_, hi + kWindowMargin / 2) && cur.lo >= lo - 2 * kWindowMargin &&
                        cur.hi <= hi + 2 * kWindowMargin;
      support[q] = keep ? cur : want;
    }
    bool changed = false;
    for (auto& b : blocks_) {
      const Window rows = support[b.row_branch];
      const Window cols = support[b.col_branch];
      if (rows == b.rows && cols == b.cols) continue;
      changed = true;
      if (!initial) {
        clear_outside(b.y, b, rows, cols);
        clear_outside(b.tmp, b, rows, cols);
      }
      b.rows = rows;
      b.cols = cols;
    }
    branch_window_ = support;
    return changed;
  }

  // Zeros everything in the old window that the new window does not cover,
  // including the subdiagonal band kept for Hermitian blocks.
  static void clear_outside(Eigen::MatrixXcd& mat, const Block& b, Window rows, Window cols) {
    if (b.rows.empty() || b.cols.empty()) return;
    const int r_lo = b.rows.lo, r_hi = std::min(b.rows.hi + 1, static_cast<int>(mat.rows()) - 3);
    for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
      const bool col_in = m >= cols.lo && m <= cols.hi;
      for (int n = r_lo; n <= r_hi; ++n) {
        if (!col_in || n < rows.lo || n > rows.hi) mat(n + 1, m + 1) = 0.0;
      }
    }
  }

  void fill_subdiagonal(Eigen::MatrixXcd& mat, const Block& b) const {
    for (int m = b.cols.lo; m < b.cols.hi; ++m) mat(m + 2, m + 1) = std::conj(mat(m + 1, m + 2));
  }

  void rhs(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out, const Block& b, Complex beta) const {
    const Eigen::Index ld = in.rows();
    const Complex* base = in.data();
    Complex* obase = out.data();
    const Complex row_up = b.s * beta;
    const Complex row_lo = b.s * std::conj(beta);
    const double kappa = kappa_;
    const double* sq = sq_.data();
    for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
      const Complex* c = base + (m + 1) * ld + 1;
      const Complex* cp = c + ld;
      const Complex* cm = c - ld;
      Complex* o = obase + (m + 1) * ld + 1;
      const Complex col_up = b.sp * beta * sq[m + 1];
      const Complex col_lo = b.sp * std::conj(beta) * sq[m];
      const double sq_m1 = sq[m + 1];
      const int n_hi = b.upper ? std::min(b.rows.hi, m) : b.rows.hi;
      for (int n = b.rows.lo; n <= n_hi; ++n) {
        const Complex k_rho = cmul(row_up, c[n - 1]) * sq[n] + cmul(row_lo, c[n + 1]) * sq[n + 1];
        const Complex rho_k = cmul(col_up, cp[n]) + cmul(col_lo, cm[n]);
        const Complex comm = k_rho - rho_k;
        const Complex diss = kappa * (sq[n + 1] * sq_m1 * cp[n + 1] - 0.5 * (n + m) * c[n]);
        o[n] = Complex(comm.imag() + diss.real(), -comm.real() + diss.imag());
      }
    }
  }

  // dst = y + h * sum_j w_j k_j over the block window.
  void combine(Block& b, Eigen::MatrixXcd& dst, double h, const double* w, int count) const {
    const Eigen::Index ld = dst.rows();
    std::array<const Complex*, 7> kp{};
    std::array<double, 7> hw{};
    int used = 0;
    for (int j = 0; j < count; ++j) {
      if (w[j] == 0.0) continue;
      kp[used] = b.k[j].data();
      hw[used] = h * w[j];
      ++used;
    }
    const Complex* yp = b.y.data();
    Complex* dp = dst.data();
    for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
      const int n_hi = b.upper ? std::min(b.rows.hi, m) : b.rows.hi;
      const Eigen::Index off = (m + 1) * ld + 1;
      for (int n = b.rows.lo; n <= n_hi; ++n) {
        Complex acc = yp[off + n];
        for (int j = 0; j < used; ++j) acc += hw[j] * kp[j][off + n];
        dp[off + n] = acc;
      }
    }
    if (b.upper) fill_subdiagonal(dst, b);
  }

  void stage(int index, double t, double h, const double* w, int count) {
    const Complex beta = beta_interaction(t);
    for (auto& b : blocks_) {
      if (count == 0) {
        rhs(b.y, b.k[index], b, beta);
      } else {
        combine(b, b.tmp, h, w, count);
        rhs(b.tmp, b.k[index], b, beta);
      }
    }
  }

  void rk4_step(double t, double h) {
    static constexpr double w2[] = {0.5};
    static constexpr double w3[] = {0.0, 0.5};
    static constexpr double w4[] = {0.0, 0.0, 1.0};
    static constexpr double wf[] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    stage(0, t, h, nullptr, 0);
    stage(1, t + 0.5 * h, h, w2, 1);
    stage(2, t + 0.5 * h, h, w3, 2);
    stage(3, t + h, h, w4, 3);
    for (auto& b : blocks_) {
      combine(b, b.tmp, h, wf, 4);
      std::swap(b.y, b.tmp);
    }
  }

  // Dormand-Prince 5(4) trial step; leaves the candidate in tmp and the
  // stage-7 slope in k[6]. Returns the scaled error norm.
  double dopri_trial(double t, double h) {
    static constexpr double c[] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a2[] = {1.0 / 5};
    static constexpr double a3[] = {3.0 / 40, 9.0 / 40};
    static constexpr double a4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
    static constexpr double a5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
    static constexpr double a6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656};
    static constexpr double a7[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
    static constexpr double e[] = {71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
    if (!fsal_) stage(0, t, h, nullptr, 0);
    stage(1, t + c[1] * h, h, a2, 1);
    stage(2, t + c[2] * h, h, a3, 2);
    stage(3, t + c[3] * h, h, a4, 3);
    stage(4, t + c[4] * h, h, a5, 4);
    stage(5, t + c[5] * h, h, a6, 5);
    stage(6, t + h, h, a7, 6);  // tmp now holds the 5th-order solution
    double worst = 0.0;
    for (auto& b : blocks_) {
      const Eigen::Index ld = b.y.rows();
      for (int m = b.cols.lo; m <= b.cols.hi; ++m) {
        const int n_hi = b.upper ? std::min(b.rows.hi, m) : b.rows.hi;
        const Eigen::Index off = (m + 1) * ld + 1;
        for (int n = b.rows.lo; n <= n_hi; ++n) {
          Complex err = 0.0;
          for (int j = 0; j < 7; ++j) {
            if (e[j] != 0.0) err += e[j] * b.k[j].data()[off + n];
          }
          const double scale =
              cfg_.atol + cfg_.rtol * std::max(std::abs(b.y.data()[off + n]), std::abs(b.tmp.data()[off + n]));
          worst = std::max(worst, h * std::abs(err) / scale);
        }
      }
    }
    return worst;
  }

  const CouplingModel& model_;
  double kappa_;
  EvolutionConfig cfg_;
  int n_;
  std::vector<double> sq_;
  std::vector<Block> blocks_;
  std::array<Window, 2> branch_window_{};
  bool fsal_ = false;
  long steps_ = 0;
};

}  // namespace

std::string_view to_string(Frame f) { return f == Frame::Rotating ? "Rotating" : "Lab"; }
std::string_view to_string(Integrator m) { return m == Integrator::RK4 ? "RK4" : "RK45"; }

Frame frame_from_string(std::string_view name) {
  if (name == "Rotating") return Frame::Rotating;
  if (name == "Lab") return Frame::Lab;
  throw InputError("unknown frame '" + std::string(name) + "'");
}

Integrator integrator_from_string(std::string_view name) {
  if (name == "RK4") return Integrator::RK4;
  if (name == "RK45") return Integrator::RK45;
  throw InputError("unknown integrator '" + std::string(name) + "'");
}

void QubitCavityState::validate(double hermitian_tol, double trace_tol, double eigen_floor) const {
  if (fock_truncation < 1) throw InputError("Fock truncation must be at least 1");
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw DimensionError("density matrix is " + std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()) +
                         ", expected " + std::to_string(dim()));
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol) throw InputError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > trace_tol) throw InputError("density matrix trace differs from 1");
  if (dim() <= 512) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eigen_floor) throw InputError("density matrix has a negative eigenvalue");
  }
}

QubitCavityState QubitCavityState::pure(Complex c_e, Complex c_g, int fock_truncation, Complex alpha) {
  if (fock_truncation < 1) throw InputError("Fock truncation must be at least 1");
  const double norm = std::sqrt(std::norm(c_e) + std::norm(c_g));
  if (!(norm > 0.0)) throw InputError("qubit amplitudes are both zero");
  const int nf = fock_truncation + 1;
  Eigen::VectorXcd cav(nf);
  cav(0) = 1.0;
  for (int n = 1; n < nf; ++n) cav(n) = cav(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  cav.normalize();
  Eigen::VectorXcd psi(2 * nf);
  psi.head(nf) = (c_e / norm) * cav;
  psi.tail(nf) = (c_g / norm) * cav;
  return QubitCavityState{fock_truncation, psi * psi.adjoint()};
}

QubitCavityState QubitCavityState::branch_mixture(double p_e, int fock_truncation) {
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw InputError("branch weight must lie in [0, 1]");
  if (fock_truncation < 1) throw InputError("Fock truncation must be at least 1");
  const int nf = fock_truncation + 1;
  QubitCavityState st{fock_truncation, Eigen::MatrixXcd::Zero(2 * nf, 2 * nf)};
  st.rho(0, 0) = p_e;
  st.rho(nf, nf) = 1.0 - p_e;
  return st;
}

void EvolutionConfig::validate() const {
  if (fock_truncation < 1) throw InputError("fock_truncation must be at least 1");
  if (dt < 0.0) throw InputError("dt must be non-negative");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InputError("RK45 tolerances must be positive");
  if (!(support_threshold >= 0.0)) throw InputError("support_threshold must be non-negative");
}

double EvolutionConfig::default_dt(const SystemParams& p) const {
  const double coarse = p.t_f / 20000.0;
  if (frame == Frame::Lab) return std::min(2.0 * kPi / (200.0 * p.omega_r), coarse);
  return coarse;
}

CouplingModel rotating_model(const Modulation& gz) {
  CouplingModel m;
  m.beta = [gz](double t) { return Complex(gz.value(std::min(t, gz.t_f()))); };
  m.cavity_angle = [](double) { return 0.0; };
  m.qubit_angle = [](double) { return 0.0; };
  m.max_rate = peak_abs([&](double t) { return gz.value(t); }, 0.0, gz.t_f());
  m.label = "rotating";
  return m;
}

CouplingModel lab_model(const SystemParams& p, const Modulation& gz) {
  CouplingModel m = rotating_model(gz);
  const double wr = p.omega_r, wq = p.omega_q;
  m.cavity_angle = [wr](double t) { return wr * t; };
  m.qubit_angle = [wq](double t) { return wq * t; };
  m.max_rate = std::max({m.max_rate, wr, std::abs(wq)});
  m.label = "lab";
  return m;
}

CouplingModel cd_model(const Modulation& gz, double omega_r, bool with_coupling) {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  CouplingModel m = rotating_model(gz);
  m.beta = [gz, omega_r, with_coupling](double t) {
    const double tt = std::min(t, gz.t_f());
    return Complex(with_coupling ? gz.value(tt) : 0.0, -gz.derivative(tt, 1) / omega_r);
  };
  const double cd_peak = peak_abs([&](double t) { return gz.derivative(t, 1) / omega_r; }, 0.0, gz.t_f());
  m.max_rate = with_coupling ? std::max(m.max_rate, cd_peak) : cd_peak;
  m.label = with_coupling ? "rotating+cd" : "cd";
  return m;
}

CouplingModel floquet_model(const FloquetDrive& drive) {
  CouplingModel m;
  const double Omega = drive.spec().Omega;
  const double nu = drive.spec().nu;
  const double t_end = drive.gz().t_f();
  m.beta = [drive, t_end](double t) { return Complex(drive.at(std::min(t, t_end)).coupling_amp); };
  // Omega nu sin(nu t) multiplies a^dag a and sigma^z, so the qubit rate is twice that.
  m.cavity_angle = [Omega, nu](double t) { return Omega * (1.0 - std::cos(nu * t)); };
  m.qubit_angle = [Omega, nu](double t) { return 2.0 * Omega * (1.0 - std::cos(nu * t)); };
  const double coupling_peak = peak_abs([&](double t) { return drive.at(t).coupling_amp; }, 0.0, t_end);
  m.max_rate = std::max(2.0 * std::abs(Omega) * nu, coupling_peak);
  m.label = "floquet";
  return m;
}

Eigen::MatrixXcd annihilation(int fock_truncation) {
  const int nf = fock_truncation + 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nf, nf);
  for (int n = 1; n < nf; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::MatrixXcd embed_cavity(const Eigen::MatrixXcd& op) {
  const Eigen::Index nf = op.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * nf, 2 * nf);
  out.topLeftCorner(nf, nf) = op;
  out.bottomRightCorner(nf, nf) = op;
  return out;
}

Eigen::MatrixXcd sigma_z_operator(int fock_truncation) {
  const int nf = fock_truncation + 1;
  Eigen::VectorXcd diag(2 * nf);
  diag.head(nf).setConstant(1.0);
  diag.tail(nf).setConstant(-1.0);
  return diag.asDiagonal();
}

Eigen::MatrixXcd build_hamiltonian(const SystemParams& p, const Modulation& gz, Frame frame, double t,
                                   int fock_truncation) {
  if (fock_truncation < 1) throw InputError("Fock truncation must be at least 1");
  const Eigen::MatrixXcd a = annihilation(fock_truncation);
  const Eigen::MatrixXcd x = a + a.adjoint();
  const Eigen::MatrixXcd sz = sigma_z_operator(fock_truncation);
  Eigen::MatrixXcd h = gz.value(t) * sz * embed_cavity(x);
  if (frame == Frame::Lab) {
    h += 0.5 * p.omega_q * sz + p.omega_r * embed_cavity(a.adjoint() * a);
  }
  return h;
}

Complex expectation(const Eigen::MatrixXcd& op, const QubitCavityState& state) {
  if (op.rows() != state.rho.rows() || op.cols() != state.rho.cols()) {
    throw DimensionError("operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                         " but the state is " + std::to_string(state.rho.rows()) + "x" +
                         std::to_string(state.rho.cols()));
  }
  return (op * state.rho).trace();
}

CavityTrajectory OracleResult::trajectory() const {
  return CavityTrajectory{times, alpha_e, alpha_g, kappa};
}

double OracleResult::max_trace_drift() const {
  double worst = 0.0;
  for (double tr : trace) worst = std::max(worst, std::abs(tr - trace.front()));
  return worst;
}

double OracleResult::max_sigma_z_drift() const {
  double worst = 0.0;
  for (double sz : sigma_z) worst = std::max(worst, std::abs(sz - sigma_z.front()));
  return worst;
}

OracleResult evolve_model(const CouplingModel& model, double kappa, const QubitCavityState& rho0,
                          const EvolutionConfig& cfg, std::span<const double> grid) {
  cfg.validate();
  require_grid(grid);
  if (!(kappa >= 0.0)) throw InputError("kappa must be non-negative");
  if (rho0.fock_truncation != cfg.fock_truncation) {
    throw DimensionError("initial state truncation " + std::to_string(rho0.fock_truncation) +
                         " differs from fock_truncation " + std::to_string(cfg.fock_truncation));
  }
  rho0.validate(1e-12, 1e-10);

  const double span = grid.back() - grid.front();
  double dt = cfg.dt;
  if (dt == 0.0) {
    dt = span / 20000.0;
    if (model.max_rate > 0.0) dt = std::min(dt, 2.0 * kPi / (200.0 * model.max_rate));
  }
  if (cfg.method == Integrator::RK4 && model.max_rate > 0.0 && dt >= 2.0 * kPi / (50.0 * model.max_rate)) {
    throw InputError("dt " + io::number(dt) + " is too coarse for the fastest rate " + io::number(model.max_rate));
  }

  BlockPropagator prop(model, kappa, rho0, cfg);
  OracleResult out;
  out.kappa = kappa;
  out.fock_truncation = cfg.fock_truncation;
  const int n = cfg.fock_truncation;

  auto record = [&](double t) {
    const auto snap = prop.snapshot();
    if (snap.top > kTopPopulationLimit) {
      throw TruncationError("population " + io::number(snap.top) + " in the top two Fock levels at t = " +
                                io::number(t) + " exceeds 1e-6 with N = " + std::to_string(n),
                            2 * n + 2);
    }
    const Complex back = std::polar(1.0, -model.cavity_angle(t));
    out.times.push_back(t);
    out.alpha_e.push_back(snap.a[0] * back);
    out.alpha_g.push_back(snap.a[1] * back);
    out.n_mean.push_back(snap.n_mean);
    out.sigma_z.push_back(snap.population[0] - snap.population[1]);
    out.purity.push_back(snap.purity);
    out.trace.push_back(snap.population[0] + snap.population[1]);
    if (cfg.store_states) out.states.push_back(prop.dense_state(t));
  };

  record(grid[0]);
  double h = dt;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    prop.advance(grid[i - 1], grid[i], h);
    record(grid[i]);
  }
  out.steps = prop.steps();
  return out;
}

OracleResult evolve_master(const SystemParams& p, const Modulation& gz, const QubitCavityState& rho0,
                           const EvolutionConfig& cfg, std::span<const double> grid) {
  p.validate();
  EvolutionConfig resolved = cfg;
  if (resolved.dt == 0.0) resolved.dt = resolved.default_dt(p);
  const CouplingModel model = cfg.frame == Frame::Lab ? lab_model(p, gz) : rotating_model(gz);
  return evolve_model(model, p.kappa, rho0, resolved, grid);
}

double oracle_agreement(const OracleResult& oracle, const CavityTrajectory& analytic) {
  if (oracle.times.size() != analytic.times.size()) {
    throw AlignmentError("oracle and analytic trajectories use different grids");
  }
  double scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < oracle.times.size(); ++i) {
    if (std::abs(oracle.times[i] - analytic.times[i]) > 1e-12 * std::max(1e-300, std::abs(analytic.times[i]))) {
      throw AlignmentError("oracle and analytic time grids differ at index " + std::to_string(i));
    }
    scale = std::max({scale, std::abs(analytic.alpha_e[i]), std::abs(analytic.alpha_g[i])});
  }
  if (!(scale > 0.0)) scale = 1.0;
  for (std::size_t i = 0; i < oracle.times.size(); ++i) {
    // Empty branches carry no conditional field and are skipped.
    if (oracle.alpha_e[i] != Complex(0.0) || analytic.alpha_e[i] == Complex(0.0)) {
      worst = std::max(worst, std::abs(oracle.alpha_e[i] - analytic.alpha_e[i]));
    }
    if (oracle.alpha_g[i] != Complex(0.0) || analytic.alpha_g[i] == Complex(0.0)) {
      worst = std::max(worst, std::abs(oracle.alpha_g[i] - analytic.alpha_g[i]));
    }
  }
  return worst / scale;
}

double euler_lagrange_residual(const Modulation& gc, const Modulation& gz, double omega_r) {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  if (std::abs(gc.t_f() - gz.t_f()) > 1e-12 * gc.t_f()) throw InputError("g_c and g_z have different durations");
  const auto grid = uniform_grid(gc.t_f(), 1000);
  double scale = 0.0, worst = 0.0;
  const double w2 = omega_r * omega_r;
  for (double t : grid) {
    scale = std::max(scale, std::abs(gc.value(t)));
    worst = std::max(worst, std::abs(gc.derivative(t, 2) + w2 * (gc.value(t) - gz.value(t))));
  }
  if (scale == 0.0) {
    for (double t : grid) scale = std::max(scale, std::abs(gz.value(t)));
    if (scale == 0.0) return 0.0;
  }
  return worst / (w2 * scale);
}

FrameCheckResult frame_elimination_check(const SystemParams& p, const Modulation& gc, const Modulation& gz,
                                         std::span<const double> grid, const FrameCheckConfig& cfg) {
  p.validate();
  require_grid(grid);
  if (cfg.fock_truncation < 2) throw InputError("fock_truncation must be at least 2");
  const double w = p.omega_r;
  const double el = euler_lagrange_residual(gc, gz, w);
  if (el > cfg.el_tolerance) {
    throw PreconditionError("(g_c, g_z) violate the Euler-Lagrange relation: residual " + io::number(el));
  }
  const int nf = cfg.fock_truncation + 1;
  const double s = sigma_z(cfg.branch);
  const Eigen::MatrixXcd a = annihilation(cfg.fock_truncation);
  const Eigen::MatrixXcd ad = a.adjoint();
  const Eigen::MatrixXcd x = a + ad;
  const Eigen::MatrixXcd y = ad - a;
  std::vector<double> sq(nf + 1);
  for (int n = 0; n <= nf; ++n) sq[n] = std::sqrt(static_cast<double>(n));

  // Interaction picture with respect to omega_r a^dag a:
  // i d psi/dt = s g_z(t) (e^{i w t} a^dag + e^{-i w t} a) psi.
  auto deriv = [&](double t, const Eigen::VectorXcd& psi) {
    const Complex b = s * gz.value(std::min(t, gz.t_f())) * std::polar(1.0, w * t);
    Eigen::VectorXcd out(nf);
    for (int n = 0; n < nf; ++n) {
      Complex v = 0.0;
      if (n > 0) v += b * sq[n] * psi(n - 1);
      if (n + 1 < nf) v += std::conj(b) * sq[n + 1] * psi(n + 1);
      out(n) = Complex(v.imag(), -v.real());
    }
    return out;
  };

  const double dt = cfg.dt > 0.0 ? cfg.dt : std::min(2.0 * kPi / (200.0 * w), p.t_f / 20000.0);
  const double l_scale = 1e-12 * (std::abs(gc.value(0.5 * gc.t_f())) + 1.0);
  auto lagrangian = [&](double t) {
    const double g = gc.value(t), gd = gc.derivative(t, 1);
    return gd * gd / (w * w * w) - g * g / w + 2.0 * g * gz.value(t) / w;
  };

  FrameCheckResult out;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(nf);
  psi(0) = 1.0;
  double t = 0.0, theta = 0.0;
  if (grid[0] > 0.0) {
    theta -= quad::adaptive_simpson(lagrangian, 0.0, grid[0], l_scale * grid[0], 8);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double target = grid[i];
    if (target > t) {
      const int sub = std::max(1, static_cast<int>(std::ceil((target - t) / dt - 1e-9)));
      const double h = (target - t) / sub;
      for (int k = 0; k < sub; ++k) {
        const double tk = t + k * h;
        const Eigen::VectorXcd k1 = deriv(tk, psi);
        const Eigen::VectorXcd k2 = deriv(tk + 0.5 * h, psi + 0.5 * h * k1);
        const Eigen::VectorXcd k3 = deriv(tk + 0.5 * h, psi + 0.5 * h * k2);
        const Eigen::VectorXcd k4 = deriv(tk + h, psi + h * k3);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (i > 0) theta -= quad::adaptive_simpson(lagrangian, t, target, l_scale * (target - t), 4);
      t = target;
    }
    // Schroedinger-frame state and the ansatz e^{-i E_LC t} V(t) |0>.
    Eigen::VectorXcd direct(nf);
    for (int n = 0; n < nf; ++n) direct(n) = std::polar(1.0, -w * n * t) * psi(n);
    const double g = gc.value(t), gd = gc.derivative(t, 1);
    const Eigen::MatrixXcd disp = (Complex(-g * s / w) * y).exp();
    const Eigen::MatrixXcd kick = (Complex(0.0, -gd * s / (w * w)) * x).exp();
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(nf);
    vac(0) = 1.0;
    const Eigen::VectorXcd ansatz = std::polar(1.0, theta - 0.5 * w * t) * (kick * (disp * vac));
    out.times.push_back(t);
    out.fidelity.push_back(std::norm(ansatz.dot(direct)));
    out.theta.push_back(theta);
  }
  return out;
}

std::string oracle_csv(const OracleResult& result) {
  const auto traj = result.trajectory();
  const auto d = pointer_separation(traj);
  io::CsvWriter csv({"t", "re_alpha_e", "im_alpha_e", "re_alpha_g", "im_alpha_g", "d", "n", "purity"});
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    csv.row({result.times[i], result.alpha_e[i].real(), result.alpha_e[i].imag(), result.alpha_g[i].real(),
             result.alpha_g[i].imag(), d[i], result.n_mean[i], result.purity[i]});
  }
  return csv.str();
}

}  // namespace longi
