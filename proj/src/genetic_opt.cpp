#include "longi/genetic_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "longi/cavity_dynamics.hpp"
#include "longi/errors.hpp"
#include "longi/io.hpp"
#include "longi/parallel.hpp"

namespace longi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFeasibleTolerance = 1e-3;

// Affine parameterization x = scale * (x_p + Z z) of all coefficient vectors
// meeting the six boundary conditions, the displacement target and d_0 = 0.
struct FeasibleSet {
  Eigen::VectorXd particular;
  Eigen::MatrixXd basis;
  double scale = 1.0;

  int dim() const { return static_cast<int>(basis.cols()); }

  std::vector<double> decode(const std::vector<double>& z) const {
    Eigen::VectorXd x = particular;
    if (dim() > 0) x += basis * Eigen::Map<const Eigen::VectorXd>(z.data(), dim());
    x *= scale;
    return {x.data(), x.data() + x.size()};
  }

  std::vector<double> project(const std::vector<double>& coeffs) const {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    const Eigen::VectorXd z = basis.transpose() * (x / scale - particular);
    return {z.data(), z.data() + z.size()};
  }
};

FeasibleSet feasible_set(const SystemParams& p, int n_coeffs, double horizon) {
  const int terms = n_coeffs / 2;
  const double target = p.g_z0 * kPi / (2.0 * p.kappa);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8, n_coeffs);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(8);
  for (int m = 0; m < terms; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const double w = m * kPi;
    const int c = 2 * m, d = 2 * m + 1;
    a(0, c) = 1.0;              // g(0)
    a(1, c) = sign;             // g(h)
    a(2, d) = w;                // h g'(0)
    a(3, d) = w * sign;         // h g'(h)
    a(4, c) = -w * w;           // h^2 g''(0)
    a(5, c) = -w * w * sign;    // h^2 g''(h)
    if (m == 0) {
      a(6, c) = 1.0;
    } else {
      a(6, d) = (1.0 - sign) / w;
    }
  }
  a(7, 1) = 1.0;  // d_0 carries no waveform
  b(6) = 1.0;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-10 * (sv.size() > 0 ? sv(0) : 1.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cut ? 1 : 0;

  FeasibleSet fs;
  fs.scale = target / horizon;
  Eigen::VectorXd ub = svd.matrixU().transpose() * b;
  Eigen::VectorXd coords = Eigen::VectorXd::Zero(n_coeffs);
  for (int i = 0; i < rank; ++i) coords(i) = ub(i) / sv(i);
  fs.particular = svd.matrixV() * coords;
  fs.basis = svd.matrixV().rightCols(n_coeffs - rank);
  if ((a * fs.particular - b).norm() > 1e-9) {
    throw InfeasibleError("no " + std::to_string(n_coeffs) +
                          "-coefficient series meets the boundary and displacement constraints");
  }
  return fs;
}

std::mt19937_64 individual_rng(std::uint64_t seed, int generation, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

struct Scored {
  std::vector<double> z;
  std::vector<double> coeffs;
  double fitness = 0.0;
  double snr = 0.0;
  bool feasible = false;
};

}  // namespace

void GAConfig::validate() const {
  if (n_coeffs < 2 || n_coeffs % 2 != 0) throw InputError("n_coeffs must be a positive even integer");
  if (population < 20) throw InputError("population must be at least 20");
  if (generations < 0) throw InputError("generations must be non-negative");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw InputError("mutation_rate must lie in [0, 1]");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw InputError("crossover_rate must lie in [0, 1]");
  if (horizon < 0.0) throw InputError("horizon must be non-negative");
  if (penalty_weight < 0.0) throw InputError("penalty_weight must be non-negative");
  if (!(mutation_sigma >= 0.0)) throw InputError("mutation_sigma must be non-negative");
  if (!(coordinate_bound > 0.0)) throw InputError("coordinate_bound must be positive");
  if (tournament < 1 || tournament > population) throw InputError("tournament size must lie in [1, population]");
  if (elitism < 1 || elitism > population) throw InputError("elitism must lie in [1, population]");
  if (grid_points < 16) throw InputError("grid_points must be at least 16");
}

nlohmann::json GAConfig::to_json() const {
  return {{"n_coeffs", n_coeffs},
          {"population", population},
          {"generations", generations},
          {"mutation_rate", mutation_rate},
          {"crossover_rate", crossover_rate},
          {"seed", seed},
          {"horizon", horizon},
          {"penalty_weight", penalty_weight},
          {"mutation_sigma", mutation_sigma},
          {"coordinate_bound", coordinate_bound},
          {"tournament", tournament},
          {"elitism", elitism},
          {"grid_points", grid_points},
          {"seed_incumbent", seed_incumbent}};
}

GAConfig GAConfig::from_json(const nlohmann::json& j) {
  GAConfig c;
  c.n_coeffs = j.value("n_coeffs", c.n_coeffs);
  c.population = j.value("population", c.population);
  c.generations = j.value("generations", c.generations);
  c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
  c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
  c.seed = j.value("seed", c.seed);
  c.horizon = j.value("horizon", c.horizon);
  c.penalty_weight = j.value("penalty_weight", c.penalty_weight);
  c.mutation_sigma = j.value("mutation_sigma", c.mutation_sigma);
  c.coordinate_bound = j.value("coordinate_bound", c.coordinate_bound);
  c.tournament = j.value("tournament", c.tournament);
  c.elitism = j.value("elitism", c.elitism);
  c.grid_points = j.value("grid_points", c.grid_points);
  c.seed_incumbent = j.value("seed_incumbent", c.seed_incumbent);
  c.validate();
  return c;
}

double decode_coeffs(std::span<const double> coeffs, double t_f, double t, int order) {
  if (!(t_f > 0.0)) throw InputError("t_f must be positive");
  if (coeffs.size() % 2 != 0) throw InputError("coefficient list must hold {c_m, d_m} pairs");
  return Modulation::fourier_series({coeffs.begin(), coeffs.end()}, t_f).derivative(t, order);
}

double snr_at(const Modulation& gc, double kappa, double tau, int grid_points, double phi) {
  const auto grid = uniform_grid(gc.t_f(), grid_points);
  const auto traj = make_trajectory(gc, kappa, grid);
  const double signal = homodyne_signal(traj, phi, tau);
  const double noise = noise_power(kappa, tau);
  return noise > 0.0 ? signal / std::sqrt(2.0 * noise) : 0.0;
}

double incumbent_snr(const SystemParams& p, const GAConfig& cfg) {
  const double h = cfg.resolved_horizon(p);
  if (h > p.t_f * (1.0 + 1e-12)) throw InputError("horizon exceeds t_f");
  // Grid over [0, t_f] chosen so the horizon t_f / 2 falls on a node.
  return snr_at(trig_modulation(p), p.kappa, h, 2 * cfg.grid_points - 1);
}

double constraint_violation(std::span<const double> coeffs, const SystemParams& p, const GAConfig& cfg) {
  const double h = cfg.resolved_horizon(p);
  const auto m = Modulation::fourier_series({coeffs.begin(), coeffs.end()}, h);
  const auto report = verify_boundaries(m, p.with_duration(h), kFeasibleTolerance);
  double sum = 0.0;
  for (double r : report.residuals) sum += r * r;
  const double di = report.displacement_integral - 1.0;
  return sum + di * di;
}

double fitness(std::span<const double> coeffs, const SystemParams& p, const GAConfig& cfg) {
  const double h = cfg.resolved_horizon(p);
  const double weight = cfg.penalty_weight > 0.0 ? cfg.penalty_weight : 1e3 * incumbent_snr(p, cfg);
  const auto m = Modulation::fourier_series({coeffs.begin(), coeffs.end()}, h);
  return snr_at(m, p.kappa, h, cfg.grid_points) - weight * constraint_violation(coeffs, p, cfg);
}

OptimizedModulation ga_run(const SystemParams& p, const GAConfig& cfg_in) {
  p.validate();
  cfg_in.validate();
  GAConfig cfg = cfg_in;
  const double h = cfg.resolved_horizon(p);
  cfg.horizon = h;
  const double incumbent = incumbent_snr(p, cfg);
  if (cfg.penalty_weight == 0.0) cfg.penalty_weight = 1e3 * incumbent;

  const FeasibleSet fs = feasible_set(p, cfg.n_coeffs, h);
  const int dim = fs.dim();
  const double bound = cfg.coordinate_bound;
  const SystemParams ph = p.with_duration(h);

  auto clip = [&](std::vector<double>& z) {
    for (double& v : z) v = std::clamp(v, -bound, bound);
  };

  std::vector<std::vector<double>> genomes(cfg.population, std::vector<double>(dim, 0.0));
  for (int i = 0; i < cfg.population; ++i) {
    auto rng = individual_rng(cfg.seed, 0, i);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : genomes[i]) v = u(rng);
  }
  if (cfg.seed_incumbent) {
    // The trigonometric design for the horizon, written exactly as a series
    // and moved onto the feasible set.
    auto series = trig_modulation(ph).to_fourier();
    std::vector<double> coeffs(series.coefficients().begin(), series.coefficients().end());
    coeffs.resize(std::max<std::size_t>(coeffs.size(), cfg.n_coeffs), 0.0);
    if (static_cast<int>(coeffs.size()) == cfg.n_coeffs) {
      genomes[0] = fs.project(coeffs);
      clip(genomes[0]);
    }
  }

  auto evaluate = [&](const std::vector<std::vector<double>>& pop) {
    std::vector<Scored> scored(pop.size());
    parallel_for(pop.size(), [&](std::size_t i) {
      Scored s;
      s.z = pop[i];
      s.coeffs = fs.decode(pop[i]);
      const auto m = Modulation::fourier_series(s.coeffs, h);
      s.snr = snr_at(m, p.kappa, h, cfg.grid_points);
      s.fitness = s.snr - cfg.penalty_weight * constraint_violation(s.coeffs, p, cfg);
      s.feasible = verify_boundaries(m, ph, kFeasibleTolerance).passed;
      scored[i] = std::move(s);
    });
    return scored;
  };

  OptimizedModulation out;
  out.horizon = h;
  out.incumbent_snr = incumbent;
  bool have_best = false;
  Scored best;

  auto record = [&](int generation, const std::vector<Scored>& scored) {
    GenerationStats st;
    st.generation = generation;
    st.best = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int feasible = 0;
    for (const auto& s : scored) {
      st.best = std::max(st.best, s.fitness);
      sum += s.fitness;
      if (s.feasible) {
        ++feasible;
        if (!have_best || s.fitness > best.fitness) {
          best = s;
          have_best = true;
        }
      }
    }
    st.mean = sum / static_cast<double>(scored.size());
    st.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(scored.size());
    out.generations.push_back(st);
    out.fitness_history.push_back(st.best);
  };

  auto scored = evaluate(genomes);
  record(0, scored);
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<int> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scored[a].fitness > scored[b].fitness; });
    std::vector<std::vector<double>> next(cfg.population);
    for (int e = 0; e < cfg.elitism; ++e) next[e] = scored[order[e]].z;
    parallel_for(static_cast<std::size_t>(cfg.population - cfg.elitism), [&](std::size_t j) {
      const int i = cfg.elitism + static_cast<int>(j);
      auto rng = individual_rng(cfg.seed, gen, i);
      std::uniform_int_distribution<int> pick(0, cfg.population - 1);
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      std::normal_distribution<double> kick(0.0, cfg.mutation_sigma);
      auto tournament = [&] {
        int winner = pick(rng);
        for (int k = 1; k < cfg.tournament; ++k) {
          const int c = pick(rng);
          if (scored[c].fitness > scored[winner].fitness || (scored[c].fitness == scored[winner].fitness && c < winner)) {
            winner = c;
          }
        }
        return winner;
      };
      const int pa = tournament();
      const int pb = tournament();
      std::vector<double> child = scored[pa].z;
      if (coin(rng) < cfg.crossover_rate) {
        for (int d = 0; d < dim; ++d) {
          if (coin(rng) < 0.5) child[d] = scored[pb].z[d];
        }
      }
      for (int d = 0; d < dim; ++d) {
        if (coin(rng) < cfg.mutation_rate) child[d] += kick(rng);
      }
      clip(child);
      next[i] = std::move(child);
    });
    genomes = std::move(next);
    scored = evaluate(genomes);
    record(gen, scored);
  }

  if (!have_best) {
    throw InfeasibleError("no individual met the constraints within " + std::to_string(cfg.generations) +
                          " generations");
  }
  out.coefficients = best.coeffs;
  out.final_snr = best.snr;
  out.fitness = best.fitness;
  out.constraint_residuals = verify_boundaries(out.modulation(), ph, kFeasibleTolerance);
  return out;
}

nlohmann::json OptimizedModulation::to_json() const {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : generations) {
    gens.push_back({{"generation", g.generation}, {"best", g.best}, {"mean", g.mean},
                    {"feasible_fraction", g.feasible_fraction}});
  }
  return {{"coefficients", coefficients},
          {"horizon", horizon},
          {"modulation", modulation().to_json()},
          {"fitness_history", fitness_history},
          {"final_snr", final_snr},
          {"fitness", fitness},
          {"incumbent_snr", incumbent_snr},
          {"constraint_residuals", constraint_residuals.to_json()}};
}

std::string OptimizedModulation::history_csv() const {
  io::CsvWriter csv({"generation", "best", "mean", "feasible_fraction"});
  for (const auto& g : generations) {
    csv.row({static_cast<double>(g.generation), g.best, g.mean, g.feasible_fraction});
  }
  return csv.str();
}

}  // namespace longi
