#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "propagator.hpp"
#include "system.hpp"

namespace qpath {

/// Gene range; a half-open range excludes its upper end (phases).
struct GeneBounds {
  double lower = 0.0;
  double upper = 1.0;
  bool upper_open = false;

  double clip(double x) const {
    const double top = upper_open ? std::nextafter(upper, lower) : upper;
    return std::clamp(x, lower, top);
  }

  bool contains(double x) const { return x >= lower && (upper_open ? x < upper : x <= upper); }

  double width() const { return upper - lower; }

  friend bool operator==(const GeneBounds&, const GeneBounds&) = default;
};

/// Decision vector [omega_1..omega_K, phi_1..phi_K] bounds:
/// omega in [0.5, 4], phi in [0, 2 pi).
inline std::vector<GeneBounds> default_gene_bounds(std::size_t modes) {
  std::vector<GeneBounds> bounds(modes, GeneBounds{0.5, 4.0, false});
  bounds.resize(2 * modes, GeneBounds{0.0, 2.0 * std::numbers::pi, true});
  return bounds;
}

struct GAConfig {
  std::size_t population_size = 300;
  /// Size of the tournament-selected parent pool that breeds each generation.
  std::size_t reproductive_size = 30;
  double crossover_probability = 0.2;
  double distribution_index = 2.0;
  double mutation_probability = 0.01;
  /// Per-gene mutation sigma as a fraction of the gene range, unless
  /// mutation_scales is given explicitly.
  double mutation_scale_fraction = 0.05;
  std::vector<double> mutation_scales;
  std::size_t tournament_size = 2;
  int generations = 200;
  /// Empty: default_gene_bounds.
  std::vector<GeneBounds> bounds;
  bool elitism = true;
  std::uint64_t seed = 1;

  void validate() const {
    auto probability = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0))
        throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
    };
    probability(crossover_probability, "crossover probability");
    probability(mutation_probability, "mutation probability");
    if (population_size < 1)
      throw InvalidArgument("population size must be at least 1");
    if (reproductive_size < 1 || reproductive_size > population_size)
      throw InvalidArgument("reproductive size must lie in [1, population size]");
    if (tournament_size < 1)
      throw InvalidArgument("tournament size must be at least 1");
    if (!(distribution_index >= 0.0))
      throw InvalidArgument("SBX distribution index must be nonnegative");
    if (mutation_scale_fraction < 0.0)
      throw InvalidArgument("mutation scale must be nonnegative");
    if (generations < 0)
      throw InvalidArgument("generation budget must be nonnegative");
    for (const auto& b : bounds)
      if (!(b.lower < b.upper))
        throw InvalidArgument("gene bounds need lower < upper");
    for (double s : mutation_scales)
      if (s < 0.0)
        throw InvalidArgument("mutation scale must be nonnegative");
  }

  std::vector<GeneBounds> resolved_bounds(std::size_t modes) const {
    auto out = bounds.empty() ? default_gene_bounds(modes) : bounds;
    if (out.size() != 2 * modes)
      throw InvalidArgument("GA bounds need 2K = " + std::to_string(2 * modes) + " entries, got " +
                            std::to_string(out.size()));
    return out;
  }

  std::vector<double> resolved_scales(const std::vector<GeneBounds>& gene_bounds) const {
    if (!mutation_scales.empty()) {
      if (mutation_scales.size() != gene_bounds.size())
        throw InvalidArgument("mutation scales need one entry per gene");
      return mutation_scales;
    }
    std::vector<double> out;
    for (const auto& b : gene_bounds)
      out.push_back(mutation_scale_fraction * b.width());
    return out;
  }

  friend bool operator==(const GAConfig&, const GAConfig&) = default;
};

/// Maximize P_ji(T) over frequencies and phases with fixed amplitudes and T.
struct FieldObjective {
  QuantumSystem system;
  std::vector<double> amplitudes;
  double duration = 10.0;
  Carrier carrier = Carrier::cosine;
  int initial = 0;
  int target = 1;
  PropagationSettings settings;

  std::size_t modes() const { return amplitudes.size(); }
};

struct Individual {
  std::vector<double> genes;
  double fitness = 0.0;
};

inline ControlField field_from_genes(const std::vector<double>& genes, const FieldObjective& objective) {
  const std::size_t k = objective.modes();
  if (genes.size() != 2 * k)
    throw InvalidArgument("decision vector needs 2K entries");
  ControlField field;
  field.duration = objective.duration;
  field.carrier = objective.carrier;
  for (std::size_t m = 0; m < k; ++m)
    field.modes.push_back(Mode{genes[m], objective.amplitudes[m], genes[k + m]});
  return field;
}

inline double evaluate(const std::vector<double>& genes, const FieldObjective& objective) {
  const ControlField field = field_from_genes(genes, objective);
  const ComplexVector psi = propagate_state(objective.system, field, objective.settings, objective.initial);
  return std::norm(psi(objective.target));
}

/// SBX spread factor for a uniform draw u in [0, 1).
inline double sbx_spread_factor(double u, double eta) {
  if (u <= 0.5)
    return std::pow(2.0 * u, 1.0 / (eta + 1.0));
  return std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

/// P(beta <= b) of the spread factor law.
inline double sbx_spread_cdf(double b, double eta) {
  if (b <= 0.0)
    return 0.0;
  if (b <= 1.0)
    return 0.5 * std::pow(b, eta + 1.0);
  return 1.0 - 0.5 * std::pow(b, -(eta + 1.0));
}

/// Simulated binary crossover: with probability `probability` every gene pair
/// is spread around its midpoint by an SBX factor, otherwise the parents are
/// copied. Children are clipped to the bounds.
template <typename Rng>
std::pair<std::vector<double>, std::vector<double>> sbx_crossover(const std::vector<double>& a,
                                                                  const std::vector<double>& b, double eta,
                                                                  double probability,
                                                                  const std::vector<GeneBounds>& bounds, Rng& rng) {
  if (a.size() != b.size() || a.size() != bounds.size())
    throw InvalidArgument("SBX parents and bounds differ in length");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::pair<std::vector<double>, std::vector<double>> children{a, b};
  if (uniform(rng) >= probability)
    return children;
  for (std::size_t g = 0; g < a.size(); ++g) {
    const double beta = sbx_spread_factor(uniform(rng), eta);
    const double mid = 0.5 * (a[g] + b[g]);
    const double half = 0.5 * beta * (a[g] - b[g]);
    children.first[g] = bounds[g].clip(mid + half);
    children.second[g] = bounds[g].clip(mid - half);
  }
  return children;
}

/// Adds Normal(0, scale_g^2) to each gene with probability `probability`,
/// then clips.
template <typename Rng>
std::size_t gaussian_mutate(std::vector<double>& genes, double probability, const std::vector<double>& scales,
                            const std::vector<GeneBounds>& bounds, Rng& rng) {
  if (genes.size() != scales.size() || genes.size() != bounds.size())
    throw InvalidArgument("mutation scales and bounds need one entry per gene");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t mutated = 0;
  for (std::size_t g = 0; g < genes.size(); ++g) {
    if (uniform(rng) >= probability)
      continue;
    ++mutated;
    genes[g] = bounds[g].clip(genes[g] + scales[g] * normal(rng));
  }
  return mutated;
}

/// Index of the best of `size` uniform draws with replacement; ties go to the
/// lower index.
template <typename Rng>
std::size_t tournament_select(const std::vector<Individual>& population, std::size_t size, Rng& rng) {
  if (population.empty())
    throw InvalidArgument("tournament on an empty population");
  if (size < 1)
    throw InvalidArgument("tournament size must be at least 1");
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  std::size_t winner = pick(rng);
  for (std::size_t t = 1; t < size; ++t) {
    const std::size_t challenger = pick(rng);
    const double a = population[winner].fitness;
    const double b = population[challenger].fitness;
    if (b > a || (b == a && challenger < winner))
      winner = challenger;
  }
  return winner;
}

struct GenerationRecord {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

struct OptimizationResult {
  Individual best;
  ControlField field;
  std::vector<GenerationRecord> history;
  std::size_t evaluations = 0;
};

namespace detail {

inline void evaluate_all(std::vector<Individual>& population, std::size_t from, const FieldObjective& objective) {
  parallel_for(population.size() - from,
               [&](std::size_t n) { population[from + n].fitness = evaluate(population[from + n].genes, objective); });
}

inline std::size_t best_index(const std::vector<Individual>& population) {
  std::size_t best = 0;
  for (std::size_t n = 1; n < population.size(); ++n)
    if (population[n].fitness > population[best].fitness)
      best = n;
  return best;
}

inline GenerationRecord record(int generation, const std::vector<Individual>& population) {
  GenerationRecord out;
  out.generation = generation;
  out.best = population[best_index(population)].fitness;
  for (const auto& ind : population)
    out.mean += ind.fitness;
  out.mean /= static_cast<double>(population.size());
  for (const auto& ind : population)
    out.std += (ind.fitness - out.mean) * (ind.fitness - out.mean);
  out.std = population.size() > 1 ? std::sqrt(out.std / static_cast<double>(population.size() - 1)) : 0.0;
  return out;
}

} // namespace detail

/// Generational RCGA. All random draws happen on the calling thread in a fixed
/// order; only fitness evaluations run in parallel, so a run is reproducible
/// from (config, seed).
inline OptimizationResult optimize(const FieldObjective& objective, const GAConfig& config) {
  config.validate();
  objective.system.validate();
  if (objective.modes() < 1)
    throw InvalidArgument("objective needs at least one mode");
  const auto bounds = config.resolved_bounds(objective.modes());
  const auto scales = config.resolved_scales(bounds);
  std::mt19937_64 rng(config.seed);

  std::vector<Individual> population(config.population_size);
  for (auto& ind : population)
    for (const auto& b : bounds)
      ind.genes.push_back(b.clip(std::uniform_real_distribution<double>(b.lower, b.upper)(rng)));
  detail::evaluate_all(population, 0, objective);

  OptimizationResult result;
  result.evaluations = population.size();
  result.history.push_back(detail::record(0, population));
  for (int generation = 1; generation <= config.generations; ++generation) {
    std::vector<Individual> pool;
    for (std::size_t r = 0; r < config.reproductive_size; ++r)
      pool.push_back(population[tournament_select(population, config.tournament_size, rng)]);
    std::vector<Individual> next;
    if (config.elitism)
      next.push_back(population[detail::best_index(population)]);
    const std::size_t fresh = next.size();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    while (next.size() < config.population_size) {
      const std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      if (pool.size() > 1)
        while (b == a)
          b = pick(rng);
      auto [first, second] = sbx_crossover(pool[a].genes, pool[b].genes, config.distribution_index,
                                           config.crossover_probability, bounds, rng);
      gaussian_mutate(first, config.mutation_probability, scales, bounds, rng);
      gaussian_mutate(second, config.mutation_probability, scales, bounds, rng);
      next.push_back({std::move(first), 0.0});
      if (next.size() < config.population_size)
        next.push_back({std::move(second), 0.0});
    }
    detail::evaluate_all(next, fresh, objective);
    result.evaluations += next.size() - fresh;
    population = std::move(next);
    result.history.push_back(detail::record(generation, population));
  }
  result.best = population[detail::best_index(population)];
  result.field = field_from_genes(result.best.genes, objective);
  return result;
}

} // namespace qpath
