//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <thread>

#include "brt/errors.hpp"
#include "brt/evaluation.hpp"
#include "brt/rng.hpp"

namespace brt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Weighted Tchebycheff scalarization against the ideal point.
double tchebycheff(std::span<const double> objectives,
                   std::span<const double> weights,
                   std::span<const double> ideal) {
  if (!all_finite(objectives)) return kInf;
  double worst = 0.0;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    worst = std::max(worst, weights[i] * std::abs(objectives[i] - ideal[i]));
  }
  return worst;
}

// All nonnegative integer m-tuples summing to `total`, lexicographic order.
void enumerate_compositions(int total, int slots, std::vector<int>& prefix,
                            std::vector<std::vector<int>>& out) {
  if (slots == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int head = 0; head <= total; ++head) {
    prefix.push_back(head);
    enumerate_compositions(total - head, slots - 1, prefix, out);
    prefix.pop_back();
  }
}

// Deb & Agrawal simulated binary crossover; returns one offspring.
std::vector<double> sbx_crossover(std::span<const double> parent_a,
                                  std::span<const double> parent_b,
                                  const std::vector<GenePosition>& genes,
                                  double eta, double prob, Rng& rng) {
  std::vector<double> child(parent_a.begin(), parent_a.end());
  if (rng.uniform() > prob) return child;

  for (std::size_t i = 0; i < child.size(); ++i) {
    if (rng.uniform() > 0.5) continue;
    double y1 = parent_a[i];
    double y2 = parent_b[i];
    if (std::abs(y1 - y2) <= 1e-14) continue;
    if (y1 > y2) std::swap(y1, y2);
    const double lo = genes[i].range.lo;
    const double hi = genes[i].range.hi;
    const double u = rng.uniform();

    auto spread = [&](double beta) {
      const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
      if (u <= 1.0 / alpha) {
        return std::pow(u * alpha, 1.0 / (eta + 1.0));
      }
      return std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };

    const double beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
    double c1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
    const double beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
    double c2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
    c1 = std::clamp(c1, lo, hi);
    c2 = std::clamp(c2, lo, hi);
    child[i] = rng.uniform() <= 0.5 ? c2 : c1;
  }
  return child;
}

// Deb's bounded polynomial mutation, in place.
void polynomial_mutation(std::vector<double>& genotype,
                         const std::vector<GenePosition>& genes, double eta,
                         double prob, Rng& rng) {
  for (std::size_t i = 0; i < genotype.size(); ++i) {
    if (rng.uniform() >= prob) continue;
    const double lo = genes[i].range.lo;
    const double hi = genes[i].range.hi;
    const double span = hi - lo;
    if (span <= 0.0) continue;
    const double y = genotype[i];
    const double u = rng.uniform();
    const double mut_pow = 1.0 / (eta + 1.0);
    double delta = 0.0;
    if (u <= 0.5) {
      const double xy = 1.0 - (y - lo) / span;
      const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0);
      delta = std::pow(val, mut_pow) - 1.0;
    } else {
      const double xy = 1.0 - (hi - y) / span;
      const double val =
          2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta + 1.0);
      delta = 1.0 - std::pow(val, mut_pow);
    }
    genotype[i] = std::clamp(y + delta * span, lo, hi);
  }
}

// Bit-exact genotype key for the evaluation cache.
struct GenotypeKey {
  std::vector<std::uint64_t> bits;

  explicit GenotypeKey(std::span<const double> genotype) {
    bits.resize(genotype.size());
    std::memcpy(bits.data(), genotype.data(),
                genotype.size() * sizeof(double));
  }
  bool operator<(const GenotypeKey& other) const { return bits < other.bits; }
};

// Deterministic parallel map: worker threads pull indices from an atomic
// counter and write into preassigned slots.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int threads = std::min<std::size_t>(jobs, count);
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string GenePosition::label(const CaseDefinition& kase) const {
  const char* names[] = {"eud0", "a", "n"};
  return kase.structures[structure].id + "." +
         names[static_cast<int>(field)];
}

std::vector<GenePosition> encode(const CaseDefinition& kase) {
  std::vector<GenePosition> genes;
  for (std::size_t i = 0; i < kase.structures.size(); ++i) {
    const Structure& s = kase.structures[i];
    if (s.kind == StructureKind::virtual_ptv) continue;
    const StructureParams& p = s.params;
    if (p.eud0_tunable) {
      genes.push_back({static_cast<int>(i), GenePosition::Field::eud0,
                       p.eud0_range});
    }
    if (p.a_tunable) {
      genes.push_back({static_cast<int>(i), GenePosition::Field::a,
                       p.a_range});
    }
    if (p.n_tunable) {
      genes.push_back({static_cast<int>(i), GenePosition::Field::n,
                       p.n_range});
    }
  }
  return genes;
}

CaseDefinition decode(std::span<const double> genotype,
                      const CaseDefinition& kase) {
  const std::vector<GenePosition> genes = encode(kase);
  if (genotype.size() != genes.size()) {
    throw config_error("genotype length " + std::to_string(genotype.size()) +
                       " does not match the " + std::to_string(genes.size()) +
                       " tunable scalars of the case");
  }
  CaseDefinition decoded = kase;
  for (std::size_t i = 0; i < genes.size(); ++i) {
    const GenePosition& g = genes[i];
    if (!g.range.contains(genotype[i])) {
      throw config_error(g.label(kase) + " = " + std::to_string(genotype[i]) +
                         " outside its search range");
    }
    StructureParams& p = decoded.structures[g.structure].params;
    switch (g.field) {
      case GenePosition::Field::eud0:
        p.eud0 = genotype[i];
        break;
      case GenePosition::Field::a:
        p.a = genotype[i];
        break;
      case GenePosition::Field::n:
        p.n = genotype[i];
        break;
    }
  }
  refresh_virtual_ptvs(decoded);
  return decoded;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

bool ParetoArchive::insert(ArchiveEntry entry) {
  if (!all_finite(entry.objectives)) return false;
  for (const ArchiveEntry& existing : entries_) {
    if (dominates(existing.objectives, entry.objectives)) return false;
    if (existing.objectives == entry.objectives) return false;
  }
  std::erase_if(entries_, [&entry](const ArchiveEntry& existing) {
    return dominates(entry.objectives, existing.objectives);
  });
  entries_.push_back(std::move(entry));
  return true;
}

void TunerConfig::validate() const {
  if (population < 2) throw config_error("tuner: population must be >= 2");
  if (generations < 1) throw config_error("tuner: generations must be >= 1");
  const int t = resolved_neighborhood();
  if (t < 2 || t > population) {
    throw config_error("tuner: neighborhood must lie in [2, population]");
  }
  if (stagnation_eps && !(*stagnation_eps > 0.0)) {
    throw config_error("tuner: stagnation epsilon must be positive");
  }
  if (jobs < 0) throw config_error("tuner: jobs must be nonnegative");
  gd.validate();
}

int TunerConfig::resolved_neighborhood() const {
  if (neighborhood > 0) return neighborhood;
  return std::max(
      2, static_cast<int>(std::ceil(0.13 * static_cast<double>(population))));
}

GenotypeEvaluation evaluate_genotype(std::span<const double> genotype,
                                     const CaseDefinition& kase,
                                     const DepositionMatrix& matrix,
                                     const GdConfig& gd) {
  GenotypeEvaluation result;
  try {
    const CaseDefinition decoded = decode(genotype, kase);
    PlanResult plan = optimize(decoded, matrix, gd);
    const std::vector<double> d = dose(matrix, plan.fluence);
    result.objectives = objective_vector(d, decoded);
    result.fluence = std::move(plan.fluence);
    result.log_f = plan.log_f;
    result.feasible = true;
  } catch (const numeric_error&) {
    result.objectives.assign(
        static_cast<std::size_t>(kase.objective_count()), kInf);
    result.feasible = false;
  }
  return result;
}

std::vector<std::vector<double>> uniform_weights(int objectives, int count) {
  if (objectives < 1) throw config_error("weights: need at least 1 objective");
  if (count < 1) throw config_error("weights: need at least 1 vector");

  std::vector<std::vector<double>> weights;
  if (objectives == 1) {
    weights.assign(static_cast<std::size_t>(count), {1.0});
    return weights;
  }
  if (objectives == 2) {
    for (int i = 0; i < count; ++i) {
      const double w = count == 1
                           ? 0.5
                           : static_cast<double>(i) /
                                 static_cast<double>(count - 1);
      weights.push_back({w, 1.0 - w});
    }
    return weights;
  }

  // Simplex lattice with the smallest resolution holding >= count points,
  // stride-subsampled to exactly `count` (keeps both lexicographic extremes).
  int resolution = 1;
  std::vector<std::vector<int>> lattice;
  for (;; ++resolution) {
    lattice.clear();
    std::vector<int> prefix;
    enumerate_compositions(resolution, objectives, prefix, lattice);
    if (static_cast<int>(lattice.size()) >= count) break;
  }
  const std::size_t total = lattice.size();
  for (int i = 0; i < count; ++i) {
    const std::size_t pick =
        count == 1 ? 0
                   : (static_cast<std::size_t>(i) * (total - 1)) /
                         static_cast<std::size_t>(count - 1);
    std::vector<double> w(static_cast<std::size_t>(objectives));
    for (int j = 0; j < objectives; ++j) {
      w[j] = static_cast<double>(lattice[pick][j]) /
             static_cast<double>(resolution);
    }
    weights.push_back(std::move(w));
  }
  return weights;
}

double hypervolume(const std::vector<std::vector<double>>& front,
                   const std::vector<double>& reference) {
  if (front.empty()) return 0.0;
  const std::size_t m = reference.size();
  if (m < 1 || m > 3) {
    throw config_error("hypervolume: supports 1 to 3 objectives");
  }
  for (const auto& point : front) {
    if (point.size() != m) {
      throw config_error("hypervolume: dimension mismatch");
    }
  }

  if (m == 1) {
    double best = reference[0];
    for (const auto& p : front) best = std::min(best, p[0]);
    return std::max(0.0, reference[0] - best);
  }

  if (m == 2) {
    std::vector<std::vector<double>> pts = front;
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double prev_y = reference[1];
    for (const auto& p : pts) {
      if (p[0] >= reference[0] || p[1] >= prev_y) continue;
      area += (reference[0] - p[0]) * (prev_y - p[1]);
      prev_y = p[1];
    }
    return area;
  }

  // m == 3: sweep the third axis, accumulating 2D slices.
  std::vector<std::vector<double>> pts = front;
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a[2] < b[2]; });
  double volume = 0.0;
  std::vector<std::vector<double>> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.push_back({pts[i][0], pts[i][1]});
    const double z_lo = pts[i][2];
    const double z_hi = i + 1 < pts.size() ? pts[i + 1][2] : reference[2];
    if (z_hi <= z_lo) continue;
    volume += hypervolume(slice, {reference[0], reference[1]}) * (z_hi - z_lo);
  }
  return volume;
}

TuneResult tune(const CaseDefinition& kase, const DepositionMatrix& matrix,
                const TunerConfig& config, const GenerationObserver& observer) {
  config.validate();
  if (!virtual_ptvs_derived(kase)) {
    throw config_error("tune: case is missing derived virtual PTVs");
  }

  const std::vector<GenePosition> genes = encode(kase);
  const int gene_count = static_cast<int>(genes.size());
  const int m = kase.objective_count();
  const int population = config.population;
  const int neighborhood_size = config.resolved_neighborhood();
  const double mutation_prob =
      config.mutation_prob >= 0.0
          ? config.mutation_prob
          : (gene_count > 0 ? 1.0 / static_cast<double>(gene_count) : 0.0);

  const std::vector<std::vector<double>> weights =
      uniform_weights(m, population);

  // T nearest weight vectors per subproblem (self included).
  std::vector<std::vector<int>> neighbors(population);
  for (int i = 0; i < population; ++i) {
    std::vector<std::pair<double, int>> by_distance;
    by_distance.reserve(population);
    for (int j = 0; j < population; ++j) {
      double dist2 = 0.0;
      for (int d = 0; d < m; ++d) {
        const double delta = weights[i][d] - weights[j][d];
        dist2 += delta * delta;
      }
      by_distance.emplace_back(dist2, j);
    }
    std::sort(by_distance.begin(), by_distance.end());
    for (int t = 0; t < neighborhood_size; ++t) {
      neighbors[i].push_back(by_distance[t].second);
    }
  }

  Rng rng(config.seed);

  // Initial population: the case's own parameters first, the rest uniform.
  std::vector<std::vector<double>> genotypes;
  genotypes.reserve(population);
  for (int i = 0; i < population; ++i) {
    std::vector<double> g(static_cast<std::size_t>(gene_count));
    if (i == 0 && config.include_default_phi) {
      for (int k = 0; k < gene_count; ++k) {
        const GenePosition& gene = genes[k];
        const StructureParams& p = kase.structures[gene.structure].params;
        switch (gene.field) {
          case GenePosition::Field::eud0:
            g[k] = p.eud0;
            break;
          case GenePosition::Field::a:
            g[k] = p.a;
            break;
          case GenePosition::Field::n:
            g[k] = p.n;
            break;
        }
      }
    } else {
      for (int k = 0; k < gene_count; ++k) {
        g[k] = rng.uniform(genes[k].range.lo, genes[k].range.hi);
      }
    }
    genotypes.push_back(std::move(g));
  }

  TuneResult result;
  std::map<GenotypeKey, GenotypeEvaluation> cache;

  // Evaluate a batch of genotypes, deduplicated against the cache; inner
  // optimizations are independent, so they run as a parallel map.
  auto evaluate_batch = [&](const std::vector<std::vector<double>>& batch) {
    std::vector<GenotypeKey> pending_keys;
    std::vector<std::size_t> pending_index;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      GenotypeKey key(batch[i]);
      if (cache.contains(key)) continue;
      bool queued = false;
      for (const GenotypeKey& other : pending_keys) {
        if (!(other < key) && !(key < other)) {
          queued = true;
          break;
        }
      }
      if (!queued) {
        pending_keys.push_back(std::move(key));
        pending_index.push_back(i);
      }
    }
    std::vector<GenotypeEvaluation> fresh(pending_index.size());
    parallel_for(pending_index.size(), config.jobs, [&](std::size_t slot) {
      fresh[slot] = evaluate_genotype(batch[pending_index[slot]], kase,
                                      matrix, config.gd);
    });
    for (std::size_t slot = 0; slot < pending_index.size(); ++slot) {
      cache.emplace(std::move(pending_keys[slot]), std::move(fresh[slot]));
      ++result.inner_runs;
    }
  };

  auto cached = [&](const std::vector<double>& genotype)
      -> const GenotypeEvaluation& {
    return cache.at(GenotypeKey(genotype));
  };

  evaluate_batch(genotypes);

  std::vector<double> ideal(static_cast<std::size_t>(m), kInf);
  auto update_ideal = [&](std::span<const double> objectives) {
    if (!all_finite(objectives)) return;
    for (int d = 0; d < m; ++d) ideal[d] = std::min(ideal[d], objectives[d]);
  };

  std::vector<std::vector<double>> fitness(population);
  for (int i = 0; i < population; ++i) {
    fitness[i] = cached(genotypes[i]).objectives;
    update_ideal(fitness[i]);
  }
  for (int i = 0; i < population; ++i) {
    const GenotypeEvaluation& eval = cached(genotypes[i]);
    if (eval.feasible) {
      result.archive.insert(
          {genotypes[i], eval.objectives, eval.fluence, eval.log_f});
    }
  }

  // Stagnation bookkeeping: hypervolume in a normalized box over everything
  // seen so far.
  std::vector<double> seen_min(static_cast<std::size_t>(m), kInf);
  std::vector<double> seen_max(static_cast<std::size_t>(m), -kInf);
  auto widen_box = [&](const std::vector<ArchiveEntry>& entries) {
    for (const ArchiveEntry& e : entries) {
      for (int d = 0; d < m; ++d) {
        seen_min[d] = std::min(seen_min[d], e.objectives[d]);
        seen_max[d] = std::max(seen_max[d], e.objectives[d]);
      }
    }
  };
  auto normalized_hypervolume = [&]() {
    if (result.archive.empty()) return 0.0;
    std::vector<std::vector<double>> front;
    front.reserve(result.archive.size());
    for (const ArchiveEntry& e : result.archive.entries()) {
      std::vector<double> p(static_cast<std::size_t>(m));
      for (int d = 0; d < m; ++d) {
        const double span = seen_max[d] - seen_min[d];
        p[d] = span > 0.0 ? (e.objectives[d] - seen_min[d]) / span : 0.0;
      }
      front.push_back(std::move(p));
    }
    return hypervolume(front, std::vector<double>(m, 1.05));
  };
  if (config.stagnation_eps && m > 3) {
    throw config_error("tuner: stagnation rule supports up to 3 objectives");
  }

  double previous_hv = 0.0;
  int stagnant_generations = 0;
  if (config.stagnation_eps) {
    widen_box(result.archive.entries());
    previous_hv = normalized_hypervolume();
  }

  for (int generation = 0; generation < config.generations; ++generation) {
    // Mating happens sequentially against the generation-start population so
    // results do not depend on evaluation completion order.
    std::vector<std::vector<double>> offspring;
    offspring.reserve(population);
    for (int i = 0; i < population; ++i) {
      const std::vector<int>& hood = neighbors[i];
      const int first = hood[rng.uniform_index(
          static_cast<std::uint32_t>(hood.size()))];
      int second = first;
      while (second == first) {
        second = hood[rng.uniform_index(
            static_cast<std::uint32_t>(hood.size()))];
      }
      std::vector<double> child =
          sbx_crossover(genotypes[first], genotypes[second], genes,
                        config.sbx_eta, config.sbx_prob, rng);
      polynomial_mutation(child, genes, config.mutation_eta, mutation_prob,
                          rng);
      offspring.push_back(std::move(child));
    }

    evaluate_batch(offspring);

    // Neighbor replacement and archive insertion, serialized in subproblem
    // order.
    for (int i = 0; i < population; ++i) {
      const GenotypeEvaluation& eval = cached(offspring[i]);
      update_ideal(eval.objectives);
      for (int j : neighbors[i]) {
        const double child_score =
            tchebycheff(eval.objectives, weights[j], ideal);
        const double incumbent_score =
            tchebycheff(fitness[j], weights[j], ideal);
        if (child_score <= incumbent_score) {
          genotypes[j] = offspring[i];
          fitness[j] = eval.objectives;
        }
      }
      if (eval.feasible) {
        result.archive.insert(
            {offspring[i], eval.objectives, eval.fluence, eval.log_f});
      }
    }

    result.generations_run = generation + 1;
    if (observer) observer(generation, result.archive);

    if (config.stagnation_eps) {
      widen_box(result.archive.entries());
      const double hv = normalized_hypervolume();
      if (std::abs(hv - previous_hv) < *config.stagnation_eps) {
        ++stagnant_generations;
      } else {
        stagnant_generations = 0;
      }
      previous_hv = hv;
      if (stagnant_generations >= config.stagnation_window) break;
    }
  }

  return result;
}

}  // namespace brt
