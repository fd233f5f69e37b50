/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/tuner/genetic.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "tc/backend/emulator.h"
#include "tc/lang/validate.h"
#include "tc/pipeline.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace tuner {

namespace {

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t uniformIndex(std::mt19937_64& rng, size_t n) {
  return static_cast<size_t>(rng() % n);
}

int64_t pick(const std::vector<int64_t>& pool, std::mt19937_64& rng) {
  return pool[uniformIndex(rng, pool.size())];
}

/* Genome accessors by gene index; crossover and mutation treat the
 * options vector as 14 positional genes. */
int64_t getGene(const MappingOptions& g, size_t gene) {
  if (gene < 3) {
    return g.tileSizes[gene];
  }
  if (gene < 6) {
    return g.blockShape[gene - 3];
  }
  if (gene < 9) {
    return g.threadShape[gene - 6];
  }
  switch (gene) {
    case 9:
      return static_cast<int64_t>(g.fusionStrategy);
    case 10:
      return g.useShared ? 1 : 0;
    case 11:
      return g.usePrivate ? 1 : 0;
    case 12:
      return g.unrollCopyShared ? 1 : 0;
    default:
      return g.unrollFactor;
  }
}

void setGene(MappingOptions& g, size_t gene, int64_t value) {
  if (gene < 3) {
    g.tileSizes[gene] = value;
  } else if (gene < 6) {
    g.blockShape[gene - 3] = value;
  } else if (gene < 9) {
    g.threadShape[gene - 6] = value;
  } else if (gene == 9) {
    g.fusionStrategy = static_cast<sched::FusionStrategy>(value);
  } else if (gene == 10) {
    g.useShared = value != 0;
  } else if (gene == 11) {
    g.usePrivate = value != 0;
  } else if (gene == 12) {
    g.unrollCopyShared = value != 0;
  } else {
    g.unrollFactor = value;
  }
}

std::string rngDigest(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  char buf[17];
  std::snprintf(
      buf,
      sizeof(buf),
      "%016llx",
      static_cast<unsigned long long>(fnv1a64(os.str())));
  return buf;
}

void scoreCandidate(
    Candidate& cand,
    const std::shared_ptr<const sem::SpecializedDef>& def,
    const SessionInputs& inputs) {
  try {
    pipeline::Compiled compiled = pipeline::compile(def, cand.genome);
    cand.status = CandidateStatus::Compiled;
    cand.kernelText = compiled.kernelText;
    backend::EmulationResult result =
        backend::emulate(compiled.ir, inputs.tensors, inputs.scalars);
    if (!result.races.empty()) {
      cand.status = CandidateStatus::Failed;
      cand.fitness = 0.0;
      cand.failure = "race detected: " + result.races.front().str();
      return;
    }
    cand.cost = std::max<int64_t>(result.cost, 1);
    cand.fitness = 1.0 / static_cast<double>(cand.cost);
    cand.status = CandidateStatus::Evaluated;
  } catch (const Error& e) {
    cand.status = CandidateStatus::Failed;
    cand.fitness = 0.0;
    cand.failure = std::string(errorKindName(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    cand.status = CandidateStatus::Failed;
    cand.fitness = 0.0;
    cand.failure = e.what();
  }
}

/* Fitness-proportional roulette: a uniform point on the accumulated
 * fitness line. Total fitness must be positive. */
size_t roulette(
    const std::vector<Candidate>& population,
    double totalFitness,
    std::mt19937_64& rng) {
  double point = uniform01(rng) * totalFitness;
  double acc = 0.0;
  for (size_t i = 0; i < population.size(); ++i) {
    acc += population[i].fitness;
    if (point < acc) {
      return i;
    }
  }
  return population.size() - 1; // rounding fell off the end
}

} // namespace

TuningSpace TuningSpace::forSizes(
    const std::map<std::string, int64_t>& sizes,
    int64_t sharedMemoryBudget) {
  std::set<int64_t> extents = {1, 2};
  int64_t maxSize = 1;
  for (const auto& kv : sizes) {
    maxSize = std::max(maxSize, kv.second);
  }
  for (int64_t p = 1; p <= maxSize * 2; p *= 2) {
    extents.insert(p);
  }
  for (const auto& kv : sizes) {
    for (int64_t k = 1; k <= kv.second; ++k) {
      extents.insert((kv.second + k - 1) / k); // ceil divisor
    }
  }
  TuningSpace space;
  space.sharedMemoryBudget = sharedMemoryBudget;
  space.extentPool.assign(extents.begin(), extents.end());
  for (int64_t e : space.extentPool) {
    if (e <= 1024) {
      space.threadPool.push_back(e);
    }
  }
  for (int64_t p = 1; p <= 4096; p *= 2) {
    space.unrollPool.push_back(p);
  }
  space.fusionPool = {
      sched::FusionStrategy::Max,
      sched::FusionStrategy::Min,
      sched::FusionStrategy::PreserveThreeParallel,
  };
  return space;
}

void TuningSpace::normalize(MappingOptions& genome) const {
  genome.tileSizes.resize(3, 1);
  genome.sharedMemoryBudget = sharedMemoryBudget;
  genome.rngSeed = 0;
}

MappingOptions TuningSpace::randomGenome(std::mt19937_64& rng) const {
  MappingOptions g;
  normalize(g);
  for (size_t gene = 0; gene < 3; ++gene) {
    setGene(g, gene, pick(extentPool, rng));
  }
  for (size_t gene = 3; gene < 6; ++gene) {
    setGene(g, gene, pick(extentPool, rng));
  }
  for (size_t gene = 6; gene < 9; ++gene) {
    setGene(g, gene, pick(threadPool, rng));
  }
  setGene(
      g,
      9,
      static_cast<int64_t>(fusionPool[uniformIndex(rng, fusionPool.size())]));
  for (size_t gene = 10; gene < 13; ++gene) {
    setGene(g, gene, static_cast<int64_t>(rng() & 1));
  }
  setGene(g, 13, pick(unrollPool, rng));
  return g;
}

MappingOptions TuningSpace::crossover(
    const MappingOptions& a,
    const MappingOptions& b,
    const MappingOptions& c,
    std::mt19937_64& rng) const {
  const MappingOptions* parents[3] = {&a, &b, &c};
  MappingOptions child;
  normalize(child);
  for (size_t gene = 0; gene < kGeneCount; ++gene) {
    setGene(child, gene, getGene(*parents[uniformIndex(rng, 3)], gene));
  }
  return child;
}

void TuningSpace::mutate(
    MappingOptions& genome,
    double rate,
    std::mt19937_64& rng) const {
  for (size_t gene = 0; gene < kGeneCount; ++gene) {
    if (uniform01(rng) >= rate) {
      continue;
    }
    if (gene < 6) {
      setGene(genome, gene, pick(extentPool, rng));
    } else if (gene < 9) {
      setGene(genome, gene, pick(threadPool, rng));
    } else if (gene == 9) {
      setGene(
          genome,
          9,
          static_cast<int64_t>(
              fusionPool[uniformIndex(rng, fusionPool.size())]));
    } else if (gene < 13) {
      setGene(genome, gene, static_cast<int64_t>(rng() & 1));
    } else {
      setGene(genome, 13, pick(unrollPool, rng));
    }
  }
}

SessionInputs makeSessionInputs(
    const sem::SpecializedDef& def,
    uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Any value below the smallest input extent is a valid subscript into
  // every input tensor, whatever the indirection pattern.
  int64_t minExtent = std::numeric_limits<int64_t>::max();
  for (const auto& kv : def.vdef.tensors) {
    if (kv.second.role != lang::TensorRole::Input) {
      continue;
    }
    for (int64_t e : def.shapes.at(kv.first)) {
      minExtent = std::min(minExtent, e);
    }
  }
  if (minExtent == std::numeric_limits<int64_t>::max() || minExtent < 1) {
    minExtent = 1;
  }
  SessionInputs inputs;
  for (const auto& kv : def.vdef.tensors) {
    if (kv.second.role != lang::TensorRole::Input) {
      continue;
    }
    backend::TensorData t =
        backend::TensorData::zeros(kv.second.elemKind, def.shapes.at(kv.first));
    if (kv.second.elemKind == lang::ElemKind::Int) {
      backend::fillUniform(t, rng, 0, static_cast<double>(minExtent));
    } else {
      backend::fillUniform(t, rng, -1.0, 1.0);
    }
    inputs.tensors.emplace(kv.first, std::move(t));
  }
  for (const auto& kv : def.vdef.scalars) {
    inputs.scalars[kv.first] = uniform01(rng) * 2.0 - 1.0;
  }
  return inputs;
}

std::vector<Candidate> seedPopulation(
    const TuningSpace& space,
    const std::vector<MappingOptions>& starting,
    size_t size,
    std::mt19937_64& rng) {
  std::vector<Candidate> population;
  population.reserve(size);
  for (const auto& options : starting) {
    if (population.size() == size) {
      break;
    }
    Candidate cand;
    cand.genome = options;
    space.normalize(cand.genome);
    population.push_back(std::move(cand));
  }
  while (population.size() < size) {
    Candidate cand;
    cand.genome = space.randomGenome(rng);
    population.push_back(std::move(cand));
  }
  return population;
}

void evaluatePopulation(
    std::vector<Candidate>& population,
    const std::shared_ptr<const sem::SpecializedDef>& def,
    const SessionInputs& inputs,
    size_t jobs) {
  if (jobs <= 1) {
    for (auto& cand : population) {
      scoreCandidate(cand, def, inputs);
    }
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= population.size()) {
        return;
      }
      scoreCandidate(population[i], def, inputs);
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < jobs; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
}

std::vector<Candidate> breed(
    const std::vector<Candidate>& population,
    const TuningSpace& space,
    double mutationRate,
    std::mt19937_64& rng) {
  TC_CHECK(!population.empty(), "cannot breed an empty population");
  double totalFitness = 0.0;
  size_t best = 0;
  for (size_t i = 0; i < population.size(); ++i) {
    totalFitness += population[i].fitness;
    if (population[i].fitness > population[best].fitness) {
      best = i;
    }
  }
  if (totalFitness <= 0.0) {
    throwError(
        ErrorKind::DegeneratePopulation,
        "every candidate of the generation failed");
  }
  std::vector<Candidate> next;
  next.reserve(population.size());
  Candidate elite;
  elite.genome = population[best].genome;
  next.push_back(std::move(elite));
  while (next.size() < population.size()) {
    const Candidate& p0 = population[roulette(population, totalFitness, rng)];
    const Candidate& p1 = population[roulette(population, totalFitness, rng)];
    const Candidate& p2 = population[roulette(population, totalFitness, rng)];
    Candidate child;
    child.genome = space.crossover(p0.genome, p1.genome, p2.genome, rng);
    space.mutate(child.genome, mutationRate, rng);
    next.push_back(std::move(child));
  }
  return next;
}

MappingOptions tune(
    const std::shared_ptr<const sem::SpecializedDef>& def,
    const TuneOptions& budget,
    cache::Cache* cache,
    std::ostream* sessionLog,
    std::vector<GenerationLog>* logs) {
  TC_CHECK(budget.population >= 1, "population must hold at least one genome");
  TuningSpace space =
      TuningSpace::forSizes(def->sizes, budget.sharedMemoryBudget);

  std::vector<MappingOptions> starting;
  cache::CacheKey key;
  if (cache != nullptr) {
    key = cache::makeKey(def->vdef, def->shapes, MappingOptions{});
    if (auto hit = cache->lookup(key)) {
      starting.push_back(hit->options); // resume from the best known version
    }
  }
  for (const auto& extra : budget.extraStarting) {
    starting.push_back(extra);
  }
  if (budget.useBaselines) {
    for (const auto& baseline : baselineOptions()) {
      starting.push_back(baseline);
    }
  }

  std::mt19937_64 rng(budget.seed);
  std::vector<Candidate> population =
      seedPopulation(space, starting, budget.population, rng);
  SessionInputs inputs = makeSessionInputs(*def, budget.seed ^ fnv1a64("session-inputs"));

  std::string sessionId;
  {
    char buf[32];
    std::snprintf(
        buf,
        sizeof(buf),
        "tune-%016llx",
        static_cast<unsigned long long>(
            fnv1a64(key.canonicalTc + std::to_string(budget.seed))));
    sessionId = buf;
  }

  std::optional<Candidate> best;
  for (size_t generation = 0;; ++generation) {
    evaluatePopulation(population, def, inputs, budget.jobs);
    for (const auto& cand : population) {
      if (cand.status != CandidateStatus::Evaluated) {
        continue;
      }
      if (!best || cand.cost < best->cost) {
        best = cand;
      }
      if (cache != nullptr) {
        cache::CacheEntry entry;
        entry.key = key;
        entry.key.optionsDigest = cand.genome.digest();
        entry.options = cand.genome;
        entry.kernelText = cand.kernelText;
        entry.cost = cand.cost;
        entry.createdAt = static_cast<int64_t>(std::time(nullptr));
        entry.origin = cache::EntryOrigin::Tuned;
        cache->update(entry, sessionId);
      }
    }
    if (logs != nullptr) {
      GenerationLog record;
      record.generation = generation;
      record.population = population;
      record.bestSoFar = best ? *best : Candidate{};
      record.rngDigest = rngDigest(rng);
      logs->push_back(std::move(record));
    }
    if (sessionLog != nullptr) {
      *sessionLog << "{\"generation\":" << generation << ",\"best_cost\":"
                  << (best ? std::to_string(best->cost) : "null")
                  << ",\"genome\":" << (best ? best->genome.toJson() : "null")
                  << "}\n";
    }
    if (generation == budget.generations) {
      break;
    }
    try {
      population = breed(population, space, budget.mutationRate, rng);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegeneratePopulation) {
        throw;
      }
      population = seedPopulation(space, {}, budget.population, rng);
    }
  }
  if (!best) {
    throwError(
        ErrorKind::NoViableCandidate,
        "no genome of any generation compiled and ran");
  }
  return best->genome;
}

} // namespace tuner
} // namespace tc
