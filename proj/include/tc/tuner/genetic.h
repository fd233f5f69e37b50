/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tc/backend/tensor_data.h"
#include "tc/cache/cache.h"
#include "tc/sem/specialize.h"
#include "tc/tuner/options.h"

namespace tc {
namespace tuner {

/*
 * Admissible values per genome position. Extent-like genes (tile, grid,
 * block shapes) draw from the powers of two up to the largest bound size
 * united with the ceil divisors of every bound size; the unroll gene from
 * the powers of two up to 4096. A genome is 14 genes: three tile sizes,
 * three grid extents, three block extents, the fusion strategy, the three
 * promotion/copy-unroll switches and the unroll factor. The shared budget
 * and the rng seed are session configuration, not genes.
 */
struct TuningSpace {
  std::vector<int64_t> extentPool; // tile and grid genes
  std::vector<int64_t> threadPool; // block genes, capped by the machine
  std::vector<int64_t> unrollPool;
  std::vector<sched::FusionStrategy> fusionPool;
  int64_t sharedMemoryBudget = 48 * 1024;

  static constexpr size_t kGeneCount = 14;

  static TuningSpace forSizes(
      const std::map<std::string, int64_t>& sizes,
      int64_t sharedMemoryBudget = 48 * 1024);

  MappingOptions randomGenome(std::mt19937_64& rng) const;

  /* Pins the non-gene fields (budget, seed, tile vector length) so equal
   * knob settings always produce equal genomes and digests. */
  void normalize(MappingOptions& genome) const;

  /* Three-parent uniform crossover: every gene comes from one of the
   * parents, chosen uniformly. */
  MappingOptions crossover(
      const MappingOptions& a,
      const MappingOptions& b,
      const MappingOptions& c,
      std::mt19937_64& rng) const;

  /* Each gene is independently replaced by a random admissible value with
   * probability `rate`. */
  void mutate(MappingOptions& genome, double rate, std::mt19937_64& rng) const;
};

enum class CandidateStatus { Pending, Compiled, Evaluated, Failed };

struct Candidate {
  MappingOptions genome;
  CandidateStatus status = CandidateStatus::Pending;
  int64_t cost = 0;
  double fitness = 0.0; // 1 / cost; 0 for failed candidates
  std::string kernelText;
  std::string failure; // first diagnostic for failed candidates
};

/* The one random input set every candidate of a session is scored on. */
struct SessionInputs {
  backend::TensorMap tensors;
  backend::ScalarMap scalars;
};

/* Deterministic inputs: floats uniform in [-1, 1); integer tensors
 * uniform below the smallest input-tensor extent, which keeps any
 * indirect subscript of an input in bounds. */
SessionInputs makeSessionInputs(const sem::SpecializedDef& def, uint64_t seed);

/* Starting configurations followed by uniform random top-up. */
std::vector<Candidate> seedPopulation(
    const TuningSpace& space,
    const std::vector<MappingOptions>& starting,
    size_t size,
    std::mt19937_64& rng);

/* Compiles (full pipeline through lowering) and emulates every pending
 * candidate on the session inputs. Failures of any stage — including
 * genomes the machine model rejects and kernels that race — mark the
 * candidate failed with fitness 0 and never abort the generation. With
 * jobs > 1 candidates are scored by a worker pool; results are identical
 * to sequential evaluation since every worker writes only its own slot. */
void evaluatePopulation(
    std::vector<Candidate>& population,
    const std::shared_ptr<const sem::SpecializedDef>& def,
    const SessionInputs& inputs,
    size_t jobs = 1);

/* Next generation: the best candidate survives unchanged (elitism, an
 * extension that makes best-so-far monotone), the rest are bred from
 * three fitness-proportionally selected parents (with replacement) by
 * uniform crossover plus mutation. Throws Error(DegeneratePopulation)
 * when every candidate failed. */
std::vector<Candidate> breed(
    const std::vector<Candidate>& population,
    const TuningSpace& space,
    double mutationRate,
    std::mt19937_64& rng);

struct GenerationLog {
  size_t generation = 0;
  std::vector<Candidate> population; // post-evaluation snapshot
  Candidate bestSoFar;
  std::string rngDigest; // fingerprint of the generator state
};

struct TuneOptions {
  size_t population = 100;
  size_t generations = 25;
  double mutationRate = 0.05;
  uint64_t seed = 0;
  int64_t sharedMemoryBudget = 48 * 1024;
  size_t jobs = 1;
  // Extra starting configurations, ahead of the built-in baselines.
  std::vector<MappingOptions> extraStarting;
  bool useBaselines = true;
};

/*
 * Full session: seed (cached best first, then baselines, then random
 * top-up), then generations+1 rounds of evaluation with breeding in
 * between; a degenerate generation restarts from fresh random genomes.
 * Every evaluated candidate is offered to the cache, whose min-update
 * keeps the best version and appends the performance history. Writes one
 * line-delimited JSON record per generation (generation, best cost,
 * genome) to `sessionLog` and full snapshots to `logs` when given.
 * Returns the best genome ever evaluated; throws
 * Error(NoViableCandidate) when every genome of every generation failed.
 */
MappingOptions tune(
    const std::shared_ptr<const sem::SpecializedDef>& def,
    const TuneOptions& budget,
    cache::Cache* cache = nullptr,
    std::ostream* sessionLog = nullptr,
    std::vector<GenerationLog>* logs = nullptr);

} // namespace tuner
} // namespace tc
