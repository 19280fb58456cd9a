#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aiq/factorization.hpp"
#include "aiq/io.hpp"

namespace aiq {

enum class Stage { analyze, idempotentize, reconstruct, factorize };

const char* stage_name(Stage s);

struct PipelineOptions {
  Tolerances tol;
  std::uint64_t seed = 1;
  int samples = 200;      // axiom-defect probes
  int extension_n = 1;    // largest n for M_n ⊗ A defect checks
  std::size_t twirl_cap = 10000;
  double bound_constant = 100.0;  // asserted bounds read value ≤ c·η + floor
  bool timings = false;
};

json options_to_json(const PipelineOptions& o);
PipelineOptions options_from_json(const json& j);

struct PipelineResult {
  json report;
  std::optional<Channel> phi_tilde;
  bool bounds_hold = true;
};

/// Runs every stage up to and including `stage`. Module errors are rethrown with the stage
/// name prepended; the report records every asserted bound under "bounds".
PipelineResult run_pipeline(const json& channel_doc, Stage stage, const PipelineOptions& opt);

struct VerifyCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Recomputes everything in a report from its embedded input and recorded matrices.
std::vector<VerifyCheck> verify_report(const json& report);

struct GenRequest {
  std::string kind;  // example | pinching | idempotent | random-ucp | identity | depolarizing
  double eta = 0.0;
  std::string blocks;
  int dim = 0;
  int rank = 0;
  std::uint64_t seed = 0;
};

/// Channel document for a generator request. BadSpec on inconsistent parameters.
json generate_channel(const GenRequest& r);

/// (1−t)Φ + tΨ with Ψ a seeded random UCP map; t = 0 returns the document unchanged.
json perturb_channel(const json& doc, double t, std::uint64_t seed);

/// The generator corpus used by `demo` and the round-trip test: (name, channel document).
std::vector<std::pair<std::string, json>> builtin_corpus();

}  // namespace aiq
