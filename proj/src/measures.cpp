#include "fkpath/measures.hpp"

namespace fkpath {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_measure: return "degenerate measure";
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::degenerate_step: return "degenerate step";
    case ErrorKind::enumeration_too_large: return "enumeration too large";
    case ErrorKind::horizon_exceeded: return "horizon exceeded";
    case ErrorKind::degenerate_particle_system: return "degenerate particle system";
    case ErrorKind::stability_violated: return "stability condition violated";
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::config: return "configuration error";
  }
  return "unknown error";
}

std::vector<std::size_t> sample_indices(std::span<const double> weights, std::size_t n,
                                        RandomSource& rng) {
  std::vector<double> cumulative(weights.size());
  double running = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    running += weights[i];
    cumulative[i] = running;
  }
  if (weights.empty() || !(running > 0.0)) {
    throw FkError(ErrorKind::degenerate_measure, "cannot sample from a zero-mass measure");
  }
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = rng.categorical(cumulative);
  return out;
}

}  // namespace fkpath
