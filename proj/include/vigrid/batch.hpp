#ifndef VIGRID_BATCH_HPP
#define VIGRID_BATCH_HPP

#include <cstdint>
#include <vector>

#include "vigrid/analysis.hpp"
#include "vigrid/scenario.hpp"

namespace vigrid {

struct BatchSpec {
  std::size_t runs = 1;
  std::uint64_t base_seed = 0;  // run i uses base_seed + i
  unsigned workers = 1;
};

struct BatchReport {
  std::vector<double> times;
  std::vector<double> omega_max;  // envelope across runs and buses
  std::vector<double> omega_min;
  std::vector<RunClass> classes;  // per run, in run order
  std::size_t convergent = 0;
  std::size_t oscillatory = 0;
  std::size_t divergent = 0;
};

/// N independent runs with derived seeds, fanned out over a fixed worker
/// pool and joined in run order; the report is identical for any worker
/// count.
BatchReport run_batch(const Scenario& scenario, const BatchSpec& spec);

}  // namespace vigrid

#endif
