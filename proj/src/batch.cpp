#include "nrsim/batch.hpp"

#include <algorithm>
#include <exception>
#include <optional>

#include <fmt/format.h>
#include <omp.h>

#include "nrsim/errors.hpp"

namespace nrsim {

std::vector<RunResult> run_batch_serial(std::span<const Scenario> scenarios) {
  std::vector<RunResult> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(run_scenario(s));
  return out;
}

std::vector<RunResult> run_batch_parallel(std::span<const Scenario> scenarios, int jobs) {
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
  std::vector<std::optional<RunResult>> slots(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();

  // Runs differ a lot in length (600 s vs 3600 s), hence dynamic.
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      slots[i] = run_scenario(scenarios[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<Scenario> ta_delta_sweep(const Scenario& base, std::span<const int> deltas) {
  auto it = std::find_if(base.cells.begin(), base.cells.end(),
                         [](const auto& c) { return c.attack.kind == gnb::AttackKind::TaDelta; });
  if (it == base.cells.end()) throw ConfigInvalid("cells", "no cell carries a ta_delta attack");
  const auto idx = static_cast<std::size_t>(it - base.cells.begin());

  std::vector<Scenario> out;
  out.reserve(deltas.size());
  for (int d : deltas) {
    Scenario s = base;
    s.cells[idx].attack.deltaUnits = d;
    s.name = fmt::format("{}_delta{}", base.name, d);
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nrsim
