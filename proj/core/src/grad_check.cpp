#include "fitb/grad_check.hpp"

#include <cmath>
#include <unordered_set>
#include <vector>

#include "fitb/error.hpp"
#include "fitb/rng.hpp"

namespace fitb {

GradCheckReport grad_check(const LossFn& f, ParameterStore<double>& store,
                           const GradCheckOptions& opts) {
  store.zero_grads();
  const double base = f(store, /*want_grad=*/true);
  if (!std::isfinite(base)) throw NumericError("grad_check: non-finite loss at base point");

  // Snapshot analytic gradients before probing perturbs anything.
  std::vector<std::pair<std::string, Tensor<double>>> analytic;
  analytic.reserve(store.size());
  for (const auto& name : store.names()) analytic.emplace_back(name, store.entry(name).grad);

  // Coordinate universe: (param index, coord index) flattened.
  const std::size_t total = store.coord_count();
  std::vector<std::size_t> coords;
  if (total <= opts.max_coords) {
    coords.resize(total);
    for (std::size_t i = 0; i < total; ++i) coords[i] = i;
  } else {
    Rng rng(opts.seed);
    std::unordered_set<std::size_t> seen;
    while (seen.size() < opts.max_coords)
      seen.insert(static_cast<std::size_t>(rng.randint(static_cast<std::uint64_t>(total))));
    coords.assign(seen.begin(), seen.end());
  }

  GradCheckReport report;
  report.coords_checked = coords.size();
  for (std::size_t flat : coords) {
    // Locate (param, offset) for the flat coordinate.
    std::size_t off = flat;
    std::size_t pi = 0;
    while (off >= store.entry(store.names()[pi]).value.size()) {
      off -= store.entry(store.names()[pi]).value.size();
      ++pi;
    }
    const std::string& name = store.names()[pi];
    auto& entry = store.entry(name);
    const double saved = entry.value[off];

    entry.value[off] = saved + opts.h;
    const double fp = f(store, false);
    entry.value[off] = saved - opts.h;
    const double fm = f(store, false);
    entry.value[off] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("grad_check: non-finite loss while probing " + name);

    const double numeric = (fp - fm) / (2.0 * opts.h);
    const double a = analytic[pi].second[off];
    const double rel = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-8);
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = name;
      report.worst_coord = off;
    }
  }

  // Leave the store as we found it: analytic gradients restored.
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    auto& e = store.entry(analytic[i].first);
    e.grad = analytic[i].second;
  }
  return report;
}

}  // namespace fitb
