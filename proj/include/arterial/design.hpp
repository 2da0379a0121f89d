#pragma once

// Dataset -> design matrix for one model specification.

#include <optional>
#include <vector>

#include "arterial/case_control.hpp"
#include "arterial/likelihoods.hpp"

namespace arterial {

/// Rows for the model's columns at its slice, optionally restricted to one
/// split. Strata keep their case-first member order.
[[nodiscard]] inline ModelData build_model_data(const Dataset& ds, const ModelSpec& spec,
                                                std::optional<Split> only = std::nullopt) {
  spec.validate();
  for (const auto& c : spec.covariates)
    if (!is_feature_name(c)) throw ConfigError("unknown covariate '" + c + "'");
  if (only && !ds.is_split()) throw DataError("dataset has no split labels");

  ModelData md;
  md.n_columns = spec.columns().size();
  auto slice = static_cast<std::size_t>(spec.slice - 1);
  std::vector<double> rows;
  std::vector<int> ys;
  auto push = [&](const Event& e) {
    if (spec.has_intercept()) rows.push_back(1.0);
    for (const auto& c : spec.covariates) rows.push_back(feature_value(e.slices[slice], c));
    ys.push_back(e.is_crash ? 1 : 0);
  };
  for (std::size_t i = 0; i < ds.strata.size(); ++i) {
    if (only && ds.split[i] != *only) continue;
    const auto& st = ds.strata[i];
    rows.clear();
    ys.clear();
    push(st.case_event);
    for (const auto& c : st.controls) push(c);
    md.add_stratum(rows, ys, st.id);
  }
  return md;
}

}  // namespace arterial
