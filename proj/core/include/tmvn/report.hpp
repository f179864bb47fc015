#pragma once

// JSON records for results. Every probability appears both as a log and as
// a plain number; non-finite values serialize as null.

#include <nlohmann/json.hpp>

#include "tmvn/bounds.hpp"
#include "tmvn/estimator.hpp"
#include "tmvn/probit.hpp"
#include "tmvn/sampler.hpp"
#include "tmvn/tilting.hpp"

namespace tmvn {

inline constexpr int kSchemaVersion = 1;

/// Finite numbers pass through; NaN and infinities become null.
nlohmann::json number_or_null(double v);

nlohmann::json to_json(const EstimateResult& r);
nlohmann::json to_json(const TiltingSolution& t);
nlohmann::json to_json(const SampleBatch& b);  // metadata only, no draws
nlohmann::json to_json(const LowerBoundSolution& lb);
nlohmann::json to_json(const PosteriorDraws& p, const std::vector<std::string>& names);
nlohmann::json to_json(const VreRow& row);

}  // namespace tmvn
