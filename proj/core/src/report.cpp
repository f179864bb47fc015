#include "tmvn/report.hpp"

#include <cmath>

namespace tmvn {
namespace {

void put_log(nlohmann::json& j, const std::string& name, std::optional<double> log_value) {
  if (log_value) {
    j["log_" + name] = number_or_null(*log_value);
    j[name] = number_or_null(std::exp(*log_value));
  } else {
    j["log_" + name] = nullptr;
    j[name] = nullptr;
  }
}

nlohmann::json vec(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v[i]));
  return a;
}

}  // namespace

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json to_json(const EstimateResult& r) {
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["d"] = r.d;
  j["m"] = r.m;
  j["n"] = r.n_total;
  put_log(j, "estimate", r.log_estimate);
  j["rel_error"] = number_or_null(r.rel_error);
  put_log(j, "upper_bound", r.log_upper_bound);
  put_log(j, "lower_bound", r.log_lower_bound);
  j["worst_case_rel_error"] =
      r.worst_case_rel_error ? number_or_null(*r.worst_case_rel_error) : nlohmann::json(nullptr);
  j["seed"] = r.seed;
  j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

nlohmann::json to_json(const TiltingSolution& t) {
  nlohmann::json j;
  put_log(j, "envelope", t.psi_star);
  j["grad_norm"] = number_or_null(t.grad_norm);
  j["kkt_residual"] = number_or_null(t.kkt_residual);
  j["iterations"] = t.iterations;
  j["used_fallback"] = t.used_fallback;
  return j;
}

nlohmann::json to_json(const SampleBatch& b) {
  nlohmann::json j;
  j["rows"] = b.samples.rows();
  j["cols"] = b.samples.cols();
  j["proposals_used"] = b.proposals_used;
  j["acceptance_rate"] = number_or_null(b.acceptance_rate);
  put_log(j, "envelope", b.log_envelope);
  put_log(j, "acceptance_estimate", std::log(b.acceptance_rate) + b.log_envelope);
  j["seed"] = b.seed;
  j["wall_time_ms"] = b.wall_time_ms;
  return j;
}

nlohmann::json to_json(const LowerBoundSolution& lb) {
  nlohmann::json j;
  put_log(j, "lower_bound", lb.log_lower);
  j["iterations"] = lb.iterations;
  j["converged"] = lb.converged;
  return j;
}

nlohmann::json to_json(const PosteriorDraws& p, const std::vector<std::string>& names) {
  nlohmann::json coefs = nlohmann::json::array();
  for (Index k = 0; k < p.mean.size(); ++k) {
    coefs.push_back({{"name", k < static_cast<Index>(names.size()) ? names[static_cast<std::size_t>(k)]
                                                                     : "beta" + std::to_string(k)},
                     {"mean", number_or_null(p.mean[k])},
                     {"quantiles", vec(p.quantiles.row(k).transpose())}});
  }
  nlohmann::json levels = nlohmann::json::array();
  for (const double l : kSummaryLevels) levels.push_back(l);
  return {{"draws", p.beta.rows()},
          {"acceptance_rate", number_or_null(p.acceptance_rate)},
          {"proposals_used", p.proposals},
          {"quantile_levels", levels},
          {"coefficients", coefs},
          {"seed", p.seed},
          {"wall_time_ms", p.wall_time_ms}};
}

nlohmann::json to_json(const VreRow& row) {
  nlohmann::json j;
  j["gamma"] = row.gamma;
  put_log(j, "envelope", row.log_psi_star);
  put_log(j, "met_estimate", row.log_met);
  j["met_rel_error"] = number_or_null(row.met_rel_error);
  put_log(j, "sov_estimate", row.log_sov);
  j["sov_rel_error"] = number_or_null(row.sov_rel_error);
  j["envelope_ratio"] = number_or_null(row.envelope_ratio);
  put_log(j, "asymptote", row.log_asymptote);
  return j;
}

}  // namespace tmvn
