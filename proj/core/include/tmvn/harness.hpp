#pragma once

// Test-problem families and the benchmark runner.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmvn/estimator.hpp"
#include "tmvn/problem.hpp"

namespace tmvn {

enum class ProblemKind { Example1, Example2, OrthantHalf, RandomCorr, TailFamily, Custom };

std::string to_string(ProblemKind kind);
ProblemKind parse_kind(const std::string& text);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Example1;
  Index d = 2;
  /// Scalar bounds applied to every coordinate; each kind has defaults.
  std::optional<double> lower;
  std::optional<double> upper;
  double gamma = 1.0;      // tail_family: l = gamma * 1
  std::uint64_t seed = 1;  // random_corr: matrix seed
  std::string sigma_path;      // custom
  std::string sigma_inv_path;  // custom
  std::string lower_path;      // custom, overrides `lower`
  std::string upper_path;      // custom, overrides `upper`
  std::string name;            // label in reports; derived if empty

  std::string label() const;
};

ProblemSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemSpec& spec);

/// (1/2) I + (1/2) 1 1^T and its closed-form inverse 2 I - 2/(d+1) 1 1^T.
Matrix example1_precision(Index d);
Matrix example1_covariance(Index d);
/// Banded precision 2^{-|i-j|} for |i-j| <= d/2.
Matrix example2_precision(Index d);
/// (1/2) I + (1/2) 1 1^T, the equicorrelated orthant family.
Matrix orthant_covariance(Index d);

/// Random correlation matrix whose eigenvalues are uniform on the simplex
/// {sum = d}: Haar rotation of the spectrum, then Givens rotations that set
/// the diagonal to one without changing the eigenvalues.
Matrix random_correlation(Index d, std::uint64_t seed);

/// The Givens step alone: turns a symmetric positive semidefinite matrix
/// with trace d into one with unit diagonal and the same eigenvalues.
Matrix unit_diagonal_rotation(Matrix a);

TruncationProblem make_problem(const ProblemSpec& spec);

struct BenchmarkOptions {
  unsigned threads = 0;
};

struct BenchmarkCell {
  std::string spec;
  ProblemKind kind = ProblemKind::Custom;
  Index d = 0;
  Method method = Method::Met;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double log_estimate = 0.0;
  double rel_error = 0.0;
  std::optional<double> log_upper_bound;
  /// Expected accept-reject acceptance, estimate / exp(psi*).
  std::optional<double> acceptance_rate;
  bool used_fallback = false;
  double wall_time_ms = 0.0;
};

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

FiveNumber five_number(const std::vector<double>& values);

struct BenchmarkSummary {
  std::string spec;
  Index d = 0;
  Method method = Method::Met;
  Index cells = 0;
  Index failures = 0;
  std::optional<FiveNumber> rel_error;
  std::optional<FiveNumber> acceptance_rate;
  std::optional<FiveNumber> wall_time_ms;
};

struct BenchmarkReport {
  Index n = 0;
  std::vector<BenchmarkCell> cells;
  std::vector<BenchmarkSummary> summaries;
};

/// Every spec x seed pair is one problem instance (random_corr specs take
/// the cell seed as their matrix seed); each method runs on each instance
/// with the same seed. Failures are recorded per cell.
BenchmarkReport run_benchmark(const std::vector<ProblemSpec>& specs,
                              const std::vector<Method>& methods, Index n,
                              const std::vector<std::uint64_t>& seeds,
                              const BenchmarkOptions& options = {});

/// A bench input file: {"specs": [...], "methods": [...], "n": N,
/// "seeds": [...]} or a bare array of specs.
struct BenchmarkPlan {
  std::vector<ProblemSpec> specs;
  std::vector<Method> methods{Method::Sov, Method::Met};
  Index n = 10000;
  std::vector<std::uint64_t> seeds{1};
};

BenchmarkPlan plan_from_json(const nlohmann::json& j);
BenchmarkPlan read_plan_file(const std::string& path);

void write_cells_csv(std::ostream& out, const BenchmarkReport& report);
nlohmann::json summary_json(const BenchmarkReport& report);
/// d, method, median relative error, median wall time; one line per summary.
void write_summary_tsv(std::ostream& out, const BenchmarkReport& report);

}  // namespace tmvn
