#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmvn/bounds.hpp"
#include "tmvn/csv.hpp"
#include "tmvn/error.hpp"
#include "tmvn/estimator.hpp"
#include "tmvn/harness.hpp"
#include "tmvn/probit.hpp"
#include "tmvn/report.hpp"
#include "tmvn/sampler.hpp"
#include "tmvn/special_fn.hpp"
#include "tmvn/tilting.hpp"

namespace tmvn::cli {
namespace {

using nlohmann::json;

struct ProblemArgs {
  std::string sigma;
  std::string sigma_inv;
  std::string matrix;
  std::string problem;
  Index d = 0;
  double gamma = 1.0;
  std::uint64_t matrix_seed = 1;
  std::string lower;
  std::string upper;
  bool no_reorder = false;
};

struct RunArgs {
  Index n = 10000;
  std::uint64_t seed = 1;
  std::string method = "met";
  std::string output;
  std::string meta;
  std::string format = "csv";
  unsigned threads = 0;
  bool quiet = false;
  // bounds
  std::optional<double> eps;
  double alpha = 0.05;
  bool skip_lower = false;
  // sample
  std::uint64_t max_proposals = 100'000'000;
  // probit
  std::string data;
  std::string response;
  double prior_scale = 1.0;
  // bench
  std::string spec;
  std::optional<Index> bench_n;
  std::vector<std::uint64_t> seeds;
  std::string tsv;
};

using Table = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string fmt_log(double log_v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::exp(log_v) << "  (log " << log_v << ")";
  return os.str();
}

void print_table(std::ostream& err, const Table& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) err << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  return f;
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    auto f = open_output(path);
    f << j.dump(2) << '\n';
  }
}

bool is_file(const std::string& text) {
  std::error_code ec;
  return std::filesystem::is_regular_file(text, ec);
}

Vector resolve_bounds(const std::string& text, Index m, const Vector& fallback) {
  if (text.empty()) return fallback;
  Vector v = is_file(text) ? read_vector_csv(text) : parse_vector_list(text);
  if (v.size() == 1 && m > 1) return Vector::Constant(m, v[0]);
  if (v.size() != m) {
    throw InvalidArgument("bounds have " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(m));
  }
  return v;
}

Matrix invert_spd(const Matrix& p) {
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("precision matrix is not positive definite");
  Matrix s = llt.solve(Matrix::Identity(p.rows(), p.cols()));
  return 0.5 * (s + s.transpose());
}

// Family names accepted in place of a CSV path.
std::optional<ProblemKind> family(const std::string& name, bool precision) {
  if (precision) {
    if (name == "example1") return ProblemKind::Example1;
    if (name == "example2") return ProblemKind::Example2;
  } else {
    if (name == "orthant" || name == "orthant_half") return ProblemKind::OrthantHalf;
    if (name == "random_corr") return ProblemKind::RandomCorr;
    if (name == "tail_family") return ProblemKind::TailFamily;
  }
  return std::nullopt;
}

struct BuiltProblem {
  TruncationProblem problem;
  json description;
};

BuiltProblem build_problem(const ProblemArgs& a) {
  const int sources = !a.sigma.empty() + !a.sigma_inv.empty() + !a.matrix.empty() + !a.problem.empty();
  if (sources != 1) {
    throw InvalidArgument("give exactly one of --sigma, --sigma-inv, --matrix, --problem");
  }
  json desc;
  std::optional<TruncationProblem> base;

  if (!a.problem.empty()) {
    std::ifstream f(a.problem);
    if (!f) throw InvalidArgument("cannot open problem file '" + a.problem + "'");
    const ProblemSpec spec = spec_from_json(json::parse(f));
    base = make_problem(spec);
    desc = to_json(spec);
  } else if (!a.matrix.empty()) {
    const Matrix m = read_matrix_csv(a.matrix);
    base = TruncationProblem::from_constraints(m, Vector::Constant(m.rows(), -kInf),
                                               Vector::Constant(m.rows(), kInf));
    desc = {{"matrix", a.matrix}};
  } else {
    const bool precision = !a.sigma_inv.empty();
    const std::string& source = precision ? a.sigma_inv : a.sigma;
    if (const auto kind = family(source, precision)) {
      if (a.d < 1) throw InvalidArgument("--d is required with a named family");
      ProblemSpec spec;
      spec.kind = *kind;
      spec.d = a.d;
      spec.gamma = a.gamma;
      spec.seed = a.matrix_seed;
      base = make_problem(spec);
      desc = to_json(spec);
    } else if (source == "identity") {
      if (a.d < 1) throw InvalidArgument("--d is required with a named family");
      base = TruncationProblem::from_covariance(Matrix::Identity(a.d, a.d), Vector::Constant(a.d, -kInf),
                                                Vector::Constant(a.d, kInf));
      desc = {{"sigma", "identity"}, {"d", a.d}};
    } else {
      if (!is_file(source)) throw InvalidArgument("'" + source + "' is neither a family name nor a file");
      Matrix s = read_matrix_csv(source);
      if (precision) s = invert_spd(s);
      base = TruncationProblem::from_covariance(s, Vector::Constant(s.rows(), -kInf),
                                                Vector::Constant(s.rows(), kInf));
      desc = {{precision ? "sigma_inv" : "sigma", source}};
    }
  }

  const Index m = base->m();
  const Vector lower = resolve_bounds(a.lower, m, base->lower());
  const Vector upper = resolve_bounds(a.upper, m, base->upper());
  if (!a.lower.empty()) desc["lower_arg"] = a.lower;
  if (!a.upper.empty()) desc["upper_arg"] = a.upper;
  desc["m"] = m;
  desc["d"] = base->d();
  TruncationProblem p = base->covariance_input()
                            ? TruncationProblem::from_covariance(base->matrix(), lower, upper)
                            : TruncationProblem::from_constraints(base->matrix(), lower, upper);
  return {std::move(p), std::move(desc)};
}

json envelope_json(const std::string& command, const RunArgs& r, const ProblemArgs& p, json problem) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"seed", r.seed},
          {"reorder", !p.no_reorder},
          {"problem", std::move(problem)}};
}

void write_draws(const Matrix& draws, const std::vector<std::string>& header, const RunArgs& r,
                 std::ostream& out) {
  if (r.format == "bin") {
    if (r.output.empty()) throw InvalidArgument("--format bin needs --output");
    auto f = open_output(r.output, true);
    const char magic[8] = {'T', 'M', 'V', 'N', 'C', 'O', 'L', '1'};
    f.write(magic, sizeof magic);
    const std::uint64_t rows = static_cast<std::uint64_t>(draws.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(draws.cols());
    f.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    f.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    f.write(reinterpret_cast<const char*>(draws.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    return;
  }
  auto write = [&](std::ostream& os) {
    if (!header.empty()) {
      for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
      os << '\n';
    }
    write_matrix_csv(os, draws);
  };
  if (r.output.empty()) {
    write(out);
  } else {
    auto f = open_output(r.output);
    write(f);
  }
}

int cmd_cdf(const ProblemArgs& pa, const RunArgs& r, std::ostream& out, std::ostream& err) {
  const BuiltProblem bp = build_problem(pa);
  const FactoredProblem fp = factorize(bp.problem, !pa.no_reorder);
  const Method method = parse_method(r.method);
  EstimateOptions eo;
  eo.threads = r.threads;

  std::optional<TiltingSolution> tilt;
  try {
    tilt = solve_tilting(fp);
  } catch (const NoConvergence&) {
    if (method == Method::Met) throw;
  }
  std::optional<LowerBoundSolution> lb;
  if (!r.skip_lower && fp.m() == fp.d()) lb = lower_bound(fp);

  EstimateResult res = tilt ? estimate(fp, method, *tilt, r.n, r.seed,
                                       lb ? std::optional<double>(lb->log_lower) : std::nullopt, eo)
                            : estimate(fp, method, r.n, r.seed, eo);
  json j = envelope_json("cdf", r, pa, bp.description);
  j["result"] = to_json(res);
  j["tilting"] = tilt ? to_json(*tilt) : json(nullptr);
  j["lower_bound"] = lb ? to_json(*lb) : json(nullptr);
  emit_json(j, r.output, out);

  if (!r.quiet) {
    Table t{{"method", to_string(res.method)},
            {"dimension", std::to_string(res.d)},
            {"points", std::to_string(res.n_total)},
            {"estimate", fmt_log(res.log_estimate)},
            {"rel. error", fmt(res.rel_error)}};
    if (res.log_upper_bound) t.emplace_back("upper bound", fmt_log(*res.log_upper_bound));
    if (res.log_lower_bound) t.emplace_back("lower bound", fmt_log(*res.log_lower_bound));
    if (res.worst_case_rel_error) t.emplace_back("worst-case rel. error", fmt(*res.worst_case_rel_error));
    print_table(err, t);
  }
  return kOk;
}

int cmd_bounds(const ProblemArgs& pa, const RunArgs& r, std::ostream& out, std::ostream& err) {
  const BuiltProblem bp = build_problem(pa);
  const FactoredProblem fp = factorize(bp.problem, !pa.no_reorder);
  const TiltingSolution tilt = solve_tilting(fp);
  json j = envelope_json("bounds", r, pa, bp.description);
  j["tilting"] = to_json(tilt);
  Table t{{"upper bound", fmt_log(tilt.psi_star)}};
  double log_lower = -kInf;
  if (fp.m() == fp.d()) {
    const LowerBoundSolution lb = lower_bound(fp);
    log_lower = lb.log_lower;
    j["lower_bound"] = to_json(lb);
    t.emplace_back("lower bound", fmt_log(lb.log_lower));
    t.emplace_back("ratio upper/lower", fmt(std::exp(tilt.psi_star - lb.log_lower)));
  } else {
    j["lower_bound"] = nullptr;
  }
  if (r.eps) {
    const std::uint64_t n = hoeffding_n(tilt.psi_star, log_lower, *r.eps, r.alpha);
    j["hoeffding"] = {{"eps", *r.eps}, {"alpha", r.alpha}, {"n", n}};
    t.emplace_back("Hoeffding n", std::to_string(n));
  }
  emit_json(j, r.output, out);
  if (!r.quiet) print_table(err, t);
  return kOk;
}

int cmd_sample(const ProblemArgs& pa, const RunArgs& r, std::ostream& out, std::ostream& err) {
  const BuiltProblem bp = build_problem(pa);
  SamplerOptions so;
  so.threads = r.threads;
  so.max_proposals = r.max_proposals;
  const SampleBatch batch = sample_covariance_form(bp.problem, r.n, r.seed, !pa.no_reorder, so);

  json j = envelope_json("sample", r, pa, bp.description);
  j["sampler"] = to_json(batch);
  j["format"] = r.format;
  if (!r.output.empty()) j["output"] = r.output;
  write_draws(batch.samples, {}, r, out);
  if (!r.meta.empty()) {
    emit_json(j, r.meta, out);
  } else if (!r.output.empty()) {
    emit_json(j, "", out);
  }
  if (!r.quiet) {
    print_table(err, {{"draws", std::to_string(batch.samples.rows())},
                      {"proposals", std::to_string(batch.proposals_used)},
                      {"acceptance rate", fmt(batch.acceptance_rate)},
                      {"envelope", fmt_log(batch.log_envelope)}});
  }
  return kOk;
}

int cmd_probit(const RunArgs& r, std::ostream& out, std::ostream& err) {
  if (r.data.empty() || r.response.empty()) throw InvalidArgument("probit needs --data and --response");
  const ProbitModel model = read_probit_csv(r.data, r.response, r.prior_scale);
  SamplerOptions so;
  so.threads = r.threads;
  so.max_proposals = r.max_proposals;
  const PosteriorDraws post = sample_posterior(model, r.n, r.seed, so);

  json j{{"schema_version", kSchemaVersion},
         {"command", "probit"},
         {"seed", r.seed},
         {"data", r.data},
         {"response", r.response},
         {"prior_scale", r.prior_scale},
         {"observations", model.m()},
         {"posterior", to_json(post, model.names())}};
  if (!r.output.empty()) write_draws(post.beta, model.names(), r, out);
  emit_json(j, r.meta, out);

  if (!r.quiet) {
    Table t{{"acceptance rate", fmt(post.acceptance_rate)}, {"proposals", std::to_string(post.proposals)}};
    for (Index k = 0; k < model.k(); ++k) {
      std::ostringstream os;
      os << std::setprecision(4) << post.mean[k] << "  [" << post.quantiles(k, 0) << ", "
         << post.quantiles(k, 4) << "]";
      t.emplace_back(model.names()[static_cast<std::size_t>(k)], os.str());
    }
    print_table(err, t);
  }
  return kOk;
}

int cmd_bench(const RunArgs& r, std::ostream& out, std::ostream& err) {
  if (r.spec.empty()) throw InvalidArgument("bench needs --spec");
  BenchmarkPlan plan = read_plan_file(r.spec);
  if (r.bench_n) plan.n = *r.bench_n;
  if (!r.seeds.empty()) plan.seeds = r.seeds;
  BenchmarkOptions bo;
  bo.threads = r.threads;
  const BenchmarkReport report = run_benchmark(plan.specs, plan.methods, plan.n, plan.seeds, bo);

  if (!r.output.empty()) {
    auto f = open_output(r.output);
    write_cells_csv(f, report);
  }
  if (!r.tsv.empty()) {
    auto f = open_output(r.tsv);
    write_summary_tsv(f, report);
  }
  json j{{"schema_version", kSchemaVersion}, {"command", "bench"}, {"spec", r.spec}};
  j["summary"] = summary_json(report);
  emit_json(j, r.meta, out);
  if (r.output.empty() && !r.quiet) write_cells_csv(err, report);
  if (!r.quiet) {
    for (const auto& s : report.summaries) {
      std::ostringstream os;
      os << to_string(s.method) << " cells=" << s.cells << " failures=" << s.failures;
      if (s.rel_error) os << " median rel. error=" << fmt(s.rel_error->median);
      err << s.spec << "  " << os.str() << '\n';
    }
  }
  return kOk;
}

void add_problem_options(CLI::App* cmd, ProblemArgs& p) {
  cmd->add_option("--sigma", p.sigma, "Covariance: CSV path, identity, orthant_half, random_corr, tail_family");
  cmd->add_option("--sigma-inv", p.sigma_inv, "Precision: CSV path, example1, example2");
  cmd->add_option("--matrix", p.matrix, "Constraint matrix A (m x d, m <= d) as CSV");
  cmd->add_option("--problem", p.problem, "Problem spec as a JSON file");
  cmd->add_option("--d", p.d, "Dimension for named families")->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", p.gamma, "Tail level for tail_family");
  cmd->add_option("--matrix-seed", p.matrix_seed, "Seed of the random_corr matrix");
  cmd->add_option("--lower", p.lower, "Lower bounds: scalar, comma list or CSV path");
  cmd->add_option("--upper", p.upper, "Upper bounds: scalar, comma list or CSV path");
  cmd->add_flag("--no-reorder", p.no_reorder, "Keep the input variable order");
}

void add_run_options(CLI::App* cmd, RunArgs& r) {
  cmd->add_option("--n", r.n, "Sample size")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", r.seed, "Random seed");
  cmd->add_option("--threads", r.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--quiet", r.quiet, "No table on stderr");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Normal probabilities and exact sampling under linear restrictions"};
  app.require_subcommand(1);
  ProblemArgs pa;
  RunArgs r;

  auto* cdf = app.add_subcommand("cdf", "Estimate P(l <= X <= u) or P(l <= A Z <= u)");
  add_problem_options(cdf, pa);
  add_run_options(cdf, r);
  cdf->add_option("--method", r.method, "sov or met")->check(CLI::IsMember({"sov", "met", "SOV", "MET"}));
  cdf->add_option("--output", r.output, "Write the JSON here instead of stdout");
  cdf->add_flag("--skip-lower", r.skip_lower, "Do not compute the deterministic lower bound");

  auto* bnd = app.add_subcommand("bounds", "Deterministic lower and upper bounds");
  add_problem_options(bnd, pa);
  bnd->add_option("--seed", r.seed, "Recorded in the output");
  bnd->add_option("--eps", r.eps, "Absolute error target for the Hoeffding sample size")
      ->check(CLI::PositiveNumber);
  bnd->add_option("--alpha", r.alpha, "Confidence level complement")->check(CLI::Range(0.0, 1.0));
  bnd->add_option("--output", r.output, "Write the JSON here instead of stdout");
  bnd->add_flag("--quiet", r.quiet, "No table on stderr");

  auto* smp = app.add_subcommand("sample", "Exact draws from the truncated law");
  add_problem_options(smp, pa);
  add_run_options(smp, r);
  smp->add_option("--output", r.output, "Draws file (CSV to stdout if omitted)");
  smp->add_option("--meta", r.meta, "JSON metadata file");
  smp->add_option("--format", r.format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
  smp->add_option("--max-proposals", r.max_proposals, "Proposal budget")->check(CLI::PositiveNumber);

  auto* prb = app.add_subcommand("probit", "Exact posterior draws for Bayesian probit regression");
  prb->add_option("--data", r.data, "CSV with a header row")->required();
  prb->add_option("--response", r.response, "Name of the 0/1 column")->required();
  prb->add_option("--prior-scale", r.prior_scale, "Prior covariance is this times I")
      ->check(CLI::PositiveNumber);
  add_run_options(prb, r);
  prb->add_option("--output", r.output, "Posterior draws file");
  prb->add_option("--meta", r.meta, "JSON summary file (stdout if omitted)");
  prb->add_option("--format", r.format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
  prb->add_option("--max-proposals", r.max_proposals, "Proposal budget")->check(CLI::PositiveNumber);

  auto* bch = app.add_subcommand("bench", "Run a benchmark plan");
  bch->add_option("--spec", r.spec, "Plan file (JSON)")->required();
  bch->add_option("--n", r.bench_n, "Override the plan's sample size")->check(CLI::PositiveNumber);
  bch->add_option("--seeds", r.seeds, "Override the plan's seeds");
  bch->add_option("--threads", r.threads, "Worker threads (0 = all cores)");
  bch->add_option("--output", r.output, "Raw cells CSV");
  bch->add_option("--meta", r.meta, "JSON summary file (stdout if omitted)");
  bch->add_option("--tsv", r.tsv, "Median error and time per dimension, tab separated");
  bch->add_flag("--quiet", r.quiet, "No table on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  // Everything that reaches the output streams is built first, so a failure
  // leaves no partial output behind.
  std::ostringstream buffer;
  int code = kOk;
  try {
    if (cdf->parsed()) {
      code = cmd_cdf(pa, r, buffer, err);
    } else if (bnd->parsed()) {
      code = cmd_bounds(pa, r, buffer, err);
    } else if (smp->parsed()) {
      code = cmd_sample(pa, r, buffer, err);
    } else if (prb->parsed()) {
      code = cmd_probit(r, buffer, err);
    } else {
      code = cmd_bench(r, buffer, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.category()) {
      case ErrorCategory::Usage: return kUsage;
      case ErrorCategory::Numerical: return kNumerical;
      case ErrorCategory::Budget: return kBudget;
    }
    return kNumerical;
  } catch (const json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
  out << buffer.str();
  return code;
}

}  // namespace tmvn::cli
