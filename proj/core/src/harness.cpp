#include "tmvn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "parallel.hpp"
#include "tmvn/csv.hpp"
#include "tmvn/error.hpp"
#include "tmvn/probit.hpp"
#include "tmvn/qmc.hpp"
#include "tmvn/rng.hpp"
#include "tmvn/special_fn.hpp"
#include "tmvn/tilting.hpp"

namespace tmvn {
namespace {

constexpr const char* kKindNames[] = {"example1",    "example2",    "orthant_half",
                                      "random_corr", "tail_family", "custom"};

std::string format_bound(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  std::ostringstream os;
  os << v;
  return os.str();
}

double json_bound(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_number(v.get<std::string>());
  throw InvalidArgument("bound must be a number or \"inf\"/\"-inf\"");
}

Matrix inverse_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("precision matrix is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

struct Defaults {
  double lower;
  double upper;
};

Defaults kind_defaults(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Example1: return {0.5, 1.0};
    case ProblemKind::Example2: return {0.0, 1.0};
    case ProblemKind::OrthantHalf: return {0.0, kInf};
    case ProblemKind::RandomCorr: return {-0.5, kInf};
    case ProblemKind::TailFamily: return {1.0, kInf};
    case ProblemKind::Custom: return {-kInf, kInf};
  }
  return {-kInf, kInf};
}

}  // namespace

std::string to_string(ProblemKind kind) { return kKindNames[static_cast<int>(kind)]; }

ProblemKind parse_kind(const std::string& text) {
  for (int i = 0; i < 6; ++i) {
    if (text == kKindNames[i]) return static_cast<ProblemKind>(i);
  }
  throw InvalidArgument("unknown problem kind '" + text + "'");
}

std::string ProblemSpec::label() const {
  if (!name.empty()) return name;
  std::ostringstream os;
  os << to_string(kind) << "-d" << d;
  if (kind == ProblemKind::TailFamily) os << "-g" << gamma;
  if (lower) os << "-l" << format_bound(*lower);
  if (upper) os << "-u" << format_bound(*upper);
  return os.str();
}

ProblemSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("problem spec must be a JSON object");
  ProblemSpec s;
  s.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("d")) s.d = j.at("d").get<Index>();
  if (j.contains("lower")) s.lower = json_bound(j.at("lower"));
  if (j.contains("upper")) s.upper = json_bound(j.at("upper"));
  if (j.contains("gamma")) s.gamma = j.at("gamma").get<double>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sigma")) s.sigma_path = j.at("sigma").get<std::string>();
  if (j.contains("sigma_inv")) s.sigma_inv_path = j.at("sigma_inv").get<std::string>();
  if (j.contains("lower_file")) s.lower_path = j.at("lower_file").get<std::string>();
  if (j.contains("upper_file")) s.upper_path = j.at("upper_file").get<std::string>();
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  return s;
}

nlohmann::json to_json(const ProblemSpec& s) {
  nlohmann::json j{{"kind", to_string(s.kind)}, {"d", s.d}, {"seed", s.seed}, {"name", s.label()}};
  if (s.lower) j["lower"] = format_bound(*s.lower);
  if (s.upper) j["upper"] = format_bound(*s.upper);
  if (s.kind == ProblemKind::TailFamily) j["gamma"] = s.gamma;
  if (!s.sigma_path.empty()) j["sigma"] = s.sigma_path;
  if (!s.sigma_inv_path.empty()) j["sigma_inv"] = s.sigma_inv_path;
  if (!s.lower_path.empty()) j["lower_file"] = s.lower_path;
  if (!s.upper_path.empty()) j["upper_file"] = s.upper_path;
  return j;
}

Matrix example1_precision(Index d) {
  return 0.5 * Matrix::Identity(d, d) + 0.5 * Matrix::Ones(d, d);
}

Matrix example1_covariance(Index d) {
  return 2.0 * Matrix::Identity(d, d) - (2.0 / static_cast<double>(d + 1)) * Matrix::Ones(d, d);
}

Matrix example2_precision(Index d) {
  Matrix p = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      const Index gap = std::abs(i - j);
      if (2 * gap <= d) p(i, j) = std::ldexp(1.0, -static_cast<int>(gap));
    }
  }
  return p;
}

Matrix orthant_covariance(Index d) {
  return 0.5 * Matrix::Identity(d, d) + 0.5 * Matrix::Ones(d, d);
}

Matrix unit_diagonal_rotation(Matrix a) {
  const Index d = a.rows();
  constexpr double kTol = 1e-14;
  for (Index step = 0; step < d; ++step) {
    Index i = -1;
    Index j = -1;
    for (Index k = 0; k < d; ++k) {
      if (i < 0 && a(k, k) < 1.0 - kTol) i = k;
      if (j < 0 && a(k, k) > 1.0 + kTol) j = k;
    }
    if (i < 0 || j < 0) break;
    const double aij = a(i, j);
    const double disc = std::max(0.0, aij * aij - (a(i, i) - 1.0) * (a(j, j) - 1.0));
    const double sign = aij >= 0.0 ? 1.0 : -1.0;
    const double t = (aij + sign * std::sqrt(disc)) / (a(j, j) - 1.0);
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = c * t;
    // Columns then rows: A <- G^T A G for the rotation in the (i, j) plane.
    const Vector ci = a.col(i);
    const Vector cj = a.col(j);
    a.col(i) = c * ci - s * cj;
    a.col(j) = s * ci + c * cj;
    const Eigen::RowVectorXd ri = a.row(i);
    const Eigen::RowVectorXd rj = a.row(j);
    a.row(i) = c * ri - s * rj;
    a.row(j) = s * ri + c * rj;
    a(i, i) = 1.0;
  }
  a = 0.5 * (a + a.transpose()).eval();
  a.diagonal().setOnes();
  return a;
}

Matrix random_correlation(Index d, std::uint64_t seed) {
  if (d < 2) throw InvalidArgument("random correlation needs d >= 2");
  RandomStream rng(seed, 0x636f7272);  // "corr"
  Vector eig(d);
  for (Index i = 0; i < d; ++i) eig[i] = -std::log(rng.uniform());
  eig *= static_cast<double>(d) / eig.sum();

  Matrix g(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return unit_diagonal_rotation(q * eig.asDiagonal() * q.transpose());
}

TruncationProblem make_problem(const ProblemSpec& spec) {
  const Index d = spec.d;
  if (d < 1) throw InvalidArgument("dimension must be positive");
  const Defaults def = kind_defaults(spec.kind);
  double lo = spec.lower.value_or(def.lower);
  const double hi = spec.upper.value_or(def.upper);
  Matrix sigma;
  switch (spec.kind) {
    case ProblemKind::Example1:
      sigma = example1_covariance(d);
      break;
    case ProblemKind::Example2:
      sigma = inverse_spd(example2_precision(d));
      break;
    case ProblemKind::OrthantHalf:
      sigma = orthant_covariance(d);
      break;
    case ProblemKind::RandomCorr:
      sigma = random_correlation(d, spec.seed);
      break;
    case ProblemKind::TailFamily:
      sigma = Matrix::Identity(d, d);
      if (!spec.lower) lo = spec.gamma;
      break;
    case ProblemKind::Custom: {
      if (spec.sigma_path.empty() == spec.sigma_inv_path.empty()) {
        throw InvalidArgument("custom problems need exactly one of sigma or sigma_inv");
      }
      sigma = spec.sigma_path.empty() ? inverse_spd(read_matrix_csv(spec.sigma_inv_path))
                                      : read_matrix_csv(spec.sigma_path);
      if (sigma.rows() != d) throw InvalidArgument("custom matrix does not have dimension d");
      break;
    }
  }
  Vector lower = Vector::Constant(d, lo);
  Vector upper = Vector::Constant(d, hi);
  if (!spec.lower_path.empty()) lower = read_vector_csv(spec.lower_path);
  if (!spec.upper_path.empty()) upper = read_vector_csv(spec.upper_path);
  return TruncationProblem::from_covariance(std::move(sigma), std::move(lower), std::move(upper));
}

FiveNumber five_number(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("five-number summary of an empty sample");
  return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5),
          quantile(values, 0.75), quantile(values, 1.0)};
}

BenchmarkReport run_benchmark(const std::vector<ProblemSpec>& specs,
                              const std::vector<Method>& methods, Index n,
                              const std::vector<std::uint64_t>& seeds,
                              const BenchmarkOptions& options) {
  if (specs.empty() || methods.empty() || seeds.empty()) {
    throw InvalidArgument("benchmark needs at least one spec, method and seed");
  }
  if (n < kBatchCount) throw InvalidArgument("benchmark needs n >= 12");
  const std::size_t instances = specs.size() * seeds.size();
  std::vector<std::vector<BenchmarkCell>> results(instances);

  detail::parallel_for(instances, resolve_threads(options.threads, instances), [&](std::size_t idx) {
    ProblemSpec spec = specs[idx / seeds.size()];
    const std::uint64_t seed = seeds[idx % seeds.size()];
    if (spec.kind == ProblemKind::RandomCorr) spec.seed = seed;
    std::vector<BenchmarkCell> cells;
    for (const Method method : methods) {
      BenchmarkCell c;
      c.spec = spec.label();
      c.kind = spec.kind;
      c.d = spec.d;
      c.method = method;
      c.seed = seed;
      cells.push_back(c);
    }
    auto fail = [&](BenchmarkCell& c, const std::exception& e) {
      c.ok = false;
      c.error = e.what();
    };
    try {
      const FactoredProblem fp = factorize(make_problem(spec));
      std::optional<TiltingSolution> tilt;
      double setup_ms = 0.0;
      std::string tilt_error;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        tilt = solve_tilting(fp);
        setup_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      } catch (const Error& e) {
        tilt_error = e.what();
      }
      for (BenchmarkCell& c : cells) {
        // Single-threaded inside a cell; parallelism is across cells.
        try {
          if (c.method == Method::Met && !tilt) throw NoConvergence(tilt_error);
          const EstimateResult r = tilt ? estimate(fp, c.method, *tilt, n, seed, std::nullopt, {1})
                                        : estimate(fp, c.method, n, seed, {1});
          c.ok = true;
          c.log_estimate = r.log_estimate;
          c.rel_error = r.rel_error;
          c.wall_time_ms = r.wall_time_ms;
          if (tilt) {
            c.log_upper_bound = tilt->psi_star;
            c.used_fallback = tilt->used_fallback;
          }
          if (c.method == Method::Met) {
            c.acceptance_rate = std::exp(r.log_estimate - tilt->psi_star);
            c.wall_time_ms += setup_ms;
          }
        } catch (const std::exception& e) {
          fail(c, e);
        }
      }
    } catch (const std::exception& e) {
      for (BenchmarkCell& c : cells) fail(c, e);
    }
    results[idx] = std::move(cells);
  });

  BenchmarkReport report;
  report.n = n;
  for (auto& group : results) {
    for (auto& c : group) report.cells.push_back(std::move(c));
  }
  for (const ProblemSpec& spec : specs) {
    for (const Method method : methods) {
      BenchmarkSummary s;
      s.spec = spec.label();
      s.d = spec.d;
      s.method = method;
      std::vector<double> rel, acc, time;
      for (const BenchmarkCell& c : report.cells) {
        if (c.spec != s.spec || c.method != method) continue;
        ++s.cells;
        if (!c.ok) {
          ++s.failures;
          continue;
        }
        rel.push_back(c.rel_error);
        time.push_back(c.wall_time_ms);
        if (c.acceptance_rate) acc.push_back(*c.acceptance_rate);
      }
      if (!rel.empty()) s.rel_error = five_number(rel);
      if (!acc.empty()) s.acceptance_rate = five_number(acc);
      if (!time.empty()) s.wall_time_ms = five_number(time);
      report.summaries.push_back(s);
    }
  }
  return report;
}

BenchmarkPlan plan_from_json(const nlohmann::json& j) {
  BenchmarkPlan plan;
  const nlohmann::json* specs = &j;
  if (j.is_object()) {
    specs = &j.at("specs");
    if (j.contains("methods")) {
      plan.methods.clear();
      for (const auto& m : j.at("methods")) plan.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("n")) plan.n = j.at("n").get<Index>();
    if (j.contains("seeds")) plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (!specs->is_array()) throw InvalidArgument("\"specs\" must be an array");
  for (const auto& s : *specs) plan.specs.push_back(spec_from_json(s));
  return plan;
}

BenchmarkPlan read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return plan_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("'" + path + "': " + e.what());
  }
}

void write_cells_csv(std::ostream& out, const BenchmarkReport& report) {
  out << "spec,kind,d,method,seed,ok,log_estimate,rel_error,log_upper_bound,acceptance_rate,"
         "used_fallback,wall_time_ms,error\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const BenchmarkCell& c : report.cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    out << c.spec << ',' << to_string(c.kind) << ',' << c.d << ',' << to_string(c.method) << ','
        << c.seed << ',' << (c.ok ? 1 : 0) << ',';
    if (c.ok) {
      out << c.log_estimate << ',' << c.rel_error << ',';
      if (c.log_upper_bound) out << *c.log_upper_bound;
      out << ',';
      if (c.acceptance_rate) out << *c.acceptance_rate;
      out << ',' << (c.used_fallback ? 1 : 0);
    } else {
      out << ",,,,";
    }
    out << ',' << c.wall_time_ms << ",\"" << err << "\"\n";
  }
}

nlohmann::json summary_json(const BenchmarkReport& report) {
  auto five = [](const std::optional<FiveNumber>& f) -> nlohmann::json {
    if (!f) return nullptr;
    return {{"min", f->min}, {"q1", f->q1}, {"median", f->median}, {"q3", f->q3}, {"max", f->max}};
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const BenchmarkSummary& s : report.summaries) {
    rows.push_back({{"spec", s.spec},
                    {"d", s.d},
                    {"method", to_string(s.method)},
                    {"cells", s.cells},
                    {"failures", s.failures},
                    {"rel_error", five(s.rel_error)},
                    {"acceptance_rate", five(s.acceptance_rate)},
                    {"wall_time_ms", five(s.wall_time_ms)}});
  }
  return {{"n", report.n}, {"summaries", rows}};
}

void write_summary_tsv(std::ostream& out, const BenchmarkReport& report) {
  out << "# d\tmethod\tmedian_rel_error\tmedian_wall_time_ms\tspec\n";
  out << std::setprecision(10);
  for (const BenchmarkSummary& s : report.summaries) {
    out << s.d << '\t' << to_string(s.method) << '\t';
    if (s.rel_error) {
      out << s.rel_error->median;
    } else {
      out << "nan";
    }
    out << '\t';
    if (s.wall_time_ms) {
      out << s.wall_time_ms->median;
    } else {
      out << "nan";
    }
    out << '\t' << s.spec << '\n';
  }
}

}  // namespace tmvn
