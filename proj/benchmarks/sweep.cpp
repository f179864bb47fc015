// Larger experiments than the test suite runs. Without --full the grids are
// cut down to finish in a few minutes; with --full they are the large ones
// (orthant up to d = 10000, 100 random correlation matrices per example).
//
//   tmvn_sweep [--full] [orthant|random|slope]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "tmvn/estimator.hpp"
#include "tmvn/harness.hpp"
#include "tmvn/tilting.hpp"

namespace {

using namespace tmvn;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Timing {
  double setup;
  double total;
  EstimateResult result;
};

Timing orthant_run(Index d, Index n) {
  const auto t0 = Clock::now();
  const FactoredProblem fp = factorize(make_problem({.kind = ProblemKind::OrthantHalf, .d = d}));
  const TiltingSolution t = solve_tilting(fp);
  const double setup = seconds_since(t0);
  EstimateResult r = estimate(fp, Method::Met, t, n, 1);
  return {setup, seconds_since(t0), std::move(r)};
}

void orthant(bool full) {
  const std::vector<Index> dims =
      full ? std::vector<Index>{10, 100, 1000, 2000, 5000, 10000} : std::vector<Index>{10, 100, 200, 400};
  std::cout << "# orthant: d\tn\testimate*(d+1)\trel_error\tsetup_s\ttotal_s\n";
  for (const Index d : dims) {
    const Timing t = orthant_run(d, 100000);
    std::cout << d << '\t' << t.result.n_total << '\t' << std::exp(t.result.log_estimate) * (d + 1.0) << '\t'
              << t.result.rel_error << '\t' << t.setup << '\t' << t.total << std::endl;
  }
}

void random_examples(bool full) {
  const int matrices = full ? 100 : 5;
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(matrices));
  for (int i = 0; i < matrices; ++i) seeds[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i + 1);
  for (const double lower : {-0.5, 1.0}) {
    const BenchmarkReport r = run_benchmark({{.kind = ProblemKind::RandomCorr, .d = 100, .lower = lower}},
                                            {Method::Sov, Method::Met}, 10000, seeds);
    std::cout << "# random_corr d=100 lower=" << lower << " matrices=" << matrices << '\n';
    write_summary_tsv(std::cout, r);
    std::cout.flush();
  }
}

void slope() {
  std::vector<double> lx, ly;
  for (const Index d : {100, 200, 400}) {
    const Timing t = orthant_run(d, 100000);
    lx.push_back(std::log(static_cast<double>(d)));
    ly.push_back(std::log(t.total));
    std::cout << "# slope: d=" << d << " setup " << t.setup << " s, total " << t.total << " s" << std::endl;
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  std::cout << "slope\t" << sxy / sxx << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  std::vector<std::string> parts;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--full") == 0) {
      full = true;
    } else if (std::strcmp(argv[i], "orthant") == 0 || std::strcmp(argv[i], "random") == 0 ||
               std::strcmp(argv[i], "slope") == 0) {
      parts.emplace_back(argv[i]);
    } else {
      std::cerr << "usage: " << argv[0] << " [--full] [orthant|random|slope]...\n";
      return 2;
    }
  }
  if (parts.empty()) parts = {"orthant", "random", "slope"};
  auto want = [&](const char* p) { return std::find(parts.begin(), parts.end(), p) != parts.end(); };
  if (want("orthant")) orthant(full);
  if (want("random")) random_examples(full);
  if (want("slope")) slope();
  return 0;
}
