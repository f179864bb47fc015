#pragma once

// Frozen output of tests/oracles/quadrature_oracle.py (scipy nquad and
// mpmath quadrature, independent of the library). Regenerate with
//   python3 tests/oracles/quadrature_oracle.py

#include <array>
#include <limits>
#include <utility>

namespace tmvn::oracle {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Example I: sigma^{-1} = I/2 + 11^T/2 on [1/2, 1]^d.
inline constexpr std::array<std::pair<int, double>, 7> kExample1{{
    {2, 0.014896313886064507},
    {3, 0.0010773216458615627},
    {5, 2.4516915969843942e-6},
    {10, 8.5624896773634626e-15},
    {15, 1.3762694203145139e-25},
    {20, 1.7799977664169008e-38},
    {25, 2.6847468953188218e-53},
}};

// P(l <= X <= u), E[X | .] and E[X X^T | .] (row major) for X ~ N(0, sigma).
struct BoxCase {
  const char* name;
  int d;
  std::array<double, 9> sigma;
  std::array<double, 3> lower;
  std::array<double, 3> upper;
  double probability;
  std::array<double, 3> mean;
  std::array<double, 9> second;
};

inline constexpr std::array<BoxCase, 4> kBoxCases{{
    {"corr2", 2,
     {1.0, 0.5, 0.5, 1.0},
     {-1.0, 0.5},
     {1.0, kInfinity},
     0.19861391414415863,
     {0.19109591177857796, 1.0691166045248781},
     {0.29950946519676575, 0.23953956453037775, 0.23953956453037775, 1.3565541065829838}},
    {"mixed3", 3,
     {1.0, 0.3, -0.2, 0.3, 1.0, 0.4, -0.2, 0.4, 1.0},
     {0.0, -kInfinity, -1.0},
     {kInfinity, 1.0, 0.5},
     0.22470743679975519,
     {0.74412571858582766, -0.084046214470781533, -0.26204243642180786},
     {0.87243020192123566, 0.0075608882554794908, -0.21240072523986225, 0.0075608882554794908,
      0.47299949649346801, 0.069823907167781932, -0.21240072523986225, 0.069823907167781932,
      0.24065982313569936}},
    {"example1_d3", 3,
     {1.5, -0.5, -0.5, -0.5, 1.5, -0.5, -0.5, -0.5, 1.5},
     {0.5, 0.5, 0.5},
     {1.0, 1.0, 1.0},
     0.0010773216458615628,
     {0.71990088745630354, 0.71990088745630343, 0.71990088745630343},
     {0.53838135077923466, 0.51805691341628224, 0.51805691341628224, 0.51805691341628224,
      0.53838135077923455, 0.51805691341628235, 0.51805691341628224, 0.51805691341628235,
      0.53838135077923455}},
    {"tail2", 2,
     {1.0, -0.4, -0.4, 1.0},
     {2.0, 1.5},
     {kInfinity, kInfinity},
     9.210284188004107e-05,
     {2.2621514484051768, 1.7861914335797364},
     {5.1777813803992574, 4.0386866581872107, 4.0386866581872107, 3.2611033561378298}},
}};

// Probit posteriors: y, X (row major, m x k), prior covariance V, and the
// posterior mean and covariance of beta.
struct ProbitCase {
  const char* name;
  int m;
  int k;
  std::array<double, 10> y;
  std::array<double, 20> x;
  std::array<double, 4> v;
  std::array<double, 2> mean;
  std::array<double, 4> cov;
};

inline constexpr std::array<ProbitCase, 3> kProbitCases{{
    {"k1", 5, 1,
     {1, 0, 1, 1, 0},
     {0.2, -1.1, 0.7, 1.5, -0.4},
     {4.0},
     {2.3398916133338918},
     {1.5847984634790331}},
    {"k2", 8, 2,
     {0, 0, 1, 0, 1, 1, 1, 1},
     {1, -1.2, 1, -0.5, 1, 0.1, 1, 0.4, 1, 0.9, 1, 1.3, 1, -0.8, 1, 2.0},
     {5.0, 0.0, 0.0, 5.0},
     {0.28109584635617407, 1.0403454066412363},
     {0.26781148925186538, 0.022074980281011514, 0.022074980281011514, 0.4075446255683246}},
    {"k2_separable", 10, 2,
     {0, 0, 1, 1, 1, 0, 1, 1, 0, 1},
     {1, -1.0, 1, -0.3, 1, 0.2, 1, 0.8, 1, 1.5, 1, -2.0, 1, 0.5, 1, 1.1, 1, -0.6, 1, 0.0},
     {1.0, 0.3, 0.3, 2.0},
     {0.41388758581200696, 2.1658812546795603},
     {0.29005628751605061, 0.09351726977389152, 0.09351726977389152, 0.8085493450087009}},
}};

}  // namespace tmvn::oracle
