#include "spotvol/numerics.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>

namespace spotvol {

namespace {

constexpr int kMaxNodes = 8;
constexpr int kMaxTerms = 72;

constexpr auto kInvFact = [] {
  std::array<double, kMaxTerms + kMaxNodes + 1> a{};
  a[0] = 1.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    a[k] = a[k - 1] / static_cast<double>(k);
  }
  return a;
}();

// Divided differences of exp over every prefix of w, via the series
//   exp[w_0..w_j] = sum_m h_m(w_0..w_j) / (m + j)!
// where h_m is the complete homogeneous symmetric polynomial.  One sweep of
// the h recurrence serves all prefixes at once.
void series_prefixes(const double* w, int count, double* out) {
  double h[kMaxNodes];
  for (int j = 0; j < count; ++j) {
    h[j] = 1.0;
    out[j] = kInvFact[j];
  }
  int quiet = 0;
  for (int m = 1; m <= kMaxTerms; ++m) {
    h[0] *= w[0];
    for (int j = 1; j < count; ++j) h[j] = h[j - 1] + w[j] * h[j];
    double maxrel = 0.0;
    for (int j = 0; j < count; ++j) {
      const double term = h[j] * kInvFact[m + j];
      out[j] += term;
      const double rel = std::abs(term) / (std::abs(out[j]) + 1e-300);
      maxrel = std::max(maxrel, rel);
    }
    quiet = (maxrel < 1e-17) ? quiet + 1 : 0;
    if (quiet >= 2) break;
  }
}

// exp of the upper bidiagonal matrix with diagonal w and unit superdiagonal;
// row 0 holds the divided differences over every prefix (Opitz).  Scaling and
// squaring with a Taylor sum; only reached for widely spread nodes.
void bidiagonal_prefixes(const double* w, int count, double* out) {
  const int n = count;
  double B[kMaxNodes][kMaxNodes] = {};
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    B[i][i] = w[i];
    if (i + 1 < n) B[i][i + 1] = 1.0;
    norm = std::max(norm, std::abs(w[i]) + 1.0);
  }
  int squarings = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) B[i][j] *= scale;

  double E[kMaxNodes][kMaxNodes] = {};
  double T[kMaxNodes][kMaxNodes] = {};
  for (int i = 0; i < n; ++i) {
    E[i][i] = 1.0;
    for (int j = i; j < n; ++j) {
      T[i][j] = B[i][j];
      E[i][j] += B[i][j];
    }
  }
  for (int k = 2; k <= 24; ++k) {
    double next[kMaxNodes][kMaxNodes] = {};
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = i; l <= j; ++l) s += T[i][l] * B[l][j];
        next[i][j] = s / k;
      }
    double tnorm = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        T[i][j] = next[i][j];
        E[i][j] += next[i][j];
        tnorm = std::max(tnorm, std::abs(next[i][j]));
      }
    if (tnorm < 1e-20) break;
  }
  while (squarings-- > 0) {
    double sq[kMaxNodes][kMaxNodes] = {};
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = i; l <= j; ++l) s += E[i][l] * E[l][j];
        sq[i][j] = s;
      }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) E[i][j] = sq[i][j];
  }
  for (int j = 0; j < n; ++j) out[j] = E[0][j];
}

}  // namespace

double expint(double d, double dt) {
  const double z = d * dt;
  if (std::abs(z) < 1e-4) {
    return dt * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0))));
  }
  return std::expm1(z) / d;
}

void exp_divdiff_prefixes(const double* nodes, int count, double dt,
                          double* out) {
  assert(count >= 1 && count <= kMaxNodes);
  double w[kMaxNodes];
  double wmin = nodes[0] * dt, wmax = wmin;
  for (int i = 0; i < count; ++i) {
    w[i] = nodes[i] * dt;
    wmin = std::min(wmin, w[i]);
    wmax = std::max(wmax, w[i]);
  }
  const double maxabs = std::max(std::abs(wmin), std::abs(wmax));

  double g[kMaxNodes];
  double shift = 0.0;
  if (maxabs <= 2.0) {
    series_prefixes(w, count, g);
  } else {
    double mean = 0.0;
    for (int i = 0; i < count; ++i) mean += w[i];
    mean /= count;
    shift = mean;
    for (int i = 0; i < count; ++i) w[i] -= mean;
    if (wmax - wmin <= 2.0) {
      series_prefixes(w, count, g);
    } else {
      bidiagonal_prefixes(w, count, g);
    }
  }

  const double eshift = (shift == 0.0) ? 1.0 : std::exp(shift);
  double dtpow = 1.0;
  for (int j = 0; j < count; ++j) {
    out[j] = eshift * dtpow * g[j];
    dtpow *= dt;
  }
}

double exp_divdiff(std::initializer_list<double> nodes, double dt) {
  assert(nodes.size() >= 1 && nodes.size() <= kMaxNodes);
  double buf[kMaxNodes];
  int n = 0;
  for (double v : nodes) buf[n++] = v;
  double out[kMaxNodes];
  exp_divdiff_prefixes(buf, n, dt, out);
  return out[n - 1];
}

}  // namespace spotvol
