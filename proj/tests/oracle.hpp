#pragma once

// Independent reference computations used by the tests. Nothing here calls the DP engines.

#include <cmath>
#include <map>
#include <vector>

namespace oracle {

/// Exhaustive enumeration of every path of length n <= N for one barrier x, in long double.
/// fp[n] = P(T_x = n); killed[n][s - lo] = P(S_n = s, T_x > n) with lo = -N * max_down.
struct PathTable {
  long lo = 0;
  long x = 0;
  std::vector<long double> fp;
  std::vector<std::vector<long double>> killed;

  long double killed_at(long n, long s) const {
    if (s < lo || s > x) return 0.0L;
    return killed[static_cast<std::size_t>(n)][static_cast<std::size_t>(s - lo)];
  }
  long double survival(long n) const {
    long double t = 0.0L;
    for (long double v : killed[static_cast<std::size_t>(n)]) t += v;
    return t;
  }
};

inline void walk_paths(const std::map<long, long double>& law, PathTable& t, long N, long n, long s, long double p) {
  if (n == N) return;
  for (const auto& [k, pk] : law) {
    const long s2 = s + k;
    const long double p2 = p * pk;
    if (s2 > t.x) {
      t.fp[static_cast<std::size_t>(n + 1)] += p2;
      continue;
    }
    t.killed[static_cast<std::size_t>(n + 1)][static_cast<std::size_t>(s2 - t.lo)] += p2;
    walk_paths(law, t, N, n + 1, s2, p2);
  }
}

inline PathTable enumerate(const std::map<long, long double>& law, long x, long N) {
  long down = 0;
  for (const auto& [k, pk] : law) down = std::max(down, -k);
  PathTable t;
  t.x = x;
  t.lo = -N * down;
  t.fp.assign(static_cast<std::size_t>(N + 1), 0.0L);
  t.killed.assign(static_cast<std::size_t>(N + 1),
                  std::vector<long double>(static_cast<std::size_t>(x - t.lo + 1), 0.0L));
  t.killed[0][static_cast<std::size_t>(-t.lo)] = 1.0L;
  walk_paths(law, t, N, 0, 0, 1.0L);
  return t;
}

/// Catalan number C_k.
inline long double catalan(long k) {
  long double c = 1.0L;
  for (long i = 0; i < k; ++i) c = c * 2.0L * (2.0L * i + 1.0L) / (i + 2.0L);
  return c;
}

/// Simple walk: P(T_0 = 2k + 1) = C_k / 2^(2k+1), zero at even times.
inline long double simple_first_passage(long n) {
  if (n % 2 == 0) return 0.0L;
  const long k = (n - 1) / 2;
  return catalan(k) / std::pow(2.0L, static_cast<long double>(n));
}

/// Law of S_n by repeated direct convolution of a finite pmf, indexed from n * min_step.
inline std::vector<long double> convolution_power(const std::map<long, long double>& law, long n, long& lo) {
  const long kmin = law.begin()->first;
  std::vector<long double> cur{1.0L};
  long cur_lo = 0;
  for (long r = 0; r < n; ++r) {
    const long kmax = law.rbegin()->first;
    std::vector<long double> next(cur.size() + static_cast<std::size_t>(kmax - kmin), 0.0L);
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (const auto& [k, pk] : law) next[i + static_cast<std::size_t>(k - kmin)] += cur[i] * pk;
    cur.swap(next);
    cur_lo += kmin;
  }
  lo = cur_lo;
  return cur;
}

/// Sum_{k >= n} k^-s by direct summation to `terms` plus the integral remainder with one
/// Euler-Maclaurin correction.
inline double zeta_tail(double s, long n, long terms = 2000000) {
  long double sum = 0.0L;
  const long end = n + terms;
  for (long k = end - 1; k >= n; --k) sum += std::pow(static_cast<long double>(k), -static_cast<long double>(s));
  const long double e = static_cast<long double>(end);
  sum += std::pow(e, 1.0L - s) / (s - 1.0L) + 0.5L * std::pow(e, -static_cast<long double>(s));
  return static_cast<double>(sum);
}

}  // namespace oracle
