#include "fpt/mc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "fpt/csv.hpp"
#include "fpt/errors.hpp"

namespace fpt {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr long kFar = 1L << 62;

// Runs body(batch) for every batch over `threads` workers; batch b always uses the same stream.
void for_batches(long batches, int threads, const std::function<void(long)>& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(batches)));
  if (workers == 1) {
    for (long b = 0; b < batches; ++b) body(b);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (long b = w; b < batches; b += workers) body(b);
    });
  for (auto& t : pool) t.join();
}

McEstimate batch_estimate(const std::vector<double>& means, long paths, const McOptions& opts) {
  McEstimate e;
  const auto b = static_cast<double>(means.size());
  long double s = 0.0L;
  for (double m : means) s += m;
  e.estimate = static_cast<double>(s / b);
  long double v = 0.0L;
  for (double m : means) v += (m - e.estimate) * (m - e.estimate);
  e.stderr_ = std::sqrt(static_cast<double>(v / (b - 1.0)) / b);
  e.paths = paths;
  e.seed = opts.seed;
  e.batches = static_cast<long>(means.size());
  return e;
}

void check_options(const McOptions& opts) {
  if (opts.batches < 30) throw PreconditionViolated("mc: at least 30 batches are required");
  if (opts.paths < opts.batches) throw PreconditionViolated("mc: fewer paths than batches");
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t batch) {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state = h ^ cell;
  h = splitmix64(state);
  state = h ^ batch;
  return splitmix64(state);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

StepSampler::StepSampler(const StepLaw& law, long core) : law_(&law) {
  lo_ = std::max(law.min_step(), -core);
  hi_ = std::min(law.max_step(), core);
  right_mass_ = law.tail(hi_);
  left_mass_ = law.left_tail(-lo_);
  std::vector<double> w = law.pmf_table(lo_, hi_);
  w.push_back(right_mass_);
  w.push_back(left_mass_);

  // Vose alias construction.
  const auto k = w.size();
  long double total = 0.0L;
  for (double v : w) total += v;
  std::vector<double> scaled(k);
  for (std::size_t i = 0; i < k; ++i) scaled[i] = w[i] * static_cast<double>(k) / static_cast<double>(total);
  prob_.assign(k, 1.0);
  alias_.assign(k, 0);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < k; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    large.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = static_cast<long>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (std::size_t i : small) prob_[i] = 1.0;
  for (std::size_t i : large) prob_[i] = 1.0;
}

long StepSampler::invert_right(double v) const {
  // Largest k > hi with tail(k - 1) >= v * tail(hi).
  const double target = v * right_mass_;
  long good = hi_ + 1;
  long bad = hi_ + 2;
  while (law_->tail(bad - 1) >= target) {
    good = bad;
    if (bad >= kFar / 2) return kFar;
    bad = hi_ + 2 * (bad - hi_);
  }
  while (bad - good > 1) {
    const long mid = good + (bad - good) / 2;
    (law_->tail(mid - 1) >= target ? good : bad) = mid;
  }
  return good;
}

long StepSampler::invert_left(double v) const {
  const long base = -lo_;  // sample k > base, return -k
  const double target = v * left_mass_;
  long good = base + 1;
  long bad = base + 2;
  while (law_->left_tail(bad - 1) >= target) {
    good = bad;
    if (bad >= kFar / 2) return -kFar;
    bad = base + 2 * (bad - base);
  }
  while (bad - good > 1) {
    const long mid = good + (bad - good) / 2;
    (law_->left_tail(mid - 1) >= target ? good : bad) = mid;
  }
  return -good;
}

long StepSampler::operator()(std::mt19937_64& rng) const {
  const auto k = prob_.size();
  const double u = uniform01(rng) * static_cast<double>(k);
  auto slot = static_cast<std::size_t>(u);
  if (slot >= k) slot = k - 1;
  const double frac = u - static_cast<double>(slot);
  if (frac >= prob_[slot]) slot = static_cast<std::size_t>(alias_[slot]);
  if (slot < k - 2) return lo_ + static_cast<long>(slot);
  const double v = 1.0 - uniform01(rng);  // (0, 1]
  return slot == k - 2 ? invert_right(v) : invert_left(v);
}

McHistogram sample_first_passage(const StepLaw& law, long x, long N, const McOptions& opts) {
  check_options(opts);
  if (N < 1 || x < 0) throw PreconditionViolated("sample_first_passage: need N >= 1 and x >= 0");
  const StepSampler sampler(law);
  const long per = opts.paths / opts.batches;
  const auto bins = static_cast<std::size_t>(N + 1);
  std::vector<std::vector<double>> freq(static_cast<std::size_t>(opts.batches), std::vector<double>(bins, 0.0));
  for_batches(opts.batches, opts.threads, [&](long b) {
    std::mt19937_64 rng(stream_seed(opts.seed, opts.cell, static_cast<std::uint64_t>(b)));
    std::vector<long> count(bins, 0);
    for (long p = 0; p < per; ++p) {
      long s = 0;
      for (long n = 1; n <= N; ++n) {
        const long step = sampler(rng);
        s = step > 0 && s > kFar - step ? kFar : s + step;
        if (s > x) {
          ++count[static_cast<std::size_t>(n)];
          break;
        }
        if (s < -kFar / 2) break;  // cannot return within the horizon
      }
    }
    auto& f = freq[static_cast<std::size_t>(b)];
    for (std::size_t n = 1; n < bins; ++n) f[n] = static_cast<double>(count[n]) / static_cast<double>(per);
  });
  McHistogram h;
  h.barrier = x;
  h.horizon = N;
  h.bins.resize(bins);
  std::vector<double> means(static_cast<std::size_t>(opts.batches));
  for (std::size_t n = 1; n < bins; ++n) {
    for (std::size_t b = 0; b < means.size(); ++b) means[b] = freq[b][n];
    h.bins[n] = batch_estimate(means, per * opts.batches, opts);
  }
  return h;
}

std::vector<McEstimate> sample_sup_event(const StepLaw& law, const std::vector<long>& xs, long n,
                                         const McOptions& opts) {
  check_options(opts);
  if (n < 1) throw PreconditionViolated("sample_sup_event: need n >= 1");
  const StepSampler sampler(law);
  const long per = opts.paths / opts.batches;
  std::vector<std::vector<double>> freq(static_cast<std::size_t>(opts.batches), std::vector<double>(xs.size(), 0.0));
  for_batches(opts.batches, opts.threads, [&](long b) {
    std::mt19937_64 rng(stream_seed(opts.seed, opts.cell, static_cast<std::uint64_t>(b)));
    std::vector<long> count(xs.size(), 0);
    for (long p = 0; p < per; ++p) {
      long s = 0;
      long mx = 0;
      for (long r = 1; r <= n; ++r) {
        const long step = sampler(rng);
        s = step > 0 && s > kFar - step ? kFar : std::max(s + step, -kFar);
        mx = std::max(mx, s);
      }
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (mx <= xs[i]) ++count[i];
    }
    auto& f = freq[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < xs.size(); ++i) f[i] = static_cast<double>(count[i]) / static_cast<double>(per);
  });
  std::vector<McEstimate> out;
  std::vector<double> means(static_cast<std::size_t>(opts.batches));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t b = 0; b < means.size(); ++b) means[b] = freq[b][i];
    out.push_back(batch_estimate(means, per * opts.batches, opts));
  }
  return out;
}

McAgreement compare_histogram(const McHistogram& h, const std::vector<double>& exact, double k, double min_expected) {
  McAgreement a;
  for (long n = 1; n <= h.horizon && n < static_cast<long>(exact.size()); ++n) {
    const auto& e = h.bins[static_cast<std::size_t>(n)];
    const double ex = exact[static_cast<std::size_t>(n)];
    if (ex * static_cast<double>(e.paths) < min_expected) continue;
    ++a.bins;
    const double dev = std::abs(e.estimate - ex);
    const double z = e.stderr_ > 0.0 ? dev / e.stderr_ : (dev == 0.0 ? 0.0 : INFINITY);
    a.worst_z = std::max(a.worst_z, z);
    if (dev <= k * e.stderr_) ++a.within;
  }
  a.fraction = a.bins > 0 ? static_cast<double>(a.within) / static_cast<double>(a.bins) : 0.0;
  return a;
}

void write_histogram_csv(const std::string& path, const McHistogram& h) {
  CsvWriter csv(path, {"n", "estimate", "stderr"});
  for (long n = 1; n <= h.horizon; ++n) {
    const auto& e = h.bins[static_cast<std::size_t>(n)];
    csv.row(n, e.estimate, e.stderr_);
  }
}

}  // namespace fpt
