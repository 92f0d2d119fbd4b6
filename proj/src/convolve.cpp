#include "fpt/convolve.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <mutex>

#include "fpt/errors.hpp"

namespace fpt {

namespace {
// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct StepConvolver::Fft {
  long n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* kernel = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Fft(long size) : n(size) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(static_cast<std::size_t>(n));
    spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    kernel = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    if (!real || !spec || !kernel) throw WindowOverflow("FFT buffer allocation failed");
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(kernel);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
};

StepConvolver::StepConvolver(const StepLaw& law, long in_len, long out_len, long out_offset, ConvolveOptions opts)
    : in_len_(in_len), out_len_(out_len), out_offset_(out_offset) {
  if (in_len <= 0 || out_len <= 0) throw WindowOverflow("convolver: empty window");
  // Offsets that can connect an input site to an output site.
  const long dlo = out_offset - (in_len - 1);
  const long dhi = out_offset + out_len - 1;

  if (law.finite_support()) {
    kmin_ = std::max(dlo, law.min_step());
    const long kmax = std::min(dhi, law.max_step());
    if (kmax >= kmin_) direct_ = law.pmf_table(kmin_, kmax);
    return;
  }

  const bool small =
      static_cast<double>(in_len) * static_cast<double>(out_len) <= static_cast<double>(opts.direct_budget);
  if (small) {
    kmin_ = dlo;
    direct_ = law.pmf_table(dlo, dhi);
    return;
  }

  kmin_ = std::max(dlo, -opts.near_radius);
  const long kmax = std::min(dhi, opts.near_radius);
  if (kmax >= kmin_) direct_ = law.pmf_table(kmin_, kmax);

  const long size = static_cast<long>(std::bit_ceil(static_cast<unsigned long>(in_len + out_len)));
  if (size > (1L << 30)) throw WindowOverflow("convolver: FFT size exceeds 2^30");
  fft_ = std::make_unique<Fft>(size);
  std::fill(fft_->real, fft_->real + size, 0.0);
  for (long e = -(in_len - 1); e <= out_len - 1; ++e) {
    const long d = out_offset + e;
    if (d >= kmin_ && d <= kmax) continue;  // handled directly
    const long idx = e >= 0 ? e : size + e;
    fft_->real[idx] = law.pmf(d);
  }
  fftw_execute(fft_->forward);
  const double scale = 1.0 / static_cast<double>(size);
  for (long k = 0; k <= size / 2; ++k) {
    fft_->kernel[k][0] = fft_->spec[k][0] * scale;
    fft_->kernel[k][1] = fft_->spec[k][1] * scale;
  }
}

StepConvolver::~StepConvolver() = default;
StepConvolver::StepConvolver(StepConvolver&&) noexcept = default;
StepConvolver& StepConvolver::operator=(StepConvolver&&) noexcept = default;

void StepConvolver::apply(std::span<const double> in, std::span<double> out, long active_lo, long active_hi) const {
  active_lo = std::max(active_lo, 0L);
  active_hi = std::min(active_hi, in_len_);
  std::fill(out.begin(), out.end(), 0.0);
  if (active_hi <= active_lo) return;

  if (fft_) {
    const long n = fft_->n;
    std::fill(fft_->real, fft_->real + n, 0.0);
    std::copy(in.begin() + active_lo, in.begin() + active_hi, fft_->real + active_lo);
    fftw_execute(fft_->forward);
    for (long k = 0; k <= n / 2; ++k) {
      const double ar = fft_->spec[k][0];
      const double ai = fft_->spec[k][1];
      const double br = fft_->kernel[k][0];
      const double bi = fft_->kernel[k][1];
      fft_->spec[k][0] = ar * br - ai * bi;
      fft_->spec[k][1] = ar * bi + ai * br;
    }
    fftw_execute(fft_->backward);
    std::copy(fft_->real, fft_->real + out_len_, out.begin());
  }

  // Gather over the directly handled offsets: out[j] += in[out_offset + j - d] * pmf(d).
  const long kcount = static_cast<long>(direct_.size());
  if (kcount > 0) {
    const long kmax = kmin_ + kcount - 1;
    const long jlo = std::max(0L, active_lo + kmin_ - out_offset_);
    const long jhi = std::min(out_len_, active_hi + kmax - out_offset_);
    for (long j = jlo; j < jhi; ++j) {
      const long base = out_offset_ + j;  // input index i = base - d
      const long dlo = std::max(kmin_, base - (active_hi - 1));
      const long dhi = std::min(kmax, base - active_lo);
      long double acc = 0.0L;
      for (long d = dlo; d <= dhi; ++d)
        acc += static_cast<long double>(in[static_cast<std::size_t>(base - d)]) *
               direct_[static_cast<std::size_t>(d - kmin_)];
      out[static_cast<std::size_t>(j)] += static_cast<double>(acc);
    }
  }

  if (fft_) {
    for (double& v : out) v = std::max(v, 0.0);
  }
}

}  // namespace fpt
