#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fpt/steps.hpp"

namespace fpt {

struct ConvolveOptions {
  /// Direct summation while in_len * out_len stays below this many operations.
  long direct_budget = 1L << 20;
  /// Offsets |d| <= near_radius are always summed directly; the remainder of the
  /// kernel goes through the FFT. Keeps the large central atoms out of FFT roundoff.
  long near_radius = 32;
};

/// One step of the walk restricted to lattice windows:
///   out[j] = sum_i in[i] * pmf(out_offset + j - i),  0 <= i < in_len, 0 <= j < out_len.
/// Site i of the input and site (out_offset + j) of the output share a coordinate
/// frame. Direct summation for bounded or small problems, FFT otherwise.
class StepConvolver {
 public:
  StepConvolver(const StepLaw& law, long in_len, long out_len, long out_offset, ConvolveOptions opts = {});
  ~StepConvolver();
  StepConvolver(const StepConvolver&) = delete;
  StepConvolver& operator=(const StepConvolver&) = delete;
  StepConvolver(StepConvolver&&) noexcept;
  StepConvolver& operator=(StepConvolver&&) noexcept;

  /// `active_lo`/`active_hi` bound the input indices that may carry mass.
  void apply(std::span<const double> in, std::span<double> out, long active_lo, long active_hi) const;
  void apply(std::span<const double> in, std::span<double> out) const { apply(in, out, 0, in_len_); }

  bool spectral() const { return fft_ != nullptr; }
  long in_len() const { return in_len_; }
  long out_len() const { return out_len_; }

 private:
  struct Fft;

  long in_len_;
  long out_len_;
  long out_offset_;
  long kmin_;                   // smallest offset handled directly
  std::vector<double> direct_;  // pmf(kmin_ + t)
  std::unique_ptr<Fft> fft_;
};

}  // namespace fpt
