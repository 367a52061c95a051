// Internal FFT wrapper (FFTW3). Not installed; keep out of public headers.
#pragma once

#include <complex>
#include <cstddef>

namespace semisplit {

// One-dimensional in-place complex FFT of fixed size with an owned,
// SIMD-aligned buffer. Plan creation/destruction is serialized internally
// (the planner is not thread-safe); execution is safe concurrently on
// distinct instances.
class Fft1D {
 public:
  explicit Fft1D(std::size_t n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  std::size_t size() const { return n_; }
  std::complex<double>* data() { return buf_; }
  const std::complex<double>* data() const { return buf_; }

  // Unnormalized transforms, in place on the owned buffer.
  void forward();   // sum_j x_j e^{-2*pi*i*j*k/n}
  void backward();  // sum_j x_j e^{+2*pi*i*j*k/n}  (no 1/n factor)

 private:
  std::size_t n_;
  std::complex<double>* buf_;
  void* plan_fwd_;
  void* plan_bwd_;
};

}  // namespace semisplit
