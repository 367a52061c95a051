#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace semisplit {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft1D::Fft1D(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft1D: size must be positive");
  buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n));
  if (!buf_) throw std::bad_alloc();
  auto* c = reinterpret_cast<fftw_complex*>(buf_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n), c, c, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_1d(static_cast<int>(n), c, c, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Fft1D: plan creation failed");
}

Fft1D::~Fft1D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(buf_);
}

void Fft1D::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }
void Fft1D::backward() { fftw_execute(static_cast<fftw_plan>(plan_bwd_)); }

}  // namespace semisplit
