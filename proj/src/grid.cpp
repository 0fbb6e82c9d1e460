#include "sevo/grid.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "sevo/error.hpp"

namespace sevo {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool power_of_two(std::size_t v) { return v >= 2 && (v & (v - 1)) == 0; }

}  // namespace

void GridSpec::validate() const {
  if (n != 1 && n != 2) throw Error(ErrorCode::InvalidArgument, "grid dimension must be 1 or 2");
  if (!power_of_two(N)) throw Error(ErrorCode::InvalidArgument, "points per dimension must be a power of two");
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidArgument, "half-length L must be positive");
}

double GridSpec::cell_volume() const noexcept { return std::pow(dx(), n); }
double GridSpec::box_volume() const noexcept { return std::pow(2.0 * L, n); }
double GridSpec::max_wavenumber() const noexcept {
  return std::numbers::pi / L * static_cast<double>(N / 2);
}

Grid::Grid(GridSpec spec, double sigma) : spec_(spec), sigma_(sigma) {
  spec_.validate();
  const std::size_t total = spec_.size();
  xi2_.resize(total);
  a_.resize(total);
  mask_.resize(total);
  const double k0 = std::numbers::pi / spec_.L;
  const double cut = static_cast<double>(spec_.N) / 3.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    double q = 0.0;
    bool keep = true;
    std::size_t rest = idx;
    for (int d = 0; d < spec_.n; ++d) {
      const std::size_t j = rest % spec_.N;
      rest /= spec_.N;
      const int m = mode_index(j);
      q += (k0 * m) * (k0 * m);
      if (std::abs(m) > cut) keep = false;
    }
    xi2_[idx] = q;
    a_[idx] = std::pow(q, sigma_);
    mask_[idx] = keep ? 1.0 : 0.0;
  }
}

int Grid::mode_index(std::size_t j) const noexcept {
  const auto N = static_cast<long>(spec_.N);
  const auto jj = static_cast<long>(j);
  return static_cast<int>(jj < N / 2 ? jj : jj - N);
}

std::array<double, 2> Grid::position(std::size_t idx) const noexcept {
  std::array<double, 2> x{0.0, 0.0};
  const double h = spec_.dx();
  const auto half = static_cast<double>(spec_.N / 2);
  if (spec_.n == 1) {
    x[0] = (static_cast<double>(idx) - half) * h;
  } else {
    // row-major: idx = i0 * N + i1
    x[0] = (static_cast<double>(idx / spec_.N) - half) * h;
    x[1] = (static_cast<double>(idx % spec_.N) - half) * h;
  }
  return x;
}

std::vector<double> Grid::power_symbol(double nu) const {
  std::vector<double> out(xi2_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(xi2_[i], nu);
  return out;
}

struct Fft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft::Fft(const GridSpec& spec) : plans_(std::make_unique<Plans>()), size_(spec.size()) {
  spec.validate();
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* scratch = fftw_alloc_complex(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int N = static_cast<int>(spec.N);
  if (spec.n == 1) {
    plans_->fwd = fftw_plan_dft_1d(N, scratch, scratch, FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft_1d(N, scratch, scratch, FFTW_BACKWARD, flags);
  } else {
    plans_->fwd = fftw_plan_dft_2d(N, N, scratch, scratch, FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft_2d(N, N, scratch, scratch, FFTW_BACKWARD, flags);
  }
  fftw_free(scratch);
  if (!plans_->fwd || !plans_->bwd) throw Error(ErrorCode::InvalidArgument, "FFTW planning failed");
}

Fft::~Fft() {
  if (!plans_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != size_ || out.size() != size_) throw Error(ErrorCode::InvalidArgument, "fft size mismatch");
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plans_->fwd, buf, buf);
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& c : out) c *= scale;
}

void Fft::backward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != size_ || out.size() != size_) throw Error(ErrorCode::InvalidArgument, "fft size mismatch");
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plans_->bwd, buf, buf);
}

Spectrum Fft::forward_real(std::span<const double> field) const {
  Spectrum out(field.begin(), field.end());
  forward(out, out);
  return out;
}

RealField Fft::backward_real(std::span<const Complex> coeffs, double* imag_max) const {
  Spectrum tmp(coeffs.begin(), coeffs.end());
  backward(tmp, tmp);
  RealField out(tmp.size());
  double im = 0.0;
  for (std::size_t i = 0; i < tmp.size(); ++i) {
    out[i] = tmp[i].real();
    im = std::max(im, std::abs(tmp[i].imag()));
  }
  if (imag_max) *imag_max = im;
  return out;
}

}  // namespace sevo
