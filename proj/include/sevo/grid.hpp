#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sevo {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;
using RealField = std::vector<double>;

/// Periodic box [-L, L)^n with N points per dimension.
struct GridSpec {
  int n = 1;
  std::size_t N = 512;
  double L = 40.0;

  void validate() const;
  std::size_t size() const noexcept { return n == 1 ? N : N * N; }
  double dx() const noexcept { return 2.0 * L / static_cast<double>(N); }
  double cell_volume() const noexcept;
  double box_volume() const noexcept;
  /// (pi / L) (N / 2), the largest resolved wavenumber.
  double max_wavenumber() const noexcept;

  bool operator==(const GridSpec&) const = default;
};

/// Wavenumber and multiplier tables for one GridSpec and order sigma. Index
/// layout is FFT order, row-major for n = 2. Points sit at x_j = (j - N/2) dx.
class Grid {
 public:
  Grid(GridSpec spec, double sigma);

  const GridSpec& spec() const noexcept { return spec_; }
  double sigma() const noexcept { return sigma_; }
  std::size_t size() const noexcept { return spec_.size(); }

  /// |xi|^2 and |xi|^{2 sigma} per mode.
  std::span<const double> xi_squared() const noexcept { return xi2_; }
  std::span<const double> symbol() const noexcept { return a_; }
  /// 1 for modes kept by the 2/3 rule, 0 otherwise.
  std::span<const double> dealias_mask() const noexcept { return mask_; }
  /// Integer mode index per dimension (FFT order to signed).
  int mode_index(std::size_t j) const noexcept;
  /// Coordinates of grid point `idx` (up to 2 entries).
  std::array<double, 2> position(std::size_t idx) const noexcept;

  /// |xi|^{2 nu} per mode.
  std::vector<double> power_symbol(double nu) const;

 private:
  GridSpec spec_;
  double sigma_;
  std::vector<double> xi2_;
  std::vector<double> a_;
  std::vector<double> mask_;
};

/// FFTW plan pair for one grid shape. Forward is normalised by 1/size so the
/// coefficients are averages; backward is the plain synthesis. Plans are
/// created under a global lock; execution is reentrant.
class Fft {
 public:
  explicit Fft(const GridSpec& spec);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;

  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  void backward(std::span<const Complex> in, std::span<Complex> out) const;

  Spectrum forward_real(std::span<const double> field) const;
  /// Real part of the synthesis; `imag_max` receives max |Im| if non-null.
  RealField backward_real(std::span<const Complex> coeffs, double* imag_max = nullptr) const;

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t size_ = 0;
};

}  // namespace sevo
