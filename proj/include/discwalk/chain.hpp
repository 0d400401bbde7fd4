#pragma once

// Absorbing Markov chains on a finite transient set A: the restricted kernel
// P_A and solves of (I - P_A) u = f. Three backends, picked by size and range:
//   * dense Cholesky for small A,
//   * sparse LDL^T for short-range kernels,
//   * matrix-free conjugate gradients with FFT convolution for long-range
//     kernels on large A.
// I - P_A is symmetric positive definite whenever P_A is symmetric and
// strictly substochastic on every reachable class, which all callers ensure.

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "geometry.hpp"
#include "step_law.hpp"

namespace discwalk {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DimensionTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::size_t max_states = 300000;
  std::size_t dense_limit = 2000;
  /// Laws with at most this many atoms are assembled as sparse matrices.
  std::size_t short_range_atoms = 64;
  double residual_tol = 1e-10;
  double cg_tol = 1e-13;
  int cg_max_iter = 50000;
};

/// One-step kernel as offsets on the ambient space: the law itself on the
/// plane, the projected kernel p̂_1 on Z^2_K.
struct TransitionKernel {
  Ambient ambient;
  std::vector<Atom> steps;
};

inline TransitionKernel make_kernel(const StepLaw& law, const Ambient& amb) {
  if (!amb.is_torus()) return {amb, law.atoms()};
  return {amb, project_kernel(law, amb.K()).offsets()};
}

/// The transient state set with an O(1) point -> index lookup.
class Domain {
 public:
  Domain(Ambient amb, std::vector<Point> states) : amb_(amb) {
    for (auto& p : states) p = amb_.canonical(p);
    std::sort(states.begin(), states.end());
    if (std::adjacent_find(states.begin(), states.end()) != states.end())
      throw GeometryError("domain states must be distinct");
    states_ = std::move(states);
    if (amb_.is_torus()) {
      lo1_ = lo2_ = -(amb_.K() / 2);
      w1_ = w2_ = amb_.K();
    } else if (!states_.empty()) {
      std::int64_t hi1 = states_.front().x1, hi2 = states_.front().x2;
      lo1_ = hi1;
      lo2_ = hi2;
      for (auto p : states_) {
        lo1_ = std::min(lo1_, p.x1);
        hi1 = std::max(hi1, p.x1);
        lo2_ = std::min(lo2_, p.x2);
        hi2 = std::max(hi2, p.x2);
      }
      w1_ = hi1 - lo1_ + 1;
      w2_ = hi2 - lo2_ + 1;
    }
    lookup_.assign(static_cast<std::size_t>(w1_ * w2_), -1);
    for (std::size_t i = 0; i < states_.size(); ++i) lookup_[cell(states_[i])] = static_cast<std::int64_t>(i);
  }

  /// Canonical members of `region` on `amb`.
  static Domain of(const Region& region, const Ambient& amb) { return Domain(amb, region.enumerate(amb)); }

  const Ambient& ambient() const { return amb_; }
  const std::vector<Point>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  Point operator[](std::size_t i) const { return states_[i]; }

  /// Index of a canonical point, or -1.
  std::int64_t index_of(Point p) const {
    const std::int64_t a = p.x1 - lo1_, b = p.x2 - lo2_;
    if (a < 0 || b < 0 || a >= w1_ || b >= w2_) return -1;
    return lookup_[static_cast<std::size_t>(a * w2_ + b)];
  }
  bool contains(Point p) const { return index_of(amb_.canonical(p)) >= 0; }

  std::int64_t box_lo1() const { return lo1_; }
  std::int64_t box_lo2() const { return lo2_; }
  std::int64_t box_w1() const { return w1_; }
  std::int64_t box_w2() const { return w2_; }

 private:
  std::size_t cell(Point p) const { return static_cast<std::size_t>((p.x1 - lo1_) * w2_ + (p.x2 - lo2_)); }

  Ambient amb_;
  std::vector<Point> states_;
  std::int64_t lo1_ = 0, lo2_ = 0, w1_ = 0, w2_ = 0;
  std::vector<std::int64_t> lookup_;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Smallest 2^a 3^b 5^c 7^d >= n.
inline std::int64_t fft_friendly(std::int64_t n) {
  for (std::int64_t m = std::max<std::int64_t>(n, 1);; ++m) {
    std::int64_t r = m;
    for (std::int64_t f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

/// Circular convolution with a fixed real kernel on an L1 x L2 grid.
class GridConvolver {
 public:
  GridConvolver(std::int64_t L1, std::int64_t L2, const std::vector<Atom>& kernel) : L1_(L1), L2_(L2) {
    const std::size_t real_n = static_cast<std::size_t>(L1 * L2);
    const std::size_t cplx_n = static_cast<std::size_t>(L1 * (L2 / 2 + 1));
    real_buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_n));
    cplx_buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * cplx_n));
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(L1), static_cast<int>(L2), real_buf_, cplx_buf_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_2d(static_cast<int>(L1), static_cast<int>(L2), cplx_buf_, real_buf_, FFTW_ESTIMATE);
    }
    std::fill(real_buf_, real_buf_ + real_n, 0.0);
    for (const auto& a : kernel) {
      const auto i = ((a.step.x1 % L1) + L1) % L1;
      const auto j = ((a.step.x2 % L2) + L2) % L2;
      real_buf_[i * L2 + j] += a.mass;
    }
    fftw_execute(fwd_);
    spectrum_.resize(cplx_n);
    const double norm = 1.0 / static_cast<double>(real_n);
    for (std::size_t k = 0; k < cplx_n; ++k) spectrum_[k] = {cplx_buf_[k][0] * norm, cplx_buf_[k][1] * norm};
  }
  GridConvolver(const GridConvolver&) = delete;
  GridConvolver& operator=(const GridConvolver&) = delete;
  ~GridConvolver() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
  }

  std::int64_t L1() const { return L1_; }
  std::int64_t L2() const { return L2_; }

  /// grid <- kernel ⊛ grid. Not reentrant: the convolver owns its buffers.
  void convolve(std::vector<double>& grid) const {
    std::copy(grid.begin(), grid.end(), real_buf_);
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < spectrum_.size(); ++k) {
      const double a = cplx_buf_[k][0], b = cplx_buf_[k][1];
      const auto [c, d] = spectrum_[k];
      cplx_buf_[k][0] = a * c - b * d;
      cplx_buf_[k][1] = a * d + b * c;
    }
    fftw_execute(bwd_);
    std::copy(real_buf_, real_buf_ + grid.size(), grid.begin());
  }

 private:
  std::int64_t L1_, L2_;
  double* real_buf_ = nullptr;
  fftw_complex* cplx_buf_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  std::vector<std::pair<double, double>> spectrum_;
};

}  // namespace detail

/// Linear convolution of two grids of equal odd side via FFT with zero padding.
/// Both inputs are (2R+1)^2 fields centred at the origin; the result is
/// truncated to the same window.
inline std::vector<double> convolve_centered(const std::vector<double>& a, const std::vector<double>& b, std::int64_t R) {
  const std::int64_t W = 2 * R + 1;
  const std::int64_t L = detail::fft_friendly(2 * W);
  std::vector<Atom> kernel;
  for (std::int64_t i = 0; i < W; ++i)
    for (std::int64_t j = 0; j < W; ++j) {
      const double v = b[static_cast<std::size_t>(i * W + j)];
      if (v != 0) kernel.push_back({{i - R, j - R}, v});
    }
  detail::GridConvolver conv(L, L, kernel);
  std::vector<double> grid(static_cast<std::size_t>(L * L), 0.0);
  for (std::int64_t i = 0; i < W; ++i)
    for (std::int64_t j = 0; j < W; ++j) grid[static_cast<std::size_t>(i * L + j)] = a[static_cast<std::size_t>(i * W + j)];
  conv.convolve(grid);
  std::vector<double> out(static_cast<std::size_t>(W * W));
  for (std::int64_t i = 0; i < W; ++i)
    for (std::int64_t j = 0; j < W; ++j) out[static_cast<std::size_t>(i * W + j)] = grid[static_cast<std::size_t>(i * L + j)];
  return out;
}

enum class Backend { Dense, SparseDirect, FftCg };

inline std::string to_string(Backend b) {
  switch (b) {
    case Backend::Dense: return "dense";
    case Backend::SparseDirect: return "sparse-ldlt";
    case Backend::FftCg: return "fft-cg";
  }
  return "?";
}

class AbsorbingChain {
 public:
  AbsorbingChain(const TransitionKernel& kernel, Domain domain, SolverOptions opt = {})
      : kernel_(kernel), domain_(std::move(domain)), opt_(opt) {
    if (domain_.ambient() != kernel_.ambient) throw GeometryError("kernel and domain ambients differ");
    if (domain_.size() == 0) throw GeometryError("empty transient domain");
    if (domain_.size() > opt_.max_states)
      throw DimensionTooLarge("domain has " + std::to_string(domain_.size()) + " states; cap is " +
                              std::to_string(opt_.max_states));
    for (const auto& a : kernel_.steps)
      if (a.step == Point{0, 0}) hold_ = a.mass;
    if (domain_.size() <= opt_.dense_limit) {
      backend_ = Backend::Dense;
      build_dense();
    } else if (kernel_.steps.size() <= opt_.short_range_atoms) {
      backend_ = Backend::SparseDirect;
      build_sparse();
    } else {
      backend_ = Backend::FftCg;
      build_fft();
    }
  }

  AbsorbingChain(const StepLaw& law, Domain domain, SolverOptions opt = {})
      : AbsorbingChain(make_kernel(law, domain.ambient()), std::move(domain), opt) {}

  const Domain& domain() const { return domain_; }
  const TransitionKernel& kernel() const { return kernel_; }
  Backend backend() const { return backend_; }
  std::size_t size() const { return domain_.size(); }

  /// Canonical landing point of x + d.
  Point land(Point x, const Atom& a) const { return kernel_.ambient.canonical(x + a.step); }

  /// r_i = sum over steps from state i landing outside A of mass * f(landing).
  template <class F>
  std::vector<double> exit_sum(F&& f) const {
    std::vector<double> r(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      const Point x = domain_[i];
      double acc = 0;
      for (const auto& a : kernel_.steps) {
        const Point y = land(x, a);
        if (domain_.index_of(y) < 0) acc += a.mass * f(y);
      }
      r[i] = acc;
    }
    return r;
  }

  /// (P_A u)_i.
  std::vector<double> apply(std::span<const double> u) const {
    std::vector<double> out(size(), 0.0);
    switch (backend_) {
      case Backend::Dense: {
        Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
        Eigen::VectorXd v = uv - dense_ * uv;
        std::copy(v.data(), v.data() + v.size(), out.begin());
        break;
      }
      case Backend::SparseDirect: {
        Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
        Eigen::VectorXd v = uv - sparse_ * uv;
        std::copy(v.data(), v.data() + v.size(), out.begin());
        break;
      }
      case Backend::FftCg:
        fft_apply(u, out);
        break;
    }
    return out;
  }

  /// Solves (I - P_A) u = rhs and checks the relative residual.
  std::vector<double> solve(std::span<const double> rhs) const {
    if (rhs.size() != size()) throw std::invalid_argument("rhs size mismatch");
    const double bnorm = std::sqrt(std::inner_product(rhs.begin(), rhs.end(), rhs.begin(), 0.0));
    if (bnorm == 0) return std::vector<double>(size(), 0.0);
    std::vector<double> u(size());
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    switch (backend_) {
      case Backend::Dense: {
        Eigen::VectorXd x = dense_llt_->solve(b);
        std::copy(x.data(), x.data() + x.size(), u.begin());
        break;
      }
      case Backend::SparseDirect: {
        Eigen::VectorXd x = sparse_ldlt_->solve(b);
        std::copy(x.data(), x.data() + x.size(), u.begin());
        break;
      }
      case Backend::FftCg:
        u = conjugate_gradient(rhs, bnorm);
        break;
    }
    const auto pu = apply(u);
    double rr = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double d = rhs[i] - (u[i] - pu[i]);
      rr += d * d;
    }
    last_residual_ = std::sqrt(rr) / bnorm;
    if (!(last_residual_ <= opt_.residual_tol))
      throw NumericalError("solver residual " + std::to_string(last_residual_) + " exceeds " +
                           std::to_string(opt_.residual_tol));
    return u;
  }

  std::vector<double> solve_unit(std::size_t j) const {
    std::vector<double> e(size(), 0.0);
    e[j] = 1.0;
    return solve(e);
  }

  double last_residual() const { return last_residual_; }

 private:
  template <class Emit>
  void for_each_entry(Emit&& emit) const {
    for (std::size_t i = 0; i < size(); ++i) {
      const Point x = domain_[i];
      for (const auto& a : kernel_.steps) {
        const auto j = domain_.index_of(land(x, a));
        if (j >= 0) emit(i, static_cast<std::size_t>(j), a.mass);
      }
    }
  }

  void build_dense() {
    const auto n = static_cast<Eigen::Index>(size());
    dense_ = Eigen::MatrixXd::Identity(n, n);
    for_each_entry([&](std::size_t i, std::size_t j, double m) {
      dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -= m;
    });
    dense_llt_ = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(dense_);
    if (dense_llt_->info() != Eigen::Success) throw SingularSystem("I - P_A is not positive definite");
  }

  void build_sparse() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size() * (kernel_.steps.size() + 1));
    for (std::size_t i = 0; i < size(); ++i)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for_each_entry([&](std::size_t i, std::size_t j, double m) {
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), -m);
    });
    const auto n = static_cast<Eigen::Index>(size());
    sparse_.resize(n, n);
    sparse_.setFromTriplets(trip.begin(), trip.end());
    sparse_ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(sparse_);
    if (sparse_ldlt_->info() != Eigen::Success) throw SingularSystem("sparse LDL^T factorization failed");
    const auto& d = sparse_ldlt_->vectorD();
    if ((d.array() <= 0).any()) throw SingularSystem("I - P_A is not positive definite");
  }

  void build_fft() {
    // Tight bounding box of the states. On the torus a box at most K/2 wide
    // has no wrapped differences, so a padded box replaces the full K x K grid.
    std::int64_t lo1 = domain_[0].x1, hi1 = lo1, lo2 = domain_[0].x2, hi2 = lo2;
    for (auto p : domain_.states()) {
      lo1 = std::min(lo1, p.x1);
      hi1 = std::max(hi1, p.x1);
      lo2 = std::min(lo2, p.x2);
      hi2 = std::max(hi2, p.x2);
    }
    const std::int64_t w1 = hi1 - lo1 + 1, w2 = hi2 - lo2 + 1;
    const std::int64_t K = kernel_.ambient.K();
    const bool periodic = kernel_.ambient.is_torus() && (2 * w1 > K || 2 * w2 > K);
    std::vector<Atom> kept;
    std::int64_t r1 = 0, r2 = 0;
    for (const auto& a : kernel_.steps) {
      if (!periodic && (std::abs(a.step.x1) >= w1 || std::abs(a.step.x2) >= w2)) continue;
      kept.push_back(a);
      r1 = std::max(r1, std::abs(a.step.x1));
      r2 = std::max(r2, std::abs(a.step.x2));
    }
    std::int64_t L1 = K, L2 = K;
    if (periodic) {
      lo1 = domain_.box_lo1();
      lo2 = domain_.box_lo2();
    } else {
      L1 = detail::fft_friendly(w1 + r1);
      L2 = detail::fft_friendly(w2 + r2);
    }
    conv_ = std::make_unique<detail::GridConvolver>(L1, L2, kept);
    cells_.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const Point p = domain_[i];
      cells_[i] = static_cast<std::size_t>((p.x1 - lo1) * L2 + (p.x2 - lo2));
    }
  }

  void fft_apply(std::span<const double> u, std::vector<double>& out) const {
    std::lock_guard<std::mutex> lock(*fft_mutex_);
    std::vector<double> grid(static_cast<std::size_t>(conv_->L1() * conv_->L2()), 0.0);
    for (std::size_t i = 0; i < size(); ++i) grid[cells_[i]] = u[i];
    conv_->convolve(grid);
    for (std::size_t i = 0; i < size(); ++i) out[i] = grid[cells_[i]];
  }

  std::vector<double> conjugate_gradient(std::span<const double> b, double bnorm) const {
    const std::size_t n = size();
    const double diag = 1.0 - hold_;
    std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag;
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    for (int it = 0; it < opt_.cg_max_iter; ++it) {
      fft_apply(p, q);
      for (std::size_t i = 0; i < n; ++i) q[i] = p[i] - q[i];
      const double pq = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
      if (!(pq > 0)) throw SingularSystem("I - P_A is not positive definite (CG breakdown)");
      const double alpha = rz / pq;
      double rr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
        rr += r[i] * r[i];
      }
      if (std::sqrt(rr) <= opt_.cg_tol * bnorm) return x;
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag;
      const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NumericalError("conjugate gradients did not converge in " + std::to_string(opt_.cg_max_iter) + " iterations");
  }

  TransitionKernel kernel_;
  Domain domain_;
  SolverOptions opt_;
  Backend backend_ = Backend::Dense;
  double hold_ = 0;

  Eigen::MatrixXd dense_;
  std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>> dense_llt_;
  Eigen::SparseMatrix<double> sparse_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> sparse_ldlt_;
  std::unique_ptr<detail::GridConvolver> conv_;
  std::unique_ptr<std::mutex> fft_mutex_ = std::make_unique<std::mutex>();
  std::vector<std::size_t> cells_;
  mutable double last_residual_ = 0;
};

}  // namespace discwalk
