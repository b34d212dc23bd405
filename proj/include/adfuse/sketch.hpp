#ifndef ADFUSE_SKETCH_HPP
#define ADFUSE_SKETCH_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "adfuse/rng.hpp"

namespace adfuse {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Default real vector for image, text, question and fused features.
using FeatureVector = Vector<double>;

/// One count-sketch hash pair over an input dimension. buckets[i] is h(i) in
/// [0, sketch_dim) and signs[i] is s(i) in {-1, +1}.
struct SketchParams {
  std::size_t input_dim = 0;
  std::size_t sketch_dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> buckets;
  std::vector<std::int8_t> signs;

  friend bool operator==(const SketchParams&, const SketchParams&) = default;
};

/// Draws (h(i), s(i)) for i = 0..n-1 in that interleaved order from
/// SplitMix64(seed): h(i) = next() mod d, s(i) = +1 iff the top bit of the
/// following next() is set.
inline SketchParams make_sketch_params(std::size_t input_dim,
                                       std::size_t sketch_dim,
                                       std::uint64_t seed) {
  if (input_dim == 0) throw std::invalid_argument("sketch input dim must be positive");
  if (sketch_dim == 0) throw std::invalid_argument("sketch dim must be positive");
  if (sketch_dim > UINT32_MAX) throw std::invalid_argument("sketch dim too large");
  SketchParams p;
  p.input_dim = input_dim;
  p.sketch_dim = sketch_dim;
  p.seed = seed;
  p.buckets.resize(input_dim);
  p.signs.resize(input_dim);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < input_dim; ++i) {
    p.buckets[i] = static_cast<std::uint32_t>(rng.below(sketch_dim));
    p.signs[i] = static_cast<std::int8_t>(rng.sign());
  }
  return p;
}

namespace detail {

inline void require_dim(Eigen::Index got, std::size_t want, std::string_view what) {
  if (got < 0 || static_cast<std::size_t>(got) != want) {
    throw std::invalid_argument(std::string(what) + ": dimension " +
                                std::to_string(got) + " does not match " +
                                std::to_string(want));
  }
}

}  // namespace detail

/// out[j] = sum over i with h(i) = j of s(i) * x[i].
template <typename Derived>
Vector<typename Derived::Scalar> count_sketch(const Eigen::MatrixBase<Derived>& x,
                                              const SketchParams& p) {
  using Scalar = typename Derived::Scalar;
  detail::require_dim(x.size(), p.input_dim, "count_sketch");
  Vector<Scalar> out = Vector<Scalar>::Zero(static_cast<Eigen::Index>(p.sketch_dim));
  for (std::size_t i = 0; i < p.input_dim; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out[p.buckets[i]] += static_cast<Scalar>(p.signs[i]) * x[idx];
  }
  return out;
}

/// O(d^2) reference: out[j] = sum_i a[i] * b[(j - i) mod d].
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> circular_convolve_naive(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw std::invalid_argument("circular_convolve: dimension mismatch");
  }
  const Eigen::Index d = a.size();
  Vector<Scalar> out = Vector<Scalar>::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Scalar acc(0);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Eigen::Index k = j - i < 0 ? j - i + d : j - i;
      acc += a[i] * b[k];
    }
    out[j] = acc;
  }
  return out;
}

/// Convolution theorem route. Requires a power-of-two length.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> circular_convolve_fft(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  using Complex = std::complex<Scalar>;
  using ComplexVector = Vector<Complex>;
  if (a.size() != b.size()) {
    throw std::invalid_argument("circular_convolve: dimension mismatch");
  }
  const Eigen::Index d = a.size();
  if (d == 0 || !std::has_single_bit(static_cast<std::uint64_t>(d))) {
    throw std::invalid_argument("circular_convolve_fft: length must be a power of two");
  }
  if (d == 1) return Vector<Scalar>::Constant(1, a[0] * b[0]);

  Eigen::FFT<Scalar> fft;
  const ComplexVector ac = a.template cast<Complex>();
  const ComplexVector bc = b.template cast<Complex>();
  ComplexVector fa;
  ComplexVector fb;
  fft.fwd(fa, ac);
  fft.fwd(fb, bc);
  const ComplexVector prod = fa.cwiseProduct(fb);
  ComplexVector z;
  fft.inv(z, prod);
  return z.real();
}

/// FFT for power-of-two lengths, the direct sum otherwise.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> circular_convolve(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("circular_convolve: dimension mismatch");
  }
  if (a.size() > 0 && std::has_single_bit(static_cast<std::uint64_t>(a.size()))) {
    return circular_convolve_fft(a, b);
  }
  return circular_convolve_naive(a, b);
}

/// sign(z) * sqrt(|z|) elementwise, then unit L2 norm. Zero stays zero.
template <typename Derived>
Vector<typename Derived::Scalar> signed_sqrt_normalize(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out = z.unaryExpr([](Scalar v) {
    using std::abs;
    using std::sqrt;
    const Scalar r = sqrt(abs(v));
    return v < Scalar(0) ? -r : r;
  });
  const Scalar norm = out.norm();
  if (norm > Scalar(0)) out /= norm;
  return out;
}

namespace detail {

inline void check_pair(const SketchParams& px, const SketchParams& py) {
  if (px.sketch_dim != py.sketch_dim) {
    throw std::invalid_argument("mcb: sketch dims differ (" +
                                std::to_string(px.sketch_dim) + " vs " +
                                std::to_string(py.sketch_dim) + ")");
  }
  if (px.seed == py.seed) {
    throw std::invalid_argument("mcb: the two modalities need distinct seeds");
  }
}

}  // namespace detail

/// Compact bilinear pooling: the count sketch of x (outer) y, obtained as the
/// circular convolution of the two factor sketches.
template <typename DerivedX, typename DerivedY>
Vector<typename DerivedX::Scalar> mcb_fuse(const Eigen::MatrixBase<DerivedX>& x,
                                           const Eigen::MatrixBase<DerivedY>& y,
                                           const SketchParams& px,
                                           const SketchParams& py, bool normalize) {
  detail::check_pair(px, py);
  Vector<typename DerivedX::Scalar> z =
      circular_convolve(count_sketch(x, px), count_sketch(y, py));
  if (normalize) return signed_sqrt_normalize(z);
  return z;
}

/// Materializes the n1 x n2 outer product and count-sketches it with the pair
/// hash h(i,j) = (hx(i) + hy(j)) mod d, s(i,j) = sx(i) * sy(j). Test oracle for
/// mcb_fuse; quadratic in the input dims.
template <typename DerivedX, typename DerivedY>
Vector<typename DerivedX::Scalar> outer_sketch_oracle(const Eigen::MatrixBase<DerivedX>& x,
                                                      const Eigen::MatrixBase<DerivedY>& y,
                                                      const SketchParams& px,
                                                      const SketchParams& py) {
  using Scalar = typename DerivedX::Scalar;
  detail::check_pair(px, py);
  detail::require_dim(x.size(), px.input_dim, "outer_sketch_oracle");
  detail::require_dim(y.size(), py.input_dim, "outer_sketch_oracle");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> outer =
      x * y.transpose();
  const std::size_t d = px.sketch_dim;
  Vector<Scalar> out = Vector<Scalar>::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < px.input_dim; ++i) {
    for (std::size_t j = 0; j < py.input_dim; ++j) {
      const std::size_t bucket = (std::size_t{px.buckets[i]} + py.buckets[j]) % d;
      const int sign = px.signs[i] * py.signs[j];
      out[static_cast<Eigen::Index>(bucket)] +=
          static_cast<Scalar>(sign) *
          outer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

template <typename DerivedX, typename DerivedY>
Vector<typename DerivedX::Scalar> concat_fuse(const Eigen::MatrixBase<DerivedX>& x,
                                              const Eigen::MatrixBase<DerivedY>& y) {
  Vector<typename DerivedX::Scalar> out(x.size() + y.size());
  out << x, y;
  return out;
}

template <typename DerivedX, typename DerivedY>
Vector<typename DerivedX::Scalar> average_fuse(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) {
    throw std::invalid_argument("average requires equal dims");
  }
  return (x + y) / Scalar(2);
}

enum class FusionScheme { concat, average, mcb };

std::string_view to_string(FusionScheme scheme);
FusionScheme parse_fusion_scheme(std::string_view name);

struct FusionSpec {
  FusionScheme scheme = FusionScheme::mcb;
  std::size_t sketch_dim = 1024;
  std::uint64_t seed_a = 1;
  std::uint64_t seed_b = 2;
  bool normalize = true;

  /// Throws for mcb with d = 0 or equal seeds.
  void validate() const;

  /// Output dimension for inputs of the given dims.
  std::size_t output_dim(std::size_t dim_a, std::size_t dim_b) const;
};

/// Applies a FusionSpec to vector pairs of fixed dims; sketch params are built
/// once from (dim, d, seed) and reused.
class Fuser {
public:
  Fuser(const FusionSpec& spec, std::size_t dim_a, std::size_t dim_b);

  const FusionSpec& spec() const noexcept { return spec_; }
  std::size_t output_dim() const noexcept { return output_dim_; }

  template <typename DerivedX, typename DerivedY>
  Vector<typename DerivedX::Scalar> operator()(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y) const {
    detail::require_dim(x.size(), dim_a_, "fuse (first input)");
    detail::require_dim(y.size(), dim_b_, "fuse (second input)");
    switch (spec_.scheme) {
      case FusionScheme::concat:
        return concat_fuse(x, y);
      case FusionScheme::average:
        return average_fuse(x, y);
      case FusionScheme::mcb:
        break;
    }
    return mcb_fuse(x, y, params_a_, params_b_, spec_.normalize);
  }

private:
  FusionSpec spec_;
  std::size_t dim_a_;
  std::size_t dim_b_;
  std::size_t output_dim_;
  SketchParams params_a_;
  SketchParams params_b_;
};

}  // namespace adfuse

#endif  // ADFUSE_SKETCH_HPP
