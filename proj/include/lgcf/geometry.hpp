#pragma once

// Numeric kernel for the Lorentz (hyperboloid) and Klein models of hyperbolic
// space with curvature -1. Points on the hyperboloid are stored as ambient
// (d+1)-vectors with the time coordinate first.
//
// Two layers of API are provided: span kernels writing into caller-owned
// buffers (used on the hot path by the model), and value-returning wrappers
// over the strong point types.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace lgcf {

using Rng = std::mt19937_64;

namespace geometry {

/// Radial clamp applied to Klein norms before any 1/sqrt(1 - |k|^2).
inline constexpr double kBallEpsilon = 1e-7;
/// Below this tangent norm exp/log maps return their input unchanged.
inline constexpr double kMinTangentNorm = 1e-12;

class LorentzPoint {
public:
    LorentzPoint() = default;
    explicit LorentzPoint(std::vector<double> coords) : coords_(std::move(coords)) {}

    static LorentzPoint origin(std::size_t dim);

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<double> coords() noexcept { return coords_; }
    /// Intrinsic dimension d (ambient size is d+1).
    std::size_t dim() const noexcept { return coords_.empty() ? 0 : coords_.size() - 1; }
    double time() const { return coords_.front(); }
    double operator[](std::size_t i) const { return coords_[i]; }

    /// |<x,x>_L + 1| <= tol and x0 > 0.
    bool on_manifold(double tol = 1e-9) const;

private:
    std::vector<double> coords_;
};

class KleinPoint {
public:
    KleinPoint() = default;
    explicit KleinPoint(std::vector<double> coords) : coords_(std::move(coords)) {}

    std::span<const double> coords() const noexcept { return coords_; }
    std::size_t dim() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    double norm() const;

private:
    std::vector<double> coords_;
};

class TangentVector {
public:
    TangentVector(LorentzPoint base, std::vector<double> coords)
        : base_(std::move(base)), coords_(std::move(coords)) {}

    const LorentzPoint& base() const noexcept { return base_; }
    std::span<const double> coords() const noexcept { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }
    /// Induced Riemannian norm sqrt(<v,v>_L).
    double norm() const;

private:
    LorentzPoint base_;
    std::vector<double> coords_;
};

// ---------------------------------------------------------------------------
// Span kernels. Output spans must already have the right length.

/// -x0*y0 + sum_i xi*yi. Throws DimensionError on mismatch or length < 2.
double lorentz_inner(std::span<const double> x, std::span<const double> y);

/// arcosh(-<x,y>_L). The argument is formed as 1 + <x-y,x-y>_L / 2 (equal on
/// the hyperboloid) and clamped to >= 1, so that d(x, x) is exactly 0.
double lorentz_distance(std::span<const double> x, std::span<const double> y);

/// Squared geodesic distance; same clamping as lorentz_distance.
double squared_distance(std::span<const double> x, std::span<const double> y);

/// arcosh(1 + s) without forming 1 + s.
double acosh1p(double s);

void to_klein(std::span<const double> x, std::span<double> out);
void from_klein(std::span<const double> k, std::span<double> out);
double lorentz_factor(std::span<const double> k);

/// Radially pulls k inside the ball of radius 1 - kBallEpsilon. Returns the
/// scale factor applied (1 when untouched).
double clamp_to_ball(std::span<double> k);

void calibrate(std::span<const double> x, std::span<double> out);
void renormalize_in_place(std::span<double> x);

void proj_tangent(std::span<const double> x, std::span<const double> v, std::span<double> out);
void exp_map(std::span<const double> x, std::span<const double> v, std::span<double> out);
void log_map(std::span<const double> x, std::span<const double> y, std::span<double> out);

// ---------------------------------------------------------------------------
// Typed API.

double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y);
KleinPoint to_klein(const LorentzPoint& x);
LorentzPoint from_klein(const KleinPoint& k);
double lorentz_factor(const KleinPoint& k);

/// Einstein midpoint: sum_j gamma_j k_j / sum_j gamma_j. Throws ContractError
/// on an empty list and DimensionError on mixed dimensions.
KleinPoint klein_midpoint(std::span<const KleinPoint> points);

/// Replaces slot 0 of an arbitrary ambient vector so that the result lies on
/// the hyperboloid; spatial coordinates are kept.
LorentzPoint calibrate(std::span<const double> x);
LorentzPoint renormalize(std::span<const double> x);

TangentVector proj_tangent(const LorentzPoint& x, std::span<const double> v);
LorentzPoint exp_map(const LorentzPoint& x, std::span<const double> v);
LorentzPoint exp_map(const TangentVector& v);
TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y);

/// Gaussian N(0, sigma^2 I_d) in the tangent space at the origin pushed onto
/// the hyperboloid by the exponential map.
LorentzPoint sample_wrapped_normal(std::size_t dim, double sigma, Rng& rng);
void sample_wrapped_normal(double sigma, Rng& rng, std::span<double> out);

}  // namespace geometry
}  // namespace lgcf
