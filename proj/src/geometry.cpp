#include "lgcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lgcf/errors.hpp"

namespace lgcf::geometry {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
    }
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
}

// -<x,y>_L - 1 evaluated as <x-y, x-y>_L / 2, which is exact for x = y and
// avoids the cancellation of forming -<x,y>_L near 1. Clamped at 0.
double cosh_excess(std::span<const double> x, std::span<const double> y) {
    require_same_size(x.size(), y.size(), "lorentz_distance");
    if (x.size() < 2) throw DimensionError("lorentz_distance: vectors need at least 2 coordinates");
    const double d0 = x[0] - y[0];
    double s = -d0 * d0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double di = x[i] - y[i];
        s += di * di;
    }
    return std::max(0.5 * s, 0.0);
}

}  // namespace

LorentzPoint LorentzPoint::origin(std::size_t dim) {
    std::vector<double> c(dim + 1, 0.0);
    c[0] = 1.0;
    return LorentzPoint(std::move(c));
}

bool LorentzPoint::on_manifold(double tol) const {
    if (coords_.size() < 2 || coords_[0] <= 0.0) return false;
    return std::abs(lorentz_inner(coords_, coords_) + 1.0) <= tol;
}

double KleinPoint::norm() const { return std::sqrt(squared_norm(coords_)); }

double TangentVector::norm() const {
    return std::sqrt(std::max(lorentz_inner(coords_, coords_), 0.0));
}

double lorentz_inner(std::span<const double> x, std::span<const double> y) {
    require_same_size(x.size(), y.size(), "lorentz_inner");
    if (x.size() < 2) throw DimensionError("lorentz_inner: vectors need at least 2 coordinates");
    double s = -x[0] * y[0];
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double acosh1p(double s) { return std::log1p(s + std::sqrt(s * (2.0 + s))); }

double lorentz_distance(std::span<const double> x, std::span<const double> y) {
    return acosh1p(cosh_excess(x, y));
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    const double d = lorentz_distance(x, y);
    return d * d;
}

void to_klein(std::span<const double> x, std::span<double> out) {
    require_same_size(out.size() + 1, x.size(), "to_klein");
    const double inv = 1.0 / x[0];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i + 1] * inv;
}

double clamp_to_ball(std::span<double> k) {
    const double norm = std::sqrt(squared_norm(k));
    constexpr double max_norm = 1.0 - kBallEpsilon;
    if (norm <= max_norm) return 1.0;
    const double scale = max_norm / norm;
    for (double& c : k) c *= scale;
    return scale;
}

double lorentz_factor(std::span<const double> k) {
    const double n2 = squared_norm(k);
    constexpr double max_n2 = (1.0 - kBallEpsilon) * (1.0 - kBallEpsilon);
    return 1.0 / std::sqrt(1.0 - std::min(n2, max_n2));
}

void from_klein(std::span<const double> k, std::span<double> out) {
    require_same_size(out.size(), k.size() + 1, "from_klein");
    std::copy(k.begin(), k.end(), out.begin() + 1);
    auto spatial = out.subspan(1);
    clamp_to_ball(spatial);
    const double gamma = 1.0 / std::sqrt(1.0 - squared_norm(spatial));
    out[0] = gamma;
    for (double& c : spatial) c *= gamma;
}

void calibrate(std::span<const double> x, std::span<double> out) {
    require_same_size(out.size(), x.size(), "calibrate");
    if (x.size() < 2) throw DimensionError("calibrate: vectors need at least 2 coordinates");
    std::copy(x.begin() + 1, x.end(), out.begin() + 1);
    out[0] = std::sqrt(1.0 + squared_norm(x.subspan(1)));
}

void renormalize_in_place(std::span<double> x) {
    if (x.size() < 2) throw DimensionError("renormalize: vectors need at least 2 coordinates");
    x[0] = std::sqrt(1.0 + squared_norm(x.subspan(1)));
}

void proj_tangent(std::span<const double> x, std::span<const double> v, std::span<double> out) {
    require_same_size(out.size(), x.size(), "proj_tangent");
    const double ip = lorentz_inner(x, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] + ip * x[i];
}

void exp_map(std::span<const double> x, std::span<const double> v, std::span<double> out) {
    require_same_size(out.size(), x.size(), "exp_map");
    const double r = std::sqrt(std::max(lorentz_inner(v, v), 0.0));
    if (r < kMinTangentNorm) {
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }
    const double c = std::cosh(r);
    const double s = std::sinh(r) / r;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x[i] + s * v[i];
}

void log_map(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    require_same_size(out.size(), x.size(), "log_map");
    const double ip = lorentz_inner(x, y);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + ip * x[i];
    const double un = std::sqrt(std::max(lorentz_inner(out, out), 0.0));
    const double dist = std::acosh(std::max(-ip, 1.0));
    if (un < kMinTangentNorm || dist == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double scale = dist / un;
    for (double& c : out) c *= scale;
}

// ---------------------------------------------------------------------------

double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y) {
    return lorentz_distance(x.coords(), y.coords());
}

KleinPoint to_klein(const LorentzPoint& x) {
    if (x.coords().size() < 2) throw DimensionError("to_klein: point needs at least 2 coordinates");
    std::vector<double> out(x.dim());
    to_klein(x.coords(), out);
    return KleinPoint(std::move(out));
}

LorentzPoint from_klein(const KleinPoint& k) {
    std::vector<double> out(k.dim() + 1);
    from_klein(k.coords(), out);
    return LorentzPoint(std::move(out));
}

double lorentz_factor(const KleinPoint& k) { return lorentz_factor(k.coords()); }

KleinPoint klein_midpoint(std::span<const KleinPoint> points) {
    if (points.empty()) throw ContractError("klein_midpoint: empty point list");
    const std::size_t dim = points.front().dim();
    std::vector<double> num(dim, 0.0);
    std::vector<double> k(dim);
    double den = 0.0;
    for (const auto& p : points) {
        require_same_size(p.dim(), dim, "klein_midpoint");
        std::copy(p.coords().begin(), p.coords().end(), k.begin());
        clamp_to_ball(k);
        const double gamma = lorentz_factor(std::span<const double>(k));
        for (std::size_t i = 0; i < dim; ++i) num[i] += gamma * k[i];
        den += gamma;
    }
    for (double& c : num) c /= den;
    return KleinPoint(std::move(num));
}

LorentzPoint calibrate(std::span<const double> x) {
    std::vector<double> out(x.size());
    calibrate(x, out);
    return LorentzPoint(std::move(out));
}

LorentzPoint renormalize(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    renormalize_in_place(out);
    return LorentzPoint(std::move(out));
}

TangentVector proj_tangent(const LorentzPoint& x, std::span<const double> v) {
    std::vector<double> out(x.coords().size());
    proj_tangent(x.coords(), v, out);
    return TangentVector(x, std::move(out));
}

LorentzPoint exp_map(const LorentzPoint& x, std::span<const double> v) {
    std::vector<double> out(x.coords().size());
    exp_map(x.coords(), v, out);
    return LorentzPoint(std::move(out));
}

LorentzPoint exp_map(const TangentVector& v) { return exp_map(v.base(), v.coords()); }

TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y) {
    std::vector<double> out(x.coords().size());
    log_map(x.coords(), y.coords(), out);
    return TangentVector(x, std::move(out));
}

void sample_wrapped_normal(double sigma, Rng& rng, std::span<double> out) {
    if (out.size() < 2) throw DimensionError("sample_wrapped_normal: dimension must be >= 1");
    if (!(sigma > 0.0)) throw ContractError("sample_wrapped_normal: sigma must be positive");
    std::normal_distribution<double> normal(0.0, sigma);
    double r2 = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        out[i] = normal(rng);
        r2 += out[i] * out[i];
    }
    // exp_map at the origin of the tangent vector (0, v).
    const double r = std::sqrt(r2);
    if (r < kMinTangentNorm) {
        out[0] = 1.0;
        for (std::size_t i = 1; i < out.size(); ++i) out[i] = 0.0;
        return;
    }
    out[0] = std::cosh(r);
    const double s = std::sinh(r) / r;
    for (std::size_t i = 1; i < out.size(); ++i) out[i] *= s;
}

LorentzPoint sample_wrapped_normal(std::size_t dim, double sigma, Rng& rng) {
    if (dim < 1) throw ContractError("sample_wrapped_normal: dimension must be >= 1");
    std::vector<double> out(dim + 1);
    sample_wrapped_normal(sigma, rng, out);
    return LorentzPoint(std::move(out));
}

}  // namespace lgcf::geometry
