#include "lgcf/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgcf/errors.hpp"
#include "lgcf/geometry.hpp"

namespace lgcf {

namespace {

// Lower clamps on arcosh arguments inside derivative rules.
constexpr double kMinCoshArg = 1.0 + 1e-12;
constexpr double kMinCoshExcess = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Adjoint of the radial clamp c = s(k) k, s = R/|k| when |k| > R. Writes the
// pull-back of `c_bar` into `k_bar` (accumulating).
void accumulate_through_clamp(std::span<const double> k, std::span<const double> c_bar, std::span<double> k_bar) {
    constexpr double radius = 1.0 - geometry::kBallEpsilon;
    const double n = norm(k);
    if (n <= radius) {
        for (std::size_t i = 0; i < k.size(); ++i) k_bar[i] += c_bar[i];
        return;
    }
    const double proj = dot(c_bar, k) / n;
    const double s = radius / n;
    for (std::size_t i = 0; i < k.size(); ++i) k_bar[i] += s * (c_bar[i] - proj * k[i] / n);
}

std::vector<double> clamped_copy(std::span<const double> k) {
    std::vector<double> c(k.begin(), k.end());
    geometry::clamp_to_ball(c);
    return c;
}

}  // namespace

Tape::Var Tape::push(Op op, std::size_t size, std::span<const Var> args, std::size_t row) {
    Node n{};
    n.op = op;
    n.value_offset = static_cast<std::uint32_t>(values_.size());
    n.size = static_cast<std::uint32_t>(size);
    n.arg_offset = static_cast<std::uint32_t>(args_.size());
    n.arg_count = static_cast<std::uint32_t>(args.size());
    n.aux_offset = static_cast<std::uint32_t>(aux_.size());
    n.row = row;
    for (Var a : args) {
        if (a.index >= nodes_.size()) throw ContractError("tape: argument refers to a future entry");
        args_.push_back(a.index);
    }
    values_.resize(values_.size() + size, 0.0);
    nodes_.push_back(n);
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::span<const double> Tape::value(Var v) const {
    const Node& n = nodes_.at(v.index);
    return std::span<const double>(values_).subspan(n.value_offset, n.size);
}

std::span<double> Tape::mutable_value(Var v) {
    const Node& n = nodes_[v.index];
    return std::span<double>(values_).subspan(n.value_offset, n.size);
}

std::span<const double> Tape::adjoint(Var v) const {
    if (adjoints_.size() != values_.size()) throw ContractError("tape: backward() has not been run");
    const Node& n = nodes_.at(v.index);
    return std::span<const double>(adjoints_).subspan(n.value_offset, n.size);
}

std::span<double> Tape::mutable_adjoint(std::uint32_t index) {
    const Node& n = nodes_[index];
    return std::span<double>(adjoints_).subspan(n.value_offset, n.size);
}

std::span<const std::uint32_t> Tape::args_of(const Node& n) const {
    return std::span<const std::uint32_t>(args_).subspan(n.arg_offset, n.arg_count);
}

void Tape::clear() {
    nodes_.clear();
    values_.clear();
    adjoints_.clear();
    args_.clear();
    aux_.clear();
}

Tape::Var Tape::leaf(std::size_t row, std::span<const double> value) {
    Var v = push(Op::Leaf, value.size(), {}, row);
    std::copy(value.begin(), value.end(), mutable_value(v).begin());
    return v;
}

Tape::Var Tape::constant(std::span<const double> value) {
    Var v = push(Op::Constant, value.size(), {});
    std::copy(value.begin(), value.end(), mutable_value(v).begin());
    return v;
}

Tape::Var Tape::to_klein(Var x) {
    const std::size_t size = value(x).size() - 1;
    Var out = push(Op::ToKlein, size, std::span<const Var>(&x, 1));
    geometry::to_klein(value(x), mutable_value(out));
    return out;
}

Tape::Var Tape::klein_midpoint(std::span<const Var> points) {
    if (points.empty()) throw ContractError("tape: klein_midpoint of an empty list");
    const std::size_t d = value(points.front()).size();
    Var out = push(Op::KleinMidpoint, d, points);
    auto mid = mutable_value(out);
    std::vector<double> c(d);
    double den = 0.0;
    for (Var p : points) {
        auto k = value(p);
        std::copy(k.begin(), k.end(), c.begin());
        geometry::clamp_to_ball(c);
        const double gamma = geometry::lorentz_factor(std::span<const double>(c));
        for (std::size_t i = 0; i < d; ++i) mid[i] += gamma * c[i];
        den += gamma;
    }
    for (double& m : mid) m /= den;
    return out;
}

Tape::Var Tape::from_klein(Var k) {
    Var out = push(Op::FromKlein, value(k).size() + 1, std::span<const Var>(&k, 1));
    geometry::from_klein(value(k), mutable_value(out));
    return out;
}

Tape::Var Tape::relu(Var x) {
    Var out = push(Op::Relu, value(x).size(), std::span<const Var>(&x, 1));
    auto in = value(x);
    auto o = mutable_value(out);
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = std::max(in[i], 0.0);
    return out;
}

Tape::Var Tape::calibrate(Var x) {
    Var out = push(Op::Calibrate, value(x).size(), std::span<const Var>(&x, 1));
    geometry::calibrate(value(x), mutable_value(out));
    return out;
}

Tape::Var Tape::log_origin(Var x) {
    const std::size_t w = value(x).size();
    Var out = push(Op::LogOrigin, w, std::span<const Var>(&x, 1));
    const auto origin = geometry::LorentzPoint::origin(w - 1);
    geometry::log_map(origin.coords(), value(x), mutable_value(out));
    return out;
}

Tape::Var Tape::mean(std::span<const Var> xs) {
    if (xs.empty()) throw ContractError("tape: mean of an empty list");
    const std::size_t w = value(xs.front()).size();
    Var out = push(Op::Mean, w, xs);
    auto o = mutable_value(out);
    for (Var x : xs) {
        auto in = value(x);
        for (std::size_t i = 0; i < w; ++i) o[i] += in[i];
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (double& c : o) c *= inv;
    return out;
}

Tape::Var Tape::exp_origin(Var v) {
    const std::size_t w = value(v).size();
    Var out = push(Op::ExpOrigin, w, std::span<const Var>(&v, 1));
    const auto origin = geometry::LorentzPoint::origin(w - 1);
    geometry::exp_map(origin.coords(), value(v), mutable_value(out));
    return out;
}

Tape::Var Tape::squared_distance(Var x, Var y) {
    const Var args[] = {x, y};
    Var out = push(Op::SquaredDistance, 1, args);
    mutable_value(out)[0] = geometry::squared_distance(value(x), value(y));
    return out;
}

Tape::Var Tape::linear(std::span<const Var> terms, std::span<const double> weights, double constant) {
    if (terms.size() != weights.size()) throw DimensionError("tape: linear term/weight count mismatch");
    Var out = push(Op::Linear, 1, terms);
    aux_.insert(aux_.end(), weights.begin(), weights.end());
    double s = constant;
    for (std::size_t k = 0; k < terms.size(); ++k) s += weights[k] * scalar(terms[k]);
    mutable_value(out)[0] = s;
    return out;
}

Tape::Var Tape::hinge(Var x) {
    Var out = push(Op::Hinge, 1, std::span<const Var>(&x, 1));
    mutable_value(out)[0] = std::max(scalar(x), 0.0);
    return out;
}

void Tape::backward(Var root) {
    if (root.index >= nodes_.size() || nodes_[root.index].size != 1) {
        throw ContractError("tape: backward() needs a scalar root");
    }
    adjoints_.assign(values_.size(), 0.0);
    mutable_adjoint(root.index)[0] = 1.0;
    for (std::uint32_t i = root.index + 1; i-- > 0;) backprop_node(i);
}

void Tape::backprop_node(std::uint32_t index) {
    const Node& n = nodes_[index];
    const auto out = std::span<const double>(values_).subspan(n.value_offset, n.size);
    const auto bar = std::span<const double>(adjoints_).subspan(n.value_offset, n.size);
    if (std::all_of(bar.begin(), bar.end(), [](double a) { return a == 0.0; })) return;
    const auto args = args_of(n);
    auto in_value = [&](std::size_t k) { return value(Var{args[k]}); };

    switch (n.op) {
    case Op::Leaf:
    case Op::Constant:
        break;

    case Op::ToKlein: {
        // k = x_s / x0
        auto x = in_value(0);
        auto xb = mutable_adjoint(args[0]);
        const double inv = 1.0 / x[0];
        xb[0] -= dot(bar, out) * inv;
        for (std::size_t i = 0; i < out.size(); ++i) xb[i + 1] += bar[i] * inv;
        break;
    }

    case Op::KleinMidpoint: {
        // k' = sum gamma_j c_j / S with c_j the clamped input and
        // d gamma_j / d c_j = gamma_j^3 c_j.
        double total = 0.0;
        for (std::size_t j = 0; j < args.size(); ++j) {
            total += geometry::lorentz_factor(std::span<const double>(clamped_copy(in_value(j))));
        }
        std::vector<double> cb(out.size());
        for (std::size_t j = 0; j < args.size(); ++j) {
            const auto k = in_value(j);
            const auto c = clamped_copy(k);
            const double gamma = geometry::lorentz_factor(std::span<const double>(c));
            double proj = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) proj += bar[i] * (c[i] - out[i]);
            const double g3 = gamma * gamma * gamma * proj / total;
            for (std::size_t i = 0; i < c.size(); ++i) cb[i] = gamma / total * bar[i] + g3 * c[i];
            accumulate_through_clamp(k, cb, mutable_adjoint(args[j]));
        }
        break;
    }

    case Op::FromKlein: {
        // z = gamma [1, c]
        const auto k = in_value(0);
        const auto c = clamped_copy(k);
        const double gamma = out[0];
        double proj = bar[0];
        for (std::size_t i = 0; i < c.size(); ++i) proj += bar[i + 1] * c[i];
        const double g3 = gamma * gamma * gamma * proj;
        std::vector<double> cb(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) cb[i] = gamma * bar[i + 1] + g3 * c[i];
        accumulate_through_clamp(k, cb, mutable_adjoint(args[0]));
        break;
    }

    case Op::Relu: {
        const auto x = in_value(0);
        auto xb = mutable_adjoint(args[0]);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] > 0.0) xb[i] += bar[i];
        }
        break;
    }

    case Op::Calibrate: {
        // e0 = sqrt(1 + |x_s|^2), e_s = x_s; slot 0 of the input is discarded.
        const auto x = in_value(0);
        auto xb = mutable_adjoint(args[0]);
        const double scale = bar[0] / out[0];
        for (std::size_t i = 1; i < x.size(); ++i) xb[i] += bar[i] + scale * x[i];
        break;
    }

    case Op::LogOrigin: {
        // v_s = acosh(x0) * x_s / |x_s|
        const auto x = in_value(0);
        auto xb = mutable_adjoint(args[0]);
        const auto xs = x.subspan(1);
        const double r = norm(xs);
        const double a = std::acosh(std::max(x[0], 1.0));
        if (r < geometry::kMinTangentNorm || a == 0.0) break;
        const auto vb = bar.subspan(1);
        const double along = dot(vb, xs) / r;
        if (x[0] >= 1.0) {
            const double t = std::max(x[0], kMinCoshArg);
            xb[0] += along / std::sqrt((t - 1.0) * (t + 1.0));
        }
        const double s = a / r;
        for (std::size_t i = 0; i < xs.size(); ++i) xb[i + 1] += s * (vb[i] - along * xs[i] / r);
        break;
    }

    case Op::Mean: {
        const double inv = 1.0 / static_cast<double>(args.size());
        for (std::uint32_t a : args) {
            auto xb = mutable_adjoint(a);
            for (std::size_t i = 0; i < bar.size(); ++i) xb[i] += inv * bar[i];
        }
        break;
    }

    case Op::ExpOrigin: {
        // y0 = cosh r, y_s = sinh(r)/r v_s with r = |v_s|. Slot 0 of v is
        // structurally zero and receives no adjoint.
        const auto v = in_value(0);
        auto vb = mutable_adjoint(args[0]);
        const auto vs = v.subspan(1);
        const auto ys_bar = bar.subspan(1);
        const double r = norm(vs);
        if (r < geometry::kMinTangentNorm) {
            for (std::size_t i = 0; i < vs.size(); ++i) vb[i + 1] += ys_bar[i];
            break;
        }
        const double f = std::sinh(r) / r;
        const double along = dot(ys_bar, vs) / r;
        const double coeff = bar[0] * std::sinh(r) + (std::cosh(r) - f) * along;
        for (std::size_t i = 0; i < vs.size(); ++i) vb[i + 1] += f * ys_bar[i] + coeff * vs[i] / r;
        break;
    }

    case Op::SquaredDistance: {
        // s = acosh1p(q)^2 with q = <x-y, x-y>_L / 2 (clamped >= 0);
        // ds/dq = 2 acosh1p(q) / sqrt(q (2 + q)), dq/dx = H (x - y).
        const auto x = in_value(0);
        const auto y = in_value(1);
        double q = -(x[0] - y[0]) * (x[0] - y[0]);
        for (std::size_t i = 1; i < x.size(); ++i) q += (x[i] - y[i]) * (x[i] - y[i]);
        q = std::max(0.5 * q, kMinCoshExcess);
        const double g = bar[0] * 2.0 * geometry::acosh1p(q) / std::sqrt(q * (2.0 + q));
        auto xb = mutable_adjoint(args[0]);
        auto yb = mutable_adjoint(args[1]);
        xb[0] -= g * (x[0] - y[0]);
        yb[0] += g * (x[0] - y[0]);
        for (std::size_t i = 1; i < x.size(); ++i) {
            xb[i] += g * (x[i] - y[i]);
            yb[i] -= g * (x[i] - y[i]);
        }
        break;
    }

    case Op::Linear: {
        for (std::size_t k = 0; k < args.size(); ++k) mutable_adjoint(args[k])[0] += aux_[n.aux_offset + k] * bar[0];
        break;
    }

    case Op::Hinge: {
        if (in_value(0)[0] > 0.0) mutable_adjoint(args[0])[0] += bar[0];
        break;
    }
    }
}

SparseGrad Tape::leaf_gradients() const {
    SparseGrad grads;
    if (adjoints_.size() != values_.size()) return grads;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.op != Op::Leaf) continue;
        const auto a = std::span<const double>(adjoints_).subspan(n.value_offset, n.size);
        if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) continue;
        auto [it, inserted] = grads.rows.try_emplace(n.row, a.begin(), a.end());
        if (!inserted) {
            for (std::size_t k = 0; k < a.size(); ++k) it->second[k] += a[k];
        }
    }
    return grads;
}

}  // namespace lgcf
