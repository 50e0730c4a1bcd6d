#include "dstab/interval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace dstab {

using detail::next_down;
using detail::next_up;

namespace {

// Outward-rounds a nearest-rounded result by k ulps on each side.
Interval outward(double lo, double hi, int k = 1) {
    for (int i = 0; i < k; ++i) {
        lo = next_down(lo);
        hi = next_up(hi);
    }
    return Interval(lo, hi);
}

// pi enclosure: 3.141592653589793 is the nearest double below pi.
const double kPiLo = 3.14159265358979312;
const double kPiHi = next_up(kPiLo);
const double kHalfPiLo = kPiLo / 2.0;
const double kHalfPiHi = next_up(kPiHi / 2.0);

}  // namespace

Interval Interval::from_rational(const Rational& r) {
    double q = r.to_double();
    if (r.is_integer() && std::fabs(q) < 9.0e15) return Interval::point(q);
    // exact if q * den == num without rounding
    double back = q * static_cast<double>(r.den());
    if (back == static_cast<double>(r.num())) return Interval::point(q);
    return Interval(next_down(q), next_up(q));
}

std::string Interval::str() const {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "[%.17g, %.17g]", lo_, hi_);
    return buf;
}

Interval operator+(const Interval& a, const Interval& b) {
    return outward(a.lo() + b.lo(), a.hi() + b.hi());
}

Interval operator-(const Interval& a, const Interval& b) {
    return outward(a.lo() - b.hi(), a.hi() - b.lo());
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
    double p1 = a.lo() * b.lo(), p2 = a.lo() * b.hi();
    double p3 = a.hi() * b.lo(), p4 = a.hi() * b.hi();
    // 0 * inf guards
    auto fix = [](double& v) { if (std::isnan(v)) v = 0.0; };
    fix(p1); fix(p2); fix(p3); fix(p4);
    return outward(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

Interval operator*(double a, const Interval& b) {
    return Interval::point(a) * b;
}

Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains(0.0))
        throw EvalDomainError("division by interval containing zero");
    double p1 = a.lo() / b.lo(), p2 = a.lo() / b.hi();
    double p3 = a.hi() / b.lo(), p4 = a.hi() / b.hi();
    return outward(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

Interval iabs(const Interval& a) {
    if (a.lo() >= 0.0) return a;
    if (a.hi() <= 0.0) return -a;
    return Interval(0.0, std::max(-a.lo(), a.hi()));
}

Interval imin(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi()));
}

Interval imax(const Interval& a, const Interval& b) {
    return Interval(std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

Interval iexp(const Interval& a) {
    double lo = std::exp(a.lo()), hi = std::exp(a.hi());
    Interval r = outward(lo, hi, 2);
    return Interval(std::max(0.0, r.lo()), r.hi());
}

namespace {

// Conservative test for "some x with sin'(x)=0 and sin(x)=s lies in [a,b]":
// checks whether pi/2 + 2k*pi (s=+1) or -pi/2 + 2k*pi (s=-1) can intersect
// the interval, using the outward pi enclosure.
bool hits_extremum(double a, double b, double offset_lo, double offset_hi) {
    if (b - a >= 2.0 * kPiLo) return true;
    // candidate k range for offset + 2k*pi in [a,b]
    double k_min = std::floor((a - offset_hi) / (2.0 * kPiLo)) - 1.0;
    double k_max = std::ceil((b - offset_lo) / (2.0 * kPiLo)) + 1.0;
    for (double k = k_min; k <= k_max; k += 1.0) {
        double c_lo = (k >= 0 ? offset_lo + 2.0 * k * kPiLo : offset_lo + 2.0 * k * kPiHi);
        double c_hi = (k >= 0 ? offset_hi + 2.0 * k * kPiHi : offset_hi + 2.0 * k * kPiLo);
        c_lo = next_down(c_lo);
        c_hi = next_up(c_hi);
        if (c_hi >= a && c_lo <= b) return true;
    }
    return false;
}

}  // namespace

Interval isin(const Interval& a) {
    if (!std::isfinite(a.lo()) || !std::isfinite(a.hi())) return Interval(-1.0, 1.0);
    Interval ends = outward(std::min(std::sin(a.lo()), std::sin(a.hi())),
                            std::max(std::sin(a.lo()), std::sin(a.hi())), 2);
    double lo = ends.lo(), hi = ends.hi();
    if (hits_extremum(a.lo(), a.hi(), kHalfPiLo, kHalfPiHi)) hi = 1.0;
    if (hits_extremum(a.lo(), a.hi(), -kHalfPiHi, -kHalfPiLo)) lo = -1.0;
    return Interval(std::max(lo, -1.0), std::min(hi, 1.0));
}

Interval icos(const Interval& a) {
    if (!std::isfinite(a.lo()) || !std::isfinite(a.hi())) return Interval(-1.0, 1.0);
    Interval ends = outward(std::min(std::cos(a.lo()), std::cos(a.hi())),
                            std::max(std::cos(a.lo()), std::cos(a.hi())), 2);
    double lo = ends.lo(), hi = ends.hi();
    if (hits_extremum(a.lo(), a.hi(), 0.0, 0.0)) hi = 1.0;
    if (hits_extremum(a.lo(), a.hi(), -kPiHi, -kPiLo)) lo = -1.0;
    return Interval(std::max(lo, -1.0), std::min(hi, 1.0));
}

Interval isqrt(const Interval& a) {
    if (a.hi() < 0.0) throw EvalDomainError("sqrt of negative interval");
    double lo = a.lo() <= 0.0 ? 0.0 : next_down(std::sqrt(a.lo()));
    double hi = next_up(std::sqrt(a.hi()));
    return Interval(std::max(0.0, lo), hi);
}

Interval ipow(const Interval& a, int n) {
    if (n == 0) return Interval::point(1.0);
    if (n < 0) return Interval::point(1.0) / ipow(a, -n);
    if (n % 2 == 0) {
        Interval m = iabs(a);
        Interval r = Interval::point(1.0);
        for (int i = 0; i < n; ++i) r = r * m;
        return Interval(std::max(0.0, r.lo()), r.hi());
    }
    Interval r = a;
    for (int i = 1; i < n; ++i) r = r * a;
    return r;
}

const Interval& Box::at(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end())
        throw std::out_of_range("variable not in box: " + name);
    return it->second;
}

double Box::width() const {
    double w = 0.0;
    for (const auto& [_, iv] : vars_) w = std::max(w, iv.width());
    return w;
}

std::string Box::widest_axis() const {
    std::string best;
    double w = -1.0;
    for (const auto& [name, iv] : vars_) {
        if (iv.width() > w) { w = iv.width(); best = name; }
    }
    return best;
}

bool Box::contains(const Box& inner) const {
    for (const auto& [name, iv] : inner.vars_) {
        auto it = vars_.find(name);
        if (it == vars_.end() || !it->second.contains(iv)) return false;
    }
    return true;
}

Box Box::hull(const Box& o) const {
    Box r = *this;
    for (const auto& [name, iv] : o.vars_) {
        auto it = r.vars_.find(name);
        if (it == r.vars_.end()) r.vars_[name] = iv;
        else it->second = it->second.hull(iv);
    }
    return r;
}

std::string Box::str() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [name, iv] : vars_) {
        if (!first) os << ", ";
        first = false;
        os << name << ":" << iv.str();
    }
    os << "}";
    return os.str();
}

std::pair<Box, Box> split(const Box& b, const std::string& axis) {
    const Interval& iv = b.at(axis);
    if (iv.width() <= 0.0)
        throw std::invalid_argument("split on zero-width axis " + axis);
    auto [left, right] = iv.bisect();
    Box a = b, c = b;
    a.set(axis, left);
    c.set(axis, right);
    return {a, c};
}

}  // namespace dstab
