#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dstab/rational.hpp"

namespace dstab {

// Raised when a term is evaluated outside its domain guard (division by an
// interval containing zero, negative radicand).
struct EvalDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline double next_up(double x) {
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}
inline double next_down(double x) {
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}
}  // namespace detail

// Closed interval with double endpoints.  Every operation rounds the lower
// endpoint down and the upper endpoint up, so the result encloses the exact
// real-valued image.  Hardware doubles are the dyadic-rational endpoint type.
class Interval {
public:
    Interval() : lo_(0.0), hi_(0.0) {}
    Interval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo_ <= hi_)) throw std::invalid_argument("interval lo > hi");
    }

    static Interval point(double v) { return Interval(v, v); }
    static Interval entire() {
        return Interval(-std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity());
    }
    static Interval from_rational(const Rational& r);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double mid() const {
        double m = 0.5 * (lo_ + hi_);
        if (!std::isfinite(m)) m = 0.5 * lo_ + 0.5 * hi_;
        if (m < lo_) m = lo_;
        if (m > hi_) m = hi_;
        return m;
    }
    double width() const { return hi_ - lo_; }
    double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }

    bool contains(double v) const { return lo_ <= v && v <= hi_; }
    bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool intersects(const Interval& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }
    bool is_point() const { return lo_ == hi_; }

    Interval hull(const Interval& o) const {
        return Interval(std::min(lo_, o.lo_), std::max(hi_, o.hi_));
    }
    Interval intersect(const Interval& o) const {
        double l = std::max(lo_, o.lo_), h = std::min(hi_, o.hi_);
        if (l > h) throw std::domain_error("empty intersection");
        return Interval(l, h);
    }
    Interval inflate(double eps) const { return Interval(lo_ - eps, hi_ + eps); }

    std::pair<Interval, Interval> bisect() const {
        double m = mid();
        return {Interval(lo_, m), Interval(m, hi_)};
    }

    std::string str() const;

private:
    double lo_, hi_;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);  // throws if 0 in b
Interval operator*(double a, const Interval& b);

Interval iabs(const Interval& a);
Interval imin(const Interval& a, const Interval& b);
Interval imax(const Interval& a, const Interval& b);
Interval iexp(const Interval& a);
Interval isin(const Interval& a);
Interval icos(const Interval& a);
Interval isqrt(const Interval& a);       // throws if a.hi() < 0; clamps lo to 0
Interval ipow(const Interval& a, int n); // integer power, n may be negative

// Named-variable box: the domain of a quantifier block.
class Box {
public:
    Box() = default;

    bool has(const std::string& name) const { return vars_.count(name) > 0; }
    const Interval& at(const std::string& name) const;
    void set(const std::string& name, const Interval& iv) { vars_[name] = iv; }
    void erase(const std::string& name) { vars_.erase(name); }
    std::size_t size() const { return vars_.size(); }
    bool empty() const { return vars_.empty(); }

    const std::map<std::string, Interval>& entries() const { return vars_; }

    // max over variables of interval width
    double width() const;
    // name of the widest axis (lexicographically first among ties)
    std::string widest_axis() const;

    bool contains(const Box& inner) const;
    Box hull(const Box& o) const;

    std::string str() const;

private:
    std::map<std::string, Interval> vars_;
};

// Bisects `b` at the midpoint of `axis`.  Halves share only the midpoint.
std::pair<Box, Box> split(const Box& b, const std::string& axis);

}  // namespace dstab
