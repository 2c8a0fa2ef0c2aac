#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace attracta {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -kInf;
    double hi = kInf;

    double width() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains_open(double x) const { return lo < x && x < hi; }
    bool bounded() const { return lo > -kInf && hi < kInf; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box. Used both for the open domain D and for the closed
/// boxes I_n of a certificate; which reading applies is up to the caller.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> axes) : axes_(std::move(axes)) {}

    /// Whole space in `dim` dimensions.
    static Box unbounded(std::size_t dim) { return Box(std::vector<Interval>(dim)); }
    /// Open positive orthant (0, inf)^dim.
    static Box positive_orthant(std::size_t dim) {
        return Box(std::vector<Interval>(dim, Interval{0.0, kInf}));
    }
    static Box centered(std::span<const double> center, std::span<const double> half_widths);

    std::size_t dim() const { return axes_.size(); }
    const Interval& operator[](std::size_t i) const { return axes_[i]; }
    Interval& operator[](std::size_t i) { return axes_[i]; }
    const std::vector<Interval>& axes() const { return axes_; }

    bool contains(std::span<const double> x) const;
    bool contains_open(std::span<const double> x) const;
    /// True iff `inner` lies in the interior of this box.
    bool strictly_contains(const Box& inner) const;
    bool bounded() const;

    /// Signed margin of x with respect to the box: min over axes of the
    /// distance to the nearest face, negative when x is outside.
    double margin(std::span<const double> x) const;

    friend bool operator==(const Box&, const Box&) = default;

private:
    std::vector<Interval> axes_;
};

}  // namespace attracta
