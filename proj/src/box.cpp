#include "attracta/box.hpp"

#include <algorithm>
#include <stdexcept>

namespace attracta {

Box Box::centered(std::span<const double> center, std::span<const double> half_widths) {
    if (center.size() != half_widths.size()) {
        throw std::invalid_argument("Box::centered: dimension mismatch");
    }
    std::vector<Interval> axes(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        axes[i] = {center[i] - half_widths[i], center[i] + half_widths[i]};
    }
    return Box(std::move(axes));
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != axes_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!axes_[i].contains(x[i])) return false;
    }
    return true;
}

bool Box::contains_open(std::span<const double> x) const {
    if (x.size() != axes_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!axes_[i].contains_open(x[i])) return false;
    }
    return true;
}

bool Box::strictly_contains(const Box& inner) const {
    if (inner.dim() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (!(axes_[i].lo < inner[i].lo && inner[i].hi < axes_[i].hi)) return false;
    }
    return true;
}

bool Box::bounded() const {
    return std::all_of(axes_.begin(), axes_.end(), [](const Interval& a) { return a.bounded(); });
}

double Box::margin(std::span<const double> x) const {
    double m = kInf;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        m = std::min({m, x[i] - axes_[i].lo, axes_[i].hi - x[i]});
    }
    return m;
}

}  // namespace attracta
