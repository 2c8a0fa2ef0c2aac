#include <cmath>
#include <sstream>

#include "attracta/certifier.hpp"
#include "attracta/errors.hpp"

namespace attracta {

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int k = 0; k < n; ++k) g[k] = std::exp(a + (b - a) * k / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

Certificate refuse(Certificate cert, std::string why) {
    cert.verdict = Verdict::NotCertified;
    cert.log.push_back(std::move(why));
    return cert;
}

}  // namespace

Certificate planar_certify(const std::function<double(double)>& f1,
                           const std::function<double(double)>& f2, const PlanarOptions& opts) {
    if (!(opts.a11 > 0.0 && opts.a11 < opts.b11)) throw InvalidParameter("planar: need 0 < a11 < b11");
    if (opts.grid < 2 || opts.depth < 1) throw InvalidParameter("planar: grid >= 2 and depth >= 1 required");

    Certificate cert;
    cert.method = Method::Planar;
    const double a11 = opts.a11;
    const double b11 = opts.b11;

    if (std::abs(f1(0.0)) > 1e-12 || std::abs(f2(0.0)) > 1e-12) {
        return refuse(std::move(cert), "f1(0) = f2(0) = 0 is required");
    }

    const double lo = std::min(a11, f2(a11));
    const double hi = std::max(b11, f2(b11));
    const auto grid = log_grid(lo, hi, opts.grid);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        for (int which = 1; which <= 2; ++which) {
            const auto& f = which == 1 ? f1 : f2;
            if (!(f(grid[k]) > f(grid[k - 1]))) {
                std::ostringstream os;
                os << "f" << which << " not strictly increasing between " << grid[k - 1] << " and "
                   << grid[k];
                return refuse(std::move(cert), os.str());
            }
        }
    }
    cert.log.push_back("f1, f2 strictly increasing on " + std::to_string(opts.grid) +
                       " log-spaced points");

    // x* solves f1(f2(x)) = x; f2(x) > f1^{-1}(x) is equivalent to phi(x) > 0.
    auto phi = [&](double x) { return f1(f2(x)) - x; };
    if (!(phi(a11) > 0.0)) {
        std::ostringstream os;
        os << "sign condition fails at a11 = " << a11 << ": f1(f2(x)) - x = " << phi(a11);
        return refuse(std::move(cert), os.str());
    }
    if (!(phi(b11) < 0.0)) {
        std::ostringstream os;
        os << "sign condition fails at b11 = " << b11 << ": f1(f2(x)) - x = " << phi(b11);
        return refuse(std::move(cert), os.str());
    }
    double l = a11;
    double r = b11;
    if (opts.x_star_hint > l && opts.x_star_hint < r) {
        const double ph = phi(opts.x_star_hint);
        if (ph > 0.0) l = opts.x_star_hint;
        else if (ph < 0.0) r = opts.x_star_hint;
        else l = r = opts.x_star_hint;
    }
    for (int it = 0; it < 200 && r - l > 4e-16 * r; ++it) {
        const double m = 0.5 * (l + r);
        if (phi(m) > 0.0) l = m;
        else r = m;
    }
    const double x_star = 0.5 * (l + r);
    const double y_star = f2(x_star);
    cert.equilibrium = {x_star, y_star};

    for (double x : log_grid(a11, b11, opts.grid)) {
        if (std::abs(x - x_star) <= 1e-9 * x_star) continue;
        const double p = phi(x);
        const bool ok = x < x_star ? p > 0.0 : p < 0.0;
        if (!ok) {
            std::ostringstream os;
            os << "sign condition violated at x = " << x << " (f1(f2(x)) - x = " << p << ")";
            return refuse(std::move(cert), os.str());
        }
    }
    cert.log.push_back("sign condition holds on both sides of x*");

    PlanarWitness w;
    w.x_star = x_star;
    w.y_star = y_star;
    w.a1 = {a11};
    w.a2 = {f2(a11)};
    w.b1 = {b11};
    w.b2 = {f2(b11)};
    auto gap = [&] { return std::max(w.b1.back() - w.a1.back(), w.b2.back() - w.a2.back()); };
    double prev_gap = kInf;
    double ratio = kInf;
    for (int n = 1; n < opts.depth && gap() >= 1e-6; ++n) {
        prev_gap = gap();
        const double a1 = f1(w.a2.back());
        const double a2 = f2(a1);
        const double b1 = f1(w.b2.back());
        const double b2 = f2(b1);
        if (!(a1 > w.a1.back() && a2 > w.a2.back() && b1 < w.b1.back() && b2 < w.b2.back())) {
            cert.planar = w;
            return refuse(std::move(cert),
                          "bracketing sequences lost strict monotonicity at step " + std::to_string(n + 1));
        }
        if (!(a1 <= x_star && x_star <= b1 && a2 <= y_star && y_star <= b2)) {
            cert.planar = w;
            return refuse(std::move(cert), "bracketing sequences do not enclose the equilibrium");
        }
        w.a1.push_back(a1);
        w.a2.push_back(a2);
        w.b1.push_back(b1);
        w.b2.push_back(b2);
        ratio = gap() / prev_gap;
    }
    cert.planar = w;
    const double final_gap = gap();
    std::ostringstream os;
    os << "sequences of length " << w.a1.size() << ", final gap " << final_gap;
    cert.log.push_back(os.str());
    if (final_gap < 1e-6) {
        cert.verdict = Verdict::Certified;
    } else if (ratio < 0.999) {
        cert.verdict = Verdict::Certified;
        cert.log.push_back("gap still shrinking at the depth limit; accepted as converging");
    } else {
        cert.verdict = Verdict::Inconclusive;
        cert.log.push_back("gap stagnates at the depth limit");
    }
    return cert;
}

}  // namespace attracta
