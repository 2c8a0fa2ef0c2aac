#include "attracta/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "attracta/errors.hpp"

namespace attracta {

namespace {

std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os.precision(10);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

double spectral_radius_nonnegative(const Matrix& N) {
    const Eigen::Index n = N.rows();
    if (n == 0 || N.maxCoeff() == 0.0) return 0.0;
    // The shift keeps every iterate strictly positive and makes the
    // dominant eigenvalue unique in modulus even for periodic N.
    const Matrix B = N + Matrix::Identity(n, n);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    double up = kInf;
    double checkpoint = kInf;
    constexpr int kMaxIter = 200000;
    for (int k = 0; k < kMaxIter; ++k) {
        const Eigen::VectorXd w = B * v;
        double hi = 0.0;
        double lo = kInf;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (v[i] <= 0.0) continue;  // underflowed component; grows slower than the rest
            const double r = w[i] / v[i];
            hi = std::max(hi, r);
            lo = std::min(lo, r);
        }
        up = std::min(up, hi);
        if (hi - lo <= 1e-15 * hi) return 0.5 * (hi + lo) - 1.0;
        if (k % 64 == 63) {
            if (checkpoint - up <= 1e-15 * up) break;
            checkpoint = up;
        }
        v = w / w.maxCoeff();
    }
    return up - 1.0;
}

MMatrixResult is_m_matrix(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw InvalidParameter("is_m_matrix: matrix must be square and non-empty");
    }
    const Eigen::Index n = A.rows();
    MMatrixResult res;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && A(i, j) > 0.0) {
                res.spectral_radius = std::numeric_limits<double>::quiet_NaN();
                res.note = "positive off-diagonal entry";
                return res;
            }
        }
    }

    // Route (ii): A = sI - N with N >= 0; A is a nonsingular M-matrix iff rho(N) < s.
    const double s = std::max(1.0, A.diagonal().maxCoeff());
    const Matrix N = s * Matrix::Identity(n, n) - A;
    res.spectral_radius = spectral_radius_nonnegative(N) / s;
    const bool spectral_borderline = std::abs(res.spectral_radius - 1.0) <= kStrictMargin;
    const bool spectral_route = res.spectral_radius < 1.0 - kStrictMargin;

    // Route (i): A^{-1} exists and is entrywise nonnegative, A^{-1} 1 > 0.
    Eigen::PartialPivLU<Matrix> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        res.borderline = true;
        res.note = "near-singular: condition estimate exceeds 1e14";
        return res;
    }
    const Matrix inv = lu.inverse();
    const Eigen::VectorXd xi = inv * Eigen::VectorXd::Ones(n);
    const double scale = inv.cwiseAbs().maxCoeff();
    const bool inverse_route = (inv.array() >= -1e-12 * scale).all() && (xi.array() > 0.0).all();
    res.inverse = inv;

    if (spectral_borderline) {
        res.borderline = true;
        std::ostringstream os;
        os << "spectral radius " << res.spectral_radius << " within " << kStrictMargin << " of 1";
        res.note = os.str();
        return res;
    }
    if (inverse_route != spectral_route) {
        std::ostringstream os;
        os << "M-matrix routes disagree: inverse positivity says " << inverse_route
           << ", spectral radius " << res.spectral_radius << " says " << spectral_route;
        throw InternalConsistencyError(os.str());
    }
    res.is_m_matrix = inverse_route;
    if (res.is_m_matrix) {
        res.xi.assign(xi.data(), xi.data() + n);
    } else {
        res.note = "spectral radius not below 1";
    }
    return res;
}

double contraction_rate(const Matrix& L, std::span<const double> xi) {
    const auto n = static_cast<std::size_t>(L.rows());
    if (static_cast<std::size_t>(L.cols()) != n || xi.size() != n) {
        throw InvalidParameter("contraction_rate: dimension mismatch");
    }
    double alpha = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xi[i] > 0.0)) throw InvalidParameter("contraction_rate: xi must be positive");
        double a = L(i, i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) a += xi[j] / xi[i] * L(i, j);
        }
        alpha = std::max(alpha, a);
    }
    return alpha;
}

double max_admissible_c(std::span<const double> z, std::span<const double> xi, const Box& domain) {
    if (z.size() != domain.dim() || xi.size() != z.size()) {
        throw InvalidParameter("max_admissible_c: dimension mismatch");
    }
    if (!domain.contains_open(z)) throw InvalidParameter("equilibrium is not inside the domain");
    double c = kInf;
    for (std::size_t i = 0; i < z.size(); ++i) {
        c = std::min({c, (domain[i].hi - z[i]) / xi[i], (z[i] - domain[i].lo) / xi[i]});
    }
    return c;
}

Box box_sequence(std::span<const double> z, double c, std::span<const double> xi, double alpha,
                 int n, const Box& domain) {
    if (n < 1) throw InvalidParameter("box index must be >= 1");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidParameter("box scale c must be positive");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidParameter("contraction rate must lie in [0, 1)");
    if (xi.size() != z.size()) throw InvalidParameter("box_sequence: dimension mismatch");
    const double cmax = max_admissible_c(z, xi, domain);
    if (c > cmax * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "c = " << c << " exceeds the admissible bound " << cmax << " for the domain";
        throw InvalidParameter(os.str());
    }
    const double scale = c * std::pow(alpha, n - 1);
    Vector half(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) half[i] = scale * xi[i];
    return Box::centered(z, half);
}

Box box_sequence(std::span<const double> z, double c, std::span<const double> xi, double alpha,
                 int n) {
    return box_sequence(z, c, xi, alpha, n, Box::unbounded(z.size()));
}

BoxCheck verify_box_mapping(const VectorMap& F, const Box& inner, const Box& outer,
                            std::size_t samples, std::uint64_t seed) {
    if (!inner.bounded()) throw InvalidParameter("verify_box_mapping: inner box must be bounded");
    if (inner.dim() != outer.dim()) throw InvalidParameter("verify_box_mapping: dimension mismatch");
    const std::size_t s = inner.dim();

    double bound_scale = 1.0;
    for (const auto& a : outer.axes()) {
        if (std::isfinite(a.lo)) bound_scale = std::max(bound_scale, std::abs(a.lo));
        if (std::isfinite(a.hi)) bound_scale = std::max(bound_scale, std::abs(a.hi));
    }
    const double allowance = 1e-12 * bound_scale;

    BoxCheck out;
    auto probe = [&](const Vector& x) {
        Vector y;
        try {
            y = F(x);
        } catch (const DomainExit& e) {
            throw DomainExit(std::string(e.what()) + " at point " + format_point(x), e.component(),
                             e.time());
        } catch (const std::exception& e) {
            throw Error(std::string("map evaluation failed at point ") + format_point(x) + ": " +
                        e.what());
        }
        const double m = all_finite(y) ? outer.margin(y) : -kInf;
        ++out.evaluated;
        if (m < out.worst_margin || out.worst_point.empty()) {
            out.worst_margin = m;
            out.worst_point = x;
        }
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (samples > 0) {
        std::vector<std::vector<std::size_t>> strata(s, std::vector<std::size_t>(samples));
        for (auto& perm : strata) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
        }
        Vector x(s);
        for (std::size_t k = 0; k < samples; ++k) {
            for (std::size_t d = 0; d < s; ++d) {
                const double u = (static_cast<double>(strata[d][k]) + unit(rng)) /
                                 static_cast<double>(samples);
                x[d] = inner[d].lo + u * inner[d].width();
            }
            probe(x);
        }
    }
    if (s <= 20) {
        Vector x(s);
        for (std::size_t mask = 0; mask < (std::size_t{1} << s); ++mask) {
            for (std::size_t d = 0; d < s; ++d) x[d] = (mask >> d) & 1 ? inner[d].hi : inner[d].lo;
            probe(x);
        }
    }
    out.ok = out.worst_margin >= -allowance;
    return out;
}

Vector find_equilibrium(const VectorMap& F, const Box& domain, std::span<const double> guess) {
    const std::size_t s = guess.size();
    if (domain.dim() != s) throw InvalidParameter("find_equilibrium: dimension mismatch");
    if (!domain.contains_open(guess)) throw InvalidParameter("find_equilibrium: guess must lie in the domain");
    constexpr double kTol = 1e-12;
    constexpr int kMaxIter = 200;

    auto residual = [&](const Vector& z) {
        Vector r = F(z);
        if (r.size() != s) throw InvalidParameter("find_equilibrium: map returned wrong dimension");
        for (std::size_t i = 0; i < s; ++i) r[i] -= z[i];
        return r;
    };

    auto newton = [&](Vector z, const Box& region) -> std::optional<Vector> {
        Vector r = residual(z);
        for (int it = 0; it < kMaxIter; ++it) {
            if (!all_finite(r)) return std::nullopt;
            const double rn = sup_norm(r);
            if (rn <= kTol) return z;
            Matrix J(s, s);
            for (std::size_t j = 0; j < s; ++j) {
                const double h = 1e-7 * std::max(1.0, std::abs(z[j]));
                Vector zp = z;
                Vector zm = z;
                zp[j] += h;
                zm[j] -= h;
                if (!region.contains_open(zp)) zp[j] = z[j];
                if (!region.contains_open(zm)) zm[j] = z[j];
                const Vector fp = F(zp);
                const Vector fm = F(zm);
                const double dh = zp[j] - zm[j];
                for (std::size_t i = 0; i < s; ++i) {
                    J(i, j) = (fp[i] - fm[i]) / dh - (i == j ? 1.0 : 0.0);
                }
            }
            Eigen::FullPivLU<Matrix> lu(J);
            if (!lu.isInvertible()) return std::nullopt;
            Eigen::VectorXd rhs(s);
            for (std::size_t i = 0; i < s; ++i) rhs[i] = -r[i];
            const Eigen::VectorXd delta = lu.solve(rhs);
            bool accepted = false;
            for (double lambda = 1.0; lambda > 1e-8; lambda *= 0.5) {
                Vector zn(s);
                for (std::size_t i = 0; i < s; ++i) zn[i] = z[i] + lambda * delta[i];
                if (!region.contains_open(zn)) continue;
                Vector rnew = residual(zn);
                if (all_finite(rnew) && sup_norm(rnew) < rn) {
                    z = std::move(zn);
                    r = std::move(rnew);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) return std::nullopt;
        }
        return sup_norm(r) <= kTol ? std::optional<Vector>(z) : std::nullopt;
    };

    Vector start(guess.begin(), guess.end());
    if (auto z = newton(start, domain)) return *z;

    // Fixed-point iteration converges whenever F contracts a weighted norm.
    Vector z = start;
    for (int it = 0; it < kMaxIter; ++it) {
        Vector next = F(z);
        if (!all_finite(next) || !domain.contains_open(next)) break;
        z = std::move(next);
    }
    if (auto polished = newton(z, domain)) return *polished;
    const Vector r = residual(z);
    if (all_finite(r) && sup_norm(r) <= kTol) return z;

    // Distinguish "no root" from "the root is outside D" with an
    // unconstrained search (F may well be undefined out there).
    std::optional<Vector> outside;
    try {
        outside = newton(start, Box::unbounded(s));
    } catch (const Error&) {
        outside.reset();
    }
    if (outside) {
        for (std::size_t i = 0; i < s; ++i) {
            if (!domain[i].contains_open((*outside)[i])) {
                throw DomainExit("equilibrium " + format_point(*outside) + " lies outside the domain", i,
                                 std::numeric_limits<double>::quiet_NaN());
            }
        }
    }
    throw NotFound("no equilibrium found within " + std::to_string(kMaxIter) +
                   " iterations from " + format_point(guess));
}

bool column_sum_test(const Matrix& L) {
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
        if (!(L.col(j).sum() < 1.0)) return false;
    }
    return true;
}

Certificate certify_m_matrix(const Nonlinearity& f, const LipschitzData& lip,
                             const CertifyOptions& opts) {
    const std::size_t s = f.dim();
    const Matrix& L = lip.L;
    if (static_cast<std::size_t>(L.rows()) != s || static_cast<std::size_t>(L.cols()) != s ||
        lip.equilibrium.size() != s || lip.domain.dim() != s) {
        throw InvalidParameter("Lipschitz data does not match the system dimension");
    }
    if ((L.array() < 0.0).any()) throw InvalidParameter("Lipschitz matrix has a negative entry");
    if (!lip.domain.contains_open(lip.equilibrium)) {
        throw InvalidParameter("equilibrium " + format_point(lip.equilibrium) + " is not inside the domain");
    }
    const Vector& z = lip.equilibrium;
    const Vector Fz = f(z);
    double defect = 0.0;
    for (std::size_t i = 0; i < s; ++i) defect = std::max(defect, std::abs(Fz[i] - z[i]));
    if (!(defect <= 1e-10)) {
        std::ostringstream os;
        os << "F(z*) differs from z* by " << defect;
        throw InvalidParameter(os.str());
    }

    Certificate cert;
    cert.method = Method::MMatrix;
    cert.equilibrium = z;
    cert.lipschitz = L;
    cert.comparison_flower = column_sum_test(L);
    {
        std::ostringstream os;
        os << "fixed point check: |F(z*) - z*| = " << defect;
        cert.log.push_back(os.str());
    }

    const MMatrixResult m = is_m_matrix(Matrix::Identity(s, s) - L);
    {
        std::ostringstream os;
        os << "rho(L) = " << m.spectral_radius << " (power iteration), inverse positivity route "
           << (m.inverse ? "evaluated" : "skipped");
        cert.log.push_back(os.str());
    }
    if (m.borderline) {
        cert.verdict = Verdict::Inconclusive;
        cert.log.push_back("I - L is borderline: " + m.note);
        return cert;
    }
    if (!m.is_m_matrix) {
        cert.verdict = Verdict::NotCertified;
        cert.log.push_back("I - L is not an M-matrix: " + m.note);
        return cert;
    }

    cert.xi = m.xi;
    const double alpha = contraction_rate(L, m.xi);
    cert.alpha = alpha;

    const double cmax = max_admissible_c(z, m.xi, lip.domain);
    double c = 1.0;
    if (std::isfinite(cmax)) {
        c = 0.9 * cmax;
        cert.log.push_back("I_1 sized at 0.9 of the largest box inside the domain");
    } else if (opts.history_anchor && opts.history_anchor->size() == s) {
        double anchor = 0.0;
        for (std::size_t i = 0; i < s; ++i) anchor = std::max(anchor, (*opts.history_anchor)[i] / m.xi[i]);
        if (anchor > 0.0) c = anchor;
        cert.log.push_back("I_1 anchored to the history's distance from z*");
    } else {
        cert.log.push_back("domain imposes no bound; I_1 uses c = 1");
    }
    cert.c = c;

    // Coordinate-wise difference quotients about z* must respect L.
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst_excess = -kInf;
    for (std::size_t j = 0; j < s; ++j) {
        for (int k = 0; k < 64; ++k) {
            const double d = unit(rng) * c * m.xi[j];
            if (d == 0.0) continue;
            Vector p = z;
            p[j] += d;
            const Vector Fp = f(p);
            for (std::size_t i = 0; i < s; ++i) {
                const double q = std::abs(Fp[i] - Fz[i]) / std::abs(d);
                worst_excess = std::max(worst_excess, q - L(i, j));
                if (q > L(i, j) + 1e-6) {
                    std::ostringstream os;
                    os << "Lipschitz bound L(" << i + 1 << "," << j + 1 << ") = " << L(i, j)
                       << " violated: difference quotient " << q << " at " << format_point(p);
                    throw InvalidParameter(os.str());
                }
            }
        }
    }
    {
        std::ostringstream os;
        os << "difference quotients about z* within L (worst excess " << worst_excess << ")";
        cert.log.push_back(os.str());
    }

    const int depth = std::max(1, opts.depth);
    for (int n = 1; n <= depth + 1; ++n) cert.boxes.push_back(box_sequence(z, c, m.xi, alpha, n, lip.domain));

    const VectorMap F = [&f](std::span<const double> x) { return f(x); };
    SamplingEvidence ev{opts.seed, opts.samples, kInf, true};
    for (int n = 0; n < depth; ++n) {
        const BoxCheck chk = verify_box_mapping(F, cert.boxes[n], cert.boxes[n + 1], opts.samples,
                                                opts.seed + static_cast<std::uint64_t>(n + 1));
        ev.worst_margin = std::min(ev.worst_margin, chk.worst_margin);
        if (!chk.ok) {
            ev.passed = false;
            cert.log.push_back("sampling found F(I_" + std::to_string(n + 1) + ") outside I_" +
                               std::to_string(n + 2) + " at " + format_point(chk.worst_point));
        }
    }
    cert.sampling = ev;
    cert.log.push_back("F(I_n) in I_{n+1} checked by sampling for n = 1.." + std::to_string(depth) +
                       " (evidence, not proof)");
    cert.log.push_back(
        "uniqueness of z* is implied on I_1 only; uniqueness on the rest of the domain is not verified");
    for (const auto& note : lip.notes) cert.log.push_back(note);

    cert.verdict = ev.passed ? Verdict::Certified : Verdict::NotCertified;
    if (!ev.passed) cert.log.push_back("sampling contradicts the Lipschitz data; certificate withheld");
    return cert;
}

Certificate certify_m_matrix(const DelaySystem& system, const LipschitzData& lip,
                             const CertifyOptions& opts) {
    return certify_m_matrix(system.nonlinearity(), lip, opts);
}

}  // namespace attracta
