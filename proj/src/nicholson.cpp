#include <cmath>
#include <numbers>
#include <sstream>

#include "attracta/certifier.hpp"
#include "attracta/errors.hpp"

namespace attracta {

namespace {

constexpr double kE = std::numbers::e;
const double kE2 = std::exp(2.0);

void check_beta(double beta) {
    if (!(beta > 1.0 && beta < kE2)) {
        std::ostringstream os;
        os << "beta = " << beta << " outside (1, e^2)";
        throw OutOfScope(os.str());
    }
}

double off_diagonal_sum(const Matrix& a, Eigen::Index i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (j != i) sum += a(i, j);
    }
    return sum;
}

}  // namespace

void NicholsonParams::validate() const {
    const auto s = static_cast<Eigen::Index>(dim());
    if (s == 0) throw InvalidParameter("Nicholson system needs at least one equation");
    if (a.rows() != s || a.cols() != s) throw InvalidParameter("coupling matrix must be s x s");
    if (!rates.empty() && rates.size() != dim()) throw InvalidParameter("need one rate per equation");
    if (!self_delay.empty() && self_delay.size() != dim()) {
        throw InvalidParameter("need one self-delay distribution per equation");
    }
    for (Eigen::Index i = 0; i < s; ++i) {
        if (!(beta[i] > 0.0)) throw InvalidParameter("beta must be positive");
        if (a(i, i) != 0.0) throw InvalidParameter("coupling matrix must have a zero diagonal");
        for (Eigen::Index j = 0; j < s; ++j) {
            if (!(a(i, j) >= 0.0)) throw InvalidParameter("coupling coefficients must be nonnegative");
        }
    }
}

double nicholson_alpha(double beta) {
    check_beta(beta);
    const double tail = beta / kE2;
    return beta <= kE ? std::max(1.0 - std::log(beta), tail) : tail;
}

double nicholson_lower_bound(double beta) {
    check_beta(beta);
    return beta < kE ? std::log(beta) : beta * beta / kE * std::exp(-beta / kE);
}

double nicholson_gamma(double beta, std::span<const double> a_row) {
    double sum = 0.0;
    for (double v : a_row) sum += v;
    if (!(sum < 1.0)) {
        std::ostringstream os;
        os << "gamma undefined: coupling row sum " << sum << " is not below 1";
        throw InvalidParameter(os.str());
    }
    return beta / (1.0 - sum);
}

VectorMap nicholson_map(const NicholsonParams& params) {
    return [a = params.a, beta = params.beta](std::span<const double> x) {
        const std::size_t s = beta.size();
        Vector y(s);
        for (std::size_t i = 0; i < s; ++i) {
            double v = beta[i] * x[i] * std::exp(-x[i]);
            for (std::size_t j = 0; j < s; ++j) {
                if (j != i) v += a(i, j) * x[j];
            }
            y[i] = v;
        }
        return y;
    };
}

Certificate certify_nicholson(const NicholsonParams& params, const CertifyOptions& opts) {
    params.validate();
    const std::size_t s = params.dim();
    for (std::size_t i = 0; i < s; ++i) {
        const std::string eq = "equation " + std::to_string(i + 1) + ": ";
        try {
            check_beta(params.beta[i]);
        } catch (const OutOfScope& e) {
            throw OutOfScope(eq + e.what());
        }
        if (!(off_diagonal_sum(params.a, i) < 1.0)) {
            throw OutOfScope(eq + "coupling row sum is not below 1");
        }
    }

    Certificate cert;
    cert.method = Method::Nicholson;
    NicholsonWitness w;
    Matrix L = params.a;
    for (std::size_t i = 0; i < s; ++i) {
        Vector row(s);
        for (std::size_t j = 0; j < s; ++j) row[j] = j == i ? 0.0 : params.a(i, j);
        w.beta.push_back(params.beta[i]);
        w.gamma.push_back(nicholson_gamma(params.beta[i], row));
        w.alpha_i.push_back(nicholson_alpha(params.beta[i]));
        w.x_lower.push_back(nicholson_lower_bound(params.beta[i]));
        L(i, i) = w.alpha_i[i];
    }
    cert.lipschitz = L;

    bool gamma_ok = true;
    bool faria_ok = true;
    for (std::size_t i = 0; i < s; ++i) {
        gamma_ok = gamma_ok && w.gamma[i] > 1.0;
        faria_ok = faria_ok && w.gamma[i] > 1.0 && w.gamma[i] < kE2;
    }
    cert.log.push_back(gamma_ok ? "gamma_i > 1 for all i: a positive equilibrium exists"
                                : "some gamma_i <= 1: existence of a positive equilibrium not guaranteed");

    const VectorMap F = nicholson_map(params);
    Vector guess(s);
    for (std::size_t i = 0; i < s; ++i) guess[i] = std::log(std::max(w.gamma[i], 1.0 + 1e-3));
    cert.equilibrium = find_equilibrium(F, Box::positive_orthant(s), guess);

    if (s == 2) {
        const double lhs = params.a(0, 1) * params.a(1, 0);
        const double rhs = (1.0 - w.alpha_i[0]) * (1.0 - w.alpha_i[1]);
        cert.corollary5 = Comparison{lhs, rhs, lhs < rhs};
        // 1 < gamma_i < e^2 rewritten per row as 1 - a_ij < beta_i and a_ij < 1 - beta_i e^{-2}.
        std::size_t row = 0;
        for (std::size_t i = 0; i < 2; ++i) {
            if (!(w.gamma[i] > 1.0 && w.gamma[i] < kE2)) {
                row = i;
                break;
            }
        }
        const double coupling = params.a(row, 1 - row);
        cert.comparison_abs_nichol2 =
            Comparison{coupling, 1.0 - params.beta[row] / kE2, faria_ok};
    }
    cert.log.push_back(std::string("comparison criterion 1 < gamma_i < e^2: ") +
                       (faria_ok ? "holds" : "fails"));

    const MMatrixResult m = is_m_matrix(Matrix::Identity(s, s) - L);
    {
        std::ostringstream os;
        os << "rho(L) = " << m.spectral_radius;
        cert.log.push_back(os.str());
    }
    if (m.borderline) {
        cert.verdict = Verdict::Inconclusive;
        cert.log.push_back("I - L is borderline: " + m.note);
        cert.nicholson = w;
        return cert;
    }
    if (!m.is_m_matrix) {
        cert.verdict = Verdict::NotCertified;
        cert.log.push_back("I - L is not an M-matrix");
        cert.nicholson = w;
        return cert;
    }
    cert.verdict = Verdict::Certified;
    cert.xi = m.xi;
    const double alpha = contraction_rate(L, m.xi);
    cert.alpha = alpha;

    // The diagonal bounds hold once solutions exceed x_i^0, so boxes live there.
    std::vector<Interval> axes(s);
    for (std::size_t i = 0; i < s; ++i) axes[i] = {w.x_lower[i], kInf};
    const Box restricted(axes);
    if (restricted.contains_open(cert.equilibrium)) {
        const double c = 0.9 * max_admissible_c(cert.equilibrium, m.xi, restricted);
        cert.c = c;
        const int depth = std::max(1, opts.depth);
        for (int n = 1; n <= depth + 1; ++n) {
            cert.boxes.push_back(box_sequence(cert.equilibrium, c, m.xi, alpha, n, restricted));
        }
        SamplingEvidence ev{opts.seed, opts.samples, kInf, true};
        for (int n = 0; n < depth; ++n) {
            const BoxCheck chk = verify_box_mapping(F, cert.boxes[n], cert.boxes[n + 1], opts.samples,
                                                    opts.seed + static_cast<std::uint64_t>(n + 1));
            ev.worst_margin = std::min(ev.worst_margin, chk.worst_margin);
            ev.passed = ev.passed && chk.ok;
        }
        cert.sampling = ev;
        cert.log.push_back(std::string("boxes on the region x_i > x_i^0; sampling evidence ") +
                           (ev.passed ? "consistent" : "INCONSISTENT"));
    } else {
        cert.log.push_back("equilibrium not above the eventual lower bounds; boxes omitted");
    }
    cert.log.push_back("attractivity holds for non-negative non-trivial histories, any admissible delays");
    cert.nicholson = w;
    return cert;
}

}  // namespace attracta
