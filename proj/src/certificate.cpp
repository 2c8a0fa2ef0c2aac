#include "attracta/certificate.hpp"

namespace attracta {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Certified:
            return "certified";
        case Verdict::NotCertified:
            return "not_certified";
        case Verdict::Inconclusive:
            return "inconclusive";
    }
    return "inconclusive";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::MMatrix:
            return "mmatrix";
        case Method::Planar:
            return "planar";
        case Method::Nicholson:
            return "nicholson";
    }
    return "mmatrix";
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json comparison_json(const Comparison& c) {
    return {{"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
}

}  // namespace

nlohmann::json to_json(const Certificate& cert) {
    nlohmann::json j;
    j["verdict"] = to_string(cert.verdict);
    j["method"] = to_string(cert.method);
    j["equilibrium"] = cert.equilibrium;
    if (!cert.xi.empty()) j["xi"] = cert.xi;
    if (cert.alpha) j["alpha"] = *cert.alpha;
    if (cert.c) j["c"] = *cert.c;
    if (cert.lipschitz) j["L"] = matrix_json(*cert.lipschitz);
    if (!cert.boxes.empty()) {
        auto boxes = nlohmann::json::array();
        for (std::size_t n = 0; n < cert.boxes.size() && n < 8; ++n) {
            auto box = nlohmann::json::array();
            for (const auto& a : cert.boxes[n].axes()) box.push_back({a.lo, a.hi});
            boxes.push_back(std::move(box));
        }
        j["boxes"] = std::move(boxes);
    }
    if (cert.planar) {
        const auto& p = *cert.planar;
        j["planar"] = {{"x_star", p.x_star}, {"y_star", p.y_star}, {"a1", p.a1},
                       {"a2", p.a2},         {"b1", p.b1},         {"b2", p.b2}};
    }
    if (cert.nicholson) {
        const auto& n = *cert.nicholson;
        j["beta"] = n.beta;
        j["gamma"] = n.gamma;
        j["alpha_i"] = n.alpha_i;
        j["x_lower"] = n.x_lower;
    }
    if (cert.corollary5) j["corollary5"] = comparison_json(*cert.corollary5);
    if (cert.comparison_flower) j["comparison_flower"] = *cert.comparison_flower ? "pass" : "fail";
    if (cert.comparison_abs_nichol2) {
        auto c = comparison_json(*cert.comparison_abs_nichol2);
        c["verdict"] = cert.comparison_abs_nichol2->pass ? "pass" : "fail";
        j["comparison_abs_nichol2"] = std::move(c);
    }
    if (cert.sampling) {
        const auto& s = *cert.sampling;
        j["sampling"] = {{"seed", s.seed},
                         {"samples", s.samples},
                         {"worst_margin", s.worst_margin},
                         {"passed", s.passed}};
    }
    j["log"] = cert.log;
    return j;
}

}  // namespace attracta
