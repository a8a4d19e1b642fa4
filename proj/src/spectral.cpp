#include "cafl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cafl/errors.hpp"

namespace cafl {

std::string to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::applicable: return "applicable";
        case BoundStatus::inapplicable: return "inapplicable";
        case BoundStatus::degenerate_fallback: return "degenerate-fallback";
        case BoundStatus::exact_fallback: return "exact-fallback";
    }
    return "unknown";
}

namespace {

double off_diagonal_norm(const Mat& b) {
    double s = 0.0;
    for (int i = 0; i < b.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            if (i != j) s += b(i, j) * b(i, j);
        }
    }
    return std::sqrt(s);
}

}  // namespace

std::vector<double> sym_eigenvalues(Mat b) {
    const int n = b.rows();
    if (b.cols() != n) throw InvariantViolation("sym_eigenvalues: square input required");
    if (n == 1) return {b(0, 0)};

    constexpr double kTol = 1e-12;
    constexpr int kMaxSweeps = 50;
    double off = off_diagonal_norm(b);
    for (int sweep = 0; sweep < kMaxSweeps && off > kTol; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double bpq = b(p, q);
                if (bpq == 0.0) continue;
                // Classical symmetric Jacobi rotation annihilating (p, q).
                const double theta = (b(q, q) - b(p, p)) / (2.0 * bpq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);  // avoids theta^2 overflow
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) /
                        (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double bpp = b(p, p), bqq = b(q, q);
                b(p, p) = bpp - t * bpq;
                b(q, q) = bqq + t * bpq;
                b(p, q) = 0.0;
                b(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double bip = b(i, p), biq = b(i, q);
                    b(i, p) = c * bip - s * biq;
                    b(p, i) = b(i, p);
                    b(i, q) = s * bip + c * biq;
                    b(q, i) = b(i, q);
                }
            }
        }
        off = off_diagonal_norm(b);
    }
    if (off > kTol) {
        std::ostringstream msg;
        msg << "Jacobi did not converge in " << kMaxSweeps
            << " sweeps; off-diagonal residual " << off;
        throw NumericalError(msg.str());
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = b(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

SingularPair top_two_singular_values(const Mat& a) {
    if (a.rows() != a.cols()) {
        throw InvariantViolation("top_two_singular_values: square input required");
    }
    if (a.rows() < 2) {
        throw InvariantViolation("top_two_singular_values: size >= 2 required");
    }
    const auto eig = sym_eigenvalues(gram(a));
    // Gram eigenvalues are squared singular values; clamp fp negatives.
    return {std::sqrt(std::max(eig[0], 0.0)), std::sqrt(std::max(eig[1], 0.0))};
}

BoundValue bound_balanced_form(const DegreeSummary& ds) {
    if (!(ds.alpha > 0.5) || !ds.degree_balanced) {
        return {0.0, BoundStatus::inapplicable};
    }
    const double inv_a = 1.0 / ds.alpha;
    const double value = 1.0 + ds.eps + (inv_a - 1.0) * (inv_a - 1.0) +
                         2.0 * ds.eps * (1.0 + 2.0 * inv_a - inv_a * inv_a);
    return {value, BoundStatus::applicable};
}

BoundValue bound_general_form(const DegreeSummary& ds) {
    if (!(ds.alpha >= 0.5)) return {0.0, BoundStatus::inapplicable};
    const double base = 2.0 + 2.0 * ds.varphi;
    const double am1 = ds.alpha_minus;
    const double last = ds.eps_net - am1 + 1.0 / (ds.alpha * ds.n_l);
    if (std::abs(last) <= 1e-9) return {base, BoundStatus::degenerate_fallback};
    const double w = (1.0 - ds.eps) * (1.0 - ds.eps) * (1.0 - am1 * am1);
    const double correction = w * (w - am1) / (ds.n_l * (ds.eps_net + 1.0) * last);
    if (correction < 0.0) return {base, BoundStatus::degenerate_fallback};
    return {base - correction, BoundStatus::applicable};
}

double connectivity_term(double sigma1, double sigma2) {
    if (!(sigma1 >= sigma2) || !(sigma2 >= 0.0)) {
        throw InvariantViolation("connectivity_term: need sigma1 >= sigma2 >= 0");
    }
    return sigma1 * sigma1 + sigma2 * sigma2 - 1.0;
}

SpectralReport analyze_cluster(const ClusterDigraph& g) {
    SpectralReport r;
    r.cluster_id = g.cluster_id;
    r.round = g.round;
    r.degrees = degree_summary(g);
    const auto sv = top_two_singular_values(equal_neighbor_matrix(g));
    r.sigma1 = sv.sigma1;
    r.sigma2 = sv.sigma2;
    // Column-stochastic matrices have 1^T A = 1^T, so sigma1 >= 1.
    if (r.sigma1 < 1.0 - 1e-9) {
        throw NumericalError("mixing-matrix sigma1 < 1; eigensolve inconsistent");
    }
    r.phi_term = connectivity_term(r.sigma1, r.sigma2);
    r.bound_balanced = bound_balanced_form(r.degrees);
    r.bound_general = bound_general_form(r.degrees);
    r.is_strongly_connected = strongly_connected(g);
    return r;
}

double cluster_bound_term(const SpectralReport& report, const BoundPolicy& policy,
                          BoundStatus* used) {
    const auto usable = [](const BoundValue& b) {
        return b.status == BoundStatus::applicable ||
               b.status == BoundStatus::degenerate_fallback;
    };
    const BoundValue* pick = nullptr;
    switch (policy.form) {
        case BoundForm::balanced:
            if (usable(report.bound_balanced)) pick = &report.bound_balanced;
            else if (usable(report.bound_general)) pick = &report.bound_general;
            break;
        case BoundForm::general:
            if (usable(report.bound_general)) pick = &report.bound_general;
            else if (usable(report.bound_balanced)) pick = &report.bound_balanced;
            break;
        case BoundForm::best:
            if (usable(report.bound_balanced) && usable(report.bound_general)) {
                pick = report.bound_balanced.value <= report.bound_general.value
                           ? &report.bound_balanced
                           : &report.bound_general;
            } else if (usable(report.bound_balanced)) {
                pick = &report.bound_balanced;
            } else if (usable(report.bound_general)) {
                pick = &report.bound_general;
            }
            break;
    }
    double term;
    if (pick != nullptr) {
        if (used != nullptr) *used = pick->status;
        term = pick->value;
    } else {
        // No formula applies; exact singular values stand in for the bound.
        if (used != nullptr) *used = BoundStatus::exact_fallback;
        term = report.sigma1 * report.sigma1 + report.sigma2 * report.sigma2;
    }
    return policy.tighten_by_one ? term - 1.0 : term;
}

namespace {

int total_clients(const std::vector<SpectralReport>& reports) {
    int n = 0;
    for (const auto& r : reports) n += r.degrees.n_l;
    return n;
}

}  // namespace

double connectivity_factor(int m, const std::vector<SpectralReport>& reports,
                           bool use_exact, const BoundPolicy& policy) {
    if (reports.empty()) throw InvariantViolation("connectivity_factor: no reports");
    const int n = total_clients(reports);
    if (m < 1 || m > n) throw InvariantViolation("connectivity_factor: need 1 <= m <= n");
    double s = 0.0;
    for (const auto& r : reports) {
        const double term = use_exact ? connectivity_term(r.sigma1, r.sigma2)
                                      : cluster_bound_term(r, policy);
        s += static_cast<double>(r.degrees.n_l) / n * term;
    }
    return (static_cast<double>(n) / m - 1.0) * s;
}

int select_sample_size_from_terms(int n, const std::vector<std::pair<int, double>>& terms,
                                  double phi_max) {
    if (n < 1) throw InvariantViolation("select_sample_size: n must be >= 1");
    if (!(phi_max >= 0.0)) throw InvariantViolation("select_sample_size: phi_max must be >= 0");
    double s = 0.0;
    for (const auto& [n_l, term] : terms) {
        s += static_cast<double>(n_l) / n * term;
    }
    if (!(s > 0.0)) return 1;  // factor is <= 0 for every m
    const auto factor = [&](int m) { return (static_cast<double>(n) / m - 1.0) * s; };
    // Closed form, then a local scan absorbs fp boundary effects.
    double raw = static_cast<double>(n) * s / (phi_max + s);
    int m = static_cast<int>(std::ceil(raw));
    m = std::clamp(m, 1, n);
    while (m > 1 && factor(m - 1) <= phi_max) --m;
    while (m < n && factor(m) > phi_max) ++m;
    return m;
}

int select_sample_size(const std::vector<SpectralReport>& reports, double phi_max,
                       const BoundPolicy& policy) {
    if (reports.empty()) throw InvariantViolation("select_sample_size: no reports");
    std::vector<std::pair<int, double>> terms;
    terms.reserve(reports.size());
    for (const auto& r : reports) {
        terms.emplace_back(r.degrees.n_l, cluster_bound_term(r, policy));
    }
    return select_sample_size_from_terms(total_clients(reports), terms, phi_max);
}

}  // namespace cafl
