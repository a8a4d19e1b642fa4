#pragma once

#include <string>
#include <vector>

#include "cafl/linalg.hpp"
#include "cafl/topology.hpp"

namespace cafl {

/// How a degree-based variance bound was resolved for a cluster.
enum class BoundStatus {
    applicable,          // formula evaluated under its stated hypotheses
    inapplicable,        // hypotheses fail (alpha too small / not balanced)
    degenerate_fallback, // correction dropped (zero denominator or negative)
    exact_fallback,      // no formula applied; exact singular values used
};

std::string to_string(BoundStatus s);

struct BoundValue {
    double value = 0.0;  // meaningless when status == inapplicable
    BoundStatus status = BoundStatus::inapplicable;
};

/// Which degree-based form the sampling rule should prefer.
enum class BoundForm {
    balanced,  // dense, degree-balanced graphs (needs alpha > 1/2, in==out)
    general,   // irregular graphs (needs alpha >= 1/2)
    best,      // tightest applicable of the two
};

struct BoundPolicy {
    BoundForm form = BoundForm::best;
    bool tighten_by_one = false;  // subtract 1: bound the spectral excess
                                  // instead of the raw two-value square sum
};

/// Per-cluster spectral facts: exact top-two singular values of the mixing
/// matrix plus both degree-based bounds on sigma1^2 + sigma2^2.
struct SpectralReport {
    int cluster_id = 0;
    long round = 0;
    DegreeSummary degrees;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double phi_term = 0.0;  // sigma1^2 + sigma2^2 - 1
    BoundValue bound_balanced;
    BoundValue bound_general;
    bool is_strongly_connected = false;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending. Converged when the off-diagonal Frobenius norm is <= 1e-12;
/// throws NumericalError with the residual after the sweep budget.
std::vector<double> sym_eigenvalues(Mat b);

struct SingularPair {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

/// Two largest singular values via Jacobi on A^T A; requires size >= 2.
SingularPair top_two_singular_values(const Mat& a);

/// Bound for dense degree-balanced clusters:
/// 1 + eps + (1/alpha - 1)^2 + 2 eps (1 + 2/alpha - 1/alpha^2).
/// Inapplicable unless alpha > 1/2 and the graph is degree-balanced.
BoundValue bound_balanced_form(const DegreeSummary& ds);

/// Bound for irregular clusters:
/// 2 + 2 varphi - correction; the correction is dropped (status degenerate)
/// when its denominator's last factor is within 1e-9 of zero or when the
/// correction is negative, which only loosens the bound.
/// Inapplicable unless alpha >= 1/2.
BoundValue bound_general_form(const DegreeSummary& ds);

/// sigma1^2 + sigma2^2 - 1 (the exact per-cluster factor in the sampling
/// variance).
double connectivity_term(double sigma1, double sigma2);

SpectralReport analyze_cluster(const ClusterDigraph& g);

/// The bound value a policy picks for one cluster, with fallback chain:
/// preferred form, then the other form, then exact sigma1^2 + sigma2^2
/// (status reported). tighten_by_one subtracts 1 from the returned term.
double cluster_bound_term(const SpectralReport& report, const BoundPolicy& policy,
                          BoundStatus* used = nullptr);

/// (n/m - 1) * sum_l (n_l/n) * term_l, with term_l the exact connectivity
/// term (use_exact) or the policy's bound.
double connectivity_factor(int m, const std::vector<SpectralReport>& reports,
                           bool use_exact, const BoundPolicy& policy);

/// Smallest m in [1, n] whose bound-based factor is <= phi_max: closed form
/// ceil(n S / (phi_max + S)) verified by local scan. S <= 0 gives m = 1.
int select_sample_size(const std::vector<SpectralReport>& reports, double phi_max,
                       const BoundPolicy& policy);

/// Same rule from raw (n_l, term_l) pairs; used by tests and the factor-only
/// paths.
int select_sample_size_from_terms(int n, const std::vector<std::pair<int, double>>& terms,
                                  double phi_max);

}  // namespace cafl
