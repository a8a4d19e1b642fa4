#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "cafl/linalg.hpp"
#include "cafl/rng.hpp"

namespace cafl {

/// Heterogeneity constants of a client population:
/// delta = beta * max_i ||x* - x_i*||, gamma = f(x*) - (1/n) sum_i min f_i.
struct HeterogeneityProfile {
    double delta = 0.0;
    double gamma = 0.0;
    Vec x_star;
    double spread = 0.0;  // dispersion knob used at construction
};

/// A family of n smooth strongly convex local objectives with known global
/// minimizer. Immutable after construction; gradient calls are pure.
class ObjectiveSuite {
public:
    virtual ~ObjectiveSuite() = default;

    int n_clients() const { return n_; }
    int dim() const { return p_; }
    double mu() const { return mu_; }
    double beta() const { return beta_; }
    double rho() const { return rho_; }  // total stochastic-gradient noise std
    const Vec& optimum() const { return profile_.x_star; }
    const HeterogeneityProfile& heterogeneity() const { return profile_; }

    virtual double local_loss(int client, const Vec& x) const = 0;
    virtual Vec gradient(int client, const Vec& x) const = 0;

    double global_loss(const Vec& x) const;
    Vec global_gradient(const Vec& x) const;

    /// gradient + zero-mean Gaussian noise with E||noise||^2 = rho^2
    /// (per-coordinate variance rho^2 / dim).
    Vec stochastic_gradient(int client, const Vec& x, RngStream& noise) const;

protected:
    int n_ = 0;
    int p_ = 0;
    double mu_ = 0.0;
    double beta_ = 0.0;
    double rho_ = 0.0;
    HeterogeneityProfile profile_;
};

/// f_i(x) = 1/2 (x - b_i)^T Q_i (x - b_i) with spectra inside [mu, beta];
/// minimum value 0 at b_i, so gamma = f(x*).
class QuadraticTask final : public ObjectiveSuite {
public:
    QuadraticTask(std::vector<Mat> q, std::vector<Vec> b, double mu, double beta,
                  double rho, double spread);

    double local_loss(int client, const Vec& x) const override;
    Vec gradient(int client, const Vec& x) const override;

    const Mat& curvature(int client) const { return q_[client]; }
    const Vec& local_optimum(int client) const { return b_[client]; }

    /// Self-describing text serialization (round-trips exactly).
    void save(std::ostream& out) const;
    static QuadraticTask load(std::istream& in, const std::string& source_name);

private:
    std::vector<Mat> q_;
    std::vector<Vec> b_;
};

/// Q_i = R_i diag(spectrum) R_i^T with seeded random rotations and uniform
/// spectra in [mu, beta]; b_i uniform in the radius-`spread` ball. x* solves
/// (sum Q_i) x = sum Q_i b_i exactly.
QuadraticTask build_quadratic_suite(int n, int p, double mu, double beta,
                                    double spread, double rho, std::uint64_t seed);

/// l2-regularized logistic regression on synthetic label-skewed data: each
/// client sees two classes only. mu = l2 exactly; beta from the per-client
/// feature Gram spectra; x* and per-client optima by deterministic
/// full-gradient descent to tolerance 1e-12.
class LogisticTask final : public ObjectiveSuite {
public:
    struct ClientData {
        Mat features;             // samples x dim
        std::vector<double> labels;  // +-1
    };

    LogisticTask(std::vector<ClientData> data, double l2, double rho);

    double local_loss(int client, const Vec& x) const override;
    Vec gradient(int client, const Vec& x) const override;

private:
    std::vector<ClientData> data_;
    double l2_;
};

LogisticTask build_logistic_suite(int n, int p, int samples_per_client, int classes,
                                  double l2, double rho, std::uint64_t seed);

/// Verifies ||grad_i(x) - grad(x)|| <= delta + 2 beta ||x - x*|| at each
/// point for each client.
struct DiversityReport {
    int points_checked = 0;
    int violations = 0;
    double min_slack = 0.0;  // min over (point, client) of rhs - lhs
    double max_slack = 0.0;
};

DiversityReport gradient_diversity_check(const ObjectiveSuite& task,
                                         const std::vector<Vec>& points);

}  // namespace cafl
