#include "cafl/objectives.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cafl/errors.hpp"
#include "cafl/spectral.hpp"

namespace cafl {

double ObjectiveSuite::global_loss(const Vec& x) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += local_loss(i, x);
    return s / n_;
}

Vec ObjectiveSuite::global_gradient(const Vec& x) const {
    Vec g(p_, 0.0);
    for (int i = 0; i < n_; ++i) axpy(1.0, gradient(i, x), g);
    for (double& v : g) v /= n_;
    return g;
}

Vec ObjectiveSuite::stochastic_gradient(int client, const Vec& x, RngStream& noise) const {
    Vec g = gradient(client, x);
    const double scale = rho_ / std::sqrt(static_cast<double>(p_));
    for (double& v : g) v += scale * noise.next_gaussian();
    return g;
}

QuadraticTask::QuadraticTask(std::vector<Mat> q, std::vector<Vec> b, double mu,
                             double beta, double rho, double spread)
    : q_(std::move(q)), b_(std::move(b)) {
    if (q_.empty() || q_.size() != b_.size()) {
        throw InvariantViolation("quadratic task: need one (Q, b) pair per client");
    }
    if (!(mu > 0.0) || !(beta >= mu) || !(rho >= 0.0)) {
        throw InvariantViolation("quadratic task: need 0 < mu <= beta, rho >= 0");
    }
    n_ = static_cast<int>(q_.size());
    p_ = static_cast<int>(b_[0].size());
    mu_ = mu;
    beta_ = beta;
    rho_ = rho;
    for (int i = 0; i < n_; ++i) {
        if (q_[i].rows() != p_ || q_[i].cols() != p_ ||
            static_cast<int>(b_[i].size()) != p_) {
            throw InvariantViolation("quadratic task: inconsistent dimensions");
        }
    }
    // x* solves (sum Q_i) x = sum Q_i b_i; SPD because mu > 0.
    Mat qsum(p_, p_);
    Vec rhs(p_, 0.0);
    for (int i = 0; i < n_; ++i) {
        for (int r = 0; r < p_; ++r) {
            for (int col = 0; col < p_; ++col) qsum(r, col) += q_[i](r, col);
        }
        axpy(1.0, matvec(q_[i], b_[i]), rhs);
    }
    profile_.x_star = cholesky_solve(qsum, rhs);
    profile_.spread = spread;
    double max_dist = 0.0;
    for (int i = 0; i < n_; ++i) {
        max_dist = std::max(max_dist,
                            std::sqrt(squared_distance(profile_.x_star, b_[i])));
    }
    profile_.delta = beta_ * max_dist;
    profile_.gamma = global_loss(profile_.x_star);  // every local minimum is 0
}

double QuadraticTask::local_loss(int client, const Vec& x) const {
    Vec d = x;
    axpy(-1.0, b_[client], d);
    return 0.5 * dot(d, matvec(q_[client], d));
}

Vec QuadraticTask::gradient(int client, const Vec& x) const {
    Vec d = x;
    axpy(-1.0, b_[client], d);
    return matvec(q_[client], d);
}

namespace {

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void QuadraticTask::save(std::ostream& out) const {
    out << "quadratic_suite_v1\n";
    out << "n " << n_ << " dim " << p_ << "\n";
    out << "mu ";
    put(out, mu_);
    out << " beta ";
    put(out, beta_);
    out << " rho ";
    put(out, rho_);
    out << " spread ";
    put(out, profile_.spread);
    out << "\n";
    for (int i = 0; i < n_; ++i) {
        out << "client " << i << "\n";
        for (int r = 0; r < p_; ++r) {
            for (int c = 0; c < p_; ++c) {
                if (c) out << " ";
                put(out, q_[i](r, c));
            }
            out << "\n";
        }
        for (int c = 0; c < p_; ++c) {
            if (c) out << " ";
            put(out, b_[i][c]);
        }
        out << "\n";
    }
}

QuadraticTask QuadraticTask::load(std::istream& in, const std::string& source_name) {
    std::string line;
    int line_no = 0;
    const auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) {
            throw ConfigError(source_name, line_no + 1, "unexpected end of file");
        }
        ++line_no;
        return line;
    };
    if (next_line() != "quadratic_suite_v1") {
        throw ConfigError(source_name, line_no, "expected header `quadratic_suite_v1`");
    }
    int n = 0, p = 0;
    {
        std::istringstream row(next_line());
        std::string wn, wd;
        if (!(row >> wn >> n >> wd >> p) || wn != "n" || wd != "dim" || n < 1 || p < 1) {
            throw ConfigError(source_name, line_no, "expected `n <count> dim <dim>`");
        }
    }
    double mu = 0.0, beta = 0.0, rho = 0.0, spread = 0.0;
    {
        std::istringstream row(next_line());
        std::string wm, wb, wr, ws;
        if (!(row >> wm >> mu >> wb >> beta >> wr >> rho >> ws >> spread) ||
            wm != "mu" || wb != "beta" || wr != "rho" || ws != "spread") {
            throw ConfigError(source_name, line_no,
                              "expected `mu <v> beta <v> rho <v> spread <v>`");
        }
    }
    std::vector<Mat> q(n, Mat(p, p));
    std::vector<Vec> b(n, Vec(p, 0.0));
    for (int i = 0; i < n; ++i) {
        {
            std::istringstream row(next_line());
            std::string wc;
            int idx = -1;
            if (!(row >> wc >> idx) || wc != "client" || idx != i) {
                throw ConfigError(source_name, line_no,
                                  "expected `client " + std::to_string(i) + "`");
            }
        }
        for (int r = 0; r < p; ++r) {
            std::istringstream row(next_line());
            for (int c = 0; c < p; ++c) {
                if (!(row >> q[i](r, c))) {
                    throw ConfigError(source_name, line_no, "short curvature row");
                }
            }
        }
        std::istringstream row(next_line());
        for (int c = 0; c < p; ++c) {
            if (!(row >> b[i][c])) {
                throw ConfigError(source_name, line_no, "short minimizer row");
            }
        }
    }
    try {
        return QuadraticTask(std::move(q), std::move(b), mu, beta, rho, spread);
    } catch (const InvariantViolation& e) {
        throw ConfigError(source_name, 0, e.what());
    }
}

QuadraticTask build_quadratic_suite(int n, int p, double mu, double beta,
                                    double spread, double rho, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvariantViolation("suite: need n >= 1, p >= 1");
    if (!(mu > 0.0) || !(beta >= mu)) throw InvariantViolation("suite: need 0 < mu <= beta");
    if (!(spread >= 0.0) || !(rho >= 0.0)) {
        throw InvariantViolation("suite: spread and rho must be >= 0");
    }
    std::vector<Mat> q;
    std::vector<Vec> b;
    q.reserve(n);
    b.reserve(n);
    for (int i = 0; i < n; ++i) {
        RngStream rs(seed, StreamKind::suite_build, static_cast<std::uint64_t>(i));
        Vec spectrum(p);
        for (int j = 0; j < p; ++j) spectrum[j] = mu + (beta - mu) * rs.next_unit();
        Mat gauss(p, p);
        for (int r = 0; r < p; ++r) {
            for (int c = 0; c < p; ++c) gauss(r, c) = rs.next_gaussian();
        }
        const Mat rot = qr_orthonormal(gauss);
        // Q_i = R diag(spectrum) R^T, symmetrized to kill rounding drift.
        Mat scaled = rot;
        for (int r = 0; r < p; ++r) {
            for (int c = 0; c < p; ++c) scaled(r, c) *= spectrum[c];
        }
        Mat qi(p, p);
        for (int r = 0; r < p; ++r) {
            for (int c = 0; c < p; ++c) {
                double s = 0.0;
                for (int k = 0; k < p; ++k) s += scaled(r, k) * rot(c, k);
                qi(r, c) = s;
            }
        }
        for (int r = 0; r < p; ++r) {
            for (int c = r + 1; c < p; ++c) {
                const double sym = 0.5 * (qi(r, c) + qi(c, r));
                qi(r, c) = sym;
                qi(c, r) = sym;
            }
        }
        q.push_back(std::move(qi));

        // Uniform in the radius-`spread` ball: direction / ||.|| * R U^(1/p).
        Vec dir(p);
        double dn = 0.0;
        do {
            for (int j = 0; j < p; ++j) dir[j] = rs.next_gaussian();
            dn = norm(dir);
        } while (dn == 0.0);
        const double radius =
            spread * std::pow(rs.next_unit(), 1.0 / static_cast<double>(p));
        for (int j = 0; j < p; ++j) dir[j] *= radius / dn;
        b.push_back(std::move(dir));
    }
    return QuadraticTask(std::move(q), std::move(b), mu, beta, rho, spread);
}

namespace {

// log(1 + exp(-z)) without overflow for large |z|.
double softplus_neg(double z) {
    if (z > 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

// d/dz log(1 + exp(-z)) = -1 / (1 + exp(z))
double logistic_neg(double z) { return -1.0 / (1.0 + std::exp(z)); }

Vec minimize_smooth(const std::function<Vec(const Vec&)>& grad, int p, double step) {
    Vec x(p, 0.0);
    for (int it = 0; it < 500000; ++it) {
        Vec g = grad(x);
        if (norm(g) <= 1e-12) return x;
        axpy(-step, g, x);
    }
    throw NumericalError("logistic optimum solver did not reach tolerance 1e-12");
}

}  // namespace

LogisticTask::LogisticTask(std::vector<ClientData> data, double l2, double rho)
    : data_(std::move(data)), l2_(l2) {
    if (data_.empty()) throw InvariantViolation("logistic task: no clients");
    if (!(l2 > 0.0) || !(rho >= 0.0)) {
        throw InvariantViolation("logistic task: need l2 > 0, rho >= 0");
    }
    n_ = static_cast<int>(data_.size());
    p_ = data_[0].features.cols();
    rho_ = rho;
    mu_ = l2;  // the logistic part is convex; l2 term is exactly mu-strong
    // beta = l2 + max_i lambda_max(G_i / (4 s_i)): the logistic Hessian is
    // bounded by 1/4 of the feature Gram.
    double worst = 0.0;
    for (const auto& cd : data_) {
        if (cd.features.cols() != p_ ||
            cd.features.rows() != static_cast<int>(cd.labels.size()) ||
            cd.features.rows() < 1) {
            throw InvariantViolation("logistic task: inconsistent client data");
        }
        const auto eig = sym_eigenvalues(gram(cd.features));
        worst = std::max(worst, eig[0] / (4.0 * cd.features.rows()));
    }
    beta_ = l2 + worst;

    const auto self_grad = [this](int client, const Vec& x) { return gradient(client, x); };
    profile_.x_star = minimize_smooth(
        [this](const Vec& x) { return global_gradient(x); }, p_, 1.0 / beta_);
    profile_.spread = 0.0;
    double max_dist = 0.0;
    double local_min_sum = 0.0;
    for (int i = 0; i < n_; ++i) {
        const Vec xi = minimize_smooth(
            [&, i](const Vec& x) { return self_grad(i, x); }, p_, 1.0 / beta_);
        max_dist = std::max(max_dist, std::sqrt(squared_distance(profile_.x_star, xi)));
        local_min_sum += local_loss(i, xi);
    }
    profile_.delta = beta_ * max_dist;
    profile_.gamma = global_loss(profile_.x_star) - local_min_sum / n_;
}

double LogisticTask::local_loss(int client, const Vec& x) const {
    const auto& cd = data_[client];
    const int s = cd.features.rows();
    double loss = 0.0;
    for (int r = 0; r < s; ++r) {
        double z = 0.0;
        for (int c = 0; c < p_; ++c) z += cd.features(r, c) * x[c];
        loss += softplus_neg(cd.labels[r] * z);
    }
    return loss / s + 0.5 * l2_ * dot(x, x);
}

Vec LogisticTask::gradient(int client, const Vec& x) const {
    const auto& cd = data_[client];
    const int s = cd.features.rows();
    Vec g(p_, 0.0);
    for (int r = 0; r < s; ++r) {
        double z = 0.0;
        for (int c = 0; c < p_; ++c) z += cd.features(r, c) * x[c];
        const double f = cd.labels[r] * logistic_neg(cd.labels[r] * z);
        for (int c = 0; c < p_; ++c) g[c] += f * cd.features(r, c);
    }
    for (int c = 0; c < p_; ++c) g[c] = g[c] / s + l2_ * x[c];
    return g;
}

LogisticTask build_logistic_suite(int n, int p, int samples_per_client, int classes,
                                  double l2, double rho, std::uint64_t seed) {
    if (n < 1 || p < 1 || samples_per_client < 2 || classes < 2) {
        throw InvariantViolation("logistic suite: bad shape parameters");
    }
    // Fixed class centers and a ground-truth separator, then two classes per
    // client (label-skew partition).
    std::vector<Vec> centers(classes, Vec(p, 0.0));
    for (int k = 0; k < classes; ++k) {
        RngStream rs(seed, StreamKind::suite_build, 1000000ULL + k);
        double cn = 0.0;
        do {
            for (int j = 0; j < p; ++j) centers[k][j] = rs.next_gaussian();
            cn = norm(centers[k]);
        } while (cn == 0.0);
        for (int j = 0; j < p; ++j) centers[k][j] *= 2.0 / cn;
    }
    RngStream ws(seed, StreamKind::suite_build, 2000000ULL);
    Vec w(p);
    double wn = 0.0;
    do {
        for (int j = 0; j < p; ++j) w[j] = ws.next_gaussian();
        wn = norm(w);
    } while (wn == 0.0);
    for (int j = 0; j < p; ++j) w[j] /= wn;

    std::vector<LogisticTask::ClientData> data(n);
    for (int i = 0; i < n; ++i) {
        RngStream rs(seed, StreamKind::suite_build, static_cast<std::uint64_t>(i));
        auto& cd = data[i];
        cd.features = Mat(samples_per_client, p);
        cd.labels.resize(samples_per_client);
        for (int r = 0; r < samples_per_client; ++r) {
            const int cls = (2 * i + (r % 2)) % classes;
            double z = 0.0;
            for (int c = 0; c < p; ++c) {
                const double u = centers[cls][c] + 0.5 * rs.next_gaussian();
                cd.features(r, c) = u;
                z += u * w[c];
            }
            cd.labels[r] = z >= 0.0 ? 1.0 : -1.0;
        }
    }
    return LogisticTask(std::move(data), l2, rho);
}

DiversityReport gradient_diversity_check(const ObjectiveSuite& task,
                                         const std::vector<Vec>& points) {
    DiversityReport rep;
    rep.min_slack = std::numeric_limits<double>::infinity();
    rep.max_slack = -std::numeric_limits<double>::infinity();
    const double delta = task.heterogeneity().delta;
    const Vec& x_star = task.optimum();
    for (const auto& x : points) {
        const Vec g = task.global_gradient(x);
        const double rhs =
            delta + 2.0 * task.beta() * std::sqrt(squared_distance(x, x_star));
        for (int i = 0; i < task.n_clients(); ++i) {
            Vec gi = task.gradient(i, x);
            axpy(-1.0, g, gi);
            const double slack = rhs - norm(gi);
            rep.min_slack = std::min(rep.min_slack, slack);
            rep.max_slack = std::max(rep.max_slack, slack);
            if (slack < -1e-9 * std::max(1.0, rhs)) ++rep.violations;
        }
        ++rep.points_checked;
    }
    return rep;
}

}  // namespace cafl
