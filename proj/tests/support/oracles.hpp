#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace pcstage::oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

struct TTest {
    double t;
    double p;
    double df;
};

// Textbook two-sample t in 50-digit arithmetic with Boost's Student t tail.
inline TTest t_test(std::span<const double> a, std::span<const double> b, bool welch) {
    auto moments = [](std::span<const double> v) {
        Big mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<int>(v.size());
        Big ss = 0;
        for (double x : v) ss += (Big(x) - mean) * (Big(x) - mean);
        return std::pair{mean, ss / static_cast<int>(v.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const Big na = static_cast<int>(a.size());
    const Big nb = static_cast<int>(b.size());
    Big t;
    Big df;
    if (welch) {
        const Big qa = va / na;
        const Big qb = vb / nb;
        t = (ma - mb) / sqrt(qa + qb);
        df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
    } else {
        df = na + nb - 2;
        const Big sp2 = ((na - 1) * va + (nb - 1) * vb) / df;
        t = (ma - mb) / sqrt(sp2 * (1 / na + 1 / nb));
    }
    boost::math::students_t_distribution<Big> dist(df);
    const Big p = 2 * boost::math::cdf(boost::math::complement(dist, abs(t)));
    return {static_cast<double>(t), static_cast<double>(p), static_cast<double>(df)};
}

// Cyclic Jacobi rotations; eigenvalues descending with matching columns.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
    const auto n = a.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
    Eigen::VectorXd values(n);
    Eigen::MatrixXd vectors(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return {values, vectors};
}

// Sample covariance (n - 1 denominator) by explicit double loop.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    const auto p = x.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) mean(j) += x(i, j) / static_cast<double>(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index k = 0; k < p; ++k) c(j, k) += (x(i, j) - mean(j)) * (x(i, k) - mean(k));
    return c / static_cast<double>(n - 1);
}

// max sum(a) - 0.5 a'Qa  s.t. 0 <= a <= C, y'a = 0, by accelerated projected
// gradient. The projection bisects on the multiplier of the equality.
inline std::pair<Eigen::VectorXd, double> svm_dual(const Eigen::MatrixXd& q, const Eigen::VectorXd& y, double c,
                                                   int iterations = 50000) {
    const auto n = q.rows();
    auto project = [&](const Eigen::VectorXd& v) {
        auto clip = [&](double lambda) {
            Eigen::VectorXd a(n);
            for (Eigen::Index i = 0; i < n; ++i) a(i) = std::clamp(v(i) - lambda * y(i), 0.0, c);
            return a;
        };
        double lo = -1e6;
        double hi = 1e6;
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (lo + hi);
            // y'a is non-increasing in lambda
            if (y.dot(clip(mid)) > 0.0) lo = mid;
            else hi = mid;
        }
        return clip(0.5 * (lo + hi));
    };
    auto objective = [&](const Eigen::VectorXd& a) { return a.sum() - 0.5 * a.dot(q * a); };
    const double lipschitz = std::max(1e-12, q.diagonal().sum());
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = a;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - q * z;
        const Eigen::VectorXd next = project(z + grad / lipschitz);
        if (objective(next) < objective(a)) {
            // momentum overshot: restart from the last iterate
            z = a;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / t_next) * (next - a);
        a = next;
        t = t_next;
    }
    return {a, objective(a)};
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

} // namespace pcstage::oracle
