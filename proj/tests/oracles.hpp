#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

// Householder reduction to upper Hessenberg form followed by single-shift
// complex QR with Wilkinson shifts and bottom deflation. Meant for n <= 16.
inline std::vector<cplx> qr_eigenvalues(const Eigen::MatrixXd& a)
{
    const int n = static_cast<int>(a.rows());
    CMatrix h = a.cast<cplx>();
    for (int k = 0; k + 2 < n; ++k) {
        Eigen::VectorXcd x = h.block(k + 1, k, n - k - 1, 1);
        const double alpha = x.norm();
        if (alpha == 0.0) continue;
        const cplx phase = std::abs(x(0)) == 0.0 ? cplx(1.0) : x(0) / std::abs(x(0));
        Eigen::VectorXcd v = x;
        v(0) += phase * alpha;
        v.normalize();
        h.block(k + 1, 0, n - k - 1, n) -= 2.0 * v * (v.adjoint() * h.block(k + 1, 0, n - k - 1, n));
        h.block(0, k + 1, n, n - k - 1) -= 2.0 * (h.block(0, k + 1, n, n - k - 1) * v) * v.adjoint();
    }
    std::vector<cplx> out;
    int m = n;
    int iter = 0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (m > 0) {
        if (m == 1) {
            out.push_back(h(0, 0));
            m = 0;
            break;
        }
        const double scale = std::abs(h(m - 1, m - 1)) + std::abs(h(m - 2, m - 2));
        if (std::abs(h(m - 1, m - 2)) <= 1e-15 * (scale == 0.0 ? 1.0 : scale)) {
            out.push_back(h(m - 1, m - 1));
            --m;
            iter = 0;
            continue;
        }
        // Wilkinson shift from the trailing 2x2 block.
        const cplx p = h(m - 2, m - 2), q = h(m - 2, m - 1), r = h(m - 1, m - 2), s = h(m - 1, m - 1);
        const cplx tr = p + s, det = p * s - q * r;
        const cplx disc = std::sqrt(tr * tr / 4.0 - det);
        const cplx l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
        cplx mu = std::abs(l1 - s) < std::abs(l2 - s) ? l1 : l2;
        if (++iter % 20 == 0) mu += cplx(u(rng), u(rng)) * std::abs(h(m - 1, m - 2));
        for (int i = 0; i < m; ++i) h(i, i) -= mu;
        std::vector<std::pair<cplx, cplx>> rot(static_cast<std::size_t>(m - 1));
        for (int k = 0; k + 1 < m; ++k) {
            const cplx x = h(k, k), y = h(k + 1, k);
            const double nrm = std::hypot(std::abs(x), std::abs(y));
            const cplx c = nrm == 0.0 ? cplx(1.0) : x / nrm, sn = nrm == 0.0 ? cplx(0.0) : y / nrm;
            rot[static_cast<std::size_t>(k)] = {c, sn};
            for (int j = k; j < m; ++j) {
                const cplx hk = h(k, j), hk1 = h(k + 1, j);
                h(k, j) = std::conj(c) * hk + std::conj(sn) * hk1;
                h(k + 1, j) = -sn * hk + c * hk1;
            }
        }
        for (int k = 0; k + 1 < m; ++k) {
            const auto [c, sn] = rot[static_cast<std::size_t>(k)];
            for (int i = 0; i <= std::min(k + 1, m - 1); ++i) {
                const cplx hk = h(i, k), hk1 = h(i, k + 1);
                h(i, k) = hk * c + hk1 * sn;
                h(i, k + 1) = -hk * std::conj(sn) + hk1 * std::conj(c);
            }
        }
        for (int i = 0; i < m; ++i) h(i, i) += mu;
        if (iter > 10000) break;
    }
    return out;
}

inline double max_real_part(const std::vector<cplx>& ev)
{
    double m = -1e300;
    for (const auto& z : ev) m = std::max(m, z.real());
    return m;
}

// Greedy cover of [a, b] by closed intervals of radius < eps (static metric):
// the smallest count for intervals of length 2 eps.
inline int interval_cover(double a, double b, double eps)
{
    int count = 0;
    double covered = a;
    bool first = true;
    while (first || covered < b) {
        first = false;
        covered += 2.0 * eps;
        ++count;
    }
    return count;
}

// Maximal eps-separated subset of [a, b] in the static metric.
inline int interval_packing(double a, double b, double eps)
{
    return static_cast<int>(std::floor((b - a) / eps)) + 1;
}

inline double central_difference(const std::function<double(double)>& f, double x)
{
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::fabs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Convex hull (monotone chain) and point-in-hull test in the plane.
inline std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> p)
{
    std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
        h[k++] = p[i - 1];
    }
    h.resize(k - 1);
    return h;
}

inline bool in_hull(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& q, double tol)
{
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        const double c = (b.x() - a.x()) * (q.y() - a.y()) - (b.y() - a.y()) * (q.x() - a.x());
        if (c < -tol) return false;
    }
    return true;
}

}  // namespace oracle
