#include "pefcert/vertex_enum.hpp"

#include <algorithm>
#include <boost/dynamic_bitset.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "pefcert/errors.hpp"

namespace pefcert {

double HPolytope::violation(const Eigen::VectorXd& v) const {
    double worst = 0.0;
    if (ineq.rows() > 0) worst = std::max(worst, (ineq * v - ineq_rhs).maxCoeff());
    if (eq.rows() > 0) worst = std::max(worst, (eq * v - eq_rhs).cwiseAbs().maxCoeff());
    return worst;
}

namespace {

using Rational = boost::multiprecision::mpq_rational;

// Scalar policy: exact rationals compare exactly, doubles against a tolerance
// applied to rays normalized to unit max-norm.
template <class S>
struct Arith;

template <>
struct Arith<double> {
    static constexpr double kTol = 1e-10;
    static int sign(double v) { return v > kTol ? 1 : (v < -kTol ? -1 : 0); }
    static double from_double(double v) { return v; }
    static double to_double(double v) { return v; }
    static double magnitude(double v) { return std::abs(v); }
};

template <>
struct Arith<Rational> {
    static int sign(const Rational& v) { return v.sign(); }
    static Rational from_double(double v) { return Rational(v); }
    static double to_double(const Rational& v) { return v.convert_to<double>(); }
    static double magnitude(const Rational& v) { return std::abs(v.convert_to<double>()); }
};

template <class S>
using Vec = std::vector<S>;
template <class S>
using Mat = std::vector<std::vector<S>>;

template <class S>
S dot(const Vec<S>& a, const Vec<S>& b) {
    S acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (Arith<S>::sign(a[i]) != 0 && Arith<S>::sign(b[i]) != 0) acc += a[i] * b[i];
    }
    return acc;
}

template <class S>
void normalize(Vec<S>& ray) {
    S scale = 0;
    for (const S& v : ray) {
        S a = v < 0 ? S(-v) : v;
        if (a > scale) scale = a;
    }
    if (Arith<S>::sign(scale) == 0) return;
    for (S& v : ray) v /= scale;
}

// Pivot column for elimination in column col over rows [from, rows).
template <class S>
int choose_pivot(const Mat<S>& m, std::size_t from, std::size_t col) {
    int best = -1;
    double best_mag = 0.0;
    for (std::size_t r = from; r < m.size(); ++r) {
        if (Arith<S>::sign(m[r][col]) == 0) continue;
        const double mag = Arith<S>::magnitude(m[r][col]);
        if (best < 0 || mag > best_mag) {
            best = static_cast<int>(r);
            best_mag = mag;
        }
    }
    return best;
}

template <class S>
std::vector<Eigen::VectorXd> enumerate_impl(const HPolytope& poly) {
    using A = Arith<S>;
    const std::size_t n = static_cast<std::size_t>(poly.dimension());
    const std::size_t n_eq = static_cast<std::size_t>(poly.eq.rows());
    const std::size_t n_ub = static_cast<std::size_t>(poly.ineq.rows());

    // --- eliminate equalities: RREF of [eq | rhs]
    Mat<S> aug(n_eq, Vec<S>(n + 1, S(0)));
    for (std::size_t r = 0; r < n_eq; ++r) {
        for (std::size_t c = 0; c < n; ++c) aug[r][c] = A::from_double(poly.eq(Eigen::Index(r), Eigen::Index(c)));
        aug[r][n] = A::from_double(poly.eq_rhs(Eigen::Index(r)));
    }
    std::vector<std::size_t> pivot_cols;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n && rank < n_eq; ++c) {
        const int p = choose_pivot(aug, rank, c);
        if (p < 0) continue;
        std::swap(aug[rank], aug[static_cast<std::size_t>(p)]);
        const S piv = aug[rank][c];
        for (S& v : aug[rank]) v /= piv;
        for (std::size_t r = 0; r < n_eq; ++r) {
            if (r == rank || A::sign(aug[r][c]) == 0) continue;
            const S f = aug[r][c];
            for (std::size_t k = 0; k <= n; ++k) aug[r][k] -= f * aug[rank][k];
        }
        pivot_cols.push_back(c);
        ++rank;
    }
    for (std::size_t r = rank; r < n_eq; ++r) {
        if (A::sign(aug[r][n]) != 0) throw ValidationError("enumerate_vertices: equality system is infeasible");
    }
    std::vector<bool> is_pivot(n, false);
    for (std::size_t c : pivot_cols) is_pivot[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < n; ++c) {
        if (!is_pivot[c]) free_cols.push_back(c);
    }
    const std::size_t d = free_cols.size();

    // z = z0 + N u
    Vec<S> z0(n, S(0));
    Mat<S> basis(n, Vec<S>(d, S(0)));
    for (std::size_t r = 0; r < rank; ++r) z0[pivot_cols[r]] = aug[r][n];
    for (std::size_t k = 0; k < d; ++k) {
        basis[free_cols[k]][k] = 1;
        for (std::size_t r = 0; r < rank; ++r) basis[pivot_cols[r]][k] = -aug[r][free_cols[k]];
    }

    // --- reduced inequalities G u <= h
    Mat<S> g_rows;
    Vec<S> h_vals;
    for (std::size_t i = 0; i < n_ub; ++i) {
        Vec<S> row(n);
        for (std::size_t c = 0; c < n; ++c) row[c] = A::from_double(poly.ineq(Eigen::Index(i), Eigen::Index(c)));
        Vec<S> gi(d, S(0));
        for (std::size_t k = 0; k < d; ++k) {
            Vec<S> col(n);
            for (std::size_t c = 0; c < n; ++c) col[c] = basis[c][k];
            gi[k] = dot(row, col);
        }
        S hi = A::from_double(poly.ineq_rhs(Eigen::Index(i))) - dot(row, z0);
        bool zero_row = std::all_of(gi.begin(), gi.end(), [](const S& v) { return A::sign(v) == 0; });
        if (zero_row) {
            if (A::sign(hi) < 0) throw ValidationError("enumerate_vertices: polytope is empty");
            continue;
        }
        g_rows.push_back(std::move(gi));
        h_vals.push_back(std::move(hi));
    }

    auto lift = [&](const Vec<S>& u) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (std::size_t c = 0; c < n; ++c) {
            S v = z0[c];
            for (std::size_t k = 0; k < d; ++k) {
                if (A::sign(basis[c][k]) != 0) v += basis[c][k] * u[k];
            }
            z(Eigen::Index(c)) = A::to_double(v);
        }
        return z;
    };

    if (d == 0) {
        for (const S& h : h_vals) {
            if (A::sign(h) < 0) throw ValidationError("enumerate_vertices: polytope is empty");
        }
        return {lift({})};
    }

    // --- homogenized cone rows: (h_i, -G_i) . (t, u) >= 0 plus t >= 0
    const std::size_t dim = d + 1;
    Mat<S> rows;
    {
        Vec<S> t_row(dim, S(0));
        t_row[0] = 1;
        rows.push_back(std::move(t_row));
    }
    for (std::size_t i = 0; i < g_rows.size(); ++i) {
        Vec<S> r(dim);
        r[0] = h_vals[i];
        for (std::size_t k = 0; k < d; ++k) r[k + 1] = -g_rows[i][k];
        rows.push_back(std::move(r));
    }
    const std::size_t m = rows.size();

    // pick dim independent rows greedily
    std::vector<std::size_t> initial;
    {
        Mat<S> work;
        for (std::size_t i = 0; i < m && initial.size() < dim; ++i) {
            Vec<S> r = rows[i];
            for (std::size_t j = 0; j < work.size(); ++j) {
                // work rows are in echelon form with a leading one at lead[j]
                std::size_t lead = 0;
                while (A::sign(work[j][lead]) == 0) ++lead;
                if (A::sign(r[lead]) == 0) continue;
                const S f = r[lead];
                for (std::size_t k = 0; k < dim; ++k) r[k] -= f * work[j][k];
            }
            std::size_t lead = 0;
            while (lead < dim && A::sign(r[lead]) == 0) ++lead;
            if (lead == dim) continue;
            const S piv = r[lead];
            for (S& v : r) v /= piv;
            // keep work reduced so later leads are eliminated correctly
            for (auto& w : work) {
                if (A::sign(w[lead]) == 0) continue;
                const S f = w[lead];
                for (std::size_t k = 0; k < dim; ++k) w[k] -= f * r[k];
            }
            work.push_back(std::move(r));
            initial.push_back(i);
        }
    }
    if (initial.size() < dim) throw ValidationError("enumerate_vertices: polytope is unbounded");

    // extreme rays of {w : B w >= 0} are the columns of B^-1
    Mat<S> inv(dim, Vec<S>(dim, S(0)));
    {
        Mat<S> b(dim, Vec<S>(2 * dim, S(0)));
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) b[r][c] = rows[initial[r]][c];
            b[r][dim + r] = 1;
        }
        for (std::size_t c = 0; c < dim; ++c) {
            const int p = choose_pivot(b, c, c);
            if (p < 0) throw NumericalError("enumerate_vertices: singular initial basis");
            std::swap(b[c], b[static_cast<std::size_t>(p)]);
            const S piv = b[c][c];
            for (S& v : b[c]) v /= piv;
            for (std::size_t r = 0; r < dim; ++r) {
                if (r == c || A::sign(b[r][c]) == 0) continue;
                const S f = b[r][c];
                for (std::size_t k = 0; k < 2 * dim; ++k) b[r][k] -= f * b[c][k];
            }
        }
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) inv[r][c] = b[r][dim + c];
        }
    }

    struct Ray {
        Vec<S> w;
        boost::dynamic_bitset<> zeros;
    };
    std::vector<Ray> rays;
    std::vector<bool> processed(m, false);
    for (std::size_t j = 0; j < dim; ++j) {
        Ray ray{Vec<S>(dim), boost::dynamic_bitset<>(m)};
        for (std::size_t r = 0; r < dim; ++r) ray.w[r] = inv[r][j];
        normalize(ray.w);
        for (std::size_t r = 0; r < dim; ++r) {
            if (r != j) ray.zeros.set(initial[r]);
        }
        rays.push_back(std::move(ray));
    }
    for (std::size_t i : initial) processed[i] = true;

    for (std::size_t i = 0; i < m; ++i) {
        if (processed[i]) continue;
        std::vector<S> vals(rays.size());
        std::vector<int> signs(rays.size());
        for (std::size_t k = 0; k < rays.size(); ++k) {
            vals[k] = dot(rows[i], rays[k].w);
            signs[k] = A::sign(vals[k]);
        }
        std::vector<Ray> next;
        for (std::size_t k = 0; k < rays.size(); ++k) {
            if (signs[k] >= 0) {
                Ray r = rays[k];
                if (signs[k] == 0) r.zeros.set(i);
                next.push_back(std::move(r));
            }
        }
        for (std::size_t p = 0; p < rays.size(); ++p) {
            if (signs[p] <= 0) continue;
            for (std::size_t q = 0; q < rays.size(); ++q) {
                if (signs[q] >= 0) continue;
                const boost::dynamic_bitset<> common = rays[p].zeros & rays[q].zeros;
                if (common.count() + 2 < dim) continue;
                bool adjacent = true;
                for (std::size_t o = 0; o < rays.size() && adjacent; ++o) {
                    if (o == p || o == q) continue;
                    if (common.is_subset_of(rays[o].zeros)) adjacent = false;
                }
                if (!adjacent) continue;
                Ray r{Vec<S>(dim), common};
                for (std::size_t k = 0; k < dim; ++k) r.w[k] = vals[p] * rays[q].w[k] - vals[q] * rays[p].w[k];
                normalize(r.w);
                r.zeros.set(i);
                next.push_back(std::move(r));
            }
        }
        rays = std::move(next);
        processed[i] = true;
    }

    std::vector<Eigen::VectorXd> out;
    bool recession = false;
    for (const Ray& ray : rays) {
        const int ts = A::sign(ray.w[0]);
        if (ts == 0) {
            recession = true;
            continue;
        }
        Vec<S> u(d);
        for (std::size_t k = 0; k < d; ++k) u[k] = ray.w[k + 1] / ray.w[0];
        out.push_back(lift(u));
    }
    if (out.empty()) throw ValidationError("enumerate_vertices: polytope is empty");
    if (recession) throw ValidationError("enumerate_vertices: polytope is unbounded");
    return out;
}

}  // namespace

std::vector<Eigen::VectorXd> enumerate_vertices(const HPolytope& poly, const EnumerationOptions& opts) {
    if (poly.ineq.rows() != poly.ineq_rhs.size() || poly.eq.rows() != poly.eq_rhs.size() ||
        (poly.ineq.rows() > 0 && poly.eq.rows() > 0 && poly.ineq.cols() != poly.eq.cols())) {
        throw ValidationError("enumerate_vertices: inconsistent constraint dimensions");
    }
    std::vector<Eigen::VectorXd> raw =
        opts.exact ? enumerate_impl<Rational>(poly) : enumerate_impl<double>(poly);

    std::vector<Eigen::VectorXd> unique;
    for (const Eigen::VectorXd& v : raw) {
        const double viol = poly.violation(v);
        if (viol > opts.constraint_tol) {
            throw NumericalError("enumerate_vertices: vertex violates constraints by " + std::to_string(viol));
        }
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const Eigen::VectorXd& u) {
            return (u - v).cwiseAbs().maxCoeff() <= opts.dedup_tol;
        });
        if (!dup) unique.push_back(v);
    }
    return unique;
}

}  // namespace pefcert
