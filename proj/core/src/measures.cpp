#include "entrobound/measures.hpp"

#include "entrobound/error.hpp"
#include "entrobound/system.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace entrobound {

Norm parse_norm(std::string_view text)
{
    if (text == "1" || text == "one") return Norm::One;
    if (text == "2" || text == "two") return Norm::Two;
    if (text == "inf" || text == "infinity") return Norm::Inf;
    throw PreconditionError("unknown norm '" + std::string(text) + "'");
}

std::string_view norm_name(Norm p)
{
    switch (p) {
        case Norm::One: return "one";
        case Norm::Two: return "two";
        case Norm::Inf: return "inf";
    }
    return "?";
}

namespace {

void require_square(const Matrix& a, const char* what)
{
    if (a.rows() != a.cols()) throw PreconditionError(std::string(what) + " needs a square matrix");
}

Norm dual(Norm p)
{
    switch (p) {
        case Norm::One: return Norm::Inf;
        case Norm::Two: return Norm::Two;
        case Norm::Inf: return Norm::One;
    }
    return p;
}

double largest_singular_value(const Matrix& a)
{
    if (a.size() == 0) return 0.0;
    if (a.size() == 1) return std::fabs(a(0, 0));
    const Matrix gram = a.cols() <= a.rows() ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
    const double top = symmetric_eigenvalues(gram).maxCoeff();
    return std::sqrt(std::max(top, 0.0));
}

// max over sign vectors s of |A s|_out. The infinity ball is the hull of the
// sign vectors and |A v|_out is convex, so this is the exact mixed norm.
double max_over_signs(const Matrix& a, Norm out)
{
    const auto cols = a.cols();
    if (cols == 0) return 0.0;
    if (cols > 20) {
        // |(A s)_i| <= |row_i|_1 for every sign vector.
        const Vector rows = a.cwiseAbs().rowwise().sum();
        return vector_norm(rows, out);
    }
    // s and -s give the same value, so fix the sign of the last column.
    const std::uint32_t count = 1u << (cols - 1);
    Vector acc = a.col(cols - 1);
    for (Eigen::Index j = 0; j + 1 < cols; ++j) acc -= a.col(j);
    double best = vector_norm(acc, out);
    // Gray code walk: one column flips per step.
    std::uint32_t gray = 0;
    for (std::uint32_t k = 1; k < count; ++k) {
        const std::uint32_t next = k ^ (k >> 1);
        const std::uint32_t flipped = next ^ gray;
        const int j = std::countr_zero(flipped);
        if (next & flipped) acc += 2.0 * a.col(j);
        else acc -= 2.0 * a.col(j);
        gray = next;
        best = std::max(best, vector_norm(acc, out));
    }
    return best;
}

}  // namespace

double vector_norm(const Vector& v, Norm p)
{
    if (v.size() == 1) return std::fabs(v(0));
    switch (p) {
        case Norm::One: return v.cwiseAbs().sum();
        case Norm::Two: return v.norm();
        case Norm::Inf: return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    }
    return 0.0;
}

double induced_norm(const Matrix& a, Norm p)
{
    if (a.size() == 0) return 0.0;
    switch (p) {
        case Norm::One: return a.cwiseAbs().colwise().sum().maxCoeff();
        case Norm::Inf: return a.cwiseAbs().rowwise().sum().maxCoeff();
        case Norm::Two: return largest_singular_value(a);
    }
    return 0.0;
}

double mixed_norm(const Matrix& a, Norm out, Norm in)
{
    if (a.size() == 0) return 0.0;
    if (out == in) return induced_norm(a, out);
    // Unit 1-ball: extreme points are +-e_j.
    if (in == Norm::One) {
        double best = 0.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, vector_norm(a.col(j), out));
        return best;
    }
    // |A v|_inf = max_i |a_i . v| and max over the unit in-ball is the dual norm.
    if (out == Norm::Inf) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            best = std::max(best, vector_norm(a.row(i).transpose(), dual(in)));
        return best;
    }
    if (in == Norm::Inf) return max_over_signs(a, out);
    // in = 2, out = 1: |A|_{2->1} = |A^T|_{inf->2}.
    return max_over_signs(a.transpose(), Norm::Two);
}

double matrix_measure(const Matrix& a, Norm p)
{
    require_square(a, "matrix_measure");
    const auto n = a.rows();
    if (n == 0) return 0.0;
    if (n == 1) return a(0, 0);
    switch (p) {
        case Norm::Inf: {
            double best = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                double s = a(i, i);
                for (Eigen::Index j = 0; j < n; ++j)
                    if (j != i) s += std::fabs(a(i, j));
                best = std::max(best, s);
            }
            return best;
        }
        case Norm::One: {
            double best = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                double s = a(j, j);
                for (Eigen::Index i = 0; i < n; ++i)
                    if (i != j) s += std::fabs(a(i, j));
                best = std::max(best, s);
            }
            return best;
        }
        case Norm::Two: {
            const Matrix sym = 0.5 * (a + a.transpose());
            return symmetric_eigenvalues(sym).maxCoeff();
        }
    }
    return 0.0;
}

bool measure_sandwich_check(const Matrix& a, Norm p, double slack)
{
    require_square(a, "measure_sandwich_check");
    const double upper = matrix_measure(a, p);
    const double lower = -matrix_measure(-a, p);
    const double norm = induced_norm(a, p);
    if (upper > norm + slack) return false;
    for (const auto& lambda : eigenvalues(a)) {
        if (lambda.real() > upper + slack) return false;
        if (lambda.real() < lower - slack) return false;
    }
    return true;
}

bool is_metzler(const Matrix& a)
{
    require_square(a, "is_metzler");
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && !(a(i, j) >= 0.0)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Spectral abscissa of a Metzler matrix

namespace {

// Strongly connected components of the graph i -> j when m(i, j) > 0.
std::vector<std::vector<int>> components(const Matrix& m)
{
    const int n = static_cast<int>(m.rows());
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> out;
    int counter = 0;

    // Iterative Tarjan to keep the stack depth independent of n.
    struct Frame {
        int v;
        int next;
    };
    for (int root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] >= 0) continue;
        std::vector<Frame> frames{{root, 0}};
        index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
        stack.push_back(root);
        on_stack[static_cast<std::size_t>(root)] = 1;
        while (!frames.empty()) {
            auto& f = frames.back();
            const auto v = static_cast<std::size_t>(f.v);
            if (f.next < n) {
                const int w = f.next++;
                const auto wi = static_cast<std::size_t>(w);
                if (w == f.v || !(m(f.v, w) > 0.0)) continue;
                if (index[wi] < 0) {
                    index[wi] = low[wi] = counter++;
                    stack.push_back(w);
                    on_stack[wi] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[wi]) {
                    low[v] = std::min(low[v], index[wi]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<int> comp;
                int w = -1;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = 0;
                    comp.push_back(w);
                } while (w != f.v);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
            const int finished = f.v;
            frames.pop_back();
            if (!frames.empty()) {
                const auto parent = static_cast<std::size_t>(frames.back().v);
                low[parent] = std::min(low[parent], low[static_cast<std::size_t>(finished)]);
            }
        }
    }
    return out;
}

// Perron root of an irreducible Metzler matrix by Noda iteration: the
// Collatz-Wielandt quotients (Mx)_i/x_i bracket the root for any x > 0.
double perron_root_irreducible(const Matrix& m)
{
    const auto n = m.rows();
    if (n == 1) return m(0, 0);
    Vector x = Vector::Ones(n);
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        const Vector mx = m * x;
        const Vector ratio = mx.cwiseQuotient(x);
        upper = std::min(upper, ratio.maxCoeff());
        lower = std::max(lower, ratio.minCoeff());
        const double scale = std::max({1.0, std::fabs(upper), std::fabs(lower)});
        if (upper - lower <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
        const double sigma = ratio.maxCoeff();
        const Matrix shifted = sigma * Matrix::Identity(n, n) - m;
        Vector y = shifted.partialPivLu().solve(x);
        if (!y.allFinite() || (y.array() <= 0.0).any()) {
            // sigma sits on the root to working precision; fall back to
            // shifted power steps to polish the positive vector.
            const double c = 1.0 + m.diagonal().cwiseAbs().maxCoeff();
            const Matrix b = m + c * Matrix::Identity(n, n);
            for (int k = 0; k < 2000; ++k) {
                x = b * x;
                x /= x.maxCoeff();
                const Vector r = (m * x).cwiseQuotient(x);
                upper = std::min(upper, r.maxCoeff());
                lower = std::max(lower, r.minCoeff());
                if (upper - lower <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
            }
            break;
        }
        x = y / y.maxCoeff();
    }
    return 0.5 * (upper + lower);
}

}  // namespace

double spectral_abscissa_metzler(const Matrix& m)
{
    require_square(m, "spectral_abscissa_metzler");
    if (!is_metzler(m)) throw PreconditionError("spectral_abscissa_metzler: matrix is not Metzler");
    if (m.rows() == 0) throw PreconditionError("spectral_abscissa_metzler: empty matrix");
    // A permutation makes m block triangular with irreducible diagonal
    // blocks; the spectrum is the union of the blocks' spectra.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& comp : components(m)) {
        const auto k = static_cast<Eigen::Index>(comp.size());
        Matrix sub(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                sub(i, j) = m(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
        best = std::max(best, perron_root_irreducible(sub));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Matrix exponential

Matrix matrix_exponential(const Matrix& a)
{
    require_square(a, "matrix_exponential");
    const auto n = a.rows();
    if (n == 0) return a;
    if (!a.allFinite()) throw DomainError("matrix_exponential: non-finite entry");
    if (a.isZero(0.0)) return Matrix::Identity(n, n);
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = induced_norm(a, Norm::One);
    int squarings = 0;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Matrix s = a / std::ldexp(1.0, squarings);

    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = s * s;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    const Matrix u = s * u_inner;
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

// ---------------------------------------------------------------------------
// Eigenvalues

Vector symmetric_eigenvalues(const Matrix& s_in)
{
    require_square(s_in, "symmetric_eigenvalues");
    const auto n = s_in.rows();
    Matrix s = s_in;
    if (n <= 1) return n == 1 ? Vector::Constant(1, s(0, 0)) : Vector();
    const double scale = s.norm();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
        if (std::sqrt(off) <= 1e-15 * scale || off == 0.0) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (apq == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::hypot(theta, 1.0));
                const double c = 1.0 / std::hypot(t, 1.0);
                const double sn = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double skp = s(k, p);
                    const double skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double spk = s(p, k);
                    const double sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    Vector d = s.diagonal();
    std::sort(d.data(), d.data() + d.size());
    return d;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a)
{
    require_square(a, "eigenvalues");
    if (a.rows() == 0) return {};
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success) throw DomainError("eigenvalue iteration did not converge");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// ---------------------------------------------------------------------------
// Block quantities

Matrix interconnection_matrix(const Matrix& j, const Partition& partition)
{
    const int m = partition.blocks();
    if (j.rows() != partition.dimension() || j.cols() != partition.dimension())
        throw PreconditionError("interconnection_matrix: Jacobian does not match the partition");
    Matrix out(m, m);
    for (int bi = 0; bi < m; ++bi) {
        for (int bj = 0; bj < m; ++bj) {
            const auto block = j.block(partition.offset(bi), partition.offset(bj), partition.size(bi), partition.size(bj));
            out(bi, bj) = bi == bj ? matrix_measure(block, partition.local(bi))
                                   : mixed_norm(block, partition.local(bi), partition.local(bj));
        }
    }
    return out;
}

double global_norm(const Vector& v, const Partition& partition)
{
    if (v.size() != partition.dimension()) throw PreconditionError("global_norm: size mismatch");
    Vector mags(partition.blocks());
    for (int b = 0; b < partition.blocks(); ++b)
        mags(b) = vector_norm(v.segment(partition.offset(b), partition.size(b)), partition.local(b));
    return vector_norm(mags, partition.network());
}

double global_measure(const Matrix& a, const Partition& partition)
{
    if (partition.network() != Norm::Inf)
        throw PreconditionError("global_measure: only the inf/inf composition is implemented");
    for (auto p : partition.local_norms())
        if (p != Norm::Inf) throw PreconditionError("global_measure: only the inf/inf composition is implemented");
    return matrix_measure(a, Norm::Inf);
}

}  // namespace entrobound
