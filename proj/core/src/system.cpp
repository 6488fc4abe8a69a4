#include "entrobound/system.hpp"

#include "entrobound/error.hpp"

#include <algorithm>
#include <cmath>

namespace entrobound {

// ---------------------------------------------------------------------------
// BoxSet

BoxSet::BoxSet(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.empty()) throw PreconditionError("box: empty dimension");
    if (lower_.size() != upper_.size()) throw PreconditionError("box: lower and upper differ in length");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
            throw PreconditionError("box: non-finite corner");
        if (!(lower_[i] < upper_[i]))
            throw PreconditionError("box: empty interior on axis " + std::to_string(i + 1));
    }
}

std::vector<double> BoxSet::center() const
{
    std::vector<double> c(lower_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lower_[i] + upper_[i]);
    return c;
}

double BoxSet::width(int axis) const
{
    const auto i = static_cast<std::size_t>(axis);
    return upper_.at(i) - lower_.at(i);
}

double BoxSet::volume() const
{
    double v = 1.0;
    for (int i = 0; i < dimension(); ++i) v *= width(i);
    return v;
}

bool BoxSet::contains(std::span<const double> x) const
{
    if (x.size() != lower_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
    return true;
}

std::vector<double> BoxSet::corner(unsigned k) const
{
    std::vector<double> c(lower_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (k >> i) & 1u ? upper_[i] : lower_[i];
    return c;
}

std::pair<BoxSet, BoxSet> BoxSet::split(int axis) const
{
    if (axis < 0 || axis >= dimension()) throw PreconditionError("box split: axis out of range");
    const auto i = static_cast<std::size_t>(axis);
    const double mid = 0.5 * (lower_[i] + upper_[i]);
    auto lo_upper = upper_;
    lo_upper[i] = mid;
    auto hi_lower = lower_;
    hi_lower[i] = mid;
    return {BoxSet(lower_, lo_upper), BoxSet(hi_lower, upper_)};
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<int> sizes, std::vector<Norm> local, Norm network)
    : sizes_(std::move(sizes)), local_(std::move(local)), network_(network)
{
    if (sizes_.empty()) throw PreconditionError("partition: no blocks");
    if (local_.size() == 1 && sizes_.size() > 1) local_.assign(sizes_.size(), local_.front());
    if (local_.size() != sizes_.size()) throw PreconditionError("partition: one local norm per block expected");
    offsets_.assign(1, 0);
    for (int s : sizes_) {
        if (s < 1) throw PreconditionError("partition: block sizes must be positive");
        offsets_.push_back(offsets_.back() + s);
    }
    // 1, 2 and inf norms are all monotone on the nonnegative orthant, which
    // the network comparison arguments need.
}

Partition Partition::single(int n, Norm p)
{
    return Partition({n}, {p}, p);
}

Partition Partition::scalar(int n, Norm network)
{
    return Partition(std::vector<int>(static_cast<std::size_t>(n), 1),
                     std::vector<Norm>(static_cast<std::size_t>(n), Norm::Inf), network);
}

// ---------------------------------------------------------------------------
// System

const Expr& System::jacobian_entry(int i, int j) const
{
    const int n = dimension();
    if (i < 0 || j < 0 || i >= n || j >= n) throw PreconditionError("jacobian entry out of range");
    return jac_[static_cast<std::size_t>(i * n + j)];
}

void System::eval_field(double t, std::span<const double> x, std::span<double> out) const
{
    for (std::size_t i = 0; i < f_.size(); ++i) out[i] = evaluate(f_[i], t, x);
}

void System::eval_jacobian(double t, std::span<const double> x, Matrix& out) const
{
    const int n = dimension();
    out.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = evaluate(jac_[static_cast<std::size_t>(i * n + j)], t, x);
}

System System::with_initial(BoxSet k, double t0) const
{
    if (k.dimension() != dimension()) throw PreconditionError("initial set dimension mismatch");
    System s = *this;
    s.k_ = std::move(k);
    s.t0_ = t0;
    return s;
}

System System::with_partition(Partition p) const
{
    if (p.dimension() != dimension()) throw PreconditionError("partition does not sum to n");
    System s = *this;
    s.partition_ = std::move(p);
    return s;
}

System build_system(const std::vector<std::string>& field_texts, std::vector<double> breakpoints,
                    std::optional<Partition> partition, BoxSet k, double t0)
{
    const int n = static_cast<int>(field_texts.size());
    if (n == 0) throw PreconditionError("system: no components");
    if (k.dimension() != n)
        throw PreconditionError("system: initial set has dimension " + std::to_string(k.dimension()) +
                                " but n = " + std::to_string(n));
    if (!std::isfinite(t0)) throw PreconditionError("system: non-finite t0");
    System s;
    s.f_.reserve(field_texts.size());
    for (const auto& text : field_texts) s.f_.push_back(parse_expression(text, n));
    s.jac_.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.jac_.push_back(differentiate(s.f_[static_cast<std::size_t>(i)], j + 1));
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    s.breakpoints_ = std::move(breakpoints);
    s.partition_ = partition ? std::move(*partition) : Partition::single(n);
    if (s.partition_.dimension() != n)
        throw PreconditionError("system: partition sizes sum to " + std::to_string(s.partition_.dimension()) +
                                " but n = " + std::to_string(n));
    s.k_ = std::move(k);
    s.t0_ = t0;
    return s;
}

Matrix jacobian(const System& sys, double t, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != sys.dimension()) throw PreconditionError("jacobian: state size mismatch");
    Matrix j;
    sys.eval_jacobian(t, x, j);
    return j;
}

Matrix jacobian_block(const System& sys, int i, int j, double t, std::span<const double> x)
{
    const auto& p = sys.partition();
    if (i < 0 || j < 0 || i >= p.blocks() || j >= p.blocks()) throw PreconditionError("block index out of range");
    if (static_cast<int>(x.size()) != sys.dimension()) throw PreconditionError("jacobian: state size mismatch");
    Matrix out(p.size(i), p.size(j));
    for (int r = 0; r < p.size(i); ++r)
        for (int c = 0; c < p.size(j); ++c)
            out(r, c) = evaluate(sys.jacobian_entry(p.offset(i) + r, p.offset(j) + c), t, x);
    return out;
}

Matrix interconnection_matrix(const System& sys, double t, std::span<const double> x)
{
    return interconnection_matrix(jacobian(sys, t, x), sys.partition());
}

}  // namespace entrobound
