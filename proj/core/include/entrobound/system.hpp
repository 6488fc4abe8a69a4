#pragma once

#include "entrobound/expr.hpp"
#include "entrobound/measures.hpp"
#include "entrobound/norm.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace entrobound {

/// Axis-aligned box with nonempty interior.
class BoxSet {
public:
    BoxSet() = default;
    BoxSet(std::vector<double> lower, std::vector<double> upper);

    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(lower_.size()); }
    [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
    [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }
    [[nodiscard]] std::vector<double> center() const;
    [[nodiscard]] double width(int axis) const;
    [[nodiscard]] double volume() const;
    [[nodiscard]] bool contains(std::span<const double> x) const;
    /// Corner k, bit i of k selecting upper (1) or lower (0) on axis i.
    [[nodiscard]] std::vector<double> corner(unsigned k) const;
    /// The two halves obtained by cutting `axis` at its midpoint.
    [[nodiscard]] std::pair<BoxSet, BoxSet> split(int axis) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

/// Split of R^n into m consecutive blocks with a local norm per block and a
/// network norm on the vector of block magnitudes.
class Partition {
public:
    Partition() = default;
    Partition(std::vector<int> sizes, std::vector<Norm> local, Norm network);

    /// One block of size n.
    static Partition single(int n, Norm p = Norm::Inf);
    /// n blocks of size 1.
    static Partition scalar(int n, Norm network = Norm::Inf);

    [[nodiscard]] int blocks() const noexcept { return static_cast<int>(sizes_.size()); }
    [[nodiscard]] int dimension() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
    [[nodiscard]] int size(int block) const { return sizes_.at(static_cast<std::size_t>(block)); }
    [[nodiscard]] int offset(int block) const { return offsets_.at(static_cast<std::size_t>(block)); }
    [[nodiscard]] Norm local(int block) const { return local_.at(static_cast<std::size_t>(block)); }
    [[nodiscard]] Norm network() const noexcept { return network_; }
    [[nodiscard]] const std::vector<int>& sizes() const noexcept { return sizes_; }
    [[nodiscard]] const std::vector<Norm>& local_norms() const noexcept { return local_; }

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;  // prefix sums, size m + 1
    std::vector<Norm> local_;
    Norm network_ = Norm::Inf;
};

/// x' = f(t, x) together with its initial data.
class System {
public:
    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(f_.size()); }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] const BoxSet& initial_set() const noexcept { return k_; }
    [[nodiscard]] const Partition& partition() const noexcept { return partition_; }
    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    [[nodiscard]] const Expr& field(int i) const { return f_.at(static_cast<std::size_t>(i)); }
    /// d f_i / d x_j, zero-based indices.
    [[nodiscard]] const Expr& jacobian_entry(int i, int j) const;

    /// out = f(t, x).
    void eval_field(double t, std::span<const double> x, std::span<double> out) const;
    void eval_jacobian(double t, std::span<const double> x, Matrix& out) const;

    /// Same system with another initial set, initial time or partition.
    [[nodiscard]] System with_initial(BoxSet k, double t0) const;
    [[nodiscard]] System with_partition(Partition p) const;

private:
    friend System build_system(const std::vector<std::string>&, std::vector<double>,
                               std::optional<Partition>, BoxSet, double);
    std::vector<Expr> f_;
    std::vector<Expr> jac_;  // row-major n x n
    std::vector<double> breakpoints_;
    Partition partition_;
    BoxSet k_;
    double t0_ = 0.0;
};

/// Parses every component with dimension = field_texts.size() and
/// precomputes the Jacobian. The partition defaults to one block.
[[nodiscard]] System build_system(const std::vector<std::string>& field_texts, std::vector<double> breakpoints,
                                  std::optional<Partition> partition, BoxSet k, double t0);

[[nodiscard]] Matrix jacobian(const System& sys, double t, std::span<const double> x);

/// Block (i, j) of the Jacobian, zero-based block indices.
[[nodiscard]] Matrix jacobian_block(const System& sys, int i, int j, double t, std::span<const double> x);

[[nodiscard]] Matrix interconnection_matrix(const System& sys, double t, std::span<const double> x);

}  // namespace entrobound
