#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace dynembed {

/// Hard assignment of n nodes to k non-empty groups.
///
/// Labels are canonicalised on construction: groups are numbered 0..k-1 in
/// order of first appearance, so two partitions describing the same grouping
/// compare equal regardless of the labels they were built from.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::span<const int> labels);
    explicit Partition(const std::vector<int>& labels)
        : Partition(std::span<const int>(labels)) {}

    static Partition singletons(std::size_t n);
    static Partition single_group(std::size_t n);

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t group_count() const noexcept { return k_; }
    int label(std::size_t node) const { return labels_.at(node); }
    const std::vector<int>& labels() const noexcept { return labels_; }

    std::vector<std::size_t> group_sizes() const;
    std::vector<std::vector<std::size_t>> groups() const;

    /// Dense n-by-k indicator matrix H with H(i, label(i)) = 1.
    Eigen::MatrixXd indicator() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<int> labels_;
    std::size_t k_ = 0;
};

}  // namespace dynembed
