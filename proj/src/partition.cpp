#include "dynembed/partition.hpp"

#include "dynembed/error.hpp"

#include <unordered_map>

namespace dynembed {

Partition::Partition(std::span<const int> labels) {
    labels_.reserve(labels.size());
    std::unordered_map<int, int> relabel;
    for (int l : labels) {
        if (l < 0) throw PreconditionError("partition labels must be non-negative");
        auto [it, inserted] = relabel.try_emplace(l, static_cast<int>(relabel.size()));
        labels_.push_back(it->second);
    }
    k_ = relabel.size();
}

Partition Partition::singletons(std::size_t n) {
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<int>(i);
    return Partition(l);
}

Partition Partition::single_group(std::size_t n) { return Partition(std::vector<int>(n, 0)); }

std::vector<std::size_t> Partition::group_sizes() const {
    std::vector<std::size_t> sizes(k_, 0);
    for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

std::vector<std::vector<std::size_t>> Partition::groups() const {
    std::vector<std::vector<std::size_t>> g(k_);
    for (std::size_t i = 0; i < labels_.size(); ++i) g[static_cast<std::size_t>(labels_[i])].push_back(i);
    return g;
}

Eigen::MatrixXd Partition::indicator() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels_.size()), static_cast<Eigen::Index>(k_));
    for (std::size_t i = 0; i < labels_.size(); ++i) h(static_cast<Eigen::Index>(i), labels_[i]) = 1.0;
    return h;
}

}  // namespace dynembed
