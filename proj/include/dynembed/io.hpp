#pragma once

#include "dynembed/partition.hpp"

#include <json.hpp>
#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dynembed::io {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Header `node_id,<ids...>`, then one row per node prefixed with its id.
/// `corner` replaces the leading `node_id` label.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& row_ids, const std::vector<std::string>& col_ids,
                      const std::string& corner = "node_id");
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const std::string& corner = "node_id");

/// Reads a matrix written by write_matrix_csv. Returns the values; ids are
/// stored in `ids` when non-null.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* ids = nullptr);

void write_partition_csv(const std::filesystem::path& path, const Partition& p,
                         const std::vector<std::string>& ids);
Partition read_partition_csv(const std::filesystem::path& path, std::vector<std::string>* ids = nullptr);

/// `node_id,rank` (or `node_id,score`) rows after a header line; extra
/// columns are ignored.
std::vector<std::pair<std::string, double>> read_ranking_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

std::vector<std::string> index_ids(std::size_t n);

}  // namespace dynembed::io
