#include "dynembed/io.hpp"

#include "dynembed/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace dynembed::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw PreconditionError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot read " + path.string());
    return in;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto pos = line.find(sep);
        out.push_back(line.substr(0, pos));
        if (pos == std::string_view::npos) return out;
        line.remove_prefix(pos + 1);
    }
}

std::string_view chomp(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty())
        throw ParseError(line, "not a number: '" + std::string(s) + "'");
    return v;
}

void check_id(const std::string& id) {
    if (id.find_first_of(",\n\r") != std::string::npos)
        throw PreconditionError("node id '" + id + "' cannot be written to CSV");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const std::string& corner) {
    if (static_cast<Eigen::Index>(row_ids.size()) != m.rows() || static_cast<Eigen::Index>(col_ids.size()) != m.cols())
        throw PreconditionError("write_matrix_csv: id count does not match matrix");
    out << corner;
    for (const auto& id : col_ids) {
        check_id(id);
        out << ',' << id;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        check_id(row_ids[static_cast<std::size_t>(i)]);
        out << row_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& row_ids, const std::vector<std::string>& col_ids,
                      const std::string& corner) {
    auto out = open_out(path);
    write_matrix_csv(out, m, row_ids, col_ids, corner);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* ids) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty matrix file");
    const auto header = split(chomp(line), ',');
    const std::size_t cols = header.size() - 1;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = chomp(line);
        if (text.empty()) continue;
        const auto fields = split(text, ',');
        if (fields.size() != cols + 1)
            throw ParseError(lineno, "expected " + std::to_string(cols + 1) + " fields, found " +
                                         std::to_string(fields.size()));
        row_ids.emplace_back(fields[0]);
        auto& row = rows.emplace_back();
        for (std::size_t j = 1; j < fields.size(); ++j) row.push_back(parse_double(fields[j], lineno));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (ids) *ids = std::move(row_ids);
    return m;
}

void write_partition_csv(const std::filesystem::path& path, const Partition& p, const std::vector<std::string>& ids) {
    if (ids.size() != p.size()) throw PreconditionError("write_partition_csv: id count does not match partition");
    auto out = open_out(path);
    out << "node_id,community\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        check_id(ids[i]);
        out << ids[i] << ',' << p.label(i) << '\n';
    }
}

Partition read_partition_csv(const std::filesystem::path& path, std::vector<std::string>* ids) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty partition file");
    std::vector<int> labels;
    std::vector<std::string> names;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = chomp(line);
        if (text.empty()) continue;
        const auto fields = split(text, ',');
        if (fields.size() != 2) throw ParseError(lineno, "expected node_id,community");
        int label = 0;
        const auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
        if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || label < 0)
            throw ParseError(lineno, "community must be a non-negative integer");
        names.emplace_back(fields[0]);
        labels.push_back(label);
    }
    if (ids) *ids = std::move(names);
    return Partition(labels);
}

std::vector<std::pair<std::string, double>> read_ranking_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty ranking file");
    std::vector<std::pair<std::string, double>> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = chomp(line);
        if (text.empty()) continue;
        const auto fields = split(text, ',');
        if (fields.size() < 2) throw ParseError(lineno, "expected node_id,value");
        out.emplace_back(std::string(fields[0]), parse_double(fields[1], lineno));
    }
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, e.what());
    }
}

std::vector<std::string> index_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return ids;
}

}  // namespace dynembed::io
