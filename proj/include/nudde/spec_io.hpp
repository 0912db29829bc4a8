#pragma once

#include <nudde/solver.hpp>

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace nudde {

/// Problem from a JSON spec; relative csv paths resolve against base_dir.
Problem parse_problem(const nlohmann::json& spec, const std::filesystem::path& base_dir = {});
Problem load_problem(const std::filesystem::path& path);

/// Inverse of parse_problem with every table inlined.
nlohmann::json to_json(const Problem& prob);

Expr parse_expr(const nlohmann::json& node, Index in_dim, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const Expr& expr);

Table parse_table(const nlohmann::json& node, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const Table& table);

/// Rows "t,v1,...,vk"; a non-numeric first line is taken as a header.
Table read_table_csv(const std::filesystem::path& path);

/// Header "t,u1,...,ud", one row per node (right limits), 17 significant digits.
void write_solution_csv(std::ostream& out, const GridFunction& u);

nlohmann::json report_json(const SolveReport& report);

std::string format_double(double x);

} // namespace nudde
