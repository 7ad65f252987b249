#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bsdlab/distribution.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/scenario.hpp"

namespace bsdlab {
namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    out.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) raise(Errc::parse_error, "trailing characters in " + context);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(Errc::parse_error, "cannot parse number '" + s + "' in " + context);
  }
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::parse_error, "cannot open file " + path);
  std::vector<std::string> lines;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
      line.erase(0, 3);  // strip UTF-8 BOM
    first = false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

// CSV columns `atom,prob` with a required header row.
inline DiscreteDistribution read_distribution_csv(const std::string& path, Interval interval,
                                                  bool normalize = false) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2) raise(Errc::parse_error, path + ": need a header and at least one row");
  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() != 2 || header[0] != "atom" || header[1] != "prob")
    raise(Errc::parse_error, path + ": header must be 'atom,prob'");
  std::vector<double> atoms, probs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != 2) raise(Errc::parse_error, path + ": row needs two fields");
    atoms.push_back(detail::parse_number(fields[0], path));
    probs.push_back(detail::parse_number(fields[1], path));
  }
  return make_distribution(std::move(atoms), std::move(probs), interval, normalize);
}

inline void write_distribution_csv(const std::string& path, const DiscreteDistribution& dist) {
  std::ofstream out(path);
  if (!out) raise(Errc::parse_error, "cannot write file " + path);
  out << "atom,prob\n";
  out.precision(17);
  for (std::size_t i = 0; i < dist.size(); ++i)
    out << dist.atoms()[i] << "," << dist.probs()[i] << "\n";
}

// First column `prob`, one further column per asset; the header carries the
// asset names.
inline ScenarioTable read_scenario_csv(const std::string& path, bool normalize = false) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2) raise(Errc::parse_error, path + ": need a header and at least one row");
  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "prob")
    raise(Errc::parse_error, path + ": header must start with 'prob' and list assets");
  const std::size_t assets = header.size() - 1;
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<double> probs;
  std::vector<std::vector<double>> returns(assets);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != assets + 1)
      raise(Errc::parse_error, path + ": row has wrong field count");
    probs.push_back(detail::parse_number(fields[0], path));
    for (std::size_t j = 0; j < assets; ++j)
      returns[j].push_back(detail::parse_number(fields[j + 1], path));
  }
  return ScenarioTable(std::move(returns), std::move(probs), std::move(names), normalize);
}

}  // namespace bsdlab
