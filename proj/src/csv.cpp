#include "nvdnp/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nvdnp::csv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw std::runtime_error("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw std::runtime_error("missing CSV column '" + name + "'");
}

std::vector<double> Table::column_values(std::size_t j) const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.at(j));
  return v;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string render(const Table& t) {
  std::string out;
  for (const auto& [k, v] : t.meta) out += "# " + k + "=" + v + "\n";
  for (std::size_t j = 0; j < t.header.size(); ++j) out += (j ? "," : "") + t.header[j];
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out += ',';
      out += format_number(r[j]);
    }
    out += "\n";
  }
  return out;
}

Table parse(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    const auto s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      const auto body = trim(s.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      continue;
    }
    auto cells = split(s);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(to_double(c, line_no));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("CSV has no header line");
  return t;
}

Table read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void write_file_atomic(const std::filesystem::path& p, const std::string& content) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + p.string());
  }
}

}  // namespace nvdnp::csv
