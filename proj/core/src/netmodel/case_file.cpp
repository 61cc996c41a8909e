#include "pvfair/netmodel/case_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "pvfair/error.hpp"

namespace pvfair::netmodel {
namespace {

struct Cell {
  double value;
  int line;
  int column;
};

struct Row {
  std::vector<Cell> cells;
  int line;
};

struct Table {
  std::vector<Row> rows;
  std::string header;  // text of the opening line, comments included
  int line;
};

struct RawCase {
  std::optional<double> base_mva;
  int base_mva_line = 0;
  std::map<std::string, Table> tables;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return lines;
}

std::string_view strip_comment(std::string_view s) {
  auto pos = s.find('%');
  return pos == std::string_view::npos ? s : s.substr(0, pos);
}

double parse_number(std::string_view tok, int line, int col) {
  double v = 0.0;
  auto first = tok.data();
  auto last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("non-numeric field '" + std::string(tok) + "'", line, col);
  }
  return v;
}

// Consumes numeric rows of a `[ ... ]` block starting at `lines[i]` right
// after position `start`. Returns the index of the line holding `]`.
std::size_t read_matrix(const std::vector<std::string>& lines, std::size_t i, std::size_t start,
                        Table& table) {
  Row row{{}, static_cast<int>(i + 1)};
  auto flush = [&](int at_line) {
    if (!row.cells.empty()) table.rows.push_back(std::move(row));
    row = Row{{}, at_line};
  };
  for (; i < lines.size(); ++i, start = 0) {
    const std::string_view full = lines[i];
    const std::string_view body = strip_comment(full);
    const int line_no = static_cast<int>(i + 1);
    if (row.cells.empty()) row.line = line_no;
    std::size_t pos = start;
    while (pos < body.size()) {
      const char c = body[pos];
      if (c == ']') {
        flush(line_no);
        return i;
      }
      if (c == ';') {
        flush(line_no);
        ++pos;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
        ++pos;
        continue;
      }
      std::size_t end = pos;
      while (end < body.size() && !std::isspace(static_cast<unsigned char>(body[end])) &&
             body[end] != ';' && body[end] != ']' && body[end] != ',') {
        ++end;
      }
      const auto tok = body.substr(pos, end - pos);
      const int col = static_cast<int>(pos + 1);
      row.cells.push_back({parse_number(tok, line_no, col), line_no, col});
      pos = end;
    }
    // A newline ends a row just like ';'.
    flush(line_no + 1);
  }
  throw ParseError("unterminated matrix for table starting here", table.line);
}

RawCase scan(std::string_view text) {
  RawCase raw;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view body = strip_comment(lines[i]);
    auto key_pos = body.find("mpc.");
    if (key_pos == std::string_view::npos) continue;
    auto eq = body.find('=', key_pos);
    if (eq == std::string_view::npos) continue;
    std::string key(body.substr(key_pos + 4, eq - key_pos - 4));
    key.erase(std::remove_if(key.begin(), key.end(),
                             [](unsigned char c) { return std::isspace(c); }),
              key.end());
    // Only plain assignments; skip indexed updates such as mpc.bus(:, ...).
    if (key.find('(') != std::string::npos) continue;
    auto rhs_pos = eq + 1;
    const auto rhs = body.substr(rhs_pos);
    auto bracket = rhs.find('[');
    if (bracket != std::string_view::npos) {
      Table table;
      table.header = lines[i];
      table.line = static_cast<int>(i + 1);
      i = read_matrix(lines, i, rhs_pos + bracket + 1, table);
      raw.tables[key] = std::move(table);
    } else if (key == "baseMVA") {
      std::string_view v = rhs;
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      auto semi = v.find(';');
      if (semi != std::string_view::npos) v = v.substr(0, semi);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      const int col = static_cast<int>(lines[i].find(v.empty() ? "=" : std::string(v)) + 1);
      raw.base_mva = parse_number(v, static_cast<int>(i + 1), col);
      raw.base_mva_line = static_cast<int>(i + 1);
    }
  }
  return raw;
}

const Table& require_table(const RawCase& raw, const std::string& name) {
  auto it = raw.tables.find(name);
  if (it == raw.tables.end()) throw ParseError("missing table mpc." + name);
  return it->second;
}

const Cell& cell(const Row& row, std::size_t col, std::size_t needed, const char* table) {
  if (row.cells.size() < needed) {
    throw ParseError(fmt::format("{} row has {} columns, expected at least {}", table,
                                 row.cells.size(), needed),
                     row.line);
  }
  return row.cells[col];
}

int as_int(const Cell& c) {
  const double r = std::round(c.value);
  if (std::abs(r - c.value) > 1e-9) throw ParseError("expected an integer", c.line, c.column);
  return static_cast<int>(r);
}

}  // namespace

Network parse_case(std::string_view text) {
  const RawCase raw = scan(text);
  if (!raw.base_mva) throw ParseError("missing mpc.baseMVA entry");
  if (!(*raw.base_mva > 0.0)) throw ParseError("baseMVA must be positive", raw.base_mva_line);

  const Table& bus_table = require_table(raw, "bus");
  const Table& branch_table = require_table(raw, "branch");
  if (bus_table.rows.empty()) throw ParseError("bus table is empty", bus_table.line);

  Network net;
  net.base_power = *raw.base_mva;

  const std::string bus_header = lower(bus_table.header);
  const std::string branch_header = lower(branch_table.header);
  const bool loads_per_unit = bus_header.find("per-unit") != std::string::npos;
  const bool loads_in_kw = !loads_per_unit && bus_header.find("kw") != std::string::npos;
  const bool impedance_in_ohm = branch_header.find("ohm") != std::string::npos;

  double load_scale = 1.0 / net.base_power;
  if (loads_in_kw) load_scale = 1e-3 / net.base_power;
  if (loads_per_unit) load_scale = 1.0;

  net.base_voltage = 0.0;
  for (const auto& row : bus_table.rows) {
    Bus bus;
    bus.id = as_int(cell(row, 0, 4, "bus"));
    const int type = as_int(cell(row, 1, 4, "bus"));
    bus.load_p = cell(row, 2, 4, "bus").value * load_scale;
    bus.load_q = cell(row, 3, 4, "bus").value * load_scale;
    if (net.find_bus(bus.id)) {
      throw ParseError("duplicate bus id " + std::to_string(bus.id), row.line, row.cells[0].column);
    }
    if (row.cells.size() >= 10 && net.base_voltage == 0.0) net.base_voltage = row.cells[9].value;
    if (type == 3) net.slack_buses.push_back(net.buses.size());
    net.buses.push_back(bus);
  }
  if (net.slack_buses.empty()) throw ParseError("bus table has no slack (type 3) bus", bus_table.line);

  double z_scale = 1.0;
  if (impedance_in_ohm) {
    if (!(net.base_voltage > 0.0)) {
      throw ParseError("impedances given in ohms but baseKV is missing", branch_table.line);
    }
    const double z_base = net.base_voltage * net.base_voltage / net.base_power;
    z_scale = 1.0 / z_base;
  }

  for (const auto& row : branch_table.rows) {
    Line ln;
    const auto& from_cell = cell(row, 0, 5, "branch");
    const auto& to_cell = cell(row, 1, 5, "branch");
    auto from = net.find_bus(as_int(from_cell));
    if (!from) throw ParseError("branch references unknown bus", from_cell.line, from_cell.column);
    auto to = net.find_bus(as_int(to_cell));
    if (!to) throw ParseError("branch references unknown bus", to_cell.line, to_cell.column);
    ln.from = *from;
    ln.to = *to;
    ln.r = row.cells[2].value * z_scale;
    ln.x = row.cells[3].value * z_scale;
    ln.b = row.cells[4].value;
    if (row.cells.size() >= 6) ln.rate_a = row.cells[5].value;
    if (row.cells.size() >= 11) ln.closed_in_case = row.cells[10].value != 0.0;
    if (ln.rate_a > 0.0) {
      ln.i_max = ln.rate_a / net.base_power;
      ln.p_max = ln.i_max;
      ln.q_max = ln.i_max;
    }
    net.lines.push_back(ln);
  }
  return net;
}

Network load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open case file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Network net = parse_case(ss.str());
  net.name = std::filesystem::path(path).stem().string();
  return net;
}

std::string write_case(const Network& net) {
  std::string out;
  out += fmt::format("function mpc = {}\n", net.name.empty() ? "network" : net.name);
  out += "mpc.version = '2';\n";
  out += fmt::format("mpc.baseMVA = {:.17g};\n\n", net.base_power);
  out += "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out += "mpc.bus = [ %% (Pd and Qd in per-unit here)\n";
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const auto& b = net.buses[i];
    out += fmt::format("\t{}\t{}\t{:.17g}\t{:.17g}\t0\t0\t1\t1\t0\t{:.17g}\t1\t{:.17g}\t{:.17g};\n",
                       b.id, net.is_slack(i) ? 3 : 1, b.load_p, b.load_q, net.base_voltage,
                       net.limits.v_max, net.limits.v_min);
  }
  out += "];\n\n";
  out += "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  out += "mpc.branch = [\n";
  for (const auto& ln : net.lines) {
    out += fmt::format("\t{}\t{}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t0\t0\t0\t0\t{}\t-360\t360;\n",
                       net.buses[ln.from].id, net.buses[ln.to].id, ln.r, ln.x, ln.b, ln.rate_a,
                       ln.closed_in_case ? 1 : 0);
  }
  out += "];\n";
  return out;
}

}  // namespace pvfair::netmodel
