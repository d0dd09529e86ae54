#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "odmts/milp/model.hpp"

namespace odmts::milp {

enum class ExportFormat { LpText, Mps };

// Names as written to the file. `renamed` lists (written, original) pairs for
// every name that had to change.
struct ExportNames {
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::pair<std::string, std::string>> renamed;
};

namespace detail {

inline std::string sanitize(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    out += (std::isalnum(c) || ch == '_' || ch == '.' || ch == '[' || ch == ']') ? ch : '_';
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.' ||
      out[0] == 'e' || out[0] == 'E') {
    out = "_" + out;
  }
  return out;
}

// Sanitized unique names; collisions get a numeric suffix.
inline std::vector<std::string> unique_names(const std::vector<std::string>& names,
                                             std::unordered_set<std::string>& taken) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    std::string s = sanitize(n);
    if (taken.count(s)) {
      int k = 1;
      while (taken.count(s + "_" + std::to_string(k))) ++k;
      s += "_" + std::to_string(k);
    }
    taken.insert(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest-loss rendering that fits the 12-character fixed MPS field.
inline std::string fixed_number(double v) {
  char buf[40];
  for (int prec = 15; prec >= 1; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::string(buf).size() <= 12) return buf;
  }
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

inline ExportNames export_names(const MilpModel& m, ExportFormat format) {
  ExportNames names;
  std::vector<std::string> cols, rows;
  for (const auto& v : m.variables()) cols.push_back(v.name);
  for (const auto& r : m.constraints()) rows.push_back(r.name);
  std::unordered_set<std::string> taken{"obj", "OBJ", "RHS", "BND"};
  names.columns = detail::unique_names(cols, taken);
  names.rows = detail::unique_names(rows, taken);
  if (format == ExportFormat::Mps) {
    bool fits = true;
    for (const auto* list : {&names.columns, &names.rows}) {
      for (const auto& s : *list) fits = fits && s.size() <= 8;
    }
    if (!fits) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "C%07zu", j);
        names.columns[j] = buf;
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "R%07zu", i);
        names.rows[i] = buf;
      }
    }
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (names.columns[j] != cols[j]) names.renamed.emplace_back(names.columns[j], cols[j]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (names.rows[i] != rows[i]) names.renamed.emplace_back(names.rows[i], rows[i]);
  }
  return names;
}

// CPLEX LP text.
inline std::string to_lp_text(const MilpModel& m, const ExportNames& names) {
  std::ostringstream out;
  out << "\\ odmts model: " << m.num_variables() << " variables, " << m.num_constraints()
      << " constraints\n";
  for (const auto& [written, original] : names.renamed) {
    out << "\\ map " << written << " " << original << "\n";
  }
  auto write_terms = [&](const std::vector<Term>& terms) {
    if (terms.empty()) {
      out << " 0";
      return;
    }
    for (const auto& t : terms) {
      out << (t.coef < 0 ? " - " : " + ") << detail::number(std::fabs(t.coef)) << " "
          << names.columns[t.var];
    }
  };
  out << "Minimize\n obj:";
  std::vector<Term> obj;
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    if (m.variables()[j].obj != 0.0) obj.push_back({j, m.variables()[j].obj});
  }
  if (obj.empty() && m.num_variables() > 0) obj.push_back({0, 0.0});
  write_terms(obj);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const auto& row = m.constraints()[i];
    if (row.terms.empty()) continue;
    out << " " << names.rows[i] << ":";
    write_terms(row.terms);
    out << (row.sense == RowSense::LessEqual ? " <= "
            : row.sense == RowSense::Equal   ? " = "
                                             : " >= ")
        << detail::number(row.rhs) << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const auto& v = m.variables()[j];
    const auto& name = names.columns[j];
    if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
      out << " " << name << " free\n";
    } else if (v.lb == v.ub) {
      out << " " << name << " = " << detail::number(v.lb) << "\n";
    } else {
      out << " " << (std::isfinite(v.lb) ? detail::number(v.lb) : "-inf") << " <= " << name
          << " <= " << (std::isfinite(v.ub) ? detail::number(v.ub) : "+inf") << "\n";
    }
  }
  bool any_int = false;
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    if (!m.variables()[j].integer) continue;
    if (!any_int) out << "General\n";
    any_int = true;
    out << " " << names.columns[j] << "\n";
  }
  out << "End\n";
  return out.str();
}

// Fixed-format MPS (fields at columns 2, 5, 15, 25, 40, 50). Integer columns
// are wrapped in MARKER lines and always carry explicit bounds.
inline std::string to_mps(const MilpModel& m, const ExportNames& names) {
  using detail::fixed_number;
  using detail::pad;
  std::ostringstream out;
  for (const auto& [written, original] : names.renamed) {
    out << "* map " << written << " " << original << "\n";
  }
  out << "NAME          ODMTS\nROWS\n N  OBJ\n";
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const auto sense = m.constraints()[i].sense;
    out << " " << (sense == RowSense::LessEqual ? "L" : sense == RowSense::Equal ? "E" : "G")
        << "  " << names.rows[i] << "\n";
  }
  // Column-wise coefficients.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(m.num_variables());
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    for (const auto& t : m.constraints()[i].terms) cols[t.var].emplace_back(i, t.coef);
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  auto entry = [&](const std::string& col, const std::string& row, double v) {
    out << "    " << pad(col, 10) << pad(row, 10) << fixed_number(v) << "\n";
  };
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const auto& v = m.variables()[j];
    if (v.integer != in_int) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "M%07d", marker++);
      out << "    " << pad(buf, 10) << pad("'MARKER'", 25) << (v.integer ? "'INTORG'" : "'INTEND'")
          << "\n";
      in_int = v.integer;
    }
    const auto& name = names.columns[j];
    if (v.obj != 0.0 || cols[j].empty()) entry(name, "OBJ", v.obj);
    for (const auto& [i, c] : cols[j]) entry(name, names.rows[i], c);
  }
  if (in_int) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "M%07d", marker++);
    out << "    " << pad(buf, 10) << pad("'MARKER'", 25) << "'INTEND'\n";
  }
  out << "RHS\n";
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    if (m.constraints()[i].rhs != 0.0) {
      out << "    " << pad("RHS", 10) << pad(names.rows[i], 10)
          << fixed_number(m.constraints()[i].rhs) << "\n";
    }
  }
  out << "BOUNDS\n";
  auto bound = [&](const char* type, const std::string& col, std::optional<double> v) {
    out << " " << type << " " << pad("BND", 10) << pad(col, 10);
    if (v) out << fixed_number(*v);
    out << "\n";
  };
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const auto& v = m.variables()[j];
    const auto& name = names.columns[j];
    const bool has_lb = std::isfinite(v.lb), has_ub = std::isfinite(v.ub);
    if (has_lb && has_ub && v.lb == v.ub) {
      bound("FX", name, v.lb);
      continue;
    }
    if (!has_lb && !has_ub) {
      bound("FR", name, std::nullopt);
      continue;
    }
    if (!has_lb) {
      bound("MI", name, std::nullopt);
    } else if (v.lb != 0.0 || v.integer) {
      bound("LO", name, v.lb);
    }
    if (has_ub) {
      bound("UP", name, v.ub);
    } else if (v.integer) {
      bound("PL", name, std::nullopt);
    }
  }
  out << "ENDATA\n";
  return out.str();
}

inline ExportNames export_model(const MilpModel& m, const std::string& path, ExportFormat format) {
  ExportNames names = export_names(m, format);
  const std::string text = format == ExportFormat::Mps ? to_mps(m, names) : to_lp_text(m, names);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for model file '" + path + "'");
  return names;
}

// Chooses the format from the file extension (.mps, otherwise LP text).
inline ExportNames export_model(const MilpModel& m, const std::string& path) {
  const bool mps = path.size() >= 4 && path.substr(path.size() - 4) == ".mps";
  return export_model(m, path, mps ? ExportFormat::Mps : ExportFormat::LpText);
}

// Reads MPS (fixed or free; names must not contain blanks). Supports ROWS,
// COLUMNS with integer markers, RHS, and BOUNDS types UP/LO/FX/FR/MI/PL/BV.
inline MilpModel read_mps(const std::string& text) {
  enum class Section { None, Rows, Columns, Rhs, Bounds, Ranges };
  Section section = Section::None;
  std::string objective_row;
  std::vector<std::pair<std::string, RowSense>> rows;
  std::unordered_map<std::string, std::size_t> row_index;
  struct Col {
    std::string name;
    bool integer = false;
    double obj = 0.0;
    std::vector<Term> entries;  // row, coef
    double lb = 0.0, ub = kInfinity;
    bool ub_set = false, lb_set = false;
  };
  std::vector<Col> cols;
  std::unordered_map<std::string, std::size_t> col_index;
  std::vector<double> rhs;
  bool in_int = false;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError("MPS line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      const std::string& head = tok[0];
      if (head == "NAME") section = Section::None;
      else if (head == "ROWS") section = Section::Rows;
      else if (head == "COLUMNS") section = Section::Columns;
      else if (head == "RHS") section = Section::Rhs;
      else if (head == "BOUNDS") section = Section::Bounds;
      else if (head == "RANGES") section = Section::Ranges;
      else if (head == "ENDATA") break;
      else fail("unknown section '" + head + "'");
      continue;
    }
    auto parse_num = [&](const std::string& s) {
      try {
        return std::stod(s);
      } catch (...) {
        fail("bad number '" + s + "'");
      }
      return 0.0;
    };
    switch (section) {
      case Section::Rows: {
        if (tok.size() < 2) fail("short ROWS entry");
        if (tok[0] == "N") {
          if (objective_row.empty()) objective_row = tok[1];
          continue;
        }
        RowSense s = tok[0] == "L"   ? RowSense::LessEqual
                     : tok[0] == "G" ? RowSense::GreaterEqual
                     : tok[0] == "E" ? RowSense::Equal
                                     : (fail("bad row type"), RowSense::Equal);
        row_index[tok[1]] = rows.size();
        rows.emplace_back(tok[1], s);
        rhs.push_back(0.0);
        break;
      }
      case Section::Columns: {
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          in_int = tok[2] == "'INTORG'";
          continue;
        }
        if (tok.size() < 3 || tok.size() % 2 == 0) fail("bad COLUMNS entry");
        auto it = col_index.find(tok[0]);
        if (it == col_index.end()) {
          it = col_index.emplace(tok[0], cols.size()).first;
          Col fresh;
          fresh.name = tok[0];
          fresh.integer = in_int;
          cols.push_back(std::move(fresh));
        }
        Col& c = cols[it->second];
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = parse_num(tok[k + 1]);
          if (tok[k] == objective_row) {
            c.obj = v;
          } else {
            auto r = row_index.find(tok[k]);
            if (r == row_index.end()) fail("unknown row '" + tok[k] + "'");
            c.entries.push_back({r->second, v});
          }
        }
        break;
      }
      case Section::Rhs: {
        // Optional set name: odd token count means it is present.
        std::size_t k = tok.size() % 2 == 1 ? 1 : 0;
        for (; k + 1 < tok.size(); k += 2) {
          if (tok[k] == objective_row) continue;
          auto r = row_index.find(tok[k]);
          if (r == row_index.end()) fail("unknown row '" + tok[k] + "'");
          rhs[r->second] = parse_num(tok[k + 1]);
        }
        break;
      }
      case Section::Bounds: {
        const std::string& type = tok[0];
        const bool valueless = type == "FR" || type == "MI" || type == "PL" || type == "BV";
        // Layouts: TYPE SET COL [VAL] or TYPE COL [VAL].
        std::string col;
        std::optional<double> val;
        if (valueless) {
          col = tok.size() >= 3 ? tok[2] : tok.at(1);
        } else {
          if (tok.size() < 3) fail("short BOUNDS entry");
          col = tok.size() >= 4 ? tok[2] : tok[1];
          val = parse_num(tok.back());
        }
        auto it = col_index.find(col);
        if (it == col_index.end()) fail("unknown column '" + col + "'");
        Col& c = cols[it->second];
        if (type == "UP") {
          c.ub = *val;
          c.ub_set = true;
          if (*val < 0 && !c.lb_set) c.lb = -kInfinity;
        } else if (type == "LO") {
          c.lb = *val;
          c.lb_set = true;
        } else if (type == "FX") {
          c.lb = c.ub = *val;
          c.lb_set = c.ub_set = true;
        } else if (type == "FR") {
          c.lb = -kInfinity;
          c.ub = kInfinity;
        } else if (type == "MI") {
          c.lb = -kInfinity;
        } else if (type == "PL") {
          c.ub = kInfinity;
        } else if (type == "BV") {
          c.lb = 0;
          c.ub = 1;
          c.integer = true;
        } else {
          fail("unsupported bound type '" + type + "'");
        }
        break;
      }
      case Section::Ranges:
        fail("RANGES are not supported");
        break;
      case Section::None:
        break;
    }
  }
  MilpModel m;
  for (const auto& c : cols) m.add_variable(c.name, c.lb, c.ub, c.integer, c.obj);
  std::vector<std::vector<Term>> row_terms(rows.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (const auto& e : cols[j].entries) row_terms[e.var].push_back({j, e.coef});
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.add_constraint(rows[i].first, std::move(row_terms[i]), rows[i].second, rhs[i]);
  }
  return m;
}

}  // namespace odmts::milp
