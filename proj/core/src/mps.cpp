// Copyright 2026 The opplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>

#include "opplan/error.hpp"
#include "opplan/solver.hpp"

namespace opplan {

namespace {

std::string positional(char prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, k + 1);
  return buf;
}

// Rows in tag order, construction order within a tag.
std::vector<std::size_t> row_order(const ScheduleModel& model) {
  const auto& rows = model.constraints();
  std::vector<std::size_t> order(rows.size());
  for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].tag < rows[b].tag;
  });
  return order;
}

// Coefficients with repeated variables folded together, in variable order.
std::map<std::size_t, std::int64_t> folded(const LinearConstraint& row) {
  std::map<std::size_t, std::int64_t> out;
  for (const Term& t : row.terms) out[t.var] += t.coef;
  for (auto it = out.begin(); it != out.end();) {
    it = it->second == 0 ? out.erase(it) : std::next(it);
  }
  return out;
}

char sense_code(Sense s) {
  switch (s) {
    case Sense::kLe: return 'L';
    case Sense::kGe: return 'G';
    case Sense::kEq: return 'E';
  }
  return 'E';
}

std::string field_line(const std::string& col, const std::string& row, std::int64_t value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "    %-8s  %-8s  %-12lld", col.c_str(), row.c_str(),
                static_cast<long long>(value));
  std::string s = buf;
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

void export_mps(const ScheduleModel& model, std::ostream& out) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();
  const std::vector<std::size_t> order = row_order(model);

  std::vector<std::string> row_name(rows.size());
  for (std::size_t k = 0; k < order.size(); ++k) row_name[order[k]] = positional('R', k);

  // Column-major view of the matrix.
  std::vector<std::vector<std::pair<std::string, std::int64_t>>> entries(vars.size());
  entries[model.objective()].push_back({"OBJ", 1});
  for (std::size_t r : order) {
    for (const auto& [v, coef] : folded(rows[r])) entries[v].push_back({row_name[r], coef});
  }

  out << "* opplan scheduling model\n";
  for (std::size_t v = 0; v < vars.size(); ++v) {
    out << "* column " << positional('C', v) << ' ' << vars[v].name() << '\n';
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    out << "* row " << positional('R', k) << ' ' << rows[order[k]].tag << '\n';
  }
  out << "NAME          OPPLAN\n";
  out << "ROWS\n";
  out << " N  OBJ\n";
  for (std::size_t r : order) out << ' ' << sense_code(rows[r].sense) << "  " << row_name[r] << '\n';

  out << "COLUMNS\n";
  bool in_int = false;
  std::size_t marker = 0;
  auto set_marker = [&](bool want) {
    if (want == in_int) return;
    char buf[80];
    std::snprintf(buf, sizeof buf, "    M%07zu  'MARKER'                 '%s'", ++marker,
                  want ? "INTORG" : "INTEND");
    out << buf << '\n';
    in_int = want;
  };
  for (std::size_t v = 0; v < vars.size(); ++v) {
    set_marker(vars[v].domain == Domain::kBinary);
    const std::string col = positional('C', v);
    if (entries[v].empty()) {
      out << field_line(col, "OBJ", 0) << '\n';
      continue;
    }
    for (const auto& [row, coef] : entries[v]) out << field_line(col, row, coef) << '\n';
  }
  set_marker(false);

  out << "RHS\n";
  for (std::size_t r : order) {
    if (rows[r].rhs != 0) out << field_line("RHS", row_name[r], rows[r].rhs) << '\n';
  }
  out << "BOUNDS\n";
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (vars[v].domain == Domain::kBinary) {
      out << " UP" << field_line("BND", positional('C', v), 1).substr(3) << '\n';
    }
  }
  out << "ENDATA\n";
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

void export_lp(const ScheduleModel& model, std::ostream& out) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();

  std::vector<std::string> names;
  std::set<std::string> taken;
  for (const Variable& var : vars) {
    std::string s = var.name();
    for (char& c : s) {
      const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
      if (!ok) c = '_';
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    std::string unique = s;
    for (int k = 2; !taken.insert(unique).second; ++k) unique = s + "_v" + std::to_string(k);
    names.push_back(unique);
  }

  out << "\\ opplan scheduling model\n";
  out << "Minimize\n obj: " << names[model.objective()] << '\n';
  out << "Subject To\n";
  std::map<std::string, std::size_t> per_tag;
  for (std::size_t r : row_order(model)) {
    const LinearConstraint& row = rows[r];
    out << ' ' << row.tag << '_' << ++per_tag[row.tag] << ':';
    std::size_t on_line = 0;
    const auto terms = folded(row);
    if (terms.empty()) out << " 0 " << names[model.objective()];
    for (const auto& [v, coef] : terms) {
      if (on_line == 8) {
        out << "\n  ";
        on_line = 0;
      }
      out << ' ' << (coef < 0 ? '-' : '+') << ' ';
      if (coef != 1 && coef != -1) out << (coef < 0 ? -coef : coef) << ' ';
      out << names[v];
      ++on_line;
    }
    const char* op = row.sense == Sense::kLe ? "<=" : row.sense == Sense::kGe ? ">=" : "=";
    out << ' ' << op << ' ' << row.rhs << '\n';
  }
  out << "Binaries\n";
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (vars[v].domain == Domain::kBinary) out << ' ' << names[v] << '\n';
  }
  out << "End\n";
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

}  // namespace opplan
