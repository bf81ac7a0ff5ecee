#include "twoscale/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

void write_value(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void write_rows(std::ostream& out, const char* field, int macro, const Vector& v,
                bool macro_scalar, double t) {
  if (macro_scalar) {
    out << field << "," << macro << ",-1,";
    write_value(out, v[macro]);
    out << ",";
    write_value(out, t);
    out << "\n";
    return;
  }
  for (int k = 0; k < v.size(); ++k) {
    out << field << "," << macro << "," << k << ",";
    write_value(out, v[k]);
    out << ",";
    write_value(out, t);
    out << "\n";
  }
}

}  // namespace

void write_snapshot(const TwoScaleState& state, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ValidationError("cannot write snapshot file '" + tmp + "'");
    }
    out << "field,macro_index,micro_index,value,time\n";
    const int n_ma = static_cast<int>(state.w1.size());
    for (int i = 0; i < n_ma; ++i) {
      write_rows(out, "w1", i, state.w1[i], false, state.t);
    }
    for (int i = 0; i < n_ma; ++i) {
      write_rows(out, "w2", i, state.w2[i], false, state.t);
    }
    for (int j = 0; j < state.w3.size(); ++j) {
      write_rows(out, "w3", j, state.w3, true, state.t);
    }
    for (int i = 0; i < n_ma; ++i) {
      write_rows(out, "w4", i, state.w4[i], false, state.t);
    }
    if (!out) {
      throw ValidationError("short write on snapshot file '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ValidationError("cannot move snapshot into place at '" + path + "'");
  }
}

TwoScaleState read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot read snapshot file '" + path + "'");
  }

  struct Row {
    std::string field;
    int macro;
    int micro;
    double value;
    double time;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (line_no == 1 && line.rfind("field,", 0) == 0) {
      continue;
    }
    std::istringstream ls(line);
    Row r;
    std::string tok;
    try {
      if (!std::getline(ls, r.field, ',')) throw std::invalid_argument("field");
      if (!std::getline(ls, tok, ',')) throw std::invalid_argument("macro");
      r.macro = std::stoi(tok);
      if (!std::getline(ls, tok, ',')) throw std::invalid_argument("micro");
      r.micro = std::stoi(tok);
      if (!std::getline(ls, tok, ',')) throw std::invalid_argument("value");
      r.value = std::stod(tok);
      if (!std::getline(ls, tok)) throw std::invalid_argument("time");
      r.time = std::stod(tok);
    } catch (const std::exception&) {
      throw ValidationError("malformed snapshot row at line " +
                            std::to_string(line_no));
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) {
    throw ValidationError("snapshot file '" + path + "' has no rows");
  }

  int n_ma = 0, n_mi = 0, n_tr = 0;
  for (const auto& r : rows) {
    n_ma = std::max(n_ma, r.macro + 1);
    if (r.field == "w1" || r.field == "w2") {
      n_mi = std::max(n_mi, r.micro + 1);
    } else if (r.field == "w4") {
      n_tr = std::max(n_tr, r.micro + 1);
    } else if (r.field != "w3") {
      throw ValidationError("unknown field '" + r.field + "' in snapshot");
    }
  }

  TwoScaleState st;
  st.t = rows.front().time;
  st.w1.assign(n_ma, Vector::Constant(n_mi, std::nan("")));
  st.w2.assign(n_ma, Vector::Constant(n_mi, std::nan("")));
  st.w4.assign(n_ma, Vector::Constant(n_tr, std::nan("")));
  st.w3 = Vector::Constant(n_ma, std::nan(""));
  for (const auto& r : rows) {
    if (r.macro < 0 || r.macro >= n_ma) {
      throw ValidationError("snapshot macro index out of range");
    }
    if (r.field == "w1") {
      st.w1[r.macro][r.micro] = r.value;
    } else if (r.field == "w2") {
      st.w2[r.macro][r.micro] = r.value;
    } else if (r.field == "w3") {
      st.w3[r.macro] = r.value;
    } else {
      st.w4[r.macro][r.micro] = r.value;
    }
  }
  auto complete = [](const Vector& v) { return !v.hasNaN(); };
  for (int i = 0; i < n_ma; ++i) {
    if (!complete(st.w1[i]) || !complete(st.w2[i]) || !complete(st.w4[i])) {
      throw ValidationError("snapshot is missing rows for macro node " +
                            std::to_string(i));
    }
  }
  if (!complete(st.w3)) {
    throw ValidationError("snapshot is missing macro field rows");
  }
  return st;
}

}  // namespace twoscale
