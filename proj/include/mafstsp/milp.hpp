#pragma once

/// Generic MILP container with deterministic LP-format export, a structural
/// LP parser (for round-trip audits) and the external solver subprocess
/// protocol: `<solver-cmd> <model.lp> <solution.out>`, exit code 0 on
/// success, output lines of the form `<variable-name> <value>`.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mafstsp {

/// Raised when an external MILP backend misbehaves (bad exit code, garbage
/// output, assignments that do not form a tour).
struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MilpModel {
  struct Var {
    std::string name;
    double lb = 0.0;
    double ub = 1.0;
    bool integer = true;
    double obj = 0.0;
  };
  struct Term {
    int var = -1;
    double coef = 0.0;
  };
  struct Constraint {
    std::string name;
    std::vector<Term> terms;
    char sense = '<';  // '<' (<=), '>' (>=), '=' (=)
    double rhs = 0.0;
  };

  std::string name = "model";
  std::vector<Var> vars;
  std::vector<Constraint> constraints;
  std::map<std::string, int> var_index;

  int add_var(const std::string& vname, double lb, double ub, bool integer,
              double obj = 0.0) {
    if (var_index.count(vname))
      throw std::logic_error("MilpModel: duplicate variable " + vname);
    var_index[vname] = static_cast<int>(vars.size());
    vars.push_back({vname, lb, ub, integer, obj});
    return var_index[vname];
  }

  int var(const std::string& vname) const {
    auto it = var_index.find(vname);
    if (it == var_index.end())
      throw std::logic_error("MilpModel: unknown variable " + vname);
    return it->second;
  }

  void add_constraint(const std::string& cname, std::vector<Term> terms,
                      char sense, double rhs) {
    constraints.push_back({cname, std::move(terms), sense, rhs});
  }

  std::size_t num_binary() const {
    std::size_t n = 0;
    for (const Var& v : vars)
      if (v.integer && v.lb == 0.0 && v.ub == 1.0) ++n;
    return n;
  }
};

// ---------------------------------------------------------------------------
// LP export / parse
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

/// Writes CPLEX-LP text. Ordering is deterministic: variables and
/// constraints appear in declaration order.
inline void export_lp(const MilpModel& model, std::ostream& out) {
  out << "\\ " << model.name << "\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (const auto& v : model.vars) {
    if (v.obj == 0.0) continue;
    if (first && v.obj >= 0.0)
      out << " " << detail::fmt_num(v.obj);
    else
      out << (v.obj < 0.0 ? " - " : " + ") << detail::fmt_num(std::abs(v.obj));
    out << " " << v.name;
    first = false;
  }
  if (first) out << " 0 " << model.vars.front().name;
  out << "\nSubject To\n";
  for (const auto& c : model.constraints) {
    out << " " << c.name << ":";
    bool cfirst = true;
    for (const auto& t : c.terms) {
      if (cfirst && t.coef >= 0.0)
        out << " " << detail::fmt_num(t.coef);
      else
        out << (t.coef < 0.0 ? " - " : " + ")
            << detail::fmt_num(std::abs(t.coef));
      out << " " << model.vars[t.var].name;
      cfirst = false;
    }
    if (cfirst) out << " 0 " << model.vars.front().name;
    out << (c.sense == '<' ? " <= " : c.sense == '>' ? " >= " : " = ")
        << detail::fmt_num(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : model.vars)
    out << " " << detail::fmt_num(v.lb) << " <= " << v.name
        << " <= " << detail::fmt_num(v.ub) << "\n";
  std::vector<std::string> bins, gens;
  for (const auto& v : model.vars) {
    if (!v.integer) continue;
    if (v.lb == 0.0 && v.ub == 1.0)
      bins.push_back(v.name);
    else
      gens.push_back(v.name);
  }
  if (!bins.empty()) {
    out << "Binaries\n";
    for (const auto& n : bins) out << " " << n << "\n";
  }
  if (!gens.empty()) {
    out << "Generals\n";
    for (const auto& n : gens) out << " " << n << "\n";
  }
  out << "End\n";
}

inline void export_lp(const MilpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write LP file: " + path);
  export_lp(model, out);
}

/// Structural LP parser for the subset of the format export_lp emits.
/// Reconstructs variables (declaration order = first appearance in the
/// Bounds section), objective coefficients and constraints.
inline MilpModel parse_lp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LP file: " + path);
  std::string line;
  enum Section { none, objective, subject_to, bounds, binaries, generals, done };
  Section section = none;

  struct RawConstraint {
    std::string name;
    std::string body;
  };
  std::string obj_body;
  std::vector<RawConstraint> raw;
  std::vector<std::string> bound_lines;
  std::vector<std::string> bin_names, gen_names;

  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    const auto b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };

  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '\\') continue;
    if (t == "Minimize" || t == "Maximize") { section = objective; continue; }
    if (t == "Subject To") { section = subject_to; continue; }
    if (t == "Bounds") { section = bounds; continue; }
    if (t == "Binaries") { section = binaries; continue; }
    if (t == "Generals") { section = generals; continue; }
    if (t == "End") { section = done; break; }
    switch (section) {
      case objective: {
        auto colon = t.find(':');
        obj_body += (colon == std::string::npos ? t : t.substr(colon + 1));
        obj_body += " ";
        break;
      }
      case subject_to: {
        auto colon = t.find(':');
        if (colon == std::string::npos) {
          if (raw.empty())
            throw std::runtime_error("LP parse: constraint without name");
          raw.back().body += " " + t;
        } else {
          raw.push_back({trim(t.substr(0, colon)), t.substr(colon + 1)});
        }
        break;
      }
      case bounds: bound_lines.push_back(t); break;
      case binaries:
        for (std::istringstream is(t); is >> t;) bin_names.push_back(t);
        break;
      case generals:
        for (std::istringstream is(t); is >> t;) gen_names.push_back(t);
        break;
      default:
        throw std::runtime_error("LP parse: content outside any section: " + t);
    }
  }
  if (section != done) throw std::runtime_error("LP parse: missing End");

  MilpModel model;
  model.name = path;
  // Bounds section lists every variable in declaration order.
  for (const std::string& b : bound_lines) {
    std::istringstream is(b);
    double lb, ub;
    std::string le1, vname, le2;
    if (!(is >> lb >> le1 >> vname >> le2 >> ub) || le1 != "<=" || le2 != "<=")
      throw std::runtime_error("LP parse: malformed bound: " + b);
    model.add_var(vname, lb, ub, /*integer=*/false);
  }
  for (const std::string& n : bin_names) model.vars[model.var(n)].integer = true;
  for (const std::string& n : gen_names) model.vars[model.var(n)].integer = true;

  // Linear expression parser: [sign] coef name [sign coef name ...]
  auto parse_terms = [&](const std::string& body, double* rhs, char* sense) {
    std::vector<MilpModel::Term> terms;
    std::istringstream is(body);
    std::string tok;
    double sign = 1.0;
    double coef = 1.0;
    bool have_coef = false;
    while (is >> tok) {
      if (tok == "+") { sign = 1.0; continue; }
      if (tok == "-") { sign = -1.0; continue; }
      if (tok == "<=" || tok == ">=" || tok == "=") {
        if (!sense) throw std::runtime_error("LP parse: unexpected relation");
        *sense = tok == "<=" ? '<' : tok == ">=" ? '>' : '=';
        if (!(is >> *rhs)) throw std::runtime_error("LP parse: missing rhs");
        continue;
      }
      char* end = nullptr;
      double num = std::strtod(tok.c_str(), &end);
      if (end && *end == '\0') {
        coef = num;
        have_coef = true;
        continue;
      }
      terms.push_back({model.var(tok), sign * (have_coef ? coef : 1.0)});
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    }
    return terms;
  };

  for (auto t : parse_terms(obj_body, nullptr, nullptr))
    model.vars[t.var].obj += t.coef;
  for (const auto& rc : raw) {
    double rhs = 0.0;
    char sense = '<';
    auto terms = parse_terms(rc.body, &rhs, &sense);
    model.add_constraint(rc.name, terms, sense, rhs);
  }
  return model;
}

// ---------------------------------------------------------------------------
// External solver protocol
// ---------------------------------------------------------------------------

/// Parses `<variable> <value>` lines produced by an external solver.
inline std::map<std::string, double> parse_solver_output(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("solver produced no output file: " + path);
  std::map<std::string, double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream is(line);
    std::string name;
    double value;
    if (!(is >> name)) continue;  // blank line
    if (name[0] == '#') continue;
    if (!(is >> value))
      throw BackendError("invalid solver output at line " +
                         std::to_string(lineno) + ": " + line);
    values[name] = value;
  }
  return values;
}

/// Runs the solver command on an exported model. `budget_s` <= 0 means no
/// limit; otherwise the subprocess is killed at the budget and the call
/// fails. Returns the parsed variable assignment.
inline std::map<std::string, double> run_external_solver(
    const std::string& cmd, const MilpModel& model, const std::string& workdir,
    double budget_s = 0.0) {
  std::error_code ec;
  std::filesystem::create_directories(workdir, ec);  // best effort; export_lp
                                                     // reports a failure
  const std::string lp_path = workdir + "/model.lp";
  const std::string out_path = workdir + "/solution.out";
  export_lp(model, lp_path);
  std::remove(out_path.c_str());
  std::string full;
  if (budget_s > 0.0)
    full = "timeout " + std::to_string(budget_s) + " ";
  full += cmd + " " + lp_path + " " + out_path;
  const int rc = std::system(full.c_str());
  if (rc != 0)
    throw BackendError("solver command failed (exit status " +
                       std::to_string(rc) + "): " + full);
  return parse_solver_output(out_path);
}

}  // namespace mafstsp
