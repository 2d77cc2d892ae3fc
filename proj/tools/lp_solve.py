#!/usr/bin/env python3
"""Reference MILP solver adapter.

Usage: lp_solve.py <model.lp> <solution.out>

Implements the external-solver contract used by the library: read an LP
model (the subset written by export_lp), minimize it, and write one
"<variable> <value>" line per variable to the output file.  Lines starting
with '#' are comments.  Exits nonzero when the model cannot be parsed or
no optimal solution exists.

Requires scipy >= 1.9 (HiGHS mixed-integer backend).
"""
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

SECTIONS = ("Minimize", "Subject To", "Bounds", "Binaries", "Generals", "End")


def parse_terms(tokens):
    """Parse '<coef> <var> [+|- <coef> <var>]...' token streams."""
    terms = []
    i = 0
    while i < len(tokens):
        sign = 1.0
        if tokens[i] in ("+", "-"):
            sign = -1.0 if tokens[i] == "-" else 1.0
            i += 1
        terms.append((tokens[i + 1], sign * float(tokens[i])))
        i += 2
    return terms


def parse_lp(path):
    objective = []
    constraints = []  # (terms, sense, rhs)
    bounds = []  # (name, lb, ub) in declaration order
    integer = set()
    section = None
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            if line in SECTIONS:
                section = line
                continue
            if section == "Minimize":
                objective += parse_terms(line.split(":", 1)[1].split())
            elif section == "Subject To":
                body = line.split(":", 1)[1].split()
                pos = next(
                    i for i, t in enumerate(body) if t in ("<=", ">=", "=")
                )
                constraints.append(
                    (parse_terms(body[:pos]), body[pos], float(body[pos + 1]))
                )
            elif section == "Bounds":
                lo, _, name, _, hi = line.split()
                bounds.append((name, float(lo), float(hi)))
            elif section in ("Binaries", "Generals"):
                integer.add(line)
            else:
                sys.exit(f"unexpected line outside any section: {line!r}")
    return objective, constraints, bounds, integer


def main():
    if len(sys.argv) != 3:
        sys.exit(f"usage: {sys.argv[0]} <model.lp> <solution.out>")
    objective, constraints, bounds, integer = parse_lp(sys.argv[1])
    index = {name: i for i, (name, _, _) in enumerate(bounds)}
    n = len(bounds)

    c = np.zeros(n)
    for var, coef in objective:
        c[index[var]] += coef

    rows, cols, vals, lo, hi = [], [], [], [], []
    for r, (terms, sense, rhs) in enumerate(constraints):
        for var, coef in terms:
            rows.append(r)
            cols.append(index[var])
            vals.append(coef)
        lo.append(-np.inf if sense == "<=" else rhs)
        hi.append(np.inf if sense == ">=" else rhs)
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(constraints), n))

    res = milp(
        c=c,
        constraints=LinearConstraint(a, lo, hi),
        integrality=np.array([1 if b[0] in integer else 0 for b in bounds]),
        bounds=Bounds([b[1] for b in bounds], [b[2] for b in bounds]),
        options={"mip_rel_gap": 0.0},
    )
    if not res.success:
        sys.exit(f"no optimal solution: {res.message}")
    with open(sys.argv[2], "w") as out:
        out.write(f"# objective {res.fun:.17g}\n")
        for (name, _, _), x in zip(bounds, res.x):
            out.write(f"{name} {x:.17g}\n")


if __name__ == "__main__":
    main()
