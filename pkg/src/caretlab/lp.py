"""Exact linear programming over the rationals.

A dense two-phase tableau simplex with Bland's rule (no cycling), sized
for the small instances this package produces.  Optimal solves return
dual multipliers and infeasible solves return a Farkas certificate; both
are validated in exact arithmetic before being handed back, so a caller
can treat them as proofs.

Conventions, for  minimize c.x  subject to  A_ub x <= b_ub,
A_eq x = b_eq, x >= 0:

* duals: y_ub <= 0, y_ub.A_ub + y_eq.A_eq <= c componentwise, and the
  optimal objective equals y_ub.b_ub + y_eq.b_eq;
* Farkas: y_ub <= 0, y_ub.A_ub + y_eq.A_eq <= 0 componentwise, and
  y_ub.b_ub + y_eq.b_eq > 0, which certifies that no feasible x exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class LPError(ValueError):
    pass


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    duals_ub: tuple[Fraction, ...] | None = None
    duals_eq: tuple[Fraction, ...] | None = None
    farkas_ub: tuple[Fraction, ...] | None = None
    farkas_eq: tuple[Fraction, ...] | None = None


def _to_matrix(rows, width):
    out = []
    for row in rows:
        frs = [Fraction(v) for v in row]
        if len(frs) != width:
            raise LPError(f"row width {len(frs)} != {width}")
        out.append(frs)
    return out


def _pivot(tab, basis, row, col):
    piv = tab[row][col]
    inv = ONE / piv
    tab[row] = [v * inv for v in tab[row]]
    pivot_row = tab[row]
    for r in range(len(tab)):
        if r == row:
            continue
        factor = tab[r][col]
        if factor != 0:
            tab[r] = [a - factor * b for a, b in zip(tab[r], pivot_row)]
    basis[row] = col


def _run_simplex(tab, basis, allowed):
    """Bland's rule: smallest eligible entering column, ratio ties broken
    by smallest basic variable index.  Terminates on exact arithmetic."""
    nrows = len(tab) - 1
    while True:
        obj = tab[-1]
        enter = None
        for j in allowed:
            if obj[j] < 0:
                enter = j
                break
        if enter is None:
            return "optimal"
        leave = None
        best = None
        for r in range(nrows):
            a = tab[r][enter]
            if a > 0:
                ratio = tab[r][-1] / a
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[r] < basis[leave])
                ):
                    best = ratio
                    leave = r
        if leave is None:
            return "unbounded"
        _pivot(tab, basis, leave, enter)


def solve_lp(objective, a_ub=None, b_ub=None, a_eq=None, b_eq=None) -> LPSolution:
    """Minimize objective.x over {A_ub x <= b_ub, A_eq x = b_eq, x >= 0}."""
    c = [Fraction(v) for v in objective]
    n = len(c)
    a_ub = _to_matrix(a_ub or [], n)
    a_eq = _to_matrix(a_eq or [], n)
    b_ub = [Fraction(v) for v in (b_ub or [])]
    b_eq = [Fraction(v) for v in (b_eq or [])]
    if len(a_ub) != len(b_ub) or len(a_eq) != len(b_eq):
        raise LPError("constraint matrix and rhs sizes differ")

    m_ub, m_eq = len(a_ub), len(a_eq)
    m = m_ub + m_eq
    n_slack = m_ub
    n_art = m
    width = n + n_slack + n_art + 1  # + rhs

    # standard form rows: [A | slack | artificial | b], b made nonnegative
    rows = []
    flipped = []
    for i in range(m_ub):
        row = a_ub[i] + [ZERO] * n_slack + [ZERO] * n_art + [b_ub[i]]
        row[n + i] = ONE
        rows.append(row)
        flipped.append(False)
    for i in range(m_eq):
        row = a_eq[i] + [ZERO] * n_slack + [ZERO] * n_art + [b_eq[i]]
        rows.append(row)
        flipped.append(False)
    for i in range(m):
        if rows[i][-1] < 0:
            rows[i] = [-v for v in rows[i]]
            flipped[i] = True
        rows[i][n + n_slack + i] = ONE

    basis = [n + n_slack + i for i in range(m)]
    art_cols = list(range(n + n_slack, n + n_slack + n_art))
    real_cols = list(range(n + n_slack))

    # phase 1: minimize the artificial mass
    phase1 = [ZERO] * width
    for j in art_cols:
        phase1[j] = ONE
    tab = [row[:] for row in rows] + [phase1]
    for r in range(m):
        tab[-1] = [a - b for a, b in zip(tab[-1], tab[r])]
    status = _run_simplex(tab, basis, real_cols)
    if status != "optimal":
        raise LPError("phase 1 cannot be unbounded")
    phase1_value = -tab[-1][-1]

    def extract_duals(costs_are_phase1):
        # B^{-1} sits under the artificial columns, so the dual vector can
        # be read off the objective row there.
        y = []
        for i, j in enumerate(art_cols):
            rc = tab[-1][j]
            y.append((ONE - rc) if costs_are_phase1 else -rc)
        y_ub, y_eq = [], []
        for i in range(m):
            val = -y[i] if flipped[i] else y[i]
            if i < m_ub:
                y_ub.append(val)
            else:
                y_eq.append(val)
        return y_ub, y_eq

    if phase1_value > 0:
        y_ub, y_eq = extract_duals(costs_are_phase1=True)
        _check_farkas(c, a_ub, b_ub, a_eq, b_eq, y_ub, y_eq)
        return LPSolution(
            status="infeasible",
            farkas_ub=tuple(y_ub),
            farkas_eq=tuple(y_eq),
        )

    # drive artificials out of the basis, dropping redundant rows
    drop = []
    for r in range(m):
        if basis[r] in art_cols and tab[r][-1] == 0:
            col = next((j for j in real_cols if tab[r][j] != 0), None)
            if col is None:
                drop.append(r)
            else:
                _pivot(tab, basis, r, col)
    if any(basis[r] in art_cols and tab[r][-1] != 0 for r in range(m)):
        raise LPError("artificial stuck in basis at positive level")
    keep = [r for r in range(m) if r not in drop]
    row_origin = keep[:]
    tab = [tab[r] for r in keep] + [tab[-1]]
    basis = [basis[r] for r in keep]

    # phase 2
    phase2 = [ZERO] * width
    for j in range(n):
        phase2[j] = c[j]
    tab[-1] = phase2
    for r in range(len(basis)):
        coeff = tab[-1][basis[r]]
        if coeff != 0:
            tab[-1] = [a - coeff * b for a, b in zip(tab[-1], tab[r])]
    status = _run_simplex(tab, basis, real_cols)
    if status == "unbounded":
        return LPSolution(status="unbounded")

    x = [ZERO] * n
    for r, b in enumerate(basis):
        if b < n:
            x[b] = tab[r][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), ZERO)

    # duals, with dropped (redundant) rows getting multiplier zero
    y_full = [ZERO] * m
    for r in row_origin:
        y_full[r] = -tab[-1][art_cols[r]]
    y_ub, y_eq = [], []
    for i in range(m):
        val = -y_full[i] if flipped[i] else y_full[i]
        if i < m_ub:
            y_ub.append(val)
        else:
            y_eq.append(val)
    _check_duals(c, a_ub, b_ub, a_eq, b_eq, y_ub, y_eq, value)
    return LPSolution(
        status="optimal",
        x=tuple(x),
        objective=value,
        duals_ub=tuple(y_ub),
        duals_eq=tuple(y_eq),
    )


def _column_combination(a_ub, a_eq, y_ub, y_eq, j):
    total = ZERO
    for row, y in zip(a_ub, y_ub):
        total += y * row[j]
    for row, y in zip(a_eq, y_eq):
        total += y * row[j]
    return total


def _check_duals(c, a_ub, b_ub, a_eq, b_eq, y_ub, y_eq, value):
    for y in y_ub:
        if y > 0:
            raise LPError(f"dual sign violated: {y} > 0 on a <= row")
    for j in range(len(c)):
        if _column_combination(a_ub, a_eq, y_ub, y_eq, j) > c[j]:
            raise LPError(f"dual feasibility violated in column {j}")
    bound = sum((y * b for y, b in zip(y_ub, b_ub)), ZERO) + sum(
        (y * b for y, b in zip(y_eq, b_eq)), ZERO
    )
    if bound != value:
        raise LPError(f"strong duality violated: {bound} != {value}")


def _check_farkas(c, a_ub, b_ub, a_eq, b_eq, y_ub, y_eq):
    for y in y_ub:
        if y > 0:
            raise LPError("Farkas sign violated on a <= row")
    for j in range(len(c)):
        if _column_combination(a_ub, a_eq, y_ub, y_eq, j) > 0:
            raise LPError(f"Farkas column condition violated in column {j}")
    gain = sum((y * b for y, b in zip(y_ub, b_ub)), ZERO) + sum(
        (y * b for y, b in zip(y_eq, b_eq)), ZERO
    )
    if gain <= 0:
        raise LPError("Farkas certificate does not separate")
