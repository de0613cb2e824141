"""Exact-rational linear programming via a dense two-phase simplex.

Solves  min c.x  subject to  A x (<=|==|>=) b,  x >= 0  with every number a
`fractions.Fraction`. The pivot rule is Dantzig's (most negative reduced
cost, lowest column index on ties) with an automatic switch to Bland's
rule after a run of degenerate pivots, which makes the method both fast in
practice and provably cycle-free. Fully deterministic for a fixed input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)

LESS_EQ = "<="
GREATER_EQ = ">="
EQUAL = "=="

_SENSES = (LESS_EQ, GREATER_EQ, EQUAL)


class LpError(RuntimeError):
    pass


class InfeasibleError(LpError):
    pass


class UnboundedError(LpError):
    pass


@dataclass
class Constraint:
    """Sparse row: sum(coeffs[j] * x_j) <sense> rhs."""

    coeffs: dict
    sense: str
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.sense not in _SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")
        self.rhs = Fraction(self.rhs)


@dataclass
class LpSolution:
    value: Fraction
    x: list


class _Tableau:
    """Dense simplex tableau over Fractions with basis bookkeeping."""

    def __init__(self, rows, basis, n_cols):
        self.rows = rows  # m x (n_cols + 1), rhs last
        self.basis = basis  # basic variable per row
        self.n_cols = n_cols

    def pivot(self, r: int, c: int) -> None:
        rows = self.rows
        piv_row = rows[r]
        piv = piv_row[c]
        if piv != 1:
            inv = 1 / piv
            rows[r] = piv_row = [v * inv if v else v for v in piv_row]
        for idx, row in enumerate(rows):
            if idx == r:
                continue
            f = row[c]
            if f:
                rows[idx] = [v - f * p if p else v for v, p in zip(row, piv_row)]
        self.basis[r] = c

    def solve(self, cost, allowed) -> Fraction:
        """Minimise cost over the current basis; returns the optimum.

        `cost` is a dense objective row (length n_cols); `allowed[c]` marks
        columns that may enter the basis. Raises UnboundedError when a
        column of non-positive entries has negative reduced cost.
        """
        rows, basis, n = self.rows, self.basis, self.n_cols
        # Reduced-cost row: z_j - c_j, stored as c_j - z_j so negatives enter.
        obj = list(cost) + [_ZERO]
        for r, bv in enumerate(basis):
            f = obj[bv]
            if f:
                obj = [v - f * p if p else v for v, p in zip(obj, rows[r])]
        degenerate_run = 0
        bland_after = 4 * (len(rows) + n) + 32
        while True:
            use_bland = degenerate_run >= bland_after
            enter = -1
            if use_bland:
                for c in range(n):
                    if allowed[c] and obj[c] < 0:
                        enter = c
                        break
            else:
                best = _ZERO
                for c in range(n):
                    if allowed[c] and obj[c] < best:
                        best = obj[c]
                        enter = c
            if enter < 0:
                return -obj[-1]
            leave = -1
            best_ratio = None
            for r in range(len(rows)):
                a = rows[r][enter]
                if a > 0:
                    ratio = rows[r][-1] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[r] < basis[leave])
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                raise UnboundedError("objective unbounded below")
            degenerate_run = degenerate_run + 1 if best_ratio == 0 else 0
            self.pivot(leave, enter)
            f = obj[enter]
            if f:
                obj = [v - f * p if p else v for v, p in zip(obj, rows[leave])]


def solve(objective, constraints, n_vars: int) -> LpSolution:
    """Minimise `objective` (sparse dict col->coeff) subject to `constraints`.

    All variables are non-negative. Raises InfeasibleError or
    UnboundedError accordingly.
    """
    m = len(constraints)
    # Column layout: structural | slack/surplus | artificial.
    art_cols: list[int] = []
    n_slack = sum(1 for c in constraints if c.sense != EQUAL)
    first_slack = n_vars
    first_art = n_vars + n_slack

    rows = []
    basis = [-1] * m
    slack_seen = 0
    art_seen = 0
    for r, con in enumerate(constraints):
        dense = [_ZERO] * (n_vars + n_slack)
        for j, v in con.coeffs.items():
            if not 0 <= j < n_vars:
                raise ValueError(f"variable index {j} out of range")
            dense[j] += Fraction(v)
        rhs = con.rhs
        sense = con.sense
        if rhs < 0:  # normalise to rhs >= 0
            dense = [-v for v in dense]
            rhs = -rhs
            sense = {LESS_EQ: GREATER_EQ, GREATER_EQ: LESS_EQ, EQUAL: EQUAL}[sense]
        if sense != EQUAL:
            col = first_slack + slack_seen
            dense[col] = _ONE if sense == LESS_EQ else -_ONE
            slack_seen += 1
            if sense == LESS_EQ:
                basis[r] = col
        rows.append((dense, rhs))
        if basis[r] < 0:
            art_seen += 1

    n_cols = n_vars + n_slack + art_seen
    tab_rows = []
    art_seen = 0
    for r, (dense, rhs) in enumerate(rows):
        row = dense + [_ZERO] * (n_cols - len(dense)) + [rhs]
        if basis[r] < 0:
            col = first_art + art_seen
            art_cols.append(col)
            row[col] = _ONE
            basis[r] = col
            art_seen += 1
        tab_rows.append(row)

    tab = _Tableau(tab_rows, basis, n_cols)

    if art_cols:
        phase1_cost = [_ZERO] * n_cols
        for c in art_cols:
            phase1_cost[c] = _ONE
        allowed = [True] * n_cols
        value = tab.solve(phase1_cost, allowed)
        if value != 0:
            raise InfeasibleError(f"phase 1 optimum {value} > 0")
        art_set = set(art_cols)
        # Pivot leftover artificial basics out, dropping redundant rows.
        keep = []
        for r in range(len(tab.rows)):
            if tab.basis[r] not in art_set:
                keep.append(r)
                continue
            row = tab.rows[r]
            enter = next(
                (c for c in range(first_art) if row[c] != 0),
                -1,
            )
            if enter >= 0:
                tab.pivot(r, enter)
                keep.append(r)
            # else: redundant all-zero row, drop it
        tab.rows = [tab.rows[r] for r in keep]
        tab.basis = [tab.basis[r] for r in keep]

    allowed = [True] * first_art + [False] * (n_cols - first_art)
    cost = [_ZERO] * n_cols
    for j, v in objective.items():
        if not 0 <= j < n_vars:
            raise ValueError(f"objective index {j} out of range")
        cost[j] += Fraction(v)
    value = tab.solve(cost, allowed)

    x = [_ZERO] * n_vars
    for r, bv in enumerate(tab.basis):
        if bv < n_vars:
            x[bv] = tab.rows[r][-1]
    return LpSolution(value=value, x=x)
