"""Converse machinery under uncoded placement.

A genie-aided super user that decodes the K distinct demanded files in a
chosen order yields one linear lower bound on the load per (demand vector,
user permutation) pair. Together with per-file partition equalities and
the memory budget these form an exact-rational LP whose optimum equals the
optimal uncoded-placement load. This module generates the inequality
families (the full one and the hand-picked per-regime selections), solves
the LP exactly, collapses it by the ring's cyclic symmetry, and rebuilds
the weighted-sum certificates that give the closed forms.

Variable keys are (file, node-mask) pairs; symmetrised programs use
("orbit", file, mask) keys naming the orbit representative.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial

from ringcache import exactlp
from ringcache.bounds import coded_gain_regime
from ringcache.model import (
    BudgetExceededError,
    DemandError,
    DemandStructure,
    ProblemInstance,
    cyclic_mod,
)
from ringcache.schemes import UncodedPlacement

FAMILY_BUDGET = 10**6
_ROWGEN_THRESHOLD = 192
_ROWGEN_SEED = 96
_ROWGEN_BATCH = 64

AGGREGATE = "aggregate"
PER_NODE = "per_node"


class Regime(enum.Enum):
    HIGH_M = "high_m"
    LOW_M = "low_m"
    LARGE_B = "large_b"


class FamilyError(ValueError):
    """Requested inequality family is not constructible for the parameters."""


class RegimeMismatchError(ValueError):
    """Certificate regime contradicts the instance's parameter condition."""


@dataclass
class LinearInequality:
    """One lower bound on the load: R >= sum(coeffs[key] * y[key]).

    Genie rows carry coefficient 1 on each covered (file, mask) variable;
    tags record the (demand, permutation) pairs that produced the row.
    """

    coeffs: dict
    tags: tuple = ()
    rhs_R_coefficient: Fraction = Fraction(1)

    def canonical_key(self) -> tuple:
        return tuple(sorted((k, v) for k, v in self.coeffs.items()))

    def value_at(self, assignment) -> Fraction:
        get = assignment.get
        return sum((c * get(k, Fraction(0)) for k, c in self.coeffs.items()), Fraction(0))


def genie_inequality(ds: DemandStructure, d, u, full_masks: bool = False) -> LinearInequality:
    """The genie row for demand vector d decoded in permutation order u.

    The i-th decoded user contributes the variables of its demanded file
    over node sets disjoint from the already-consumed users u_1..u_i. By
    default only the empty set and singletons are kept (the weakened form
    the per-regime selections sum up); ``full_masks`` keeps every subset.
    """
    K = ds.inst.K
    d = tuple(getattr(d, "files", d))
    u = tuple(u)
    if sorted(u) != list(range(1, K + 1)):
        raise DemandError(f"u={u} is not a permutation of [1..{K}]")
    ds.validate_demand(d)
    if len(set(d)) != K:
        raise DemandError("genie rows need pairwise-distinct demands")
    coeffs: dict = {}
    consumed: set = set()
    for uk in u:
        consumed.add(uk)
        rest = [j for j in range(1, K + 1) if j not in consumed]
        file_i = d[uk - 1]
        coeffs[(file_i, 0)] = Fraction(1)
        if full_masks:
            for r in range(1, len(rest) + 1):
                for combo in combinations(rest, r):
                    mask = 0
                    for j in combo:
                        mask |= 1 << (j - 1)
                    coeffs[(file_i, mask)] = Fraction(1)
        else:
            for j in rest:
                coeffs[(file_i, 1 << (j - 1))] = Fraction(1)
    return LinearInequality(coeffs=coeffs, tags=((d, u),))


def cut_inequality(ds: DemandStructure, d) -> LinearInequality:
    """No-genie cut row R >= sum_k y[d_k, empty] for unique-file demands."""
    d = tuple(getattr(d, "files", d))
    ds.validate_demand(d)
    coeffs = {}
    for di in d:
        if (di, 0) in coeffs:
            raise DemandError("cut rows need pairwise-distinct demands")
        coeffs[(di, 0)] = Fraction(1)
    return LinearInequality(coeffs=coeffs, tags=((d, None),))


def dedup_rows(rows) -> list:
    """Merge rows with identical coefficient patterns, keeping all tags."""
    merged: dict = {}
    for row in rows:
        key = row.canonical_key()
        if key in merged:
            merged[key].tags = merged[key].tags + row.tags
        else:
            merged[key] = LinearInequality(coeffs=dict(row.coeffs), tags=row.tags)
    return [merged[k] for k in sorted(merged)]


def full_family(
    ds: DemandStructure,
    dedup: bool = True,
    full_masks: bool = True,
    budget: int = FAMILY_BUDGET,
) -> list:
    """One genie row per (distinct-demand vector, permutation) pair."""
    inst = ds.inst
    n_all = 1
    for s in ds.demands:
        n_all *= len(s)
    if n_all > budget:  # counting distinct vectors already walks the product
        raise BudgetExceededError(f"{n_all} demand vectors exceed the row budget {budget}")
    distinct = [d for d in product(*ds.demands) if len(set(d)) == inst.K]
    n_rows = len(distinct) * factorial(inst.K)
    if n_rows > budget:
        raise BudgetExceededError(f"{n_rows} genie rows exceed budget {budget}")
    rows = [
        genie_inequality(ds, d, u, full_masks=full_masks)
        for d in distinct
        for u in permutations(range(1, inst.K + 1))
    ]
    return dedup_rows(rows) if dedup else rows


def _chain_permutations(K: int, k: int) -> tuple:
    """The leftward and rightward user orderings anchored at region k."""
    left = tuple(cyclic_mod(k - j, K) for j in range(K))
    right = tuple(cyclic_mod(k + j, K) for j in range(K))
    return left, right


def selected_family(ds: DemandStructure, regime: Regime) -> list:
    """The hand-picked non-redundant rows backing one regime's certificate.

    HIGH_M: per anchor k, both ring orderings, the first K-1 users demand
    from their shared part along the ordering's direction and the last
    user from its unique part (a^(K-1) * b rows each). LOW_M: same
    orderings with every demand from the directional shared part (a^K
    rows each). LARGE_B: all demand vectors drawn from the unique parts,
    bound by the no-genie cut rows (b^K rows).
    """
    inst = ds.inst
    K, a, b = inst.K, inst.a, inst.b
    rows: list = []
    if regime is Regime.LARGE_B:
        if b < 1:
            raise FamilyError("LARGE_B family needs b >= 1")
        for d_parts in product(*ds.part2):
            rows.append(cut_inequality(ds, d_parts))
        return rows
    if a < 1:
        raise FamilyError(f"{regime.value} family needs a >= 1")
    if regime is Regime.HIGH_M and b < 1:
        raise FamilyError("HIGH_M family needs b >= 1")
    for k in range(1, K + 1):
        left, right = _chain_permutations(K, k)
        for perm, parts in ((left, ds.part1), (right, ds.part3)):
            if regime is Regime.HIGH_M:
                pools = [parts[perm[j] - 1] for j in range(K - 1)]
                pools.append(ds.part2[perm[K - 1] - 1])
            else:
                pools = [parts[perm[j] - 1] for j in range(K)]
            for choice in product(*pools):
                d = [0] * K
                for j, uk in enumerate(perm):
                    d[uk - 1] = choice[j]
                rows.append(genie_inequality(ds, tuple(d), perm, full_masks=False))
    return rows


@dataclass
class LinearProgram:
    """min R subject to genie rows, per-file partition and memory rows."""

    inst: ProblemInstance
    ds: DemandStructure
    var_keys: tuple
    genie_rows: tuple
    partition_rows: tuple  # (coeffs, rhs) equalities
    memory_rows: tuple  # (coeffs, rhs) upper bounds
    memory_mode: str = AGGREGATE
    orbit_members: dict | None = field(default=None, repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.genie_rows) + len(self.partition_rows) + len(self.memory_rows)


def build_lp(
    inst: ProblemInstance,
    ds: DemandStructure,
    family,
    memory_mode: str = AGGREGATE,
) -> LinearProgram:
    """Assemble the raw LP over all (file, mask) variables."""
    if memory_mode not in (AGGREGATE, PER_NODE):
        raise ValueError(f"unknown memory mode {memory_mode!r}")
    K, N = inst.K, inst.N
    var_keys = tuple((i, m) for i in range(1, N + 1) for m in range(1 << K))
    partition = tuple(
        ({(i, m): Fraction(1) for m in range(1 << K)}, Fraction(1)) for i in range(1, N + 1)
    )
    if memory_mode == AGGREGATE:
        coeffs = {
            (i, m): Fraction(m.bit_count())
            for i in range(1, N + 1)
            for m in range(1 << K)
            if m
        }
        memory = ((coeffs, Fraction(K) * inst.M),)
    else:
        memory = tuple(
            (
                {
                    (i, m): Fraction(1)
                    for i in range(1, N + 1)
                    for m in range(1 << K)
                    if m >> (k - 1) & 1
                },
                Fraction(inst.M),
            )
            for k in range(1, K + 1)
        )
    rows = tuple(sorted(family, key=lambda r: r.canonical_key()))
    return LinearProgram(
        inst=inst,
        ds=ds,
        var_keys=var_keys,
        genie_rows=rows,
        partition_rows=partition,
        memory_rows=memory,
        memory_mode=memory_mode,
    )


@dataclass
class LpOutcome:
    value: Fraction
    assignment: dict

    def as_placement(self) -> UncodedPlacement:
        """Witness reshaped as a placement (raw-variable programs only)."""
        sizes = {}
        for key, v in self.assignment.items():
            if not (isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], int)):
                raise ValueError("witness does not use raw (file, mask) keys")
            if v:
                sizes[key] = v
        return UncodedPlacement(sizes=sizes)


def _solve_subset(lp: LinearProgram, genie_subset):
    col = {key: j for j, key in enumerate(lp.var_keys)}
    r_col = len(lp.var_keys)
    cons = []
    for row in genie_subset:
        coeffs = {col[k]: c for k, c in row.coeffs.items()}
        coeffs[r_col] = -row.rhs_R_coefficient
        cons.append(exactlp.Constraint(coeffs=coeffs, sense=exactlp.LESS_EQ, rhs=Fraction(0)))
    for coeffs, rhs in lp.partition_rows:
        cons.append(
            exactlp.Constraint(
                coeffs={col[k]: c for k, c in coeffs.items()}, sense=exactlp.EQUAL, rhs=rhs
            )
        )
    for coeffs, rhs in lp.memory_rows:
        cons.append(
            exactlp.Constraint(
                coeffs={col[k]: c for k, c in coeffs.items()}, sense=exactlp.LESS_EQ, rhs=rhs
            )
        )
    sol = exactlp.solve({r_col: Fraction(1)}, cons, n_vars=r_col + 1)
    assignment = {key: sol.x[j] for key, j in col.items() if sol.x[j]}
    return sol.value, assignment


def solve_lp(lp: LinearProgram, use_symmetry: bool | None = None) -> LpOutcome:
    """Exact optimum of min R, with the witness checked against every row.

    Raw programs whose genie family is closed under the cyclic shift are
    solved through their orbit collapse: restricting to shift-invariant
    placements preserves the optimum (group-averaging a feasible point is
    feasible and keeps R), and the expanded symmetric witness is verified
    exactly against every raw row afterwards. Pass ``use_symmetry=False``
    to force the direct route; non-closed families fall back to it. Large
    families are handled by row generation either way.
    """
    if use_symmetry is None or use_symmetry:
        reduced = None
        if lp.orbit_members is None:
            try:
                reduced = symmetrize(lp)
            except FamilyError:
                if use_symmetry:
                    raise
        if reduced is not None:
            value, orbit_assignment = _solve_iterative(reduced)
            assignment = {}
            for rep, val in orbit_assignment.items():
                if val:
                    for member in reduced.orbit_members[rep]:
                        assignment[member] = val
            if not _witness_ok(lp, lp.genie_rows, value, assignment):
                raise exactlp.LpError("expanded symmetric witness fails a raw row")
            _verify_structural(lp, assignment)
            return LpOutcome(value=value, assignment=assignment)
    value, assignment = _solve_iterative(lp)
    _verify_structural(lp, assignment)
    return LpOutcome(value=value, assignment=assignment)


def _solve_iterative(lp: LinearProgram):
    """Row generation over the genie family; returns (value, assignment)."""
    rows = list(lp.genie_rows)
    if len(rows) <= _ROWGEN_THRESHOLD:
        value, assignment = _solve_subset(lp, rows)
        if rows and not _witness_ok(lp, rows, value, assignment):
            raise exactlp.LpError("witness fails a row it was solved under")
        return value, assignment
    active = rows[:_ROWGEN_SEED]
    active_keys = {r.canonical_key() for r in active}
    while True:
        value, assignment = _solve_subset(lp, active)
        violated = []
        for row in rows:
            slack = row.rhs_R_coefficient * value - row.value_at(assignment)
            if slack < 0:
                violated.append((slack, row.canonical_key(), row))
        if not violated:
            return value, assignment
        violated.sort(key=lambda t: (t[0], t[1]))
        for _, key, row in violated[:_ROWGEN_BATCH]:
            if key not in active_keys:
                active.append(row)
                active_keys.add(key)


def _witness_ok(lp, rows, value, assignment) -> bool:
    return all(r.rhs_R_coefficient * value >= r.value_at(assignment) for r in rows)


def _verify_structural(lp: LinearProgram, assignment) -> None:
    for coeffs, rhs in lp.partition_rows:
        total = sum(
            (c * assignment.get(k, Fraction(0)) for k, c in coeffs.items()), Fraction(0)
        )
        if total != rhs:
            raise exactlp.LpError("witness violates a partition row")
    for coeffs, rhs in lp.memory_rows:
        total = sum(
            (c * assignment.get(k, Fraction(0)) for k, c in coeffs.items()), Fraction(0)
        )
        if total > rhs:
            raise exactlp.LpError("witness violates a memory row")


def _orbit_of(ds: DemandStructure, key) -> list:
    i, m = key
    K = ds.inst.K
    out = []
    fi, fm = i, m
    for _ in range(K):
        out.append((fi, fm))
        fi, fm = ds.shift_file(fi), ds.shift_mask(fm)
    return out


def symmetrize(lp: LinearProgram) -> LinearProgram:
    """Collapse the LP onto orbits of the ring's cyclic shift.

    Requires the genie family to be closed under the shift (coefficient
    patterns map onto each other); then restricting to shift-invariant
    placements keeps the optimum, and variables collapse from N * 2^K
    to one per orbit.
    """
    if lp.orbit_members is not None:
        raise ValueError("program is already symmetrised")
    ds = lp.ds

    def shift_row(coeffs) -> tuple:
        return tuple(
            sorted(((ds.shift_file(i), ds.shift_mask(m)), c) for (i, m), c in coeffs.items())
        )

    keys = {row.canonical_key() for row in lp.genie_rows}
    for row in lp.genie_rows:
        if shift_row(row.coeffs) not in keys:
            raise FamilyError("genie family is not closed under the cyclic shift")

    orbit_rep: dict = {}
    members: dict = {}
    for key in lp.var_keys:
        if key in orbit_rep:
            continue
        orbit = _orbit_of(ds, key)
        rep = ("orbit", *min(orbit))
        for mem in orbit:
            orbit_rep[mem] = rep
        members[rep] = tuple(sorted(set(orbit)))

    def project(coeffs) -> dict:
        out: dict = {}
        for key, c in coeffs.items():
            rep = orbit_rep[key]
            out[rep] = out.get(rep, Fraction(0)) + c
        return out

    genie = dedup_rows(
        LinearInequality(coeffs=project(r.coeffs), tags=r.tags) for r in lp.genie_rows
    )
    partition: dict = {}
    for coeffs, rhs in lp.partition_rows:
        proj = tuple(sorted(project(coeffs).items()))
        partition[proj] = rhs
    memory: dict = {}
    for coeffs, rhs in lp.memory_rows:
        proj = tuple(sorted(project(coeffs).items()))
        memory[proj] = min(memory.get(proj, rhs), rhs)
    return LinearProgram(
        inst=lp.inst,
        ds=ds,
        var_keys=tuple(sorted(members)),
        genie_rows=tuple(genie),
        partition_rows=tuple((dict(p), rhs) for p, rhs in sorted(partition.items())),
        memory_rows=tuple((dict(p), rhs) for p, rhs in sorted(memory.items())),
        memory_mode=lp.memory_mode,
        orbit_members=members,
    )


@dataclass(frozen=True)
class SymmetrizedTotals:
    """The aggregate statistics of a placement the certificates speak about."""

    alpha0: Fraction  # uncached mass of shared files
    beta0: Fraction  # uncached mass of unique files
    alpha1: Fraction  # singleton-cached mass of shared files
    x: tuple  # x[t] = total mass on node sets of size t

    @classmethod
    def from_placement(cls, ds: DemandStructure, placement: UncodedPlacement):
        K = ds.inst.K
        alpha0 = beta0 = alpha1 = Fraction(0)
        x = [Fraction(0)] * (K + 1)
        for (i, m), v in placement.sizes.items():
            t = m.bit_count()
            x[t] += v
            if m == 0:
                if i in ds.class1:
                    alpha0 += v
                else:
                    beta0 += v
            elif t == 1 and i in ds.class1:
                alpha1 += v
        return cls(alpha0=alpha0, beta0=beta0, alpha1=alpha1, x=tuple(x))


def average_rows(rows) -> dict:
    """Uniform average of coefficient maps, multiplicity included."""
    rows = list(rows)
    total: dict = {}
    for row in rows:
        for key, c in row.coeffs.items():
            total[key] = total.get(key, Fraction(0)) + c
    n = len(rows)
    return {key: v / n for key, v in total.items()}


def _aggregate_map(ds: DemandStructure, c1_empty, c2_empty, c1_single) -> dict:
    out = {}
    for i in ds.class1:
        if c1_empty:
            out[(i, 0)] = c1_empty
        if c1_single:
            for j in range(ds.inst.K):
                out[(i, 1 << j)] = c1_single
    if c2_empty:
        for i in ds.class2:
            out[(i, 0)] = c2_empty
    return out


@dataclass
class CertificateReport:
    """Everything the weighted-sum certificate of one regime consists of."""

    regime: Regime
    weights: dict
    multipliers: tuple  # (mu_file_shared, mu_file_unique, mu_memory)
    bound_const: Fraction
    bound_m_coeff: Fraction
    expected_const: Fraction
    expected_m_coeff: Fraction
    aggregate_matches: bool
    residuals: dict
    ok: bool

    def bound_at(self, M: Fraction) -> Fraction:
        return self.bound_const + self.bound_m_coeff * M

    def to_json_dict(self) -> dict:
        worst = min(self.residuals.values()) if self.residuals else Fraction(0)
        mu1, mu2, mum = self.multipliers
        return {
            "regime": self.regime.value,
            "weights": {k: str(v) for k, v in self.weights.items()},
            "weighted_rows": {
                "shared_file_size": str(mu1),
                "unique_file_size": str(mu2),
                "memory_budget": str(mum),
            },
            "bound": f"{self.bound_const} + ({self.bound_m_coeff})*M",
            "aggregate_matches": self.aggregate_matches,
            "min_residual": str(worst),
            "residuals": {_key_name(k): str(v) for k, v in sorted(self.residuals.items())},
            "ok": self.ok,
        }


def certificate_report(inst: ProblemInstance, ds: DemandStructure, regime: Regime) -> CertificateReport:
    """Rebuild one regime's weighted-sum certificate and verify it.

    The selected family is averaged into the aggregate inequality, mixed
    with the complementary family at the regime's weight, and combined
    with the two file-size equalities and the memory budget at the
    regime's multipliers. The certificate stands when the mixing weights
    are admissible, the aggregate matches its closed form, every residual
    coefficient is non-negative, and the resulting bound is the regime's
    straight line. A regime whose parameter condition fails raises
    RegimeMismatchError.
    """
    K, a, b = inst.K, inst.a, inst.b
    aK, bK = Fraction(a * K), Fraction(b * K)
    weights: dict = {}

    if regime in (Regime.HIGH_M, Regime.LOW_M):
        if not coded_gain_regime(inst):
            raise RegimeMismatchError(
                f"{regime.value} needs b(K-1) < 2a; got b(K-1)={b * (K - 1)}, 2a={2 * a}"
            )
        if regime is Regime.HIGH_M:
            agg = average_rows(selected_family(ds, Regime.HIGH_M))
            expected_agg = _aggregate_map(
                ds, Fraction(K - 1, a * K), Fraction(1, b * K), Fraction(K - 1, 2 * a * K)
            )
            # the beta0 coefficient may be lowered to the multiplier level
            weights["beta_slack"] = Fraction(1, b * K) - Fraction(K - 1, 2 * a * K)
            mu = (Fraction(K - 1, a * K), Fraction(K - 1, 2 * a * K), Fraction(K - 1, 2 * a * K))
            expected_const = Fraction((K - 1) * (2 * a + b), 2 * a)
            expected_m = -Fraction(K - 1, 2 * a)
        else:
            w = Fraction((K + 1) * b, 2 * (a + b))
            weights["mix"] = w
            agg = average_rows(selected_family(ds, Regime.LOW_M))
            expected_agg = _aggregate_map(
                ds, Fraction(1, a), Fraction(0), Fraction(K - 1, 2 * a * K)
            )
            if w:
                high = average_rows(selected_family(ds, Regime.HIGH_M))
                expected_high = _aggregate_map(
                    ds, Fraction(K - 1, a * K), Fraction(1, b * K), Fraction(K - 1, 2 * a * K)
                )
                agg = _mix_maps(w, high, agg)
                expected_agg = _mix_maps(w, expected_high, expected_agg)
            mu = (
                Fraction(2 * a * K + b * (K - 1), 2 * (a + b) * a * K),
                Fraction(K + 1, 2 * (a + b) * K),
                Fraction(K + 1, 2 * (a + b) * K),
            )
            expected_const = Fraction(K)
            expected_m = -Fraction(K + 1, 2 * (a + b))
    else:
        if coded_gain_regime(inst):
            w = Fraction(2 * a * K, (K - 1) * (2 * a + b))
            raise RegimeMismatchError(
                f"large_b needs b(K-1) >= 2a; mixing weight {w} falls outside [0, 1]"
            )
        w = Fraction(2 * a * K, (K - 1) * (2 * a + b))
        weights["mix"] = w
        beta = average_rows(selected_family(ds, Regime.LARGE_B))
        expected_beta = _aggregate_map(ds, Fraction(0), Fraction(1, b), Fraction(0))
        if w:
            high = average_rows(selected_family(ds, Regime.HIGH_M))
            expected_high = _aggregate_map(
                ds, Fraction(K - 1, a * K), Fraction(1, b * K), Fraction(K - 1, 2 * a * K)
            )
            agg = _mix_maps(w, high, beta)
            expected_agg = _mix_maps(w, expected_high, expected_beta)
        else:
            agg = beta
            expected_agg = expected_beta
        mu = (
            Fraction(2, 2 * a + b),
            Fraction(1, 2 * a + b),
            Fraction(1, 2 * a + b),
        )
        expected_const = Fraction(K)
        expected_m = -Fraction(K, 2 * a + b)

    weights_ok = all(0 <= v <= 1 for v in weights.values())
    aggregate_matches = _maps_equal(agg, expected_agg)
    mu1, mu2, mum = mu
    residuals: dict = {}
    ok_residuals = True
    for i in range(1, inst.N + 1):
        mu_class = mu1 if i in ds.class1 else mu2
        for m in range(1 << K):
            combo = mu_class - mum * m.bit_count()
            r = agg.get((i, m), Fraction(0)) - combo
            if r:
                residuals[(i, m)] = r
            if r < 0:
                ok_residuals = False
    bound_const = mu1 * aK + mu2 * bK
    bound_m = -mum * K
    ok = (
        weights_ok
        and aggregate_matches
        and ok_residuals
        and bound_const == expected_const
        and bound_m == expected_m
    )
    return CertificateReport(
        regime=regime,
        weights=weights,
        multipliers=mu,
        bound_const=bound_const,
        bound_m_coeff=bound_m,
        expected_const=expected_const,
        expected_m_coeff=expected_m,
        aggregate_matches=aggregate_matches,
        residuals=residuals,
        ok=ok,
    )


def certificate_check(inst: ProblemInstance, ds: DemandStructure, regime: Regime) -> bool:
    """True when the regime's weighted-sum certificate verifies exactly."""
    return certificate_report(inst, ds, regime).ok


def certificate_rows(ds: DemandStructure, regime: Regime) -> list:
    """All selected rows the regime's certificate actually consumes.

    The high-memory certificate stands on its own family; the low-memory
    and uncoded-regime ones mix theirs with the high-memory aggregate
    whenever the mixing weight is positive, so those certificates rest on
    the union of both families.
    """
    rows = list(selected_family(ds, regime))
    a, b = ds.inst.a, ds.inst.b
    needs_high = (regime is Regime.LOW_M and b > 0) or (regime is Regime.LARGE_B and a > 0)
    if needs_high:
        rows += selected_family(ds, Regime.HIGH_M)
    return rows


def _mix_maps(w: Fraction, first: dict, second: dict) -> dict:
    out: dict = {}
    for key, v in first.items():
        out[key] = w * v
    for key, v in second.items():
        out[key] = out.get(key, Fraction(0)) + (1 - w) * v
    return {k: v for k, v in out.items() if v}


def _maps_equal(x: dict, y: dict) -> bool:
    keys = set(x) | set(y)
    return all(x.get(k, Fraction(0)) == y.get(k, Fraction(0)) for k in keys)


def sum_all_bound(inst: ProblemInstance, ds: DemandStructure) -> Fraction:
    """The loose bound from averaging the whole family into a single row.

    All full-mask genie rows are summed with multiplicity and normalised;
    the bound is the minimum of that one averaged expression over
    placements satisfying the per-file partition and the aggregate memory
    budget. Aggregation can only weaken the LP, so this never exceeds the
    family's LP optimum.
    """
    avg = average_rows(full_family(ds, dedup=False, full_masks=True))
    K, N = inst.K, inst.N
    var_keys = tuple((i, m) for i in range(1, N + 1) for m in range(1 << K))
    col = {key: j for j, key in enumerate(var_keys)}
    cons = []
    for i in range(1, N + 1):
        cons.append(
            exactlp.Constraint(
                coeffs={col[(i, m)]: Fraction(1) for m in range(1 << K)},
                sense=exactlp.EQUAL,
                rhs=Fraction(1),
            )
        )
    cons.append(
        exactlp.Constraint(
            coeffs={col[k]: Fraction(k[1].bit_count()) for k in var_keys if k[1]},
            sense=exactlp.LESS_EQ,
            rhs=Fraction(K) * inst.M,
        )
    )
    objective = {col[k]: c for k, c in avg.items()}
    sol = exactlp.solve(objective, cons, n_vars=len(var_keys))
    return max(Fraction(0), sol.value)


def row_satisfied(row: LinearInequality, placement: UncodedPlacement, load: Fraction) -> bool:
    """Exact soundness check of one row against an achievable (load, placement)."""
    value = sum(
        (c * placement.size(i, m) for (i, m), c in row.coeffs.items()), Fraction(0)
    )
    return row.rhs_R_coefficient * load >= value


def _key_name(key) -> str:
    if isinstance(key, tuple) and key and key[0] == "orbit":
        return f"o[{key[1]},{key[2]}]"
    return f"y[{key[0]},{key[1]}]"


def lp_to_text(lp: LinearProgram) -> str:
    """Plain-text exact-rational dump: one row per line, `sense rhs coeffs`."""
    lines = ["min R"]
    for row in lp.genie_rows:
        parts = [f"{exactlp.GREATER_EQ} 0", f"R:{row.rhs_R_coefficient}"]
        parts += [f"{_key_name(k)}:{-c}" for k, c in sorted(row.coeffs.items())]
        lines.append(" ".join(parts))
    for coeffs, rhs in lp.partition_rows:
        parts = [f"{exactlp.EQUAL} {rhs}"]
        parts += [f"{_key_name(k)}:{c}" for k, c in sorted(coeffs.items())]
        lines.append(" ".join(parts))
    for coeffs, rhs in lp.memory_rows:
        parts = [f"{exactlp.LESS_EQ} {rhs}"]
        parts += [f"{_key_name(k)}:{c}" for k, c in sorted(coeffs.items())]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
