"""Finite binary systems given by multiplication tables.

Includes the idempotent-measure solvers (damped iteration, projected
residual descent, and exact small-support classification), evaluation
homomorphisms from trees, quotient construction from tree labelings, and
the constructive pair engine that certifies near-constant colorings on an
increasing family of tree measures.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .measures import (
    BinarySystem,
    CARET_SYSTEM,
    Measure,
    convolve,
    evaluate,
)
from .trees import LEAF, Tree, caret, enumerate_trees


class MagmaFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Magma:
    """Carrier {0, ..., k-1} with a total multiplication table."""

    table: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        k = len(self.table)
        if k == 0:
            raise MagmaFormatError("empty carrier")
        for row in self.table:
            if len(row) != k:
                raise MagmaFormatError(f"row {row!r} has length {len(row)}, expected {k}")
            for v in row:
                if not 0 <= v < k:
                    raise MagmaFormatError(f"entry {v} out of range [0, {k})")
        if self.labels is not None and len(self.labels) != k:
            raise MagmaFormatError("label count does not match carrier size")

    @property
    def k(self) -> int:
        return len(self.table)

    def apply(self, i: int, j: int) -> int:
        return self.table[i][j]

    def elements(self):
        return range(self.k)


def magma_system(m: Magma) -> BinarySystem:
    k = m.k
    return BinarySystem(
        "magma", m.apply, lambda x: isinstance(x, int) and 0 <= x < k
    )


def parse_magma(text: str) -> Magma:
    """First line is the carrier size, then k rows of k integers."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise MagmaFormatError("empty magma text")
    try:
        k = int(lines[0])
    except ValueError:
        raise MagmaFormatError(f"bad carrier size line {lines[0]!r}") from None
    if len(lines) != k + 1:
        raise MagmaFormatError(f"expected {k} table rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        try:
            row = tuple(int(tok) for tok in ln.split())
        except ValueError:
            raise MagmaFormatError(f"malformed row {ln!r}") from None
        rows.append(row)
    return Magma(tuple(rows))


def format_magma(m: Magma) -> str:
    lines = [str(m.k)]
    lines.extend(" ".join(str(v) for v in row) for row in m.table)
    return "\n".join(lines) + "\n"


def z2_add() -> Magma:
    return Magma(((0, 1), (1, 0)))


def z2_shift() -> Magma:
    """x * y = x + 1 mod 2: the standard example where raw iteration 2-cycles."""
    return Magma(((1, 1), (0, 0)))


def left_zero(k: int = 2) -> Magma:
    return Magma(tuple(tuple(i for _ in range(k)) for i in range(k)))


def cyclic_add(k: int) -> Magma:
    return Magma(tuple(tuple((i + j) % k for j in range(k)) for i in range(k)))


def random_magma(k: int, rng: random.Random) -> Magma:
    return Magma(
        tuple(tuple(rng.randrange(k) for _ in range(k)) for _ in range(k))
    )


# ---------------------------------------------------------------------------
# Idempotent measure solving
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolveReport:
    """Outcome of an idempotent search; failure is data, not an exception.

    The residual is recomputed in exact arithmetic from the rationalized
    measure, independently of whatever the float path did.
    """

    method: str
    seed: int
    converged: bool
    measure: Measure | None
    measure_float: tuple[float, ...]
    residual: Fraction | None
    iterations: int
    tol: Fraction
    history: tuple[float, ...] = field(default=())


def _float_square(table, mu):
    k = len(mu)
    out = [0.0] * k
    for i in range(k):
        wi = mu[i]
        if wi == 0.0:
            continue
        row = table[i]
        for j in range(k):
            wj = mu[j]
            if wj != 0.0:
                out[row[j]] += wi * wj
    return out


def _float_residual(a, b):
    return max(abs(x - y) for x, y in zip(a, b))


def _damped_run(table, start, alpha, max_iter, target, patience=1200):
    mu = list(start)
    best = mu[:]
    best_res = float("inf")
    history = []
    stale = 0
    mark = float("inf")
    for it in range(max_iter):
        sq = _float_square(table, mu)
        res = _float_residual(sq, mu)
        history.append(res)
        if res < best_res:
            best_res = res
            best = mu[:]
        if res < mark * 0.999:
            mark = res
            stale = 0
        else:
            stale += 1
            if stale > patience:
                return best, best_res, it + 1, history
        if res <= target:
            return best, best_res, it + 1, history
        mu = [(1.0 - alpha) * w + alpha * s for w, s in zip(mu, sq)]
        # rounding drift off the simplex feeds the quadratic map, so snap back
        total = sum(mu)
        mu = [max(w, 0.0) / total for w in mu]
    return best, best_res, max_iter, history


def _project_simplex(v):
    """Euclidean projection onto the probability simplex (sort based)."""
    n = len(v)
    u = sorted(v, reverse=True)
    css = 0.0
    rho = -1
    theta = 0.0
    for i in range(n):
        css += u[i]
        t = (css - 1.0) / (i + 1)
        if u[i] > t:
            rho = i
            theta = t
    return [max(x - theta, 0.0) for x in v]


def _descent_run(table, start, max_iter, target):
    k = len(start)
    mu = list(start)

    def loss_grad(m):
        r = [a - b for a, b in zip(_float_square(table, m), m)]
        grad = []
        for a in range(k):
            g = -r[a]
            row_a = table[a]
            for j in range(k):
                g += r[row_a[j]] * m[j]
                g += r[table[j][a]] * m[j]
            grad.append(2.0 * g)
        loss = sum(x * x for x in r)
        res = max(abs(x) for x in r)
        return loss, grad, res

    best = mu[:]
    best_res = float("inf")
    history = []
    step = 1.0
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        loss, grad, res = loss_grad(mu)
        history.append(res)
        if res < best_res:
            best_res = res
            best = mu[:]
        if res <= target:
            break
        # backtracking projected gradient step
        improved = False
        trial_step = step
        for _ in range(40):
            cand = _project_simplex([w - trial_step * g for w, g in zip(mu, grad)])
            cand_loss, _, _ = loss_grad(cand)
            if cand_loss < loss:
                mu = cand
                step = trial_step * 1.5
                improved = True
                break
            trial_step *= 0.5
        if not improved:
            break
    return best, best_res, iters, history


def rationalize_simplex(weights, max_denominator: int = 10**6) -> Measure | None:
    """Snap float weights to rationals by continued fractions, renormalize
    exactly, and return the measure (None when everything rounds to zero)."""
    approx = []
    for w in weights:
        if w <= 0.0 or not math.isfinite(w):
            approx.append(Fraction(0))
        else:
            approx.append(Fraction(w).limit_denominator(max_denominator))
    total = sum(approx, Fraction(0))
    if total == 0:
        return None
    return Measure((i, w / total) for i, w in enumerate(approx))


def verify_idempotent(m: Magma, mu: Measure) -> Fraction:
    """Exact sup-norm residual of mu * mu against mu over the whole carrier."""
    system = magma_system(m)
    system.check_measure(mu)
    squared = convolve(system, mu, mu)
    return max(
        abs(squared.weight(z) - mu.weight(z)) for z in m.elements()
    )


def small_support_idempotents(m: Magma) -> list[Measure]:
    """All exactly idempotent measures with support of size at most 2.

    Point masses need a fixed point of the table.  A pair {i, j} must be
    closed under the operation, and the weight solves an integer quadratic;
    only rational roots give exact measures (irrational roots are skipped).
    """
    found = []
    for i in m.elements():
        if m.apply(i, i) == i:
            found.append(Measure.point(i))
    for i in m.elements():
        for j in range(i + 1, m.k):
            closed = {m.apply(i, i), m.apply(i, j), m.apply(j, i), m.apply(j, j)}
            if not closed <= {i, j}:
                continue
            # mass on i: p^2 [ii=i] + p(1-p) ([ij=i] + [ji=i]) + (1-p)^2 [jj=i] = p
            aii = 1 if m.apply(i, i) == i else 0
            bij = (1 if m.apply(i, j) == i else 0) + (1 if m.apply(j, i) == i else 0)
            cjj = 1 if m.apply(j, j) == i else 0
            qa = aii - bij + cjj
            qb = bij - 2 * cjj - 1
            qc = cjj
            roots = []
            if qa == 0:
                if qb != 0:
                    roots.append(Fraction(-qc, qb))
            else:
                disc = qb * qb - 4 * qa * qc
                if disc >= 0:
                    s = math.isqrt(disc)
                    if s * s == disc:
                        roots.append(Fraction(-qb + s, 2 * qa))
                        roots.append(Fraction(-qb - s, 2 * qa))
            for p in roots:
                if 0 < p < 1:
                    cand = Measure(((i, p), (j, 1 - p)))
                    if verify_idempotent(m, cand) == 0 and cand not in found:
                        found.append(cand)
    return found


def _starts(k, seed, count):
    rng = random.Random(seed)
    starts = [[1.0 / k] * k]
    for _ in range(count - 1):
        raw = [rng.expovariate(1.0) for _ in range(k)]
        total = sum(raw)
        starts.append([x / total for x in raw])
    return starts


def _solve_exact(matrix, rhs):
    """Gaussian elimination over Fractions; None when singular."""
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def _newton_polish(m: Magma, approx, steps: int = 6) -> Measure | None:
    """Exact-rational Newton refinement of a near-fixed point.

    Works on the support suggested by the float solution; each step solves
    the linearized fixed-point system (with one equation swapped for the
    normalization) and compresses denominators so iterates stay small.
    """
    support = [i for i, w in enumerate(approx) if w > 1e-7]
    if not support:
        return None
    x = {
        i: Fraction(approx[i]).limit_denominator(10**8) for i in support
    }
    total = sum(x.values(), Fraction(0))
    if total <= 0:
        return None
    x = {i: w / total for i, w in x.items()}
    for _ in range(steps):
        conv = {}
        for i in support:
            for j in support:
                z = m.apply(i, j)
                conv[z] = conv.get(z, Fraction(0)) + x[i] * x[j]
        residual = [conv.get(z, Fraction(0)) - x[z] for z in support]
        jac = []
        for zi, z in enumerate(support):
            row = []
            for a in support:
                d = Fraction(0)
                for j in support:
                    if m.apply(a, j) == z:
                        d += x[j]
                    if m.apply(j, a) == z:
                        d += x[j]
                row.append(d - (1 if a == z else 0))
            jac.append(row)
        # swap the last equation for the simplex normalization
        jac[-1] = [Fraction(1)] * len(support)
        residual[-1] = sum(x.values(), Fraction(0)) - 1
        delta = _solve_exact(jac, [-r for r in residual])
        if delta is None:
            return None
        x = {
            i: (x[i] + d).limit_denominator(10**12)
            for i, d in zip(support, delta)
        }
        if any(w < 0 for w in x.values()):
            x = {i: max(w, Fraction(0)) for i, w in x.items()}
        total = sum(x.values(), Fraction(0))
        if total <= 0:
            return None
        x = {i: w / total for i, w in x.items()}
    if any(w < 0 for w in x.values()) or sum(x.values(), Fraction(0)) != 1:
        return None
    return Measure(x)


def find_idempotent(
    m: Magma,
    tol: float = 1e-9,
    seed: int = 0,
    method: str = "auto",
    max_iter: int = 10_000,
    starts: int = 8,
    alpha: float = 0.5,
    max_denominator: int = 10**6,
    record_history: bool = False,
) -> SolveReport:
    """Search for a measure fixed by convolution squaring, to exact residual tol.

    Methods: "damped" averages the iterate with its square (the plain
    iterate can 2-cycle, averaging is the minimal fix); "residual-descent"
    minimizes the squared residual over the simplex by projected gradient;
    "exhaustive-support" solves supports of size at most 2 symbolically;
    "auto" tries them in that order until one verifies.
    """
    tol_exact = Fraction(tol).limit_denominator(10**12) if tol else Fraction(0)
    order = [method] if method != "auto" else [
        "exhaustive-support",
        "damped",
        "residual-descent",
    ]
    float_target = min(1e-15, tol / 10) if tol > 0 else 0.0

    best_report = None
    for tag in order:
        if tag == "exhaustive-support":
            exact = small_support_idempotents(m)
            if exact:
                mu = exact[0]
                return SolveReport(
                    method=tag,
                    seed=seed,
                    converged=True,
                    measure=mu,
                    measure_float=tuple(float(mu.weight(i)) for i in m.elements()),
                    residual=Fraction(0),
                    iterations=0,
                    tol=tol_exact,
                )
            candidate = None
            iterations = 0
            history = []
        else:
            runner = _damped_run if tag == "damped" else _descent_run
            candidate = None
            cand_res = float("inf")
            iterations = 0
            history = []
            for start in _starts(m.k, seed, starts):
                if tag == "damped":
                    vec, res, its, hist = runner(
                        m.table, start, alpha, max_iter, float_target
                    )
                else:
                    vec, res, its, hist = runner(m.table, start, max_iter, float_target)
                if res < cand_res:
                    candidate, cand_res, iterations, history = vec, res, its, hist
                if cand_res <= float_target:
                    break
        if candidate is None:
            residual = None
            measure = None
            converged = False
        else:
            measure = rationalize_simplex(candidate, max_denominator)
            residual = verify_idempotent(m, measure) if measure is not None else None
            converged = residual is not None and residual <= tol_exact
            if not converged:
                polished = _newton_polish(m, candidate)
                if polished is not None:
                    polished_residual = verify_idempotent(m, polished)
                    if residual is None or polished_residual < residual:
                        measure, residual = polished, polished_residual
                        converged = residual <= tol_exact
        report = SolveReport(
            method=tag,
            seed=seed,
            converged=converged,
            measure=measure,
            measure_float=tuple(candidate) if candidate else (),
            residual=residual,
            iterations=iterations,
            tol=tol_exact,
            history=tuple(history) if record_history else (),
        )
        if converged:
            return report
        if best_report is None or (
            report.residual is not None
            and (best_report.residual is None or report.residual < best_report.residual)
        ):
            best_report = report
    return best_report


# ---------------------------------------------------------------------------
# Evaluation homomorphisms and reachability
# ---------------------------------------------------------------------------


def evaluation_hom(m: Magma, g: int):
    """The unique homomorphism from trees determined by sending the leaf to g."""
    if not 0 <= g < m.k:
        raise ValueError(f"generator {g} not in carrier of size {m.k}")
    table = m.table
    cache = {}

    def ev(t: Tree) -> int:
        if t.is_leaf:
            return g
        hit = cache.get(t)
        if hit is not None:
            return hit
        value = table[ev(t.left)][ev(t.right)]
        cache[t] = value
        return value

    return ev


@dataclass(frozen=True)
class ReachabilityReport:
    """ev-images of the size classes, with detected eventual periodicity."""

    sets: tuple[frozenset, ...]
    stabilized_at: int | None
    period: int | None

    def reachable(self, size: int) -> frozenset:
        return self.sets[size - 1]


def reachable_sets(m: Magma, g: int, cap: int = 12) -> ReachabilityReport:
    """R_m = values of trees with m leaves, by the split recurrence
    R_m = union over i of R_i * R_(m-i); detects the (onset, period) of
    the tail when one exists within the cap."""
    if not 0 <= g < m.k:
        raise ValueError(f"generator {g} not in carrier of size {m.k}")
    sets = [frozenset((g,))]
    for n in range(2, cap + 1):
        acc = set()
        for i in range(1, n):
            for x in sets[i - 1]:
                row = m.table[x]
                for y in sets[n - i - 1]:
                    acc.add(row[y])
        sets.append(frozenset(acc))
    stabilized_at = None
    period = None
    for p in range(1, cap):
        for m0 in range(1, cap - p + 1):
            if all(sets[i - 1] == sets[i + p - 1] for i in range(m0, cap - p + 1)):
                stabilized_at, period = m0, p
                break
        if period is not None:
            break
    return ReachabilityReport(tuple(sets), stabilized_at, period)


def tree_with_value(m: Magma, g: int, size: int, target: int, reach: ReachabilityReport) -> Tree | None:
    """Deterministic witness tree of the given size evaluating to target."""
    cache = {}

    def build(n, s):
        if n == 1:
            return LEAF if s == g else None
        key = (n, s)
        if key in cache:
            return cache[key]
        result = None
        for i in range(1, n):
            lefts = reach.sets[i - 1]
            rights = reach.sets[n - i - 1]
            for x in sorted(lefts):
                row = m.table[x]
                for y in sorted(rights):
                    if row[y] == s:
                        lt = build(i, x)
                        rt = build(n - i, y)
                        if lt is not None and rt is not None:
                            result = caret(lt, rt)
                            break
                if result is not None:
                    break
            if result is not None:
                break
        cache[key] = result
        return result

    if size > len(reach.sets):
        return None
    if target not in reach.sets[size - 1]:
        return None
    return build(size, target)


# ---------------------------------------------------------------------------
# Quotient construction from tree labelings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientViolation:
    a: Tree
    b: Tree
    a2: Tree
    b2: Tree
    label_pair: tuple
    outputs: tuple


@dataclass(frozen=True)
class QuotientOutcome:
    magma: Magma | None
    atoms: tuple | None
    violation: QuotientViolation | None
    missing_pair: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.magma is not None


def quotient_system(label, max_size: int, large_sizes=None) -> QuotientOutcome:
    """Try to induce a binary operation on label atoms.

    For every pair of trees with sizes in the large-size set whose caret
    still has size at most max_size, the label of the caret must depend
    only on the labels of the pieces; the first conflicting quadruple is
    returned otherwise.  Atom pairs never realized by any tree pair leave
    the table partial and are reported as missing.
    """
    if large_sizes is None:
        large_sizes = range(2, max_size + 1)
    sizes = sorted(set(large_sizes))
    if any(s < 1 or s > max_size for s in sizes):
        raise ValueError("large sizes must lie within [1, max_size]")
    mapping = {}
    witness = {}
    atoms = set()
    for sa in sizes:
        for sb in sizes:
            if sa + sb > max_size:
                continue
            for a in enumerate_trees(sa):
                la = label(a)
                for b in enumerate_trees(sb):
                    lb = label(b)
                    out = label(caret(a, b))
                    atoms.update((la, lb, out))
                    key = (la, lb)
                    if key not in mapping:
                        mapping[key] = out
                        witness[key] = (a, b)
                    elif mapping[key] != out:
                        wa, wb = witness[key]
                        return QuotientOutcome(
                            None,
                            None,
                            QuotientViolation(wa, wb, a, b, key, (mapping[key], out)),
                        )
    order = sorted(atoms)
    index = {atom: i for i, atom in enumerate(order)}
    table = [[None] * len(order) for _ in order]
    for (la, lb), out in mapping.items():
        table[index[la]][index[lb]] = index[out]
    for i, row in enumerate(table):
        for j, entry in enumerate(row):
            if entry is None:
                return QuotientOutcome(
                    None, tuple(order), None, missing_pair=(order[i], order[j])
                )
    magma = Magma(
        tuple(tuple(row) for row in table),
        labels=tuple(str(atom) for atom in order),
    )
    return QuotientOutcome(magma, tuple(order), None)


# ---------------------------------------------------------------------------
# Constructive pair engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateEntry:
    kind: str  # "single" or "pair"
    i: int
    j: int | None
    value: Fraction
    within: bool


@dataclass(frozen=True)
class HindmanReport:
    ok: bool
    reason: str | None
    eps: Fraction
    seed: int
    r: Fraction | None = None
    base_size: int | None = None
    idempotent: Measure | None = None
    measures: tuple[Measure, ...] = ()
    certificate: tuple[CertificateEntry, ...] = ()


def _submagma(m: Magma, elements) -> tuple[Magma, dict, tuple]:
    order = tuple(sorted(elements))
    index = {x: i for i, x in enumerate(order)}
    table = tuple(
        tuple(index[m.apply(x, y)] for y in order) for x in order
    )
    return Magma(table), index, order


def hindman_pairs(
    m: Magma,
    g: int,
    f,
    eps: Fraction,
    count: int,
    seed: int = 0,
    cap: int = 16,
) -> HindmanReport:
    """Build an increasing family of tree measures whose coloring values,
    and pairwise caret values, all sit within eps of a common value.

    The coloring is f composed with the evaluation homomorphism at g.  The
    engine stabilizes the reachable sets, finds an idempotent measure on
    the stabilized sub-magma (budget eps/8, exact when a small-support
    solution exists), lifts it to tree measures of sizes that are
    multiples of the base size, and certifies every bound exactly.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    fmap = {x: Fraction(f[x]) if not callable(f) else Fraction(f(x)) for x in m.elements()}
    for x, v in fmap.items():
        if not 0 <= v <= 1:
            raise ValueError(f"coloring value {v} at {x} outside [0, 1]")

    reach = reachable_sets(m, g, cap=cap)
    if reach.period is None:
        return HindmanReport(
            False, f"reachable sets did not stabilize within size cap {cap}", eps, seed
        )
    base = reach.period * math.ceil(max(reach.stabilized_at, 1) / reach.period)
    if base * count > cap:
        return HindmanReport(
            False,
            f"need trees of size {base * count}, beyond size cap {cap}",
            eps,
            seed,
        )
    stable = reach.reachable(base)
    if reach.reachable(2 * base) != stable:
        return HindmanReport(
            False, "stabilized set is not closed under the operation", eps, seed
        )

    sub, index, order = _submagma(m, stable)
    budget = eps / 8
    exact = small_support_idempotents(sub)
    if exact:
        nu_sub = exact[0]
    else:
        report = find_idempotent(sub, tol=float(budget), seed=seed, method="auto")
        if report.measure is None or report.residual is None or report.residual > budget:
            return HindmanReport(
                False,
                "no idempotent measure found within the residual budget",
                eps,
                seed,
            )
        nu_sub = report.measure
    nu = Measure((order[i], w) for i, w in nu_sub.items())

    ev = evaluation_hom(m, g)
    measures = []
    for i in range(1, count + 1):
        size = i * base
        pairs = []
        for s, w in nu.items():
            t = tree_with_value(m, g, size, s, reach)
            if t is None:
                return HindmanReport(
                    False,
                    f"element {s} unreachable by any tree of size {size}",
                    eps,
                    seed,
                )
            pairs.append((t, w))
        measures.append(Measure(pairs))

    r = evaluate(fmap, nu)
    color = lambda t: fmap[ev(t)]
    entries = []
    all_ok = True
    for i, mu in enumerate(measures, start=1):
        value = evaluate(color, mu)
        ok = abs(value - r) < eps
        all_ok = all_ok and ok
        entries.append(CertificateEntry("single", i, None, value, ok))
    for i in range(len(measures)):
        for j in range(i + 1, len(measures)):
            product = convolve(CARET_SYSTEM, measures[i], measures[j])
            value = evaluate(color, product)
            ok = abs(value - r) < eps
            all_ok = all_ok and ok
            entries.append(CertificateEntry("pair", i + 1, j + 1, value, ok))

    return HindmanReport(
        ok=all_ok,
        reason=None if all_ok else "a certified bound failed",
        eps=eps,
        seed=seed,
        r=r,
        base_size=base,
        idempotent=nu,
        measures=tuple(measures),
        certificate=tuple(entries),
    )
