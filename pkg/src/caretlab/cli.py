"""Command-line surface: every subsystem as a reproducible batch run.

Exit codes: 0 on success, 2 when the mathematics certifies a negative
verdict (witness coloring found, no constant copy, solver out of
tolerance, engine failure), 1 on operational errors.  Reports print run
metadata as '#' comment lines on stdout; files written via --out contain
only the payload, so identical configurations byte-reproduce.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .constructions import (
    SIZE_ORDER,
    address_profile,
    in_spine_span,
    matches_odometer_prefix,
    monotonicity_profile,
    odometer_bits,
    spine_collapse,
    spine_collapse_measure,
)
from .magmas import (
    Magma,
    find_idempotent,
    hindman_pairs,
    parse_magma,
    quotient_system,
    small_support_idempotents,
    verify_idempotent,
)
from .measures import (
    CARET_SYSTEM,
    as_fraction,
    convolve,
    evaluate,
    frac_str,
    load_measure,
    pushforward,
    save_measure,
)
from .ramsey import (
    adversarial_coloring_search,
    constant_copy_exists,
    copy_values,
    load_coloring,
    min_oscillation_copy,
    save_coloring,
    scan_minimal_n,
    strong_copy_search,
)
from .report import Report
from .thompson import (
    compose,
    format_felement,
    invariance_defect,
    parse_felement,
    partial_apply,
)
from .trees import (
    dyadic_repr,
    enumerate_trees,
    format_tree,
    left_comb,
    parse_tree,
    tree_stats,
)


def _add_common(p):
    p.add_argument("--out", type=Path, help="write the payload to this file")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument(
        "--figures",
        type=Path,
        default=None,
        help="directory for companion figures (default: alongside --out)",
    )
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap-size", type=int, default=16)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--threshold", default="0")
    p.add_argument("--workers", type=int, default=1)


def _emit(args, report: Report, figures=()):
    """Print metadata plus payload; persist payload and figures if asked."""
    payload = report.render(args.format)
    skip = {"out", "format", "figures", "no_figures", "func", "_t0"}
    echo = ", ".join(
        f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip
    )
    print(f"# caretlab {__version__}")
    print(f"# config: {echo}")
    print(f"# wall_time_s: {time.perf_counter() - args._t0:.3f}")
    sys.stdout.write(payload)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(payload)
    if figures and not args.no_figures and (args.out or args.figures):
        fig_dir = args.figures or args.out.parent
        fig_dir.mkdir(parents=True, exist_ok=True)
        stem = args.out.stem if args.out else "figure"
        for name, render in figures:
            render(fig_dir / f"{stem}_{name}.png")


def _fraction(text) -> Fraction:
    return Fraction(str(text))


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------


def cmd_trees_enum(args):
    trees = enumerate_trees(args.size, cap=args.cap_size)
    report = Report()
    report.add("size", args.size)
    report.add("count", len(trees))
    report.table(
        ["index", "tree"], [(i, format_tree(t)) for i, t in enumerate(trees)]
    )
    from .report import render_count_figure

    sizes = list(range(1, args.size + 1))
    counts = [len(enumerate_trees(s, cap=args.cap_size)) for s in sizes]
    _emit(args, report, [("counts", lambda p: render_count_figure(sizes, counts, p))])
    return 0


def cmd_trees_stats(args):
    t = parse_tree(args.tree)
    stats = tree_stats(t)
    report = Report()
    report.add("tree", format_tree(t))
    report.add("size", stats.size)
    report.add("left_depth", stats.left_depth)
    report.add("right_spine", stats.right_spine)
    report.add(
        "dyadic", " ".join(frac_str(x) for x in sorted(dyadic_repr(t)))
    )
    _emit(args, report)
    return 0


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


def cmd_measure_conv(args):
    left = load_measure(args.left)
    right = load_measure(args.right)
    result = convolve(CARET_SYSTEM, left, right)
    if args.out:
        save_measure(args.out, result)
    report = Report()
    report.add("support", len(result))
    report.table(
        ["tree", "weight"], [(format_tree(t), w) for t, w in result.items()]
    )
    out = args.out
    args.out = None  # measure file already written in its own format
    _emit(args, report)
    args.out = out
    return 0


def cmd_measure_eval(args):
    mu = load_measure(args.measure)
    coloring = load_coloring(args.coloring)
    value = evaluate(lambda t: coloring[t], mu)
    report = Report()
    report.add("value", value)
    _emit(args, report)
    return 0


def cmd_measure_push(args):
    mu = load_measure(args.measure)
    report = Report()
    if args.map == "identity":
        result = mu
    elif args.map == "size":
        pushed = pushforward(lambda t: t.size, mu)
        report.table(["element", "weight"], list(pushed.items()))
        _emit(args, report)
        return 0
    elif args.map.startswith("spine:"):
        result = spine_collapse_measure(mu, args.map.split(":", 1)[1])
    else:
        raise ValueError(f"unknown map {args.map!r}; use identity, size, or spine:BITS")
    if args.out:
        save_measure(args.out, result)
    report.table(
        ["tree", "weight"], [(format_tree(t), w) for t, w in result.items()]
    )
    out = args.out
    args.out = None
    _emit(args, report)
    args.out = out
    return 0


# ---------------------------------------------------------------------------
# magma
# ---------------------------------------------------------------------------


def _load_magma(path) -> Magma:
    return parse_magma(Path(path).read_text())


def cmd_magma_idem(args):
    magma = _load_magma(args.magma)
    solve = find_idempotent(
        magma,
        tol=args.tol,
        seed=args.seed,
        method=args.method,
        record_history=True,
    )
    report = Report()
    report.add("method", solve.method)
    report.add("seed", solve.seed)
    report.add("converged", solve.converged)
    report.add("iterations", solve.iterations)
    if solve.residual is not None:
        report.add("residual", solve.residual)
    if solve.measure is not None:
        for x, w in solve.measure.items():
            report.add(f"weight.{x}", w)
    from .report import render_residual_figure

    _emit(
        args,
        report,
        [("residual", lambda p: render_residual_figure(solve.history, p))],
    )
    return 0 if solve.converged else 2


def cmd_magma_classify(args):
    magma = _load_magma(args.magma)
    found = small_support_idempotents(magma)
    report = Report()
    report.add("carrier", magma.k)
    report.add("count", len(found))
    rows = []
    for i, mu in enumerate(found):
        body = "; ".join(f"{x}:{frac_str(w)}" for x, w in mu.items())
        rows.append((i, body, verify_idempotent(magma, mu)))
    report.table(["index", "measure", "residual"], rows)
    _emit(args, report)
    return 0


_LABELS = {
    "left-depth-parity": lambda t: t.left_depth % 2,
    "size-parity": lambda t: t.size % 2,
    "left-comb": lambda t: 1 if t == left_comb(t.size) else 0,
}


def cmd_magma_quotient(args):
    label = _LABELS.get(args.label)
    if label is None:
        raise ValueError(f"unknown label {args.label!r}; options: {sorted(_LABELS)}")
    sizes = None
    if args.large_sizes:
        sizes = [int(s) for s in args.large_sizes.split(",")]
    outcome = quotient_system(label, args.max_size, sizes)
    report = Report()
    report.add("label", args.label)
    report.add("well_defined", outcome.ok)
    if outcome.ok:
        report.add("atoms", " ".join(str(a) for a in outcome.atoms))
        report.table(
            ["row"], [(" ".join(str(v) for v in row),) for row in outcome.magma.table]
        )
    elif outcome.violation is not None:
        v = outcome.violation
        report.add("violation.a", format_tree(v.a))
        report.add("violation.b", format_tree(v.b))
        report.add("violation.a2", format_tree(v.a2))
        report.add("violation.b2", format_tree(v.b2))
        report.add("violation.outputs", f"{v.outputs[0]} vs {v.outputs[1]}")
    else:
        report.add("missing_pair", str(outcome.missing_pair))
    _emit(args, report)
    return 0 if outcome.ok else 2


# ---------------------------------------------------------------------------
# hindman
# ---------------------------------------------------------------------------


def _parse_color_map(spec, magma):
    if spec == "identity":
        if magma.k > 2:
            raise ValueError("identity coloring needs a carrier inside {0, 1}")
        return {x: Fraction(x) for x in magma.elements()}
    table = {}
    for line in Path(spec).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        element, value = line.split()
        table[int(element)] = as_fraction(value)
    return table


def cmd_hindman_pairs(args):
    magma = _load_magma(args.magma)
    fmap = _parse_color_map(args.f, magma)
    report_data = hindman_pairs(
        magma,
        args.generator,
        fmap,
        _fraction(args.eps),
        args.count,
        seed=args.seed,
        cap=args.cap_size,
    )
    report = Report()
    report.add("ok", report_data.ok)
    if report_data.reason:
        report.add("reason", report_data.reason)
    if report_data.r is not None:
        report.add("r", report_data.r)
        report.add("base_size", report_data.base_size)
        for i, mu in enumerate(report_data.measures, start=1):
            body = " + ".join(
                f"{frac_str(w)}*{format_tree(t)}" for t, w in mu.items()
            )
            report.add(f"mu.{i}", body)
        rows = [
            (e.kind, e.i, "" if e.j is None else e.j, e.value, e.within)
            for e in report_data.certificate
        ]
        report.table(["kind", "i", "j", "value", "within_eps"], rows)
    figures = []
    if report_data.r is not None:
        from .report import render_certificate_figure

        figures.append(
            (
                "certificate",
                lambda p: render_certificate_figure(
                    report_data.certificate, report_data.r, report_data.eps, p
                ),
            )
        )
    _emit(args, report, figures)
    return 0 if report_data.ok else 2


# ---------------------------------------------------------------------------
# f (tree pairs)
# ---------------------------------------------------------------------------


def cmd_f_act(args):
    f = parse_felement(args.element)
    t = parse_tree(args.tree)
    image = partial_apply(f, t)
    report = Report()
    report.add("element", format_felement(f))
    report.add("tree", format_tree(t))
    report.add("image", "undefined" if image is None else format_tree(image))
    _emit(args, report)
    return 0


def cmd_f_compose(args):
    f = parse_felement(args.left)
    g = parse_felement(args.right)
    report = Report()
    report.add("result", format_felement(compose(f, g)))
    _emit(args, report)
    return 0


def cmd_f_defect(args):
    f = parse_felement(args.element)
    mu = load_measure(args.measure)
    defect = invariance_defect(mu, f)
    report = Report()
    report.add("undefined_mass", defect.undefined_mass)
    report.add("tv_defect", defect.tv_defect)
    _emit(args, report)
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def cmd_stats_addresses(args):
    mu = load_measure(args.measure)
    profile = address_profile(mu, args.sigma, args.varsigma, SIZE_ORDER)
    report = Report()
    report.add("less", profile.less)
    report.add("greater", profile.greater)
    report.add("equivalent", profile.equivalent)
    report.add("undefined", profile.undefined)
    _emit(args, report)
    return 0


def cmd_stats_monotonicity(args):
    mu = load_measure(args.measure)
    profile = monotonicity_profile(mu)
    report = Report()
    report.add("ascending", profile.ascending)
    report.add("descending", profile.descending)
    report.add("other", profile.other)
    from .report import render_profile_figure

    figure = (
        "profile",
        lambda p: render_profile_figure(
            ["ascending", "descending", "other"],
            [profile.ascending, profile.descending, profile.other],
            p,
        ),
    )
    _emit(args, report, [figure])
    return 0


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def cmd_constructions_hr(args):
    report = Report()
    if args.tree:
        t = parse_tree(args.tree)
        report.add("image", format_tree(spine_collapse(t, args.bits)))
    elif args.measure:
        mu = load_measure(args.measure)
        pushed = spine_collapse_measure(mu, args.bits)
        report.table(
            ["tree", "weight"], [(format_tree(t), w) for t, w in pushed.items()]
        )
    else:
        raise ValueError("need --tree or --measure")
    _emit(args, report)
    return 0


def cmd_constructions_odometer(args):
    t = parse_tree(args.tree)
    report = Report()
    report.add("bits", odometer_bits(t, args.precision))
    if args.bits:
        report.add(
            "matches", matches_odometer_prefix(t, args.bits, args.precision)
        )
    _emit(args, report)
    return 0


def cmd_constructions_er(args):
    t = parse_tree(args.tree)
    report = Report()
    report.add("member", in_spine_span(t, args.bits, args.n))
    report.add("generator_sizes", " ".join(
        str(k) for k in range(args.n + 1, len(args.bits) + 1)
    ))
    _emit(args, report)
    return 0


# ---------------------------------------------------------------------------
# ramsey
# ---------------------------------------------------------------------------


def cmd_ramsey_solve(args):
    coloring = load_coloring(args.coloring)
    result = min_oscillation_copy(coloring, args.m, args.n)
    report = Report()
    report.add("oscillation", result.oscillation)
    rows = [
        (frac_str(w), str(e))
        for w, e in zip(result.copy.weights, result.copy.embeddings)
    ]
    report.table(["weight", "embedding"], rows)
    _emit(args, report)
    return 0


def cmd_ramsey_constant(args):
    coloring = load_coloring(args.coloring)
    outcome = constant_copy_exists(coloring, args.m, args.n)
    report = Report()
    report.add("constant_copy", outcome.exists)
    if outcome.copy is not None:
        values = copy_values(outcome.copy, coloring)
        report.add("value", next(iter(values.values.values())))
        rows = [
            (frac_str(w), str(e))
            for w, e in zip(outcome.copy.weights, outcome.copy.embeddings)
        ]
        report.table(["weight", "embedding"], rows)
    else:
        report.add("certified_lower_bound", outcome.certificate.bound)
    _emit(args, report)
    return 0 if outcome.exists else 2


def cmd_ramsey_adversary(args):
    witness = adversarial_coloring_search(
        args.m, args.n, _fraction(args.threshold), args.budget, args.seed
    )
    report = Report()
    report.add("witness_found", witness is not None)
    if witness is not None:
        osc = min_oscillation_copy(witness, args.m, args.n).oscillation
        report.add("oscillation", osc)
        report.table(
            ["tree", "value"],
            [(format_tree(t), witness[t]) for t in enumerate_trees(args.n)],
        )
        if args.out:
            save_coloring(args.out.with_suffix(".witness.csv"), witness)
    _emit(args, report)
    return 2 if witness is not None else 0


def cmd_ramsey_scan(args):
    rows = scan_minimal_n(
        args.m,
        _fraction(args.threshold),
        args.max_n,
        budget=args.budget,
        seed=args.seed,
    )
    report = Report()
    report.table(
        ["n", "verdict", "certificate_kind", "oscillation"],
        [(r.n, r.verdict, r.certificate_kind, r.oscillation) for r in rows],
    )
    if args.out:
        for r in rows:
            if r.witness is not None:
                save_coloring(
                    args.out.parent / f"{args.out.stem}_witness_n{r.n}.csv", r.witness
                )
    from .report import render_scan_figure

    _emit(args, report, [("verdicts", lambda p: render_scan_figure(rows, p))])
    return 2 if any(r.verdict == "fails" for r in rows) else 0


def cmd_ramsey_strong(args):
    coloring = load_coloring(args.coloring)
    result = strong_copy_search(
        coloring, args.m, args.n, budget=args.budget, seed=args.seed
    )
    report = Report()
    report.add("oscillation", result.oscillation)
    report.add("composition", " ".join(str(p) for p in result.composition))
    for i, mu in enumerate(result.measures):
        body = " + ".join(f"{frac_str(w)}*{format_tree(t)}" for t, w in mu.items())
        report.add(f"measure.{i}", body)
    _emit(args, report)
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _diagnose(path: Path) -> str:
    text = path.read_text()
    first = text.splitlines()[0].strip() if text.strip() else ""
    try:
        if "," in first:
            if first == "tree,weight":
                load_measure(path)
            elif first == "tree,value":
                load_coloring(path)
            else:
                return f"unknown CSV header {first!r}"
        else:
            parse_magma(text)
    except Exception as exc:
        return str(exc)
    return "ok"


def cmd_validate(args):
    report = Report()
    rows = [(str(p), _diagnose(Path(p))) for p in args.paths]
    report.table(["path", "diagnostic"], rows)
    _emit(args, report)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caretlab",
        description="Desk-scale tree algebra, measure convolution, and Ramsey search",
    )
    top = parser.add_subparsers(dest="group", required=True)

    def sub(group, name, func, configure):
        p = group.add_parser(name)
        configure(p)
        _add_common(p)
        p.set_defaults(func=func)

    trees = top.add_parser("trees").add_subparsers(dest="cmd", required=True)
    sub(trees, "enum", cmd_trees_enum, lambda p: p.add_argument("--size", type=int, required=True))
    sub(trees, "stats", cmd_trees_stats, lambda p: p.add_argument("--tree", required=True))

    measure = top.add_parser("measure").add_subparsers(dest="cmd", required=True)
    sub(
        measure,
        "conv",
        cmd_measure_conv,
        lambda p: (
            p.add_argument("--left", required=True),
            p.add_argument("--right", required=True),
        ),
    )
    sub(
        measure,
        "eval",
        cmd_measure_eval,
        lambda p: (
            p.add_argument("--measure", required=True),
            p.add_argument("--coloring", required=True),
        ),
    )
    sub(
        measure,
        "push",
        cmd_measure_push,
        lambda p: (
            p.add_argument("--measure", required=True),
            p.add_argument("--map", default="identity"),
        ),
    )

    magma = top.add_parser("magma").add_subparsers(dest="cmd", required=True)
    sub(
        magma,
        "idem",
        cmd_magma_idem,
        lambda p: (
            p.add_argument("--magma", required=True),
            p.add_argument(
                "--method",
                choices=("auto", "damped", "residual-descent", "exhaustive-support"),
                default="auto",
            ),
        ),
    )
    sub(magma, "classify", cmd_magma_classify, lambda p: p.add_argument("--magma", required=True))
    sub(
        magma,
        "quotient",
        cmd_magma_quotient,
        lambda p: (
            p.add_argument("--label", required=True),
            p.add_argument("--max-size", type=int, default=6),
            p.add_argument("--large-sizes", default=None),
        ),
    )

    hindman = top.add_parser("hindman").add_subparsers(dest="cmd", required=True)
    sub(
        hindman,
        "pairs",
        cmd_hindman_pairs,
        lambda p: (
            p.add_argument("--magma", required=True),
            p.add_argument("--generator", type=int, default=0),
            p.add_argument("--f", default="identity"),
            p.add_argument("--eps", default="1/100"),
            p.add_argument("--count", type=int, default=5),
        ),
    )

    felems = top.add_parser("f").add_subparsers(dest="cmd", required=True)
    sub(
        felems,
        "act",
        cmd_f_act,
        lambda p: (
            p.add_argument("--element", required=True),
            p.add_argument("--tree", required=True),
        ),
    )
    sub(
        felems,
        "compose",
        cmd_f_compose,
        lambda p: (
            p.add_argument("--left", required=True),
            p.add_argument("--right", required=True),
        ),
    )
    sub(
        felems,
        "defect",
        cmd_f_defect,
        lambda p: (
            p.add_argument("--element", required=True),
            p.add_argument("--measure", required=True),
        ),
    )

    stats = top.add_parser("stats").add_subparsers(dest="cmd", required=True)
    sub(
        stats,
        "addresses",
        cmd_stats_addresses,
        lambda p: (
            p.add_argument("--measure", required=True),
            p.add_argument("--sigma", required=True),
            p.add_argument("--varsigma", required=True),
        ),
    )
    sub(
        stats,
        "monotonicity",
        cmd_stats_monotonicity,
        lambda p: p.add_argument("--measure", required=True),
    )

    constructions = top.add_parser("constructions").add_subparsers(dest="cmd", required=True)
    sub(
        constructions,
        "hr",
        cmd_constructions_hr,
        lambda p: (
            p.add_argument("--bits", required=True),
            p.add_argument("--tree"),
            p.add_argument("--measure"),
        ),
    )
    sub(
        constructions,
        "odometer",
        cmd_constructions_odometer,
        lambda p: (
            p.add_argument("--tree", required=True),
            p.add_argument("--precision", type=int, default=4),
            p.add_argument("--bits"),
        ),
    )
    sub(
        constructions,
        "er",
        cmd_constructions_er,
        lambda p: (
            p.add_argument("--tree", required=True),
            p.add_argument("--bits", required=True),
            p.add_argument("--n", type=int, default=0),
        ),
    )

    ramsey = top.add_parser("ramsey").add_subparsers(dest="cmd", required=True)
    sub(
        ramsey,
        "solve",
        cmd_ramsey_solve,
        lambda p: (
            p.add_argument("--coloring", required=True),
            p.add_argument("--m", type=int, required=True),
            p.add_argument("--n", type=int, required=True),
        ),
    )
    sub(
        ramsey,
        "constant",
        cmd_ramsey_constant,
        lambda p: (
            p.add_argument("--coloring", required=True),
            p.add_argument("--m", type=int, required=True),
            p.add_argument("--n", type=int, required=True),
        ),
    )
    sub(
        ramsey,
        "adversary",
        cmd_ramsey_adversary,
        lambda p: (
            p.add_argument("--m", type=int, required=True),
            p.add_argument("--n", type=int, required=True),
        ),
    )
    sub(
        ramsey,
        "scan",
        cmd_ramsey_scan,
        lambda p: (
            p.add_argument("--m", type=int, required=True),
            p.add_argument("--max-n", type=int, required=True),
        ),
    )
    sub(
        ramsey,
        "strong",
        cmd_ramsey_strong,
        lambda p: (
            p.add_argument("--coloring", required=True),
            p.add_argument("--m", type=int, required=True),
            p.add_argument("--n", type=int, required=True),
        ),
    )

    validate = top.add_parser("validate")
    validate.add_argument("paths", nargs="+")
    _add_common(validate)
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._t0 = time.perf_counter()
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
