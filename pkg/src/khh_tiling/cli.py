"""Command line front end.

Subcommands: gen (write a graph), solve (perfect tiling decision as JSON),
regcheck (regularity report as JSON), sweep (threshold experiment to CSV),
fit (crossover + exponent fit from a sweep CSV), plot (success curves).
"""

from __future__ import annotations

import argparse
import json
import sys

from .generate import MODELS, GenSpec, generate
from .graph import format_graph_text, parse_graph_text, read_graph_text
from .harness import (
    TrialConfig,
    crossovers,
    fit_exponent,
    predicted_slope,
    read_sweep_csv,
    sweep,
    write_sweep_csv,
)
from .regularity import check_regular_exact, check_super_regular, refute_regular_sampled
from .tiling import Budget, has_perfect_tiling


def _parse_indices(spec: str) -> list[int]:
    """Comma list with ranges: "0,2,5-8" -> [0, 2, 5, 6, 7, 8]."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo_s, hi_s = part.split("-", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError(f"no indices in {spec!r}")
    return out


def _parse_c_grid(spec: str) -> list[float]:
    """Either "start:stop:ratio" (geometric, inclusive) or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"c-grid must be start:stop:ratio, got {spec!r}")
        start, stop, ratio = (float(x) for x in parts)
        if start <= 0 or stop < start:
            raise ValueError(f"need 0 < start <= stop in c-grid {spec!r}")
        if ratio <= 1.0:
            raise ValueError(f"c-grid ratio must exceed 1, got {ratio}")
        grid = []
        c = start
        while c <= stop * (1.0 + 1e-9):
            grid.append(c)
            c *= ratio
        return grid
    return [float(x) for x in spec.split(",") if x.strip()]


def _parse_mode(spec: str) -> tuple[str, float]:
    if spec == "perfect":
        return "perfect", 0.1
    if spec.startswith("partial:"):
        return "partial", float(spec.split(":", 1)[1])
    raise ValueError(f"mode must be 'perfect' or 'partial:EPS', got {spec!r}")


def _budget_from_args(args) -> Budget | None:
    if args.budget_nodes is None and args.budget_ms is None:
        return None
    return Budget(max_nodes=args.budget_nodes, max_ms=args.budget_ms)


def _read_graph_arg(path: str):
    if path == "-":
        return parse_graph_text(sys.stdin.read())
    return read_graph_text(path)


def _emit_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    spec = GenSpec(
        model=args.model, n=args.n, h=args.h, alpha=args.alpha, p=args.p, seed=args.seed
    )
    inst = generate(spec)
    meta = {
        "model": args.model,
        "n": args.n,
        "h": args.h,
        "alpha": args.alpha,
        "p": args.p,
        "seed": args.seed,
    }
    if inst.base is not None:
        meta["a1_size"] = inst.base.a1_size
        meta["b1_size"] = inst.base.b1_size
    text = format_graph_text(inst.graph, meta)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def _cmd_solve(args) -> int:
    g, meta = _read_graph_arg(args.infile)
    h = args.h
    if h is None:
        h = int(meta.get("h", 1)) if meta else 1
    out = has_perfect_tiling(g, h, budget=_budget_from_args(args))
    tiling_json = None
    if out.tiling is not None:
        tiling_json = [[list(c.a_set), list(c.b_set)] for c in out.tiling.copies]
    payload = {
        "exists": out.exists,
        "undecided": out.undecided,
        "h": h,
        "tiling": tiling_json,
        "nodes_explored": out.nodes_explored,
        "elapsed_ms": out.elapsed * 1000.0,
        "seed_echo": meta.get("seed") if meta else None,
    }
    if out.deficiency is not None:
        payload["deficiency"] = out.deficiency
    _emit_json(payload, args.out)
    return 0


def _cmd_regcheck(args) -> int:
    g, _ = _read_graph_arg(args.infile)
    a = _parse_indices(args.a) if args.a else list(range(g.n_a))
    b = _parse_indices(args.b) if args.b else list(range(g.n_b))
    if args.d is not None:
        report = check_super_regular(
            g, a, b, args.epsilon, args.d,
            mode=args.mode, trials=args.trials, seed=args.seed,
        )
    elif args.mode == "exact":
        report = check_regular_exact(g, a, b, args.epsilon)
    else:
        report = refute_regular_sampled(
            g, a, b, args.epsilon, trials=args.trials, seed=args.seed
        )
    _emit_json(report.to_json(), args.out)
    return 0


def _cmd_sweep(args) -> int:
    mode, epsilon = _parse_mode(args.mode)
    config = TrialConfig(
        model=args.model,
        h=args.h,
        n_list=tuple(args.n),
        c_grid=tuple(_parse_c_grid(args.c_grid)),
        trials=args.trials,
        base_seed=args.seed,
        alpha=args.alpha,
        exponent=args.exponent,
        mode=mode,
        epsilon=epsilon,
        budget=_budget_from_args(args),
    )
    result = sweep(config, workers=args.workers)
    write_sweep_csv(result.rows, args.out)
    summary = {
        "rows": len(result.rows),
        "csv": args.out,
        "crossovers": [{"n": n, "p_half": p} for n, p in result.crossovers],
        "skipped": [{"n": n, "reason": r} for n, r in result.skipped],
        "fit": result.fit,
    }
    _emit_json(summary, None)
    return 0


def _cmd_fit(args) -> int:
    rows = read_sweep_csv(args.infile)
    if not rows:
        raise ValueError("CSV contains no rows")
    models = {r.model for r in rows}
    hs = {r.h for r in rows}
    if len(models) != 1 or len(hs) != 1:
        raise ValueError(f"CSV mixes models {models} or h values {hs}")
    found, skipped = crossovers(rows)
    payload = {
        "per_n_crossover": [{"n": n, "p_half": p} for n, p in found],
        "skipped": [{"n": n, "reason": r} for n, r in skipped],
        "slope": None,
        "intercept": None,
        "residual": None,
        "predicted_slope": predicted_slope(models.pop(), hs.pop()),
    }
    if len(found) >= 3:
        fit = fit_exponent(found)
        payload.update(fit)
    _emit_json(payload, args.out)
    return 0


def _cmd_plot(args) -> int:
    rows = read_sweep_csv(args.infile)
    if not rows:
        raise ValueError("CSV contains no rows")
    by_n: dict[int, list] = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(r)
    for group in by_n.values():
        group.sort(key=lambda r: r.c)
    suffix = args.out.rsplit(".", 1)[-1].lower() if "." in args.out else ""
    if suffix in ("png", "pdf", "svg"):
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 5))
        for n in sorted(by_n):
            group = by_n[n]
            cs = [r.c for r in group]
            rates = [r.success_rate for r in group]
            los = [r.wilson_lo for r in group]
            his = [r.wilson_hi for r in group]
            ax.plot(cs, rates, marker="o", label=f"n={n}")
            ax.fill_between(cs, los, his, alpha=0.2)
        ax.set_xscale("log")
        ax.set_xlabel("c")
        ax.set_ylabel("success fraction")
        ax.set_ylim(-0.05, 1.05)
        ax.axhline(0.5, color="gray", linestyle=":", linewidth=1)
        ax.legend()
        ax.set_title(f"{rows[0].model}, h={rows[0].h}")
        fig.tight_layout()
        fig.savefig(args.out)
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("# success curves; blocks separated by blank lines, one per n\n")
        fh.write("# n c p success_rate wilson_lo wilson_hi\n")
        for i, n in enumerate(sorted(by_n)):
            if i:
                fh.write("\n")
            for r in by_n[n]:
                fh.write(
                    f"{r.n} {r.c!r} {r.p!r} {r.success_rate!r} "
                    f"{r.wilson_lo!r} {r.wilson_hi!r}\n"
                )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="khh",
        description="Bipartite graph generators, K_{h,h} tiling solvers, "
        "regularity checks and threshold experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a graph and write its text form")
    p_gen.add_argument("--model", required=True, choices=MODELS)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--h", type=int, default=1)
    p_gen.add_argument("--alpha", type=float, default=0.0)
    p_gen.add_argument("--p", type=float, default=0.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default="-", help="output path, - for stdout")
    p_gen.set_defaults(func=_cmd_gen)

    p_solve = sub.add_parser("solve", help="decide a perfect tiling, emit JSON")
    p_solve.add_argument("--in", dest="infile", required=True, help="- for stdin")
    p_solve.add_argument(
        "--h", type=int, default=None, help="defaults to the file's meta h, else 1"
    )
    p_solve.add_argument("--budget-nodes", type=int, default=None)
    p_solve.add_argument("--budget-ms", type=float, default=None)
    p_solve.add_argument("--out", default="-")
    p_solve.set_defaults(func=_cmd_solve)

    p_reg = sub.add_parser("regcheck", help="regularity report as JSON")
    p_reg.add_argument("--in", dest="infile", required=True, help="- for stdin")
    p_reg.add_argument("--a", default=None, help="A-subset, e.g. 0,1,4-7 (default all)")
    p_reg.add_argument("--b", default=None, help="B-subset (default all)")
    p_reg.add_argument("--epsilon", type=float, required=True)
    p_reg.add_argument(
        "--d", type=float, default=None, help="density floor; turns on the super check"
    )
    p_reg.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p_reg.add_argument("--trials", type=int, default=1000)
    p_reg.add_argument("--seed", type=int, default=0)
    p_reg.add_argument("--out", default="-")
    p_reg.set_defaults(func=_cmd_regcheck)

    p_sweep = sub.add_parser("sweep", help="threshold experiment, CSV out")
    p_sweep.add_argument("--model", required=True)
    p_sweep.add_argument("--h", type=int, default=1)
    p_sweep.add_argument("--alpha", type=float, default=0.0)
    p_sweep.add_argument(
        "--exponent", type=float, default=None, help="e in p = c*n**(-e)"
    )
    p_sweep.add_argument(
        "--n", type=int, action="append", required=True, help="repeatable"
    )
    p_sweep.add_argument(
        "--c-grid", required=True, help='"start:stop:ratio" or comma list'
    )
    p_sweep.add_argument("--trials", type=int, required=True)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--mode", default="perfect", help="perfect or partial:EPS")
    p_sweep.add_argument("--budget-nodes", type=int, default=None)
    p_sweep.add_argument("--budget-ms", type=float, default=None)
    p_sweep.add_argument("--out", required=True, help="CSV path")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_fit = sub.add_parser("fit", help="crossovers and exponent fit from a sweep CSV")
    p_fit.add_argument("--in", dest="infile", required=True)
    p_fit.add_argument("--out", default="-")
    p_fit.set_defaults(func=_cmd_fit)

    p_plot = sub.add_parser("plot", help="success curves: image or gnuplot data")
    p_plot.add_argument("--in", dest="infile", required=True)
    p_plot.add_argument(
        "--out", required=True, help=".png/.pdf/.svg for an image, else text data"
    )
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
