"""Reproducible experiment harness.

Every subcommand prints an aligned text report to stdout and can
additionally emit machine-readable artifacts: line-delimited JSON records
(--records), two-column CSV figure data (--csv), and rendered figures
(--fig). Records carry the config, seed, and graph hash needed to replay
them; identical invocations produce identical artifacts. Wall-clock
timestamps are therefore off by default and opt-in via --stamp.

Batch items are dispatched to a worker pool (--workers) with per-item
derived seeds and assembled in input order, so the worker count never
changes any result.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from multiprocessing import Pool

import numpy as np

from .errors import CapacityError, ConventionError, GraphFormatError
from .problems import (
    BitString,
    CostFunction,
    ENUM_CAP,
    ISING,
    MAXCUT,
    MIS,
    SK,
    SPIN,
    complete_graph,
    cycle_graph,
    decoupled_graph,
    density_of_states,
    generate_regular_graph,
    random_sk_couplings,
    read_graph,
    read_strings,
    write_graph,
    write_strings,
)
from .statevector import (
    STANDARD,
    QaoaParams,
    expectation,
    qaoa_state,
    success_probability,
    warmstart_params_for_p,
)
from .localsim import LocalEvaluator, tree_fraction
from .optimizer import (
    IMPROVEMENT_TOL,
    improvement_report,
    optimize,
    small_beta_optimize,
    statevector_evaluator,
)
from .warmstart import exact_boltzmann_sample, string_batch
from . import analysis


# ---------------------------------------------------------------------------
# shared plumbing


def _subseed(*parts) -> int:
    """Deterministic per-task integer seed from a flat tuple of integers."""
    return int(np.random.default_rng(tuple(int(p) for p in parts))
               .integers(1 << 62))


def _pmap(fn, items, workers):
    """Map preserving input order; workers > 1 uses a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with Pool(processes=workers) as pool:
        return list(pool.imap(fn, items))


def _py(obj):
    """Recursively convert results into JSON-serializable builtins."""
    if isinstance(obj, dict):
        return {str(k): _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, BitString):
        return obj.to_line()
    if isinstance(obj, QaoaParams):
        return {"pattern": obj.pattern, "angles": [float(a) for a in obj.flat()]}
    return obj


class RecordWriter:
    """Line-delimited JSON records; a no-op when no path was requested."""

    def __init__(self, path, stamp=False):
        self.fh = open(path, "w") if path else None
        self.stamp = stamp

    def write(self, kind, *, graph=None, generator=None, seed=None,
              config=None, result=None):
        if self.fh is None:
            return
        stamps = None
        if self.stamp:
            stamps = {"emitted_utc": datetime.now(timezone.utc)
                      .isoformat(timespec="seconds")}
        rec = {"kind": kind, "graph": graph, "generator": generator,
               "seed": seed, "config": config, "result": _py(result),
               "stamps": stamps}
        self.fh.write(json.dumps(rec) + "\n")

    def close(self):
        if self.fh is not None:
            self.fh.close()


def _graph_ref(path, graph):
    digest = hashlib.sha256(graph.serialize().encode()).hexdigest()
    return {"path": path, "sha256": digest}


def _print_table(headers, rows):
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    for k, row in enumerate(cells):
        print("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        if k == 0:
            print("  ".join("-" * w for w in widths))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _parse_depth(text):
    if "/" in text:
        num, den = text.split("/")
        return int(num) / int(den)
    return float(text)


def _fmt_depth(p):
    twice = int(round(2 * p))
    return str(twice // 2) if twice % 2 == 0 else f"{twice}/2"


def _parse_angles(text):
    return np.array([float(tok) for tok in text.split(",")])


def _as_spins(w):
    return w if w.convention == SPIN else BitString.spins(w.as_spins())


_COST_KINDS = {"maxcut": MAXCUT, "ising": ISING, "mis": MIS, "sk": SK}


# ---------------------------------------------------------------------------
# worker tasks (module level so the pool can pickle them)


def _opt_task(item):
    graph, kind, w, p, restarts, seed, backend = item
    cost = CostFunction(kind, graph)
    return improvement_report(graph, cost, w, p, restarts=restarts,
                              seed=seed, backend=backend)


def _deviation_task(item):
    n, d, k, t, r, seed = item
    graph = generate_regular_graph(n, d, seed=(seed, n, 0))
    cost = CostFunction(MAXCUT, graph)
    strings = string_batch(graph, cost, "sa", k, seed=(seed, n, 1), t=t)
    dev = analysis.sample_deviation(strings, graph, r)
    return float(dev), _graph_ref(None, graph)["sha256"]


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_graph(args):
    if args.kind == "regular":
        graph = generate_regular_graph(args.n, args.degree, seed=args.seed)
        params = {"n": args.n, "degree": args.degree}
    elif args.kind == "decoupled":
        graph = decoupled_graph(args.edges)
        params = {"edges": args.edges}
    elif args.kind == "complete":
        graph = complete_graph(args.n)
        params = {"n": args.n}
    elif args.kind == "cycle":
        graph = cycle_graph(args.n)
        params = {"n": args.n}
    else:  # sk
        graph = complete_graph(args.n, random_sk_couplings(args.n, seed=args.seed))
        params = {"n": args.n}
    write_graph(graph, args.out)
    ref = _graph_ref(args.out, graph)
    print(f"{args.kind} graph: n={graph.n} m={graph.m} -> {args.out}")
    print(f"sha256: {ref['sha256']}")

    rec = RecordWriter(args.records, args.stamp)
    rec.write("gen-graph", graph=ref,
              generator={"kind": args.kind, **params},
              seed=args.seed, config={"out": args.out},
              result={"n": graph.n, "m": graph.m})
    rec.close()
    return 0


def cmd_warmstart(args):
    graph = read_graph(args.graph)
    ref = _graph_ref(args.graph, graph)
    kind = MIS if args.method == "greedy-mis" else MAXCUT
    cost = CostFunction(kind, graph)
    params = {}
    if args.method == "sa":
        params["t"] = args.temperature
        if args.updates is not None:
            params["updates"] = args.updates
    elif args.method == "gw":
        if args.rank is not None:
            params["rank"] = args.rank
        if args.roundings is not None:
            params["roundings"] = args.roundings
    strings = string_batch(graph, cost, args.method, args.count,
                           seed=args.seed, **params)
    values = [cost.value(s) for s in strings]

    if args.out:
        write_strings(strings, args.out,
                      meta={"graph": args.graph, "method": args.method,
                            "seed": args.seed, "cost": kind})
        print(f"wrote {len(strings)} strings -> {args.out}")
    rows = [(i, f"{v:.0f}", f"{v / graph.m:.4f}" if kind == MAXCUT else "")
            for i, v in enumerate(values)]
    _print_table(["string", "value", "fraction"], rows)
    print(f"mean value {np.mean(values):.4f} over {len(strings)} strings "
          f"({args.method}, seed {args.seed})")

    rec = RecordWriter(args.records, args.stamp)
    config = {"method": args.method, "count": args.count, **params}
    for i, (w, v) in enumerate(zip(strings, values)):
        rec.write("warmstart", graph=ref,
                  generator={"method": args.method, **params},
                  seed=args.seed, config=config,
                  result={"index": i, "string": w, "value": float(v)})
    rec.close()
    return 0


def _standard_evaluator(cost):
    def ev(angles):
        params = QaoaParams.from_flat(STANDARD, np.asarray(angles))
        return expectation(qaoa_state(cost, params), cost)
    return ev


def cmd_qaoa(args):
    graph = read_graph(args.graph)
    ref = _graph_ref(args.graph, graph)
    cost = CostFunction(_COST_KINDS[args.cost], graph)
    p = _parse_depth(args.p)
    rec = RecordWriter(args.records, args.stamp)
    config = {"mode": args.mode, "backend": args.backend, "p": p,
              "cost": args.cost, "restarts": args.restarts}

    if args.mode == "standard":
        if args.backend != "statevector":
            raise ValueError("standard mode runs on the statevector backend "
                             "(the local evaluator is warm-start only)")
        if p != int(p) or p < 1:
            raise ValueError("standard mode needs integer depth p >= 1")
        num_angles = 2 * int(p)
        if args.angles is not None:
            flat = _parse_angles(args.angles)
            if flat.size != num_angles:
                raise ValueError(f"expected {num_angles} angles, got {flat.size}")
            state = qaoa_state(cost, QaoaParams.from_flat(STANDARD, flat))
            value = expectation(state, cost)
            threshold = (args.success_threshold
                         if args.success_threshold is not None
                         else float(cost.cost_table().max()))
            prob = success_probability(state, cost, threshold)
            print(f"standard p={int(p)} fixed angles: expectation {value:.9f}")
            print(f"success probability (cost >= {threshold:g}): {prob:.9f}")
            rec.write("qaoa", graph=ref, seed=args.seed, config=config,
                      result={"angles": list(flat), "expectation": value,
                              "success_threshold": threshold,
                              "success_probability": prob})
        else:
            res = optimize(_standard_evaluator(cost), num_angles,
                           restarts=args.restarts, seed=args.seed)
            print(f"standard p={int(p)}: best expectation {res.best_value:.9f} "
                  f"(zero-angle value {res.initial_cost:.9f})")
            rec.write("qaoa", graph=ref, seed=args.seed, config=config,
                      result={"best_value": res.best_value,
                              "initial": res.initial_cost,
                              "improved": res.improved,
                              "params": res.best_params})
        rec.close()
        return 0

    # warm mode
    if not args.strings:
        raise ValueError("warm mode needs --strings (a warm-start batch file)")
    strings, _meta = read_strings(args.strings)
    k, _ = warmstart_params_for_p(p)  # validates half-integral depth
    if args.angles is not None:
        flat = _parse_angles(args.angles)
        if flat.size != 2 * k - 1:
            raise ValueError(f"expected {2 * k - 1} angles at p="
                             f"{_fmt_depth(p)}, got {flat.size}")
        rows = []
        for i, w in enumerate(strings):
            if args.backend == "localsim":
                value = LocalEvaluator(graph, cost, w, p)(flat)
            else:
                value = statevector_evaluator(cost, w, p)(flat)
            initial = float(cost.value(w))
            rows.append((i, f"{initial:.4f}", f"{value:.9f}"))
            rec.write("qaoa", graph=ref, seed=args.seed, config=config,
                      result={"index": i, "string": w, "initial": initial,
                              "angles": list(flat), "value": float(value)})
        _print_table(["string", "C(w)", "value"], rows)
        rec.close()
        return 0

    items = [(graph, cost.kind, w, p, args.restarts,
              _subseed(args.seed, 11, i), args.backend)
             for i, w in enumerate(strings)]
    reports = _pmap(_opt_task, items, args.workers)
    rows = []
    improved = 0
    for i, (w, res) in enumerate(zip(strings, reports)):
        gain = res.best_value - res.initial_cost
        improved += bool(res.improved)
        rows.append((i, f"{res.initial_cost:.4f}", f"{res.best_value:.9f}",
                     f"{gain:.3e}", "yes" if res.improved else "no"))
        rec.write("qaoa", graph=ref, seed=args.seed, config=config,
                  result={"index": i, "string": w,
                          "initial": res.initial_cost,
                          "best_value": res.best_value,
                          "gain": gain, "improved": res.improved,
                          "params": res.best_params})
    _print_table(["string", "C(w)", "best", "gain", "improved"], rows)
    print(f"improved {improved}/{len(strings)} strings at p={_fmt_depth(p)} "
          f"(tolerance {IMPROVEMENT_TOL:g})")
    rec.close()
    return 0


def cmd_sweep_table(args):
    graph = generate_regular_graph(args.n, args.degree, seed=(args.seed, 0))
    ref = _graph_ref(None, graph)
    cost = CostFunction(MAXCUT, graph)
    params = {"t": args.temperature} if args.method == "sa" else {}
    strings = string_batch(graph, cost, args.method, args.count,
                           seed=(args.seed, 1), **params)
    depths = [_parse_depth(tok) for tok in args.depths.split(",")]

    rec = RecordWriter(args.records, args.stamp)
    config = {"n": args.n, "degree": args.degree, "method": args.method,
              "count": args.count, "depths": depths,
              "restarts": args.restarts, "backend": args.backend}
    table_rows = []
    improved_counts = []
    for pi, p in enumerate(depths):
        items = [(graph, MAXCUT, w, p, args.restarts,
                  _subseed(args.seed, 2, pi, si), args.backend)
                 for si, w in enumerate(strings)]
        reports = _pmap(_opt_task, items, args.workers)
        gains = np.array([r.best_value - r.initial_cost for r in reports])
        improved = sum(bool(r.improved) for r in reports)
        improved_counts.append(improved)
        table_rows.append((
            _fmt_depth(p),
            f"{improved}/{len(strings)}",
            f"{np.mean([r.initial_cost for r in reports]):.4f}",
            f"{np.mean([r.best_value for r in reports]):.4f}",
            f"{gains.max():.3e}",
        ))
        for si, (w, r) in enumerate(zip(strings, reports)):
            rec.write("sweep-table", graph=ref,
                      generator={"kind": "regular", "n": args.n,
                                 "degree": args.degree},
                      seed=args.seed, config=config,
                      result={"p": p, "index": si, "string": w,
                              "initial": r.initial_cost,
                              "best_value": r.best_value,
                              "improved": r.improved,
                              "params": r.best_params})
    print(f"{args.method} strings on a seeded {args.n}-vertex "
          f"{args.degree}-regular graph (m={graph.m}):")
    _print_table(["p", "improved", "mean C(w)", "mean best", "largest gain"],
                 table_rows)
    if args.csv:
        _write_csv(args.csv, ("p", "improved"),
                   [(p, c) for p, c in zip(depths, improved_counts)])
    if args.fig:
        from .figures import sweep_figure
        sweep_figure(depths, improved_counts,
                     [len(strings)] * len(depths), args.fig)
        print(f"figure -> {args.fig}")
    rec.close()
    return 0


def cmd_thermality(args):
    rec = RecordWriter(args.records, args.stamp)
    if args.sweep:
        ns = [int(tok) for tok in args.sweep.split(",")]
        radius = args.radius if args.radius is not None else 2
        items = [(n, 3, args.samples, args.temperature, radius, args.seed)
                 for n in ns]
        out = _pmap(_deviation_task, items, args.workers)
        devs = [dev for dev, _ in out]
        rows = [(n, f"{dev:.6e}") for n, dev in zip(ns, devs)]
        _print_table(["n", "E"], rows)
        fit = None
        if args.fit:
            fit = analysis.fit_power_law(ns, devs)
            print(f"fit E = c*n^(-1/2): c = {fit.amplitude:.6g}")
            print(f"free-slope fit: exponent = {fit.free_slope:.4f}, "
                  f"amplitude = {fit.free_amplitude:.6g}")
        config = {"sweep": ns, "samples": args.samples,
                  "temperature": args.temperature, "radius": radius,
                  "fit": bool(args.fit)}
        for (n, dev, (_, sha)) in zip(ns, devs, out):
            rec.write("thermality", graph={"path": None, "sha256": sha},
                      generator={"kind": "regular", "n": n, "degree": 3},
                      seed=args.seed, config=config,
                      result={"n": n, "deviation": dev})
        if fit is not None:
            rec.write("thermality", seed=args.seed, config=config,
                      result={"fit_amplitude": fit.amplitude,
                              "free_slope": fit.free_slope,
                              "free_amplitude": fit.free_amplitude})
        if args.csv:
            _write_csv(args.csv, ("n", "E"),
                       [(n, repr(dev)) for n, dev in zip(ns, devs)])
        if args.fig:
            from .figures import scaling_figure
            scaling_figure(ns, devs, fit, args.fig)
            print(f"figure -> {args.fig}")
        rec.close()
        return 0

    if not args.graph:
        raise ValueError("exact mode needs --graph (or pass --sweep)")
    graph = read_graph(args.graph)
    ref = _graph_ref(args.graph, graph)
    radius = args.radius if args.radius is not None else 1
    cost = CostFunction(MAXCUT, graph)
    beta = 1.0 / args.temperature
    samples = exact_boltzmann_sample(graph, cost, beta, seed=args.seed,
                                     count=args.samples)
    delta = 1.0 - tree_fraction(graph, radius)
    config = {"samples": args.samples, "temperature": args.temperature,
              "radius": radius}
    rows = []
    for i, w in enumerate(samples):
        value = float(cost.value(w))
        try:
            eps = analysis.thermality_coefficient(graph, w, radius)
            bound = value / graph.m + 2.0 * eps + 4.0 * delta
            eps_txt, bound_txt = f"{eps:.6f}", f"{bound:.6f}"
        except ValueError:
            eps = bound = None
            eps_txt = bound_txt = "n/a"
        rows.append((i, f"{value:.0f}", f"{value / graph.m:.4f}",
                     eps_txt, bound_txt))
        rec.write("thermality", graph=ref, seed=args.seed, config=config,
                  result={"index": i, "string": w, "value": value,
                          "eps": eps, "bound": bound, "delta": delta})
    _print_table(["sample", "C(w)", "c(w)", "eps_w", "bound"], rows)
    print(f"non-tree fraction delta = {delta:.6f} at radius {radius}")
    rec.close()
    return 0


def cmd_small_angle(args):
    graph = read_graph(args.graph)
    ref = _graph_ref(args.graph, graph)
    strings, _meta = read_strings(args.strings)
    rec = RecordWriter(args.records, args.stamp)
    config = {"verify": bool(args.verify), "beta_max": args.beta_max}
    cost_z = CostFunction(ISING, graph)
    rows = []
    for i, w in enumerate(strings):
        rep = analysis.small_angle_condition(graph, w)
        row = [i, rep.s1, rep.s3cube, "yes" if rep.condition else "no"]
        result = {"index": i, "string": w, "s1": rep.s1,
                  "s3cube": rep.s3cube, "condition": rep.condition}
        if args.verify:
            ws = _as_spins(w)
            best = small_beta_optimize(graph, cost_z, ws,
                                       beta_max=args.beta_max)
            gain = best - float(cost_z.value(ws))
            measured = gain > IMPROVEMENT_TOL
            row += [f"{gain:.3e}", "yes" if measured == rep.condition else "NO"]
            result.update({"gain": gain, "measured": measured,
                           "agree": measured == rep.condition})
        rows.append(tuple(row))
        rec.write("small-angle", graph=ref, seed=args.seed, config=config,
                  result=result)
    headers = ["string", "S1", "S3cube", "condition"]
    if args.verify:
        headers += ["small-beta gain", "agree"]
    _print_table(headers, rows)
    rec.close()
    return 0


def cmd_magic_angle(args):
    rec = RecordWriter(args.records, args.stamp)
    config = {"n": args.n, "count": args.count}
    rows = []
    cats = 0
    for i in range(args.count):
        couplings = random_sk_couplings(args.n, seed=(args.seed, i, 0))
        graph = complete_graph(args.n, couplings)
        cost = CostFunction(SK, graph)
        bits = np.random.default_rng((args.seed, i, 1)).integers(0, 2, args.n)
        w = BitString.spins(1 - 2 * bits)
        res = analysis.magic_angle_state(cost, w)
        cats += bool(res.cat)
        rows.append((i, w.to_line(), res.wprime.to_line(),
                     f"{res.probabilities[0]:.9f}",
                     f"{res.probabilities[1]:.9f}",
                     f"{res.leak:.2e}", "yes" if res.cat else "NO"))
        rec.write("magic-angle", graph=_graph_ref(None, graph),
                  generator={"kind": "sk", "n": args.n},
                  seed=args.seed, config=config,
                  result={"index": i, "string": w, "wprime": res.wprime,
                          "p_wprime": res.probabilities[0],
                          "p_antipode": res.probabilities[1],
                          "leak": res.leak, "cat": res.cat})
    _print_table(["trial", "w", "w'", "P(w')", "P(-w')", "leak", "cat"], rows)
    print(f"cat states: {cats}/{args.count}")
    rec.close()
    return 0


def cmd_bounds(args):
    rec = RecordWriter(args.records, args.stamp)
    if args.which == "compression":
        p = _parse_depth(args.depth)
        if args.graph:
            if args.window is None or args.target is None:
                raise ValueError("graph-derived counts need --window lo,hi "
                                 "and --target")
            graph = read_graph(args.graph)
            ref = _graph_ref(args.graph, graph)
            cost = CostFunction(_COST_KINDS[args.cost], graph)
            dos = density_of_states(cost)
            lo, hi = (float(tok) for tok in args.window.split(","))
            d0 = sum(c for v, c in dos.items() if lo <= v <= hi)
            d1 = sum(c for v, c in dos.items() if v >= args.target)
            n = graph.n
            if d0 < 1:
                raise ValueError("starting window contains no strings")
        else:
            if args.d0 is None or args.d1 is None or args.n is None:
                raise ValueError("need --d0, --d1 and --n (or --graph with "
                                 "--window/--target)")
            d0, d1, n, ref = args.d0, args.d1, args.n, None
        inputs = analysis.CompressionInputs(d0, d1, p, n, args.delta)
        eps = analysis.compression_epsilon(inputs)
        mbound = analysis.improvable_count_bound(d1, args.delta, p, n)
        eps_flag = "  (vacuous: >= 1)" if eps >= 1.0 else ""
        m_flag = "  (vacuous: >= d0)" if mbound >= d0 else ""
        print(f"d0 = {d0}, d1 = {d1}, p = {_fmt_depth(p)}, n = {n}, "
              f"delta = {args.delta:g}")
        print(f"epsilon = {eps:.6e}{eps_flag}")
        print(f"improvable strings M <= {mbound:.6e}{m_flag}")
        rec.write("bounds", graph=ref, seed=args.seed,
                  config={"which": "compression", "p": p, "delta": args.delta},
                  result={"d0": d0, "d1": d1, "n": n, "epsilon": eps,
                          "epsilon_vacuous": eps >= 1.0, "m_bound": mbound,
                          "m_vacuous": bool(mbound >= d0)})
        rec.close()
        return 0

    # thermal bound for supplied strings
    if not args.graph or not args.strings:
        raise ValueError("thermal bound needs --graph and --strings")
    graph = read_graph(args.graph)
    ref = _graph_ref(args.graph, graph)
    strings, _meta = read_strings(args.strings)
    radius = args.radius if args.radius is not None else 1
    cost = CostFunction(MAXCUT, graph)
    delta = 1.0 - tree_fraction(graph, radius)
    rows = []
    for i, w in enumerate(strings):
        value = float(cost.value(w))
        try:
            bound = analysis.thermal_bound(graph, w, radius)
            eps = (bound - value / graph.m - 4.0 * delta) / 2.0
            rows.append((i, f"{value / graph.m:.4f}", f"{eps:.6f}",
                         f"{bound:.6f}"))
            result = {"index": i, "string": w, "c_w": value / graph.m,
                      "eps": eps, "delta": delta, "bound": bound}
        except ValueError as exc:
            rows.append((i, f"{value / graph.m:.4f}", "n/a", "n/a"))
            result = {"index": i, "string": w, "c_w": value / graph.m,
                      "eps": None, "delta": delta, "bound": None,
                      "note": str(exc)}
        rec.write("bounds", graph=ref, seed=args.seed,
                  config={"which": "thermal", "radius": radius},
                  result=result)
    _print_table(["string", "c(w)", "eps_w", "bound"], rows)
    print(f"non-tree fraction delta = {delta:.6f} at radius {radius}")
    rec.close()
    return 0


def cmd_density_of_states(args):
    graph = read_graph(args.graph)
    ref = _graph_ref(args.graph, graph)
    cost = CostFunction(_COST_KINDS[args.cost], graph)
    dos = density_of_states(cost)
    values = sorted(dos)
    rows = [(v, dos[v]) for v in values]
    _print_table(["value", "count"], rows)
    print(f"{len(values)} distinct values over 2^{graph.n} strings")
    if args.csv:
        _write_csv(args.csv, ("value", "count"), rows)
    if args.fig:
        from .figures import dos_figure
        dos_figure(values, [dos[v] for v in values], args.fig)
        print(f"figure -> {args.fig}")
    rec = RecordWriter(args.records, args.stamp)
    rec.write("density-of-states", graph=ref, seed=args.seed,
              config={"cost": args.cost},
              result={"histogram": {v: dos[v] for v in values}})
    rec.close()
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="global seed; per-task streams are derived")
    common.add_argument("--records", metavar="PATH",
                        help="write line-delimited JSON records here")
    common.add_argument("--workers", type=int, default=1,
                        help="process pool size for batch items")
    common.add_argument("--stamp", action="store_true",
                        help="include wall-clock timestamps in records "
                             "(breaks artifact hash-equality)")

    parser = argparse.ArgumentParser(
        prog="qaoalab",
        description="Warm-start QAOA laboratory: generate instances, produce "
                    "warm starts, optimize circuits, and evaluate the "
                    "conditions and bounds that explain when good strings "
                    "cannot improve.")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("gen-graph", parents=[common],
                       help="generate a graph and write its edge list")
    q.add_argument("--kind", choices=["regular", "decoupled", "complete",
                                      "cycle", "sk"], default="regular")
    q.add_argument("--n", type=int, default=12)
    q.add_argument("--degree", type=int, default=3)
    q.add_argument("--edges", type=int, default=3,
                   help="edge count for the decoupled graph")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_gen_graph)

    q = sub.add_parser("warmstart", parents=[common],
                       help="produce warm-start strings for a graph")
    q.add_argument("--graph", required=True)
    q.add_argument("--method", choices=["sa", "gw", "greedy-mis"],
                   default="sa")
    q.add_argument("--count", type=int, default=10)
    q.add_argument("--temperature", type=float, default=1.75)
    q.add_argument("--updates", type=int, default=None,
                   help="Metropolis updates (default 1000 per site)")
    q.add_argument("--rank", type=int, default=None)
    q.add_argument("--roundings", type=int, default=None)
    q.add_argument("--out", help="write the string batch here")
    q.set_defaults(func=cmd_warmstart)

    q = sub.add_parser("qaoa", parents=[common],
                       help="optimize or evaluate a circuit")
    q.add_argument("--graph", required=True)
    q.add_argument("--mode", choices=["standard", "warm"], default="warm")
    q.add_argument("--backend", choices=["statevector", "localsim"],
                   default=None)
    q.add_argument("-p", default="3/2",
                   help="depth: integer for standard, half-integral "
                        "(e.g. 3/2 or 1.5) for warm")
    q.add_argument("--cost", choices=sorted(_COST_KINDS), default="maxcut")
    q.add_argument("--strings", help="warm-start batch file (warm mode)")
    q.add_argument("--angles", help="comma-separated flat angles to evaluate "
                                    "instead of optimizing")
    q.add_argument("--restarts", type=int, default=40)
    q.add_argument("--success-threshold", type=float, default=None)
    q.set_defaults(func=cmd_qaoa)

    q = sub.add_parser("sweep-table", parents=[common],
                       help="improvement counts per depth on a seeded instance")
    q.add_argument("--n", type=int, default=12)
    q.add_argument("--degree", type=int, default=3)
    q.add_argument("--method", choices=["sa", "gw"], default="sa")
    q.add_argument("--count", type=int, default=20)
    q.add_argument("--temperature", type=float, default=1.75)
    q.add_argument("--depths", default="3/2,5/2")
    q.add_argument("--restarts", type=int, default=40)
    q.add_argument("--backend", choices=["statevector", "localsim"],
                   default="localsim")
    q.add_argument("--csv", help="write (p, improved) rows here")
    q.add_argument("--fig", help="render the improvement figure here")
    q.set_defaults(func=cmd_sweep_table)

    q = sub.add_parser("thermality", parents=[common],
                       help="thermality coefficients (exact) or the sample-"
                            "deviation sweep")
    q.add_argument("--graph", help="graph file (exact mode)")
    q.add_argument("--samples", type=int, default=10)
    q.add_argument("--temperature", type=float, default=1.75)
    q.add_argument("--radius", type=int, default=None,
                   help="neighborhood radius (default: 1 exact, 2 sweep)")
    q.add_argument("--sweep", help="comma-separated n values: compute E per n")
    q.add_argument("--fit", action="store_true",
                   help="fit E = c*n^(-1/2) plus a free-slope diagnostic")
    q.add_argument("--csv", help="write (n, E) rows here")
    q.add_argument("--fig", help="render the scaling figure here")
    q.set_defaults(func=cmd_thermality)

    q = sub.add_parser("small-angle", parents=[common],
                       help="small-angle improvement condition per string")
    q.add_argument("--graph", required=True)
    q.add_argument("--strings", required=True)
    q.add_argument("--verify", action="store_true",
                   help="also run the confined small-angle optimization")
    q.add_argument("--beta-max", type=float, default=0.05)
    q.set_defaults(func=cmd_small_angle)

    q = sub.add_parser("magic-angle", parents=[common],
                       help="cat states from random couplings and strings")
    q.add_argument("--n", type=int, default=6)
    q.add_argument("--count", type=int, default=10)
    q.set_defaults(func=cmd_magic_angle)

    q = sub.add_parser("bounds", parents=[common],
                       help="compression counting bound or thermal bound")
    q.add_argument("which", choices=["compression", "thermal"])
    q.add_argument("--graph")
    q.add_argument("--cost", choices=sorted(_COST_KINDS), default="maxcut")
    q.add_argument("--d0", type=int, default=None)
    q.add_argument("--d1", type=int, default=None)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--depth", default="1")
    q.add_argument("--delta", type=float, default=1.0)
    q.add_argument("--window", default=None,
                   help="lo,hi cost window defining d0 (with --graph)")
    q.add_argument("--target", type=float, default=None,
                   help="target cost defining d1 (with --graph)")
    q.add_argument("--strings", help="warm starts for the thermal bound")
    q.add_argument("--radius", type=int, default=None)
    q.set_defaults(func=cmd_bounds)

    q = sub.add_parser("density-of-states", parents=[common],
                       help="exact cost histogram by enumeration")
    q.add_argument("--graph", required=True)
    q.add_argument("--cost", choices=sorted(_COST_KINDS), default="maxcut")
    q.add_argument("--csv", help="write (value, count) rows here")
    q.add_argument("--fig", help="render the histogram here")
    q.set_defaults(func=cmd_density_of_states)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "backend", None) is None and args.command == "qaoa":
        args.backend = ("statevector" if args.mode == "standard"
                        else "localsim")
    try:
        return args.func(args)
    except (CapacityError, ConventionError, GraphFormatError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
