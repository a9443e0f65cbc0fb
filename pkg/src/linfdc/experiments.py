"""Experiment pipelines behind ``linfdc run``.

Each experiment takes a parsed spec plus run options and returns a JSON-ready
dict.  Reports are deterministic: everything except the ``timestamp`` field
depends only on the group spec file and the options.  Certificates and trees are
written as separate files under ``out`` and referenced by file name.
"""

from __future__ import annotations

import datetime
import itertools
import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .algebra import GroupElement, Poly, RatFunc
from .config import GroupSpec, format_spec
from .decomp import (
    asdim_to_fdc,
    certificate_to_json,
    components_certificate,
    equivariant_lift,
    equivariant_to_json,
    export_dot,
    greedy_asdim,
    quotient_base_tree,
    quotient_family,
    tree_to_json,
    verify_asdim,
    verify_equivariant,
    verify_fdc,
)
from .norms import length, metricize, norm_axiom_check
from .spaces import (
    BallCapExceeded,
    FinSpace,
    GroupAction,
    MetricFamily,
    ball_space,
    distance_matrix,
    quotient_map,
    r_components,
    saturate,
    word_ball,
)
from .structure import Candidate, hirsch_rank, solvable_bound_probe, th_factorize, triangularize_unipotent

__all__ = ["EXPERIMENTS", "RunOptions", "run_experiment", "workers", "EXIT_PASS", "EXIT_FAIL", "EXIT_BUDGET"]

EXIT_PASS, EXIT_FAIL, EXIT_BUDGET = 0, 1, 2
WORKERS_ENV = "LINFDC_WORKERS"


@dataclass
class RunOptions:
    radius: int | None = None
    scales: list[int] | None = None
    cap: int | None = None
    seed: int = 0
    out: Path | None = None
    files: list[str] = field(default_factory=list)

    def write(self, name: str, text: str) -> str:
        if self.out is None:
            return name
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)
        self.files.append(name)
        return name


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: list) -> list:
    """Order-preserving map, fanned out to a process pool when configured."""
    n = workers()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))


def _num(x):
    if isinstance(x, (np.integer, np.floating)):
        x = x.item()
    if isinstance(x, float):
        return "INF" if x == float("inf") else (int(x) if x.is_integer() else x)
    return x


def _window(spec: GroupSpec, opts: RunOptions) -> tuple[FinSpace, list[GroupElement]]:
    return ball_space(spec.gens, _radius(spec, opts), spec.profile, _cap(spec, opts))


def _radius(spec, opts):
    return spec.radius if opts.radius is None else opts.radius


def _cap(spec, opts):
    return spec.cap if opts.cap is None else opts.cap


def _scales(spec, opts):
    return list(spec.scales if opts.scales is None else opts.scales)


def _saturated_space(job) -> tuple[list[GroupElement], FinSpace, GroupAction]:
    elements, F, profile, cap = job
    W = saturate(elements, F)
    if len(W) > cap:
        raise BallCapExceeded(f"saturated window exceeds cap of {cap} points")
    space = FinSpace(range(len(W)), distance_matrix(W, profile), check=False)
    return W, space, GroupAction.left_multiplication(space, W, F)


def _quotient_windows(spec, opts, elements):
    jobs = [(elements, F, spec.profile, _cap(spec, opts)) for _, F in spec.subgroups]
    return _pmap(_saturated_space, jobs)


# ---------------------------------------------------------------------------


def exp_balls(spec: GroupSpec, opts: RunOptions) -> dict:
    R = _radius(spec, opts)
    sizes = [len(word_ball(spec.gens, k, _cap(spec, opts))) for k in range(R + 1)]
    space, elements = _window(spec, opts)
    lengths = [length(g, spec.profile).units for g in elements]
    per_norm = [max(u[i] for u in lengths) for i in range(len(spec.norms))]
    triangle = space.triangle_violation()
    return {
        "pass": triangle is None,
        "sizes_by_radius": sizes,
        "window_size": len(space),
        "diameter": _num(space.diameter()),
        "max_length_per_norm": dict(zip(spec.profile.labels(), per_norm)),
        "distinct_distances": [_num(x) for x in np.unique(space.dist)],
        "triangle_violation": None if triangle is None else list(triangle),
    }


def _random_ratfunc(rng: random.Random, p: int, deg: int) -> RatFunc:
    num = Poly([rng.randrange(p) for _ in range(rng.randint(0, deg) + 1)], p)
    den = Poly([rng.randrange(p) for _ in range(rng.randint(0, deg) + 1)], p)
    if den.is_zero():
        den = Poly([1], p)
    return RatFunc(num, den)


def exp_axioms(spec: GroupSpec, opts: RunOptions) -> dict:
    rng = random.Random(opts.seed)
    space, elements = _window(spec, opts)
    prof = spec.profile
    lens = [length(g, prof) for g in elements]
    identity_ok = lens[0].scalar == 0
    symmetric = all(length(g.inverse(), prof) == lg for g, lg in zip(elements, lens))
    pairs = list(itertools.product(range(len(elements)), repeat=2))
    if len(pairs) > 20000:
        pairs = rng.sample(pairs, 20000)
    sub_fail = None
    for i, j in pairs:
        lij = length(elements[i] * elements[j], prof)
        if any(a > b + c for a, b, c in zip(lij.units, lens[i].units, lens[j].units)):
            sub_fail = [i, j]
            break
    inv_fail = None
    for _ in range(200):
        k, i, j = (rng.randrange(len(elements)) for _ in range(3))
        if space.d(i, j) != length((elements[k] * elements[i]).inverse() * (elements[k] * elements[j]), prof).scalar:
            inv_fail = [k, i, j]
            break
    norms = []
    entries = sorted({x for g in elements for x in g.entries()}, key=RatFunc.sort_key)
    for nspec in spec.norms:
        samples = [(_random_ratfunc(rng, spec.p, 4), _random_ratfunc(rng, spec.p, 4)) for _ in range(200)]
        samples += [(a, b) for a, b in itertools.combinations(entries[:40], 2)]
        rep = norm_axiom_check(nspec, samples)
        norms.append({"norm": nspec.label(), "checked": rep.checked, "violation": rep.violation})
    metric = FinSpace(space.points, metricize(space.dist), check=False)
    results = {
        "window_size": len(elements),
        "identity_length_zero": identity_ok,
        "inverse_symmetric": symmetric,
        "subadditivity_pairs": len(pairs),
        "subadditivity_violation": sub_fail,
        "left_invariance_violation": inv_fail,
        "triangle_violation": space.triangle_violation(),
        "metricized_triangle_violation": metric.triangle_violation(),
        "norm_axioms": norms,
    }
    results["pass"] = (
        identity_ok
        and symmetric
        and sub_fail is None
        and inv_fail is None
        and results["triangle_violation"] is None
        and results["metricized_triangle_violation"] is None
        and all(n["violation"] is None for n in norms)
    )
    return results


def exp_quotient_family(spec: GroupSpec, opts: RunOptions) -> dict:
    space, elements = _window(spec, opts)
    scales = _scales(spec, opts)
    rows = []
    ok = True
    for (name, F), (W, total, act) in zip(spec.subgroups, _quotient_windows(spec, opts, elements)):
        q, _ = quotient_map(total, act)
        per = []
        for R in scales:
            dt = _num(r_components(total, R).max_diameter)
            dq = _num(r_components(q, R).max_diameter)
            good = r_components(q, R).max_diameter <= r_components(total, R).max_diameter
            ok &= bool(good)
            per.append({"R": R, "total": dt, "quotient": dq, "quotient_le_total": bool(good)})
        rows.append({"subgroup": name, "order": len(F), "window": len(W), "orbits": len(q), "scales": per})
    uniform = {
        str(R): _num(max((row["scales"][k]["quotient"] for row in rows), default=0)) for k, R in enumerate(scales)
    }
    return {"pass": ok, "subgroups": rows, "max_quotient_diameter_by_scale": uniform}


def _scan_family(spec, opts, elements, space) -> MetricFamily:
    members = [space]
    for W, total, act in _quotient_windows(spec, opts, elements):
        members.append(quotient_map(total, act)[0])
    return MetricFamily(members, "window and quotient windows")


def _best_certificates(family: MetricFamily, r: int, n_max: int) -> list:
    """For each n <= n_max, the greedy certificate with the least bound found."""
    base = components_certificate(family, r)
    candidates = sorted({int(x) for m in family for x in np.unique(m.dist) if np.isfinite(x)})
    out = [base]
    for n in range(1, n_max + 1):
        found = None
        for b in candidates:
            if b >= out[-1].bound:
                break
            cert = greedy_asdim(family, r, n, bound=b, strategy="greedy")
            if cert is not None:
                found = cert
                break
        out.append(found)
    return out


def exp_asdim_scan(spec: GroupSpec, opts: RunOptions) -> dict:
    space, elements = _window(spec, opts)
    family = _scan_family(spec, opts, elements, space)
    rows = []
    ok = True
    for r in _scales(spec, opts):
        certs = _best_certificates(family, r, spec.n_max)
        entry = {"r": r, "by_n": []}
        for n, cert in enumerate(certs):
            if cert is None:
                entry["by_n"].append({"n": n, "status": "no certificate found at budget"})
                continue
            verdict = verify_asdim(cert, family)
            ok &= verdict.ok
            fname = opts.write(f"asdim-r{r}-n{n}.json", certificate_to_json(cert, family))
            entry["by_n"].append(
                {"n": n, "used_colors": cert.n + 1, "bound": _num(cert.bound), "verified": verdict.ok, "file": fname}
            )
        rows.append(entry)
    return {"pass": ok, "family_sizes": [len(m) for m in family], "scales": rows}


def exp_fdc_pipeline(spec: GroupSpec, opts: RunOptions) -> dict:
    space, elements = _window(spec, opts)
    family = _scan_family(spec, opts, elements, space)
    rows = []
    ok = True
    for r in _scales(spec, opts):
        certs = [c for c in _best_certificates(family, r, spec.n_max) if c is not None]
        cert = min(certs, key=lambda c: (c.bound, c.n))
        tree = asdim_to_fdc(cert, family)
        verdict = verify_fdc(tree, min_scale=r)
        ok &= verdict.ok
        fname = opts.write(f"fdc-r{r}.json", tree_to_json(tree))
        opts.write(f"fdc-r{r}.dot", export_dot(tree, f"fdc r={r}"))
        rows.append(
            {
                "r": r,
                "depth": tree.depth(),
                "leaf_bound": _num(cert.bound),
                "certificate_n": cert.n,
                "verified": verdict.ok,
                "checks": verdict.checks,
                "failure": None if verdict.ok else str(verdict.failure),
                "file": fname,
            }
        )
    return {"pass": ok, "family_sizes": [len(m) for m in family], "scales": rows}


def exp_th_factorize(spec: GroupSpec, opts: RunOptions) -> dict:
    space, elements = _window(spec, opts)
    sample = elements[:200]
    rows = []
    ok = True
    for nspec in spec.norms:
        hist: dict[str, int] = {}
        failures = 0
        for g in sample:
            fac = th_factorize(g, nspec)
            if fac.verify() is not None:
                failures += 1
            key = ",".join(str(e) for e in fac.exponents)
            hist[key] = hist.get(key, 0) + 1
        ok &= failures == 0
        gens = [
            {"generator": name, "exponents": list(th_factorize(g, nspec).exponents)} for name, g in spec.generators
        ]
        rows.append(
            {
                "norm": nspec.label(),
                "factored": len(sample),
                "failures": failures,
                "diagonal_exponents": dict(sorted(hist.items())),
                "generators": gens,
            }
        )
    return {"pass": ok, "norms": rows}


def exp_triangularize(spec: GroupSpec, opts: RunOptions) -> dict:
    rows = []
    for name, F in spec.subgroups:
        res = triangularize_unipotent(F)
        if res.ok:
            P = [[str(x) for x in row] for row in res.P.mat]
            rows.append({"subgroup": name, "order": len(F), "status": "triangularized", "conjugator": P})
        else:
            bad = None if res.offending is None else [[str(x) for x in row] for row in res.offending.mat]
            rows.append({"subgroup": name, "order": len(F), "status": "not unipotent", "offending": bad})
    return {"pass": True, "subgroups": rows}


def exp_hirsch(spec: GroupSpec, opts: RunOptions) -> dict:
    rows = [
        {"series": s.name, "factor_ranks": [f.rank for f in s.factors], "hirsch_rank": hirsch_rank(s)}
        for s in spec.series
    ]
    out = {"pass": True, "series": rows}
    if spec.hirsch_bound is not None:
        probe = solvable_bound_probe([Candidate(s.name, s) for s in spec.series], spec.hirsch_bound)
        out["bound_probe"] = probe
        out["pass"] = probe["pass"]
    return out


def exp_equivariant(spec: GroupSpec, opts: RunOptions) -> dict:
    space, elements = _window(spec, opts)
    windows = _quotient_windows(spec, opts, elements)
    if not windows:
        return {"pass": True, "note": "no finite subgroups declared", "scales": []}
    family = MetricFamily([w[1] for w in windows], "saturated windows")
    actions = [w[2] for w in windows]
    qfam, _ = quotient_family(family, actions)
    rows = []
    ok = True
    for r in _scales(spec, opts):
        base = quotient_base_tree(qfam, r, "components")
        dec = equivariant_lift(base, family, actions, r)
        verdict = verify_equivariant(dec)
        ok &= verdict.ok and dec.meta["max_coset_diameter"] <= dec.meta["diameter_bound"]
        fname = opts.write(f"equivariant-r{r}.json", equivariant_to_json(dec))
        rows.append(
            {
                "r": r,
                "depth": dec.depth(),
                "verified": verdict.ok,
                "k": dec.meta["k"],
                "k_times_r": dec.meta["k_times_r"],
                "max_coset_diameter": _num(dec.meta["max_coset_diameter"]),
                "max_diam_Y": _num(dec.meta["max_diam_Y"]),
                "diameter_bound": _num(dec.meta["diameter_bound"]),
                "within_k_times_r": bool(dec.meta["max_coset_diameter"] <= dec.meta["k_times_r"]),
                "file": fname,
            }
        )
    return {"pass": ok, "subgroups": [name for name, _ in spec.subgroups], "scales": rows}


EXPERIMENTS: dict[str, Callable[[GroupSpec, RunOptions], dict]] = {
    "balls": exp_balls,
    "axioms": exp_axioms,
    "quotient-family": exp_quotient_family,
    "asdim-scan": exp_asdim_scan,
    "fdc-pipeline": exp_fdc_pipeline,
    "th-factorize": exp_th_factorize,
    "triangularize": exp_triangularize,
    "hirsch": exp_hirsch,
    "equivariant": exp_equivariant,
}


def run_experiment(spec: GroupSpec, name: str, opts: RunOptions | None = None) -> tuple[dict, int]:
    """Run one experiment; returns the report and the exit code."""
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    opts = opts or RunOptions()
    report = {
        "experiment": name,
        "spec_hash": spec.digest(),
        "window": {"radius": _radius(spec, opts), "cap": _cap(spec, opts)},
        "scales": _scales(spec, opts),
        "seed": opts.seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    try:
        results = EXPERIMENTS[name](spec, opts)
    except BallCapExceeded as exc:
        report.update({"status": "budget_exceeded", "detail": str(exc), "pass": False})
        code = EXIT_BUDGET
    else:
        report["results"] = results
        report["pass"] = bool(results["pass"])
        report["status"] = "pass" if report["pass"] else "fail"
        code = EXIT_PASS if report["pass"] else EXIT_FAIL
    report["files"] = sorted(opts.files)
    return report, code


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True, default=str) + "\n"


def strip_timestamp(text: str) -> str:
    doc = json.loads(text)
    doc.pop("timestamp", None)
    return json.dumps(doc, indent=1, sort_keys=True)


def spec_text(spec: GroupSpec) -> str:
    return format_spec(spec)
