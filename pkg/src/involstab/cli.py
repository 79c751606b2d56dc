"""Config-driven experiment runner.

Commands:
  run <config.json> [--out DIR]      full pipeline, writes manifest.json,
                                     report.json, trace.csv
  sweep <config.json> --param P --values v1,v2,...
  demo-fixedpoint                    both branches of the alternative

Exit codes: 2 configuration error, 3 no contractive direction,
4 stabilization failure, 0 otherwise (failed certifications are data).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, algebra, fixedpoint, maps, stabilizer, verifier
from .algebra import AlgebraSpec, Element
from .errors import ConfigError, NoContraction, StabilizationFailure
from .maps import ApproxMap, Involution, LambdaSampler, PerturbationSpec
from .stabilizer import ControlFunction, ScalingDirection


# ------------------------- serialization helpers -------------------------

def _num(x: float):
    # JSON has no infinity literal; the reports use the string "inf".
    return "inf" if math.isinf(x) else x


def _complex_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _element_json(e: Element) -> list[list[float]]:
    return [_complex_json(z) for z in e.flat()]


def _witness_json(w: dict | None):
    if w is None:
        return None
    out = {}
    for k, v in w.items():
        if isinstance(v, Element):
            out[k] = _element_json(v)
        elif isinstance(v, complex):
            out[k] = _complex_json(v)
        elif isinstance(v, float):
            out[k] = _num(v)
        else:
            out[k] = v
    return out


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _parallel_map(fn, items):
    raw = os.environ.get("STABILIZER_THREADS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"STABILIZER_THREADS must be an integer, got {raw!r}")
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------- configuration -----------------------------

@dataclass
class Scenario:
    raw: dict
    spec: AlgebraSpec
    f: ApproxMap
    f2: ApproxMap | None
    phi: ControlFunction
    max_n: int
    tol_rel: float
    num_probes: int
    radius_min: float
    radius_max: float
    seed: int
    extra_probes: list[Element]
    lambdas: LambdaSampler
    laws_max_probes: int
    cstar_max_n: int
    cstar_tol_rel: float
    cstar_tol: float


def _get(section: dict, key: str, where: str, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing key {where}.{key}")
        return default
    return section[key]


def _section(raw: dict, key: str, required=True) -> dict:
    sec = raw.get(key)
    if sec is None:
        if required:
            raise ConfigError(f"missing section {key}")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {key} must be an object")
    return sec


def _parse_element(spec: AlgebraSpec, entries, where: str) -> Element:
    try:
        flat = [complex(re, im) for re, im in entries]
        return algebra.element(spec, flat)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: expected {spec.n_entries} [re, im] pairs ({exc})")


def parse_scenario(raw: dict) -> Scenario:
    alg = _section(raw, "algebra")
    try:
        spec = AlgebraSpec(_get(alg, "kind", "algebra", required=True),
                           int(_get(alg, "dim", "algebra", default=1)))
    except ValueError as exc:
        raise ConfigError(f"algebra: {exc}")

    inv = _section(raw, "involution")
    kind = _get(inv, "kind", "involution", required=True)
    try:
        if kind == "twisted_adjoint":
            s = _parse_element(spec, _get(inv, "s", "involution", required=True),
                               "involution.s")
            base = maps.twisted_adjoint(s)
        else:
            base = Involution(kind)
    except ValueError as exc:
        raise ConfigError(f"involution.kind: {exc}")

    def parse_pert(section_name: str, required: bool) -> PerturbationSpec | None:
        sec = _section(raw, section_name, required=required)
        if not sec:
            return None
        try:
            return PerturbationSpec(
                kind=_get(sec, "kind", section_name, required=True),
                theta_delta=float(_get(sec, "theta_delta", section_name, default=0.0)),
                r=float(_get(sec, "r", section_name, default=1.0)),
                direction_seed=_get(sec, "direction_seed", section_name),
            )
        except ValueError as exc:
            raise ConfigError(f"{section_name}: {exc}")

    pert = parse_pert("perturbation", required=True)
    pert2 = parse_pert("perturbation2", required=False)

    ctl = _section(raw, "control")
    try:
        phi = ControlFunction(
            kind=_get(ctl, "kind", "control", required=True),
            theta=float(_get(ctl, "theta", "control", default=0.0)),
            r=float(_get(ctl, "r", "control", default=1.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"control: {exc}")

    stab = _section(raw, "stabilizer", required=False)
    max_n = int(_get(stab, "max_n", "stabilizer", default=48))
    tol_rel = float(_get(stab, "tol_rel", "stabilizer", default=1e-10))
    if max_n < 1:
        raise ConfigError("stabilizer.max_n must be >= 1")
    if tol_rel <= 0:
        raise ConfigError("stabilizer.tol_rel must be > 0")

    samp = _section(raw, "sampling")
    num_probes = int(_get(samp, "num_probes", "sampling", required=True))
    radius_min = float(_get(samp, "radius_min", "sampling", default=0.1))
    radius_max = float(_get(samp, "radius_max", "sampling", default=10.0))
    seed = _get(samp, "seed", "sampling", required=True)
    if num_probes < 1:
        raise ConfigError("sampling.num_probes must be >= 1")
    if not (0 < radius_min <= radius_max):
        raise ConfigError("sampling.radius_min/radius_max must satisfy 0 < min <= max")
    extra = [
        _parse_element(spec, entries, f"sampling.extra_probes[{k}]")
        for k, entries in enumerate(_get(samp, "extra_probes", "sampling", default=[]))
    ]

    lam = _section(raw, "lambda", required=False)
    try:
        lambdas = LambdaSampler(
            n0=int(_get(lam, "n0", "lambda", default=3)),
            arc=int(_get(lam, "arc", "lambda", default=4)),
            circle=int(_get(lam, "circle", "lambda", default=4)),
            reals=int(_get(lam, "reals", "lambda", default=3)),
            cplx=int(_get(lam, "complex", "lambda", default=3)),
            seed=int(_get(lam, "seed", "lambda", default=0)),
        )
    except ValueError as exc:
        raise ConfigError(f"lambda: {exc}")

    laws = _section(raw, "laws", required=False)
    laws_max_probes = int(_get(laws, "max_probes", "laws", default=16))

    cstar_sec = _section(raw, "cstar", required=False)
    cstar_max_n = int(_get(cstar_sec, "max_n", "cstar", default=96))
    cstar_tol_rel = float(_get(cstar_sec, "tol_rel", "cstar", default=1e-12))
    cstar_tol = float(_get(cstar_sec, "tol", "cstar", default=1e-8))

    f = ApproxMap(base=base, perturbation=pert, spec=spec)
    f2 = ApproxMap(base=base, perturbation=pert2, spec=spec) if pert2 else None
    return Scenario(
        raw=raw, spec=spec, f=f, f2=f2, phi=phi, max_n=max_n, tol_rel=tol_rel,
        num_probes=num_probes, radius_min=radius_min, radius_max=radius_max,
        seed=int(seed), extra_probes=extra, lambdas=lambdas,
        laws_max_probes=laws_max_probes, cstar_max_n=cstar_max_n,
        cstar_tol_rel=cstar_tol_rel, cstar_tol=cstar_tol,
    )


def load_config(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        bundled = bundled_scenario_path(str(path))
        if bundled is not None:
            p = bundled
        else:
            raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p}: invalid JSON ({exc})")


def bundled_scenario_path(name: str) -> Path | None:
    """Resolve a bundled scenario by bare name, e.g. 'adjoint_rsum_r05.json'."""
    if "/" in name or os.sep in name:
        return None
    if not name.endswith(".json"):
        name += ".json"
    ref = resources.files("involstab").joinpath("scenarios").joinpath(name)
    with resources.as_file(ref) as p:
        return p if p.exists() else None


def make_probes(sc: Scenario) -> list[Element]:
    rng = np.random.Generator(np.random.PCG64(sc.seed))
    probes = [
        algebra.sample_element(sc.spec, (sc.radius_min, sc.radius_max), rng)
        for _ in range(sc.num_probes)
    ]
    return probes + sc.extra_probes


# ------------------------------- pipeline --------------------------------

def run_pipeline(sc: Scenario) -> tuple[dict, list[dict], ScalingDirection]:
    """Execute the full certification pipeline; returns (report, traces,
    direction).  Raises NoContraction / StabilizationFailure."""
    direction = stabilizer.select_direction(sc.phi)
    probes = make_probes(sc)

    hyp = verifier.scan_hypotheses(
        sc.f, sc.phi, sc.lambdas, probes,
        direction=direction, max_n=sc.max_n, tol_rel=sc.tol_rel,
    )

    traces = _parallel_map(
        lambda x: stabilizer.stabilize_point(
            sc.f, direction, x, max_n=sc.max_n, tol_rel=sc.tol_rel
        ),
        probes,
    )

    bound = verifier.verify_bound(
        sc.f, sc.phi, direction, probes, max_n=sc.max_n, tol_rel=sc.tol_rel
    )
    law_probes = probes[: sc.laws_max_probes]
    laws = verifier.verify_involution_laws(
        sc.f, direction, sc.lambdas, law_probes, max_n=sc.max_n, tol_rel=sc.tol_rel
    )
    uniq = None
    if sc.f2 is not None:
        uniq = verifier.verify_uniqueness(
            sc.f, sc.f2, direction, probes, max_n=sc.max_n, tol_rel=sc.tol_rel
        )
    # The C*-check certifies the limit map; the scaling tail at the bound
    # depth is above the 1e-8 certification tolerance at small radii, so
    # stabilize deeper here.
    cstar = verifier.verify_cstar(
        sc.f, direction, probes,
        max_n=max(sc.max_n, sc.cstar_max_n),
        tol_rel=min(sc.tol_rel, sc.cstar_tol_rel),
        tol=sc.cstar_tol,
    )

    report = {
        "direction": {"q": direction.q, "i": direction.i, "L": direction.L},
        "hypotheses": {
            name: {
                "sup_ratio": _num(entry.sup_ratio),
                "witness": _witness_json(entry.witness),
                "samples_used": entry.samples_used,
            }
            for name, entry in hyp.entries.items()
        },
        "bound": {
            "max_ratio": _num(bound.max_ratio),
            "probes_checked": bound.probes_checked,
            "pass": bound.passed,
            "witness": _witness_json(bound.witness),
        },
        "laws": {
            "additivity": _law_json(laws.additivity),
            "conj_homogeneity": {
                stage: _law_json(entry) for stage, entry in laws.conj_homogeneity.items()
            },
            "antimultiplicativity": _law_json(laws.antimultiplicativity),
            "involutivity": _law_json(laws.involutivity),
            "total_tuples": laws.total_tuples,
        },
        "uniqueness": None if uniq is None else {
            "max_diff": _num(uniq.max_diff),
            "probes_checked": uniq.probes_checked,
            "pass": uniq.passed,
            "witness": _witness_json(uniq.witness),
        },
        "cstar": {
            "max_ratio": _num(cstar.max_ratio),
            "reversed_max_ratio": _num(cstar.reversed_max_ratio),
            "probes_checked": cstar.probes_checked,
            "pass": cstar.passed,
            "witness": _witness_json(cstar.witness),
            "tol": cstar.tol,
        },
        "corollary_audit": _corollary_audit(sc.phi),
        "tolerances": {"max_n": sc.max_n, "tol_rel": sc.tol_rel},
    }

    trace_rows = []
    for probe_id, (x, tr) in enumerate(zip(probes, traces)):
        radius = algebra.norm(x)
        bnd = stabilizer.error_bound(direction, sc.phi, x)
        fx = maps.eval_f(sc.f, x)
        for n, diff in enumerate(tr.diffs):
            a_n = tr.iterates[n]
            trace_rows.append({
                "probe_id": probe_id,
                "radius": radius,
                "n": n,
                "diff_norm": diff,
                "error_vs_limit": algebra.norm(algebra.sub(a_n, tr.result)),
                "bound": bnd,
                "ratio": verifier._ratio(algebra.norm(algebra.sub(a_n, fx)), bnd),
            })
    return report, trace_rows, direction


def _law_json(entry: verifier.LawEntry) -> dict:
    return {
        "max_defect": _num(entry.max_defect),
        "witness": _witness_json(entry.witness),
        "samples_used": entry.samples_used,
    }


def _corollary_audit(phi: ControlFunction) -> dict | None:
    from .stabilizer import Regime, corollary_constant

    if phi.kind is stabilizer.ControlKind.POWER_SUM:
        regime = Regime.SUM_R_LT_1 if phi.r < 1 else Regime.SUM_R_GT_1
    elif phi.kind is stabilizer.ControlKind.POWER_PRODUCT:
        regime = Regime.PRODUCT
    else:
        return None
    try:
        audit = corollary_constant(phi.r, regime)
    except Exception:
        return None
    return {
        "regime": regime.value,
        "derived": audit.derived,
        "paper_stated": audit.paper_stated,
        "sign_anomaly": audit.sign_anomaly,
    }


TRACE_COLUMNS = ["probe_id", "radius", "n", "diff_norm", "error_vs_limit", "bound", "ratio"]


def _trace_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in rows:
        writer.writerow([
            row["probe_id"], repr(row["radius"]), row["n"], repr(row["diff_norm"]),
            repr(row["error_vs_limit"]), repr(row["bound"]),
            "inf" if math.isinf(row["ratio"]) else repr(row["ratio"]),
        ])
    return buf.getvalue()


def run_scenario(config_path: str | Path, out_dir: str | Path | None = None) -> Path:
    raw = load_config(config_path)
    sc = parse_scenario(raw)
    out = Path(out_dir) if out_dir else Path(Path(str(config_path)).stem + "_out")
    out.mkdir(parents=True, exist_ok=True)

    report, trace_rows, direction = run_pipeline(sc)

    report_text = json.dumps(report, indent=2)
    _atomic_write(out / "report.json", report_text + "\n")
    _atomic_write(out / "trace.csv", _trace_csv(trace_rows))
    manifest = {
        "config": raw,
        "derived": {"q": direction.q, "i": direction.i, "L": direction.L},
        "corollary_audit": report["corollary_audit"],
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "files": {"report": "report.json", "trace": "trace.csv"},
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return out


SWEEP_PARAMS = ("theta", "r", "dim", "num_probes")


def sweep(config_path: str | Path, param: str, values: list[float],
          out_dir: str | Path | None = None) -> Path:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep.param must be one of {SWEEP_PARAMS}, got {param!r}")
    raw = load_config(config_path)
    out = Path(out_dir) if out_dir else Path(Path(str(config_path)).stem + "_sweep")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, value in enumerate(values):
        cfg = json.loads(json.dumps(raw))
        if param == "theta":
            cfg.setdefault("control", {})["theta"] = value
            if cfg.get("perturbation", {}).get("kind", "none") != "none":
                # Budget rule: a third of the control amplitude keeps the
                # Jensen hypothesis satisfied.
                cfg["perturbation"]["theta_delta"] = value / 3.0
        elif param == "r":
            cfg.setdefault("control", {})["r"] = value
            if cfg.get("perturbation", {}).get("kind", "none") != "none":
                cfg["perturbation"]["r"] = value
        elif param == "dim":
            cfg.setdefault("algebra", {})["dim"] = int(value)
        else:
            cfg.setdefault("sampling", {})["num_probes"] = int(value)
        row = {"param": param, "value": value}
        try:
            sc = parse_scenario(cfg)
            report, _, direction = run_pipeline(sc)
            laws = report["laws"]
            law_defects = [laws["additivity"]["max_defect"],
                           laws["antimultiplicativity"]["max_defect"],
                           laws["involutivity"]["max_defect"]]
            law_defects += [e["max_defect"] for e in laws["conj_homogeneity"].values()]
            law_defects = [d for d in law_defects if not isinstance(d, str)]
            row.update({
                "L": direction.L,
                "max_bound_ratio": report["bound"]["max_ratio"],
                "max_law_defect": max(law_defects) if law_defects else "inf",
                "bound_pass": report["bound"]["pass"],
                "cstar_pass": report["cstar"]["pass"],
                "status": "ok",
            })
        except (ConfigError, NoContraction, StabilizationFailure) as exc:
            row.update({
                "L": "", "max_bound_ratio": "", "max_law_defect": "",
                "bound_pass": "", "cstar_pass": "",
                "status": f"{type(exc).__name__}: {exc}",
            })
        rows.append(row)

    buf = io.StringIO()
    cols = ["param", "value", "L", "max_bound_ratio", "max_law_defect",
            "bound_pass", "cstar_pass", "status"]
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    _atomic_write(out / "sweep.csv", buf.getvalue())
    return out


# --------------------------- fixed-point demo -----------------------------

def demo_fixedpoint(stream=None) -> dict:
    """Run both branches of the alternative and the a-posteriori equality
    check on the affine contraction."""
    stream = stream or sys.stdout
    reals = fixedpoint.GeneralizedMetricSpace("reals", lambda a, b: abs(a - b))
    affine = fixedpoint.iterate_alternative(
        lambda t: 0.5 * t + 1.0, 0.0, 0.5, reals, max_iter=64, tol=1e-15
    )
    bound_ratio = abs(affine.fixed_point - 0.0) / affine.aposteriori_bound

    discrete = fixedpoint.GeneralizedMetricSpace(
        "integers with the discrete infinite metric",
        lambda a, b: 0.0 if a == b else fixedpoint.INF,
    )
    all_inf = fixedpoint.iterate_alternative(
        lambda n: n + 1, 0, 0.5, discrete, max_iter=16, tol=1e-15
    )
    ident = fixedpoint.iterate_alternative(
        lambda t: t, 1.25, 0.5, reals, max_iter=16, tol=1e-15
    )

    print(f"affine contraction: branch={affine.branch.value} "
          f"fixed_point={affine.fixed_point!r} n0={affine.n0} "
          f"aposteriori_bound={affine.aposteriori_bound!r} "
          f"bound_ratio={bound_ratio!r}", file=stream)
    print(f"discrete infinite metric: branch={all_inf.branch.value}", file=stream)
    print(f"identity map: branch={ident.branch.value} n0={ident.n0} "
          f"fixed_point={ident.fixed_point!r}", file=stream)
    return {
        "affine": affine,
        "affine_bound_ratio": bound_ratio,
        "all_infinite": all_inf,
        "identity": ident,
    }


# --------------------------------- main -----------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="involstab",
        description="Construct and certify involutions from approximately "
                    "involutive maps on Banach algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("config", help="scenario JSON (path or bundled name)")
    p_run.add_argument("--out", default=None, help="output directory")

    p_sweep = sub.add_parser("sweep", help="run a scenario over a parameter axis")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 0.25,0.5,0.75")
    p_sweep.add_argument("--out", default=None)

    sub.add_parser("demo-fixedpoint", help="both branches of the alternative")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            out = run_scenario(args.config, args.out)
            print(f"wrote {out / 'report.json'}")
        elif args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"--values: {exc}")
            if not values:
                raise ConfigError("--values: at least one value required")
            out = sweep(args.config, args.param, values, args.out)
            print(f"wrote {out / 'sweep.csv'}")
        else:
            demo_fixedpoint()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NoContraction as exc:
        print(f"no contraction: {exc}", file=sys.stderr)
        return 3
    except StabilizationFailure as exc:
        print(f"stabilization failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
