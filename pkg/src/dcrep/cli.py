"""Command-line surface: analyze / solve / scan / simulate / asymptotics.

Every output embeds the schema tag, the resolved configuration and the seed,
so rerunning a command with the same config is byte-identical.  Exit codes:
0 success, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import asymptotics as asym
from . import conditions as cond
from . import embeddings as emb
from . import stable as stb
from .gaussian import (CovarianceSpec, square_threshold_law_exact,
                       threshold_law_mc, zero_threshold_law_3)
from .partitions import BinaryLaw, simulate_color_process
from .reports import _plain
from .simplex import SimplexError
from .solver import (TolPolicy, lp_feasibility, signed_rep_3, square_circle_solver,
                     symmetric_rep_family_3)

SCHEMA = "dcrep/1"


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    """17 significant digits, '.' decimal: bit-stable CSV cells."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x != x:
        return "nan"
    if x in (math.inf, -math.inf):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def load_model(spec: str) -> dict:
    """Model spec: inline JSON or a path to a JSON file."""
    text = spec
    if not spec.lstrip().startswith("{"):
        try:
            with open(spec) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read model file {spec!r}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"model is not valid JSON: {exc}") from exc
    kind = obj.get("kind")
    if kind is None:
        if "loadings" in obj:
            kind = "stable"
        elif "a" in obj:
            kind = "gaussian"
        elif "entries" in obj:
            kind = "law"
        else:
            raise UsageError("cannot infer model kind: give 'kind' or one of "
                             "'a' / 'loadings' / 'entries'")
        obj = {**obj, "kind": kind}
    if kind == "gaussian":
        obj["_cov"] = CovarianceSpec(obj["a"])
    elif kind == "stable":
        obj["_model"] = stb.StableLinearModel(float(obj["alpha"]), obj["loadings"])
    elif kind == "law":
        obj["_law"] = BinaryLaw.from_json(json.dumps(obj))
    else:
        raise UsageError(f"unknown model kind {kind!r}")
    return obj


def _config_echo(args, extra=None) -> dict:
    cfg = {"schema": SCHEMA, "command": args.command}
    for key in ("model", "h", "p", "samples", "seed", "tol", "format",
                "scan", "a_step", "grid", "simulator", "n", "alpha", "a", "b", "theta"):
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    if extra:
        cfg.update(extra)
    return cfg


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_csv(args, header: list[str], rows: list[list]) -> None:
    lines = ["# " + json.dumps(_config_echo(args), sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float, bool, np.floating))
                              else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")


def _policy_for(args) -> TolPolicy:
    if args.tol is None:
        return TolPolicy()
    return TolPolicy(feas_tol=args.tol, borderline_tol=max(args.tol * 100, args.tol))


def _law_for(args, obj) -> BinaryLaw:
    if obj["kind"] == "law":
        return obj["_law"]
    h = args.h or 0.0
    if obj["kind"] == "gaussian":
        cov = obj["_cov"]
        if h == 0.0 and cov.n == 3 and cov.is_standard:
            return zero_threshold_law_3(cov)
        if args.samples is None:
            raise UsageError("this model needs --samples for a Monte Carlo law")
        return threshold_law_mc(cov, h, args.samples, args.seed)
    if args.samples is None:
        raise UsageError("stable laws need --samples for a Monte Carlo law")
    return stb.stable_threshold_law_mc(obj["_model"], h, args.samples, args.seed)


# -- subcommands --------------------------------------------------------------

def cmd_analyze(args) -> dict:
    obj = load_model(args.model)
    results: dict = {}
    if obj["kind"] == "gaussian":
        cov = obj["_cov"]
        if cov.is_pd:
            results["conditions"] = cond.savage_report(cov).to_json_dict()
        results["degenerate"] = [r.to_json_dict() for r in cond.classify_degenerate(cov)]
        if cov.n == 3 and cov.is_standard and cov.is_pd:
            off = cov.offdiag()
            if np.min(off) >= 0.0:
                results["large_h"] = cond.classify_large_h_3(cov).to_json_dict()
            lims = asym.small_h_limits_3(cov)
            results["small_h"] = {"limits": lims.as_dict(), "kappa": lims.kappa,
                                  "verdict": lims.verdict().value}
    elif obj["kind"] == "stable":
        model = obj["_model"]
        measure = stb.spectral_from_matrix(model)
        integral, support = stb.stablegood_integral(measure)
        results["spectral_measure"] = measure.to_json_dict()
        results["second_coordinate_integral"] = {"value": integral,
                                                 "below_one": integral < 1.0,
                                                 "full_orthant_support": support}
        if model.d == 3:
            results["order1_limits"] = asym.stable_limit_report(measure).to_json_dict()
    if args.h is not None or obj["kind"] == "law":
        law = _law_for(args, obj)
        res = lp_feasibility(law, p=args.p, policy=_policy_for(args))
        results["lp"] = res.to_json_dict()
    return results


def cmd_solve(args) -> dict:
    obj = load_model(args.model)
    law = _law_for(args, obj)
    out: dict = {"law": json.loads(law.to_json())}
    p = law.marginal_p
    if law.n == 3 and abs(p - 0.5) > 1e-9 and law.equal_marginals(1e-6 if law.is_mc else 1e-9):
        rep = signed_rep_3(law)
        out["signed_rep_3"] = {"weights": rep.weights(), "feasible": rep.feasible}
    if law.n == 3 and law.is_zero_one_symmetric(1e-6 if law.is_mc else 1e-9):
        fam = symmetric_rep_family_3(law)
        out["symmetric_family"] = {
            "t_interval": list(fam.t_interval) if fam.t_interval else None,
            "canonical": None if fam.is_empty else fam.canonical().weights,
        }
    out["lp"] = lp_feasibility(law, p=args.p, policy=_policy_for(args)).to_json_dict()
    return out


def cmd_scan(args):
    if args.scan == "ab":
        step = args.a_step or 0.005
        values = np.arange(step, 1.0, step)
        header = ["a", "b", "pd", "dgff", "large_h_color", "markov_boundary",
                  "small_h_feasible", "savage_min", "pd_margin", "markov_gap", "case_tag"]
        rows = []
        for a in values:
            for b in values:
                reg = cond.ab_region_classify(float(a), float(b))
                small = ""
                if reg.numerically_pd:
                    small = 1 if asym.small_h_limits_3(reg.cov()).minimum > 1e-10 else 0
                rows.append([reg.a, reg.b, int(reg.pd), int(reg.dgff),
                             int(reg.large_h_color), int(reg.markov_boundary),
                             small, reg.savage_min, reg.pd_margin, reg.markov_gap,
                             reg.case_tag or ""])
        _emit_csv(args, header, rows)
        return None
    if args.scan == "theta":
        step = args.a_step or (math.pi / 80)
        values = np.arange(step, math.pi / 2, step)
        header = ["theta", "feasible", "t_lo", "t_hi", "adjacency_gap"]
        rows = []
        for th in values:
            law = square_threshold_law_exact(float(th))
            res = square_circle_solver(float(th), 0.0, law)
            rows.append([float(th), int(res.status == "Feasible"),
                         res.detail.get("t_lo", float("nan")),
                         res.detail.get("t_hi", float("nan")),
                         math.pi / 8 - (math.acos(math.cos(th) ** 2) - th)])
        _emit_csv(args, header, rows)
        return None
    if args.scan == "alpha":
        a = args.a if args.a is not None else 0.5
        step = args.a_step or 0.01
        values = np.arange(step, 2.0, step)
        header = ["alpha", "gamma_factor", "order2_101", "coupling_threshold",
                  "large_h_color"]
        rows = []
        for al in values:
            al = float(al)
            t = a ** al
            # q_{12,3}(h) >= 0 for large h iff lim nu_110/nu_1^2 exceeds
            # (1-t)^2 + t(1-t) = 1 - t
            threshold = 1.0 - t
            o2 = asym.stable_order2_limit_101_symmetric(a, al)
            gf = asym.gamma_factor(al) if al < 1.0 else float("inf")
            rows.append([al, gf, o2, threshold, int(o2 > threshold)])
        _emit_csv(args, header, rows)
        return None
    raise UsageError(f"unknown scan {args.scan!r}")


def _emit_sample_csv(args, batch) -> None:
    header = (["sign_" + str(i + 1) for i in range(batch.n)]
              + ["partition"]
              + ["crossing_p_" + str(i + 1) for i in range(batch.crossing_probs.shape[1])])
    rows = []
    for i in range(batch.m):
        s = batch.sample(i)
        rows.append(list(s.signs) + [s.partition.key] + list(s.crossing_probs))
    _emit_csv(args, header, rows)


def cmd_simulate(args) -> dict | None:
    sim = args.simulator
    seed = args.seed
    m = args.samples or 100_000
    if sim in ("ou", "stable-chain"):
        if sim == "ou":
            batch = emb.ou_partition_batch(args.a, args.n or 3, m, seed)
        else:
            batch = emb.stable_chain_partition_batch(args.alpha, args.a,
                                                     args.n or 3, m, seed)
        if args.format == "csv":
            _emit_sample_csv(args, batch)
            return None
        report = emb.verify_color_property(batch)
        return {"simulator": sim,
                "sign_law": json.loads(batch.empirical_sign_law().to_json()),
                "verification": {"passed": report.passed,
                                 "aggregate_max_dev_se": report.aggregate_max_dev_se,
                                 "bins": [vars(b) for b in report.bins],
                                 "excluded_bins": list(report.excluded_bins)}}
    if sim == "color":
        obj = load_model(args.model) if args.model else None
        if obj is None or obj["kind"] != "law":
            raise UsageError("simulator 'color' needs --model with an explicit law; "
                             "solve it first to get a partition distribution")
        law = obj["_law"]
        res = lp_feasibility(law)
        if not res.feasible:
            raise UsageError("law has no representation; nothing to simulate")
        _, emp = simulate_color_process(res.q, law.marginal_p, m, seed)
        dev = np.abs(emp.probs - law.probs)
        bound = 4.0 * np.sqrt(np.maximum(law.probs * (1 - law.probs), 1.0 / m) / m)
        return {"simulator": sim,
                "empirical": json.loads(emp.to_json()),
                "max_abs_dev": float(np.max(dev)),
                "within_4se": bool(np.all(dev <= bound))}
    raise UsageError(f"unknown simulator {sim!r}")


def cmd_asymptotics(args) -> dict:
    obj = load_model(args.model)
    out: dict = {}
    if obj["kind"] == "gaussian":
        cov = obj["_cov"]
        if cov.n != 3 or not cov.is_standard or not cov.is_pd:
            raise UsageError("small-h limits need a standard PD 3x3 covariance")
        lims = asym.small_h_limits_3(cov)
        out["small_h"] = {"formula": "q-limits(h->0)", "kappa": lims.kappa,
                          "limits": lims.as_dict(), "verdict": lims.verdict().value}
    elif obj["kind"] == "stable":
        model = obj["_model"]
        measure = stb.spectral_from_matrix(model)
        if model.d == 3:
            out["large_h"] = asym.stable_limit_report(measure).to_json_dict()
        out["phase_transition_alpha"] = asym.phase_transition_alpha()
    else:
        raise UsageError("asymptotics needs a gaussian or stable model")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dcrep",
                                 description="divide-and-color representability toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its fields")
        p.add_argument("--model", help="model JSON (inline or path)")
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("analyze", help="condition checkers + regime classifiers")
    common(p)
    p = sub.add_parser("solve", help="representations of a law")
    common(p)
    p = sub.add_parser("scan", help="parameter-region scans (CSV)")
    common(p)
    p.add_argument("--scan", choices=["ab", "theta", "alpha"], required=True)
    p.add_argument("--a-step", dest="a_step", type=float, default=None)
    p.add_argument("--a", type=float, default=None)
    p = sub.add_parser("simulate", help="samplers + verification")
    common(p)
    p.add_argument("--simulator", choices=["color", "ou", "stable-chain"], required=True)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n", type=int, default=None)
    p = sub.add_parser("asymptotics", help="closed-form limit reports")
    common(p)
    return ap


def _apply_config_file(args) -> None:
    if not args.config:
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad config file: {exc}") from exc
    if cfg.get("schema", SCHEMA) != SCHEMA:
        raise UsageError(f"config schema {cfg.get('schema')!r} != {SCHEMA!r}")
    for key, val in cfg.items():
        if key in ("schema", "command"):
            continue
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, False):
            setattr(args, attr, val)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _apply_config_file(args)
        if args.command == "scan":
            cmd_scan(args)
            return 0
        handler = {"analyze": cmd_analyze, "solve": cmd_solve,
                   "simulate": cmd_simulate, "asymptotics": cmd_asymptotics}[args.command]
        results = handler(args)
        if results is not None:
            payload = {"config": _config_echo(args), "results": _plain(results)}
            _emit(args, payload)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimplexError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
