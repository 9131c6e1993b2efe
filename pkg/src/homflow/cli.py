"""Command line front end.

Subcommands
-----------
flow        integrate the descent flow from one start, write CSV + JSON
retract     flow a batch of starts to the zero set, write CSV + JSON
inequality  scan a gradient inequality constant, write JSON
ortho       simultaneously orthogonalize a vector family, write JSON
report      print a human-readable summary of a JSON output file

``--out`` is a base path: flow and retract write <out>.csv and
<out>.json, inequality and ortho write <out>.json.  Every JSON output
embeds the SHA-256 hash of the config and the seed, and all numbers are
written with full round-trip precision, so reruns with identical inputs
produce identical bytes.

Exit codes: 0 on success, 1 for usage or config problems, 2 for
numerical failures (non-convergence, stalled steps).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .config import ConfigError, SystemBundle, build_system, config_hash, \
    load_config
from .flow import ConvergenceError, FlowOptions, integrate_flow, retract
from .inequalities import SphereSampler, lojasiewicz_scan
from .ortho import simultaneous_orthogonalize

__all__ = ["main", "build_parser", "cmd_flow", "cmd_retract",
           "cmd_inequality", "cmd_ortho", "cmd_report"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="homflow",
        description="gradient flows, zero-set retractions and gradient "
                    "inequalities for nonnegative homogeneous polynomials",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_common(sp):
        sp.add_argument("--config", required=True,
                        help="TOML or JSON config file")
        sp.add_argument("--out", required=True,
                        help="output base path (suffixes are appended)")
        sp.add_argument("--seed", type=int, default=0,
                        help="seed recorded in outputs and used by samplers")
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads for batch work")

    sp = sub.add_parser("flow", help="integrate the descent flow")
    add_common(sp)
    sp.add_argument("--t-end", type=float, default=None, dest="t_end")
    sp.add_argument("--phi-tol", type=float, default=None, dest="phi_tol")
    sp.add_argument("--grad-tol", type=float, default=None, dest="grad_tol")

    sp = sub.add_parser("retract", help="flow starts down to the zero set")
    add_common(sp)
    sp.add_argument("--phi-tol", type=float, default=None, dest="phi_tol")
    sp.add_argument("--grad-tol", type=float, default=None, dest="grad_tol")

    sp = sub.add_parser("inequality", help="scan a gradient inequality")
    add_common(sp)
    sp.add_argument("--samples", type=int, default=None,
                    help="number of sphere sample points")
    sp.add_argument("--epsilon", type=float, default=None,
                    help="inequality exponent (defaults to the cap)")

    sp = sub.add_parser("ortho", help="simultaneously orthogonalize vectors")
    add_common(sp)

    sp = sub.add_parser("report", help="summarize a JSON output file")
    sp.add_argument("path", help="JSON file written by another subcommand")
    return p


def _write_json(path: str, payload: dict) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _flow_options(sect: dict, args) -> FlowOptions:
    opts = FlowOptions()
    kw = {}
    for key in ("rel_tol", "abs_tol", "grad_tol", "phi_tol", "max_time",
                "store_ratio", "monotone_tol"):
        if key in sect:
            kw[key] = float(sect[key])
    if "max_steps" in sect:
        kw["max_steps"] = int(sect["max_steps"])
    if getattr(args, "phi_tol", None) is not None:
        kw["phi_tol"] = args.phi_tol
    if getattr(args, "grad_tol", None) is not None:
        kw["grad_tol"] = args.grad_tol
    return replace(opts, **kw)


def _meta(command: str, cfg: dict, args) -> dict:
    return {
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": int(args.seed),
    }


def _start_vector(raw, n: int, what: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (n,):
        raise ConfigError(f"{what} must have {n} entries, got shape {arr.shape}")
    return arr


def cmd_flow(args) -> int:
    cfg = load_config(args.config)
    bundle = build_system(cfg)
    sect = cfg.get("flow")
    if not isinstance(sect, dict) or "x0" not in sect:
        raise ConfigError("flow needs a [flow] section with x0")
    x0 = _start_vector(sect["x0"], bundle.n_vars, "[flow] x0")
    t_end = args.t_end if args.t_end is not None else float(sect.get("t_end", 10.0))
    opts = _flow_options(sect, args)

    traj = integrate_flow(bundle.system, x0, t_end, opts)
    csv_path = args.out + ".csv"
    os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
    traj.to_csv(csv_path)
    meta = _meta("flow", cfg, args)
    meta.update({
        "status": traj.status,
        "t_final": traj.t_final,
        "phi_final": traj.phi_final,
        "grad_norm_final": traj.grad_norm_final,
        "n_samples": len(traj),
        "n_accepted": traj.n_accepted,
        "n_rejected": traj.n_rejected,
        "csv": os.path.basename(csv_path),
    })
    _write_json(args.out + ".json", meta)
    print(f"flow: status={traj.status} t_final={traj.t_final:g} "
          f"phi_final={traj.phi_final:.6e} grad_norm={traj.grad_norm_final:.6e}")
    return 2 if traj.status == "step_failure" else 0


def cmd_retract(args) -> int:
    cfg = load_config(args.config)
    bundle = build_system(cfg)
    sect = cfg.get("retract", {})
    if not isinstance(sect, dict):
        raise ConfigError("[retract] must be a table")
    starts = sect.get("starts", [])
    phi_tol = args.phi_tol if args.phi_tol is not None \
        else float(sect.get("phi_tol", 1e-10))
    grad_tol = args.grad_tol if args.grad_tol is not None \
        else float(sect.get("grad_tol", 1e-7))
    opts = _flow_options(sect, args)
    n = bundle.n_vars
    vecs = [_start_vector(s, n, f"[retract] start {i}")
            for i, s in enumerate(starts)]

    def one(v):
        return retract(bundle.system, v, phi_tol=phi_tol, grad_tol=grad_tol,
                       opts=opts)

    if args.threads > 1 and len(vecs) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as ex:
            results = list(ex.map(one, vecs))
    else:
        results = [one(v) for v in vecs]

    csv_path = args.out + ".csv"
    header = ",".join(["index"] + [f"y_{i + 1}" for i in range(n)]
                      + ["t_reached", "phi", "grad_norm"])
    lines = [header]
    for i, res in enumerate(results):
        vals = [*res.y, res.t_reached, res.phi_value, res.grad_norm]
        lines.append(",".join([str(i)] + [_fmt(v) for v in vals]))
    os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")

    meta = _meta("retract", cfg, args)
    meta.update({
        "n_starts": len(results),
        "phi_tol": phi_tol,
        "grad_tol": grad_tol,
        "max_phi": max((r.phi_value for r in results), default=0.0),
        "max_grad_norm": max((r.grad_norm for r in results), default=0.0),
        "max_t_reached": max((r.t_reached for r in results), default=0.0),
        "csv": os.path.basename(csv_path),
    })
    _write_json(args.out + ".json", meta)
    print(f"retract: {len(results)} starts converged "
          f"(max phi {meta['max_phi']:.3e})")
    return 0


def cmd_inequality(args) -> int:
    cfg = load_config(args.config)
    bundle = build_system(cfg)
    sect = cfg.get("inequality", {})
    if not isinstance(sect, dict):
        raise ConfigError("[inequality] must be a table")
    n_samples = args.samples if args.samples is not None \
        else int(sect.get("samples", 100_000))
    if n_samples < 1:
        raise ConfigError("inequality needs samples >= 1")
    degree = bundle.system.degree
    if degree < 2:
        raise ConfigError("gradient inequalities need degree >= 2")
    default_eps = 1.0 / (degree - 1)
    eps = args.epsilon if args.epsilon is not None \
        else float(sect.get("epsilon", default_eps))

    sampler = SphereSampler(args.seed)
    rep = lojasiewicz_scan(bundle.system, [eps], sampler, n_samples)[0]
    if bundle.kind == "group":
        rep.commuting = bundle.basis.commuting()

    payload = _meta("inequality", cfg, args)
    payload.update(rep.to_json_dict())
    _write_json(args.out + ".json", payload)
    c_str = "none (all samples vacuous)" if rep.c_estimate is None \
        else f"{rep.c_estimate:.6g}"
    print(f"inequality: epsilon={rep.epsilon:.6g} c_estimate={c_str} "
          f"excluded={rep.vacuous_excluded}/{rep.n_samples}")
    return 0


def cmd_ortho(args) -> int:
    cfg = load_config(args.config)
    sect = cfg.get("ortho")
    if not isinstance(sect, dict) or not sect.get("vectors"):
        raise ConfigError("ortho needs an [ortho] section with a nonempty "
                          "vectors list")
    vectors = sect["vectors"]
    lengths = {len(v) for v in vectors}
    if len(lengths) != 1:
        raise ConfigError(f"ortho vectors are ragged (lengths {sorted(lengths)})")
    V = np.asarray(vectors, dtype=float)
    res = simultaneous_orthogonalize(V)

    gram = res.z[:res.m] @ res.z[:res.m].T
    tail = res.z[res.m:]
    checks = {
        "orthogonality_defect": float(np.max(np.abs(res.A @ res.A.T - np.eye(V.shape[0])))),
        "max_tail_norm": float(np.max(np.linalg.norm(tail, axis=1))) if tail.size else 0.0,
        "max_gram_offdiag": float(np.max(np.abs(gram - np.diag(np.diag(gram))))) if res.m else 0.0,
    }
    payload = _meta("ortho", cfg, args)
    payload.update({
        "m": res.m,
        "c": [float(v) for v in res.c],
        "permutation": [int(v) for v in res.permutation],
        "A": [[float(v) for v in row] for row in res.A],
        "z": [[float(v) for v in row] for row in res.z],
        "checks": checks,
    })
    _write_json(args.out + ".json", payload)
    print(f"ortho: rank {res.m} of {V.shape[0]} vectors, "
          f"max tail norm {checks['max_tail_norm']:.3e}")
    return 0


def cmd_report(args) -> int:
    with open(args.path) as fh:
        d = json.load(fh)
    cmd = d.get("command", "unknown")
    print(f"{args.path}: {cmd} output")
    print(f"  config hash : {d.get('config_hash', '?')}")
    print(f"  seed        : {d.get('seed', '?')}")
    if cmd == "flow":
        print(f"  status      : {d.get('status')}")
        print(f"  t_final     : {d.get('t_final')}")
        print(f"  phi_final   : {d.get('phi_final')}")
        print(f"  grad_norm   : {d.get('grad_norm_final')}")
        print(f"  samples     : {d.get('n_samples')} stored, "
              f"{d.get('n_accepted')} accepted / {d.get('n_rejected')} rejected steps")
    elif cmd == "retract":
        print(f"  starts      : {d.get('n_starts')}")
        print(f"  max phi     : {d.get('max_phi')}")
        print(f"  max grad    : {d.get('max_grad_norm')}")
        print(f"  max t       : {d.get('max_t_reached')}")
    elif cmd == "inequality":
        print(f"  epsilon     : {d.get('epsilon')}")
        print(f"  c_estimate  : {d.get('c_estimate')}")
        print(f"  samples     : {d.get('n_samples')} "
              f"({d.get('vacuous_excluded')} vacuous excluded)")
        print(f"  commuting   : {d.get('commuting')}")
    elif cmd == "ortho":
        print(f"  rank m      : {d.get('m')}")
        print(f"  gram diag   : {d.get('c')}")
        print(f"  checks      : {d.get('checks')}")
    else:
        for k in sorted(d):
            if k not in ("A", "z"):
                print(f"  {k}: {d[k]}")
    return 0


_DISPATCH = {
    "flow": cmd_flow,
    "retract": cmd_retract,
    "inequality": cmd_inequality,
    "ortho": cmd_ortho,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into config errors
        return 0 if not exc.code else 1
    try:
        return _DISPATCH[args.cmd](args)
    except ConfigError as exc:
        print(f"homflow: config error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"homflow: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"homflow: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"homflow: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
