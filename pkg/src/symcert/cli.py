"""Command-line front end.

    symcert certify  --N 100 --target oat:0.03 --m 2 --measure S:1:x S:2:auto-squeezed
    symcert select   --N 100 --target oat:0.03 --m 2 --max-order 2
    symcert scan     --N 100 --mu 0.01:0.2:20 --m 1 2 3 4 --output fig3.csv
    symcert random   --mode fig2 --N 10 --trials 100 --seed 7 --output fig2.csv
    symcert symmetry --N 4 --obs S1:z --value 1.5
    symcert dump     --N 10 --target dicke:5 --m 2 --output problem.dat-s

Single results are JSON objects (ResultRecord), scans and studies are CSV.
Formats are documented in docs/formats.md.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, certify
from .certify import (
    CertificationError,
    InconsistentDataError,
    MeasurementRecord,
    block_decomposition,
    fidelity_from_data,
    fidelity_from_full_rdm,
    pi_rescale,
    select_measurements,
    symmetric_overlap_bound,
    symmetric_overlap_lp,
)
from .states import (
    coherent_spin_state,
    dicke_state,
    one_axis_twisted,
    random_symmetric_state,
    squeezing_direction,
    wineland_xi2,
    xi2_db,
)
from .symspace import direction_angles, direction_vector

SCHEMA_VERSION = "1"
OUTPUT_DIR_ENV = "SYMCERT_OUTPUT_DIR"
SCAN_COLUMNS = ["mu", "m", "bound", "xi2_db", "status"]
FIG1_COLUMNS = ["N", "m", "rank", "trial", "seed", "bound", "status"]
FIG2_COLUMNS = ["N", "rank", "m", "trials", "mean_bound", "std_bound", "min_bound", "mean_purity", "failures",
                "master_seed"]

log = logging.getLogger("symcert")


class ConfigError(ValueError):
    pass


@dataclass
class ResultRecord:
    command: str
    config: dict
    results: dict
    traces: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    wall_time_s: float | None = None
    version: str = __version__
    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))


# ----------------------------------------------------------------------------
# parsing


AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def parse_target(spec: str, N: int):
    """css[:x|y|z] | oat:<mu> | dicke:<k> | random:<rank>:<seed>"""
    parts = spec.split(":")
    kind = parts[0].lower()
    try:
        if kind == "css":
            return coherent_spin_state(N, parse_direction(parts[1]) if len(parts) > 1 else AXES["x"])
        if kind == "oat":
            return one_axis_twisted(N, float(parts[1]))
        if kind == "dicke":
            return dicke_state(N, int(parts[1]))
        if kind == "random":
            if len(parts) != 3:
                raise ConfigError("random targets need rank and seed: random:<rank>:<seed>")
            return random_symmetric_state(N, int(parts[1]), int(parts[2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad target {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown target kind {kind!r}")


def parse_direction(token: str, target=None) -> np.ndarray:
    """x, -y, auto-squeezed, 'theta,phi' (radians) or 'ux,uy,uz'."""
    t = token.strip().lower()
    sign = -1.0 if t.startswith("-") else 1.0
    t = t.lstrip("+-")
    if t in AXES:
        return sign * np.array(AXES[t])
    if t == "auto-squeezed":
        if target is None:
            raise ConfigError("auto-squeezed direction needs a target state")
        return sign * squeezing_direction(target)
    try:
        nums = [float(v) for v in t.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse direction {token!r}") from exc
    if len(nums) == 2:
        return sign * direction_vector(*nums)
    if len(nums) == 3:
        u = np.array(nums)
        return sign * u / np.linalg.norm(u)
    raise ConfigError(f"cannot parse direction {token!r}")


def parse_measurement(token: str, target) -> MeasurementRecord:
    """S:<k>:<direction>[:<value>|auto[:<delta>]]"""
    parts = token.split(":")
    if len(parts) < 3 or parts[0].upper() != "S":
        raise ConfigError(f"measurement {token!r} must look like S:<order>:<direction>[:<value>[:<delta>]]")
    try:
        k = int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad moment order in {token!r}") from exc
    u = parse_direction(parts[2], target)
    value = parts[3] if len(parts) > 3 else "auto"
    delta = float(parts[4]) if len(parts) > 4 else 0.0
    rec = MeasurementRecord.from_target(target, u, k, delta)
    if value != "auto":
        rec = MeasurementRecord(rec.direction, k, float(value), delta)
    return rec


def parse_grid(spec: str) -> list[float]:
    """'a:b:n' (n points inclusive) or comma list."""
    if ":" in spec:
        a, b, n = spec.split(":")
        return [float(v) for v in np.linspace(float(a), float(b), int(n))]
    return [float(v) for v in spec.split(",")]


def _record_dict(rec: MeasurementRecord) -> dict:
    theta, phi = direction_angles(rec.direction)
    return {"order": rec.order, "direction": list(rec.direction), "theta": theta, "phi": phi,
            "value": rec.value, "noise_halfwidth": rec.noise_halfwidth}


def _workers(n: int | None) -> int:
    return max(1, n or os.cpu_count() or 1)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# commands


def run_certify(cfg: dict) -> ResultRecord:
    N, m = cfg["N"], cfg["m"]
    target = parse_target(cfg["target"], N)
    records = [parse_measurement(tok, target) for tok in cfg.get("measure") or []]
    if cfg.get("full_rdm"):
        res = fidelity_from_full_rdm(target, m)
    else:
        res = fidelity_from_data(target, m, records)
    return ResultRecord(
        command="certify",
        config=cfg,
        results={"bound": res.bound, "quantity": res.quantity,
                 "measurements": [_record_dict(r) for r in records]},
        diagnostics={**res.diagnostics, "constraints_used": res.constraints_used,
                     "dual_certificate": [float(v) for v in res.dual_certificate]},
    )


def run_select(cfg: dict) -> ResultRecord:
    target = parse_target(cfg["target"], cfg["N"])
    sel = select_measurements(target, cfg["m"], cfg["max_order"], cfg["improvement_tol"],
                              n_theta=cfg["n_theta"], n_phi=cfg["n_phi"])
    return ResultRecord(
        command="select",
        config=cfg,
        results={"bound": sel.bound, "baseline": sel.baseline,
                 "measurements": [_record_dict(r) for r in sel.records]},
        traces=[{"step": i + 1, "order": r.order, "bound": b} for i, (r, b) in enumerate(zip(sel.records, sel.bounds))],
    )


def _scan_cell(args):
    N, mu, m = args
    target = one_axis_twisted(N, mu)
    xi = xi2_db(wineland_xi2(target)[0])
    try:
        res = fidelity_from_full_rdm(target, m)
        return {"mu": mu, "m": m, "bound": res.bound, "xi2_db": xi, "status": res.status}
    except (CertificationError, np.linalg.LinAlgError) as exc:
        return {"mu": mu, "m": m, "bound": float("nan"), "xi2_db": xi, "status": f"error: {exc}"}


def run_scan(cfg: dict) -> list[dict]:
    cells = [(cfg["N"], mu, m) for mu in cfg["mu"] for m in cfg["m"]]
    return _map(_scan_cell, cells, _workers(cfg.get("workers")))


def trial_seed(master_seed: int, index: int) -> int:
    """Independent per-trial seed derived from (master_seed, index)."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def _random_trial(args):
    N, rank, m, seed = args
    target = random_symmetric_state(N, rank, seed)
    try:
        res = fidelity_from_full_rdm(target, m)
        return res.bound, res.status, target.purity()
    except (CertificationError, np.linalg.LinAlgError) as exc:
        return float("nan"), f"error: {exc}", target.purity()


def run_random_study(cfg: dict) -> list[dict]:
    seed, trials, workers = cfg["seed"], cfg["trials"], _workers(cfg.get("workers"))
    if seed is None:
        raise ConfigError("random studies need --seed")
    rows = []
    if cfg["mode"] == "fig1":
        jobs = []
        for N in cfg["N"]:
            for t in range(trials):
                jobs.append((N, 1, min(cfg["m"][0], N), trial_seed(seed, len(jobs))))
        out = _map(_random_trial, jobs, workers)
        for i, ((N, rank, m, s), (b, st, _)) in enumerate(zip(jobs, out)):
            rows.append({"N": N, "m": m, "rank": rank, "trial": i, "seed": s, "bound": b, "status": st})
        return rows

    N = cfg["N"][0]
    ranks = cfg.get("ranks") or list(range(1, N + 2))
    ms = cfg.get("m_list") or list(range(1, N + 1))
    jobs, index = [], 0
    for rank in ranks:
        for m in ms:
            for t in range(trials):
                jobs.append((N, rank, m, trial_seed(seed, index)))
                index += 1
    out = _map(_random_trial, jobs, workers)
    for c, (rank, m) in enumerate((r, m) for r in ranks for m in ms):
        chunk = out[c * trials:(c + 1) * trials]
        vals = np.array([c[0] for c in chunk], dtype=float)
        ok = vals[~np.isnan(vals)]
        rows.append({"N": N, "rank": rank, "m": m, "trials": trials,
                     "mean_bound": float(ok.mean()) if ok.size else float("nan"),
                     "std_bound": float(ok.std()) if ok.size else float("nan"),
                     "min_bound": float(ok.min()) if ok.size else float("nan"),
                     "mean_purity": float(np.mean([c[2] for c in chunk])),
                     "failures": int(np.sum(np.isnan(vals))), "master_seed": seed})
    return rows


OBSERVABLES = {"S1": certify.FIRST_MOMENT, "S2": certify.SECOND_MOMENT, "S2TOT": certify.TOTAL_SPIN,
               "TOTAL": certify.TOTAL_SPIN}


def run_symmetry_bound(cfg: dict) -> ResultRecord:
    obs = cfg["obs"].split(":")
    kind = OBSERVABLES.get(obs[0].upper())
    if kind is None:
        raise ConfigError(f"unknown observable {cfg['obs']!r}; use S1:<dir>, S2:<dir> or total")
    u = parse_direction(obs[1]) if len(obs) > 1 else np.array(AXES["z"])
    decomp = block_decomposition(cfg["N"], kind, u)
    # noise folded in conservatively
    s = cfg["value"] - cfg.get("delta", 0.0)
    lam = symmetric_overlap_bound(decomp, s)
    lam_lp = symmetric_overlap_lp(decomp, s)
    results = {"lambda": lam, "lambda_lp": lam_lp, "value_used": s,
               "blocks": [{"S": b.S, "multiplicity": b.multiplicity, "lo": b.lo, "hi": b.hi} for b in decomp.blocks]}
    prior = cfg.get("fidelity")
    if prior is not None:
        F = _prior_fidelity(prior)
        results["symmetric_fidelity"] = F
        results["pi_fidelity"] = pi_rescale(F, lam)
    return ResultRecord(command="symmetry", config=cfg, results=results)


def _prior_fidelity(prior) -> float:
    try:
        return float(prior)
    except (TypeError, ValueError):
        rec = ResultRecord.from_json(Path(prior).read_text())
        return float(rec.results["bound"])


def run_dump(cfg: dict) -> dict:
    from .sdpa import write_sdpa

    target = parse_target(cfg["target"], cfg["N"])
    records = [parse_measurement(tok, target) for tok in cfg.get("measure") or []]
    if cfg.get("full_rdm"):
        rows, _ = certify.marginal_constraints(cfg["N"], cfg["m"], certify.reduce(target, cfg["m"]))
        problem = certify.conic.ConicProblem(target.matrix, [(np.eye(cfg["N"] + 1), 1.0)] + rows)
    else:
        problem, _ = certify.data_problem(target, cfg["m"], records)
    path = write_sdpa(problem, cfg["output_path"])
    return {"written": str(path)}


# ----------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symcert", description="Certified fidelity lower bounds for symmetric states")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, workers=False):
        sp.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
        sp.add_argument("--no-timing", action="store_true", help="omit wall time for byte-reproducible output")
        if workers:
            sp.add_argument("--workers", type=int, default=None, help="worker processes (default: logical cores)")

    c = sub.add_parser("certify", help="bound the fidelity from measured moments or a full m-RDM")
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--target", required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--measure", nargs="*", default=[], metavar="S:k:dir[:value[:delta]]")
    c.add_argument("--full-rdm", action="store_true", help="pin the whole m-RDM instead of moments")
    common(c)

    s = sub.add_parser("select", help="greedy optimal measurement list")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--max-order", type=int, required=True)
    s.add_argument("--improvement-tol", type=float, default=certify.DEFAULT_IMPROVEMENT_TOL)
    s.add_argument("--n-theta", type=int, default=32)
    s.add_argument("--n-phi", type=int, default=16)
    common(s)

    sc = sub.add_parser("scan", help="full-RDM bounds of one-axis-twisted states over a mu grid")
    sc.add_argument("--N", type=int, required=True)
    sc.add_argument("--mu", required=True, help="a:b:n or comma list")
    sc.add_argument("--m", type=int, nargs="+", required=True)
    common(sc, workers=True)

    r = sub.add_parser("random", help="random-target studies")
    r.add_argument("--mode", choices=["fig1", "fig2"], required=True)
    r.add_argument("--N", type=int, nargs="+", required=True)
    r.add_argument("--m", type=int, nargs="*", default=None, help="fig1: RDM size (default 2); fig2: list")
    r.add_argument("--ranks", type=int, nargs="*", default=None)
    r.add_argument("--trials", type=int, required=True)
    r.add_argument("--seed", type=int, required=True)
    common(r, workers=True)

    y = sub.add_parser("symmetry", help="bound the overlap with the symmetric subspace")
    y.add_argument("--N", type=int, required=True)
    y.add_argument("--obs", required=True, help="S1:<dir>, S2:<dir> or total")
    y.add_argument("--value", type=float, required=True)
    y.add_argument("--delta", type=float, default=0.0)
    y.add_argument("--fidelity", default=None, help="symmetric-part fidelity bound or path to a certify JSON")
    common(y)

    d = sub.add_parser("dump", help="write the certification program in SDPA sparse format")
    d.add_argument("--N", type=int, required=True)
    d.add_argument("--target", required=True)
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--measure", nargs="*", default=[])
    d.add_argument("--full-rdm", action="store_true")
    d.add_argument("--output", "-o", required=True)
    return p


def _validate(cmd: str, cfg: dict):
    if cfg.get("N") is not None:
        Ns = cfg["N"] if isinstance(cfg["N"], list) else [cfg["N"]]
        if any(n < 1 for n in Ns):
            raise ConfigError("N must be >= 1")
    if cmd in ("certify", "select", "dump") and not 1 <= cfg["m"] <= cfg["N"]:
        raise ConfigError(f"m = {cfg['m']} must satisfy 1 <= m <= N")
    if cmd == "random" and cfg["trials"] < 1:
        raise ConfigError("need at least one trial")


def _emit_text(text: str, output: str | None, default_name: str):
    if output is None and os.environ.get(OUTPUT_DIR_ENV):
        output = str(Path(os.environ[OUTPUT_DIR_ENV]) / default_name)
    if output is None:
        sys.stdout.write(text)
        return
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    Path(output).write_text(text)


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    cmd = args.command
    cfg = {k: v for k, v in vars(args).items() if k not in ("command", "verbose", "output", "no_timing", "workers")}
    if cmd == "random":
        cfg["m_list"] = cfg.pop("m") if args.mode == "fig2" else None
        cfg["m"] = (args.m or [2]) if args.mode == "fig1" else None
        cfg["workers"] = args.workers
    if cmd == "scan":
        cfg["mu"] = parse_grid(args.mu)
        cfg["workers"] = args.workers
    t0 = time.perf_counter()
    try:
        _validate(cmd, cfg)
        if cmd == "certify":
            out = run_certify(cfg)
        elif cmd == "select":
            out = run_select(cfg)
        elif cmd == "symmetry":
            out = run_symmetry_bound(cfg)
        elif cmd == "scan":
            rows = run_scan(cfg)
            _emit_text(csv_text(rows, SCAN_COLUMNS), args.output, "scan.csv")
            return 0
        elif cmd == "random":
            rows = run_random_study(cfg)
            cols = FIG1_COLUMNS if args.mode == "fig1" else FIG2_COLUMNS
            _emit_text(csv_text(rows, cols), args.output, f"random-{args.mode}.csv")
            return 0
        elif cmd == "dump":
            print(json.dumps(run_dump({**cfg, "output_path": args.output})))
            return 0
    except InconsistentDataError as exc:
        _error(str(exc), "inconsistent_data", certificate=[float(v) for v in exc.certificate],
               constraints=exc.constraints)
        return 3
    except (ConfigError, ValueError) as exc:
        _error(str(exc), "invalid_config")
        return 2
    except CertificationError as exc:
        _error(str(exc), "solver_error")
        return 4
    cfg.pop("workers", None)
    out.config = cfg
    if not args.no_timing:
        out.wall_time_s = time.perf_counter() - t0
    _emit_text(out.to_json() + "\n", args.output, f"{cmd}.json")
    return 0


def _error(message: str, kind: str, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
