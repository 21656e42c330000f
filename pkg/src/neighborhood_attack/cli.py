"""Batch experiment driver: ``simulate``, ``exact``, ``bound`` and ``sweep``.

Exit codes: 0 success, 1 I/O failure, 2 invalid config, 3 resource cap,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .chain import sample_observables
from .config import RunConfig
from .errors import ConfigError, NumericFailure, ResourceCapError
from .estimators import BatchMeans, finalize, rows_from_observables
from .exact import check_cap, fkg_violations, odd_circle_witness, solve, write_pi_csv
from .graph import build_family, build_neighborhood_index, family_dims
from .normdist import kolmogorov_to_normal, wasserstein1_to_normal
from .stein import lam, stein_report

log = logging.getLogger("neighborhood_attack")

SIZE_PARAM = {
    "circle": "n",
    "circulant": "n",
    "complete": "n",
    "hypercube": "dim",
    "complete_bipartite": "side",
}

SAMPLE_COLUMNS = ["replica", "sample_index", "Y", "W", "eta", "theta", "m2"]
SWEEP_COLUMNS = ["kind", "size", "N", "r", "r_star", "lambda", "sigma2", "sigma2_source",
                 "rollin_delta", "theorem_delta_rstar", "theorem_delta_rsq",
                 "kolmogorov", "wasserstein1"]


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, cfg: RunConfig, command: str, files, started: float) -> None:
    _write_json(out / "manifest.json", {
        "command": command,
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.chain.seed,
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "wall_clock_seconds": time.time() - started,
        "checksums": {f.name: _sha256(f) for f in files},
    })


# -- shared pieces ----------------------------------------------------------

def _simulate_graph(g, index, cfg: RunConfig):
    """Run every replica; returns pooled rows, the per-replica arrays and the estimate."""
    chain = cfg.chain.resolved(g.n)
    if chain.samples < 1:
        raise ConfigError("simulate needs chain.samples >= 1")
    log.info("simulating %s: %d replica(s) x %d samples, burn-in %d, thinning %d",
             g.name, chain.replicas, chain.samples, chain.burn_in_steps, chain.thinning)
    with ThreadPoolExecutor(max_workers=chain.replicas) as pool:
        obs = list(pool.map(lambda k: sample_observables(g, index, chain, k),
                            range(chain.replicas)))
    acc = None
    for o in obs:
        bm = BatchMeans.for_stream(chain.samples).push_many(rows_from_observables(o, g.r, g.n))
        acc = bm if acc is None else acc.merge(bm)
    return obs, finalize(acc)


def _distances(y: np.ndarray, center: float, sigma2: float, source: str) -> dict:
    w = (y - center) / math.sqrt(sigma2)
    return {
        "normalization": source,
        "sigma2": sigma2,
        "center": center,
        "kolmogorov": kolmogorov_to_normal(w),
        "wasserstein1": wasserstein1_to_normal(w),
    }


def _z(estimate, exact, se):
    if se is None or not se or not math.isfinite(se):
        return None
    return (estimate - exact) / se


# -- subcommands ------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path) -> list[Path]:
    g = build_family(cfg.family["kind"], **cfg.family_params())
    index = build_neighborhood_index(g)
    p = cfg.chain.p
    exact = None
    if cfg.exact:
        check_cap(g.n, cfg.cap)
        exact = solve(g, index, p, cfg.cap)

    obs, est = _simulate_graph(g, index, cfg)
    y_all = np.concatenate([o["y"] for o in obs]).astype(float)

    if exact is not None:
        sigma2, source = exact.report.var_y, "exact"
        center = exact.report.mean_y
    else:
        sigma2, source = est.var_y_hat, "estimated"
        center = 0.0 if p == 0.5 else est.mean_y
    if not sigma2 > 0:
        raise NumericFailure("Var(Y) is zero; W is undefined")

    summary = {
        "graph": {"name": g.name, "N": g.n, "r": g.r, "r_star": index.r_star},
        "chain": cfg.chain.resolved(g.n).__dict__,
        "estimates": est.to_dict(),
        "distances": _distances(y_all, center, sigma2, source) if cfg.distances else None,
        "stein": None,
    }
    if p == 0.5:
        if exact is not None:
            rep = stein_report(g.r, g.n, index.r_star, sigma2_exact=exact.report.var_y,
                               var_term_exact=exact.report.var_m2_y)
        else:
            rep = stein_report(g.r, g.n, index.r_star,
                               sigma2_estimate=est.var_y_hat, sigma2_se=est.se_var_y,
                               var_term_estimate=est.var_cond_m2_hat,
                               var_term_se=est.se_var_cond_m2)
        summary["stein"] = rep.to_dict()
    if exact is not None:
        ex = exact.report
        summary["exact"] = ex.to_dict()
        summary["cross_check_z"] = {
            "var_y": _z(est.var_y_hat, ex.var_y, est.se_var_y),
            "cov_eta_theta": _z(est.cov_eta_theta_hat, ex.cov_eta_theta, est.se_cov_eta_theta),
            "var_cond_m2": _z(est.var_cond_m2_hat, ex.var_m2_state, est.se_var_cond_m2),
            "mean_y": _z(est.mean_y, ex.mean_y, est.se_mean_y),
        }

    samples_path = out / "samples.csv"
    sigma = math.sqrt(sigma2)
    with open(samples_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SAMPLE_COLUMNS)
        for rep_id, o in enumerate(obs):
            m2 = (g.r + 1) ** 2 + o["s2"] / g.n
            w = (o["y"] - center) / sigma
            for i in range(len(o["y"])):
                writer.writerow([rep_id, i, int(o["y"][i]), repr(float(w[i])),
                                 int(o["eta"][i]), int(o["theta"][i]), repr(float(m2[i]))])
    summary_path = out / "summary.json"
    _write_json(summary_path, summary)
    return [samples_path, summary_path]


def cmd_exact(cfg: RunConfig, out: Path) -> list[Path]:
    g = build_family(cfg.family["kind"], **cfg.family_params())
    check_cap(g.n, cfg.cap)
    index = build_neighborhood_index(g)
    p = cfg.chain.p
    sol = solve(g, index, p, cfg.cap)
    stat = sol.stationary
    result = {
        "graph": {"name": g.name, "N": g.n, "r": g.r, "r_star": index.r_star},
        "p": p,
        "stationary": {
            "method": stat.method,
            "residual": stat.residual,
            "total_mass_error": abs(float(stat.pi.sum()) - 1.0),
            "flip_asymmetry": stat.flip_asymmetry(),
            "recurrent_class_size": len(stat.recurrent_class),
        },
        "functionals": sol.report.to_dict(),
        "variance_bracket": [(g.r + 1) * g.n / 2, (g.r + 1) * g.n],
        "linearity": None,
        "stein": None,
        "fkg": None,
    }
    if sol.linearity is not None:
        result["linearity"] = {
            "max_deviation": sol.linearity.max_deviation,
            "max_deviation_exact": str(sol.linearity.max_deviation_exact),
        }
    if p == 0.5:
        result["stein"] = stein_report(g.r, g.n, index.r_star, sigma2_exact=sol.report.var_y,
                                       var_term_exact=sol.report.var_m2_y).to_dict()
    if cfg.fkg:
        fkg = fkg_violations(stat, limit=cfg.fkg_limit, seed=cfg.chain.seed)
        payload = fkg.to_dict()
        if cfg.family["kind"] == "circle" and g.n % 2 == 1 and g.n >= 5:
            payload["odd_circle_witness"] = odd_circle_witness(g.n, stat)
        if fkg.n_violations == 0:
            log.warning("no log-supermodularity violation found on %s", g.name)
            payload["discrepancy"] = "no violating pair found"
        result["fkg"] = payload
    path = out / "exact.json"
    _write_json(path, result)
    files = [path]
    if cfg.dump_pi:
        write_pi_csv(out / "pi.csv", stat)
        files.append(out / "pi.csv")
    return files


def _dims(cfg: RunConfig):
    if cfg.dims is not None:
        d = cfg.dims
        return d["n"], d["r"], d.get("r_star"), f"dims(r={d['r']}, N={d['n']})"
    n, r, r_star = family_dims(cfg.family["kind"], **cfg.family_params())
    return n, r, r_star, cfg.family["kind"]


def cmd_bound(cfg: RunConfig, out: Path) -> list[Path]:
    n, r, r_star, name = _dims(cfg)
    kwargs = {}
    if cfg.exact and cfg.family is not None:
        check_cap(n, cfg.cap)
        g = build_family(cfg.family["kind"], **cfg.family_params())
        sol = solve(g, build_neighborhood_index(g), 0.5, cfg.cap)
        kwargs = {"sigma2_exact": sol.report.var_y, "var_term_exact": sol.report.var_m2_y}
    rep = stein_report(r, n, r_star, cfg.chain.p, **kwargs)
    path = out / "bound.json"
    _write_json(path, {"name": name, "stein": rep.to_dict()})
    return [path]


def sweep_rows(cfg: RunConfig):
    kind = cfg.family["kind"]
    if not cfg.sizes:
        raise ConfigError("sweep needs a nonempty 'sizes' list")
    base = cfg.family_params()
    for size in cfg.sizes:
        params = {**base, SIZE_PARAM[kind]: size}
        n, r, r_star = family_dims(kind, **params)
        row = {"kind": kind, "size": size, "N": n, "r": r, "r_star": r_star,
               "lambda": float(lam(r, n)), "kolmogorov": None, "wasserstein1": None}
        kwargs = {}
        if cfg.exact and n <= cfg.cap:
            g = build_family(kind, **params)
            sol = solve(g, build_neighborhood_index(g), 0.5, cfg.cap)
            kwargs = {"sigma2_exact": sol.report.var_y, "var_term_exact": sol.report.var_m2_y}
        if cfg.simulate:
            g = build_family(kind, **params)
            index = build_neighborhood_index(g)
            obs, est = _simulate_graph(g, index, cfg)
            if "sigma2_exact" not in kwargs:
                kwargs = {"sigma2_estimate": est.var_y_hat, "sigma2_se": est.se_var_y,
                          "var_term_estimate": est.var_cond_m2_hat,
                          "var_term_se": est.se_var_cond_m2}
            sigma2 = kwargs.get("sigma2_exact", est.var_y_hat)
            y = np.concatenate([o["y"] for o in obs]).astype(float)
            d = _distances(y, 0.0, sigma2, "exact" if "sigma2_exact" in kwargs else "estimated")
            row["kolmogorov"] = d["kolmogorov"]
            row["wasserstein1"] = d["wasserstein1"]
        rep = stein_report(r, n, r_star, cfg.chain.p, **kwargs)
        row.update(sigma2=rep.sigma2, sigma2_source=rep.sigma2_source,
                   rollin_delta=rep.rollin_delta,
                   theorem_delta_rstar=rep.theorem_delta_rstar,
                   theorem_delta_rsq=rep.theorem_delta_rsq)
        yield row


def cmd_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    path = out / "sweep.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in sweep_rows(cfg):
            writer.writerow({k: ("" if row[k] is None else
                                 repr(row[k]) if isinstance(row[k], float) else row[k])
                             for k in SWEEP_COLUMNS})
    return [path]


COMMANDS = {"simulate": cmd_simulate, "exact": cmd_exact, "bound": cmd_bound, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nattack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a JSON run config")
        cmd.add_argument("--out", help="output directory (overrides config 'out')")
        cmd.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides config)")
        cmd.add_argument("--cap", type=int, help="exact-mode node cap override (max 20)")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg.chain = replace(cfg.chain, seed=args.seed)
        if args.cap is not None:
            cfg.cap = args.cap
        if args.out is not None:
            cfg.out = args.out
        if args.command in ("simulate", "exact", "sweep") and cfg.family is None:
            raise ConfigError(f"{args.command} needs a 'family' in the config")
        if args.command == "bound" and cfg.family is None and cfg.dims is None:
            raise ConfigError("bound needs either 'family' or 'dims'")
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, out)
        _write_manifest(out, cfg, args.command, files, started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
