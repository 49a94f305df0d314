"""Monte Carlo driver over disorder realizations and N-sweeps.

Seeds derive from a master seed through a splittable counter scheme, so
ensembles are reproducible and order-free: records are aggregated sorted by
seed and per-stage failures are counted and reported rather than silently
dropped (silent exclusion would bias the frequencies).

Everything here estimates finite-N empirical frequencies and trends; the
limiting statements these frequencies shadow are out of reach at desk scale
and all sweeps are labeled exploratory.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .certify import build_certificate
from .disorder import DisorderConfig, build_realization, volume_fraction
from .errors import KacLabError
from .hartree import minimize_hartree
from .interaction import build_interaction, normalize_potential_spec
from .laplace import (
    assemble_laplacian,
    ground_state_component,
    lowest_eigenpairs,
    supnorm_bound_check,
)

RECORD_SCHEMA_VERSION = 1


@dataclass
class EnsembleSpec:
    """Ensemble parameters: a seedless base config plus the sweep axes."""

    base: dict                      # DisorderConfig fields without seed
    potential: dict                 # build_interaction spec (kind, kappa, ...)
    seeds: object = 30              # count or explicit list
    master_seed: int = 0
    N_values: list = field(default_factory=list)
    eta: float = 0.1
    sigma_ref: Optional[float] = None
    eig_tol: float = 1e-9
    el_tol: float = 1e-8
    max_iter: int = 5000
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.seeds, int) and self.seeds < 1:
            raise ValueError("seed count must be >= 1")
        if self.N_values and any(
            b <= a for a, b in zip(self.N_values, self.N_values[1:])
        ):
            raise ValueError("N_values must be strictly increasing")

    def seed_list(self) -> list:
        if isinstance(self.seeds, int):
            return derive_seeds(self.master_seed, self.seeds)
        return [int(s) for s in self.seeds]


def derive_seeds(master_seed: int, count: int) -> list:
    """Splittable per-realization seeds from one master seed."""
    ss = np.random.SeedSequence(master_seed)
    return [int(child.generate_state(1, np.uint64)[0]) for child in ss.spawn(count)]


def worker_budget(requested: int) -> int:
    """Requested worker count capped by the KL_WORKERS environment variable."""
    cap = os.environ.get("KL_WORKERS")
    if cap is not None:
        return max(1, min(requested, int(cap)))
    return max(1, requested)


def _potential_for(spec_pot: dict, N: int, d: int, h: float):
    kind, kappa, params = normalize_potential_spec(spec_pot)
    return build_interaction(kind, kappa, N, d, h, base_params=params)


def run_realization(
    config: DisorderConfig,
    potential: dict,
    eta: float = 0.1,
    sigma_ref: Optional[float] = None,
    eig_tol: float = 1e-9,
    el_tol: float = 1e-8,
    max_iter: int = 5000,
) -> dict:
    """Full pipeline on one realization, captured as a JSON-able record.

    disorder -> spectra -> host component -> Hartree -> certificate; any
    stage failure is captured in the record under "error" instead of raising,
    so ensembles keep going and report their failures.
    """
    record = {
        "schema_version": RECORD_SCHEMA_VERSION,
        "seed": config.seed,
        "config": {
            "d": config.d,
            "rho": config.rho,
            "N": config.N,
            "nu": config.nu,
            "r": config.r,
            "h": config.h,
        },
        "L": config.box_side,
        "K": None,
        "n_vacant": None,
        "volume_fraction": None,
        "lambda1": None,
        "lambda2": None,
        "degenerate_size": False,
        "host_component": None,
        "mass_outside": None,
        "multiple_support": False,
        "hartree": None,
        "certificate": None,
        "error": None,
    }
    stage = "disorder"
    try:
        real = build_realization(config)
        record["K"] = real.K
        record["n_vacant"] = real.n_vacant
        fraction, _, _ = volume_fraction(real, eta)
        record["volume_fraction"] = fraction
        if real.K == 0:
            record["error"] = {"stage": stage, "message": "empty vacancy set"}
            return record

        stage = "spectrum"
        op = assemble_laplacian(real)
        pair = lowest_eigenpairs(op, count=2, tol=eig_tol)
        record["lambda1"] = pair.lambda1
        record["lambda2"] = pair.lambda2
        record["degenerate_size"] = pair.degenerate_size

        v = _potential_for(potential, config.N, config.d, real.h)

        if pair.degenerate_size:
            record["error"] = {"stage": stage, "message": "one-node domain"}
            return record

        stage = "component"
        sel = ground_state_component(real, pair)
        record["host_component"] = sel.component
        record["mass_outside"] = sel.mass_outside
        record["multiple_support"] = sel.multiple

        stage = "hartree"
        hs = minimize_hartree(
            real, sel.component, v, config.N,
            tol=el_tol, max_iter=max_iter, eig_tol=eig_tol,
        )
        record["hartree"] = {
            "component": hs.component,
            "energy": hs.energy,
            "e1": hs.e1,
            "e2": hs.e2,
            "shift": hs.shift,
            "iterations": hs.iterations,
            "el_residual": hs.el_residual,
        }

        stage = "certificate"
        cert = build_certificate(
            real, pair, v, hs, eta=eta, sigma_ref=sigma_ref,
            supnorm=supnorm_bound_check(pair, real.d),
        )
        record["certificate"] = cert.to_dict()
    except (KacLabError, ValueError, FloatingPointError) as exc:
        record["error"] = {"stage": stage, "message": str(exc)}
    return record


def _job(args):
    config_fields, potential, kwargs = args
    return run_realization(DisorderConfig(**config_fields), potential, **kwargs)


def run_ensemble(spec: EnsembleSpec, N: Optional[int] = None) -> list:
    """Run the pipeline over all seeds; records come back sorted by seed."""
    base = dict(spec.base)
    if N is not None:
        base["N"] = N
    kwargs = {
        "eta": spec.eta,
        "sigma_ref": spec.sigma_ref,
        "eig_tol": spec.eig_tol,
        "el_tol": spec.el_tol,
        "max_iter": spec.max_iter,
    }
    jobs = [
        ({**base, "seed": seed}, spec.potential, kwargs) for seed in spec.seed_list()
    ]
    workers = worker_budget(spec.workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_job, jobs))
    else:
        records = [_job(j) for j in jobs]
    return sorted(records, key=lambda rec: rec["seed"])


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # clamp against roundoff: the score interval always contains p
    lo = min(max(center - half, 0.0), p)
    hi = max(min(center + half, 1.0), p)
    return p, lo, hi


def estimate_event_probabilities(spec: EnsembleSpec, records: Optional[list] = None) -> dict:
    """Empirical frequencies of the certificate events with Wilson intervals.

    Estimates P(volume event), P(gap event) and P(gap >= sigma_ref scale).
    Failed realizations are excluded from the frequencies but counted.
    """
    if records is None:
        if isinstance(spec.seeds, int) and spec.seeds < 30:
            raise ValueError("need >= 30 seeds for frequency estimates")
        records = run_ensemble(spec)

    ok_records = [r for r in records if r["error"] is None]
    n = len(ok_records)
    n_failed = len(records) - n

    vol = sum(1 for r in ok_records if r["certificate"]["volume_event"]["ok"])
    gap_ev = sum(1 for r in ok_records if r["certificate"]["gap_event"]["ok"])

    gap_ref_hits = None
    if spec.sigma_ref is not None and n:
        N = ok_records[0]["config"]["N"]
        d = ok_records[0]["config"]["d"]
        scale = spec.sigma_ref * math.log(N) ** -(1.0 + 2.0 / d)
        gap_ref_hits = sum(
            1
            for r in ok_records
            if r["lambda2"] is not None and (r["lambda2"] - r["lambda1"]) >= scale
        )

    def pack(hits):
        p, lo, hi = wilson_interval(hits, n)
        return {"frequency": p, "lo": lo, "hi": hi, "hits": hits, "n": n}

    out = {
        "n_records": len(records),
        "n_ok": n,
        "n_failed": n_failed,
        "volume_event": pack(vol),
        "gap_event": pack(gap_ev),
    }
    if gap_ref_hits is not None:
        out["gap_above_reference"] = pack(gap_ref_hits)
    return out


def _fit_loglog(x, y):
    """Least-squares slope of log y against log x, with R^2."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def scaling_sweep(spec: EnsembleSpec) -> dict:
    """Medians of lambda1, gap and depletion bound across an N sweep.

    Fits log(median lambda1) both against log N and against
    log((ln N)^(-2/d)); the asymptotic (ln N) regime is not reachable at desk
    scale, so the disordered fits are trend data only.
    """
    if len(spec.N_values) < 3:
        raise ValueError("need >= 3 N values for a sweep")
    d = spec.base["d"]
    rows = []
    for N in spec.N_values:
        records = run_ensemble(spec, N=N)
        ok = [r for r in records if r["error"] is None]
        lam1 = [r["lambda1"] for r in ok]
        gaps = [r["lambda2"] - r["lambda1"] for r in ok if r["lambda2"] is not None]
        depl = [
            r["certificate"]["depletion_bound"]
            for r in ok
            if r["certificate"] and r["certificate"]["depletion_bound"] is not None
        ]
        rows.append(
            {
                "N": N,
                "n_ok": len(ok),
                "n_failed": len(records) - len(ok),
                "median_lambda1": float(np.median(lam1)) if lam1 else None,
                "median_gap": float(np.median(gaps)) if gaps else None,
                "median_depletion_bound": float(np.median(depl)) if depl else 0.0,
            }
        )

    Ns = [row["N"] for row in rows if row["median_lambda1"]]
    lams = [row["median_lambda1"] for row in rows if row["median_lambda1"]]
    slope_N, _, r2_N = _fit_loglog(Ns, lams)
    log_scale = [math.log(N) ** (-2.0 / d) for N in Ns]
    slope_log, _, r2_log = _fit_loglog(log_scale, lams)
    fits = {
        "lambda1_vs_N": {"slope": slope_N, "r2": r2_N},
        "lambda1_vs_logN_scale": {"slope": slope_log, "r2": r2_log},
    }
    gap_rows = [r for r in rows if r["median_gap"]]
    if len(gap_rows) >= 3:
        gap_scale = [math.log(r["N"]) ** -(1.0 + 2.0 / d) for r in gap_rows]
        slope_gap, _, r2_gap = _fit_loglog(gap_scale, [r["median_gap"] for r in gap_rows])
        fits["gap_vs_gap_scale"] = {"slope": slope_gap, "r2": r2_gap}
    return {"rows": rows, "fits": fits}
