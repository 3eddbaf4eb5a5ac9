"""Campaign runner behind the CLI subcommands."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .analytics import base_case, enhancement, noisy_params_for_modes, power_law_fidelity, power_law_probability
from .circuit import NoiseModel
from .config import ExperimentConfig, parse_config, preset_jobs
from .errors import ConfigError, NumericalError, OracleBoundsError, SaturatedEnhancement, TruncationError
from .fock import oracle_run
from .protocol import UAConfig, run_ensemble, run_single_sample, sample_draws

CSV_VERSION_LINE = "# uasim results v1"
ORACLE_COV_TOL = 5e-3
ORACLE_PROB_TOL = 1e-3
VALIDATED_SIGMA = 0.05


@dataclass
class ResultRow:
    sigma: float
    N: int
    n: int
    k: int
    fidelity: float
    fidelity_stderr: float
    prob_exact: float
    prob_approx: float
    prob_stderr: float
    enhancement_vs_n1: float
    samples: int
    seed: int
    wallclock: float = 0.0

    def key(self) -> tuple:
        return (fmt(self.sigma), str(self.N), str(self.n))


RESULT_COLUMNS = [f.name for f in fields(ResultRow)]


def fmt(value) -> str:
    """Locale-independent cell text; floats carry 9 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    text = f"{value:.9g}"
    return "0" if text == "-0" else text


def format_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(format_csv(columns, rows))


def read_result_keys(path) -> set:
    """Coordinates ``(sigma, N, n)`` of rows already present in a results CSV."""
    path = Path(path)
    if not path.exists():
        return set()
    lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    if not lines:
        return set()
    reader = csv.DictReader(lines)
    if reader.fieldnames != RESULT_COLUMNS:
        raise ConfigError(f"{path}: header does not match the results format")
    return {(r["sigma"], r["N"], r["n"]) for r in reader}


def default_threads() -> int:
    env = os.environ.get("UASIM_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"UASIM_THREADS={env!r} is not an integer") from exc
        if value < 1:
            raise ConfigError("UASIM_THREADS must be at least 1")
        return value
    return os.cpu_count() or 1


def _ua_config(cfg: ExperimentConfig, N: int, n: int) -> UAConfig:
    try:
        return UAConfig(N, n, cfg.squeezing_for(N), cfg.input_phases_for(N), cfg.weighting)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sidecar_dir(cfg: ExperimentConfig, out=None) -> Path:
    base = out or cfg.output or "results.csv"
    return Path(str(base) + ".draws")


def sidecar_path(directory: Path, N: int, n: int, sigma: float, index: int) -> Path:
    return Path(directory) / f"N{N}_n{n}_sigma{fmt(sigma)}_sample{index}.json"


def write_sidecar(path: Path, *, seed, index, sigma, N, n, draws):
    record = {
        "schema_version": 1,
        "seed": int(seed),
        "sample": int(index),
        "sigma": float(sigma),
        "N": N,
        "n": n,
        "k": int(draws.shape[1]),
        "draws": draws.tolist(),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=1) + "\n")


def read_sidecar(path: Path) -> dict:
    record = json.loads(Path(path).read_text())
    record["draws"] = np.asarray(record["draws"], dtype=float)
    return record


class SweepPointError(NumericalError):
    """Numerical failure tagged with the sweep coordinates that caused it."""

    def __init__(self, point: dict, cause: Exception):
        coords = ", ".join(f"{k}={v}" for k, v in point.items())
        super().__init__(f"numerical failure at {coords}: {cause}")
        self.point = point


def _evaluate_point(cfg, N, n, sigma, seed, samples, threads, cache):
    """Ensemble result at one point, memoised so n=1 baselines are shared."""
    key = (N, n, sigma)
    if key not in cache:
        point = {"sigma": sigma, "N": N, "n": n}
        config = _ua_config(cfg, N, n)
        target = cfg.target_for(N)
        t0 = time.perf_counter()
        try:
            res = run_ensemble(config, target, NoiseModel(sigma), samples, seed, threads)
        except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise SweepPointError(point, exc) from exc
        cache[key] = (res, target.noisy_param_count, time.perf_counter() - t0)
    return cache[key]


def _row(cfg, N, n, sigma, seed, samples, threads, cache, timing) -> ResultRow:
    res, k, elapsed = _evaluate_point(cfg, N, n, sigma, seed, samples, threads, cache)
    base, _, _ = _evaluate_point(cfg, N, 1, sigma, seed, samples, threads, cache)
    try:
        eps = enhancement(base.fidelity, res.fidelity)
    except SaturatedEnhancement:
        eps = float("nan")
    return ResultRow(
        sigma=sigma, N=N, n=n, k=k,
        fidelity=res.fidelity, fidelity_stderr=res.fidelity_stderr,
        prob_exact=res.exact_p, prob_approx=res.approx_p, prob_stderr=res.exact_p_stderr,
        enhancement_vs_n1=eps, samples=samples, seed=seed,
        wallclock=elapsed if timing else 0.0,
    )


def _record_draws(cfg, N, n, sigma, seed, out):
    if not cfg.record_samples:
        return
    k = cfg.target_for(N).noisy_param_count
    directory = sidecar_dir(cfg, out)
    for index in cfg.record_samples:
        draws = sample_draws(seed, index, n, k, sigma)
        write_sidecar(sidecar_path(directory, N, n, sigma, index),
                      seed=seed, index=index, sigma=sigma, N=N, n=n, draws=draws)


def run_command(
    cfg: ExperimentConfig,
    seed: int | None = None,
    samples: int | None = None,
    threads: int | None = None,
    out=None,
    resume: bool = False,
    timing: bool = False,
    echo=print,
) -> list[ResultRow]:
    """Evaluate every grid point ``(sigma, N, n)`` and write one CSV row each.

    With ``resume`` the existing output is kept and only missing points are
    appended. ``wallclock`` is recorded only when ``timing`` is set, so the
    default output is bit-identical across runs and thread counts.
    """
    seed = cfg.seed if seed is None else seed
    samples = cfg.samples if samples is None else samples
    threads = threads or default_threads()
    out = out or cfg.output
    done = read_result_keys(out) if (resume and out) else set()

    cache: dict = {}
    rows = []
    grid = itertools.product(cfg.sigmas(), cfg.mode_counts(), cfg.replica_counts())
    for sigma, N, n in grid:
        if (fmt(sigma), str(N), str(n)) in done:
            continue
        row = _row(cfg, N, n, sigma, seed, samples, threads, cache, timing)
        _record_draws(cfg, N, n, sigma, seed, out)
        rows.append(row)
        echo(f"sigma={fmt(sigma)} N={N} n={n} k={row.k} F={row.fidelity:.6f} "
             f"(+-{row.fidelity_stderr:.2g}) P={row.prob_exact:.6f} eps={fmt(row.enhancement_vs_n1)}")

    if out:
        values = [[getattr(r, c) for c in RESULT_COLUMNS] for r in rows]
        if resume and done:
            with open(out, "a", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                for v in values:
                    writer.writerow([fmt(x) for x in v])
        else:
            write_csv(out, RESULT_COLUMNS, values)
    echo(f"{len(rows)} row(s) written" + (f" to {out}" if out else ""))
    return rows


def sweep_command(cfg: ExperimentConfig, resume: bool = False, **kwargs) -> list[ResultRow]:
    """Cartesian grid over ``sigma``, ``N`` and ``n``; see :func:`run_command`."""
    return run_command(cfg, resume=resume, **kwargs)


@dataclass
class OracleReport:
    sigma: float
    N: int
    n: int
    sample: int
    cutoff: int
    leakage: float
    cov_deviation: float
    prob_gaussian: float
    prob_oracle: float
    fidelity_oracle: float
    passed: bool
    in_regime: bool

    @property
    def prob_deviation(self) -> float:
        return abs(self.prob_gaussian - self.prob_oracle)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lines = [
            f"oracle-check N={self.N} n={self.n} sigma={fmt(self.sigma)} sample={self.sample} "
            f"cutoff={self.cutoff}",
            f"  max |dV| = {self.cov_deviation:.3e} (tol {ORACLE_COV_TOL:g})",
            f"  |dP|     = {self.prob_deviation:.3e} (tol {ORACLE_PROB_TOL:g}); "
            f"P_gauss={self.prob_gaussian:.9f} P_fock={self.prob_oracle:.9f}",
            f"  leakage  = {self.leakage:.3e}",
            f"  {verdict}",
        ]
        if not self.in_regime:
            lines.append(f"  Gaussian approximation out of validated regime (sigma > {VALIDATED_SIGMA:g})")
        return "\n".join(lines)


def oracle_check_command(
    cfg: ExperimentConfig, sample: int, cutoff: int | None = None, out=None
) -> OracleReport:
    """Replay one noise draw through the Gaussian and the Fock pipelines.

    The draw is read from its sidecar when one exists and recorded otherwise.
    Without an explicit cutoff (argument or config) the oracle starts at the
    default cutoff and escalates until the leakage guard is satisfied.
    """
    sigmas = cfg.sigmas()
    if len(sigmas) != 1 or len(cfg.mode_counts()) != 1 or len(cfg.replica_counts()) != 1:
        raise ConfigError("oracle-check needs a single (sigma, N, n) point")
    sigma, N, n = sigmas[0], cfg.mode_counts()[0], cfg.replica_counts()[0]
    config = _ua_config(cfg, N, n)
    target = cfg.target_for(N)
    path = sidecar_path(sidecar_dir(cfg, out), N, n, sigma, sample)
    if path.exists():
        draws = read_sidecar(path)["draws"]
    else:
        draws = sample_draws(cfg.seed, sample, n, target.noisy_param_count, sigma)
        write_sidecar(path, seed=cfg.seed, index=sample, sigma=sigma, N=N, n=n, draws=draws)

    gauss = run_single_sample(config, target, NoiseModel(sigma), draws=draws)
    cutoff = cutoff if cutoff is not None else cfg.cutoff
    try:
        fock = oracle_run(config, target, draws, cutoff=cutoff)
    except TruncationError as exc:
        # leakage guard still firing at the largest affordable cutoff
        raise OracleBoundsError(f"oracle truncation not controlled: {exc}") from exc
    dev = float(np.max(np.abs(fock.covariance - gauss.covariance)))
    passed = dev <= ORACLE_COV_TOL and abs(gauss.exact_p - fock.probability) <= ORACLE_PROB_TOL
    in_regime = sigma <= VALIDATED_SIGMA
    return OracleReport(
        sigma=sigma, N=N, n=n, sample=sample, cutoff=fock.cutoff, leakage=fock.leakage,
        cov_deviation=dev, prob_gaussian=gauss.exact_p, prob_oracle=fock.probability,
        fidelity_oracle=fock.fidelity, passed=passed and in_regime, in_regime=in_regime,
    )


POWERLAW_COLUMNS = ["sigma", "N", "n", "k", "F1", "P1", "fidelity", "probability",
                    "fidelity_n1", "enhancement_vs_n1", "r_base"]


def powerlaw_rows(modes=None, ks=None, ns=(1, 2), sigma_from=0.0, sigma_to=0.1, steps=11,
                  r_base=0.1) -> list[list]:
    """Power-law curves ``F1**(2k)``, ``P1**(2k)`` on a sigma grid.

    Give ``modes`` (``k = N**2 - 1``) or explicit ``ks``; rows built from a
    bare ``k`` carry ``N = 0``.
    """
    if (modes is None) == (ks is None):
        raise ConfigError("give exactly one of modes or k")
    if steps < 2:
        raise ConfigError("steps must be at least 2")
    if not 0 <= sigma_from <= sigma_to <= 0.1:
        raise ConfigError("power-law sigma range must lie within [0, 0.1]")
    try:
        targets = [(N, noisy_params_for_modes(N)) for N in modes] if modes else [(0, k) for k in ks]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    for sigma in np.linspace(sigma_from, sigma_to, steps):
        sigma = float(sigma)
        for N, k in targets:
            F_unprot = power_law_fidelity(base_case(1, sigma, r_base)[0], k)
            for n in ns:
                F1, P1 = base_case(int(n), sigma, r_base)
                F = power_law_fidelity(F1, k)
                try:
                    eps = enhancement(F_unprot, F)
                except SaturatedEnhancement:
                    eps = float("nan")
                rows.append([sigma, N, int(n), k, F1, P1, F, power_law_probability(P1, k),
                             F_unprot, eps, r_base])
    return rows


def powerlaw_command(out=None, echo=print, **params) -> list[list]:
    rows = powerlaw_rows(**params)
    for r in rows:
        echo(f"sigma={fmt(r[0])} N={r[1]} n={r[2]} k={r[3]} F={r[6]:.6f} P={r[7]:.6f} eps={fmt(r[9])}")
    if out:
        write_csv(out, POWERLAW_COLUMNS, rows)
        echo(f"{len(rows)} row(s) written to {out}")
    return rows


def figure_command(preset_id: str, out_dir="figures", samples=None, threads=None, echo=print):
    """Run every job of a figure preset; one CSV per job under ``out_dir``."""
    written = []
    for job in preset_jobs(preset_id):
        path = Path(out_dir) / f"{preset_id}_{job['name']}.csv"
        echo(f"== {preset_id}/{job['name']} -> {path}")
        if job["kind"] == "run":
            cfg = parse_config(job["config"])
            run_command(cfg, samples=samples, threads=threads, out=path, echo=echo)
        else:
            params = dict(job["params"])
            if "k" in params:
                params["ks"] = params.pop("k")
            powerlaw_command(out=path, echo=echo, ns=params.pop("n"), **params)
        written.append(path)
    return written


__all__ = [
    "ResultRow", "RESULT_COLUMNS", "OracleReport", "POWERLAW_COLUMNS",
    "run_command", "sweep_command", "oracle_check_command", "powerlaw_command",
    "powerlaw_rows", "figure_command", "format_csv", "read_result_keys",
]
