"""Command-line front end.

Rates are given in units of lam and the time column is lam*t. Every run
writes CSV (with a '#' header carrying the full configuration) or a JSON
mirror with the same field names.

    jcloss fock --n 3 --gamma 0.2 --delta 5
    jcloss coherent --alpha 5 --gamma 1e-4 --tmax 2000 --steps 20001
    jcloss compare --init e0 --delta 1 --gamma 0.2
    jcloss figure --id 3 --outdir figs/
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, model, offresonant, oracle, resonant
from .errors import ConvergenceError, CutoffError, DomainError, StepSizeError

log = logging.getLogger("jcloss")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
OBSERVABLES = ("P_g", "n_photon", "P_0g", "trace")


class ConfigError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


@dataclass
class RunConfig:
    scenario: str
    n: int | None = None
    alpha: float | None = None
    init: str | None = None
    branch: str | None = None
    gamma: float = 0.2
    delta: float = 0.0
    tmax: float = 20.0
    steps: int = 2001
    method: str = "analytic"
    cutoff: int | None = None
    out: str | None = None
    format: str = "csv"

    def validate(self):
        if self.steps < 2:
            raise ConfigError("steps must be >= 2")
        if not self.tmax > 0:
            raise ConfigError("tmax must be > 0")
        if not self.gamma > 0:
            raise ConfigError("gamma must be > 0")
        if self.method not in ("analytic", "oracle", "both"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.scenario == "fock":
            if self.n is None or self.n < 1:
                raise ConfigError("fock needs --n >= 1")
            if self.delta != 0 and self.method != "oracle" and self.n > offresonant.K_MAX:
                raise ConfigError(f"analytic off-resonant series is capped at n <= {offresonant.K_MAX}; "
                                  "use --method oracle")
            if self.cutoff is not None and self.cutoff < self.n:
                raise ConfigError("cutoff must be >= n")
        elif self.scenario == "coherent":
            if self.alpha is None or self.alpha < 0:
                raise ConfigError("coherent needs --alpha >= 0")
            if self.alpha > resonant.MAX_ALPHA:
                raise ConfigError(f"alpha > {resonant.MAX_ALPHA} overflows the excitation cutoff")
        elif self.scenario == "compare":
            if self.init not in ("g1", "e0"):
                raise ConfigError("compare needs --init g1 or e0")
        elif self.scenario == "single-excitation":
            if self.branch not in ("plus", "minus"):
                raise ConfigError("single-excitation needs --branch plus or minus")
        else:
            raise ConfigError(f"unknown scenario {self.scenario!r}")

    @property
    def params(self) -> model.ModelParams:
        return model.ModelParams(1.0, self.delta, self.gamma)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.tmax, self.steps)


@dataclass
class RunResult:
    config: RunConfig
    columns: dict
    summary: dict
    notes: list


def _analytic_sector(state: model.SectorState, t) -> model.SectorState:
    if state.params.delta == 0:
        return resonant.evolve_sector(state, t)
    return offresonant.evolve_sector_offres(state, t)


def _oracle_series(kind: str, params, psi_bare, t) -> dict:
    cutoff = (len(psi_bare) - 1) // 2
    build = oracle.build_microscopic if kind == "microscopic" else oracle.build_phenomenological
    res = oracle.integrate(build(params, cutoff), oracle.DenseState.from_bare_amplitudes(params, psi_bare), t)
    return res.series.columns


def _columns(t, obs) -> dict:
    cols = {"lambda_t": t}
    if isinstance(obs, model.Observables):
        obs = {k: getattr(obs, k) for k in OBSERVABLES}
    cols.update({k: np.asarray(obs[k], dtype=float) for k in OBSERVABLES})
    return cols


def _with_oracle(cfg, cols, params, psi_bare, t, summary):
    ref = _oracle_series("microscopic", params, psi_bare, t)
    diff = 0.0
    for k in OBSERVABLES:
        cols[k + "_oracle"] = np.asarray(ref[k])
        if k != "trace":
            diff = max(diff, float(np.max(np.abs(cols[k] - ref[k]))))
    summary["max_abs_diff"] = diff


def run_fock(cfg: RunConfig) -> RunResult:
    params, t = cfg.params, cfg.times
    cutoff = cfg.cutoff or cfg.n
    psi = model.fock_amplitudes(cutoff, cfg.n)
    summary, notes = {}, []
    if cfg.method == "oracle":
        cols = _columns(t, _oracle_series("microscopic", params, psi, t))
    else:
        state = model.SectorState.from_bare_amplitudes(params, psi)
        obs = model.observables(_analytic_sector(state, t))
        if params.delta == 0:
            obs.P_g = resonant.fock_pg(cfg.n, t, params)
            obs.n_photon = resonant.fock_nphoton(cfg.n, t, params)
        cols = _columns(t, obs)
        if cfg.method == "both":
            _with_oracle(cfg, cols, params, psi, t, summary)
    return RunResult(cfg, cols, summary, notes)


def run_coherent(cfg: RunConfig) -> RunResult:
    params, t = cfg.params, cfg.times
    cutoff = cfg.cutoff or model.coherent_cutoff(cfg.alpha)
    psi = model.coherent_amplitudes(cfg.alpha, cutoff)
    summary, notes = {}, []
    method = cfg.method
    if params.delta != 0 and method != "oracle":
        notes.append("finite detuning: coherent state evolved with the oracle integrator")
        method = "oracle"
    if method == "oracle":
        cols = _columns(t, _oracle_series("microscopic", params, psi, t))
    else:
        cols = _columns(t, model.observables(resonant.coherent_solution(cfg.alpha, t, params, cutoff)))
        if method == "both":
            _with_oracle(cfg, cols, params, psi, t, summary)
    return RunResult(cfg, cols, summary, notes)


def run_single(cfg: RunConfig) -> RunResult:
    params, t = cfg.params, cfg.times
    cutoff = cfg.cutoff or 1
    target = model.Plus(1) if cfg.branch == "plus" else model.Minus(1)
    u = model.bare_to_dressed(params, cutoff)
    psi = u[:, target.position].copy()
    summary = {}
    state = model.SectorState.from_bare_amplitudes(params, psi)
    if cfg.method == "oracle":
        cols = _columns(t, _oracle_series("microscopic", params, psi, t))
    else:
        cols = _columns(t, model.observables(_analytic_sector(state, t)))
        if cfg.method == "both":
            _with_oracle(cfg, cols, params, psi, t, summary)
    if params.delta != 0:
        _, ground = offresonant.single_excitation_closed_form(1 if cfg.branch == "plus" else -1, t, params)
        summary["closed_form_max_abs_diff"] = float(np.max(np.abs(cols["P_0g"] - ground)))
    return RunResult(cfg, cols, summary, [])


def run_compare(cfg: RunConfig) -> RunResult:
    params, t = cfg.params, cfg.times
    cutoff = cfg.cutoff or 1
    psi = model.fock_amplitudes(cutoff, 1) if cfg.init == "g1" else model.fock_amplitudes(cutoff, 0, excited=True)
    if cfg.method == "oracle":
        ms = _oracle_series("microscopic", params, psi, t)["P_0g"]
    else:
        state = model.SectorState.from_bare_amplitudes(params, psi)
        ms = model.observables(_analytic_sector(state, t)).P_0g
    ph = _oracle_series("phenomenological", params, psi, t)["P_0g"]
    cols = {"lambda_t": t, "P0g_ms": np.asarray(ms), "P0g_ph": np.asarray(ph), "diff": np.asarray(ms) - ph}
    return RunResult(cfg, cols, {"sup_norm_diff": float(np.max(np.abs(cols["diff"])))}, [])


RUNNERS = {
    "fock": run_fock,
    "coherent": run_coherent,
    "single-excitation": run_single,
    "compare": run_compare,
}


def run(cfg: RunConfig) -> RunResult:
    cfg.validate()
    result = RUNNERS[cfg.scenario](cfg)
    _check_rows(result)
    return result


def _check_rows(result: RunResult):
    cols = result.columns
    for name, col in cols.items():
        if not np.all(np.isfinite(col)):
            raise NumericalError(f"non-finite values in column {name}")
    if "P_g" in cols:
        pg = cols["P_g"]
        if np.any(pg < -1e-9) or np.any(pg > 1 + 1e-9):
            raise NumericalError("P_g left [0, 1]")
        if np.any(np.abs(cols["trace"] - 1) >= 1e-8):
            raise NumericalError("trace drifted beyond 1e-8")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _config_dict(cfg: RunConfig) -> dict:
    return {k: v for k, v in dataclasses.asdict(cfg).items() if k not in ("out", "format")}


def render(result: RunResult, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "version": __version__,
            "config": _config_dict(result.config),
            "columns": {k: [float(x) for x in v] for k, v in result.columns.items()},
            "summary": result.summary,
            "notes": result.notes,
        }
        return json.dumps(doc, indent=1) + "\n"
    lines = [f"# jcloss {__version__}", "# config " + json.dumps(_config_dict(result.config), sort_keys=True)]
    lines += [f"# note {n}" for n in result.notes]
    names = list(result.columns)
    lines.append(",".join(names))
    data = np.column_stack([result.columns[k] for k in names])
    lines += [",".join(f"{x:.17g}" for x in row) for row in data]
    lines += [f"# {k}={v:.17g}" for k, v in result.summary.items()]
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".jcloss-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(result: RunResult):
    text = render(result, result.config.format)
    if result.config.out:
        write_atomic(result.config.out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Figure sweeps
# ---------------------------------------------------------------------------

def figure_configs(fig: int, outdir: str, fmt: str = "csv") -> list[RunConfig]:
    def path(name):
        return os.path.join(outdir, f"fig{fig}_{name}.{fmt}")

    if fig == 1:
        return [RunConfig("fock", n=n, gamma=0.2, delta=0.0, out=path(f"n{n}"), format=fmt) for n in (1, 3, 5)]
    if fig == 2:
        return [RunConfig("coherent", alpha=5.0, gamma=g, delta=0.0, tmax=2000.0, steps=40001,
                          out=path(f"gamma{g:g}"), format=fmt) for g in (1e-4, 1e-3, 1e-2)]
    if fig == 3:
        return [RunConfig("compare", init=i, gamma=0.2, delta=d, out=path(f"{i}_delta{d:g}"), format=fmt)
                for i in ("g1", "e0") for d in (0.1, 1.0)]
    if fig == 4:
        return [RunConfig("fock", n=3, gamma=0.2, delta=d, out=path(f"delta{d:g}"), format=fmt)
                for d in (0.1, 1.0, 5.0)]
    if fig == 5:
        return [RunConfig("coherent", alpha=3.0, gamma=g, delta=d, tmax=100.0, steps=10001, method="oracle",
                          out=path(f"delta{d:g}_gamma{g:g}"), format=fmt)
                for d in (1.0, 3.0, 5.0) for g in (2e-3, 1e-2)]
    raise ConfigError("figure id must be 1..5")


def run_figure(fig: int, outdir: str, fmt: str = "csv", workers: int | None = None) -> list[str]:
    configs = figure_configs(fig, outdir, fmt)
    for cfg in configs:
        cfg.validate()

    def job(cfg):
        emit(run(cfg))
        log.info("wrote %s", cfg.out)
        return cfg.out

    with ThreadPoolExecutor(max_workers=workers or min(len(configs), os.cpu_count() or 1)) as pool:
        return list(pool.map(job, configs))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jcloss", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="scenario", required=True)

    def common(p):
        p.add_argument("--gamma", type=float, default=0.2, help="cavity decay rate / lam")
        p.add_argument("--delta", type=float, default=0.0, help="detuning / lam")
        p.add_argument("--tmax", type=float, default=20.0, help="final lam*t")
        p.add_argument("--steps", type=int, default=2001, help="grid points in [0, tmax]")
        p.add_argument("--method", choices=("analytic", "oracle", "both"), default="analytic")
        p.add_argument("--cutoff", type=int, default=None, help="excitation cutoff override")
        p.add_argument("--out", default=None, help="output path (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("fock", help="initial |g,n>")
    p.add_argument("--n", type=int, required=True)
    common(p)
    p = sub.add_parser("coherent", help="initial |g,alpha>")
    p.add_argument("--alpha", type=float, required=True)
    common(p)
    p = sub.add_parser("single-excitation", help="initial dressed state |E_1+> or |E_1->")
    p.add_argument("--branch", choices=("plus", "minus"), required=True)
    common(p)
    p = sub.add_parser("compare", help="microscopic vs phenomenological P_0g")
    p.add_argument("--init", choices=("g1", "e0"), required=True)
    common(p)
    p = sub.add_parser("figure", help="regenerate the data behind one figure")
    p.add_argument("--id", type=int, required=True, choices=range(1, 6))
    p.add_argument("--outdir", default=".")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.scenario == "figure":
            run_figure(args.id, args.outdir, args.format, args.workers)
            return EXIT_OK
        fields = {f.name for f in dataclasses.fields(RunConfig)}
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in fields})
        emit(run(cfg))
    except (ConfigError, CutoffError) as exc:
        print(f"jcloss: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ConvergenceError, DomainError, StepSizeError, ArithmeticError) as exc:
        print(f"jcloss: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
