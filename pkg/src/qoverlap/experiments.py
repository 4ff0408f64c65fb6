"""Named experiment presets: the two overlap tables, figure data and an eta sweep.

Each runner returns plain data (rows / trajectories) and has a matching
renderer; the CLI only wires flags to these functions and writes files.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .fluid import DEFAULT_STEP, overlap_adjusted, overlap_fluid, solve_adjusted, solve_fluid
from .infinite import SinusoidalInfModel, closed_form_overlap, closed_form_x
from .model import ConfigError, QueueModel, sinusoidal_model
from .sim import (DEFAULT_REPLICATIONS, Histogram, SimConfig, mean_counts, run_replications,
                  simulate_accelerated)

METHODS = ("fluid", "adjusted", "simulation", "closed-form", "numeric-ode")
EXPERIMENTS = ("table1", "table2", "figure1", "figure2", "figure3", "figure4", "overlap", "converge")

# (alpha, beta, tau) rows of the multi-server table; n=30, mu=1, lam=1, rho=0.8
TABLE1_ROWS = (
    (0.5, 0.3, 3.0), (0.5, 0.3, 6.0), (0.5, 0.5, 3.0), (0.5, 0.5, 6.0),
    (0.5, 0.5, 9.0), (1.0, 0.3, 9.0), (1.0, 0.5, 3.0), (1.0, 0.5, 9.0),
)
TABLE1_RHO = 0.8
TABLE1_SERVERS = 30

TABLE2_MODEL = SinusoidalInfModel(alpha=0.5, beta=2.0, lam=10.0, mu=1.0)
TABLE2_TAUS = (3.0, 5.0, 7.0, 9.0)

FIGURE_TAUS = (3.0, 5.0, 7.0, 9.0)
FIGURE_HORIZON = 10.0
FIGURE_GRID_STEP = 0.05
CONVERGE_ETAS = (1, 4, 16)
CONVERGE_REPS = 100


def table1_model(alpha: float, beta: float) -> QueueModel:
    return sinusoidal_model(alpha, beta, lam=1.0, n=TABLE1_SERVERS, rho=TABLE1_RHO, mu=1.0)


def figure1_model() -> QueueModel:
    """30 servers, mu = 1, lambda(t) = 30 (0.5 sin(0.5 t) + 1)."""
    return sinusoidal_model(0.5, 0.5, lam=1.0, n=30, rho=1.0, mu=1.0)


def row_seed(master_seed: int, key: int) -> int:
    """Seed for one preset row, independent of which other rows are run."""
    ss = np.random.SeedSequence([int(master_seed) & ((1 << 64) - 1), int(key)])
    return int(ss.generate_state(1, np.uint64)[0])


def inf_model_from(model: QueueModel) -> SinusoidalInfModel:
    """Closed-form parameters for an infinite-server sinusoidal model (empty start)."""
    if not model.infinite:
        raise ConfigError("closed-form requires infinitely many servers")
    rate = model.arrival
    if rate.kind != "sinusoidal":
        raise ConfigError("closed-form requires a sinusoidal arrival rate")
    if model.initial_count != 0:
        raise ConfigError("closed-form assumes an empty system at t=0")
    scale = rate.n * rate.rho
    return SinusoidalInfModel(rate.alpha, rate.beta * scale, rate.lam * scale, model.mu)


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    model: QueueModel | None = None
    methods: tuple[str, ...] = ()
    taus: tuple[float, ...] = ()
    out: Path | None = None
    seed: int = 0
    replications: int = DEFAULT_REPLICATIONS
    step: float = DEFAULT_STEP
    horizon: float | None = None
    count_self: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods: {', '.join(bad)}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.step > 0:
            raise ConfigError("step must be positive")
        if any(t < 0 for t in self.taus):
            raise ConfigError("tau values must be nonnegative")

    def horizon_for(self, taus: Sequence[float], mu: float) -> float:
        if self.horizon is not None:
            return self.horizon
        return max(taus) + 20.0 / mu


@dataclass
class ReportRow:
    params: dict[str, float]
    values: dict[str, float]
    extras: dict[str, float] = field(default_factory=dict)

    def rel_error(self, method: str) -> float | None:
        """Percent |approx - sim| / sim, one decimal."""
        sim = self.values.get("simulation")
        if sim is None or method not in self.values or method == "simulation" or sim == 0:
            return None
        return round(100.0 * abs(self.values[method] - sim) / sim, 1)


# -- tables -----------------------------------------------------------------

def run_table1(spec: ExperimentSpec) -> list[ReportRow]:
    methods = spec.methods or ("fluid", "adjusted", "simulation")
    for m in methods:
        if m not in ("fluid", "adjusted", "simulation"):
            raise ConfigError(f"method {m!r} does not apply to the multi-server table")
    keys = [i for i, row in enumerate(TABLE1_ROWS) if not spec.taus or row[2] in spec.taus]
    if not keys:
        raise ConfigError("no table rows match the requested tau values")
    rows = []
    for key in keys:
        alpha, beta, tau = TABLE1_ROWS[key]
        model = table1_model(alpha, beta)
        horizon = spec.horizon_for([tau], model.mu)
        values: dict[str, float] = {}
        extras: dict[str, float] = {}
        if "fluid" in methods:
            values["fluid"] = overlap_fluid(model, tau, horizon, spec.step).expected_overlap
        if "adjusted" in methods:
            values["adjusted"] = overlap_adjusted(model, tau, horizon, spec.step).expected_overlap
        if "simulation" in methods:
            cfg = SimConfig(tau, horizon, spec.replications, row_seed(spec.seed, key), spec.count_self)
            agg = run_replications(model, cfg, spec.workers, keep_samples=False)
            values["simulation"] = agg.mean
            extras.update(sim_variance=agg.variance, sim_std=math.sqrt(agg.variance),
                          sim_stderr=agg.stderr)
        rows.append(ReportRow({"alpha": alpha, "beta": beta, "rho": TABLE1_RHO, "tau": tau},
                              values, extras))
    return rows


def run_table2(spec: ExperimentSpec) -> list[ReportRow]:
    m = TABLE2_MODEL if spec.model is None else inf_model_from(spec.model)
    methods = spec.methods or ("closed-form", "numeric-ode", "simulation")
    taus = spec.taus or TABLE2_TAUS
    queue = m.queue_model()
    numeric = None
    if "numeric-ode" in methods:
        numeric = solve_fluid(queue, max(taus) + 1.0 / m.mu, spec.step)
    rows = []
    for tau in taus:
        values: dict[str, float] = {}
        extras: dict[str, float] = {}
        for method in methods:
            if method == "closed-form":
                values[method] = closed_form_overlap(m, tau)
            elif method == "numeric-ode":
                a, b = numeric.at("cum_x", [tau, tau + 1.0 / m.mu])
                values[method] = float(b - a)
            elif method == "simulation":
                horizon = spec.horizon_for([tau], m.mu)
                key = int(round(tau * 1000))
                cfg = SimConfig(tau, horizon, spec.replications, row_seed(spec.seed, key), spec.count_self)
                agg = run_replications(queue, cfg, spec.workers, keep_samples=False)
                values[method] = agg.mean
                extras.update(sim_variance=agg.variance, sim_stderr=agg.stderr)
            else:
                raise ConfigError(f"method {method!r} does not apply to the infinite-server table")
        rows.append(ReportRow({"tau": tau}, values, extras))
    return rows


def run_overlap(spec: ExperimentSpec) -> list[ReportRow]:
    """Chosen methods at each tau for an arbitrary configured model."""
    if spec.model is None:
        raise ConfigError("overlap needs a model config (--config)")
    if not spec.methods:
        raise ConfigError("no methods requested")
    if not spec.taus:
        raise ConfigError("overlap needs at least one tau (--tau)")
    model = spec.model
    horizon = spec.horizon_for(spec.taus, model.mu)
    for method in spec.methods:
        if method in ("closed-form", "numeric-ode"):
            if method == "closed-form":
                inf_model_from(model)
            elif not model.infinite:
                raise ConfigError("numeric-ode applies to infinite-server models; use fluid")
    cache = {}
    if "fluid" in spec.methods or "numeric-ode" in spec.methods:
        cache["fluid"] = solve_fluid(model, horizon, spec.step)
    if "adjusted" in spec.methods:
        cache["adjusted"] = solve_adjusted(model, horizon, spec.step)
    rows = []
    for tau in spec.taus:
        values: dict[str, float] = {}
        extras: dict[str, float] = {}
        for method in spec.methods:
            if method == "fluid":
                r = overlap_fluid(model, tau, horizon, spec.step, traj=cache["fluid"])
                values[method] = r.expected_overlap
                if r.first_passage is not None:
                    extras["t0"] = r.first_passage.time
            elif method == "adjusted":
                r = overlap_adjusted(model, tau, horizon, spec.step, traj=cache["adjusted"])
                values[method] = r.expected_overlap
                if r.first_passage is not None:
                    extras["ta"] = r.first_passage.time
            elif method == "numeric-ode":
                values[method] = overlap_fluid(model, tau, horizon, spec.step,
                                               traj=cache["fluid"]).expected_overlap
            elif method == "closed-form":
                values[method] = closed_form_overlap(inf_model_from(model), tau)
            elif method == "simulation":
                cfg = SimConfig(tau, horizon, spec.replications,
                                row_seed(spec.seed, int(round(tau * 1000))), spec.count_self)
                agg = run_replications(model, cfg, spec.workers, keep_samples=False)
                values[method] = agg.mean
                extras.update(sim_variance=agg.variance, sim_stderr=agg.stderr)
        rows.append(ReportRow({"tau": tau}, values, extras))
    return rows


def render_rows(rows: list[ReportRow], fmt: str = "csv") -> str:
    if not rows:
        return ""
    pcols = list(rows[0].params)
    methods = list(rows[0].values)
    has_sim = "simulation" in methods
    cols: list[str] = list(pcols)
    for m in methods:
        cols.append(m)
        if has_sim and m != "simulation":
            cols.append(f"{m}_err_pct")
    extra_cols = list(rows[0].extras)
    cols += extra_cols
    table = []
    for r in rows:
        line = []
        for p in pcols:
            line.append(r.params[p])
        for m in methods:
            line.append(r.values[m])
            if has_sim and m != "simulation":
                line.append(r.rel_error(m))
        line += [r.extras[c] for c in extra_cols]
        table.append(line)
    if fmt == "csv":
        out = [",".join(cols)]
        for line in table:
            out.append(",".join(_fmt_csv(v) for v in line))
        return "\n".join(out) + "\n"
    if fmt == "text":
        cells = [cols] + [[_fmt_text(c, v) for c, v in zip(cols, line)] for line in table]
        widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def _fmt_csv(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}" if math.isfinite(v) else str(v)
    return str(v)


def _fmt_text(col: str, v) -> str:
    if v is None:
        return "-"
    if col.endswith("_err_pct"):
        return f"{v:.1f}%"
    if col in ("alpha", "beta", "rho", "tau"):
        return f"{v:g}"
    return f"{v:.2f}"


# -- figures ----------------------------------------------------------------

def figure_grid(horizon: float = FIGURE_HORIZON, step: float = FIGURE_GRID_STEP) -> np.ndarray:
    return np.linspace(0.0, horizon, int(round(horizon / step)) + 1)


def run_figure_means(figure: str, spec: ExperimentSpec) -> dict[str, np.ndarray]:
    """Columns for figures 1, 2 and 4: simulated mean against the deterministic curves."""
    horizon = spec.horizon or FIGURE_HORIZON
    grid = figure_grid(horizon)
    if figure in ("figure1", "figure2"):
        model = spec.model or figure1_model()
        sim_mean, _ = mean_counts(model, grid, spec.replications, spec.seed)
        cols = {"t": grid, "sim_mean": sim_mean,
                "fluid": solve_fluid(model, horizon, spec.step).at("x", grid)}
        if figure == "figure2":
            cols["adjusted"] = solve_adjusted(model, horizon, spec.step).at("x", grid)
        return cols
    if figure == "figure4":
        m = TABLE2_MODEL if spec.model is None else inf_model_from(spec.model)
        queue = m.queue_model()
        sim_mean, _ = mean_counts(queue, grid, spec.replications, spec.seed)
        return {"t": grid, "analytical": closed_form_x(m, grid),
                "numerical": solve_fluid(queue, horizon, spec.step).at("x", grid),
                "sim_mean": sim_mean}
    raise ConfigError(f"{figure} is not a trajectory figure")


def run_figure3(spec: ExperimentSpec, bins: int | None = None) -> dict[float, Histogram]:
    """Overlap histograms at several arrival times (alpha=0.5, beta=0.5, rho=0.8, n=30)."""
    model = spec.model or table1_model(0.5, 0.5)
    taus = spec.taus or FIGURE_TAUS
    out = {}
    for tau in taus:
        horizon = spec.horizon_for([tau], model.mu)
        cfg = SimConfig(tau, horizon, spec.replications,
                        row_seed(spec.seed, int(round(tau * 1000))), spec.count_self)
        out[tau] = run_replications(model, cfg, spec.workers).histogram(bins)
    return out


def run_converge(spec: ExperimentSpec, etas: Sequence[int] = CONVERGE_ETAS) -> list[dict[str, float]]:
    """Uniform-acceleration sweep: mean sup |X^eta/eta - x| and mean t0^eta per eta."""
    model = spec.model or figure1_model()
    horizon = spec.horizon or FIGURE_HORIZON
    tau = spec.taus[0] if spec.taus else 3.0
    fluid = solve_fluid(model, horizon, max(spec.step, 1e-2))
    fluid_t0 = math.nan
    if not model.infinite:
        fp = overlap_fluid(model, tau, horizon, spec.step).first_passage
        fluid_t0 = fp.time
    out = []
    for eta in etas:
        cfg = SimConfig(tau, horizon, spec.replications, row_seed(spec.seed, eta), eta=eta)
        rep = simulate_accelerated(model, cfg, fluid)
        out.append({"eta": eta, "mean_sup_error": rep.mean_sup_error, "stderr": rep.stderr,
                    "mean_t0_eta": rep.mean_t0, "fluid_t0": fluid_t0})
    return out


def columns_csv(cols: dict[str, np.ndarray]) -> str:
    names = list(cols)
    lines = [",".join(names)]
    for row in zip(*(np.asarray(cols[c]) for c in names)):
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def records_csv(records: list[dict[str, float]]) -> str:
    names = list(records[0])
    lines = [",".join(names)]
    for r in records:
        lines.append(",".join(_fmt_csv(r[c]) for c in names))
    return "\n".join(lines) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
