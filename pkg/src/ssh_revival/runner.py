"""Named experiments driven by flat ``key = value`` configs.

Every experiment has complete defaults, so an empty config reproduces the
corresponding figure at desk scale.  Results are written as CSV with a
commented metadata header, or as JSON.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .analysis import (
    SweepTemplate,
    UniversalityCriterion,
    crossover_length,
    curve_distance,
    effective_length,
    revival_visibility,
)
from .chain import ChainParams, build_mode_basis, localization_length
from .curves import (
    dense_negativity_curve,
    ensemble_mutual_information_curve,
    fermionic_mutual_information_curve,
    fermionic_negativity_curve,
    steady_value,
    time_grid,
)
from .entanglement import (
    EnsembleCorrelations,
    Partition,
    dense_entropy,
    dense_log_negativity,
    entropy_density_closed_form,
    fermionic_log_negativity,
)
from .fock import BOSE, FERMI, STATISTICS, FockSpace, ResourceError, fock_dimension
from .lindblad import build_initial_state, evolve
from .semiclassical import DENSE_DIM_CAP, PopulationLaw, SemiclassicalEnsemble, green_function

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "populations",
    "revival",
    "crossover",
    "effective-length",
    "visibility",
    "mutual-information",
    "entropy-density",
    "oracle-check",
)
ORACLE_TOL = 1e-8
ENTROPY_TOL = 1e-10
ENSEMBLE_ENTRY_CAP = 50_000_000


class ConfigError(ValueError):
    """Invalid or unparsable configuration."""

    def __init__(self, problems):
        self.problems = [problems] if isinstance(problems, str) else list(problems)
        super().__init__("; ".join(self.problems))


class OracleMismatch(RuntimeError):
    """Two independent routes disagree beyond tolerance."""


def _ints(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)


def _floats(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# dotted key -> (attribute, parser)
KEYS = {
    "experiment": ("experiment", str),
    "statistics": ("statistics", str),
    "params.L": ("L", int),
    "params.L_list": ("L_list", _ints),
    "params.ratio": ("ratio", float),
    "params.ratio_list": ("ratio_list", _floats),
    "params.g2": ("g2", float),
    "params.gamma": ("gamma", float),
    "partition": ("partition", _ints),
    "grid.t_max": ("t_max", float),
    "grid.n_steps": ("n_steps", int),
    "criterion.epsilon": ("epsilon", float),
    "criterion.horizon": ("horizon", float),
    "criterion.reference_L": ("reference_L", int),
    "criterion.sensitivity": ("sensitivity", _floats),
    "measure.order": ("order", float),
    "measure.flavor": ("flavor", str),
    "limits.dense_dim": ("dense_dim", int),
    "output.path": ("output", str),
    "output.format": ("format", str),
    "output.sidecar": ("sidecar", _bool),
    "runner.threads": ("threads", int),
}
ATTR_TO_KEY = {attr: key for key, (attr, _) in KEYS.items()}

_VIS_RATIOS = tuple(round(0.05 * i, 2) for i in range(1, 20)) + (0.98,)

DEFAULTS = {
    "populations": dict(L=7, ratio=0.1, t_max=10.0, n_steps=51),
    "revival": dict(L_list=(51, 201, 1001), ratio=0.1),
    "crossover": dict(ratio_list=(0.3, 0.5, 0.7, 0.9), sensitivity=(15.0, 30.0)),
    "effective-length": dict(ratio_list=(0.3, 0.5, 0.7, 0.9)),
    "visibility": dict(L=301, ratio_list=_VIS_RATIOS),
    "mutual-information": dict(L_list=(51, 201, 1001), ratio=0.1),
    "entropy-density": dict(L_list=(5, 7, 9), n_steps=20),
    "oracle-check": dict(L_list=(3, 5, 7), ratio_list=(0.1, 0.5, 0.9), n_steps=10),
}
BOSE_DEFAULTS = {
    "revival": dict(L_list=(3, 5, 7)),
    "mutual-information": dict(L_list=(11, 15), order=2.0),
}


@dataclass
class ExperimentConfig:
    """Fully resolved experiment configuration (see ``KEYS`` for dotted names)."""

    experiment: str = "revival"
    statistics: str = FERMI
    L: int = 7
    L_list: tuple = ()
    ratio: float = 0.1
    ratio_list: tuple = ()
    g2: float = 1.0
    gamma: float = 0.1
    partition: tuple = (2,)
    t_max: float = 20.0
    n_steps: int = 401
    epsilon: float = 0.05
    horizon: float = 20.0
    reference_L: int = 301
    sensitivity: tuple = ()
    order: float = 1.0
    flavor: str = ""
    dense_dim: int = DENSE_DIM_CAP
    output: str = ""
    format: str = "csv"
    sidecar: bool = False
    threads: int = 1
    explicit: frozenset = field(default=frozenset(), repr=False, compare=False)

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        """Parse dotted keys and fill experiment-specific defaults."""
        problems, parsed = [], {}
        for key, raw in values.items():
            if key not in KEYS:
                problems.append(f"unknown key {key!r}")
                continue
            attr, parse = KEYS[key]
            try:
                parsed[attr] = parse(raw)
            except (TypeError, ValueError) as exc:
                problems.append(f"{key}: cannot parse {raw!r} ({exc})")
        if problems:
            raise ConfigError(problems)
        experiment = parsed.get("experiment", cls.experiment)
        statistics = parsed.get("statistics", cls.statistics)
        merged = dict(DEFAULTS.get(experiment, {}))
        if statistics == BOSE:
            merged.update(BOSE_DEFAULTS.get(experiment, {}))
        merged.update(parsed)
        if not merged.get("flavor"):
            merged["flavor"] = "fermionic" if statistics == FERMI else "conventional"
        return cls(**merged, explicit=frozenset(parsed))

    def items(self):
        """``(dotted key, value)`` pairs in a fixed order."""
        for f in fields(self):
            if f.name in ATTR_TO_KEY:
                yield ATTR_TO_KEY[f.name], getattr(self, f.name)

    def echo(self) -> str:
        return "\n".join(f"{k} = {_fmt_value(v)}" for k, v in self.items())

    def criterion(self, horizon: float | None = None) -> UniversalityCriterion:
        return UniversalityCriterion(self.epsilon, horizon or self.horizon, self.reference_L, self.n_steps)

    def template(self) -> SweepTemplate:
        return SweepTemplate(gamma=self.gamma / self.g2, g2=self.g2, subsystem=tuple(self.partition))

    def chain(self, L: int, ratio: float | None = None) -> ChainParams:
        r = self.ratio if ratio is None else ratio
        return ChainParams(L, r * self.g2, self.g2, self.gamma)


def _fmt_value(v) -> str:
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt_value(x) for x in v)
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def parse_config_text(text: str) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# validation


def _lengths(cfg: ExperimentConfig) -> list:
    if cfg.experiment in ("populations", "visibility"):
        return [cfg.L]
    if cfg.experiment in ("crossover", "effective-length"):
        return [cfg.reference_L]
    return list(cfg.L_list) or [cfg.L]


def _ratios(cfg: ExperimentConfig) -> list:
    if cfg.experiment in ("crossover", "effective-length", "visibility", "oracle-check"):
        return list(cfg.ratio_list) or [cfg.ratio]
    return [cfg.ratio]


def validate(cfg: ExperimentConfig) -> list:
    """Static checks.  Returns a list of ``(kind, message)`` with kind ``config`` or ``resource``."""
    issues = []

    def bad(msg):
        issues.append(("config", msg))

    if cfg.experiment not in EXPERIMENTS:
        bad(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}")
    if cfg.statistics not in STATISTICS:
        bad(f"statistics must be one of {STATISTICS}, got {cfg.statistics!r}")
    for L in _lengths(cfg):
        if L < 3 or L % 2 == 0:
            bad(f"chain length must be odd and >= 3 (half-SSH chain), got L={L}")
    for r in _ratios(cfg):
        if not 0 < r:
            bad(f"coupling ratio g1/g2 must be positive, got {r}")
        elif r >= 1 and cfg.experiment in ("crossover", "effective-length"):
            bad(f"coupling ratio must lie in (0, 1) for length scans, got {r}")
    if cfg.g2 <= 0:
        bad(f"g2 must be positive, got {cfg.g2}")
    if cfg.gamma <= 0:
        bad(f"gamma must be positive (curves are sampled in gamma*t), got {cfg.gamma}")
    if cfg.n_steps < 2:
        bad(f"grid.n_steps must be >= 2, got {cfg.n_steps}")
    if cfg.t_max <= 0:
        bad(f"grid.t_max must be positive, got {cfg.t_max}")
    if not 0 < cfg.epsilon < 1:
        bad(f"criterion.epsilon must lie in (0, 1), got {cfg.epsilon}")
    if cfg.horizon <= 0:
        bad(f"criterion.horizon must be positive, got {cfg.horizon}")
    if cfg.reference_L < 3 or cfg.reference_L % 2 == 0:
        bad(f"criterion.reference_L must be odd and >= 3, got {cfg.reference_L}")
    if cfg.order <= 0:
        bad(f"measure.order must be positive, got {cfg.order}")
    if cfg.flavor not in ("fermionic", "conventional"):
        bad(f"measure.flavor must be 'fermionic' or 'conventional', got {cfg.flavor!r}")
    if cfg.flavor == "fermionic" and cfg.statistics == BOSE:
        bad("fermionic negativity is undefined for bosons")
    if cfg.format not in ("csv", "json"):
        bad(f"output.format must be csv or json, got {cfg.format!r}")
    if cfg.threads < 1:
        bad(f"runner.threads must be >= 1, got {cfg.threads}")
    for L in _lengths(cfg):
        if L >= 3 and any(not 0 <= s < L for s in cfg.partition):
            bad(f"partition sites {list(cfg.partition)} outside 0..{L - 1}")
        elif L >= 3 and len(set(cfg.partition)) in (0, L):
            bad("partition must leave both subsystems non-empty")
    if cfg.experiment in ("crossover", "effective-length", "visibility") and cfg.statistics != FERMI:
        bad(f"{cfg.experiment} scans are implemented for the fermionic chain only")
    if cfg.experiment == "oracle-check" and cfg.statistics != FERMI:
        bad("oracle-check compares fermionic routes; set statistics = fermi")
    if issues:
        return issues

    for L in _lengths(cfg):
        n_part = (L - 1) // 2 + 1
        if cfg.experiment == "populations" or (cfg.experiment == "revival" and cfg.statistics == BOSE):
            dim = fock_dimension(cfg.statistics, L, n_part)
            if dim > cfg.dense_dim:
                issues.append(("resource", f"dense {cfg.statistics} state at L={L} needs Fock dimension {dim} > cap {cfg.dense_dim}"))
        if cfg.experiment in ("entropy-density", "oracle-check"):
            dim = fock_dimension(cfg.statistics, L, n_part)
            if dim > cfg.dense_dim:
                issues.append(("resource", f"dense {cfg.statistics} state at L={L} needs Fock dimension {dim} > cap {cfg.dense_dim}"))
        if cfg.experiment == "mutual-information" and cfg.statistics == BOSE:
            entries = sum(
                math.comb(L // 2, m) * fock_dimension(BOSE, L, m + 1) for m in range(L // 2 + 1)
            )
            if entries > ENSEMBLE_ENTRY_CAP:
                issues.append(("resource", f"bosonic ensemble at L={L} needs ~{entries} stored amplitudes > cap {ENSEMBLE_ENTRY_CAP}"))
    return issues


# ---------------------------------------------------------------------------
# results


@dataclass
class ResultTable:
    """Named columns with units plus a metadata header."""

    metadata: dict
    columns: list  # (name, unit)
    rows: list
    wall_time: float = 0.0
    status: str = "ok"

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}: {_fmt_value(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{name} [{unit}]" if unit else name for name, unit in self.columns])
        for row in self.rows:
            w.writerow([_fmt_value(v) for v in row])
        return buf.getvalue()

    def to_json(self, include_timing: bool = False) -> str:
        doc = {
            "metadata": self.metadata,
            "columns": [{"name": n, "unit": u} for n, u in self.columns],
            "rows": [[_json_safe(v) for v in row] for row in self.rows],
        }
        if include_timing:
            doc["wall_time_s"] = self.wall_time
        return json.dumps(doc, indent=1, sort_keys=False, default=_json_safe)

    def column(self, name: str) -> np.ndarray:
        i = [n for n, _ in self.columns].index(name)
        return np.array([row[i] for row in self.rows])


def _json_safe(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (tuple, list)):
        return [_json_safe(x) for x in v]
    return v


def _map(cfg, fn, items):
    if cfg.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _partition(cfg, L):
    return Partition(frozenset(cfg.partition), L)


def _populations(cfg, meta):
    params = cfg.chain(cfg.L)
    basis = build_mode_basis(params)
    n = params.n
    gt = time_grid(cfg.t_max, cfg.n_steps)
    space = FockSpace(cfg.statistics, params.L, n + 1)
    states = evolve(build_initial_state(basis, space, cap=cfg.dense_dim), params, gt / params.gamma)
    closed = PopulationLaw(n, params.gamma).aggregates(gt / params.gamma)
    qme = np.array([[s.particle_distribution()[m] for s in states] for m in range(1, n + 2)])
    meta["max_abs_deviation"] = float(np.abs(closed - qme).max())
    cols = [("gamma_t", ""), ("t", "1/g2")]
    cols += [(f"P{m}_closed", "") for m in range(1, n + 2)] + [(f"P{m}_qme", "") for m in range(1, n + 2)]
    rows = [[gt[i], gt[i] / params.gamma] + list(closed[:, i]) + list(qme[:, i]) for i in range(len(gt))]
    return cols, rows


def _curve_table(cfg, meta, curves, label):
    gt = curves[0].times
    cols = [("gamma_t", ""), ("t", "1/g2")] + [(f"{label}_L{L}", "bits") for L in cfg.L_list]
    rows = [[gt[i], gt[i] / cfg.gamma] + [c.values[i] for c in curves] for i in range(len(gt))]
    ref = curves[-1]
    for L, c in zip(cfg.L_list, curves):
        meta[f"distance_L{L}_vs_L{cfg.L_list[-1]}"] = curve_distance(c, ref)
        meta[f"visibility_L{L}"] = revival_visibility(c).visibility
    return cols, rows


def _revival(cfg, meta):
    gt = time_grid(cfg.t_max, cfg.n_steps)
    meta["measure"] = f"negativity:{cfg.flavor}"

    def one(L):
        p, part = cfg.chain(L), _partition(cfg, L)
        if cfg.statistics == FERMI and cfg.flavor == "fermionic":
            return fermionic_negativity_curve(p, part, gt)
        return dense_negativity_curve(p, part, gt, cfg.statistics, cfg.flavor)

    return _curve_table(cfg, meta, _map(cfg, one, list(cfg.L_list)), "E")


def _mutual_information(cfg, meta):
    gt = time_grid(cfg.t_max, cfg.n_steps)
    meta["measure"] = f"mutual-information:{cfg.order:g}"

    def one(L):
        p, part = cfg.chain(L), _partition(cfg, L)
        if cfg.statistics == FERMI:
            return fermionic_mutual_information_curve(p, part, gt, cfg.order)
        return ensemble_mutual_information_curve(p, part, gt, BOSE, cfg.order)

    return _curve_table(cfg, meta, _map(cfg, one, list(cfg.L_list)), f"I{cfg.order:g}")


def _crossover(cfg, meta):
    template = cfg.template()
    horizons = [cfg.horizon] + [h for h in cfg.sensitivity if h != cfg.horizon]

    def one(r):
        return [crossover_length(r, cfg.criterion(h), template) for h in horizons]

    scans = _map(cfg, one, list(cfg.ratio_list))
    cols = [("ratio", ""), ("xi", "sites"), ("L_c", "sites"), ("distance_at_L_c", "")]
    cols += [(f"L_c_horizon_{h:g}", "sites") for h in horizons[1:]]
    rows = []
    for r, per in zip(cfg.ratio_list, scans):
        s = per[0]
        rows.append([r, s.xi, s.length, s.distances[s.length]] + [x.length for x in per[1:]])
    return cols, rows


def _effective_length(cfg, meta):
    template = cfg.template()
    scans = _map(cfg, lambda r: effective_length(r, cfg.criterion(), template), list(cfg.ratio_list))
    cols = [("ratio", ""), ("xi", "sites"), ("L_eff", "sites"), ("distance_at_L_eff", "")]
    rows = [[r, s.xi, s.length, s.distances[s.length]] for r, s in zip(cfg.ratio_list, scans)]
    return cols, rows


def _visibility(cfg, meta):
    template = cfg.template()
    gt = time_grid(cfg.t_max, cfg.n_steps)
    meta["measure"] = "negativity:fermionic"

    def one(r):
        c = template.curve(cfg.L, r, gt)
        s = revival_visibility(c)
        anchor = steady_value(template.params(cfg.L, r), template.partition(cfg.L), c.measure)
        return [r, s.minimum, s.minimum_time, s.asymptote, s.visibility, anchor]

    rows = _map(cfg, one, list(cfg.ratio_list))
    cols = [("ratio", ""), ("minimum", "bits"), ("gamma_t_min", ""), ("asymptote", "bits"), ("visibility", "bits"), ("steady_state", "bits")]
    return cols, rows


def _entropy_density(cfg, meta):
    gt = np.linspace(cfg.t_max / cfg.n_steps, cfg.t_max, cfg.n_steps) if cfg.n_steps < 50 else time_grid(cfg.t_max, cfg.n_steps)
    svn = entropy_density_closed_form(gt / cfg.gamma, cfg.gamma, "vN")
    s2 = entropy_density_closed_form(gt / cfg.gamma, cfg.gamma, 2)
    cols = [("gamma_t", ""), ("s_vN_closed", "bits"), ("s_2_closed", "bits")]
    numeric = []
    worst = 0.0
    for L in cfg.L_list:
        ens = SemiclassicalEnsemble(build_mode_basis(cfg.chain(L)), cfg.statistics, cap=cfg.dense_dim)
        n = ens.law.n
        vals = []
        for t in gt / cfg.gamma:
            rho = ens.density(t)
            vals.append((dense_entropy(rho, 1) / n, dense_entropy(rho, 2) / n))
        vals = np.array(vals)
        worst = max(worst, float(np.abs(vals[:, 0] - svn).max()), float(np.abs(vals[:, 1] - s2).max()))
        numeric.append(vals)
        cols += [(f"s_vN_L{L}", "bits"), (f"s_2_L{L}", "bits")]
    meta["max_abs_deviation"] = worst
    rows = []
    for i in range(len(gt)):
        row = [gt[i], float(svn[i]), float(s2[i])]
        for vals in numeric:
            row += [vals[i, 0], vals[i, 1]]
        rows.append(row)
    if worst > ENTROPY_TOL:
        raise OracleMismatch(f"entropy density deviates by {worst:.3e} > {ENTROPY_TOL}")
    return cols, rows


def _oracle_check(cfg, meta):
    gt = np.linspace(0.0, cfg.t_max, cfg.n_steps)
    rows = []
    worst = 0.0
    for L in cfg.L_list:
        part = _partition(cfg, L)
        for r in cfg.ratio_list:
            basis = build_mode_basis(cfg.chain(L, r))
            ens = SemiclassicalEnsemble(basis, FERMI, cap=cfg.dense_dim)
            for x in gt:
                t = x / cfg.gamma
                eg = fermionic_log_negativity(green_function(basis, t), part)
                rho = ens.density(t)
                ed = dense_log_negativity(rho, part, "fermionic")
                ec = dense_log_negativity(rho, part, "conventional")
                worst = max(worst, abs(eg - ed))
                rows.append([L, r, x, eg, ed, eg - ed, ec])
    meta["max_abs_deviation"] = worst
    meta["tolerance"] = ORACLE_TOL
    cols = [("L", ""), ("ratio", ""), ("gamma_t", ""), ("E_gaussian", "bits"), ("E_dense", "bits"), ("difference", "bits"), ("E_conventional", "bits")]
    if worst > ORACLE_TOL:
        raise OracleMismatch(f"Gaussian and dense negativities differ by {worst:.3e} > {ORACLE_TOL}")
    return cols, rows


DISPATCH = {
    "populations": _populations,
    "revival": _revival,
    "crossover": _crossover,
    "effective-length": _effective_length,
    "visibility": _visibility,
    "mutual-information": _mutual_information,
    "entropy-density": _entropy_density,
    "oracle-check": _oracle_check,
}


def run(cfg: ExperimentConfig) -> ResultTable:
    """Validate and execute one experiment.

    Raises :class:`ConfigError`, :class:`~ssh_revival.fock.ResourceError` or
    :class:`OracleMismatch`; in the last case the partial table is attached as
    ``exc.table``.
    """
    issues = validate(cfg)
    cfg_problems = [m for k, m in issues if k == "config"]
    if cfg_problems:
        raise ConfigError(cfg_problems)
    if issues:
        raise ResourceError("; ".join(m for _, m in issues))
    meta = {"experiment": cfg.experiment, "version": __version__}
    meta.update({f"config.{k}": v for k, v in cfg.items() if not k.startswith("output.") and k != "runner.threads"})
    start = time.perf_counter()
    try:
        cols, rows = DISPATCH[cfg.experiment](cfg, meta)
    except OracleMismatch as exc:
        exc.table = ResultTable(meta, [], [], time.perf_counter() - start, "oracle-mismatch")
        raise
    table = ResultTable(meta, cols, rows, time.perf_counter() - start)
    log.info("%s finished in %.2f s", cfg.experiment, table.wall_time)
    return table


def write_table(table: ResultTable, cfg: ExperimentConfig) -> str:
    text = table.to_csv() if cfg.format == "csv" else table.to_json()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        if cfg.sidecar:
            with open(cfg.output + ".meta.json", "w", encoding="utf-8") as fh:
                json.dump({"metadata": table.metadata, "wall_time_s": table.wall_time, "status": table.status}, fh, indent=1, default=_json_safe)
    return text
