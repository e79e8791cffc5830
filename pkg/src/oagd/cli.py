"""Experiment runner: flat key=value configs, CSV datasets with
deterministic three-way splits, per-round CSV output, and window sweeps.

Commands:
    oagd run --config exp.cfg
    oagd sweep --config exp.cfg --windows 1,10,100,T
    oagd validate --config exp.cfg

Every failure path prints `error_category=<Name>` to stderr and exits
nonzero, so batch drivers can triage without parsing prose.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import DecisionPair, FeasibleSet, ProblemConstants, RoundFunctions, derive_constants, project
from .driver import StepSizeSchedule, Trace, full_info_run, oagd_run, strongly_convex_c
from .errors import (
    ConfigError,
    EmptyDataset,
    OagdError,
    ParseError,
)
from .hypergrad import WeightWindow, make_weights
from .inner import InnerSchedule, gd_to_tolerance
from .kernels import active_backend
from .problems import (
    SyntheticStreamConfig,
    elastic_net_stream,
    equal_stages,
    estimate_constants,
    ho_stream,
    quadratic_stream,
    synthesize,
)
from .regret import RegretReport, comparator_series, compute_report

CSV_COLUMNS = [
    "t", "f_value", "bd_regret_cum", "bs_regret_cum", "bl_regret_cum",
    "p2_cum", "y2_cum", "alpha_t", "K_t", "inner_residual", "wall_nanos",
]


@dataclass
class SampleTable:
    """A numeric dataset with deterministic train/validation/test splits.

    Features are standardized (zero mean, unit variance) using statistics
    from the training split only; constant columns keep unit scale. Splits
    take ceil(m/3) rows each for train and validation, in file order unless
    a shuffle seed reorders rows first; the test split takes the remainder.
    """

    features: np.ndarray
    labels: np.ndarray
    columns: list
    path: str
    row_count: int
    boundaries: tuple

    def split(self, name: str):
        train_end, val_end = self.boundaries
        if name == "train":
            sl = slice(0, train_end)
        elif name == "val":
            sl = slice(train_end, val_end)
        elif name == "test":
            sl = slice(val_end, self.row_count)
        else:
            raise ValueError(f"unknown split {name!r}")
        return self.features[sl], self.labels[sl]


def load_csv(path, label_column: Optional[str] = None,
             shuffle_seed: Optional[int] = None) -> SampleTable:
    """Parse a numeric CSV with a header row into a SampleTable.

    label_column defaults to the last column. Non-numeric cells raise
    ParseError with their location; a file without data rows raises
    EmptyDataset.
    """
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path} has no header row")
        header = [h.strip() for h in header]
        rows = []
        for r, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row has {len(row)} cells, expected {len(header)}", row=r)
            vals = []
            for c, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric cell {cell!r}", row=r, column=header[c]
                    ) from None
            rows.append(vals)
    if not rows:
        raise EmptyDataset(f"{path} has no data rows")
    data = np.asarray(rows, dtype=float)
    if label_column is None:
        label_column = header[-1]
    if label_column not in header:
        raise ParseError(f"{path}: no column named {label_column!r}", column=label_column)
    li = header.index(label_column)
    labels = data[:, li]
    features = np.delete(data, li, axis=1)
    columns = [h for h in header if h != label_column]
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(data.shape[0])
        features, labels = features[order], labels[order]
    m = data.shape[0]
    n_split = math.ceil(m / 3)
    train_end = min(n_split, m)
    val_end = min(2 * n_split, m)
    mean = features[:train_end].mean(axis=0)
    std = features[:train_end].std(axis=0)
    std[std == 0.0] = 1.0
    features = (features - mean) / std
    return SampleTable(
        features=features, labels=labels, columns=columns, path=path,
        row_count=m, boundaries=(train_end, val_end),
    )


@dataclass
class ExperimentConfig:
    problem: str = ""
    T: int = 0
    regime: str = ""
    output: str = ""
    window_w: str = "1"
    window_kind: str = "uniform"
    window_gamma: Optional[float] = None
    quad_rule: str = "alt_sqrt"
    quad_a1_mode: str = "match"
    quad_a1_const: float = 0.0
    quad_a2_const: float = 0.0
    dataset: str = ""
    label_column: str = ""
    shuffle_seed: Optional[int] = None
    mu_smooth: Optional[float] = None
    d1: Optional[int] = None
    d2: Optional[int] = None
    synthetic_stages: int = 1
    noise_max: float = 0.1
    set_kind: str = ""
    set_lower: str = ""
    set_upper: str = ""
    set_half_width: Optional[float] = None
    set_center: str = ""
    set_radius: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    K: Optional[int] = None
    k_max: int = 10_000
    mu_f: Optional[float] = None
    D: Optional[float] = None
    x_low: float = -3.0
    x_high: float = 3.0
    y_bound: float = 10.0
    oracle_tol: float = 1e-10
    inner_oracle_tol: float = 1e-12
    h_samples: int = 128
    report_static: bool = True
    report_local: bool = True
    report_h: bool = True
    seed: int = 0
    init_x: str = ""
    init_y: str = ""
    baseline: str = "none"

    def resolved_window(self) -> int:
        if self.window_w.strip().upper() == "T":
            return self.T
        return int(self.window_w)


_PROBLEMS = ("quadratic", "ho", "elastic_net", "synthetic")
_REGIMES = (
    "strongly_convex", "strongly_convex_static",
    "convex_dynamic", "convex_static", "nonconvex",
)
_BOOL_KEYS = {"report_static", "report_local", "report_h"}
_INT_KEYS = {"T", "synthetic_stages", "k_max", "h_samples", "seed", "d1", "d2",
             "shuffle_seed", "K"}
_FLOAT_KEYS = {"window_gamma", "quad_a1_const", "quad_a2_const", "mu_smooth",
               "noise_max", "set_half_width", "set_radius", "alpha", "beta",
               "mu_f", "D", "x_low", "x_high", "y_bound", "oracle_tol",
               "inner_oracle_tol"}


def parse_config(path) -> ExperimentConfig:
    """Read a flat `key = value` file (one pair per line, # comments)."""
    known = {f.name for f in fields(ExperimentConfig)}
    cfg = ExperimentConfig()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                if key in _BOOL_KEYS:
                    parsed = _parse_bool(value)
                elif key in _INT_KEYS:
                    parsed = int(value)
                elif key in _FLOAT_KEYS:
                    parsed = float(value)
                else:
                    parsed = value
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
            setattr(cfg, key, parsed)
    return cfg


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ValueError(value)


def _parse_vector(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",") if p.strip() != ""])
    except ValueError:
        raise ConfigError(f"{name} must be comma-separated numbers, got {text!r}") from None


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.problem not in _PROBLEMS:
        raise ConfigError(f"problem must be one of {_PROBLEMS}, got {cfg.problem!r}")
    if cfg.T < 1:
        raise ConfigError(f"T must be a positive integer, got {cfg.T}")
    if cfg.regime not in _REGIMES:
        raise ConfigError(f"regime must be one of {_REGIMES}, got {cfg.regime!r}")
    w = cfg.window_w.strip()
    if w.upper() != "T":
        try:
            if int(w) < 1:
                raise ValueError
        except ValueError:
            raise ConfigError(f"window_w must be a positive integer or 'T', got {w!r}") from None
    if cfg.window_kind not in ("uniform", "exponential"):
        raise ConfigError(f"window_kind must be uniform or exponential, got {cfg.window_kind!r}")
    if cfg.window_kind == "exponential" and cfg.window_gamma is None:
        raise ConfigError("exponential windows need window_gamma in (0, 1)")
    if cfg.problem in ("ho", "elastic_net") and not cfg.dataset:
        raise ConfigError(f"problem {cfg.problem} needs a dataset path")
    if cfg.problem == "elastic_net" and (cfg.mu_smooth is None or cfg.mu_smooth <= 0):
        raise ConfigError("elastic_net needs mu_smooth > 0")
    if cfg.problem == "synthetic" and not cfg.d2:
        raise ConfigError("synthetic problem needs d2")
    if cfg.set_kind and cfg.set_kind not in ("box", "ball", "unbounded"):
        raise ConfigError(f"set_kind must be box, ball, or unbounded, got {cfg.set_kind!r}")
    return cfg


def _build_fset(cfg: ExperimentConfig, d1: int) -> FeasibleSet:
    kind = cfg.set_kind
    if not kind:
        return FeasibleSet.symmetric_box(1.0, 1) if cfg.problem == "quadratic" \
            else FeasibleSet.unbounded()
    if kind == "unbounded":
        return FeasibleSet.unbounded()
    if kind == "box":
        if cfg.set_half_width is not None:
            return FeasibleSet.symmetric_box(cfg.set_half_width, d1)
        lower = _parse_vector(cfg.set_lower, "set_lower")
        upper = _parse_vector(cfg.set_upper, "set_upper")
        if lower.shape != (d1,) or upper.shape != (d1,):
            raise ConfigError(f"set_lower/set_upper must have length d1={d1}")
        return FeasibleSet.box(lower, upper)
    if cfg.set_radius is None:
        raise ConfigError("ball sets need set_radius")
    center = _parse_vector(cfg.set_center, "set_center") if cfg.set_center else np.zeros(d1)
    if center.shape != (d1,):
        raise ConfigError(f"set_center must have length d1={d1}")
    return FeasibleSet.ball(center, cfg.set_radius)


@dataclass
class _Prepared:
    stream: object
    fset: FeasibleSet
    constants: ProblemConstants
    d1: int
    d2: int
    dataset: Optional[SampleTable] = None
    notes: list = field(default_factory=list)


def prepare(cfg: ExperimentConfig) -> _Prepared:
    """Materialize the stream, feasible set, and smoothness constants."""
    validate_config(cfg)
    if cfg.problem == "quadratic":
        d1 = d2 = 1
        fset = _build_fset(cfg, d1)
        stream = quadratic_stream(
            cfg.quad_rule, cfg.T, a1_mode=cfg.quad_a1_mode,
            a1_const=cfg.quad_a1_const, a2_const=cfg.quad_a2_const, fset=fset,
        )
        return _Prepared(stream, fset, stream.constants, d1, d2)
    if cfg.problem == "synthetic":
        d2 = cfg.d2
        d1 = cfg.d1 if cfg.d1 is not None else 1
        fset = _build_fset(cfg, d1)
        target_rng = np.random.default_rng([cfg.seed, 1])
        targets = [
            (np.zeros(d1), target_rng.standard_normal(d2))
            for _ in range(cfg.synthetic_stages)
        ]
        stages = equal_stages(cfg.T, cfg.synthetic_stages, targets)
        data = synthesize(SyntheticStreamConfig(
            stages=stages, d1=d1, d2=d2, noise_max=cfg.noise_max,
            seed=cfg.seed, mu_smooth=cfg.mu_smooth, fset=fset,
        ))
        constants = estimate_constants(data.stream, cfg.x_low, cfg.x_high, cfg.y_bound)
        return _Prepared(data.stream, fset, constants, d1, d2)
    table = load_csv(cfg.dataset, label_column=cfg.label_column or None,
                     shuffle_seed=cfg.shuffle_seed)
    d2 = table.features.shape[1]
    if cfg.problem == "ho":
        d1 = cfg.d1 if cfg.d1 is not None else 1
        fset = _build_fset(cfg, d1)
        stream = ho_stream(table, cfg.T, d1=d1, fset=fset)
    else:
        d1 = cfg.d1 if cfg.d1 is not None else d2 + 1
        fset = _build_fset(cfg, d1)
        stream = elastic_net_stream(table, cfg.mu_smooth, cfg.T, d1=d1, fset=fset)
    constants = estimate_constants(stream, cfg.x_low, cfg.x_high, cfg.y_bound)
    return _Prepared(stream, fset, constants, d1, d2, dataset=table)


def build_schedules(cfg: ExperimentConfig, prep: _Prepared,
                    window: WeightWindow):
    """Regime defaults plus any explicit overrides (recorded as notes)."""
    constants = prep.constants
    derived = derive_constants(constants)
    mu_f = cfg.mu_f if cfg.mu_f is not None else constants.mu_f
    beta = cfg.beta if cfg.beta is not None else InnerSchedule.theorem_beta(
        constants.ell_g1, constants.mu_g)
    if cfg.beta is not None:
        prep.notes.append(f"beta = {cfg.beta:g} (override)")

    def need_mu_f():
        if mu_f is None:
            raise ConfigError(
                f"regime {cfg.regime} needs mu_f; set mu_f explicitly or "
                "provide alpha and K overrides"
            )
        return mu_f

    if cfg.alpha is not None:
        steps = StepSizeSchedule.constant(cfg.alpha, label=f"constant alpha={cfg.alpha:g} (override)")
        prep.notes.append(f"alpha = {cfg.alpha:g} (override)")
    elif cfg.regime == "strongly_convex":
        steps = StepSizeSchedule.strongly_convex_dynamic(need_mu_f(), derived)
    elif cfg.regime == "strongly_convex_static":
        steps = StepSizeSchedule.strongly_convex_static(need_mu_f())
    elif cfg.regime == "convex_dynamic":
        steps = StepSizeSchedule.convex_dynamic(derived)
    elif cfg.regime == "convex_static":
        D = cfg.D if cfg.D is not None else prep.fset.diameter
        if not np.isfinite(D):
            raise ConfigError("convex_static needs a bounded set or an explicit D")
        steps = StepSizeSchedule.convex_static(D, constants.ell_f0)
    else:
        steps = StepSizeSchedule.nonconvex(1.0 / (3.0 * derived.L_f), derived)

    if cfg.K is not None:
        inner = InnerSchedule.fixed(beta, cfg.K, k_max=cfg.k_max)
        prep.notes.append(f"K = {cfg.K} (override)")
    elif cfg.regime == "strongly_convex":
        c = strongly_convex_c(need_mu_f(), derived)
        inner = InnerSchedule.strongly_convex(beta, c, k_max=cfg.k_max)
    elif cfg.regime == "strongly_convex_static":
        inner = InnerSchedule.strongly_convex_static(beta, need_mu_f(), k_max=cfg.k_max)
    elif cfg.regime in ("convex_dynamic", "convex_static"):
        inner = InnerSchedule.convex_log_t(beta, k_max=cfg.k_max)
    else:
        inner = InnerSchedule.nonconvex(beta, steps.alpha_at(1), window.W, k_max=cfg.k_max)
    return steps, inner, derived


def _initial_pair(cfg: ExperimentConfig, prep: _Prepared) -> DecisionPair:
    if cfg.init_x:
        x = _parse_vector(cfg.init_x, "init_x")
        if x.shape != (prep.d1,):
            raise ConfigError(f"init_x must have length d1={prep.d1}")
    else:
        x = project(prep.fset, np.zeros(prep.d1))
    if cfg.init_y:
        y = _parse_vector(cfg.init_y, "init_y")
        if y.shape != (prep.d2,):
            raise ConfigError(f"init_y must have length d2={prep.d2}")
    else:
        y = np.zeros(prep.d2)
    return DecisionPair(x=x, y=y)


def _write_csv(path: Path, trace: Trace, report: RegretReport):
    nan = float("nan")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in range(trace.T):
            writer.writerow([
                i + 1,
                repr(float(trace.f_value[i])),
                repr(float(report.bd_regret[i])),
                repr(float(report.bs_regret[i]) if report.bs_regret is not None else nan),
                repr(float(report.bl_regret[i]) if report.bl_regret is not None else nan),
                repr(float(report.p2_series[i])),
                repr(float(report.y2_series[i])),
                repr(float(trace.alpha[i])),
                int(trace.K[i]),
                repr(float(trace.inner_residual[i])),
                int(trace.wall_nanos[i]),
            ])


def _final(series: Optional[np.ndarray]) -> float:
    return float(series[-1]) if series is not None else float("nan")


def _meta_lines(cfg: ExperimentConfig, prep: _Prepared, window: WeightWindow,
                steps: StepSizeSchedule, inner: InnerSchedule, derived,
                trace: Trace, report: RegretReport) -> list:
    lines = [f"source_version = oagd {__version__}"]
    for f in fields(ExperimentConfig):
        lines.append(f"config.{f.name} = {getattr(cfg, f.name)}")
    c = prep.constants
    lines += [
        f"constants.ell_f0 = {c.ell_f0!r}",
        f"constants.ell_f1 = {c.ell_f1!r}",
        f"constants.ell_g1 = {c.ell_g1!r}",
        f"constants.ell_g2 = {c.ell_g2!r}",
        f"constants.mu_g = {c.mu_g!r}",
        f"constants.mu_f = {c.mu_f!r}",
        f"derived.kappa_g = {derived.kappa_g!r}",
        f"derived.L_y = {derived.L_y!r}",
        f"derived.M_f = {derived.M_f!r}",
        f"derived.L_f = {derived.L_f!r}",
        f"schedule.alpha = {steps.label or steps.kind}",
        f"schedule.inner_kind = {inner.kind}",
        f"schedule.beta = {inner.beta!r}",
        f"schedule.k_max = {inner.k_max}",
        f"window.w = {window.w}",
        f"window.W = {window.W!r}",
        f"window.kind = {cfg.window_kind}",
        f"backend = {active_backend()}",
        "bl_normalization = window_average",
        f"report.provenance = {report.provenance}",
        f"report.bd_final = {_final(report.bd_regret)!r}",
        f"report.bs_final = {_final(report.bs_regret)!r}",
        f"report.bl_final = {_final(report.bl_regret)!r}",
        f"report.p1 = {report.p1!r}",
        f"report.p2 = {report.p2!r}",
        f"report.y1 = {report.y1!r}",
        f"report.y2 = {report.y2!r}",
        f"report.ybar1 = {report.ybar1!r}",
        f"report.ybar2 = {report.ybar2!r}",
        f"report.h_T = {report.h_T!r}",
        f"report.comparator_grad_sum = {report.comparator_grad_sum!r}",
        f"report.f_star_sum = {report.f_star_sum!r}",
        f"report.x_static = {report.x_static}",
        f"trace.final_x = {trace.final_x}",
    ]
    for note in prep.notes:
        lines.append(f"note = {note}")
    for warning in trace.warnings:
        lines.append(f"warning = {warning}")
    return lines


def _full_train_fit(prep: _Prepared, x_final: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Fit y on the whole training split at fixed hyperparameters x_final:
    mean squared data loss plus the stream's per-round penalty."""
    A, b = prep.dataset.split("train")
    n = A.shape[0]
    stream = prep.stream

    def grad_y(x, y):
        return A.T @ (A @ y - b) / n + stream._grad_y_g_extra(x, y)

    def hess_yy(x, y):
        return A.T @ A / n + np.diag(stream._hess_diag(x, y))

    fit_round = RoundFunctions(
        f=lambda x, y: 0.0,
        g=lambda x, y: float(0.5 * np.sum((A @ y - b) ** 2) / n + stream._g_extra(x, y)),
        grad_x_f=lambda x, y: np.zeros_like(x),
        grad_y_f=lambda x, y: np.zeros(A.shape[1]),
        grad_y_g=grad_y,
        jac_xy_g=lambda x, y: stream._jac_xy(x, y),
        hess_yy_g=hess_yy,
        label="full-train fit",
    )
    return gd_to_tolerance(fit_round, x_final, np.zeros(A.shape[1]), tol=tol)


def test_error(prep: _Prepared, x_final: np.ndarray) -> float:
    """Mean squared error on the held-out test split of the model fitted on
    the full training split at the final hyperparameters."""
    y_hat = _full_train_fit(prep, x_final)
    A_te, b_te = prep.dataset.split("test")
    return float(np.mean((A_te @ y_hat - b_te) ** 2))


def run_experiment(cfg: ExperimentConfig, write: bool = True):
    """Execute one configured run; returns (trace, report, meta lines)."""
    prep = prepare(cfg)
    w = cfg.resolved_window()
    window = make_weights(cfg.window_kind, w, gamma=cfg.window_gamma)
    steps, inner, derived = build_schedules(cfg, prep, window)
    init = _initial_pair(cfg, prep)
    trace = oagd_run(prep.stream, init, prep.fset, window, steps, inner,
                     cfg.T, constants=derived)
    comparators = comparator_series(
        prep.stream, prep.fset, T=cfg.T,
        tol=cfg.oracle_tol, inner_tol=cfg.inner_oracle_tol,
        convex=cfg.regime != "nonconvex",
        include_static=cfg.report_static,
    )
    report_kwargs = dict(
        tol=cfg.oracle_tol, inner_tol=cfg.inner_oracle_tol,
        h_samples=cfg.h_samples, comparators=comparators,
        include_static=cfg.report_static,
        include_local=cfg.report_local,
        include_h=cfg.report_h,
    )
    report = compute_report(trace, prep.stream, prep.fset, window, **report_kwargs)
    meta = _meta_lines(cfg, prep, window, steps, inner, derived, trace, report)
    if prep.dataset is not None:
        meta.append(f"test_error = {test_error(prep, trace.final_x)!r}")
    if write and not cfg.output:
        raise ConfigError("run needs an output path")
    if write:
        out = Path(cfg.output)
        if out.parent != Path(""):
            out.parent.mkdir(parents=True, exist_ok=True)
    if cfg.baseline == "full_info":
        base_trace = full_info_run(prep.stream, init, prep.fset, cfg.T,
                                   oracle_tol=cfg.oracle_tol)
        base_report = compute_report(
            base_trace, prep.stream, prep.fset, window, **report_kwargs
        )
        meta.append(f"baseline.bd_final = {_final(base_report.bd_regret)!r}")
        if write:
            _write_csv(Path(cfg.output + ".baseline.csv"), base_trace, base_report)
    if write:
        _write_csv(Path(cfg.output + ".csv"), trace, report)
        Path(cfg.output + ".meta.txt").write_text("\n".join(meta) + "\n", encoding="utf-8")
    return trace, report, meta


def _sweep_one(args):
    cfg, w = args
    sub = replace(cfg, window_w=w, output=f"{cfg.output}_w{w}")
    run_experiment(sub)
    return sub.output


def sweep(cfg: ExperimentConfig, windows: list) -> list:
    """Run one experiment per window size concurrently; returns outputs."""
    if not cfg.output:
        raise ConfigError("sweep needs an output path")
    jobs = [(cfg, w) for w in windows]
    outputs = []
    with ProcessPoolExecutor() as pool:
        for out in pool.map(_sweep_one, jobs):
            outputs.append(out)
    return outputs


def _parse_windows(text: str) -> list:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("--windows must list at least one window size")
    for p in parts:
        if p.upper() != "T":
            try:
                if int(p) < 1:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"bad window size {p!r}") from None
    return parts


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="oagd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        if name == "sweep":
            p.add_argument("--windows", default="1,10,100,T")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.command == "validate":
            prep = prepare(cfg)
            window = make_weights(cfg.window_kind, cfg.resolved_window(),
                                  gamma=cfg.window_gamma)
            build_schedules(cfg, prep, window)
            print(f"ok: {cfg.problem} T={cfg.T} regime={cfg.regime} w={cfg.resolved_window()}")
            return 0
        if args.command == "run":
            run_experiment(cfg)
            print(f"wrote {cfg.output}.csv")
            return 0
        outputs = sweep(cfg, _parse_windows(args.windows))
        for out in outputs:
            print(f"wrote {out}.csv")
        return 0
    except OagdError as exc:
        print(f"error_category={type(exc).__name__}", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error_category={type(exc).__name__}", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
