"""Seeded m-sweep studies, k-fold CV on external data, and result files.

Seed derivation (documented so runs can be replayed cell by cell):

* cell ``(m_index, repeat)`` uses ``SeedSequence(seed, spawn_key=(m_index, repeat))``,
  spawned into four children: DoE, test set, Co_SVR search, LS-SVR search;
* the r^2(m) correlation set uses ``SeedSequence(seed, spawn_key=(CORRELATION_KEY,))``
  and is shared by every ``m``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .benchmarks import BenchmarkFamily, get_family
from .cosvr import DEFAULT_GAMMA, MultiFidelityData, fit_cosvr
from .doe import DomainBox, lhs, scale
from .errors import ConfigurationError, DataError, DegenerateMetricError
from .gwo import GwoConfig
from .io import SampleTable, format_float, read_samples, write_table
from .lssvr import SampleSet, bounding_box, fit_lssvr
from .metrics import T_DOF, T_THRESHOLD, pearson_r2, r_squared, summarize, welch_t

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "ExternalDataset",
    "MODELS",
    "RESULT_COLUMNS",
    "expand_budget",
    "parse_config",
    "load_config",
    "correlation_curve",
    "sample_valid",
    "run_sweep",
    "cv_folds",
    "run_cv",
    "load_dataset",
    "write_result",
    "compare",
]

logger = logging.getLogger(__name__)

MODELS = ("cosvr", "lssvr_hf")
RESULT_COLUMNS = ("family", "m", "model", "mean_r2", "std_r2", "pearson_r2", "n_repeats", "seed")
CORRELATION_KEY = 2**31 - 1
_MAX_RESAMPLE = 10_000
_STRATUM_TRIES = 100


def expand_budget(budget, dim: int) -> int:
    """Expand ``"2s"``-style rules to ``2 * dim``; plain integers pass through."""
    if isinstance(budget, str):
        m = re.fullmatch(r"\s*(\d+)\s*s\s*", budget)
        if m:
            n = int(m.group(1)) * dim
        else:
            try:
                n = int(budget)
            except ValueError:
                raise ConfigurationError(f"bad sample budget {budget!r}; use an integer or '<k>s'") from None
    else:
        n = int(budget)
    if n < 1:
        raise ConfigurationError(f"sample budget must be positive, got {budget!r}")
    return n


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    m_grid: tuple = (0.0,)
    hf_budget: Union[int, str] = "2s"
    lf_budget: Union[int, str] = "10s"
    repeats: int = 30
    test_points: int = 1000
    seed: int = 0
    models: tuple = MODELS
    gwo_population: int = 30
    gwo_iterations: int = 200
    domain_override: Optional[Union[str, DomainBox]] = None
    gamma: float = DEFAULT_GAMMA
    objective: str = "training"

    def __post_init__(self):
        object.__setattr__(self, "m_grid", tuple(float(m) for m in self.m_grid))
        object.__setattr__(self, "models", tuple(self.models))

    def validate(self) -> BenchmarkFamily:
        fam = get_family(self.family)
        grid = np.asarray(self.m_grid)
        if grid.size == 0:
            raise ConfigurationError("m_grid is empty")
        if np.any(grid < 0) or np.any(grid > 1):
            raise ConfigurationError("m_grid values must lie in [0, 1]")
        if np.any(np.diff(grid) <= 0):
            raise ConfigurationError("m_grid must be strictly increasing")
        if self.repeats < 1 or self.test_points < 2:
            raise ConfigurationError("repeats must be >= 1 and test_points >= 2")
        if not self.models or any(m not in MODELS for m in self.models) or len(set(self.models)) != len(self.models):
            raise ConfigurationError(f"models must be a non-empty subset of {MODELS}, got {self.models}")
        hf = expand_budget(self.hf_budget, fam.dimension)
        expand_budget(self.lf_budget, fam.dimension)
        if "cosvr" in self.models and hf < 2:
            raise ConfigurationError("Co_SVR needs at least 2 HF samples")
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be positive")
        if self.objective not in ("training", "loo"):
            raise ConfigurationError(f"unknown objective {self.objective!r}")
        if self.gwo_population < 4 or self.gwo_iterations < 1:
            raise ConfigurationError("gwo.population must be >= 4 and gwo.iterations >= 1")
        self.domain(fam)
        return fam

    def gwo_config(self, seed) -> GwoConfig:
        return GwoConfig(self.gwo_population, self.gwo_iterations, int(seed))

    def domain(self, fam: BenchmarkFamily) -> DomainBox:
        ov = self.domain_override
        if ov is None or isinstance(ov, str):
            return fam.domain_for(ov)
        if ov.dim != fam.dimension:
            raise ConfigurationError(f"domain override has dimension {ov.dim}, family needs {fam.dimension}")
        return ov

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if isinstance(self.domain_override, DomainBox):
            d["domain_override"] = self.domain_override.to_list()
        d["m_grid"] = list(self.m_grid)
        d["models"] = list(self.models)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


# --- config files ---------------------------------------------------------------

_INT_KEYS = {"repeats", "test_points", "seed", "gwo.population", "gwo.iterations"}
_CONFIG_KEYS = {
    "family",
    "m_grid",
    "hf_budget",
    "lf_budget",
    "repeats",
    "test_points",
    "seed",
    "models",
    "gwo.population",
    "gwo.iterations",
    "domain_override",
    "gamma",
    "objective",
}


def _parse_grid(value: str) -> tuple:
    value = value.strip()
    if ":" in value and "," not in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"m_grid range must be start:stop:step, got {value!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigurationError("m_grid step must be positive")
        n = int(round((stop - start) / step)) + 1
        return tuple(float(v) for v in np.round(np.linspace(start, stop, n), 12))
    return tuple(float(v) for v in value.split(",") if v.strip())


def _parse_domain(value: str):
    value = value.strip()
    if re.fullmatch(r"[A-Za-z_]\w*", value):
        return value
    intervals = []
    for part in value.split(","):
        lo, _, hi = part.partition(":")
        intervals.append((float(lo), float(hi)))
    return DomainBox(tuple(intervals))


def parse_config(text: str) -> ExperimentSpec:
    """Parse a flat ``key = value`` document (``#`` comments) into a spec.

    List values are comma separated; ``m_grid`` also accepts ``start:stop:step``;
    ``domain_override`` is a preset name or ``lo:hi, lo:hi, ...``.
    """
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        if key not in _CONFIG_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in kwargs:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                parsed = int(value)
            elif key == "gamma":
                parsed = float(value)
            elif key == "m_grid":
                parsed = _parse_grid(value)
            elif key == "models":
                parsed = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "domain_override":
                parsed = _parse_domain(value)
            else:
                parsed = value
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        kwargs[key.replace("gwo.", "gwo_")] = parsed
    if "family" not in kwargs:
        raise ConfigurationError("config must set 'family'")
    return ExperimentSpec(**kwargs)


def load_config(path) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from None
    return parse_config(text)


# --- results --------------------------------------------------------------------

@dataclass
class ExperimentResult:
    rows: list
    timing: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    per_repeat: dict = field(default_factory=dict)

    def row(self, m, model) -> dict:
        """Row for ``(m, model)``; ``m=None`` selects the single CV row of ``model``."""
        for r in self.rows:
            if r["model"] == model and (r["m"] == m or (m is None and np.isnan(r["m"]))):
                return r
        raise KeyError((m, model))

    def summary(self, m, model):
        return summarize(self.per_repeat[(None if m is None else float(m), model)])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def write_result(result: ExperimentResult, path) -> list:
    """Write the result CSV plus ``.timing.csv`` and ``.meta.json`` sidecars.

    The main CSV is a pure function of the experiment spec; wall times live only in the
    timing sidecar. Returns the written paths.
    """
    path = Path(path)
    write_table(path, [list(RESULT_COLUMNS)] + [[_fmt(r[c]) for c in RESULT_COLUMNS] for r in result.rows])
    stem = path.with_suffix("")
    timing_path = stem.with_name(stem.name + ".timing.csv")
    meta_path = stem.with_name(stem.name + ".meta.json")
    write_table(
        timing_path,
        [["m", "model", "wall_time_s", "deterministic"]]
        + [[_fmt(t["m"]), t["model"], f"{t['wall_time_s']:.6f}", "false"] for t in result.timing],
    )
    meta_path.write_text(json.dumps(result.metadata, indent=1, sort_keys=True) + "\n")
    return [path, timing_path, meta_path]


# --- sampling helpers ---------------------------------------------------------

def sample_valid(fam: BenchmarkFamily, box: DomainBox, n: int, seed, fidelity="both", design="lhs"):
    """Draw ``n`` evaluable points; invalid ones are redrawn.

    LHS rows are redrawn inside their own strata so stratification survives;
    rows stuck in an infeasible cell combination swap a stratum with another row.
    Returns ``(points, resample_count)``.
    """
    rng = np.random.default_rng(seed)
    u = lhs(n, box.dim, rng) if design == "lhs" else rng.random((n, box.dim))
    cells = np.floor(u * n) if design == "lhs" else None

    def ok(pts):
        good = fam.valid_mask(pts, "hf")
        if fidelity in ("lf", "both"):
            good &= fam.valid_mask(pts, "lf")
        return good

    pts = scale(u, box)
    bad = ~ok(pts)
    tries = np.zeros(n, dtype=int)
    resampled = 0
    while np.any(bad):
        idx = np.flatnonzero(bad)
        resampled += idx.size
        if resampled > _MAX_RESAMPLE * max(n, 1):
            raise DataError(f"could not draw evaluable points for family {fam.name!r} in {box.to_list()}")
        if design == "lhs":
            tries[idx] += 1
            # a row whose cell combination keeps failing trades one stratum
            # with another row; both rows are then redrawn and rechecked
            for i in idx[tries[idx] > _STRATUM_TRIES]:
                j = int(rng.integers(n - 1))
                j += j >= i
                k = int(rng.integers(box.dim))
                cells[[i, j], k] = cells[[j, i], k]
                tries[i] = 0
                bad[j] = True
            idx = np.flatnonzero(bad)
            fresh = rng.random((idx.size, box.dim))
            fresh = np.minimum((cells[idx] + fresh) / n, np.nextafter((cells[idx] + 1) / n, 0))
        else:
            fresh = rng.random((idx.size, box.dim))
        u[idx] = fresh
        pts[idx] = scale(u[idx], box)
        bad[idx] = ~ok(pts[idx])
    return pts, resampled


def correlation_curve(fam: BenchmarkFamily, box: DomainBox, m_grid, n: int, seed) -> np.ndarray:
    """Squared HF/LF Pearson correlation on one shared uniform point set, per ``m``."""
    pts, _ = sample_valid(fam, box, n, seed, "both", design="uniform")
    yh = fam.hf(pts)
    return np.array([pearson_r2(yh, fam.lf(pts, m)) for m in m_grid])


# --- sweeps ----------------------------------------------------------------------

def _cell_seeds(seed: int, m_index: int, repeat: int):
    ss = np.random.SeedSequence(seed, spawn_key=(m_index, repeat))
    return ss.spawn(4)


def _int_seed(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, np.uint64)[0])


def _run_cell(args):
    spec, m_index, repeat = args
    fam = get_family(spec.family)
    box = spec.domain(fam)
    s = fam.dimension
    m = spec.m_grid[m_index]
    hf_n = expand_budget(spec.hf_budget, s)
    lf_n = expand_budget(spec.lf_budget, s)
    doe_seed, test_seed, co_seed, sf_seed = _cell_seeds(spec.seed, m_index, repeat)
    hf_seed, lf_seed = doe_seed.spawn(2)

    x_hf, n_hf_rs = sample_valid(fam, box, hf_n, hf_seed, "hf")
    x_test, n_test_rs = sample_valid(fam, box, spec.test_points, test_seed, "hf", design="uniform")
    y_test = fam.hf(x_test)
    out = {"r2": {}, "time": {}, "resampled": {"hf": n_hf_rs, "test": n_test_rs, "lf": 0}, "all_penalty": {}}

    if "cosvr" in spec.models:
        x_lf, n_lf_rs = sample_valid(fam, box, lf_n, lf_seed, "lf")
        out["resampled"]["lf"] = n_lf_rs
        t0 = time.perf_counter()
        data = MultiFidelityData(SampleSet(x_lf, fam.lf(x_lf, m), box), SampleSet(x_hf, fam.hf(x_hf), box))
        model = fit_cosvr(data, gwo_cfg=spec.gwo_config(_int_seed(co_seed)), gamma=spec.gamma, objective=spec.objective)
        out["r2"]["cosvr"] = r_squared(y_test, model.predict(x_test))
        out["time"]["cosvr"] = time.perf_counter() - t0
        out["all_penalty"]["cosvr"] = bool(model.meta["all_penalty"])
    if "lssvr_hf" in spec.models:
        t0 = time.perf_counter()
        model = fit_lssvr(SampleSet(x_hf, fam.hf(x_hf), box), gwo_cfg=spec.gwo_config(_int_seed(sf_seed)))
        out["r2"]["lssvr_hf"] = r_squared(y_test, model.predict(x_test))
        out["time"]["lssvr_hf"] = time.perf_counter() - t0
        out["all_penalty"]["lssvr_hf"] = bool(model.meta["all_penalty"])
    return out


def run_sweep(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentResult:
    """Run every ``(m, repeat)`` cell of ``spec`` and aggregate per ``(m, model)``.

    Cells are independent; with ``n_jobs > 1`` they run in worker processes and
    are collected in ``(m_index, repeat)`` order, so output does not depend on
    ``n_jobs``.
    """
    fam = spec.validate()
    box = spec.domain(fam)
    corr_seed = np.random.SeedSequence(spec.seed, spawn_key=(CORRELATION_KEY,))
    r2_curve = correlation_curve(fam, box, spec.m_grid, spec.test_points, corr_seed)

    work = [(spec, i, r) for i in range(len(spec.m_grid)) for r in range(spec.repeats)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            cells = list(pool.map(_run_cell, work))
    else:
        cells = [_run_cell(w) for w in work]

    rows, timing, per_repeat = [], [], {}
    resampled = {"hf": 0, "lf": 0, "test": 0}
    penalty_cells = 0
    for i, m in enumerate(spec.m_grid):
        chunk = cells[i * spec.repeats : (i + 1) * spec.repeats]
        for c in chunk:
            for k, v in c["resampled"].items():
                resampled[k] += v
            penalty_cells += sum(c["all_penalty"].values())
        for model in spec.models:
            vals = [c["r2"][model] for c in chunk]
            summ = summarize(vals)
            per_repeat[(m, model)] = vals
            rows.append(
                {
                    "family": spec.family,
                    "m": m,
                    "model": model,
                    "mean_r2": summ.mean_r2,
                    "std_r2": summ.std_r2,
                    "pearson_r2": float(r2_curve[i]),
                    "n_repeats": summ.n_repeats,
                    "seed": spec.seed,
                }
            )
            timing.append({"m": m, "model": model, "wall_time_s": float(sum(c["time"][model] for c in chunk))})
    if any(resampled.values()):
        logger.info("resampled %s non-evaluable points for family %s", resampled, spec.family)

    meta = {
        "spec": spec.to_dict(),
        "spec_sha256": spec.digest(),
        "version": __version__,
        "domain": box.to_list(),
        "domain_source": _domain_source(spec),
        "hf_budget": expand_budget(spec.hf_budget, fam.dimension),
        "lf_budget": expand_budget(spec.lf_budget, fam.dimension),
        "resampled_points": resampled,
        "all_penalty_fits": int(penalty_cells),
    }
    if set(MODELS) <= set(spec.models):
        meta["t_tests"] = compare_models(per_repeat, spec.m_grid, "cosvr", "lssvr_hf")
    return ExperimentResult(rows, timing, meta, per_repeat)


def _domain_source(spec: ExperimentSpec) -> str:
    ov = spec.domain_override
    if ov is None:
        return "declared"
    return f"preset:{ov}" if isinstance(ov, str) else "override"


def compare_models(per_repeat: dict, m_grid, model_a: str, model_b: str, per_repeat_b: Optional[dict] = None) -> list:
    """Welch t of ``model_a`` minus ``model_b`` at each ``m`` against the 1.65 / 58 dof threshold."""
    other = per_repeat if per_repeat_b is None else per_repeat_b
    out = []
    for m in m_grid:
        a = summarize(per_repeat[(m, model_a)])
        b = summarize(other[(m, model_b)])
        try:
            t = welch_t(a, b)
        except DegenerateMetricError:
            t = float("nan")
        out.append({"m": m, "t": t, "threshold": T_THRESHOLD, "dof": T_DOF, "significant": bool(t > T_THRESHOLD)})
    return out


def compare(a: ExperimentResult, model_a: str, b: ExperimentResult, model_b: str) -> list:
    """Per-``m`` t statistics between two sweeps over the same ``m`` grid."""
    grid = [r["m"] for r in a.rows if r["model"] == model_a]
    return compare_models(a.per_repeat, grid, model_a, model_b, b.per_repeat)


# --- external data / cross-validation ------------------------------------------

@dataclass
class ExternalDataset:
    lf: SampleTable
    hf: SampleTable
    test: Optional[SampleTable] = None

    def __post_init__(self):
        tables = [t for t in (self.lf, self.hf, self.test) if t is not None]
        dims = {t.dim for t in tables}
        if len(dims) != 1:
            raise DataError(f"LF/HF/test tables disagree on input count: {sorted(dims)}")
        for t in tables:
            if not (np.all(np.isfinite(t.points)) and np.all(np.isfinite(t.responses))):
                raise DataError("external tables must hold finite values only")

    @property
    def dim(self) -> int:
        return self.hf.dim

    def domain(self) -> DomainBox:
        sets = [self.lf.points, self.hf.points] + ([self.test.points] if self.test is not None else [])
        return bounding_box(*sets)


def load_dataset(lf_path, hf_path, test_path=None) -> ExternalDataset:
    """Read LF, HF and optional test sample CSVs into an :class:`ExternalDataset`."""
    test = read_samples(test_path) if test_path is not None else None
    return ExternalDataset(read_samples(lf_path), read_samples(hf_path), test)


def cv_folds(points, responses, folds: int, seed) -> list:
    """Near-equal random partition of sample rows into ``folds`` index arrays.

    Rows are first put into a canonical (lexicographic) order, so the assignment
    follows sample identity rather than table order.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(responses, dtype=float).ravel()
    n = pts.shape[0]
    if folds < 2:
        raise ConfigurationError(f"need at least 2 folds, got {folds}")
    if n < folds:
        raise ConfigurationError(f"{n} HF samples cannot fill {folds} folds")
    keys = np.column_stack([pts, y])
    canonical = np.lexsort(keys.T[::-1])
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(canonical[part]) for part in np.array_split(perm, folds)]


def _matched_r2(lf: SampleTable, hf: SampleTable) -> float:
    lookup = {tuple(p): y for p, y in zip(lf.points.tolist(), lf.responses.tolist())}
    pairs = [(yh, lookup[tuple(p)]) for p, yh in zip(hf.points.tolist(), hf.responses.tolist()) if tuple(p) in lookup]
    if len(pairs) < 2:
        return float("nan")
    try:
        return pearson_r2(*np.array(pairs).T)
    except DegenerateMetricError:
        return float("nan")


def run_cv(
    data: ExternalDataset,
    folds: int = 5,
    seed: int = 0,
    models=MODELS,
    gwo_population: int = 30,
    gwo_iterations: int = 200,
    gamma: float = DEFAULT_GAMMA,
    objective: str = "training",
) -> ExperimentResult:
    """Train on all LF rows plus one HF fold at a time; score on the test table.

    Without a test table each fold's model is scored on the HF rows outside the
    fold. The single-fidelity baseline trains on the same HF fold.
    """
    models = tuple(models)
    if not models or any(m not in MODELS for m in models):
        raise ConfigurationError(f"models must be a subset of {MODELS}")
    parts = cv_folds(data.hf.points, data.hf.responses, folds, seed)
    if min(len(p) for p in parts) < 2:
        raise ConfigurationError("every fold needs at least 2 HF samples to train on")
    box = data.domain()
    lf = SampleSet(data.lf.points, data.lf.responses, box)
    ss_root = np.random.SeedSequence(seed, spawn_key=(folds,))
    fold_seeds = ss_root.spawn(len(parts))
    per_repeat = {(None, m): [] for m in models}
    timing = {m: 0.0 for m in models}
    n = data.hf.points.shape[0]
    for k, idx in enumerate(parts):
        hf = SampleSet(data.hf.points[idx], data.hf.responses[idx], box)
        if data.test is not None:
            xt, yt = data.test.points, data.test.responses
        else:
            rest = np.setdiff1d(np.arange(n), idx)
            xt, yt = data.hf.points[rest], data.hf.responses[rest]
        co_seed, sf_seed = (_int_seed(s) for s in fold_seeds[k].spawn(2))
        for model_name in models:
            t0 = time.perf_counter()
            if model_name == "cosvr":
                model = fit_cosvr(
                    MultiFidelityData(lf, hf),
                    gwo_cfg=GwoConfig(gwo_population, gwo_iterations, co_seed),
                    gamma=gamma,
                    objective=objective,
                )
            else:
                model = fit_lssvr(hf, gwo_cfg=GwoConfig(gwo_population, gwo_iterations, sf_seed))
            per_repeat[(None, model_name)].append(r_squared(yt, model.predict(xt)))
            timing[model_name] += time.perf_counter() - t0

    corr = _matched_r2(data.lf, data.hf)
    rows, trows = [], []
    for model_name in models:
        summ = summarize(per_repeat[(None, model_name)])
        rows.append(
            {
                "family": "external",
                "m": float("nan"),
                "model": model_name,
                "mean_r2": summ.mean_r2,
                "std_r2": summ.std_r2,
                "pearson_r2": corr,
                "n_repeats": summ.n_repeats,
                "seed": seed,
            }
        )
        trows.append({"m": float("nan"), "model": model_name, "wall_time_s": timing[model_name]})
    meta = {
        "version": __version__,
        "folds": folds,
        "fold_sizes": [int(len(p)) for p in parts],
        "evaluation": "test_table" if data.test is not None else "held_out_hf",
        "domain": box.to_list(),
        "input_names": data.hf.input_names,
        "units": {**data.lf.units, **data.hf.units},
        "gwo": {"population": gwo_population, "iterations": gwo_iterations},
        "gamma": gamma,
        "objective": objective,
    }
    return ExperimentResult(rows, trows, meta, per_repeat)
