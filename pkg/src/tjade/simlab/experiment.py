"""Monte-Carlo separation studies.

Each replication draws one source sample per ``(setting, n, rep)``, mixes
that same sample with every requested mixing kind, fits every method and
scores it with the minimum distance index against the mixing used.
Random streams come from ``SeedSequence(seed, spawn_key=...)`` so each
replication can be reproduced on its own and in any order.
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import reduce

import numpy as np

from ..ica import tfobi_fit, tjade_fit, vfobi_fit, vjade_fit
from ..metrics import kronecker_gain, mdi, transformed_mdi
from ..tensor import sample_multi_mode_product
from .mixing import MIXING_KINDS, mixing_matrices, normalize_kind
from .settings import SETTINGS, draw_sources, get_setting

__all__ = [
    "METHODS",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "ExperimentResult",
    "run_experiment",
    "run_replication",
    "summarize",
    "write_results_csv",
    "read_results_csv",
    "write_summary_csv",
]

METHODS = ("TJADE", "TFOBI", "VJADE", "VFOBI")
RESULT_COLUMNS = ("method", "mixing", "setting", "n", "rep", "mdi", "tmdi", "converged", "ms")
SUMMARY_COLUMNS = (
    "setting", "mixing", "method", "n", "reps",
    "mean_mdi", "mean_tmdi", "nonconverged", "errors",
)  # fmt: skip


class ConfigError(ValueError):
    """Malformed experiment configuration; ``line`` points into the source text when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ExperimentConfig:
    settings: tuple
    mixing: tuple = ("identity",)
    methods: tuple = METHODS
    ns: tuple = (1000,)
    reps: int = 100
    seed: int = 0
    c: int = 1
    tol: float = 1e-8
    max_sweeps: int = 100

    @classmethod
    def from_dict(cls, data, text=None):
        def fail(key, message):
            line = None
            if text is not None:
                for k, src in enumerate(text.splitlines(), start=1):
                    if f'"{key}"' in src:
                        line = k
                        break
            raise ConfigError(message, line)

        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object", 1 if text else None)
        known = {"setting", "settings", "grid", "mixing", "methods", "ns", "reps", "seed", "c",
                 "tol", "max_sweeps"}  # fmt: skip
        for key in data:
            if key not in known:
                fail(key, f"unknown key {key!r}")

        if "grid" in data:
            settings = [data["grid"]]
        else:
            raw = data.get("settings", data.get("setting"))
            if raw is None:
                raise ConfigError("missing key 'setting'")
            settings = [raw] if isinstance(raw, str) else list(raw)
        for s in settings:
            try:
                get_setting(s)
            except (ValueError, KeyError) as exc:
                fail("grid" if "grid" in data else "setting", str(exc))

        mixing = data.get("mixing", ["identity"])
        mixing = [mixing] if isinstance(mixing, str) else list(mixing)
        try:
            mixing = [normalize_kind(k) for k in mixing]
        except ValueError as exc:
            fail("mixing", str(exc))

        methods = [m.upper() for m in data.get("methods", METHODS)]
        for m in methods:
            if m not in METHODS:
                fail("methods", f"unknown method {m!r}; expected one of {METHODS}")

        ns = data.get("ns", [1000])
        if not ns or not all(isinstance(v, int) and v > 1 for v in ns):
            fail("ns", "'ns' must be a non-empty list of integers > 1")
        reps = data.get("reps", 100)
        if not isinstance(reps, int) or reps < 1:
            fail("reps", "'reps' must be a positive integer")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            fail("seed", "'seed' must be a non-negative integer")
        c = data.get("c", 1)
        if c not in (1, 2):
            fail("c", "'c' must be 1 or 2")
        return cls(
            settings=tuple(settings),
            mixing=tuple(mixing),
            methods=tuple(methods),
            ns=tuple(ns),
            reps=reps,
            seed=seed,
            c=c,
            tol=float(data.get("tol", 1e-8)),
            max_sweeps=int(data.get("max_sweeps", 100)),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, exc.lineno) from None
        return cls.from_dict(data, text)

    def setting_name(self, index):
        s = self.settings[index]
        return s if isinstance(s, str) else "custom"


@dataclass(frozen=True)
class ResultRow:
    method: str
    mixing: str
    setting: str
    n: int
    rep: int
    mdi: float
    tmdi: float
    converged: bool
    ms: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    summary: list = field(default_factory=list)


def _fit(method, X, config):
    if method == "TJADE":
        return tjade_fit(X, c=config.c, tol=config.tol, max_sweeps=config.max_sweeps)
    if method == "TFOBI":
        return tfobi_fit(X)
    if method == "VJADE":
        return vjade_fit(X, c=config.c, tol=config.tol, max_sweeps=config.max_sweeps)
    return vfobi_fit(X)


def _gain(model, mixers):
    if len(model.phis) == len(mixers):
        return kronecker_gain(model, mixers)
    return model.phis[0] @ reduce(np.kron, reversed(mixers))


def run_replication(config, setting_index, n, rep, timing=True):
    """All rows of one ``(setting, n, rep)`` cell."""
    setting = get_setting(config.settings[setting_index])
    name = config.setting_name(setting_index)
    p = int(np.prod(setting.dims))
    source_rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(setting_index, n, rep, 0))
    )
    Z = draw_sources(setting, n, source_rng)
    rows = []
    for kind in config.mixing:
        mix_rng = np.random.default_rng(
            np.random.SeedSequence(
                config.seed, spawn_key=(setting_index, n, rep, 1 + MIXING_KINDS.index(kind))
            )
        )
        mixers = mixing_matrices(kind, setting.dims, mix_rng)
        X = sample_multi_mode_product(Z, mixers)
        for method in config.methods:
            start = time.perf_counter()
            try:
                model = _fit(method, X, config)
                d = mdi(_gain(model, mixers))
                converged = model.converged
            except (np.linalg.LinAlgError, ValueError, FloatingPointError):
                d, converged = float("nan"), False
            ms = (time.perf_counter() - start) * 1e3 if timing else 0.0
            rows.append(
                ResultRow(method, kind, name, n, rep, d, transformed_mdi(d, n, p), converged, ms)
            )
    return rows


def _run_task(args):
    return run_replication(*args)


def run_experiment(config, workers=1, timing=True, progress=None):
    """Run every ``(setting, n, rep)`` cell of ``config``.

    Rows come back ordered by setting, sample size, replication, mixing and
    method regardless of ``workers``.
    """
    tasks = [
        (config, s, n, rep, timing)
        for s in range(len(config.settings))
        for n in config.ns
        for rep in range(config.reps)
    ]
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for k, chunk in enumerate(pool.map(_run_task, tasks, chunksize=4)):
                rows.extend(chunk)
                if progress:
                    progress(k + 1, len(tasks))
    else:
        for k, task in enumerate(tasks):
            rows.extend(_run_task(task))
            if progress:
                progress(k + 1, len(tasks))
    return ExperimentResult(config, rows, summarize(rows))


def summarize(rows):
    """Per ``(setting, mixing, method, n)`` means over finite rows plus failure counts."""
    groups = {}
    for row in rows:
        groups.setdefault((row.setting, row.mixing, row.method, row.n), []).append(row)
    out = []
    for (setting, mixing, method, n), members in groups.items():
        d = np.array([r.mdi for r in members])
        t = np.array([r.tmdi for r in members])
        ok = np.isfinite(d)
        out.append(
            {
                "setting": setting,
                "mixing": mixing,
                "method": method,
                "n": n,
                "reps": len(members),
                "mean_mdi": float(d[ok].mean()) if ok.any() else float("nan"),
                "mean_tmdi": float(t[ok].mean()) if ok.any() else float("nan"),
                "nonconverged": sum(1 for r in members if not r.converged),
                "errors": int((~ok).sum()),
            }
        )
    return out


def summary_lookup(summary):
    """Map ``(setting, mixing, method, n)`` to summary records."""
    return {(s["setting"], s["mixing"], s["method"], s["n"]): s for s in summary}


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(v) for v in asdict(row).values()])


def read_results_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for rec in reader:
            rows.append(
                ResultRow(
                    rec["method"],
                    rec["mixing"],
                    rec["setting"],
                    int(rec["n"]),
                    int(rec["rep"]),
                    float(rec["mdi"]),
                    float(rec["tmdi"]),
                    rec["converged"] == "true",
                    float(rec["ms"]),
                )
            )
    return rows


def write_summary_csv(summary, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for rec in summary:
            writer.writerow([_fmt(rec[c]) for c in SUMMARY_COLUMNS])


def available_settings():
    return sorted(SETTINGS)
