"""End-to-end correlation, cointegration and connectedness workflow driven by a YAML config.

Stages run in order and each writes its artifacts as soon as it finishes,
so a failure keeps everything produced before it. Output lands in a
directory named after a hash of the resolved configuration and the input
file contents; ``n_jobs`` and output location are excluded from the hash
because they do not change results.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np
import yaml

from .connectedness import (average_report, connectedness_report, dynamic_report,
                            export_network)
from .correlation import static_correlation, var_conditional_correlation, var_partial_correlation
from .diagnostics import (adf_test, chow_test, describe, engle_granger_matrix, jarque_bera,
                          ljung_box_squared)
from .errors import DataError, NumericalError, SpilloverError
from .panel import PanelSeries, TransformSpec, align, apply_transforms, first_difference, load_csv, to_csv
from .tvp import TvpConfig, rolling_var_fevd, trajectory_fevd, tvp_filter
from .var import cholesky_fevd, fit_var, gfevd, select_lag

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

ARTIFACTS = (
    "panel.csv",
    "descriptive.csv",
    "adf.csv",
    "correlation.json",
    "cointegration.csv",
    "chow.json",
    "static_connectedness.csv",
    "dynamic_connectedness.csv",
    "network.dot",
)


def config_schema() -> dict:
    return json.loads(resources.files("spillover").joinpath("data/config_schema.json").read_text())


def bundled_path(name: str) -> Path:
    """Filesystem path of a file shipped in the package's data directory."""
    return Path(str(resources.files("spillover").joinpath("data", name)))


@dataclass(frozen=True)
class InputSpec:
    path: str
    date_column: str = "date"
    columns: tuple[str, ...] | None = None
    delimiter: str = ","
    date_format: str | None = None


@dataclass(frozen=True)
class VarSection:
    lag: int | str = "auto"
    p_max: int = 5
    criterion: str = "bic"
    horizon: int = 10
    cholesky_order: tuple[str, ...] | None = None


@dataclass(frozen=True)
class TvpSection:
    mode: str = "filter"
    kappa1: float = 0.99
    kappa2: float = 0.99
    prior_scale: float = 0.1
    burn_in: int | None = None
    rolling_window: int | None = None


@dataclass(frozen=True)
class TestSection:
    level: float = 0.05
    adf_max_lags: int | None = None
    deterministic: str = "c"
    ljung_box_lags: int = 20
    bidirectional: bool = False
    chow_break_index: int | None = None
    chow_bootstrap_reps: int = 399

    __test__ = False


@dataclass(frozen=True)
class OutputSection:
    directory: str = "spillover-output"
    keyed_by_hash: bool = True
    record_timings: bool = False
    decimals: int | None = None


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[InputSpec, ...]
    transforms: dict = field(default_factory=dict)
    var: VarSection = VarSection()
    tvp: TvpSection = TvpSection()
    tests: TestSection = TestSection()
    threshold: float = 0.0
    output: OutputSection = OutputSection()
    seed: int = 0
    n_jobs: int = 1

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | os.PathLike = ".") -> "PipelineConfig":
        """Validate against the schema, resolve relative paths and check inputs exist."""
        try:
            jsonschema.validate(raw, config_schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise DataError(f"invalid config at {where}: {exc.message}") from None
        base = Path(base_dir)
        inputs = []
        for spec in raw["inputs"]:
            spec = dict(spec)
            path = Path(spec["path"])
            if not path.is_absolute():
                path = base / path
            if not path.is_file():
                raise DataError(f"input file not found: {path}")
            spec["path"] = str(path)
            if "columns" in spec:
                spec["columns"] = tuple(spec["columns"])
            inputs.append(InputSpec(**spec))
        var = dict(raw.get("var", {}))
        if var.get("cholesky_order") is not None:
            var["cholesky_order"] = tuple(var["cholesky_order"])
        # inputs resolve against the config file; output against the working directory
        out = dict(raw.get("output", {}))
        return cls(
            inputs=tuple(inputs),
            transforms=dict(raw.get("transforms", {})),
            var=VarSection(**var),
            tvp=TvpSection(**raw.get("tvp", {})),
            tests=TestSection(**raw.get("tests", {})),
            threshold=float(raw.get("network", {}).get("threshold", 0.0)),
            output=OutputSection(**out),
            seed=raw.get("seed", 0),
            n_jobs=raw.get("n_jobs", 1),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise DataError(f"cannot parse config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise DataError(f"config {path} must be a mapping")
        return cls.from_dict(raw, path.parent)

    def config_hash(self) -> str:
        """SHA-256 over result-relevant settings and input file contents."""
        material = asdict(self)
        material.pop("n_jobs")
        material.pop("output")
        for spec in material["inputs"]:
            spec["sha256"] = hashlib.sha256(Path(spec.pop("path")).read_bytes()).hexdigest()
        blob = json.dumps(material, sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(blob.encode()).hexdigest()


def load_inputs(inputs, transforms: dict | None = None) -> PanelSeries:
    """Load and align every input, then apply the per-column transforms."""
    panels = [load_csv(s.path, s.date_column, s.columns, delimiter=s.delimiter,
                       date_format=s.date_format) for s in inputs]
    merged = align(panels)
    transforms = transforms or {}
    default = transforms.get("default", "identity")
    kinds = {n: transforms.get("columns", {}).get(n, default) for n in merged.names}
    unknown = set(transforms.get("columns", {})) - set(merged.names)
    if unknown:
        raise DataError(f"transforms name unknown columns: {sorted(unknown)}")
    return apply_transforms(merged, TransformSpec(kinds))


# ---------------------------------------------------------------------------
# artifact writers


def _num(x, decimals=None) -> str:
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return ""
    return repr(x) if decimals is None else f"{x:.{decimals}f}"


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


@dataclass
class PipelineResult:
    status: int
    directory: Path
    manifest: dict
    message: str | None = None


class _Run:
    def __init__(self, config: PipelineConfig, directory: Path):
        self.cfg = config
        self.dir = directory
        self.stages: list[dict] = []
        self.state: dict[str, Any] = {}

    def stage(self, name: str, fn: Callable[[], list[str]]) -> None:
        t0 = time.perf_counter()
        try:
            artifacts = fn()
        except SpilloverError as exc:
            raise _StageFailure(name, exc) from exc
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise _StageFailure(name, NumericalError(str(exc))) from exc
        self.stages.append({
            "name": name,
            "artifacts": artifacts,
            "seconds": round(time.perf_counter() - t0, 6) if self.cfg.output.record_timings else None,
        })

    # -- stages --------------------------------------------------------------

    def ingest(self):
        levels = load_inputs(self.cfg.inputs, self.cfg.transforms)
        self.state["levels"] = levels
        self.state["returns"] = first_difference(levels)
        to_csv(levels, self.dir / "panel.csv")
        return ["panel.csv"]

    def descriptive(self):
        r = self.state["returns"]
        t = self.cfg.tests
        d = self.cfg.output.decimals
        rows = [["variable", "mean", "median", "sd", "skewness", "kurtosis", "q1", "q3",
                 "jb", "jb_p", f"q2({t.ljung_box_lags})", "q2_p", "nobs"]]
        stats = describe(r)
        for i, n in enumerate(r.names):
            s = stats[n]
            jb = jarque_bera(r.values[:, i], t.level)
            lb = ljung_box_squared(r.values[:, i], t.ljung_box_lags, t.level)
            rows.append([n, *(_num(v, d) for v in (s.mean, s.median, s.sd, s.skewness, s.kurtosis,
                                                   s.q1, s.q3, jb.statistic, jb.p_value,
                                                   lb.statistic, lb.p_value)), str(s.nobs)])
        _write_csv(self.dir / "descriptive.csv", rows)
        return ["descriptive.csv"]

    def unit_roots(self):
        t = self.cfg.tests
        d = self.cfg.output.decimals
        lv, rt = self.state["levels"], self.state["returns"]
        rows = [["variable", "level_stat", "level_p", "level_lags",
                 "diff_stat", "diff_p", "diff_lags"]]
        for i, n in enumerate(lv.names):
            a = adf_test(lv.values[:, i], t.adf_max_lags, t.deterministic, level=t.level)
            b = adf_test(rt.values[:, i], t.adf_max_lags, t.deterministic, level=t.level)
            rows.append([n, _num(a.statistic, d), _num(a.p_value, d), str(a.lags),
                         _num(b.statistic, d), _num(b.p_value, d), str(b.lags)])
        _write_csv(self.dir / "adf.csv", rows)
        return ["adf.csv"]

    def lag_order(self) -> int:
        v = self.cfg.var
        if "lag" not in self.state:
            self.state["lag"] = (select_lag(self.state["returns"], v.p_max, v.criterion)
                                 if v.lag == "auto" else int(v.lag))
        return self.state["lag"]

    def correlations(self):
        r = self.state["returns"]
        model = fit_var(r, self.lag_order())
        self.state["model"] = model
        out = {"lag": self.lag_order()}
        for kind in ("pearson", "spearman", "kendall"):
            out[kind] = static_correlation(r, kind).to_dict()
        out["var-conditional"] = var_conditional_correlation(model).to_dict()
        out["var-partial"] = var_partial_correlation(model).to_dict()
        _write_json(self.dir / "correlation.json", out)
        return ["correlation.json"]

    def cointegration(self):
        t = self.cfg.tests
        d = self.cfg.output.decimals
        res = engle_granger_matrix(self.state["levels"], t.deterministic, t.adf_max_lags,
                                   bidirectional=t.bidirectional, level=t.level)
        rows = [["dependent", "regressor", "statistic", "p_value", "lags", "decision"]]
        for (a, b), r in res.items():
            rows.append([a, b, _num(r.statistic, d), _num(r.p_value, d), str(r.lags), r.decision])
        _write_csv(self.dir / "cointegration.csv", rows)
        return ["cointegration.csv"]

    def chow(self):
        t = self.cfg.tests
        r = self.state["returns"]
        out = {"lag": self.lag_order(), "break_index": t.chow_break_index or r.T // 2,
               "break_date": str(r.dates[t.chow_break_index or r.T // 2])}
        for variant in ("break-point", "sample-split"):
            res = chow_test(r, self.lag_order(), t.chow_break_index, variant,
                            t.chow_bootstrap_reps, self.cfg.seed, level=t.level)
            out[variant] = res.to_dict(with_stars=True)
        _write_json(self.dir / "chow.json", out)
        return ["chow.json"]

    def static_connectedness(self):
        v = self.cfg.var
        model = self.state["model"]
        fevd = (cholesky_fevd(model, v.horizon, list(v.cholesky_order)) if v.cholesky_order
                else gfevd(model, v.horizon))
        connectedness_report(fevd).to_csv(self.dir / "static_connectedness.csv",
                                          decimals=self.cfg.output.decimals)
        return ["static_connectedness.csv"]

    def dynamic_connectedness(self):
        tv, v = self.cfg.tvp, self.cfg.var
        r = self.state["returns"]
        if tv.mode == "rolling":
            if tv.rolling_window is None:
                raise DataError("tvp.mode 'rolling' needs tvp.rolling_window")
            tables = rolling_var_fevd(r, tv.rolling_window, self.lag_order(), v.horizon,
                                      n_jobs=self.cfg.n_jobs)
        else:
            cfg = TvpConfig(p=self.lag_order(), kappa1=tv.kappa1, kappa2=tv.kappa2,
                            prior_scale=tv.prior_scale, burn_in=tv.burn_in)
            tables = trajectory_fevd(tvp_filter(r, cfg), v.horizon, n_jobs=self.cfg.n_jobs)
        dyn = dynamic_report(tables)
        self.state["dynamic"] = dyn
        dyn.to_long_csv(self.dir / "dynamic_connectedness.csv")
        return ["dynamic_connectedness.csv"]

    def network(self):
        dot = export_network(average_report(self.state["dynamic"]), self.cfg.threshold)
        (self.dir / "network.dot").write_text(dot)
        return ["network.dot"]


class _StageFailure(Exception):
    def __init__(self, stage: str, error: SpilloverError):
        super().__init__(f"stage '{stage}' failed: {error}")
        self.stage = stage
        self.error = error


STAGES = (
    ("ingest", "ingest"),
    ("descriptive", "descriptive"),
    ("unit-roots", "unit_roots"),
    ("correlation", "correlations"),
    ("cointegration", "cointegration"),
    ("chow", "chow"),
    ("static-connectedness", "static_connectedness"),
    ("dynamic-connectedness", "dynamic_connectedness"),
    ("network", "network"),
)


def output_directory(config: PipelineConfig) -> Path:
    root = Path(config.output.directory)
    return root / config.config_hash()[:16] if config.output.keyed_by_hash else root


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute every stage and write ``manifest.json`` next to the artifacts.

    Returns the exit status (0 success, 2 data error, 3 numerical failure),
    the artifact directory and the manifest. On failure the manifest lists
    the completed stages and names the failed one.
    """
    digest = config.config_hash()
    directory = output_directory(config)
    directory.mkdir(parents=True, exist_ok=True)
    run = _Run(config, directory)
    failure = None
    try:
        for name, method in STAGES:
            run.stage(name, getattr(run, method))
    except _StageFailure as exc:
        failure = exc
    manifest = {"config_hash": digest, "stages": run.stages}
    status, message = EXIT_OK, None
    if failure is not None:
        status = EXIT_NUMERICAL if isinstance(failure.error, NumericalError) else EXIT_DATA
        message = str(failure)
        manifest["failed_stage"] = failure.stage
        manifest["error"] = str(failure.error)
    manifest["checksums"] = {
        a: hashlib.sha256((directory / a).read_bytes()).hexdigest()
        for s in run.stages for a in s["artifacts"]
    }
    _write_json(directory / "manifest.json", manifest)
    return PipelineResult(status, directory, manifest, message)
