"""End-to-end workflow: ingest, depth-to-time, attribute reconstruction,
normalization, target regularization, split/train/validate, and the
bounded retrain-on-weak-validation loop, plus table rendering.

Every numbered stage is a thin call into the owning module; this file owns
sequencing, configuration and reporting only.
"""

import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import emdreg, ftreg, metrics, mlp, resample, volpost, waveletreg
from .errors import ConfigError, DataError
from .formats.las import parse_las
from .formats.svol import read_svol, write_svol
from .resample import PatternSet, TimeSeries


class SpanTooLarge(ConfigError):
    pass


def moving_average_baseline(series: TimeSeries, span: int = 9) -> TimeSeries:
    """Centered moving mean; edge windows shrink to the valid part."""
    if span % 2 == 0 or span < 1:
        raise ConfigError(f"span must be odd and >= 1, got {span}")
    n = len(series)
    if span > n:
        raise SpanTooLarge(f"span {span} exceeds series length {n}")
    half = span // 2
    padded = np.concatenate([np.zeros(1), np.cumsum(series.values)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    return series.with_values((padded[hi] - padded[lo]) / (hi - lo))


GOOD_FIT = {"cc_min": 0.80, "rmse_max": 0.15, "aem_max": 0.15, "si_max": 0.35}

METHODS = ("none", "avg9", "ft", "wd", "emd")


@dataclass
class WellConfig:
    well_id: str
    las_path: str
    velocity_path: str
    inline: int | None = None
    xline: int | None = None
    sf_curve: str = "SF"


@dataclass
class RunConfig:
    vol_imp: str = ""
    vol_amp: str = ""
    vol_freq: str = ""
    wells: list = field(default_factory=list)   # of WellConfig
    method: str = "ft"
    dt_ms: float = 0.15
    zeta_max_hz: float | None = None            # None -> predictor-derived
    wavelet: str = "db4"
    wd_levels: int = 6
    truncate_details: list | None = None        # None -> 1..levels-1
    p1: int = 1
    sd_threshold: float = 0.2
    avg_span: int = 9
    mi_bins: int = 16
    split_seed: int = 7
    hidden: int = 10
    max_iters: int = 2000
    train_seed: int = 7
    sigma: float = 1e-4
    lambda1: float = 1e-4
    target_loss: float = 0.0
    gate_tol_bits: float = 0.05
    validation_cc_threshold: float = 0.80
    max_attempts: int = 3
    predict: bool = False
    filter_window: int = 3
    outdir: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")


_CONFIG_KEYS = {
    "vol.imp": ("vol_imp", str), "vol.amp": ("vol_amp", str),
    "vol.freq": ("vol_freq", str),
    "method": ("method", str), "dt_ms": ("dt_ms", float),
    "zeta_max_hz": ("zeta_max_hz", float), "wavelet": ("wavelet", str),
    "wd_levels": ("wd_levels", int), "p1": ("p1", int),
    "sd_threshold": ("sd_threshold", float), "avg_span": ("avg_span", int),
    "mi_bins": ("mi_bins", int), "split_seed": ("split_seed", int),
    "hidden": ("hidden", int), "max_iters": ("max_iters", int),
    "train_seed": ("train_seed", int), "sigma": ("sigma", float),
    "lambda1": ("lambda1", float), "target_loss": ("target_loss", float),
    "gate_tol_bits": ("gate_tol_bits", float),
    "validation_cc_threshold": ("validation_cc_threshold", float),
    "max_attempts": ("max_attempts", int),
    "predict": ("predict", lambda s: s.lower() in ("1", "true", "yes")),
    "filter_window": ("filter_window", int), "outdir": ("outdir", str),
}


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Flat `key = value` lines; '#' starts a comment.  Wells are declared
    as `wells = A,B,...` with per-well `well.<id>.las` / `well.<id>.velocity`
    (and optional .inline/.xline/.sf_curve) keys."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    raw.update(overrides or {})

    kwargs = {}
    for key, value in raw.items():
        if key in _CONFIG_KEYS:
            attr, conv = _CONFIG_KEYS[key]
            try:
                kwargs[attr] = conv(value)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}")
        elif key == "truncate":
            kwargs["truncate_details"] = [int(v) for v in value.split(",") if v]
        elif key == "wells" or key.startswith("well."):
            continue
        else:
            raise ConfigError(f"unknown config key {key!r}")

    wells = []
    for well_id in [w.strip() for w in raw.get("wells", "").split(",") if w.strip()]:
        prefix = f"well.{well_id}."
        las = raw.get(prefix + "las")
        vel = raw.get(prefix + "velocity")
        if not las or not vel:
            raise ConfigError(f"well {well_id}: need {prefix}las and {prefix}velocity")
        wells.append(WellConfig(
            well_id=well_id, las_path=las, velocity_path=vel,
            inline=int(raw[prefix + "inline"]) if prefix + "inline" in raw else None,
            xline=int(raw[prefix + "xline"]) if prefix + "xline" in raw else None,
            sf_curve=raw.get(prefix + "sf_curve", "SF"),
        ))
    kwargs["wells"] = wells
    return RunConfig(**kwargs)


def render_config(config: RunConfig) -> str:
    """The resolved flat-file form of a config (written next to run outputs)."""
    lines = []
    for key, (attr, _) in _CONFIG_KEYS.items():
        value = getattr(config, attr)
        if value is None:
            continue
        lines.append(f"{key} = {value}")
    if config.truncate_details is not None:
        lines.append("truncate = " + ",".join(str(i) for i in config.truncate_details))
    lines.append("wells = " + ",".join(w.well_id for w in config.wells))
    for w in config.wells:
        lines.append(f"well.{w.well_id}.las = {w.las_path}")
        lines.append(f"well.{w.well_id}.velocity = {w.velocity_path}")
        if w.inline is not None:
            lines.append(f"well.{w.well_id}.inline = {w.inline}")
        if w.xline is not None:
            lines.append(f"well.{w.well_id}.xline = {w.xline}")
        if w.sf_curve != "SF":
            lines.append(f"well.{w.well_id}.sf_curve = {w.sf_curve}")
    return "\n".join(lines) + "\n"


@dataclass
class WellData:
    """One well's target and attributes on the shared fine time grid."""

    well_id: str
    inline: int
    xline: int
    t0_ms: float
    dt_ms: float
    sf: np.ndarray
    imp: np.ndarray
    amp: np.ndarray
    freq: np.ndarray

    @property
    def times_ms(self):
        return self.t0_ms + self.dt_ms * np.arange(len(self.sf))

    def series(self, values) -> TimeSeries:
        return TimeSeries(self.t0_ms, self.dt_ms, values)


def prepare_well(well_cfg: WellConfig, volumes: dict, dt_ms: float) -> WellData:
    """LAS + velocity + attribute volumes -> aligned fine-grid arrays."""
    with open(well_cfg.las_path) as fh:
        log = parse_las(fh.read())
    vp = resample.load_velocity_csv(well_cfg.velocity_path)
    sf = log.curve(well_cfg.sf_curve)
    depths = log.depths
    ok = ~np.isnan(sf)
    sf_ts = resample.depth_to_time(depths[ok], sf[ok], vp, dt_ms)

    inline = well_cfg.inline
    xline = well_cfg.xline
    if inline is None:
        inline = log.meta_float("ILIN")
        inline = int(inline) if inline is not None else None
    if xline is None:
        xline = log.meta_float("XLIN")
        xline = int(xline) if xline is not None else None
    if inline is None or xline is None:
        raise ConfigError(
            f"well {well_cfg.well_id}: no inline/xline in config or LAS ~W (ILIN/XLIN)"
        )

    traces = {}
    for name, vol in volumes.items():
        i, j = vol.inline_index(inline), vol.xline_index(xline)
        if not vol.mask[i, j].all():
            raise DataError(f"well {well_cfg.well_id}: {name} trace is masked at "
                            f"({inline}, {xline})")
        trace_ts = TimeSeries(vol.t0_ms, vol.dt_ms, vol.data[i, j])
        traces[name] = resample.sinc_resample(trace_ts, sf_ts.t0_ms, dt_ms,
                                              len(sf_ts)).values
    return WellData(
        well_id=well_cfg.well_id, inline=inline, xline=xline,
        t0_ms=sf_ts.t0_ms, dt_ms=dt_ms, sf=sf_ts.values,
        imp=traces["imp"], amp=traces["amp"], freq=traces["freq"],
    )


@dataclass
class MethodParams:
    method: str
    zeta_max_hz: float | None = None
    wavelet: str = "db4"
    wd_levels: int = 6
    truncate_details: list | None = None
    p1: int = 1
    sd_threshold: float = 0.2
    avg_span: int = 9

    def describe(self) -> dict:
        d = {"method": self.method}
        if self.method == "ft":
            d["zeta_max_hz"] = self.zeta_max_hz
        elif self.method == "wd":
            d.update(wavelet=self.wavelet, levels=self.wd_levels,
                     truncate=sorted(self.truncate_details
                                     or range(1, self.wd_levels)))
        elif self.method == "emd":
            d.update(p1=self.p1, sd_threshold=self.sd_threshold)
        elif self.method == "avg9":
            d["span"] = self.avg_span
        return d

    def tightened(self) -> "MethodParams | None":
        """One step of the fixed tightening schedule; None when the method
        has nothing to tighten."""
        if self.method == "ft":
            return MethodParams(**{**self.__dict__,
                                   "zeta_max_hz": (self.zeta_max_hz or 0) * 0.8})
        if self.method == "wd":
            current = set(self.truncate_details or range(1, self.wd_levels))
            missing = sorted(set(range(1, self.wd_levels + 1)) - current)
            if not missing:
                return None
            return MethodParams(**{**self.__dict__,
                                   "truncate_details": sorted(current | {missing[0]})})
        if self.method == "emd":
            return MethodParams(**{**self.__dict__, "p1": self.p1 + 1})
        return None

    @classmethod
    def from_config(cls, config: RunConfig) -> "MethodParams":
        return cls(method=config.method, zeta_max_hz=config.zeta_max_hz,
                   wavelet=config.wavelet, wd_levels=config.wd_levels,
                   truncate_details=config.truncate_details, p1=config.p1,
                   sd_threshold=config.sd_threshold, avg_span=config.avg_span)


def regularize_target(target: TimeSeries, params: MethodParams,
                      predictor: TimeSeries, tol_bits: float):
    """Dispatch one well's target through the configured method.

    Returns (regularized TimeSeries, report dict)."""
    if params.method == "none":
        return target, {"method": "none"}
    if params.method == "avg9":
        out = moving_average_baseline(target, params.avg_span)
        return out, {"method": "avg9", "span": params.avg_span}
    if params.method == "ft":
        zeta = params.zeta_max_hz
        if zeta is None:
            zeta = ftreg.default_zeta_max(predictor)
        out, report = ftreg.regularize_ft(
            target, ftreg.FtRegParams(zeta_max_hz=zeta, entropy_tolerance=tol_bits),
            predictor=predictor)
        return out, report.to_dict()
    if params.method == "wd":
        out, report = waveletreg.regularize_wd(
            target, wavelet=params.wavelet, levels=params.wd_levels,
            truncate_details=params.truncate_details,
            predictor=predictor, tol_bits=tol_bits)
        return out, report.to_dict()
    if params.method == "emd":
        sift = emdreg.SiftParams(sd_threshold=params.sd_threshold)
        decomposition = emdreg.emd(target, sift)
        p1_eff = min(params.p1, len(decomposition) - 1)
        out, report = emdreg.regularize_emd(
            target, sift, p1=p1_eff, predictor=predictor, tol_bits=tol_bits,
            decomposition=decomposition)
        return out, report.to_dict()
    raise ConfigError(f"unknown method {params.method!r}")


def _well_tables(well: WellData, scored: dict, sf_norm: TimeSeries,
                 sf_reg: TimeSeries, bins: int) -> dict:
    entropy = {name: metrics.series_entropy(well.series(vals))
               for name, vals in scored.items()}
    entropy["original_sf"] = metrics.series_entropy(sf_norm)
    entropy["regularized_sf"] = metrics.series_entropy(sf_reg)
    nmi_rows = {}
    for name, vals in scored.items():
        nmi_rows[name] = {
            "original": metrics.nmi(vals, sf_norm.values, bins),
            "regularized": metrics.nmi(vals, sf_reg.values, bins),
        }
    return {"entropy_bits": entropy, "nmi": nmi_rows}


def _good_fit(report: metrics.MetricsReport) -> bool:
    return (report.cc_defined and report.cc > GOOD_FIT["cc_min"]
            and report.rmse < GOOD_FIT["rmse_max"]
            and report.aem < GOOD_FIT["aem_max"]
            and report.si_defined and report.si < GOOD_FIT["si_max"])


@dataclass
class RunReport:
    config_text: str
    attempts: list
    chosen_attempt: int
    model: dict | None = None

    @property
    def final(self) -> dict:
        return self.attempts[self.chosen_attempt]

    def to_dict(self):
        return {"attempts": self.attempts, "chosen_attempt": self.chosen_attempt,
                "config": self.config_text, "model": self.model}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _run_attempt(wells, params: MethodParams, config: RunConfig,
                 input_stats, inputs_scored, target_stats, sf_norm_by_well,
                 well_slices):
    """One regularize -> split -> train -> evaluate pass."""
    reg_by_well = {}
    reg_reports = {}
    tables = {}
    for w in wells:
        sl = well_slices[w.well_id]
        predictor = w.series(inputs_scored[sl, 1])   # z-scored amplitude
        sf_norm = w.series(sf_norm_by_well[w.well_id])
        sf_reg, rep = regularize_target(sf_norm, params, predictor,
                                        config.gate_tol_bits)
        reg_by_well[w.well_id] = sf_reg.values
        reg_reports[w.well_id] = rep
        scored = {"impedance": inputs_scored[sl, 0],
                  "amplitude": inputs_scored[sl, 1],
                  "inst_frequency": inputs_scored[sl, 2]}
        tables[w.well_id] = _well_tables(w, scored, sf_norm, sf_reg,
                                         config.mi_bins)

    targets = np.concatenate([reg_by_well[w.well_id] for w in wells])
    provenance = []
    for w in wells:
        provenance.extend((w.well_id, float(t)) for t in w.times_ms)
    patterns = PatternSet(inputs=inputs_scored, targets=targets,
                          provenance=provenance)
    split = resample.split_patterns(patterns, seed=config.split_seed)

    model = mlp.init_model(3, config.hidden, seed=config.train_seed)
    scg = mlp.ScgParams(sigma=config.sigma, lambda1=config.lambda1,
                        max_iters=config.max_iters,
                        target_loss=config.target_loss)
    trained, history = mlp.scg_train(model, split.train.inputs,
                                     split.train.targets, scg)

    def eval_subset(subset: PatternSet) -> metrics.MetricsReport:
        pred = target_stats.invert(mlp.forward_batch(trained, subset.inputs))
        actual = target_stats.invert(subset.targets)
        return metrics.evaluate(pred, actual)

    test_report = eval_subset(split.test)
    validation = {}
    for w in wells:
        idx = [i for i, (wid, _) in enumerate(split.validation.provenance)
               if wid == w.well_id]
        validation[w.well_id] = eval_subset(split.validation.take(idx))
    pooled = eval_subset(split.validation)

    attempt = {
        "method_params": params.describe(),
        "regularization": reg_reports,
        "tables": tables,
        "train": {"iterations": history.iterations,
                  "final_loss": history.final_loss,
                  "stop_reason": history.stop_reason},
        "test": test_report.to_dict(),
        "validation": {wid: r.to_dict() for wid, r in validation.items()},
        "validation_pooled": pooled.to_dict(),
        "good_fit": {wid: _good_fit(r) for wid, r in validation.items()},
    }
    return attempt, trained, split


def run_workflow(config: RunConfig):
    """Execute the full three-stage workflow.

    Returns (RunReport, ModelBundle, volumes dict or None).  When the
    pooled validation CC falls below the configured threshold the
    regularization is tightened per the fixed schedule and the model
    building stage repeats, at most max_attempts times, every attempt
    logged."""
    if not config.wells:
        raise ConfigError("no wells configured")
    volumes = {"imp": read_svol(config.vol_imp),
               "amp": read_svol(config.vol_amp),
               "freq": read_svol(config.vol_freq)}
    for name in ("amp", "freq"):
        if not volumes["imp"].same_geometry(volumes[name]):
            raise DataError(f"{name} volume geometry differs from imp")

    wells = [prepare_well(wc, volumes, config.dt_ms) for wc in config.wells]

    raw_inputs = np.vstack([np.column_stack([w.imp, w.amp, w.freq])
                            for w in wells])
    inputs_scored, input_stats = resample.zscore(raw_inputs)
    raw_targets = np.concatenate([w.sf for w in wells])
    targets_norm, target_stats = resample.minmax_to_band(raw_targets)

    well_slices = {}
    sf_norm_by_well = {}
    pos = 0
    for w in wells:
        well_slices[w.well_id] = slice(pos, pos + len(w.sf))
        sf_norm_by_well[w.well_id] = targets_norm[pos:pos + len(w.sf)]
        pos += len(w.sf)

    params = MethodParams.from_config(config)
    if params.method == "ft" and params.zeta_max_hz is None:
        # resolve the predictor-derived default once so the tightening
        # schedule and the report see one concrete number; the widest well
        # wins so no well starts over-truncated
        params.zeta_max_hz = max(
            ftreg.default_zeta_max(w.series(inputs_scored[well_slices[w.well_id], 1]))
            for w in wells
        )
    attempts = []
    trained = split = None
    for attempt_no in range(config.max_attempts):
        attempt, trained, split = _run_attempt(
            wells, params, config, input_stats, inputs_scored, target_stats,
            sf_norm_by_well, well_slices)
        attempt["attempt"] = attempt_no
        attempts.append(attempt)
        pooled_cc = attempt["validation_pooled"]["cc"]
        if not math.isnan(pooled_cc) and pooled_cc >= config.validation_cc_threshold:
            break
        tightened = params.tightened()
        if tightened is None:
            break
        params = tightened

    # validation patterns must be disjoint from training/testing; re-check
    # at report time rather than trusting the splitter
    tags = lambda ps: {(wid, t) for wid, t in ps.provenance}
    if tags(split.validation) & (tags(split.train) | tags(split.test)):
        raise DataError("validation provenance overlaps train/test")

    bundle = mlp.ModelBundle(model=trained, input_stats=input_stats,
                             target_stats=target_stats, seed=config.train_seed)
    report = RunReport(config_text=render_config(config), attempts=attempts,
                       chosen_attempt=len(attempts) - 1,
                       model=bundle.to_dict())

    out_volumes = None
    if config.predict:
        predicted = volpost.predict_volume(
            bundle, [volumes["imp"], volumes["amp"], volumes["freq"]])
        filtered = volpost.median_filter_3d(predicted, config.filter_window)
        out_volumes = {"sf_pred": predicted, "sf_pred_med": filtered}

    if config.outdir:
        write_run_outputs(config, report, bundle, out_volumes)
    return report, bundle, out_volumes


def write_run_outputs(config: RunConfig, report: RunReport,
                      bundle: mlp.ModelBundle, out_volumes) -> None:
    os.makedirs(config.outdir, exist_ok=True)
    join = lambda name: os.path.join(config.outdir, name)
    with open(join("report.json"), "w") as fh:
        fh.write(report.to_json())
    with open(join("resolved.cfg"), "w") as fh:
        fh.write(report.config_text)
    with open(join("tables.txt"), "w") as fh:
        fh.write(report_tables(report, fmt="text"))
    with open(join("tables.csv"), "w") as fh:
        fh.write(report_tables(report, fmt="csv"))
    mlp.save_model(join("model.json"), bundle)
    for name, vol in (out_volumes or {}).items():
        write_svol(join(f"{name}.svol"), vol)


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.4f}"
    return str(x)


def report_tables(report: RunReport, fmt: str = "text") -> str:
    """Render the entropy, NMI and per-well validation tables of the chosen
    attempt, with the good-fit verdict per well."""
    final = report.final
    out = io.StringIO()
    sep = "," if fmt == "csv" else "  "

    def emit(*cells):
        print(sep.join(str(c) for c in cells), file=out)

    for well_id in sorted(final["tables"]):
        tables = final["tables"][well_id]
        emit(f"# entropy_bits well={well_id}")
        emit("variable", "entropy_bits")
        for name in sorted(tables["entropy_bits"]):
            emit(name, _fmt(tables["entropy_bits"][name]))
        emit(f"# nmi well={well_id}")
        emit("predictor", "vs_original_sf", "vs_regularized_sf")
        for name in sorted(tables["nmi"]):
            row = tables["nmi"][name]
            emit(name, _fmt(row["original"]), _fmt(row["regularized"]))
        emit()
    emit("# validation per well "
         f"(good fit: CC>{GOOD_FIT['cc_min']}, RMSE<{GOOD_FIT['rmse_max']}, "
         f"AEM<{GOOD_FIT['aem_max']}, SI<{GOOD_FIT['si_max']})")
    emit("well", "cc", "rmse", "aem", "si", "verdict")
    for well_id in sorted(final["validation"]):
        row = final["validation"][well_id]
        verdict = "pass" if final["good_fit"][well_id] else "FAIL"
        emit(well_id, _fmt(row["cc"]), _fmt(row["rmse"]), _fmt(row["aem"]),
             _fmt(row["si"]), verdict)
    pooled = final["validation_pooled"]
    emit("pooled", _fmt(pooled["cc"]), _fmt(pooled["rmse"]),
         _fmt(pooled["aem"]), _fmt(pooled["si"]), "")
    emit()
    emit("# test (pooled)")
    test = final["test"]
    emit("cc", "rmse", "aem", "si")
    emit(_fmt(test["cc"]), _fmt(test["rmse"]), _fmt(test["aem"]),
         _fmt(test["si"]))
    return out.getvalue()


def write_patterns_csv(path, wells: list) -> None:
    """Pattern file: well,time_ms,imp,amp,freq,sf — raw (unnormalized)."""
    with open(path, "w") as fh:
        fh.write("well,time_ms,imp,amp,freq,sf\n")
        for w in wells:
            for k, t in enumerate(w.times_ms):
                fh.write(f"{w.well_id},{t:.17g},{w.imp[k]:.17g},{w.amp[k]:.17g},"
                         f"{w.freq[k]:.17g},{w.sf[k]:.17g}\n")


def read_patterns_csv(path) -> list:
    """Inverse of write_patterns_csv; returns a list of WellData."""
    by_well = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "well,time_ms,imp,amp,freq,sf":
            raise DataError(f"unexpected pattern CSV header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            well_id, t, imp, amp, freq, sf = line.split(",")
            by_well.setdefault(well_id, []).append(
                (float(t), float(imp), float(amp), float(freq), float(sf)))
    wells = []
    for well_id, rows in by_well.items():
        arr = np.array(rows)
        times = arr[:, 0]
        steps = np.diff(times)
        if len(steps) == 0:
            raise DataError(f"well {well_id}: need at least 2 rows")
        dt = float(np.median(steps))
        if not np.allclose(steps, dt, rtol=0, atol=1e-6 * dt):
            raise DataError(f"well {well_id}: time column is not uniform")
        wells.append(WellData(
            well_id=well_id, inline=0, xline=0, t0_ms=float(times[0]), dt_ms=dt,
            sf=arr[:, 4], imp=arr[:, 1], amp=arr[:, 2], freq=arr[:, 3]))
    return wells
