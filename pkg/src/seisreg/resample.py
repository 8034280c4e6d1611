"""Depth-to-time conversion, sinc reconstruction, normalization and
dataset splitting.

The well logs live on a fine depth grid; the seismic attributes live on a
coarse (2 ms) time grid.  Everything here serves to put both onto one
uniform fine time grid and to prepare normalized, well-stratified training
patterns from the result.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


class DepthOutOfRange(DataError):
    pass


class TargetOutsideSpan(DataError):
    pass


class DownsampleRequested(ConfigError):
    pass


class ZeroVariance(DataError):
    pass


class DegenerateRange(DataError):
    pass


class TooFewPatterns(DataError):
    pass


@dataclass
class TimeSeries:
    """Uniformly sampled series: value k sits at t0_ms + k*dt_ms."""

    t0_ms: float
    dt_ms: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.dt_ms <= 0:
            raise DataError(f"dt_ms must be positive, got {self.dt_ms}")
        if not np.isfinite(self.values).all():
            raise DataError("TimeSeries values must be finite")

    def __len__(self):
        return len(self.values)

    @property
    def fs_hz(self) -> float:
        return 1000.0 / self.dt_ms

    @property
    def times_ms(self) -> np.ndarray:
        return self.t0_ms + self.dt_ms * np.arange(len(self.values))

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(self.t0_ms, self.dt_ms, np.asarray(values, dtype=np.float64))


@dataclass
class VelocityProfile:
    """Piecewise-linear depth <-> time tie from checkshot-style knots."""

    knots: list  # of (depth_m, time_ms)

    def __post_init__(self):
        depths = np.array([k[0] for k in self.knots], dtype=np.float64)
        times = np.array([k[1] for k in self.knots], dtype=np.float64)
        if len(depths) < 2:
            raise DataError("velocity profile needs at least 2 knots")
        if not ((np.diff(depths) > 0).all() and (np.diff(times) > 0).all()):
            raise DataError("velocity profile knots must be strictly increasing")
        self._depths = depths
        self._times = times

    @property
    def depth_range(self):
        return float(self._depths[0]), float(self._depths[-1])

    def time_at(self, depth_m) -> np.ndarray:
        depth_m = np.asarray(depth_m, dtype=np.float64)
        lo, hi = self.depth_range
        if depth_m.min() < lo or depth_m.max() > hi:
            raise DepthOutOfRange(
                f"depths [{depth_m.min()}, {depth_m.max()}] outside profile [{lo}, {hi}]"
            )
        return np.interp(depth_m, self._depths, self._times)


def load_velocity_csv(path) -> VelocityProfile:
    """Read a `depth_m,time_ms` CSV into a VelocityProfile."""
    knots = []
    with open(path) as fh:
        header = fh.readline().strip().replace(" ", "")
        if header.lower() != "depth_m,time_ms":
            raise DataError(f"velocity CSV needs a depth_m,time_ms header, got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d, t = line.split(",")
            knots.append((float(d), float(t)))
    return VelocityProfile(knots)


def depth_to_time(depths_m, values, vp: VelocityProfile, dt_out_ms: float) -> TimeSeries:
    """Map a depth-indexed log onto a uniform time grid.

    Each depth is mapped to time through the profile's piecewise-linear
    knots; the resulting (time, value) pairs are then linearly interpolated
    onto the uniform dt_out_ms grid spanning the mapped range.
    """
    depths_m = np.asarray(depths_m, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if dt_out_ms <= 0:
        raise ConfigError("dt_out_ms must be positive")
    times = vp.time_at(depths_m)
    if times[0] > times[-1]:  # logs recorded upward
        times, values = times[::-1], values[::-1]
    n_out = int(np.floor((times[-1] - times[0]) / dt_out_ms)) + 1
    grid = times[0] + dt_out_ms * np.arange(n_out)
    return TimeSeries(t0_ms=float(times[0]), dt_ms=dt_out_ms,
                      values=np.interp(grid, times, values))


def sinc_resample(trace: TimeSeries, target_t0_ms: float, target_dt_ms: float,
                  n_out: int) -> TimeSeries:
    """Whittaker-Shannon reconstruction of a band-limited trace on a finer grid.

    Full-support sum over every source sample, no windowing: exact at the
    source sample instants, O(N*M) which is fine for logs of a few thousand
    samples.  Upsampling only.
    """
    if target_dt_ms > trace.dt_ms:
        raise DownsampleRequested(
            f"target dt {target_dt_ms} ms coarser than source {trace.dt_ms} ms"
        )
    t_src = trace.times_ms
    t_out = target_t0_ms + target_dt_ms * np.arange(n_out)
    eps = 1e-9 * trace.dt_ms
    if t_out[0] < t_src[0] - eps or t_out[-1] > t_src[-1] + eps:
        raise TargetOutsideSpan(
            f"target [{t_out[0]}, {t_out[-1]}] ms outside source "
            f"[{t_src[0]}, {t_src[-1]}] ms"
        )
    kernel = np.sinc((t_out[:, None] - t_src[None, :]) / trace.dt_ms)
    return TimeSeries(t0_ms=float(t_out[0]), dt_ms=target_dt_ms,
                      values=kernel @ trace.values)


@dataclass
class ZscoreStats:
    mean: np.ndarray
    std: np.ndarray   # population (1/N) standard deviation

    def apply(self, table: np.ndarray) -> np.ndarray:
        return (np.asarray(table, dtype=np.float64) - self.mean) / self.std

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(mean=np.asarray(d["mean"], dtype=np.float64),
                   std=np.asarray(d["std"], dtype=np.float64))


def zscore(table, stats: ZscoreStats | None = None):
    """Z-score each column with population variance.

    Returns (scored table, stats).  When stats are supplied (prediction
    time) they are applied unchanged so train and predict statistics match
    bit for bit.
    """
    table = np.atleast_2d(np.asarray(table, dtype=np.float64))
    if stats is None:
        mean = table.mean(axis=0)
        std = table.std(axis=0)  # ddof=0
        bad = np.nonzero(std == 0)[0]
        if bad.size:
            raise ZeroVariance(f"constant column(s) at index {bad.tolist()}")
        stats = ZscoreStats(mean=mean, std=std)
    return stats.apply(table), stats


@dataclass
class MinMaxStats:
    data_min: float
    data_max: float
    lo: float = 0.1
    hi: float = 0.9

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        scale = (self.hi - self.lo) / (self.data_max - self.data_min)
        return self.lo + (x - self.data_min) * scale

    def invert(self, y):
        y = np.asarray(y, dtype=np.float64)
        scale = (self.data_max - self.data_min) / (self.hi - self.lo)
        return self.data_min + (y - self.lo) * scale

    def to_dict(self):
        return {"data_min": self.data_min, "data_max": self.data_max,
                "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def minmax_to_band(series, lo: float = 0.1, hi: float = 0.9):
    """Affine map sending observed min -> lo and max -> hi.

    Keeps the target off the saturation tails of the output sigmoid.
    Returns (mapped series, stats); stats.invert de-normalizes predictions.
    """
    series = np.asarray(series, dtype=np.float64)
    mn, mx = float(series.min()), float(series.max())
    if mx <= mn:
        raise DegenerateRange(f"series range is degenerate: min == max == {mn}")
    stats = MinMaxStats(data_min=mn, data_max=mx, lo=lo, hi=hi)
    return stats.apply(series), stats


@dataclass
class PatternSet:
    """Per-sample predictor vectors, targets, and (well id, time) provenance."""

    inputs: np.ndarray      # [n, n_attrs]
    targets: np.ndarray     # [n]
    provenance: list        # of (well_id, time_ms)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if not (self.inputs.shape[0] == len(self.targets) == len(self.provenance)):
            raise DataError("inputs, targets and provenance must be the same length")

    def __len__(self):
        return len(self.targets)

    @property
    def wells(self):
        seen = dict.fromkeys(w for w, _ in self.provenance)
        return list(seen)

    def take(self, idx) -> "PatternSet":
        idx = np.asarray(idx, dtype=int)
        return PatternSet(self.inputs[idx], self.targets[idx],
                          [self.provenance[i] for i in idx])


@dataclass
class DatasetSplit:
    train: PatternSet
    test: PatternSet
    validation: PatternSet
    seed: int


def split_patterns(patterns: PatternSet, seed: int) -> DatasetSplit:
    """70/30 per-well split with the 30% pooled and halved into test/validation.

    Per well, indices are scrambled by a seeded shuffle and the first 70%
    go to training in that scrambled order.  The remaining 30% from all
    wells are pooled, scrambled once more, and halved.
    """
    rng = np.random.default_rng(seed)
    by_well = {}
    for i, (well, _) in enumerate(patterns.provenance):
        by_well.setdefault(well, []).append(i)
    train_idx, leftover = [], []
    for well in patterns.wells:
        idx = np.array(by_well[well])
        if len(idx) < 10:
            raise TooFewPatterns(f"well {well!r} has only {len(idx)} patterns")
        perm = idx[rng.permutation(len(idx))]
        n_train = int(round(0.7 * len(idx)))
        train_idx.extend(perm[:n_train].tolist())
        leftover.extend(perm[n_train:].tolist())
    leftover = np.array(leftover)
    leftover = leftover[rng.permutation(len(leftover))]
    half = len(leftover) // 2
    return DatasetSplit(
        train=patterns.take(np.array(train_idx)),
        test=patterns.take(leftover[:half]),
        validation=patterns.take(leftover[half:]),
        seed=seed,
    )
