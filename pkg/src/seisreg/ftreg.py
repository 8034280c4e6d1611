"""Target regularization by hard truncation of the Fourier spectrum.

High-frequency bins of the target's spectrum are zeroed above a bandwidth
parameter and the signal is rebuilt by the inverse transform.  Unlike a
realizable band-pass filter this incurs no phase shift and no transition
band.  Non-power-of-two lengths are transformed as-is — zero-padding would
move the bin frequencies.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .metrics import psd, spectral_entropy
from .resample import TimeSeries


class BandTooNarrow(DataError):
    pass


@dataclass
class Spectrum:
    coeffs: np.ndarray   # complex, full (two-sided) DFT
    fs_hz: float

    def __len__(self):
        return len(self.coeffs)


@dataclass
class FtRegParams:
    zeta_max_hz: float
    entropy_tolerance: float = 0.05  # bits

    def __post_init__(self):
        if self.zeta_max_hz <= 0:
            raise ConfigError("zeta_max_hz must be positive")


@dataclass
class EntropyGateResult:
    passed: bool
    entropy_original: float
    entropy_regularized: float
    entropy_predictor: float | None
    tol_bits: float


@dataclass
class RegularizationReport:
    method: str
    entropy_original: float
    entropy_regularized: float
    gate: EntropyGateResult | None = None
    detail: dict | None = None

    def to_dict(self):
        d = {
            "method": self.method,
            "entropy_original": self.entropy_original,
            "entropy_regularized": self.entropy_regularized,
        }
        if self.gate is not None:
            d["gate_passed"] = self.gate.passed
            d["entropy_predictor"] = self.gate.entropy_predictor
            d["gate_tol_bits"] = self.gate.tol_bits
        if self.detail:
            d.update(self.detail)
        return d


def dft(series: TimeSeries) -> Spectrum:
    """Full DFT X(k) = sum_j x(j) * exp(-2*pi*i*j*k/N)."""
    if len(series) < 2:
        raise DataError("need at least 2 samples")
    return Spectrum(coeffs=np.fft.fft(series.values), fs_hz=series.fs_hz)


def idft(spectrum: Spectrum, t0_ms: float = 0.0) -> TimeSeries:
    """Inverse DFT; the imaginary residue must be numerically negligible."""
    values = np.fft.ifft(spectrum.coeffs)
    imag_rms = np.sqrt(np.mean(values.imag ** 2))
    if imag_rms > 1e-9:
        raise DataError(f"inverse transform is not real (imag RMS {imag_rms:.3e})")
    return TimeSeries(t0_ms=t0_ms, dt_ms=1000.0 / spectrum.fs_hz,
                      values=values.real)


def regularize_ft(target: TimeSeries, params: FtRegParams,
                  predictor: TimeSeries | None = None):
    """Zero every spectrum bin above the bandwidth parameter and rebuild.

    The band is closed: a bin exactly at the cutoff is retained.  Truncation
    is applied on |frequency| so conjugate pairs are zeroed together and the
    output stays real.  Returns (regularized TimeSeries, report).
    """
    n = len(target)
    if n < 8:
        raise DataError(f"need at least 8 samples, got {n}")
    if params.zeta_max_hz >= target.fs_hz / 2:
        raise ConfigError(
            f"zeta_max {params.zeta_max_hz} Hz must be below Nyquist "
            f"{target.fs_hz / 2} Hz"
        )
    spectrum = dft(target)
    freqs = np.fft.fftfreq(n, d=1.0 / target.fs_hz)
    bin_hz = target.fs_hz / n
    keep = np.abs(freqs) <= params.zeta_max_hz + 1e-9 * bin_hz
    if keep.sum() < 3:
        raise BandTooNarrow(
            f"only {int(keep.sum())} bin(s) inside {params.zeta_max_hz} Hz; need >= 3"
        )
    truncated = np.where(keep, spectrum.coeffs, 0.0)
    out = idft(Spectrum(coeffs=truncated, fs_hz=spectrum.fs_hz), t0_ms=target.t0_ms)
    h_orig = spectral_entropy(psd(target))
    h_reg = spectral_entropy(psd(out))
    gate = None
    if predictor is not None:
        gate = entropy_gate(target, out, predictor, params.entropy_tolerance)
    report = RegularizationReport(
        method="ft",
        entropy_original=h_orig,
        entropy_regularized=h_reg,
        gate=gate,
        detail={"zeta_max_hz": params.zeta_max_hz, "retained_bins": int(keep.sum())},
    )
    return out, report


def entropy_gate(original: TimeSeries, regularized: TimeSeries,
                 predictor: TimeSeries, tol_bits: float) -> EntropyGateResult:
    """Pass iff the regularized entropy is comparable to the predictor's
    (within tol_bits above it) and strictly below the original's."""
    h_orig = spectral_entropy(psd(original))
    h_reg = spectral_entropy(psd(regularized))
    h_pred = spectral_entropy(psd(predictor))
    passed = (h_reg <= h_pred + tol_bits) and (h_reg < h_orig)
    return EntropyGateResult(passed=passed, entropy_original=h_orig,
                             entropy_regularized=h_reg, entropy_predictor=h_pred,
                             tol_bits=tol_bits)


def default_zeta_max(predictor: TimeSeries, coverage: float = 0.99,
                     widen: float = 1.25) -> float:
    """Bandwidth heuristic: the frequency below which `coverage` of the
    predictor's cumulative PSD lies, widened by 25% (a nonlinear model can
    map low-frequency inputs slightly beyond their own band)."""
    p = psd(predictor)
    total = p.power.sum()
    if total <= 0:
        raise DataError("predictor has no spectral power")
    cdf = np.cumsum(p.power) / total
    idx = int(np.searchsorted(cdf, coverage))
    idx = min(idx, len(p.freqs_hz) - 1)
    zeta = p.freqs_hz[idx] * widen
    nyq = predictor.fs_hz / 2
    return float(min(zeta, 0.999 * nyq))
