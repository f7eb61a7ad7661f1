"""Observables extracted from population traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from sefdtd.constants import CONSTANTS, DEFAULT_EMITTER
from sefdtd.emitter import PopulationTrace


class AmbiguousOscillation(ValueError):
    """The trace has no clean, consistently measurable oscillation."""


@dataclass(frozen=True)
class DecayFit:
    tau: float
    r_squared: float
    window: tuple[float, float]
    method: str
    n_points: int

    @property
    def non_exponential(self) -> bool:
        return self.r_squared < 0.95


@dataclass(frozen=True)
class OscillationFit:
    omega: float
    method: str
    uncertainty: float
    omega_spectral: float
    n_minima: int

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


def _arrays(trace):
    if isinstance(trace, PopulationTrace):
        return trace.t, trace.population
    t, p = trace
    return np.asarray(t, dtype=float), np.asarray(p, dtype=float)


def _r_squared(y, pred):
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        return 1.0 if np.allclose(y, pred) else 0.0
    return float(np.clip(1 - np.sum((y - pred) ** 2) / ss_tot, 0.0, 1.0))


def fit_exponential_decay(trace, window: tuple[float, float] | None = None,
                          lambda0: float = DEFAULT_EMITTER.lambda0) -> DecayFit:
    """Fit ``|P|^2 ~ exp(-t/tau)`` by linear regression of the log.

    The default window skips the first two optical periods. If the trace
    oscillates, the regression runs through its local maxima (the envelope);
    otherwise through every sample. ``r_squared`` measures how well the
    fitted exponential describes all samples in the window, so deep
    oscillations under an exponential envelope still count as
    non-exponential.
    """
    t, p = _arrays(trace)
    if window is None:
        window = (2 * lambda0 / CONSTANTS.c, float(t[-1]))
    keep = (t >= window[0]) & (t <= window[1])
    t, p = t[keep], p[keep]
    if t.size < 3:
        raise ValueError("fit window holds fewer than 3 samples")
    if np.any(p <= 0):
        raise ValueError("population must be strictly positive on the fit window")
    logp = np.log(p)
    peaks, _ = find_peaks(p, prominence=0.01 * (p.max() - p.min()))
    if peaks.size >= 2:
        te, ye, method = t[peaks], logp[peaks], "envelope"
    else:
        te, ye, method = t, logp, "raw"
    slope, icpt = np.polyfit(te - te[0], ye, 1)
    tau = -1.0 / slope if slope < 0 else math.inf
    r2 = _r_squared(logp, slope * (t - te[0]) + icpt)
    return DecayFit(tau, r2, (float(t[0]), float(t[-1])), method, int(te.size))


def _refine_extremum(t, y, i):
    if i == 0 or i == y.size - 1:
        return t[i]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return t[i]
    shift = 0.5 * (y0 - y2) / denom
    return t[i] + shift * (t[i + 1] - t[i - 1]) / 2


def _spectral_peak(t, p):
    n = t.size
    dt = (t[-1] - t[0]) / (n - 1)
    x = (p - p.mean()) * np.hanning(n)
    nfft = 1 << max(18, int(math.ceil(math.log2(64 * n))))
    spec = np.abs(np.fft.rfft(x, nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    spec[freqs < 1.0 / (t[-1] - t[0])] = 0.0
    k = int(np.argmax(spec))
    f = _refine_extremum(freqs, spec, k) if 0 < k < spec.size - 1 else freqs[k]
    return 2 * math.pi * f


def extract_oscillation_frequency(trace, prominence: float = 0.2) -> OscillationFit:
    """Angular frequency of population oscillations.

    Primary estimate: mean spacing of successive population minima (minima
    must stand out by ``prominence`` times the trace's range). It is
    cross-checked against the peak of the windowed spectrum of
    ``|P|^2 - mean``; disagreement beyond 5% raises AmbiguousOscillation.
    """
    t, p = _arrays(trace)
    if t.size > 1 and not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-6):
        grid = np.linspace(t[0], t[-1], t.size)
        p, t = np.interp(grid, t, p), grid
    span = p.max() - p.min()
    if span <= 0:
        raise AmbiguousOscillation("constant trace")
    minima, _ = find_peaks(-p, prominence=prominence * span)
    if minima.size < 3:
        raise AmbiguousOscillation(f"found {minima.size} population minima; need at least 3")
    tm = np.array([_refine_extremum(t, p, i) for i in minima])
    spacing = np.diff(tm)
    period = spacing.mean()
    omega = 2 * math.pi / period
    unc = omega * (spacing.std(ddof=1) / math.sqrt(spacing.size) / period if spacing.size > 1 else 0.0)
    omega_spec = _spectral_peak(t, p)
    if abs(omega_spec - omega) > 0.05 * omega:
        raise AmbiguousOscillation(
            f"minima spacing gives {omega:.4e} rad/s, spectrum gives {omega_spec:.4e} rad/s"
        )
    return OscillationFit(omega, "minima-spacing", unc, omega_spec, int(minima.size))


def compare_traces(trace_a, trace_b, t_end: float | None = None) -> dict:
    """Relative error norms of ``trace_a`` against reference ``trace_b``.

    Both populations are compared on ``trace_b``'s sample times inside the
    common window, with ``trace_a`` linearly interpolated.
    ``Linf_rel = max|a - b| / max|b|`` and ``L2_rel = ||a - b|| / ||b||``.
    """
    ta, pa = _arrays(trace_a)
    tb, pb = _arrays(trace_b)
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    if t_end is not None:
        hi = min(hi, t_end)
    if not hi > lo:
        raise ValueError("traces do not overlap in time")
    keep = (tb >= lo) & (tb <= hi)
    ref = pb[keep]
    diff = np.interp(tb[keep], ta, pa) - ref
    return {
        "Linf_rel": float(np.max(np.abs(diff)) / np.max(np.abs(ref))),
        "L2_rel": float(np.linalg.norm(diff) / np.linalg.norm(ref)),
        "window": (float(lo), float(hi)),
    }


def revival_peaks(trace, prominence: float = 0.02) -> tuple[np.ndarray, np.ndarray]:
    """Times and heights of population maxima after t=0 with the given prominence."""
    t, p = _arrays(trace)
    peaks, _ = find_peaks(p, prominence=prominence)
    return t[peaks], p[peaks]


def count_revivals(trace, prominence: float = 0.02) -> int:
    """Number of population revivals: local maxima standing ``prominence`` above their surroundings."""
    return int(revival_peaks(trace, prominence)[0].size)
