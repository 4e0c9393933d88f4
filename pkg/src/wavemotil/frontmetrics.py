"""Quantitative wave diagnostics extracted from simulated fields and profiles.

Front position is the rightmost linear-interpolated crossing of a density
level (conventionally half the carrying capacity, a/(2b)).  Tracking that
position over time and fitting a line, after discarding an initial transient,
yields the observed wave speed.  Tail decay rates come from a log-linear fit
over the window where the density is small but still well above rounding
noise.  Profiles are classified as monotone or oscillatory at the trailing
edge by counting sign changes about the carrying capacity behind the front.
For planar fields, ring radii are measured on an azimuthally averaged radial
profile sampled along many rays with bilinear interpolation, which keeps the
radii grid-independent.

All functions here are pure and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InsufficientSamples, NoCrossing, NoRing, WindowTooSmall

__all__ = [
    "FrontSeries",
    "ProfileClass",
    "front_position",
    "front_series",
    "wave_speed",
    "decay_fit",
    "classify_profile",
    "ring_metrics",
]

#: Front samples earlier than this fraction of the time span are treated as
#: transient and excluded from speed fits.
DEFAULT_TRANSIENT_FRACTION = 0.2

#: Density window used by :func:`decay_fit`: small enough to sit in the
#: exponential tail, large enough to stay clear of rounding noise.
DECAY_WINDOW = (1e-12, 1e-2)

_MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class FrontSeries:
    """Front trajectory with its fitted speed.

    Attributes:
        times: sample times (transient included, non-finite positions dropped).
        positions: front positions x_f(t) at the tracking level.
        c_est: least-squares slope of positions vs times over the fit window.
        stderr: standard error of the fitted slope.
        r_squared: coefficient of determination of the fit.
        fit_window: (t_lo, t_hi) actually used by the fit; t_lo excludes the
            leading transient fraction of the time span.
    """

    times: np.ndarray
    positions: np.ndarray
    c_est: float
    stderr: float
    r_squared: float
    fit_window: tuple[float, float]


@dataclass(frozen=True)
class ProfileClass:
    """Monotonicity classification of a trailing edge.

    Attributes:
        label: one of ``"Monotone"``, ``"OscillatoryTrailingEdge"``,
            ``"Indeterminate"``.
        crossing_count: sign changes of (u - equilibrium) left of the front.
        overshoot: max(u) - equilibrium over that region, clipped at zero.
    """

    label: str
    crossing_count: int
    overshoot: float


def front_position(x: np.ndarray, u: np.ndarray, level: float) -> float:
    """Rightmost crossing of ``u`` through ``level``, linearly interpolated.

    Intended for fronts that decrease to the right; any sign change of
    u - level counts as a crossing and the rightmost one is returned.
    Exact node hits are returned at the node abscissa.  The interpolation
    uses only local differences, so shifting the array by s nodes shifts
    the result by s grid spacings.

    Raises:
        NoCrossing: if ``u`` never reaches the level.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.ndim != 1 or u.shape != x.shape:
        raise ValueError("x and u must be matching 1-D arrays")
    d = u - level
    nz = np.flatnonzero(d)
    if nz.size == 0:
        raise NoCrossing(f"density never crosses level {level!r}")
    signs = np.sign(d[nz])
    flips = np.flatnonzero(signs[:-1] != signs[1:])
    if flips.size == 0:
        raise NoCrossing(f"density never crosses level {level!r}")
    i, j = nz[flips[-1]], nz[flips[-1] + 1]
    if j == i + 1:
        t = d[i] / (d[i] - d[j])
        return float(x[i] + t * (x[j] - x[i]))
    # Sign change across a run of exact hits: report the rightmost hit node.
    return float(x[j - 1])


def _fit_line(
    times: np.ndarray,
    positions: np.ndarray,
    transient_fraction: float,
) -> tuple[float, float, float, tuple[float, float]]:
    """Shared OLS core: slope, stderr, R^2, and the realized fit window."""
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    if times.ndim != 1 or positions.shape != times.shape:
        raise ValueError("times and positions must be matching 1-D arrays")
    keep = np.isfinite(times) & np.isfinite(positions)
    times, positions = times[keep], positions[keep]
    if times.size == 0:
        raise InsufficientSamples("no finite front samples")
    t_cut = times.min() + transient_fraction * (times.max() - times.min())
    window = times >= t_cut - 1e-12 * max(1.0, abs(t_cut))
    t_fit, p_fit = times[window], positions[window]
    if t_fit.size < _MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"{t_fit.size} samples in the fit window, need {_MIN_FIT_SAMPLES}"
        )
    t_mean = t_fit.mean()
    p_mean = p_fit.mean()
    dt = t_fit - t_mean
    dp = p_fit - p_mean
    sxx = float(dt @ dt)
    if sxx == 0.0:
        raise InsufficientSamples("all fit-window samples share one time")
    slope = float(dt @ dp) / sxx
    resid = dp - slope * dt
    ssr = float(resid @ resid)
    dof = t_fit.size - 2
    stderr = float(np.sqrt(max(ssr, 0.0) / (dof * sxx))) if dof > 0 else float("nan")
    sst = float(dp @ dp)
    r_squared = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    return slope, stderr, r_squared, (float(t_fit.min()), float(t_fit.max()))


def wave_speed(
    times: np.ndarray,
    positions: np.ndarray,
    *,
    transient_fraction: float = DEFAULT_TRANSIENT_FRACTION,
) -> tuple[float, float]:
    """Least-squares front speed and its standard error.

    Non-finite positions are dropped; the fit window excludes the leading
    ``transient_fraction`` of the time span and must retain at least 10
    samples.

    Raises:
        InsufficientSamples: fewer than 10 usable samples in the window.
    """
    slope, stderr, _, _ = _fit_line(times, positions, transient_fraction)
    return slope, stderr


def front_series(
    times: np.ndarray,
    positions: np.ndarray,
    *,
    transient_fraction: float = DEFAULT_TRANSIENT_FRACTION,
) -> FrontSeries:
    """Bundle a front trajectory with its fitted speed into a FrontSeries."""
    slope, stderr, r_squared, window = _fit_line(times, positions, transient_fraction)
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    keep = np.isfinite(times) & np.isfinite(positions)
    return FrontSeries(
        times=times[keep].copy(),
        positions=positions[keep].copy(),
        c_est=slope,
        stderr=stderr,
        r_squared=r_squared,
        fit_window=window,
    )


def decay_fit(z: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    """Tail decay rate and amplitude from a log-linear fit.

    Fits ln u = ln A - lambda z over the rightmost contiguous stretch where
    u lies strictly inside ``DECAY_WINDOW``; restricting to the rightmost
    stretch keeps small plateau values far behind the front from
    contaminating the tail fit.  Returns (lambda, A).

    Raises:
        WindowTooSmall: fewer than two in-window samples in that stretch.
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.ndim != 1 or u.shape != z.shape:
        raise ValueError("z and u must be matching 1-D arrays")
    lo, hi = DECAY_WINDOW
    mask = (u > lo) & (u < hi)
    if not mask.any():
        raise WindowTooSmall(
            f"no samples with density in ({lo!r}, {hi!r})"
        )
    # Rightmost maximal run of consecutive in-window samples.
    idx = np.flatnonzero(mask)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    start = idx[breaks[-1] + 1] if breaks.size else idx[0]
    run = idx[idx >= start]
    if run.size < 2:
        raise WindowTooSmall("tail window shorter than two samples")
    slope, intercept = np.polyfit(z[run], np.log(u[run]), 1)
    return float(-slope), float(np.exp(intercept))


def classify_profile(u: np.ndarray, equilibrium: float) -> ProfileClass:
    """Classify the trailing edge of a rightward-moving front profile.

    The front is located at the rightmost crossing of half the equilibrium.
    Over the region left of the front, the number of sign changes of
    u - equilibrium and the maximal overshoot above the equilibrium decide
    the label: ``Monotone`` needs at most one crossing and overshoot at most
    0.1% of the equilibrium; ``OscillatoryTrailingEdge`` needs at least
    three crossings with overshoot above 1% of the equilibrium; everything
    else is ``Indeterminate``.  Deviations within 1e-8 of the equilibrium
    (relative) sit inside a dead band and cannot produce crossings, so
    solver-precision wiggle around a settled state does not count.

    Raises:
        NoCrossing: if the profile never crosses half the equilibrium.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError("u must be a 1-D array")
    if not equilibrium > 0:
        raise ValueError("equilibrium must be positive")
    level = 0.5 * equilibrium
    front_idx = front_position(np.arange(u.size, dtype=float), u, level)
    region = u[: int(np.floor(front_idx)) + 1]
    dev = region - equilibrium
    signs = np.sign(np.where(np.abs(dev) <= 1e-8 * equilibrium, 0.0, dev))
    signs = signs[signs != 0.0]
    crossings = int(np.count_nonzero(np.diff(signs) != 0.0)) if signs.size else 0
    overshoot = float(max(0.0, region.max() - equilibrium)) if region.size else 0.0
    if crossings <= 1 and overshoot <= 1e-3 * equilibrium:
        label = "Monotone"
    elif crossings >= 3 and overshoot > 1e-2 * equilibrium:
        label = "OscillatoryTrailingEdge"
    else:
        label = "Indeterminate"
    return ProfileClass(label=label, crossing_count=crossings, overshoot=overshoot)


def ring_metrics(
    x: np.ndarray,
    y: np.ndarray,
    u: np.ndarray,
    *,
    center: tuple[float, float] = (0.0, 0.0),
    level: float,
    n_rays: int = 64,
    r_max: float | None = None,
) -> tuple[float, float, float]:
    """Ring radii of a planar density field.

    Samples ``u`` on ``n_rays`` equally spaced rays from ``center`` with
    bilinear interpolation, averages azimuthally to a radial profile, and
    returns ``(r_inner, r_peak, r_outer)``: the innermost and outermost
    linear-interpolated crossings of ``level`` and the radius of the maximal
    averaged density.  A filled disk yields one descending crossing, so the
    inner and outer radii coincide there.  ``r_max`` defaults to the largest
    radius whose full circle stays inside the grid.

    Raises:
        NoRing: if the averaged profile never crosses the level.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != (y.size, x.size):
        raise ValueError("u must have shape (len(y), len(x))")
    cx, cy = center
    if r_max is None:
        r_max = min(cx - x[0], x[-1] - cx, cy - y[0], y[-1] - cy)
    if not r_max > 0:
        raise ValueError("center must lie strictly inside the grid")
    dr = min(np.min(np.diff(x)), np.min(np.diff(y)))
    radii = np.arange(0.0, r_max + dr / 2, dr)
    angles = np.linspace(0.0, 2.0 * np.pi, n_rays, endpoint=False)
    interp = RegularGridInterpolator(
        (y, x), u, method="linear", bounds_error=False, fill_value=None
    )
    px = cx + np.outer(radii, np.cos(angles))
    py = cy + np.outer(radii, np.sin(angles))
    samples = interp(np.stack([py.ravel(), px.ravel()], axis=-1))
    profile = samples.reshape(radii.size, n_rays).mean(axis=1)
    d = profile - level
    exact = np.flatnonzero(d == 0.0)
    flips = np.flatnonzero(d[:-1] * d[1:] < 0.0)
    crossings = [float(radii[i]) for i in exact]
    for i in flips:
        t = d[i] / (d[i] - d[i + 1])
        crossings.append(float(radii[i] + t * dr))
    if not crossings:
        raise NoRing(f"azimuthal average never crosses level {level!r}")
    r_peak = float(radii[int(np.argmax(profile))])
    return min(crossings), r_peak, max(crossings)
