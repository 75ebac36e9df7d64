"""Parameter sweeps, transition detection from metric curves, and
finite-size scaling fits including central-charge extraction."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, asdict, replace

import numpy as np

from . import __version__
from .correlators import build_table
from .errors import TruncationError  # noqa: F401  (re-exported for sweeps)
from .model import (
    DegeneratePhasePoint,
    ModelParams,
    Phase,
    classify_phase,
    fermi_sea,
)
from .observables import (
    MetricsRecord,
    compute_spin_correlators,
    concurrence,
    entanglement_entropy,
    l1_coherence_scaled,
    spin_squeezing,
    two_site_rdm,
)

ALL_METRICS = ("mz", "c_l1_scaled", "ssp", "ee_half", "conc_nn", "conc_nnn")
# exact squeezing is O(n^3); sweeps opt into it explicitly
DEFAULT_METRICS = ("mz", "c_l1_scaled", "ee_half", "conc_nn", "conc_nnn")

MIN_DETECT_POINTS = 10
MIN_FIT_POINTS = 5
CENTRAL_CHARGE_MIN_BLOCK = 25


def evaluate_point(params: ModelParams, metrics=DEFAULT_METRICS, *,
                   ssp_radius: int | None = None,
                   tail_tol: float = 1e-6) -> MetricsRecord:
    """All requested metrics at one parameter point.

    ssp_radius None means the exact distance sum 1..n-1; a finite radius
    engages the certified truncation, which raises TruncationError when
    the tail bound cannot be met.
    """
    metrics = set(metrics)
    unknown = metrics - set(ALL_METRICS)
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}")
    n = params.n_sites
    table = build_table(fermi_sea(params))
    try:
        phase = classify_phase(params).phase.value
    except DegeneratePhasePoint:
        phase = None

    values: dict = {"mz": table.mz if "mz" in metrics else None}
    if "c_l1_scaled" in metrics:
        values["c_l1_scaled"] = l1_coherence_scaled(table)
    if "ee_half" in metrics:
        values["ee_half"] = entanglement_entropy(table, n // 2)

    need_conc = bool(metrics & {"conc_nn", "conc_nnn"})
    need_ssp = "ssp" in metrics
    rmax = 0
    if need_conc:
        rmax = 2
    if need_ssp:
        rmax = n - 1 if ssp_radius is None else min(int(ssp_radius), n - 1)
        if rmax < 2 and need_conc:
            rmax = 2
    correls = compute_spin_correlators(table, rmax) if rmax else None
    if need_ssp:
        values["ssp"] = spin_squeezing(correls, n, tail_tol=tail_tol)
    if "conc_nn" in metrics:
        values["conc_nn"] = concurrence(two_site_rdm(correls, 1))
    if "conc_nnn" in metrics:
        values["conc_nnn"] = concurrence(two_site_rdm(correls, 2))

    return MetricsRecord(alpha=params.alpha, h=params.h, n_sites=n,
                         phase=phase, **values)


@dataclass(frozen=True)
class SweepResult:
    """Records of a 1-D sweep, sorted along the axis; per-point failures
    are collected instead of aborting the sweep."""

    axis: str
    values: np.ndarray
    records: tuple
    failures: tuple
    provenance: dict


def sweep(template: ModelParams, axis: str, values, metrics=DEFAULT_METRICS,
          *, ssp_radius: int | None = None, tail_tol: float = 1e-6) -> SweepResult:
    if axis not in ("alpha", "h", "n_sites"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    vals = np.sort(np.asarray(values, dtype=float))
    records = []
    failures = []
    for v in vals:
        point = replace(template, **{axis: int(v) if axis == "n_sites" else float(v)})
        try:
            records.append(evaluate_point(point, metrics, ssp_radius=ssp_radius,
                                          tail_tol=tail_tol))
        except Exception as exc:  # record and continue
            failures.append((float(v), f"{type(exc).__name__}: {exc}"))
    provenance = {
        "template": asdict(template),
        "axis": axis,
        "metrics": sorted(set(metrics)),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    }
    return SweepResult(axis, vals, tuple(records), tuple(failures), provenance)


@dataclass(frozen=True)
class TransitionPoint:
    location: float
    uncertainty: float
    strength: float


def detect_transitions_xy(xs, ys, *, threshold_factor: float = 5.0) -> list[TransitionPoint]:
    """Interior local maxima of |centered finite difference| that exceed
    threshold_factor times the median absolute derivative.  Thresholds are
    relative, so detections are invariant under uniform rescaling of ys."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < MIN_DETECT_POINTS:
        raise ValueError(f"need at least {MIN_DETECT_POINTS} points; grid too coarse")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("sweep axis must be strictly increasing")
    mag = np.abs(np.gradient(ys, xs))
    threshold = threshold_factor * float(np.median(mag))
    out = []
    for i in range(1, len(xs) - 1):
        if mag[i] > threshold and mag[i] > mag[i - 1] and mag[i] >= mag[i + 1]:
            out.append(TransitionPoint(
                location=float(xs[i]),
                uncertainty=float(xs[i + 1] - xs[i - 1]) / 4.0,
                strength=float(mag[i]),
            ))
    return out


def detect_transitions(result: SweepResult, metric: str,
                       *, threshold_factor: float = 5.0) -> list[TransitionPoint]:
    """Transition candidates of one metric across a sweep."""
    xs, ys = [], []
    for rec in result.records:
        y = getattr(rec, metric)
        if y is None:
            raise ValueError(f"metric {metric!r} was not computed in this sweep")
        xs.append(getattr(rec, result.axis))
        ys.append(y)
    return detect_transitions_xy(xs, ys, threshold_factor=threshold_factor)


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit y = a * basis(x) + b; the chosen model minimizes
    the rms residual among linear, square-root and logarithmic bases.
    derived_constant carries 3 * slope for entropy-versus-log fits."""

    model: str
    a: float
    b: float
    rms_residual: float
    derived_constant: float | None = None


_BASES = {
    "linear": lambda x: x,
    "sqrt": np.sqrt,
    "log": np.log,
}


def _fit_one(basis, xs, ys):
    design = np.column_stack([basis(xs), np.ones_like(xs)])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def scaling_fit(xs, ys) -> ScalingFit:
    """Best of the three candidate growth laws for ys(xs)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("sizes must be strictly increasing")
    if np.any(xs <= 0):
        raise ValueError("sizes must be positive")
    best = None
    for name, basis in _BASES.items():
        a, b, rms = _fit_one(basis, xs, ys)
        if best is None or rms < best.rms_residual:
            best = ScalingFit(name, a, b, rms)
    return best


def central_charge(params: ModelParams, block_lengths) -> ScalingFit:
    """Fit of S(l) in nats against ln of the chord length
    (n/pi) sin(pi l / n); derived_constant = 3 * slope is the central
    charge in the natural-log convention (divide by ln 2 for the
    bits-per-ln-l reading).  Refuses gapped (PM) points, where the
    entropy saturates; blocks below 25 sites are dropped to suppress
    lattice corrections.
    """
    try:
        label = classify_phase(params)
        if label.phase is Phase.PM:
            raise ValueError("PM point is gapped: entropy saturates, no fit")
    except DegeneratePhasePoint:
        pass  # critical lines are gapless
    n = params.n_sites
    ls = sorted({int(l) for l in block_lengths})
    ls = [l for l in ls if CENTRAL_CHARGE_MIN_BLOCK <= l <= n // 2]
    if len(ls) < MIN_FIT_POINTS:
        raise ValueError(
            f"need at least {MIN_FIT_POINTS} block lengths in "
            f"[{CENTRAL_CHARGE_MIN_BLOCK}, n/2]"
        )
    table = build_table(fermi_sea(params))
    ent = np.array([entanglement_entropy(table, l) for l in ls])
    chord = (n / math.pi) * np.sin(math.pi * np.asarray(ls, dtype=float) / n)
    a, b, rms = _fit_one(lambda x: x, np.log(chord), ent)
    return ScalingFit("log", a, b, rms, derived_constant=3.0 * a)
