"""Single-particle theory of the periodic spin-1/2 XX chain with a chiral
three-spin exchange (XZY-YZX form) in a transverse field.

After fermionization the chain is a gas of free spinless fermions with
dispersion

    eps(k) = -j * (h + cos k - (alpha/2) sin 2k),

and the ground state fills every momentum with eps(k) < 0.  Phases are
labelled by the number of Fermi points of eps: 0 (polarized PM), 2 (SL-I)
or 4 (SL-II).  The critical fields at fixed alpha are the non-negative
extremal values of g(k) = -cos k + (alpha/2) sin 2k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar


class DegeneratePhasePoint(Exception):
    """The dispersion touches zero tangentially: the parameters sit on a
    critical line and the Fermi-point count is not well defined."""


class Phase(Enum):
    PM = "PM"
    SL_I = "SL-I"
    SL_II = "SL-II"


_PHASE_BY_COUNT = {0: Phase.PM, 2: Phase.SL_I, 4: Phase.SL_II}


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the chain; energies in units of the XX exchange j."""

    alpha: float
    h: float
    n_sites: int
    j: float = 1.0

    def __post_init__(self):
        if self.j <= 0:
            raise ValueError("ferromagnetic convention requires j > 0")
        if self.n_sites < 3:
            raise ValueError("the three-spin term needs at least 3 sites")


@dataclass(frozen=True)
class MomentumGrid:
    """Allowed momenta 2*pi*m/n of the periodic fermion chain, ascending."""

    n_sites: int
    k_values: np.ndarray


@dataclass(frozen=True)
class FermiSea:
    """Momenta occupied in the ground state (strictly negative energy)."""

    params: ModelParams
    occupied: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.params.n_sites

    @property
    def filling(self) -> float:
        return len(self.occupied) / self.params.n_sites


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    fermi_point_count: int


def build_grid(n_sites: int) -> MomentumGrid:
    """Momentum grid in (-pi, pi]: m = 0, +-1, ..., +-(n-1)/2 for odd n and
    m = 0, +-1, ..., +-(n/2-1), n/2 for even n."""
    n = int(n_sites)
    if n < 3:
        raise ValueError("need n_sites >= 3")
    m = np.arange(-((n - 1) // 2), n // 2 + 1)
    return MomentumGrid(n, 2.0 * np.pi * m / n)


def dispersion(params: ModelParams, k):
    """Single-particle energy eps(k); accepts scalars or arrays."""
    k = np.asarray(k, dtype=float)
    out = -params.j * (params.h + np.cos(k) - 0.5 * params.alpha * np.sin(2.0 * k))
    return out[()]


def dispersion_slope(params: ModelParams, k):
    """d eps / dk, used for tangency detection on critical lines."""
    k = np.asarray(k, dtype=float)
    out = params.j * (np.sin(k) + params.alpha * np.cos(2.0 * k))
    return out[()]


def fermi_sea(params: ModelParams) -> FermiSea:
    """Occupied momenta of the ground state.  Grid points with eps == 0
    are left empty, which keeps the state unique; the choice only moves
    observables at O(1/n)."""
    grid = build_grid(params.n_sites)
    eps = dispersion(params, grid.k_values)
    return FermiSea(params, grid.k_values[eps < 0.0])


def ground_energy_per_site(params: ModelParams) -> float:
    """(1/n) sum of eps(k) over the Fermi sea.  Note this is the energy of
    the number-operator form of the Hamiltonian, which drops the constant
    j*h/2 per site relative to the spin convention."""
    sea = fermi_sea(params)
    if len(sea.occupied) == 0:
        return 0.0
    return float(np.sum(dispersion(params, sea.occupied)) / params.n_sites)


def magnetization_z(params: ModelParams) -> float:
    """Per-site magnetization along z: filling - 1/2."""
    return fermi_sea(params).filling - 0.5


def classify_phase(params: ModelParams, n_samples: int = 4096) -> PhaseLabel:
    """Count simple zeros of the continuous dispersion over one period and
    map 0/2/4 Fermi points to PM/SL-I/SL-II.

    Raises DegeneratePhasePoint when a zero is tangential (|eps'| ~ 0 at the
    root, or eps grazes zero without a sign change): those parameters lie on
    a critical line where the count is about to change.
    """
    ks = -np.pi + 2.0 * np.pi * np.arange(1, n_samples + 1) / n_samples
    eps = np.asarray(dispersion(params, ks))
    scale = float(np.max(np.abs(eps)))
    if scale == 0.0:
        raise DegeneratePhasePoint("dispersion vanishes identically")
    slope_scale = max(1.0, float(np.max(np.abs(dispersion_slope(params, ks)))))

    def f(k):
        return float(dispersion(params, k))

    roots = []
    n = n_samples
    zero_sample = np.abs(eps) < 1e-13 * scale
    for i in range(n):
        if zero_sample[i]:
            if abs(dispersion_slope(params, ks[i])) < 1e-7 * slope_scale:
                raise DegeneratePhasePoint(
                    f"eps touches zero at k = {ks[i]:.6f} with vanishing slope"
                )
            roots.append(ks[i])
    for i in range(n):
        a = ks[i]
        b = ks[i + 1] if i + 1 < n else ks[0] + 2.0 * np.pi
        fa = eps[i]
        fb = eps[(i + 1) % n]
        if fa * fb < 0.0:
            roots.append(brentq(f, a, b, xtol=1e-12))

    for r in roots:
        if abs(dispersion_slope(params, r)) < 1e-7 * slope_scale:
            raise DegeneratePhasePoint(
                f"tangential Fermi point at k = {r:.6f}: critical line"
            )

    # grazing extrema: |eps| dips near zero without changing sign
    near = np.abs(eps) < 1e-6 * scale
    for i in np.where(near & ~zero_sample)[0]:
        left = eps[i - 1]
        right = eps[(i + 1) % n]
        if left * eps[i] > 0.0 and right * eps[i] > 0.0:
            lo = ks[i] - 2.0 * np.pi / n
            hi = ks[i] + 2.0 * np.pi / n
            res = minimize_scalar(
                lambda k: abs(f(k)), bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < 1e-9 * scale:
                raise DegeneratePhasePoint(
                    f"eps grazes zero near k = {res.x:.6f}: critical line"
                )

    roots = sorted(roots)
    deduped = []
    for r in roots:
        if not deduped or r - deduped[-1] > 1e-9:
            deduped.append(r)
    count = len(deduped)
    if count not in _PHASE_BY_COUNT:
        raise RuntimeError(f"unexpected Fermi-point count {count}")
    return PhaseLabel(_PHASE_BY_COUNT[count], count)


def critical_fields(alpha: float) -> list[float]:
    """Fields h >= 0 where the Fermi-point count changes at fixed alpha.

    These are the non-negative extremal values of g(k) = -cos k +
    (alpha/2) sin 2k.  Writing s = sin k, the extremum condition
    g'(k) = s + alpha (1 - 2 s^2) = 0 is a quadratic in s, so the
    extrema come in closed form; results are deduplicated to 1e-9.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0.0:
        return [1.0]
    disc = math.sqrt(1.0 + 8.0 * alpha * alpha)
    fields = []
    for s in ((1.0 + disc) / (4.0 * alpha), (1.0 - disc) / (4.0 * alpha)):
        if abs(s) > 1.0:
            continue
        k0 = math.asin(s)
        for k in (k0, math.pi - k0):
            g = -math.cos(k) + 0.5 * alpha * math.sin(2.0 * k)
            if g >= -1e-12:
                fields.append(max(g, 0.0))
    fields.sort()
    out: list[float] = []
    for v in fields:
        if not out or v - out[-1] > 1e-9:
            out.append(v)
    return out
