"""Ground-state metrics of the chain: l1 coherence, Kitagawa-Ueda spin
squeezing, block entanglement entropy and two-site concurrence.

Everything here is a functional of the contraction table (and, for the
squeezing and concurrence, of the transverse string correlators).  The
squeezing sum runs over distances 1..n-1 exactly; a truncated radius is
accepted only when the pessimistic tail bound

    (n - 1 - R) * 4 * max(|G^xx_R|, |G^yy_R|) < tail_tol

certifies that the dropped terms cannot matter.  In gapless phases the
correlators decay algebraically and that certificate is unattainable for
any useful R, so large chains should use exact mode, which the bordered
Pfaffian recursion keeps affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .correlators import ContractionTable
from .errors import NumericalError, TruncationError
from .pfaffian import string_correlators

DIAG_CLAMP = 1e-12
EIG_WINDOW = 1e-8


@dataclass(frozen=True)
class SpinCorrelators:
    """Per-distance transverse and longitudinal pair correlators; array
    index 0 holds distance 1."""

    max_range: int
    gxx: np.ndarray
    gyy: np.ndarray
    gxy: np.ndarray
    gyx: np.ndarray
    gzz: np.ndarray
    mz: float


@dataclass(frozen=True)
class ReducedTwoSite:
    """Non-zero elements of the symmetric two-site reduced density matrix
    in the S^z product basis: diagonal (X+, Y+, Y-, X-) and the flip-flop
    amplitude Z."""

    x_plus: float
    x_minus: float
    y_plus: float
    y_minus: float
    z: complex


@dataclass(frozen=True)
class MetricsRecord:
    """One (alpha, h, n_sites) point of a sweep.  Metrics that were not
    requested stay None; phase is None on a critical line."""

    alpha: float
    h: float
    n_sites: int
    phase: str | None = None
    mz: float | None = None
    c_l1_scaled: float | None = None
    ssp: float | None = None
    ee_half: float | None = None
    conc_nn: float | None = None
    conc_nnn: float | None = None


def compute_spin_correlators(table: ContractionTable, max_range: int,
                             method: str = "chain") -> SpinCorrelators:
    """String correlators plus G^zz for distances 1..max_range."""
    if not 1 <= max_range <= table.n_sites - 1:
        raise ValueError("max_range must lie in [1, n_sites - 1]")
    gxx, gyy, gxy, gyx = string_correlators(table, max_range, method=method)
    gzz = table.mz**2 - np.abs(table.f[1 : max_range + 1]) ** 2
    return SpinCorrelators(max_range, gxx, gyy, gxy, gyx, gzz, table.mz)


def l1_coherence_scaled(table: ContractionTable) -> float:
    """Scaled l1 coherence (1/n) sum_{m != m'} |f(m - m')| of the fermionic
    correlation matrix, folded over equal |separations|."""
    n = table.n_sites
    d = np.arange(1, n)
    return float(2.0 / n * np.dot(n - d, np.abs(table.f[1:])))


def spin_squeezing(correls: SpinCorrelators, n_sites: int,
                   *, tail_tol: float = 1e-6) -> float:
    """Kitagawa-Ueda squeezing parameter

    1 + 2 sum(Gxx + Gyy) - 2 sqrt([sum(Gxx - Gyy)]^2 + [sum(Gxy + Gyx)]^2)

    with sums over distances 1..max_range in fixed index order.  Equals 1
    for a coherent state, < 1 when squeezed.  A truncated range must pass
    the tail certificate, otherwise TruncationError asks for a larger R.
    """
    r = correls.max_range
    if r < n_sites - 1:
        last = max(abs(float(correls.gxx[-1])), abs(float(correls.gyy[-1])))
        tail = 4.0 * (n_sites - 1 - r) * last
        if tail >= tail_tol:
            raise TruncationError(
                f"tail bound {tail:.3e} >= {tail_tol:.1e} at radius {r}; "
                "increase the radius or use exact mode"
            )
    splus = float(np.sum(correls.gxx + correls.gyy))
    sdiff = float(np.sum(correls.gxx - correls.gyy))
    scross = float(np.sum(correls.gxy + correls.gyx))
    return 1.0 + 2.0 * splus - 2.0 * math.hypot(sdiff, scross)


def entanglement_entropy(table: ContractionTable, block_len: int,
                         *, base2: bool = False) -> float:
    """Von Neumann entropy of a contiguous block from the spectrum of the
    restricted correlation matrix, in nats (or bits with base2=True)."""
    n = table.n_sites
    if not 1 <= block_len <= n - 1:
        raise ValueError("block length must lie in [1, n_sites - 1]")
    idx = np.arange(block_len)
    d = idx[None, :] - idx[:, None]
    f = table.f[np.abs(d)]
    block = np.where(d >= 0, f, np.conj(f))
    nu = np.linalg.eigvalsh(block)
    if nu.min() < -EIG_WINDOW or nu.max() > 1.0 + EIG_WINDOW:
        raise NumericalError(
            f"correlation eigenvalue outside [0,1] window: "
            f"[{nu.min():.3e}, {nu.max():.3e}]"
        )
    nu = np.clip(nu, 0.0, 1.0)
    s = float(-(xlogy(nu, nu) + xlogy(1.0 - nu, 1.0 - nu)).sum())
    return s / math.log(2.0) if base2 else s


def two_site_rdm(correls: SpinCorrelators, r: int,
                 mz: float | None = None) -> ReducedTwoSite:
    """Two-site reduced density matrix at distance r from the correlators:
    X+- = 1/4 +- mz + Gzz, Y+- = 1/4 - Gzz, Z = Gxx + Gyy + i(Gyx - Gxy)."""
    if not 1 <= r <= correls.max_range:
        raise ValueError("distance outside the computed correlator range")
    if mz is None:
        mz = correls.mz
    i = r - 1
    zz = float(correls.gzz[i])
    xp = 0.25 + mz + zz
    xm = 0.25 - mz + zz
    yp = 0.25 - zz
    ym = 0.25 - zz
    trace = xp + xm + yp + ym
    if abs(trace - 1.0) > 1e-9:
        raise NumericalError(f"two-site trace {trace!r} differs from 1")
    diag = [xp, xm, yp, ym]
    if min(diag) < -DIAG_CLAMP:
        raise NumericalError(f"negative two-site population {min(diag):.3e}")
    xp, xm, yp, ym = (max(v, 0.0) for v in diag)
    z = complex(correls.gxx[i] + correls.gyy[i],
                correls.gyx[i] - correls.gxy[i])
    return ReducedTwoSite(xp, xm, yp, ym, z)


def concurrence(rdm: ReducedTwoSite) -> float:
    """Wootters concurrence of the symmetric two-site state:
    max(0, 2(|Z| - sqrt(X+ X-))), clamped to [0, 1]."""
    val = 2.0 * (abs(rdm.z) - math.sqrt(rdm.x_plus * rdm.x_minus))
    return min(max(val, 0.0), 1.0)


def wineland_ssp(correls: SpinCorrelators, n_sites: int,
                 *, tail_tol: float = 1e-6) -> float:
    """Metrological squeezing with the squared mean-spin denominator:
    xi_R^2 = xi_s^2 * (n/2)^2 / <J_z>^2.  Undefined when the mean spin
    vanishes."""
    mz = correls.mz
    if abs(mz) <= 1e-9:
        raise ValueError("mean spin along z vanishes; xi_R^2 undefined")
    xs2 = spin_squeezing(correls, n_sites, tail_tol=tail_tol)
    return xs2 / (2.0 * mz) ** 2
