"""Fermionic two-point function of the ground state and the A/B pair
contractions that every spin observable reduces to.

With A_n = c_n^dag + c_n and B_n = c_n^dag - c_n, the ground-state pair
contractions are combinations of delta terms and the cosine/sine sums

    cos_sum(r) = (2/n) sum_{k in sea} cos(k r) = 2 Re f(r),
    sin_sum(r) = (2/n) sum_{k in sea} sin(k r) = -2 Im f(r),

where f(r) = <c_m^dag c_{m+r}> = (1/n) sum_{k in sea} e^{-i k r}.
Separations are plain matrix separations in [-(n-1), n-1]; nothing is
wrapped around the ring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FermiSea

KINDS = ("AA", "AB", "BA", "BB")


@dataclass(frozen=True)
class ContractionTable:
    """Cached f(r) for r = 0..n-1 plus the derived contraction sums."""

    n_sites: int
    f: np.ndarray

    @property
    def filling(self) -> float:
        return float(self.f[0].real)

    @property
    def mz(self) -> float:
        return self.filling - 0.5

    @property
    def cos_sum(self) -> np.ndarray:
        return 2.0 * self.f.real

    @property
    def sin_sum(self) -> np.ndarray:
        return -2.0 * self.f.imag

    def f_at(self, r: int) -> complex:
        """f(r) for signed separations, using f(-r) = conj f(r)."""
        if abs(r) > self.n_sites - 1:
            raise ValueError(f"separation {r} exceeds n_sites - 1")
        return complex(self.f[r]) if r >= 0 else complex(np.conj(self.f[-r]))

    def contraction(self, kind: str, r: int) -> complex:
        """Pair contraction <X_m Y_{m+r}> for X, Y in {A, B}.

        AA(r) = delta - i sin_sum(r)        BB(r) = -delta + i sin_sum(r)
        AB(r) = delta - cos_sum(r)          BA(r) = -delta + cos_sum(r)
        """
        if kind not in KINDS:
            raise ValueError(f"unknown contraction kind {kind!r}")
        if abs(r) > self.n_sites - 1:
            raise ValueError(f"separation {r} exceeds n_sites - 1")
        d = 1.0 if r == 0 else 0.0
        a = abs(r)
        sgn = 1.0 if r >= 0 else -1.0
        if kind == "AA":
            return complex(d, -sgn * self.sin_sum[a])
        if kind == "BB":
            return complex(-d, sgn * self.sin_sum[a])
        if kind == "AB":
            return complex(d - self.cos_sum[a], 0.0)
        return complex(-d + self.cos_sum[a], 0.0)


def build_table(sea: FermiSea) -> ContractionTable:
    """Direct O(n^2) evaluation of f(r) over the occupied momenta."""
    n = sea.n_sites
    ks = sea.occupied
    if len(ks) == 0:
        f = np.zeros(n, dtype=complex)
    else:
        r = np.arange(n)
        f = np.exp(-1j * np.outer(r, ks)).sum(axis=1) / n
    return ContractionTable(n, f)


def zz_correlator(table: ContractionTable, r: int) -> float:
    """<S^z_m S^z_{m+r}> = mz^2 - |f(r)|^2 by Wick's theorem; r >= 1
    (the on-site moment is 1/4, not a pair correlator)."""
    if r < 1 or r > table.n_sites - 1:
        raise ValueError("zz correlator needs 1 <= r <= n_sites - 1")
    return float(table.mz**2 - abs(table.f[r]) ** 2)
