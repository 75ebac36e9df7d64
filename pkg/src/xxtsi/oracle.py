"""Exact diagonalization of small chains (n <= 14), used to validate the
free-fermion pipeline end to end.

The Hamiltonian commutes with the total S^z, so each magnetization sector
is diagonalized independently (largest block C(14,7) = 3432).  Matrix
elements are assembled by applying the spin operators literally as
products of single-site 1/2-Pauli actions on bit strings; amplitudes that
land outside the sector must cancel between the two halves of each
exchange term, and the assembly verifies that they do, which doubles as
an automatic [H, sum S^z] = 0 check.

Periodic-chain caveat: the fermionic pipeline uses the single momentum
grid of the number-operator Hamiltonian regardless of fermion parity, so
its observables differ from the spin chain by O(1/n) boundary terms.  The
comparison tolerance tau(n) = 0.6/n is calibrated at alpha = 0 where that
boundary term is largest among small couplings; chains with alpha >= 2
get a 1.6x allowance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.special import xlogy

from .correlators import build_table
from .model import ModelParams, fermi_sea, ground_energy_per_site
from .errors import NumericalError
from .observables import (
    compute_spin_correlators,
    concurrence,
    entanglement_entropy,
    spin_squeezing,
    two_site_rdm,
)

MAX_SITES = 14
DEGENERACY_GAP = 1e-10

# single-site spin matrices in bit order (index 0 = down, 1 = up)
_SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
_SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
_SZ = np.array([[-0.5, 0.0], [0.0, 0.5]], dtype=complex)
_SPIN_OPS = {"x": _SX, "y": _SY, "z": _SZ}
_YY = np.kron(2.0 * _SY, 2.0 * _SY)  # sigma^y x sigma^y for Wootters' tilde


@dataclass(frozen=True)
class SpinBasisSector:
    """Bit configurations (1 = up) with fixed up-spin count, ascending."""

    n_sites: int
    n_up: int
    states: np.ndarray


@dataclass(frozen=True)
class GroundStateED:
    params: ModelParams
    energy: float
    n_up: int
    amplitudes: np.ndarray
    degeneracy_flag: bool

    @property
    def sector(self) -> SpinBasisSector:
        return build_sector(self.params.n_sites, self.n_up)


def build_sector(n_sites: int, n_up: int) -> SpinBasisSector:
    states = np.array(
        [s for s in range(1 << n_sites) if s.bit_count() == n_up], dtype=np.int64
    )
    return SpinBasisSector(n_sites, n_up, states)


def _terms(params: ModelParams):
    """Hamiltonian as (coefficient, product-of-site-operators) pairs."""
    n = params.n_sites
    j = params.j
    js = params.j * params.alpha
    terms = []
    for i in range(n):
        i1 = (i + 1) % n
        i2 = (i + 2) % n
        terms.append((-j, ((i, "x"), (i1, "x"))))
        terms.append((-j, ((i, "y"), (i1, "y"))))
        terms.append((-js, ((i, "x"), (i1, "z"), (i2, "y"))))
        terms.append((js, ((i, "y"), (i1, "z"), (i2, "x"))))
        terms.append((-j * params.h, ((i, "z"),)))
    return terms


def _apply_term(state: int, ops) -> tuple[int, complex]:
    """Apply a product of single-site spin operators to a basis state; the
    sites are distinct so the factors commute and each branch is unique."""
    amp = 1.0 + 0.0j
    for site, op in ops:
        bit = (state >> site) & 1
        if op == "x":
            state ^= 1 << site
            amp *= 0.5
        elif op == "y":
            amp *= 0.5j if bit == 0 else -0.5j
            state ^= 1 << site
        else:
            amp *= bit - 0.5
    return state, amp


def build_hamiltonian(params: ModelParams, sector: SpinBasisSector) -> np.ndarray:
    """Dense sector Hamiltonian.  Raises NumericalError if any term leaks
    amplitude out of the magnetization sector (it must cancel exactly)."""
    if params.n_sites > MAX_SITES:
        raise ValueError(f"dense diagonalization is capped at {MAX_SITES} sites")
    if sector.n_sites != params.n_sites:
        raise ValueError("sector does not match the chain length")
    states = sector.states
    index = {int(s): i for i, s in enumerate(states)}
    dim = len(states)
    ham = np.zeros((dim, dim), dtype=complex)
    terms = _terms(params)
    for col, s in enumerate(states):
        acc: dict[int, complex] = {}
        for coeff, ops in terms:
            t, amp = _apply_term(int(s), ops)
            acc[t] = acc.get(t, 0.0) + coeff * amp
        for t, amp in acc.items():
            row = index.get(t)
            if row is not None:
                ham[row, col] += amp
            elif abs(amp) > 1e-12:
                raise NumericalError(
                    f"magnetization leak {abs(amp):.3e} from state {s:#x}"
                )
    if float(np.max(np.abs(ham - ham.conj().T))) > 1e-13:
        raise NumericalError("sector Hamiltonian is not Hermitian")
    return ham


def build_full_hamiltonian(params: ModelParams) -> np.ndarray:
    """Independent 2^n construction by Kronecker products, for spectra
    cross-checks on very small chains."""
    n = params.n_sites
    if n > 10:
        raise ValueError("full-space construction is meant for n <= 10")
    dim = 1 << n
    ham = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(2, dtype=complex)
    for coeff, ops in _terms(params):
        factors = [eye] * n
        for site, op in ops:
            factors[site] = _SPIN_OPS[op]
        term = np.array([[1.0 + 0.0j]])
        # site 0 is the least significant bit, so it is the last factor
        for f in reversed(factors):
            term = np.kron(term, f)
        ham += coeff * term
    return ham


def ground_state(params: ModelParams) -> GroundStateED:
    """Global ground state over all magnetization sectors; flags a
    degeneracy when the two lowest global levels are closer than 1e-10."""
    if params.n_sites > MAX_SITES:
        raise ValueError(f"dense diagonalization is capped at {MAX_SITES} sites")
    n = params.n_sites
    best = None
    lowest: list[float] = []
    for n_up in range(n + 1):
        sector = build_sector(n, n_up)
        ham = build_hamiltonian(params, sector)
        dim = ham.shape[0]
        if dim == 1:
            vals = np.array([ham[0, 0].real])
            vecs = np.array([[1.0 + 0.0j]])
        else:
            vals, vecs = eigh(ham, subset_by_index=[0, min(1, dim - 1)])
        lowest.extend(float(v) for v in vals[: min(2, dim)])
        if best is None or vals[0] < best[0]:
            best = (float(vals[0]), n_up, vecs[:, 0].copy())
    lowest.sort()
    flag = len(lowest) > 1 and (lowest[1] - lowest[0]) < DEGENERACY_GAP
    energy, n_up, amps = best
    amps = amps / np.linalg.norm(amps)
    return GroundStateED(params, energy, n_up, amps, flag)


def full_vector(gs: GroundStateED) -> np.ndarray:
    psi = np.zeros(1 << gs.params.n_sites, dtype=complex)
    psi[gs.sector.states] = gs.amplitudes
    return psi


def _pair_rdm(psi: np.ndarray, n_sites: int, i: int, j: int) -> np.ndarray:
    """Reduced density matrix of sites (i, j); row index = 2*bit_i + bit_j
    with bit 1 = up."""
    t = psi.reshape([2] * n_sites)
    t = np.moveaxis(t, (n_sites - 1 - i, n_sites - 1 - j), (0, 1))
    m = t.reshape(4, -1)
    return m @ m.conj().T


def pair_rdm_avg(gs: GroundStateED, r: int) -> np.ndarray:
    """Translation-averaged two-site density matrix at distance r."""
    n = gs.params.n_sites
    psi = full_vector(gs)
    rho = np.zeros((4, 4), dtype=complex)
    for i in range(n):
        rho += _pair_rdm(psi, n, i, (i + r) % n)
    return rho / n


def _pair_correlator(rho: np.ndarray, a: str, b: str) -> float:
    op = np.kron(_SPIN_OPS[a], _SPIN_OPS[b])
    return float(np.trace(rho @ op).real)


def _collective_apply(psi: np.ndarray, n_sites: int, op: str) -> np.ndarray:
    """J_op |psi> with J_op = sum_i S^op_i, via bit-flip indexing."""
    dim = psi.shape[0]
    idx = np.arange(dim)
    out = np.zeros(dim, dtype=complex)
    for i in range(n_sites):
        mask = 1 << i
        src = idx ^ mask
        if op == "x":
            out += 0.5 * psi[src]
        elif op == "y":
            bit = (idx & mask) != 0
            out += np.where(bit, 0.5j, -0.5j) * psi[src]
        else:
            bit = (idx & mask) != 0
            out += np.where(bit, 0.5, -0.5) * psi
    return out


def ed_spin_squeezing(gs: GroundStateED) -> float:
    """Closed-form Kitagawa-Ueda parameter from collective-spin moments."""
    n = gs.params.n_sites
    psi = full_vector(gs)
    vx = _collective_apply(psi, n, "x")
    vy = _collective_apply(psi, n, "y")
    jx2 = float(np.vdot(vx, vx).real)
    jy2 = float(np.vdot(vy, vy).real)
    cross = 2.0 * float(np.vdot(vx, vy).real)
    return (2.0 / n) * (jx2 + jy2 - np.hypot(jx2 - jy2, cross))


def ed_spin_squeezing_scan(gs: GroundStateED, n_angles: int = 720) -> float:
    """Direct minimization of the transverse variance over the rotation
    angle; slow reference for the closed form."""
    n = gs.params.n_sites
    psi = full_vector(gs)
    vx = _collective_apply(psi, n, "x")
    vy = _collective_apply(psi, n, "y")
    omegas = np.linspace(0.0, np.pi, n_angles, endpoint=False)
    best = np.inf
    for om in omegas:
        v = np.cos(om) * vx + np.sin(om) * vy
        var = float(np.vdot(v, v).real)
        mean = np.cos(om) * np.vdot(psi, vx) + np.sin(om) * np.vdot(psi, vy)
        var -= abs(mean) ** 2
        best = min(best, var)
    return 4.0 * best / n


def ed_block_entropy(gs: GroundStateED, block_len: int) -> float:
    """Schmidt entropy (nats) of the contiguous block {0..block_len-1}."""
    n = gs.params.n_sites
    if not 1 <= block_len <= n - 1:
        raise ValueError("block length must lie in [1, n_sites - 1]")
    psi = full_vector(gs)
    m = psi.reshape(1 << (n - block_len), 1 << block_len)
    p = np.linalg.svd(m, compute_uv=False) ** 2
    return float(-xlogy(p, p).sum())


def ed_concurrence(rho: np.ndarray) -> float:
    """Wootters construction from an arbitrary two-qubit density matrix."""
    rt = _YY @ rho.conj() @ _YY
    lam = np.linalg.eigvals(rho @ rt)
    lam = np.sqrt(np.clip(lam.real, 0.0, None))
    lam.sort()
    return float(max(0.0, lam[-1] - lam[-2] - lam[-3] - lam[-4]))


def ed_l1_coherence(gs: GroundStateED) -> float:
    """Exact l1 coherence of the pure state in the S^z product basis:
    (sum |a|)^2 - sum |a|^2."""
    a = np.abs(gs.amplitudes)
    return float(a.sum() ** 2 - (a**2).sum())


def ed_metrics(gs: GroundStateED) -> dict:
    """Every compared metric evaluated directly on the state vector."""
    if gs.degeneracy_flag:
        raise ValueError("degenerate ground state: comparison declined")
    params = gs.params
    n = params.n_sites
    rho1 = pair_rdm_avg(gs, 1)
    rho2 = pair_rdm_avg(gs, 2)
    out = {
        "energy_per_site": gs.energy / n,
        "mz": gs.n_up / n - 0.5,
        "gxx1": _pair_correlator(rho1, "x", "x"),
        "gyy1": _pair_correlator(rho1, "y", "y"),
        "gzz1": _pair_correlator(rho1, "z", "z"),
        "gxy1": _pair_correlator(rho1, "x", "y"),
        "gyx1": _pair_correlator(rho1, "y", "x"),
        "ssp": ed_spin_squeezing(gs),
        "ee_half": ed_block_entropy(gs, n // 2),
        "conc_nn": ed_concurrence(rho1),
        "conc_nnn": ed_concurrence(rho2),
        "c_l1": ed_l1_coherence(gs),
    }
    mz = out["mz"]
    if abs(mz) > 1e-9:
        out["wineland"] = out["ssp"] / (2.0 * mz) ** 2
    return out


def default_tolerance(params: ModelParams) -> float:
    """tau(n) = 0.6/n, with a 1.6x allowance at alpha >= 2 where the
    fermionic boundary term is strongest."""
    tol = 0.6 / params.n_sites
    if params.alpha >= 2.0:
        tol *= 1.6
    return tol


COMPARED = ("energy_per_site", "mz", "gxx1", "gyy1", "gzz1",
            "ssp", "ee_half", "conc_nn")


def fermion_metrics(params: ModelParams) -> dict:
    """The same metric set from the free-fermion pipeline, with the
    per-site energy shifted to the spin convention (+ j h / 2)."""
    table = build_table(fermi_sea(params))
    correls = compute_spin_correlators(table, params.n_sites - 1)
    out = {
        "energy_per_site": ground_energy_per_site(params)
        + 0.5 * params.j * params.h,
        "mz": table.mz,
        "gxx1": float(correls.gxx[0]),
        "gyy1": float(correls.gyy[0]),
        "gzz1": float(correls.gzz[0]),
        "gxy1": float(correls.gxy[0]),
        "gyx1": float(correls.gyx[0]),
        "ssp": spin_squeezing(correls, params.n_sites),
        "ee_half": entanglement_entropy(table, params.n_sites // 2),
        "conc_nn": concurrence(two_site_rdm(correls, 1)),
        "conc_nnn": concurrence(two_site_rdm(correls, 2)),
    }
    return out


def compare_report(params_list, tol=None) -> list[dict]:
    """Per-point deltas between the two pipelines.

    Each row carries both values and |delta| for the compared metrics,
    the tolerance, and a passed/degenerate status.  tol may be a float or
    a callable(params); default is tau(n) from `default_tolerance`.
    """
    rows = []
    for params in params_list:
        if params.n_sites > MAX_SITES:
            raise ValueError(f"oracle comparison is capped at {MAX_SITES} sites")
        point_tol = tol(params) if callable(tol) else tol
        if point_tol is None:
            point_tol = default_tolerance(params)
        row = {
            "alpha": params.alpha,
            "h": params.h,
            "n_sites": params.n_sites,
            "tolerance": point_tol,
        }
        gs = ground_state(params)
        if gs.degeneracy_flag:
            row["status"] = "skipped: degenerate"
            rows.append(row)
            continue
        ed = ed_metrics(gs)
        ff = fermion_metrics(params)
        worst = 0.0
        for name in COMPARED:
            delta = abs(ed[name] - ff[name])
            row[f"ed_{name}"] = ed[name]
            row[f"ff_{name}"] = ff[name]
            row[f"d_{name}"] = delta
            worst = max(worst, delta)
        row["max_delta"] = worst
        row["status"] = "ok" if worst <= point_tol else "mismatch"
        rows.append(row)
    return rows
