"""Lie-algebra observables, the scalar invariant and coherency-matrix spectra.

Observable basis on m modes (1-based, j < k):

    Z_j  = n_j
    X_jk = (a^dag_j a_k + a^dag_k a_j) / sqrt(2)
    Y_jk = i (a^dag_j a_k - a^dag_k a_j) / sqrt(2)

Measurement devices (the X/Y cores, swaps) are specified the way an optics
bench writes them: as the map on creation operators. ``fock.evolve`` takes
the transfer matrix instead (photon in k exits in j with amplitude
``U[j, k]``), which is the complex conjugate. ``measurement_stage`` does that
conversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ArityError, SymmetryError
from .fock import apply_unitary, expectation_monomial, mean_photon_numbers
from .transforms import realized_core, realized_swap, two_mode_embed

SQRT2 = np.sqrt(2.0)


class LieIndex(NamedTuple):
    kind: str
    j: int
    k: int = 0

    def __str__(self):
        return f"Z{self.j}" if self.kind == "Z" else f"{self.kind}{self.j}{self.k}"


def lie_basis(m):
    pairs = [(j, k) for j in range(1, m + 1) for k in range(j + 1, m + 1)]
    return (
        [LieIndex("Z", j) for j in range(1, m + 1)]
        + [LieIndex("X", j, k) for j, k in pairs]
        + [LieIndex("Y", j, k) for j, k in pairs]
    )


@dataclass(frozen=True)
class ExpectationRecord:
    m: int
    values: np.ndarray  # ordered as lie_basis(m)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.m * self.m,):
            raise ValueError(f"need {self.m ** 2} values for m={self.m}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def basis(self):
        return lie_basis(self.m)

    def __getitem__(self, index):
        return float(self.values[self.basis.index(LieIndex(*index))])

    @property
    def N(self):
        return self.values[: self.m].copy()

    def R(self, j, k):
        """(<X_jk> + i <Y_jk>) / sqrt(2), which equals <a^dag_k a_j>."""
        return (self[("X", j, k)] + 1j * self[("Y", j, k)]) / SQRT2

    def rows(self):
        return [(b.kind, b.j, b.k, float(v)) for b, v in zip(self.basis, self.values)]


def measurement_stage(m, index, reflectivity=0.5):
    """Transfer matrix and readout modes for one observable setting.

    Non-adjacent pairs are first brought together by a chain of swaps, so the
    two readout modes are ``(j, j+1)``. Z settings need no stage.
    """
    index = LieIndex(*index)
    if index.kind == "Z":
        return np.eye(m, dtype=complex), (index.j, index.j)
    j, k = index.j, index.k
    device = np.eye(m, dtype=complex)
    swap = realized_swap(reflectivity)
    for p in range(k - 1, j, -1):
        device = two_mode_embed(m, p, p + 1, swap) @ device
    device = two_mode_embed(m, j, j + 1, realized_core(index.kind, reflectivity)) @ device
    return device.conj(), (j, j + 1)


def record_from_means(m, means):
    """Build a record from per-setting mean photon numbers.

    ``means`` maps each LieIndex to the mean-photon vector observed behind
    that setting's stage (Z settings may share one vector).
    """
    vals = []
    for b in lie_basis(m):
        n = means[b]
        if b.kind == "Z":
            vals.append(n[b.j - 1])
        else:
            vals.append((n[b.j - 1] - n[b.j]) / SQRT2)
    return ExpectationRecord(m, np.array(vals))


def measure_expectations_circuit(state, reflectivity=0.5):
    """Expectations as the hardware obtains them: photon-number differences
    behind a balanced two-mode stage."""
    m = state.m
    base = mean_photon_numbers(state)
    means = {}
    for b in lie_basis(m):
        if b.kind == "Z":
            means[b] = base
        else:
            stage, _ = measurement_stage(m, b, reflectivity)
            means[b] = mean_photon_numbers(apply_unitary(state, stage))
    return record_from_means(m, means)


def coherency_matrix(state):
    """Gamma_jk = <a^dag_j a_k>, evaluated with ladder operators."""
    m = state.m
    G = np.empty((m, m), dtype=complex)
    for j in range(1, m + 1):
        for k in range(j, m + 1):
            G[j - 1, k - 1] = expectation_monomial(state, [j], [k])
            G[k - 1, j - 1] = np.conj(G[j - 1, k - 1])
    for j in range(m):
        G[j, j] = G[j, j].real
    return G


def expectations_from_coherency(G):
    G = np.asarray(G)
    m = G.shape[0]
    vals = []
    for b in lie_basis(m):
        g = G[b.j - 1, b.k - 1] if b.kind != "Z" else G[b.j - 1, b.j - 1]
        if b.kind == "Z":
            vals.append(g.real)
        elif b.kind == "X":
            vals.append(SQRT2 * g.real)
        else:
            vals.append(-SQRT2 * g.imag)
    return ExpectationRecord(m, np.array(vals))


def measure_expectations_direct(state):
    return expectations_from_coherency(coherency_matrix(state))


def invariant_I(rec):
    return float(np.sum(rec.values ** 2))


def coherency_from_expectations(rec):
    m = rec.m
    G = np.diag(rec.N).astype(complex)
    for j in range(1, m + 1):
        for k in range(j + 1, m + 1):
            g = (rec[("X", j, k)] - 1j * rec[("Y", j, k)]) / SQRT2
            G[j - 1, k - 1] = g
            G[k - 1, j - 1] = np.conj(g)
    return G


def invariant_bounds(m, total_photons):
    n2 = float(total_photons) ** 2
    return n2 / m, n2


def rho_T_spectrum_two_modes(N1, N2, R12, n):
    """Eigenvalues of the n-photon block of rho_T for two modes, ascending."""
    q = np.sqrt((N1 - N2) ** 2 + 4 * abs(R12) ** 2)
    js = np.arange(n + 1) - n / 2
    return sorted(float(v) for v in n / 2 * (N1 + N2) + js * q)


def quantity_Q(rec):
    if rec.m != 2:
        raise ArityError(f"Q is defined for two modes, got m={rec.m}")
    N1, N2 = rec.N
    return float(np.sqrt((N1 - N2) ** 2 + 4 * abs(rec.R(1, 2)) ** 2))


def block1_eigenvalues(gamma, tol=1e-8):
    """Sorted eigenvalues of the coherency matrix (the one-photon block of rho_T)."""
    gamma = np.asarray(gamma, dtype=complex)
    asym = float(np.max(np.abs(gamma - gamma.conj().T))) if gamma.size else 0.0
    if asym > tol:
        raise SymmetryError(f"coherency matrix not Hermitian (max asymmetry {asym:.2e})")
    return sorted(float(v) for v in np.linalg.eigvalsh((gamma + gamma.conj().T) / 2))
