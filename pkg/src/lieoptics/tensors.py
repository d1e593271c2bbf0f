"""Higher-order correlation tensors and their unfolded-matrix invariants.

Gamma^(n)(s_1..s_2n) = <a^dag_{s_1} .. a^dag_{s_n} a_{s_{n+1}} .. a_{s_2n}>, stored
densely as an array of shape ``(m,) * 2n`` with 0-based axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .errors import CapacityError, ShapeError
from .fock import expectation_monomial

MAX_ORDER = 3


@dataclass(frozen=True)
class CorrelationTensor:
    m: int
    order: int
    entries: np.ndarray

    def __post_init__(self):
        if self.entries.shape != (self.m,) * (2 * self.order):
            raise ShapeError(f"entries shape {self.entries.shape} != (m,)*2n")


def correlation_tensor(state, order):
    if not 1 <= order <= MAX_ORDER:
        raise CapacityError(f"order must be in 1..{MAX_ORDER}, got {order}")
    m = state.m
    out = np.zeros((m,) * (2 * order), dtype=complex)
    if order > state.n:
        return CorrelationTensor(m, order, out)
    modes = range(1, m + 1)
    # fill one representative per pair of sorted index groups, then symmetrize
    groups = [g for g in product(modes, repeat=order) if list(g) == sorted(g)]
    for left in groups:
        for right in groups:
            val = expectation_monomial(state, list(left), list(right))
            if val == 0:
                continue
            for lp in set(permutations(left)):
                for rp in set(permutations(right)):
                    out[tuple(i - 1 for i in lp + rp)] = val
    return CorrelationTensor(m, order, out)


def transform_tensor(t, U):
    """Contract ``order`` factors of U on the creation slots and of U^* on the rest.

    With ``fock.evolve``'s transfer-matrix convention,
    ``correlation_tensor(evolve(conj(U), psi))`` equals this applied to the
    tensor of ``psi``.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (t.m, t.m):
        raise ShapeError(f"unitary {U.shape} does not match tensor with m={t.m}")
    out = t.entries
    n = t.order
    for axis in range(2 * n):
        M = U if axis < n else U.conj()
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [axis])), 0, axis)
    return CorrelationTensor(t.m, n, out)


def tensor_frobenius(t):
    return float(np.sum(np.abs(t.entries) ** 2))


def unfold(t, permutation=None):
    """Matrix of side m^n: row from the creation indices, column from the rest.

    Row index is s_1..s_n read as base-m digits with s_1 most significant
    (after applying ``permutation`` to both index groups).
    """
    n = t.order
    perm = list(range(n)) if permutation is None else list(permutation)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of {n} slots: {permutation}")
    axes = perm + [n + p for p in perm]
    side = t.m**n
    return t.entries.transpose(axes).reshape(side, side)


def _cyclic_shift_matrix(m, n):
    # maps digit tuple (s_1 .. s_n) to (s_2 .. s_n, s_1)
    side = m**n
    P = np.zeros((side, side))
    for h, digits in enumerate(product(range(m), repeat=n)):
        shifted = digits[1:] + digits[:1]
        P[np.ravel_multi_index(shifted, (m,) * n), h] = 1
    return P


def unfolding_basis_change(U, order):
    """V with unfold(transform_tensor(t, U)) = V unfold(t) V^dag.

    Built as n alternations of the block-diagonal copy of U (acting on the
    least significant digit) with a cyclic digit shift.
    """
    U = np.asarray(U, dtype=complex)
    m = U.shape[0]
    UB = np.kron(np.eye(m ** (order - 1)), U)
    PS = _cyclic_shift_matrix(m, order)
    V = np.eye(m**order, dtype=complex)
    for _ in range(order):
        V = PS @ UB @ V
    return V


def unfolded_eigenvalues(t, permutation=None):
    M = unfold(t, permutation)
    return sorted(float(v) for v in np.linalg.eigvalsh((M + M.conj().T) / 2))
