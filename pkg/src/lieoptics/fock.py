"""Fixed-photon-number Fock spaces and multi-photon evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, ShapeError, ZeroProbabilityError
from .transforms import permanent

MAX_FACTORIAL = 20
_FACT_INT = [math.factorial(k) for k in range(MAX_FACTORIAL + 1)]


def _fact_prod(occ):
    out = 1
    for k in occ:
        out *= _FACT_INT[k]
    return out


def _compositions(m, n):
    # descending lexicographic order
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(m - 1, n - first):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    m: int
    n: int
    states: tuple
    index: dict

    def __len__(self):
        return len(self.states)

    @property
    def occupations(self):
        return np.array(self.states, dtype=float).reshape(len(self.states), self.m)

    def __repr__(self):
        return f"FockBasis(m={self.m}, n={self.n}, D={len(self.states)})"


@lru_cache(maxsize=None)
def enumerate_basis(m, n):
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    if n < 0:
        raise DimensionError(f"photon count must be >= 0, got {n}")
    if n > MAX_FACTORIAL:
        raise DimensionError(f"photon count {n} exceeds supported maximum {MAX_FACTORIAL}")
    states = tuple(_compositions(m, n))
    return FockBasis(m, n, states, {s: i for i, s in enumerate(states)})


def _as_occupation(occ):
    occ = tuple(int(k) for k in occ)
    if any(k < 0 for k in occ):
        raise DimensionError(f"occupations must be non-negative, got {occ}")
    if not occ:
        raise DimensionError("occupation vector must cover at least one mode")
    return occ


@dataclass
class PureState:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (len(self.basis),):
            raise ShapeError(
                f"expected {len(self.basis)} amplitudes, got shape {self.amplitudes.shape}"
            )

    @property
    def m(self):
        return self.basis.m

    @property
    def n(self):
        return self.basis.n

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def distribution(self, cutoff=0.0):
        """Output probabilities keyed by occupation tuple."""
        p = self.probabilities()
        return {s: float(q) for s, q in zip(self.basis.states, p) if q > cutoff}

    def normalized(self):
        return PureState(self.basis, self.amplitudes / self.norm)

    def amplitude(self, occ):
        return self.amplitudes[self.basis.index[tuple(occ)]]


def fock_state(occ):
    occ = _as_occupation(occ)
    basis = enumerate_basis(len(occ), sum(occ))
    amps = np.zeros(len(basis), dtype=complex)
    amps[basis.index[occ]] = 1.0
    return PureState(basis, amps)


def superposition(terms):
    """Normalized state from ``{occupation: amplitude}`` sharing m and n."""
    terms = {_as_occupation(k): v for k, v in terms.items()}
    first = next(iter(terms))
    basis = enumerate_basis(len(first), sum(first))
    amps = np.zeros(len(basis), dtype=complex)
    for occ, v in terms.items():
        amps[basis.index[occ]] = v
    return PureState(basis, amps).normalized()


def _repeat_index(occ):
    return [i for i, k in enumerate(occ) for _ in range(k)]


def evolve(U, occ):
    """Output state for Fock input ``occ`` through transfer matrix ``U``.

    A photon entering mode ``k`` leaves in mode ``j`` with amplitude ``U[j, k]``;
    each output amplitude is a permanent of a row/column-repeated submatrix.
    """
    U = np.asarray(U, dtype=complex)
    occ = _as_occupation(occ)
    m = len(occ)
    if U.shape != (m, m):
        raise ShapeError(f"unitary of shape {U.shape} does not act on {m} modes")
    basis = enumerate_basis(m, sum(occ))
    cols = _repeat_index(occ)
    Uc = U[:, cols]
    in_fact = _fact_prod(occ)
    amps = np.empty(len(basis), dtype=complex)
    for idx, out in enumerate(basis.states):
        sub = Uc[_repeat_index(out), :]
        amps[idx] = permanent(sub) / math.sqrt(in_fact * _fact_prod(out))
    return PureState(basis, amps)


def fock_unitary(U, n):
    """Full D x D representation of ``U`` on the n-photon space."""
    U = np.asarray(U, dtype=complex)
    basis = enumerate_basis(U.shape[0], n)
    return np.column_stack([evolve(U, s).amplitudes for s in basis.states])


def apply_unitary(state, U):
    """Evolve an arbitrary superposition (not only a Fock input) through ``U``."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (state.m, state.m):
        raise ShapeError(f"unitary of shape {U.shape} does not act on {state.m} modes")
    out = np.zeros(len(state.basis), dtype=complex)
    for occ, a in zip(state.basis.states, state.amplitudes):
        if a != 0:
            out += a * evolve(U, occ).amplitudes
    return PureState(state.basis, out)


def mean_photon_numbers(state):
    return state.probabilities() @ state.basis.occupations


def prepare_by_postselection(prep, occ, target):
    """Evolve ``occ`` through ``prep`` and keep only the ``target`` outcome.

    Returns the (single-component) prepared state and the heralding
    probability ``|alpha_target|^2``.
    """
    occ, target = _as_occupation(occ), _as_occupation(target)
    if sum(occ) != sum(target) or len(occ) != len(target):
        raise DimensionError(f"input {occ} and target {target} differ in modes or photons")
    out = evolve(prep, occ)
    p = float(abs(out.amplitude(target)) ** 2)
    if p < 1e-14:
        raise ZeroProbabilityError(f"target {target} unreachable from {occ} (p = {p:.2e})")
    return fock_state(target), p


def _apply_op(occ, amp, create, mode):
    k = occ[mode]
    if create:
        amp *= math.sqrt(k + 1)
        k += 1
    else:
        if k == 0:
            return None, 0.0
        amp *= math.sqrt(k)
        k -= 1
    return occ[:mode] + (k,) + occ[mode + 1 :], amp


def apply_word(terms, word):
    """Apply a product of ladder operators to ``{occupation: amplitude}``.

    ``word`` is a sequence of ``(kind, mode)`` with kind ``"+"`` (creation) or
    ``"-"`` (annihilation), 1-based modes, written left to right as in the
    operator product; the rightmost factor acts first. Vanishing branches are
    dropped. The photon number may change.
    """
    out = {}
    for occ, amp in terms.items():
        cur = tuple(occ)
        for kind, mode in reversed(word):
            cur, amp = _apply_op(cur, amp, kind == "+", mode - 1)
            if cur is None:
                break
        if cur is not None:
            out[cur] = out.get(cur, 0) + amp
    return out


def apply_ladder_monomial(state, creators, annihilators):
    """``a^dag_{c1} .. a^dag_{cn} a_{d1} .. a_{dn} |state>`` as an unnormalized vector."""
    if len(creators) != len(annihilators):
        raise ValueError("creators and annihilators must have equal length")
    word = [("+", c) for c in creators] + [("-", d) for d in annihilators]
    terms = {s: a for s, a in zip(state.basis.states, state.amplitudes) if a != 0}
    out = np.zeros(len(state.basis), dtype=complex)
    for occ, amp in apply_word(terms, word).items():
        out[state.basis.index[occ]] += amp
    return out


def expectation_monomial(state, creators, annihilators):
    return complex(np.vdot(state.amplitudes, apply_ladder_monomial(state, creators, annihilators)))
