"""Imperfection channels: partial distinguishability, multi-photon emission,
coupler reflectivity error and detector-calibration error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .errors import InvalidGramError
from .fock import _repeat_index, evolve
from .invariants import lie_basis, measurement_stage, record_from_means

GRAM_TOL = 1e-8


@dataclass(frozen=True)
class NoiseConfig:
    """All fields default to a noiseless setup."""

    indistinguishability: float = 1.0
    g2: float = 0.0
    reflectivity: float = 0.5
    calib_sigma: float = 0.0
    postselect: bool = False
    transmission: float = 1.0
    fixed_realization: bool = True
    seed: int | None = None

    def __post_init__(self):
        if not 0 <= self.indistinguishability <= 1:
            raise ValueError(f"indistinguishability must lie in [0, 1], got {self.indistinguishability}")
        if not 0 <= self.g2 <= 0.1:
            raise ValueError(f"g2 must lie in [0, 0.1], got {self.g2}")
        if not 0 < self.reflectivity < 1:
            raise ValueError(f"reflectivity must lie in (0, 1), got {self.reflectivity}")
        if self.calib_sigma < 0:
            raise ValueError(f"calib_sigma must be >= 0, got {self.calib_sigma}")
        if not 0 < self.transmission <= 1:
            raise ValueError(f"transmission must lie in (0, 1], got {self.transmission}")

    @property
    def is_ideal(self):
        return (
            self.indistinguishability == 1
            and self.g2 == 0
            and self.reflectivity == 0.5
            and self.calib_sigma == 0
            and self.transmission == 1
        )


# --- partial distinguishability -------------------------------------------


def validate_gram(S, n=None):
    S = np.asarray(S, dtype=complex)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidGramError(f"Gram matrix must be square, got shape {S.shape}")
    if n is not None and S.shape[0] != n:
        raise InvalidGramError(f"Gram matrix is {S.shape[0]}x{S.shape[0]} but there are {n} photons")
    if np.max(np.abs(S - S.conj().T), initial=0) > GRAM_TOL:
        raise InvalidGramError("Gram matrix is not Hermitian")
    if np.max(np.abs(np.diag(S) - 1), initial=0) > GRAM_TOL:
        raise InvalidGramError("Gram matrix must have unit diagonal")
    low = float(np.linalg.eigvalsh((S + S.conj().T) / 2).min()) if S.size else 0.0
    if low < -GRAM_TOL:
        raise InvalidGramError(f"Gram matrix is not positive semidefinite (min eigenvalue {low:.2e})")
    return S


def gram_vectors(S):
    """Rows v_i with <v_i|v_j> = S_ij."""
    lam, W = np.linalg.eigh((S + S.conj().T) / 2)
    return W.conj() * np.sqrt(np.clip(lam, 0, None))


def uniform_gram(n, x):
    S = np.full((n, n), float(x), dtype=complex)
    np.fill_diagonal(S, 1)
    return S


def gram_from_visibilities(V):
    """Real Gram matrix with |S_ij|^2 equal to the pairwise HOM visibilities."""
    V = np.asarray(V, dtype=float)
    S = np.sqrt(np.clip(V, 0, 1)).astype(complex)
    np.fill_diagonal(S, 1)
    return S


def random_gram(n, seed, rank=None):
    """Random valid Gram matrix from normalized complex Gaussian vectors."""
    rng = np.random.default_rng(seed)
    r = n if rank is None else rank
    v = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v.conj() @ v.T


def _expand_product(factors):
    # factors: list of {expanded_mode: coefficient}; returns {sorted modes: coefficient}
    out = {(): 1.0 + 0j}
    for f in factors:
        nxt = {}
        for key, c in out.items():
            for mode, a in f.items():
                k = tuple(sorted(key + (mode,)))
                nxt[k] = nxt.get(k, 0) + c * a
        out = {k: v for k, v in nxt.items() if abs(v) > 1e-15}
    return out


def _fock_weight(key):
    # a^dag^k |0> = sqrt(k!) |k>, so |coefficient|^2 picks up prod k!
    counts = {}
    for mode in key:
        counts[mode] = counts.get(mode, 0) + 1
    return math.prod(math.factorial(k) for k in counts.values())


def distinguishable_probabilities(U, occ, S):
    """Output distribution for photons whose internal states have Gram matrix S.

    Photon i carries internal vector v_i; the state prod_i (sum_a v_ia
    a^dag_{mode_i, a}) |0> is propagated through U (identity on the internal
    label) and the internal labels are traced out.
    """
    U = np.asarray(U, dtype=complex)
    m = U.shape[0]
    modes = _repeat_index(occ)
    n = len(modes)
    S = validate_gram(S, n)
    if n == 0:
        return {tuple(occ): 1.0}
    V = gram_vectors(S)
    r = V.shape[1]
    out_factors = []
    in_factors = []
    for i, src in enumerate(modes):
        in_factors.append({src * r + a: V[i, a] for a in range(r) if V[i, a] != 0})
        out_factors.append(
            {j * r + a: U[j, src] * V[i, a] for j in range(m) for a in range(r) if U[j, src] * V[i, a] != 0}
        )
    norm = sum(abs(c) ** 2 * _fock_weight(k) for k, c in _expand_product(in_factors).items())
    probs = {}
    for key, c in _expand_product(out_factors).items():
        t = [0] * m
        for mode in key:
            t[mode // r] += 1
        t = tuple(t)
        probs[t] = probs.get(t, 0.0) + float(abs(c) ** 2 * _fock_weight(key) / norm)
    return probs


def classical_distribution(U, occ):
    """Fully distinguishable photons: independent routing with probabilities |U_jk|^2."""
    P = np.abs(np.asarray(U)) ** 2
    m = P.shape[0]
    probs = {}
    for route in product(range(m), repeat=sum(occ)):
        w = 1.0
        for out, src in zip(route, _repeat_index(occ)):
            w *= P[out, src]
        t = tuple(np.bincount(route, minlength=m).tolist())
        probs[t] = probs.get(t, 0.0) + w
    return probs


# --- multi-photon contamination -------------------------------------------


def p2_from_g2(g2):
    """Two-photon emission probability p with 2p/(1+p)^2 = g2."""
    if g2 == 0:
        return 0.0
    return ((1 - g2) - math.sqrt(1 - 2 * g2)) / g2


def _thin(dist, transmission):
    if transmission == 1:
        return dict(dist)
    out = {}
    for t, p in dist.items():
        for kept in product(*(range(k + 1) for k in t)):
            w = p
            for k, s in zip(t, kept):
                w *= math.comb(k, s) * transmission**s * (1 - transmission) ** (k - s)
            out[kept] = out.get(kept, 0.0) + w
    return out


def multiphoton_mixture(U, occ, g2, postselect=False, transmission=1.0):
    """Output distribution when every occupied input mode may emit one extra photon.

    Each occupied mode independently carries an extra (indistinguishable)
    photon with probability p from ``p2_from_g2``. Balanced loss is applied as
    binomial thinning; post-selection keeps only the nominal photon total.
    """
    occ = tuple(int(k) for k in occ)
    n = sum(occ)
    if g2 == 0 and transmission == 1:
        return {t: q for t, q in evolve(U, occ).distribution().items() if q > 0}
    p = p2_from_g2(g2)
    occupied = [j for j, k in enumerate(occ) if k > 0]
    mix = {}
    for r in range(len(occupied) + 1):
        for extra in combinations(occupied, r):
            w = p**r * (1 - p) ** (len(occupied) - r)
            if w == 0:
                continue
            inp = list(occ)
            for j in extra:
                inp[j] += 1
            for t, q in evolve(U, inp).distribution().items():
                mix[t] = mix.get(t, 0.0) + w * q
    mix = _thin(mix, transmission)
    if postselect:
        mix = {t: q for t, q in mix.items() if sum(t) == n}
    total = sum(mix.values())
    return {t: q / total for t, q in mix.items() if q > 0}


# --- measurement-stage and detector miscalibration ------------------------


def miscalibrated_measurement(U, R):
    """Transfer matrix (stage @ U) and readout modes for every setting, with
    all measurement-stage couplers at reflectivity R."""
    U = np.asarray(U, dtype=complex)
    out = {}
    for b in lie_basis(U.shape[0]):
        stage, readout = measurement_stage(U.shape[0], b, R)
        out[b] = (stage @ U, readout)
    return out


def perturb_efficiencies(eta, sigma, seed):
    """Multiply each efficiency by an independent N(1, sigma) draw, clipped to (0, 1.5]."""
    eta = np.asarray(eta, dtype=float)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return eta.copy()
    draw = np.random.default_rng(seed).normal(1.0, sigma, size=eta.shape)
    return np.clip(eta * draw, 1e-6, 1.5)


# --- convenience: records under noise ---------------------------------------


def _mean_numbers(dist, m):
    means = np.zeros(m)
    for t, p in dist.items():
        means += p * np.asarray(t, dtype=float)
    return means


def distinguishable_record(U, occ, S, reflectivity=0.5):
    """Expectation record obtained through the measurement circuits for
    partially distinguishable photons."""
    m = len(occ)
    means = {
        b: _mean_numbers(distinguishable_probabilities(T, occ, S), m)
        for b, (T, _) in miscalibrated_measurement(U, reflectivity).items()
    }
    return record_from_means(m, means)


def mixture_record(U, occ, g2, postselect=False, transmission=1.0, reflectivity=0.5):
    m = len(occ)
    means = {
        b: _mean_numbers(multiphoton_mixture(T, occ, g2, postselect, transmission), m)
        for b, (T, _) in miscalibrated_measurement(U, reflectivity).items()
    }
    return record_from_means(m, means)
