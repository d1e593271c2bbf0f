"""Pseudo photon-number-resolving detection with a 4-way splitter cascade.

Each output mode j feeds four threshold detectors j_a .. j_d. Detectors are
numbered ``4 * (j - 1) + alpha`` internally (alpha = 0..3) and labelled
``"1a"``, ``"1b"``, ... in files. Only shots where every photon fires its own
detector are kept; a collision on one detector gives a single click and the
shot is discarded.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .errors import EmptyReconstructionError, UndeterminedEfficiencyError, UnresolvableOutcomeError

AUX = 4
AUX_LABELS = "abcd"


def detector_label(d):
    return f"{d // AUX + 1}{AUX_LABELS[d % AUX]}"


def parse_detector(label):
    return AUX * (int(label[:-1]) - 1) + AUX_LABELS.index(label[-1])


def _check_resolvable(outcome):
    if any(k > AUX for k in outcome):
        raise UnresolvableOutcomeError(f"outcome {tuple(outcome)} has more than {AUX} photons in a mode")


def splitter_probability(outcome, exact=False):
    """Probability of one particular all-distinct-detector sub-event of ``outcome``."""
    _check_resolvable(outcome)
    p = Fraction(1, AUX ** sum(outcome)) * math.prod(math.factorial(k) for k in outcome)
    return p if exact else float(p)


def subevent_count(outcome):
    _check_resolvable(outcome)
    return math.prod(math.comb(AUX, k) for k in outcome)


def correction_factor(outcome, exact=False):
    """Inverse of the total probability that ``outcome`` registers as n distinct clicks."""
    _check_resolvable(outcome)
    total = Fraction(1, AUX ** sum(outcome)) * math.prod(
        math.comb(AUX, k) * math.factorial(k) for k in outcome
    )
    f = 1 / total
    return f if exact else float(f)


def compatible_events(outcome):
    """All detector sets (sorted tuples) that register ``outcome`` with n distinct clicks."""
    _check_resolvable(outcome)
    per_mode = [
        [tuple(AUX * j + a for a in c) for c in combinations(range(AUX), k)]
        for j, k in enumerate(outcome)
    ]
    return [tuple(sorted(sum(parts, ()))) for parts in product(*per_mode)]


def event_outcome(event, m):
    return tuple(int(v) for v in np.bincount(np.asarray(event, dtype=int) // AUX, minlength=m))


@dataclass
class ClickTally:
    m: int
    shots: int = 0
    counts: dict = field(default_factory=dict)

    def merge(self, other):
        if other.m != self.m:
            raise ValueError("cannot merge tallies over different mode counts")
        counts = dict(self.counts)
        for k, v in other.counts.items():
            counts[k] = counts.get(k, 0) + v
        return ClickTally(self.m, self.shots + other.shots, counts)

    @property
    def photon_numbers(self):
        return sorted({len(k) for k in self.counts})

    def scaled(self, factor):
        return ClickTally(self.m, self.shots * factor, {k: v * factor for k, v in self.counts.items()})


def ideal_efficiencies(m):
    return np.ones(AUX * m)


def _check_eta(eta, m):
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (AUX * m,):
        raise ValueError(f"need {AUX * m} efficiencies for m={m}, got shape {eta.shape}")
    if np.any(eta < 0):
        raise ValueError("efficiencies must be non-negative")
    return eta


def _simulate_shard(outcomes, probs, eta, shots, seed, m):
    rng = np.random.default_rng(seed)
    base = AUX * m
    keys, lengths = [], []
    for outcome, c in zip(outcomes, rng.multinomial(shots, probs)):
        n = sum(outcome)
        if c == 0 or n == 0:
            continue
        modes = np.repeat(np.arange(m), outcome)
        det = AUX * modes + rng.integers(0, AUX, size=(c, n))
        fired = rng.random((c, n)) < eta[det]
        det.sort(axis=1)
        keep = fired.all(axis=1)
        if n > 1:
            keep &= (np.diff(det, axis=1) > 0).all(axis=1)
        det = det[keep]
        keys.append(det @ (base ** np.arange(n)))
        lengths.append(np.full(len(det), n))
    tally = ClickTally(m, shots)
    if keys:
        # pack the event length below the detector digits so one 1-d unique suffices
        packed = np.concatenate(keys) * 64 + np.concatenate(lengths)
        uk, cnt = np.unique(packed, return_counts=True)
        for code, c in zip(uk.tolist(), cnt.tolist()):
            n, key = code % 64, code // 64
            tally.counts[tuple((key // base**i) % base for i in range(n))] = c
    return tally


def simulate_clicks(dist, eta, shots, seed, workers=1):
    """Monte-Carlo click statistics for a photon-number distribution.

    Shots are split over ``workers`` shards; shard ``w`` draws from seed
    ``seed ^ w`` so the merged tally depends on the worker count but never on
    scheduling.
    """
    outcomes = [tuple(int(k) for k in o) for o in dist]
    probs = np.array([dist[o] for o in dist], dtype=float)
    if abs(probs.sum() - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
    probs = np.clip(probs, 0, None)
    probs /= probs.sum()
    m = len(outcomes[0])
    eta = _check_eta(eta, m)
    sizes = [shots // workers + (1 if w < shots % workers else 0) for w in range(workers)]
    args = [(outcomes, probs, eta, s, seed ^ w, m) for w, s in enumerate(sizes)]
    if workers == 1:
        shards = [_simulate_shard(*args[0])]
    else:
        with ThreadPoolExecutor(workers) as pool:
            shards = list(pool.map(lambda a: _simulate_shard(*a), args))
    tally = ClickTally(m)
    for s in shards:
        tally = tally.merge(s)
    return tally


def estimate_efficiencies(tally, reference):
    """Per-detector efficiency from a single-photon calibration run.

    ``reference`` maps single-photon outcomes to their known probabilities;
    each detector should then see a share ``p_mode / 4`` of the shots.
    """
    m = tally.m
    expected = np.zeros(AUX * m)
    for outcome, p in reference.items():
        if sum(outcome) != 1:
            raise ValueError(f"calibration reference must be single-photon, got {outcome}")
        j = list(outcome).index(1)
        expected[AUX * j : AUX * j + AUX] += p / AUX
    observed = np.zeros(AUX * m)
    for event, c in tally.counts.items():
        if len(event) == 1:
            observed[event[0]] += c
    if tally.shots <= 0:
        raise UndeterminedEfficiencyError("calibration tally has no shots")
    bad = [detector_label(d) for d in range(AUX * m) if expected[d] <= 0 or observed[d] <= 0]
    if bad:
        raise UndeterminedEfficiencyError(f"no calibration signal for detectors {', '.join(bad)}")
    return np.minimum(observed / (tally.shots * expected), 1.0)


def reconstruct_distribution(tally, eta, universe=None):
    """Photon-number distribution from n-fold distinct-click counts.

    Each event count is divided by the product of its detectors'
    efficiencies, summed per outcome, multiplied by that outcome's correction
    factor and normalized. ``universe`` lists outcomes to report even if
    unobserved.
    """
    m = tally.m
    eta = _check_eta(eta, m)
    acc = {}
    for event, c in tally.counts.items():
        if c <= 0:
            continue
        w = c / np.prod(eta[list(event)])
        o = event_outcome(event, m)
        acc[o] = acc.get(o, 0.0) + w
    if not acc:
        raise EmptyReconstructionError("tally contains no n-fold distinct-click events")
    est = {o: float(w) * correction_factor(o) for o, w in acc.items()}
    total = sum(est.values())
    out = {o: v / total for o, v in sorted(est.items(), reverse=True)}
    if universe is not None:
        out = {tuple(o): out.get(tuple(o), 0.0) for o in universe} | out
    return out


def _elementary_symmetric(values, k):
    return sum(math.prod(c) for c in combinations(values, k))


def expected_reconstruction(dist, eta_true, eta_assumed):
    """Infinite-shot limit of simulate_clicks followed by reconstruct_distribution.

    Outcomes the cascade cannot resolve (more than four photons in a mode)
    never register and drop out.
    """
    ratio = np.asarray(eta_true, dtype=float) / np.asarray(eta_assumed, dtype=float)
    est = {}
    for o, p in dist.items():
        if p == 0 or any(k > AUX for k in o):
            continue
        w = 1.0
        for j, k in enumerate(o):
            w *= _elementary_symmetric(ratio[AUX * j : AUX * j + AUX], k) / math.comb(AUX, k)
        est[tuple(o)] = float(p * w)
    total = sum(est.values())
    if total <= 0:
        raise EmptyReconstructionError("no resolvable outcome has nonzero probability")
    return {o: v / total for o, v in est.items()}
