"""Config-driven sweeps over Haar-random unitaries.

Every unitary gets its own ``SeedSequence([seed, index])``, so rows do not
depend on worker count or scheduling order. Each of the m^2 observable
settings is an independent run with its own child seed.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    EmptyReconstructionError,
    UnresolvableOutcomeError,
    ZeroProbabilityError,
)
from .fock import evolve, prepare_by_postselection
from .invariants import (
    block1_eigenvalues,
    coherency_from_expectations,
    invariant_I,
    lie_basis,
    measurement_stage,
    quantity_Q,
    record_from_means,
)
from .noise import (
    NoiseConfig,
    distinguishable_probabilities,
    multiphoton_mixture,
    perturb_efficiencies,
    uniform_gram,
)
from .pnr import AUX, expected_reconstruction, reconstruct_distribution, simulate_clicks
from .transforms import MeshCell, MeshSettings, haar_random_unitary, mesh_compose

MODES = ("exact", "montecarlo")
HIST_BINS = 20
# spawn key separating the shared calibration realization from per-unitary streams
_CALIB_KEY = 2**32 - 1


@dataclass(frozen=True)
class CampaignConfig:
    m: int
    input: tuple
    num_unitaries: int = 100
    mode: str = "exact"
    shots: int = 100_000
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    seed: int | None = None
    preparation: bool | None = None  # None: only when some input mode holds > 1 photon
    workers: int = 1
    outputs: str | None = None
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "input", tuple(int(k) for k in self.input))
        if len(self.input) != self.m:
            raise DimensionError(f"input {self.input} does not have m={self.m} entries")
        if self.n is not None and self.n != sum(self.input):
            raise DimensionError(f"input total {sum(self.input)} != n={self.n}")
        if self.num_unitaries < 1:
            raise ValueError("num_unitaries must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "montecarlo":
            if self.shots < 1:
                raise ValueError("montecarlo mode needs shots >= 1")
            if self.seed is None:
                raise ValueError("montecarlo mode needs an explicit seed (--seed)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        nz = self.noise
        if nz.indistinguishability < 1 and (nz.g2 > 0 or nz.transmission < 1):
            raise ValueError("distinguishability cannot be combined with multi-photon noise")

    @property
    def total_photons(self):
        return sum(self.input)

    @property
    def master_seed(self):
        return 0 if self.seed is None else int(self.seed)

    @property
    def needs_preparation(self):
        if self.preparation is None:
            return any(k > 1 for k in self.input)
        return self.preparation

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["input"] = list(self.input)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        noise = NoiseConfig(**d.pop("noise", {}) or {})
        return cls(noise=noise, **d)


@dataclass
class CampaignRow:
    index: int
    unitary: np.ndarray
    I: float = float("nan")
    Q: float | None = None
    eigenvalues: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    tv: float = float("nan")
    residuals: list = field(default_factory=list)
    herald: float = 1.0
    error: str = ""

    @property
    def ok(self):
        return not self.error


@dataclass
class CampaignReport:
    config: CampaignConfig
    rows: list
    summary: dict


# --- preparation stage ------------------------------------------------------


def _preparation_candidates(m):
    k = np.arange(m)
    yield np.exp(2j * np.pi * np.outer(k, k) / m) / np.sqrt(m)
    for depth in range(1, 2 * m + 1):
        cells = [
            MeshCell(layer, j, np.pi / 2, 0.0)
            for layer in range(1, depth + 1)
            for j in range(1 + (layer + 1) % 2, m, 2)
        ]
        yield mesh_compose(MeshSettings(m, cells))
    for s in range(64):
        yield haar_random_unitary(m, s)


def find_preparation(target, min_probability=1e-6):
    """Interferometer and single-photon source placement heralding ``target``.

    Single photons enter the first n modes; the first candidate (discrete
    Fourier transform, balanced brickwork meshes of growing depth, then fixed
    Haar draws) with heralding probability above ``min_probability`` wins.
    """
    target = tuple(int(k) for k in target)
    m, n = len(target), sum(target)
    if n > m:
        raise DimensionError(f"cannot herald {n} photons from single photons in {m} modes")
    source = (1,) * n + (0,) * (m - n)
    for prep in _preparation_candidates(m):
        try:
            _, p = prepare_by_postselection(prep, source, target)
        except ZeroProbabilityError:
            continue
        if p >= min_probability:
            return prep, source, p
    raise ZeroProbabilityError(f"no preparation stage found for {target}")


# --- per-unitary run ----------------------------------------------------------


def tv_to_ideal(reconstructed, ideal):
    keys = set(reconstructed) | set(ideal)
    return 0.5 * sum(abs(reconstructed.get(k, 0.0) - ideal.get(k, 0.0)) for k in keys)


def _mean_numbers(dist, m):
    means = np.zeros(m)
    for t, p in dist.items():
        means += p * np.asarray(t, dtype=float)
    return means


def _calibration(cfg, seed_seq):
    """Assumed detector efficiencies (true ones are ideal)."""
    nz = cfg.noise
    ones = np.ones(AUX * cfg.m)
    if nz.calib_sigma == 0:
        return ones
    if nz.fixed_realization:
        base = cfg.master_seed if nz.seed is None else nz.seed
        seed_seq = np.random.SeedSequence([base, _CALIB_KEY])
    return perturb_efficiencies(ones, nz.calib_sigma, seed_seq)


def _setting_distribution(cfg, T, gram):
    nz = cfg.noise
    if nz.g2 > 0 or nz.transmission < 1:
        return multiphoton_mixture(T, cfg.input, nz.g2, nz.postselect, nz.transmission)
    if gram is not None:
        return distinguishable_probabilities(T, cfg.input, gram)
    return evolve(T, cfg.input).distribution()


def measure_unitary(cfg, U, setting_seeds, eta_assumed):
    """Run all m^2 settings for one unitary; returns the record and the
    measured distribution behind each setting."""
    m = cfg.m
    ones = np.ones(AUX * m)
    nz = cfg.noise
    gram = uniform_gram(cfg.total_photons, nz.indistinguishability) if nz.indistinguishability < 1 else None
    means, measured = {}, {}
    for b, s_ss in zip(lie_basis(m), setting_seeds):
        stage, _ = measurement_stage(m, b, nz.reflectivity)
        dist = _setting_distribution(cfg, stage @ U, gram)
        if cfg.mode == "exact":
            if nz.calib_sigma > 0:
                dist = expected_reconstruction(dist, ones, eta_assumed)
        else:
            seed = int(s_ss.generate_state(1)[0])
            tally = simulate_clicks(dist, ones, cfg.shots, seed)
            dist = reconstruct_distribution(tally, eta_assumed)
        measured[b] = dist
        means[b] = _mean_numbers(dist, m)
    return record_from_means(m, means), measured


def run_unitary(cfg, index, eta_assumed=None, U=None):
    m = cfg.m
    ss = np.random.SeedSequence([cfg.master_seed, index])
    u_ss, calib_ss, *setting_ss = ss.spawn(2 + m * m)
    if U is None:
        U = haar_random_unitary(m, u_ss)
    row = CampaignRow(index, U)
    try:
        if cfg.needs_preparation:
            row.herald = find_preparation(cfg.input)[2]
        if eta_assumed is None:
            eta_assumed = _calibration(cfg, calib_ss)
        rec, measured = measure_unitary(cfg, U, setting_ss, eta_assumed)
        row.I = invariant_I(rec)
        row.Q = quantity_Q(rec) if m == 2 else None
        row.eigenvalues = block1_eigenvalues(coherency_from_expectations(rec))
        row.expectations = [float(v) for v in rec.values]
        ideal = evolve(U, cfg.input).distribution()
        row.tv = tv_to_ideal(measured[lie_basis(m)[0]], ideal)
        heis = np.abs(U) ** 2 @ np.asarray(cfg.input, dtype=float)
        row.residuals = [float(v) for v in rec.N - heis]
    except (EmptyReconstructionError, UnresolvableOutcomeError, ZeroProbabilityError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _run_index(args):
    cfg, index, eta = args
    return run_unitary(cfg, index, eta)


# --- aggregation --------------------------------------------------------------


def _stats(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return None, None
    return float(np.mean(v)), float(np.std(v))


def summarize(cfg, rows):
    good = [r for r in rows if r.ok]
    s = {"num_rows": len(rows), "num_failed": len(rows) - len(good)}
    s["I_mean"], s["I_std"] = _stats([r.I for r in good])
    s["I_expected"] = float(sum(k * k for k in cfg.input))
    if cfg.m == 2:
        s["Q_mean"], s["Q_std"] = _stats([r.Q for r in good])
    eig = np.array([r.eigenvalues for r in good]).reshape(len(good), cfg.m)
    s["eigenvalue_mean"] = [_stats(eig[:, i])[0] for i in range(cfg.m)]
    s["eigenvalue_std"] = [_stats(eig[:, i])[1] for i in range(cfg.m)]
    s["fidelity_mean"], s["fidelity_std"] = _stats([1 - r.tv for r in good])
    res = [v for r in good for v in r.residuals]
    s["residual_mean"], s["residual_std"] = _stats(res)
    s["residual_max_abs"] = float(np.max(np.abs(res))) if res else None
    return s


def heisenberg_residuals(report, bins=HIST_BINS):
    """Residuals <n_j> - sum_k |U_jk|^2 n_k over all (unitary, mode) pairs, and their histogram."""
    res = np.array([v for r in report.rows if r.ok for v in r.residuals])
    return res, _histogram(res, bins)


def run_campaign(cfg):
    eta = None
    if cfg.noise.calib_sigma > 0 and cfg.noise.fixed_realization:
        eta = _calibration(cfg, None)
    args = [(cfg, i, eta) for i in range(cfg.num_unitaries)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_run_index, args, chunksize=max(1, len(args) // (4 * cfg.workers))))
    else:
        rows = [_run_index(a) for a in args]
    return CampaignReport(cfg, rows, summarize(cfg, rows))


# --- report files -------------------------------------------------------------


def _histogram(values, bins=HIST_BINS):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"edges": [], "counts": []}
    lo, hi = float(v.min()), float(v.max())
    # exact-mode columns are often constant up to rounding; give them a finite window
    pad = 1e-9 * max(1.0, abs(lo), abs(hi))
    if hi - lo < pad:
        lo, hi = lo - pad, hi + pad
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def row_header(m):
    names = [str(b) for b in lie_basis(m)]
    return (
        ["index", "error", "herald", "I", "Q", "tv"]
        + [f"eig{i + 1}" for i in range(m)]
        + names
        + [f"res{j + 1}" for j in range(m)]
    )


def rows_csv(report):
    m = report.config.m
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(row_header(m))
    for r in report.rows:
        pad = lambda xs, k: list(xs) if xs else [None] * k  # noqa: E731
        w.writerow(
            [r.index, r.error, _fmt(r.herald), _fmt(r.I), _fmt(r.Q), _fmt(r.tv)]
            + [_fmt(v) for v in pad(r.eigenvalues, m)]
            + [_fmt(v) for v in pad(r.expectations, m * m)]
            + [_fmt(v) for v in pad(r.residuals, m)]
        )
    return buf.getvalue()


def histograms(report):
    good = [r for r in report.rows if r.ok]
    m = report.config.m
    h = {"I": _histogram([r.I for r in good])}
    if m == 2:
        h["Q"] = _histogram([r.Q for r in good])
    for i in range(m):
        h[f"eig{i + 1}"] = _histogram([r.eigenvalues[i] for r in good])
    for k, b in enumerate(lie_basis(m)):
        h[f"expectation_{b}"] = _histogram([r.expectations[k] for r in good])
    h["residual"] = heisenberg_residuals(report)[1]
    return h


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


REPORT_FILES = {
    "rows": "rows.csv",
    "summary": "summary.json",
    "histograms": "histograms.json",
    "unitaries": "unitaries.json",
}


def emit_report(report, outdir, formats=("rows", "summary", "histograms")):
    """Write the requested report files into ``outdir``; returns their paths."""
    unknown = set(formats) - set(REPORT_FILES)
    if unknown:
        raise ValueError(f"unknown report formats {sorted(unknown)}")
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {outdir}: {exc}") from exc
    content = {
        "rows": lambda: rows_csv(report),
        "summary": lambda: _dumps({"config": report.config.to_dict(), "summary": report.summary}),
        "histograms": lambda: _dumps(histograms(report)),
        "unitaries": lambda: _dumps(
            {str(r.index): {"re": r.unitary.real.tolist(), "im": r.unitary.imag.tolist()} for r in report.rows}
        ),
    }
    paths = []
    for fmt in sorted(formats):
        path = os.path.join(outdir, REPORT_FILES[fmt])
        try:
            with open(path, "w") as fh:
                fh.write(content[fmt]())
        except OSError as exc:
            raise OSError(f"cannot write report file {path}: {exc}") from exc
        paths.append(path)
    return paths
