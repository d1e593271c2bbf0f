"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line."""

import json
import os

import numpy as np
import pytest

from lieoptics.campaign import CampaignConfig, emit_report, heisenberg_residuals, run_campaign
from lieoptics.fock import PureState, enumerate_basis, evolve, fock_state
from lieoptics.invariants import (
    block1_eigenvalues,
    coherency_from_expectations,
    invariant_I,
    measure_expectations_circuit,
    measure_expectations_direct,
    quantity_Q,
)
from lieoptics.noise import NoiseConfig, distinguishable_probabilities, distinguishable_record, random_gram
from lieoptics.pnr import (
    correction_factor,
    ideal_efficiencies,
    reconstruct_distribution,
    simulate_clicks,
    splitter_probability,
    subevent_count,
)
from lieoptics.tensors import (
    correlation_tensor,
    tensor_frobenius,
    transform_tensor,
    unfold,
    unfolded_eigenvalues,
    unfolding_basis_change,
)
from lieoptics.transforms import haar_random_unitary
from oracles import tv

TABLE_INPUTS = [
    (1, 1),
    (1, 1, 0),
    (0, 1, 1, 0),
    (1, 1, 1),
    (1, 1, 1, 0),
    (1, 1, 1, 1),
    (0, 2),
    (1, 0, 2),
    (0, 3, 0),
]


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def exact_reports():
    return {occ: run_campaign(CampaignConfig(len(occ), occ, num_unitaries=100, seed=2024)) for occ in TABLE_INPUTS}


def test_criterion_1_exact_invariance(exact_reports, verdict):
    worst = 0.0
    for occ, rep in exact_reports.items():
        assert all(r.ok for r in rep.rows)
        target = sum(k * k for k in occ)
        worst = max(worst, max(abs(r.I - target) for r in rep.rows))
    verdict(1, worst < 1e-9, f"max |I - sum s^2| = {worst:.2e} over {len(TABLE_INPUTS)} configs x 100 U (tol 1e-9)")


def test_criterion_2_montecarlo_table(verdict):
    means = {}
    for occ in [(1, 1), (1, 1, 1)]:
        cfg = CampaignConfig(len(occ), occ, num_unitaries=100, mode="montecarlo", shots=100_000, seed=7)
        means[occ] = run_campaign(cfg).summary["I_mean"]
    ok = 1.95 <= means[(1, 1)] <= 2.05 and 2.9 <= means[(1, 1, 1)] <= 3.1
    verdict(2, ok, f"mean I (1,1) = {means[(1, 1)]:.4f} in [1.95, 2.05]; (1,1,1) = {means[(1, 1, 1)]:.4f} in [2.9, 3.1]")


def test_criterion_3_spectral(verdict):
    q11 = q20 = eig = 0.0
    expected = {(1, 1, 0): [0, 1, 1], (1, 1, 1): [1, 1, 1], (1, 0, 2): [0, 1, 2], (0, 3, 0): [0, 0, 3]}
    for s in range(100):
        U2 = haar_random_unitary(2, s)
        q11 = max(q11, abs(quantity_Q(measure_expectations_circuit(evolve(U2, (1, 1))))))
        q20 = max(q20, abs(quantity_Q(measure_expectations_circuit(evolve(U2, (2, 0)))) - 2))
        U3 = haar_random_unitary(3, s)
        for occ, ev in expected.items():
            got = block1_eigenvalues(coherency_from_expectations(measure_expectations_circuit(evolve(U3, occ))))
            eig = max(eig, float(np.max(np.abs(np.subtract(got, ev)))))
    ok = q11 < 1e-9 and q20 < 1e-9 and eig < 1e-9
    verdict(3, ok, f"|Q| (1,1) {q11:.1e}, |Q-2| (2,0) {q20:.1e}, eigenvalue error {eig:.1e} (tol 1e-9)")


def test_criterion_4_Q_identity(verdict):
    worst = 0.0
    rng = np.random.default_rng(4)
    for s in range(1000):
        b = enumerate_basis(2, 1 + s % 4)
        a = rng.standard_normal(len(b)) + 1j * rng.standard_normal(len(b))
        rec = measure_expectations_direct(PureState(b, a / np.linalg.norm(a)))
        worst = max(worst, abs(quantity_Q(rec) ** 2 - (2 * invariant_I(rec) - rec.N.sum() ** 2)))
    verdict(4, worst < 1e-9, f"max |Q^2 - (2I - N^2)| = {worst:.2e} over 1000 states (tol 1e-9)")


def test_criterion_5_distinguishability(verdict):
    occ = (1, 1, 1)
    worst, max_diff = 0.0, 0.0
    for g in range(20):
        S = random_gram(3, 500 + g)
        for u in range(20):
            U = haar_random_unitary(3, u)
            worst = max(worst, abs(invariant_I(distinguishable_record(U, occ, S)) - 3))
            p = distinguishable_probabilities(U, occ, S)
            q = evolve(U, occ).distribution()
            max_diff = max(max_diff, max(abs(p.get(k, 0) - q.get(k, 0)) for k in set(p) | set(q)))
    ok = worst < 1e-9 and max_diff > 0.01
    verdict(5, ok, f"max |I - 3| = {worst:.2e} (tol 1e-9); largest probability change {max_diff:.3f} (> 0.01)")


def test_criterion_6_pnr(verdict):
    hom = {(2, 0): 0.5, (0, 2): 0.5}
    eta = ideal_efficiencies(2)
    d = tv(reconstruct_distribution(simulate_clicks(hom, eta, 1_000_000, seed=6), eta), hom)
    identity = all(
        correction_factor(o, exact=True) * splitter_probability(o, exact=True) * subevent_count(o) == 1
        for m in range(1, 5)
        for n in range(5)
        for o in enumerate_basis(m, n).states
    )
    verdict(6, d < 0.01 and identity, f"HOM TV = {d:.4f} (< 0.01); rational identity exact: {identity}")


def test_criterion_7_tensors(verdict):
    drift = 0.0
    for m in (2, 3):
        for occ in [(1, 1), (2, 0)]:
            t = correlation_tensor(fock_state(occ + (0,) * (m - 2)), 2)
            f0, e0 = tensor_frobenius(t), unfolded_eigenvalues(t)
            for s in range(50):
                u = transform_tensor(t, haar_random_unitary(m, s))
                drift = max(drift, abs(tensor_frobenius(u) - f0))
                drift = max(drift, float(np.max(np.abs(np.subtract(unfolded_eigenvalues(u), e0)))))
    conj = 0.0
    for s in range(50):
        U = haar_random_unitary(2, s)
        for occ in [(1, 1), (2, 0)]:
            t = correlation_tensor(fock_state(occ), 2)
            V = unfolding_basis_change(U, 2)
            conj = max(conj, float(np.max(np.abs(unfold(transform_tensor(t, U)) - V @ unfold(t) @ V.conj().T))))
    ok = drift < 1e-9 and conj < 1e-9
    verdict(7, ok, f"invariant drift {drift:.1e}, conjugation identity error {conj:.1e} (tol 1e-9)")


def test_criterion_8_noise(verdict):
    # I - 3 for (1,1,1) is blind to measurement-stage errors in exact mode, so run with shots
    base = dict(num_unitaries=200, mode="montecarlo", shots=100_000, seed=8)
    parts, ok = [], True
    for label, noise in [("R=0.52", NoiseConfig(reflectivity=0.52)), ("sigma=0.06", NoiseConfig(calib_sigma=0.06))]:
        rep = run_campaign(CampaignConfig(3, (1, 1, 1), noise=noise, **base))
        dev = np.array([r.I - 3 for r in rep.rows if r.ok])
        good = len(dev) == 200 and dev.std() > 0 and abs(dev.mean()) < 0.1
        ok &= good
        parts.append(f"{label}: mean {dev.mean():+.4f}, std {dev.std():.4f}")
    verdict(8, ok, "; ".join(parts) + " (std > 0, |mean| < 0.1)")


def test_criterion_9_residuals(exact_reports, verdict):
    worst = max(float(np.max(np.abs(heisenberg_residuals(rep)[0]))) for rep in exact_reports.values())
    verdict(9, worst < 1e-9, f"max |<n_j> - sum_k |U_jk|^2 n_k| = {worst:.2e} (tol 1e-9)")


def _report_bytes(cfg, outdir):
    emit_report(run_campaign(cfg), outdir, formats=("rows", "summary", "histograms", "unitaries"))
    return {f: open(os.path.join(outdir, f), "rb").read() for f in sorted(os.listdir(outdir))}


def test_criterion_10_determinism(tmp_path, verdict):
    cfg = CampaignConfig(
        3, (1, 1, 0), num_unitaries=12, mode="montecarlo", shots=20_000, seed=10,
        noise=NoiseConfig(reflectivity=0.52, calib_sigma=0.06),
    )
    a = _report_bytes(cfg, tmp_path / "a")
    b = _report_bytes(cfg, tmp_path / "b")
    par = _report_bytes(CampaignConfig.from_dict({**cfg.to_dict(), "workers": 3}), tmp_path / "c")
    same = a == b
    # the echoed config records the worker count, everything else must match
    agree = all(a[f] == par[f] for f in a if f != "summary.json") and (
        json.loads(a["summary.json"])["summary"] == json.loads(par["summary.json"])["summary"]
    )
    verdict(10, same and agree, f"byte-identical reruns: {same}; parallel (3 workers) == serial: {agree}")
