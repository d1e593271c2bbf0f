"""JSON and CSV file formats for unitaries, meshes, states, tallies and tensors."""

from __future__ import annotations

import csv
import io as _io
import json

import numpy as np

from .fock import enumerate_basis, PureState
from .errors import ShapeError
from .pnr import ClickTally, detector_label, parse_detector
from .tensors import CorrelationTensor
from .transforms import MeshCell, MeshSettings, check_unitary

FILE_UNITARY_TOL = 1e-8


def _read(path):
    with open(path) as fh:
        return json.load(fh)


def _write(path, obj):
    with open(path, "w") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def matrix_to_dict(M):
    M = np.asarray(M, dtype=complex)
    return {"dim": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_dict(d):
    M = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    if M.shape != (d["dim"], d["dim"]):
        raise ShapeError(f"matrix entries have shape {M.shape}, header says dim={d['dim']}")
    return M


def read_unitary(path, check=True):
    U = matrix_from_dict(_read(path))
    return check_unitary(U, FILE_UNITARY_TOL) if check else U


def write_unitary(path, U):
    _write(path, matrix_to_dict(U))


write_coherency = write_unitary


def mesh_to_dict(settings):
    return {
        "dim": settings.dim,
        "cells": [{"layer": c.layer, "mode": c.mode, "theta": c.theta, "phi": c.phi} for c in settings.cells],
        "output_phases": [float(p) for p in settings.output_phases],
    }


def mesh_from_dict(d):
    cells = [MeshCell(int(c["layer"]), int(c["mode"]), float(c["theta"]), float(c["phi"])) for c in d["cells"]]
    return MeshSettings(int(d["dim"]), cells, d.get("output_phases"))


def read_mesh(path):
    return mesh_from_dict(_read(path))


def write_mesh(path, settings):
    _write(path, mesh_to_dict(settings))


def state_to_records(state, probabilities_only=False):
    out = []
    for occ, a in zip(state.basis.states, state.amplitudes):
        if a == 0:
            continue
        if probabilities_only:
            out.append({"occupations": list(occ), "probability": float(abs(a) ** 2)})
        else:
            out.append({"occupations": list(occ), "re": float(a.real), "im": float(a.imag)})
    return out


def state_from_records(records):
    first = records[0]["occupations"]
    basis = enumerate_basis(len(first), sum(first))
    amps = np.zeros(len(basis), dtype=complex)
    for r in records:
        amps[basis.index[tuple(r["occupations"])]] = r["re"] + 1j * r["im"]
    return PureState(basis, amps)


def read_state(path):
    return state_from_records(_read(path))


def write_state(path, state, probabilities_only=False):
    _write(path, state_to_records(state, probabilities_only))


def record_csv(rec):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "j", "k", "value"])
    for kind, j, k, v in rec.rows():
        w.writerow([kind, j, k, repr(v)])
    return buf.getvalue()


def tensor_to_dict(t, tol=0.0):
    entries = [
        {"index": [i + 1 for i in idx], "re": float(v.real), "im": float(v.imag)}
        for idx, v in np.ndenumerate(t.entries)
        if abs(v) > tol
    ]
    return {"m": t.m, "order": t.order, "entries": entries}


def tensor_from_dict(d):
    m, order = int(d["m"]), int(d["order"])
    out = np.zeros((m,) * (2 * order), dtype=complex)
    for e in d["entries"]:
        out[tuple(i - 1 for i in e["index"])] = e["re"] + 1j * e["im"]
    return CorrelationTensor(m, order, out)


def tally_to_dict(tally):
    ns = tally.photon_numbers
    rows = [
        {"detectors": [detector_label(d) for d in event], "count": int(c)}
        for event, c in sorted(tally.counts.items())
    ]
    return {"m": tally.m, "n": ns[0] if len(ns) == 1 else None, "shots": int(tally.shots), "rows": rows}


def tally_from_dict(d):
    counts = {}
    for r in d["rows"]:
        event = tuple(sorted(parse_detector(x) if isinstance(x, str) else int(x) for x in r["detectors"]))
        if len(set(event)) != len(event):
            raise ValueError(f"duplicate detector in event {r['detectors']}")
        counts[event] = counts.get(event, 0) + int(r["count"])
    tally = ClickTally(int(d["m"]), int(d["shots"]), counts)
    if sum(counts.values()) > tally.shots:
        raise ValueError("tally counts exceed the number of shots")
    return tally


def read_tally(path):
    return tally_from_dict(_read(path))


def write_tally(path, tally):
    _write(path, tally_to_dict(tally))


def read_efficiencies(path, m=None):
    """Efficiencies as a plain list, or ``{"eta": [...]}``, or ``{"1a": 0.9, ...}``."""
    d = _read(path)
    if isinstance(d, dict) and "eta" in d:
        d = d["eta"]
    if isinstance(d, dict):
        size = max(parse_detector(k) for k in d) + 1 if m is None else 4 * m
        eta = np.ones(size)
        for k, v in d.items():
            eta[parse_detector(k)] = v
        return eta
    return np.asarray(d, dtype=float)


def write_efficiencies(path, eta):
    _write(path, {detector_label(i): float(v) for i, v in enumerate(eta)})


def distribution_to_rows(dist):
    return [{"occupations": list(o), "probability": float(p)} for o, p in sorted(dist.items(), reverse=True)]


def write_distribution(path, dist):
    _write(path, {"rows": distribution_to_rows(dist)})


def read_distribution(path):
    d = _read(path)
    return {tuple(r["occupations"]): float(r["probability"]) for r in d["rows"]}


def read_config(path):
    return _read(path)
