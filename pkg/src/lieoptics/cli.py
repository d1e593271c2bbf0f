"""Command-line entry point: ``lieoptics {simulate,campaign,reconstruct,tensor,decompose}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .campaign import CampaignConfig, emit_report, run_campaign, run_unitary
from .fock import evolve
from .invariants import lie_basis
from .noise import NoiseConfig
from .pnr import reconstruct_distribution
from .tensors import correlation_tensor, tensor_frobenius, unfolded_eigenvalues
from .transforms import clements_decompose, haar_random_unitary, mesh_compose

# CLI flag -> config key; every flag has a config-file equivalent
CAMPAIGN_FLAGS = {
    "seed": "seed",
    "mode": "mode",
    "shots": "shots",
    "num_unitaries": "num_unitaries",
    "workers": "workers",
    "out": "outputs",
}
NOISE_FLAGS = ("reflectivity", "calib_sigma", "g2", "indistinguishability")


def _occupation(text):
    return tuple(int(v) for v in text.replace(" ", "").split(","))


def _emit(obj):
    print(json.dumps(obj, sort_keys=True, indent=2))


def _noise_overrides(args, base=None):
    d = dict(base or {})
    for name in NOISE_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    return d


def cmd_simulate(args):
    occ = _occupation(args.input)
    m = len(occ)
    if args.unitary:
        U = io.read_unitary(args.unitary, check=not args.no_check)
    else:
        U = haar_random_unitary(m, args.seed if args.seed is not None else 0)
    cfg = CampaignConfig(
        m,
        occ,
        num_unitaries=1,
        mode=args.mode,
        shots=args.shots,
        seed=args.seed,
        noise=NoiseConfig(**_noise_overrides(args)),
    )
    row = run_unitary(cfg, 0, U=U)
    if args.output_state:
        io.write_state(args.output_state, evolve(U, occ))
    out = {
        "I": row.I,
        "Q": row.Q,
        "eigenvalues": row.eigenvalues,
        "expectations": dict(zip(_basis_names(m), row.expectations)),
        "heisenberg_residuals": row.residuals,
        "tv_to_ideal": row.tv,
        "error": row.error or None,
    }
    _emit(out)
    return 0


def _basis_names(m):
    return [str(b) for b in lie_basis(m)]


def cmd_campaign(args):
    d = io.read_config(args.config) if args.config else {}
    for flag, key in CAMPAIGN_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            d[key] = v
    if args.m is not None:
        d["m"] = args.m
    if args.input is not None:
        d["input"] = list(_occupation(args.input))
    d["noise"] = _noise_overrides(args, d.get("noise"))
    if "m" not in d and "input" in d:
        d["m"] = len(d["input"])
    cfg = CampaignConfig.from_dict(d)
    report = run_campaign(cfg)
    outdir = cfg.outputs or "campaign_out"
    paths = emit_report(report, outdir)
    _emit({"summary": report.summary, "files": paths})
    return 0


def cmd_reconstruct(args):
    tally = io.read_tally(args.tally)
    eta = io.read_efficiencies(args.eta, tally.m) if args.eta else np.ones(4 * tally.m)
    dist = reconstruct_distribution(tally, eta)
    if args.output:
        io.write_distribution(args.output, dist)
    _emit({"rows": io.distribution_to_rows(dist)})
    return 0


def cmd_tensor(args):
    state = io.read_state(args.state)
    t = correlation_tensor(state, args.order)
    perm = None if args.permutation is None else [p - 1 for p in _occupation(args.permutation)]
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(io.tensor_to_dict(t, tol=1e-15), fh, sort_keys=True, indent=2)
    _emit({"frobenius": tensor_frobenius(t), "unfolded_eigenvalues": unfolded_eigenvalues(t, perm)})
    return 0


def cmd_decompose(args):
    if args.to_unitary:
        U = mesh_compose(io.read_mesh(args.mesh))
        io.write_unitary(args.unitary, U)
        _emit({"wrote": args.unitary, "dim": int(U.shape[0])})
    else:
        U = io.read_unitary(args.unitary, check=not args.no_check)
        mesh = clements_decompose(U, tol=io.FILE_UNITARY_TOL)
        io.write_mesh(args.mesh, mesh)
        err = float(np.max(np.abs(mesh_compose(mesh) - U)))
        _emit({"wrote": args.mesh, "cells": len(mesh.cells), "reconstruction_error": err})
    return 0


def _add_noise_flags(p):
    p.add_argument("--reflectivity", type=float, help="coupler reflectivity of the measurement stage")
    p.add_argument("--calib-sigma", dest="calib_sigma", type=float)
    p.add_argument("--g2", type=float)
    p.add_argument("--indistinguishability", type=float)


def build_parser():
    ap = argparse.ArgumentParser(prog="lieoptics", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one unitary, one input: expectations and invariants")
    p.add_argument("--input", required=True, help="occupation list, e.g. 1,1,0")
    p.add_argument("--unitary", help="unitary JSON file (default: Haar draw from --seed)")
    p.add_argument("--no-check", action="store_true")
    p.add_argument("--mode", choices=["exact", "montecarlo"], default="exact")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-state", dest="output_state")
    _add_noise_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("campaign", help="config file -> report files")
    p.add_argument("--config")
    p.add_argument("--m", type=int)
    p.add_argument("--input")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["exact", "montecarlo"])
    p.add_argument("--shots", type=int)
    p.add_argument("--num-unitaries", dest="num_unitaries", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    _add_noise_flags(p)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("reconstruct", help="tally + efficiencies -> distribution")
    p.add_argument("--tally", required=True)
    p.add_argument("--eta")
    p.add_argument("--output")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("tensor", help="state file -> tensor, unfolding eigenvalues")
    p.add_argument("--state", required=True)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--permutation", help="1-based slot permutation, e.g. 2,1")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("decompose", help="unitary file <-> mesh file")
    p.add_argument("--unitary", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--to-unitary", action="store_true", help="compose the mesh instead")
    p.add_argument("--no-check", action="store_true")
    p.set_defaults(func=cmd_decompose)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "mode", None) == "montecarlo" and args.seed is None and args.command == "simulate":
        ap.error("--seed is required in montecarlo mode")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
