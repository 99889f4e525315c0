"""Command line: prove, verify, simulate, experiment, selfcheck.

Exit codes: 0 ok, 2 verification reject, 1 error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import ZkpcpError
from ..osat_pcp import (OSatProof, OsatCoins, master_word, osat_encode_from_3sat, osat_prove_unchecked, osat_simulate,
                        osat_verify_proof)
from .experiments import OsatMicro, osat_micro, run_experiment
from .forgeries import bitflip
from .report import ConfigError, ExperimentConfig, plain
from .seeds import SeedTree, fresh_master, parse_master
from .zoo import KINDS, AdversaryStrategy

log = logging.getLogger("zkpcp.cli")

OK, ERROR, REJECT = 0, 1, 2
FORMAT = "zkpcp-osat-proof/1"


class CliError(Exception):
    pass


# --- instances and proof artifacts -------------------------------------------------

def load_instance(path) -> OsatMicro:
    """JSON: {"clauses": [[1, 2, 2], ...], "params": {"field": [2, 4], "H": [0, 1], "k": 3, "r": 1, "s": 1}}."""
    try:
        obj = json.loads(Path(path).read_text())
        prm = obj.get("params", {})
        unknown = set(prm) - {"field", "H", "k", "r", "s"}
        if unknown:
            raise CliError(f"unknown instance params {sorted(unknown)}")
        return osat_micro(obj["clauses"], prm.get("field", (2, 4)), prm.get("H", (0, 1)), prm.get("k", 3),
                          prm.get("r", 1), prm.get("s", 1))
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as e:
        raise CliError(f"cannot read instance {path}: {e}") from e


def instance_json(micro: OsatMicro) -> dict:
    p = micro.params
    field = [p.F.order] if p.F.char == p.F.order else [2, p.F.order.bit_length() - 1]
    return {"clauses": [list(c) for c in micro.phi],
            "params": {"field": field, "H": list(p.H), "k": p.k, "r": p.r, "s": p.s}}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_proof(proof: OSatProof, micro: OsatMicro, master_seed: int, out: Path) -> Path:
    """Dense grids (C-hat coefficients and the pi_C table) in an .npz next
    to a JSON manifest binding them to the instance and seed."""
    out.parent.mkdir(parents=True, exist_ok=True)
    grid = out.with_suffix(".npz")
    with open(grid, "wb") as fh:
        np.savez(fh, coeffs=proof.coeffs, pi_C=proof.pi_C)
    manifest = {
        "format": FORMAT, "instance": instance_json(micro), "grid_file": grid.name,
        "grid_sha256": _sha256(grid), "master_word": int(proof.master),
        "seed_commitment": hashlib.sha256(master_seed.to_bytes(32, "big")).hexdigest(),
    }
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def read_proof(path) -> tuple[OsatMicro, OSatProof]:
    path = Path(path)
    try:
        man = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"cannot read manifest {path}: {e}") from e
    if man.get("format") != FORMAT:
        raise CliError(f"{path}: not a {FORMAT} manifest")
    grid = path.parent / man["grid_file"]
    if _sha256(grid) != man["grid_sha256"]:
        raise CliError(f"{grid}: contents do not match the manifest hash")
    ipath = path.with_suffix(".instance.json")
    ipath.write_text(json.dumps(man["instance"]))
    try:
        micro = load_instance(ipath)
    finally:
        ipath.unlink()
    with np.load(grid) as z:
        coeffs, table = z["coeffs"], z["pi_C"]
    return micro, OSatProof(micro.params, coeffs, table, int(man["master_word"]))


# --- subcommands ---------------------------------------------------------------------

def cmd_prove(args) -> int:
    micro = load_instance(args.instance)
    if args.assignment is not None:
        bits = [int(b) for b in args.assignment.split(",")]
        _, translate = osat_encode_from_3sat(micro.phi, r=micro.params.r, s=micro.params.s)
        micro.witness = translate(bits)
    elif not micro.satisfiable:
        raise CliError("formula is unsatisfiable; pass --assignment to prove with a wrong witness")
    master = parse_master(args.seed) if args.seed else fresh_master()
    proof = osat_prove_unchecked(micro.witness, micro.params, master)
    write_proof(proof, micro, master, Path(args.out))
    print(f"wrote {args.out} (master word {master_word(master)})")
    return OK


def cmd_verify(args) -> int:
    micro, proof = read_proof(args.proof)
    seeds = SeedTree(parse_master(args.seed) if args.seed else fresh_master())
    if args.tamper_rate:
        proof = OSatProof(proof.params, proof.coeffs,
                          bitflip(proof.pi_C, args.tamper_rate, seeds.rng("verify/tamper"), micro.params.F),
                          proof.master)
    rng = seeds.rng("verify/coins")
    rejects = []
    for t in range(args.trials):
        res = osat_verify_proof(micro.inst, micro.params, proof, OsatCoins.sample(micro.params, rng),
                                allow_small_field=True)
        if not res.verdict:
            rejects.append((t, res.failed))
    print(json.dumps({"trials": args.trials, "rejected": len(rejects), "reasons": [r for _, r in rejects[:5]],
                      "seeds": seeds.log}))
    return REJECT if rejects else OK


def cmd_simulate(args) -> int:
    micro = load_instance(args.instance)
    adv = AdversaryStrategy(args.adversary).build(micro.params)
    seeds = SeedTree(parse_master(args.seed) if args.seed else fresh_master())
    view = osat_simulate(micro.inst, micro.params, adv, seeds.rng("simulate"))
    print(json.dumps(plain({"adversary": adv.name, "coins": view.randomness,
                            "answers": [[o, i, s] for o, i, s in view.answers], "seeds": seeds.log})))
    return OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.seed:
        cfg.master_seed = args.seed
    rep = run_experiment(cfg)
    out = Path(args.out or cfg.output.get("json") or f"{cfg.experiment}-report.json")
    csv_path = cfg.output.get("csv") or out.with_suffix(".csv")
    rep.write(out, csv_path)
    for line in rep.lines():
        print(line)
    print(f"wrote {out} and {csv_path}")
    return OK if rep.passed else REJECT


SELFCHECKS = [
    {"experiment": "completeness", "trials": {"clusters": 2, "per_cluster": 4}},
    {"experiment": "completeness", "system": "rsc-micro", "trials": {"seeds": 2}},
    {"experiment": "soundness", "system": "rsc-micro", "trials": {"N": 100}},
    {"experiment": "robustness", "system": "rsc-micro"},
    {"experiment": "budget"},
    {"experiment": "zk", "system": "compose-micro", "trials": {"N": 200}},
]


def cmd_selfcheck(args) -> int:
    ok = True
    for d in SELFCHECKS:
        rep = run_experiment(ExperimentConfig.from_dict({**d, "master_seed": args.seed or "1"}))
        ok &= rep.passed
        print(f"{'PASS' if rep.passed else 'FAIL'} {d['experiment']}/{d.get('system', 'osat-micro')}")
    return OK if ok else REJECT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zkpcp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("prove", help="write an Oracle-3SAT proof (manifest + grid file)")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", help="master seed (hex)")
    p.add_argument("--assignment", help="comma-separated 0/1 values; defaults to a brute-force solution")
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("verify", help="check a proof on sampled coins")
    p.add_argument("proof")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed")
    p.add_argument("--tamper-rate", type=float, default=0.0, help="corrupt this fraction of pi_C first")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("simulate", help="print a simulated view for a zoo adversary")
    p.add_argument("instance")
    p.add_argument("--adversary", choices=KINDS, default="adaptive-chain")
    p.add_argument("--seed")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("experiment", help="run an experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("selfcheck", help="quick run of the small experiments")
    p.add_argument("--seed")
    p.set_defaults(fn=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(name)s: %(message)s")
    try:
        return args.fn(args)
    except (CliError, ConfigError, ZkpcpError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
