"""Command-line front end.

Subcommands: prove-grammar, prove-stit, interpolate, translate,
check-proof, check-model, fixtures.  Exit codes: 0 for a positive
verdict (proved/valid/checked), 1 for a refutation or failed check, 2
for usage or input errors, 3 when a bounded search gives up.  All output
is deterministic for a fixed seed (flag --seed, overridden by the
REFINE_PROVER_SEED environment variable).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import fixtures as fixture_corpus
from .grammar import empty_system, parse_system
from .grammar_calculus import (Budget, InvalidProof, Refuted, Unknown, Valid,
                               check_proof, gproof_from_json, gproof_to_json,
                               prove_bounded, proof_to_nested, to_nested)
from .interpolation import InterpolationResult, NotDerivable, lyndon_interpolate
from .semantics import (ds_from_json, ds_to_json, satisfies_system,
                        sigma_from_json, sigma_to_json, validate_ds)
from .sequents import parse_sequent
from .stit import (Proved, check_ds_proof, dsproof_from_json, dsproof_to_json,
                   prove_ds)
from .syntax import ParseError, fmt, literals, parse_formula


def _load_system(path: str | None, auto_close: bool):
    if path is None:
        return empty_system()
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read(), auto_close=auto_close)


def _emit(data, path: str | None):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_prove_grammar(args) -> int:
    system = _load_system(args.system, args.auto_close)
    formula = parse_formula(args.formula, expect_family="grammar")
    budget = Budget(max_labels=args.max_labels, max_steps=args.max_steps)
    result = prove_bounded(system, formula, budget)
    if isinstance(result, Valid):
        print("valid")
        if args.emit:
            _emit(gproof_to_json(result.proof), args.emit)
        return 0
    if isinstance(result, Refuted):
        print(f"refuted at world {result.world}")
        if args.emit:
            _emit({"model": sigma_to_json(result.model),
                   "world": str(result.world)}, args.emit)
        return 1
    print(f"unknown: {result.reason}")
    return 3


def _cmd_prove_stit(args) -> int:
    formula = parse_formula(args.formula, expect_family="stit")
    result = prove_ds(args.k, formula)
    if isinstance(result, Proved):
        print("proved")
        if args.emit:
            _emit(dsproof_to_json(result.proof), args.emit)
        if args.trace:
            for node in result.proof.nodes():
                print(f"  {node.rule}: {node.conclusion}")
        return 0
    print(f"refuted at world {result.world}")
    if args.emit:
        _emit({"model": ds_to_json(result.model), "world": str(result.world)},
              args.emit)
    if args.trace:
        print(f"  model: {json.dumps(ds_to_json(result.model), sort_keys=True)}")
    return 1


def _cmd_interpolate(args) -> int:
    system = _load_system(args.system, args.auto_close)
    text = args.impl
    if "->" not in text:
        print("the --impl formula must be an implication", file=sys.stderr)
        return 2
    lhs, rhs = text.rsplit("->", 1)
    phi = parse_formula(lhs, expect_family="grammar")
    psi = parse_formula(rhs, expect_family="grammar")
    budget = Budget(max_labels=args.max_labels, max_steps=args.max_steps)
    result = lyndon_interpolate(system, phi, psi, budget)
    if isinstance(result, InterpolationResult):
        audit = sorted(f"{'' if pos else '~'}{name}"
                       for (name, pos) in literals(result.chi))
        _emit({"chi": fmt(result.chi),
               "left_proof": gproof_to_json(result.left_proof),
               "right_proof": gproof_to_json(result.right_proof),
               "literal_audit": audit}, args.emit)
        return 0
    if isinstance(result, NotDerivable):
        print("not derivable")
        return 1
    print(f"unknown: {result.reason}")
    return 3


def _cmd_translate(args) -> int:
    if args.proof:
        with open(args.proof, encoding="utf-8") as fh:
            proof = gproof_from_json(json.load(fh))
        nested_proof = proof_to_nested(proof)
        for node in nested_proof.nodes():
            print(f"{node.rule}: {node.conclusion}")
        return 0
    seq = parse_sequent(args.sequent)
    print(to_nested(seq))
    return 0


def _cmd_check_proof(args) -> int:
    with open(args.proof, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        if data.get("family") == "stit":
            check_ds_proof(args.k, dsproof_from_json(data))
        else:
            system = _load_system(args.system, args.auto_close)
            check_proof(system, gproof_from_json(data))
    except InvalidProof as err:
        print(f"invalid: {err}")
        return 1
    print("ok")
    return 0


def _cmd_check_model(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        data = json.load(fh)
    if "model" in data:  # accept the wrapped form the provers emit
        data = data["model"]
    if "choice" in data:
        violations = validate_ds(ds_from_json(data))
        if violations:
            print("violations: " + ", ".join(violations))
            return 1
    else:
        system = _load_system(args.system, args.auto_close)
        if not satisfies_system(system, sigma_from_json(data)):
            print("model does not satisfy the system")
            return 1
    print("ok")
    return 0


def _cmd_fixtures(args) -> int:
    failures = fixture_corpus.run(seed=args.seed, verbose=True)
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="seqcalc")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", help="path to a rewriting-system file")
            p.add_argument("--auto-close", action="store_true",
                           help="add converse images instead of validating them")
        p.add_argument("--max-labels", type=int, default=24)
        p.add_argument("--max-steps", type=int, default=4000)
        p.add_argument("--emit", help="write the proof/model JSON here")

    p = sub.add_parser("prove-grammar", help="bounded prover for character-indexed modalities")
    common(p)
    p.add_argument("--formula", required=True)
    p.set_defaults(func=_cmd_prove_grammar)

    p = sub.add_parser("prove-stit", help="decision procedure for the agentive family")
    p.add_argument("--k", type=int, default=0, help="maximum number of choices (0 = unbounded)")
    p.add_argument("--formula", required=True)
    p.add_argument("--emit")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=_cmd_prove_stit)

    p = sub.add_parser("interpolate", help="Lyndon interpolant with witness proofs")
    common(p)
    p.add_argument("--impl", required=True, help='an implication "phi -> psi"')
    p.set_defaults(func=_cmd_interpolate)

    p = sub.add_parser("translate", help="labelled sequent or proof to nested notation")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sequent", help='text form, e.g. "R_a(w0,w1) |- w0: p"')
    group.add_argument("--proof", help="path to a grammar proof JSON")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("check-proof", help="validate a proof JSON")
    p.add_argument("proof")
    p.add_argument("--system")
    p.add_argument("--auto-close", action="store_true")
    p.add_argument("--k", type=int, default=0)
    p.set_defaults(func=_cmd_check_proof)

    p = sub.add_parser("check-model", help="validate a model JSON")
    p.add_argument("model")
    p.add_argument("--system")
    p.add_argument("--auto-close", action="store_true")
    p.set_defaults(func=_cmd_check_model)

    p = sub.add_parser("fixtures", help="run the axiom corpus")
    p.set_defaults(func=_cmd_fixtures)

    args = parser.parse_args(argv)
    if "REFINE_PROVER_SEED" in os.environ:
        args.seed = int(os.environ["REFINE_PROVER_SEED"])
    try:
        return args.func(args)
    except (ParseError, ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
