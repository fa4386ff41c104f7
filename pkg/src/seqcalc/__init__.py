"""Labelled sequent calculi as executable tools.

Two modal families share one toolkit: character-indexed modalities with
converse driven by context-free string rewriting (bounded prover,
counter-model extraction, nested-sequent translation, effective Lyndon
interpolation) and a single agent's settledness/choice/obligation
modalities (a full decision procedure with verified counter-models).
"""

from .syntax import (And, Bot, CBox, CDia, Character, Formula, GBox, GDia, Lit,
                     OBox, ODia, Or, SBox, SDia, Top, complexity, family, fmt,
                     implies, literals, negate, parse_formula)
from .grammar import (CfcstSystem, ClosureViolation, PathWitness,
                      ProductionRule, UnknownCharacter, build_system, derives,
                      derives_eventually, empty_system, parse_system,
                      reachable, s4_system, s5_system)
from .sequents import (CRel, GRel, Ideal, LabelledSequent, NotForest, NotTree,
                       choice_trees, classify, graphs_isomorphic, parse_sequent,
                       propagation_graph, sequent, sequent_graph,
                       undirected_path)
from .semantics import (DsModel, SigmaModel, check_ds, check_sigma, ds_model,
                        ds_models_isomorphic, globally_true_ds,
                        globally_true_sigma, random_ds_models,
                        random_sigma_models, saturate, sigma_model,
                        validate_ds)
from .grammar_calculus import (Budget, GProof, InvalidProof, NestedSequent,
                               Refuted, Unknown, Valid, check_proof, flip_atom,
                               nested, proof_to_labelled, proof_to_nested,
                               prove_bounded, prove_sequent, to_labelled,
                               to_nested)
from .interpolation import (InterpolationResult, NotDerivable, annotate, boxed,
                            flat, interpolant, interpolant_formula,
                            lyndon_interpolate, orthogonal)
from .stit import (DsProof, NotStable, Proved, StabilityReport, apc_branches,
                   check_ds_proof, extract_model, prove_ds, stability_report)
from .stit import Refuted as RefutedDs

__all__ = [name for name in dir() if not name.startswith("_")]
