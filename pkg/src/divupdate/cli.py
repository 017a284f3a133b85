"""Command-line front end.

Commands::

    divupdate validate PROBLEM
    divupdate update PROBLEM [--method hellinger|bregman|both] [--conditional]
                             [--existence-mode consistent|paper-literal]
                             [--certify] [--out REPORT]
    divupdate compare PROBLEM [...]          # update --method both
    divupdate oracle-check PROBLEM [--objective hellinger|bregman]
                             [--oracle-method grid|descent] [--resolution N]
                             [--seed S] [--out REPORT]

Exit status: 0 success, 1 unreadable or malformed document, 2 validation or
usage error, 3 every requested method failed, 4 oracle certificate FAIL.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import document as docs
from .divergence import hellinger_sq, quadratic_bregman, shannon_entropy
from .exceptions import BlockTooLarge, DivUpdateError, InfeasibleEvidence, NonConvergence
from .oracle import Objective, OracleConfig, oracle_certify
from .space import refine_by_event, refine_evidence
from .update import (
    ExistenceMode,
    Method,
    bregman_closed_form,
    bregman_update,
    compare_updates,
    conditional_bregman_update,
    conditional_hellinger_update,
    existence_update,
    hellinger_update,
)

EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_FAILED, EXIT_ORACLE_FAIL = 0, 1, 2, 3, 4

REPORT_NAMES = {
    Method.HELLINGER: "hellinger",
    Method.BREGMAN: "bregman",
    Method.HELLINGER_CONDITIONAL: "hellinger_conditional",
    Method.BREGMAN_CONDITIONAL: "bregman_conditional",
    Method.EXISTENCE: "existence",
}


class UsageError(Exception):
    pass


def _floats(values):
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


def _error_record(exc: Exception) -> dict:
    rec = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, InfeasibleEvidence):
        rec.update(block=exc.label, point=exc.point_id, margin=float(exc.margin))
    elif getattr(exc, "block", None) is not None:
        rec["block"] = exc.block
    return rec


def _result_record(result, prior) -> dict:
    mu = prior.weights
    extras = {}
    for key, value in result.extras.items():
        extras[key] = _floats(value) if isinstance(value, np.ndarray) else value
    return {
        "status": "ok",
        "method": result.method.value,
        "posterior": _floats(result.posterior),
        "block_weights": _floats(result.block_weights),
        "block_components": [_floats(c) for c in result.block_components],
        "objective_value": result.objective_value,
        "objectives": {
            "hellinger_sq": hellinger_sq(result.posterior, mu),
            "quadratic_bregman": quadratic_bregman(result.posterior, mu),
        },
        "entropy": result.posterior_entropy,
        "feasibility_margins": _floats(result.feasibility_margins),
        "q_blocks": _floats(result.q_blocks),
        "q_cond": None if result.q_cond is None else _floats(result.q_cond),
        "extras": extras,
    }


def _certificate_record(cert, closed_form, config, note=None) -> dict:
    rec = {
        "objective": cert.objective.value,
        "status": "PASS" if cert.passed else "FAIL",
        "gap": cert.gap,
        "distance": cert.distance,
        "oracle_value": cert.oracle_value,
        "closed_form_value": cert.closed_form_value,
        "oracle_point": _floats(cert.oracle.point),
        "closed_form": _floats(closed_form),
        "iterations": cert.oracle.iterations,
        "converged": cert.oracle.converged,
        "config": {
            "method": config.method.value,
            "grid_resolution": config.grid_resolution,
            "convergence_tol": config.convergence_tol,
            "seed": config.seed,
        },
    }
    if note is not None:
        rec["note"] = note
    return rec


def _load(path):
    """Read and validate a problem document; returns (doc, exit code or None)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, EXIT_PARSE
    try:
        doc = docs.parse_problem(text)
    except docs.ParseError as exc:
        print(f"parse error: {path}: {exc}", file=sys.stderr)
        return None, EXIT_PARSE
    problems = docs.document_problems(doc)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return None, EXIT_USAGE
    return doc, None


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _oracle_config(doc, **overrides) -> OracleConfig:
    settings = doc.oracle_overrides
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return OracleConfig(**settings)


def cmd_validate(args) -> int:
    doc, code = _load(args.problem)
    if code is not None:
        return code
    print(f"ok: {len(doc.points)} points, {max(doc.partition)} blocks")
    return EXIT_OK


def build_update_report(doc, method="both", conditional=False, existence_mode=None,
                        certify=False) -> tuple:
    """Run the requested solvers; returns ``(report dict, number of successes)``."""
    prior = docs.to_prior(doc)
    evidence = docs.to_evidence(doc)
    if evidence is None:
        raise UsageError("document has no evidence section")
    run_existence = conditional or existence_mode is not None
    if (conditional or run_existence) and not evidence.has_event:
        raise UsageError("conditional updates need evidence.event and evidence.cond_probs")

    solvers = []
    if method in ("hellinger", "both"):
        solvers.append((Method.HELLINGER, hellinger_update))
    if method in ("bregman", "both"):
        solvers.append((Method.BREGMAN, bregman_update))
    if conditional:
        if method in ("hellinger", "both"):
            solvers.append((Method.HELLINGER_CONDITIONAL, conditional_hellinger_update))
        if method in ("bregman", "both"):
            solvers.append((Method.BREGMAN_CONDITIONAL, conditional_bregman_update))
    if run_existence:
        mode = ExistenceMode(existence_mode or ExistenceMode.CONSISTENT)
        solvers.append((Method.EXISTENCE, lambda p, e: existence_update(p, e, mode)))

    results, records = {}, {}
    for m, solve in solvers:
        try:
            results[m] = solve(prior, evidence)
            records[REPORT_NAMES[m]] = _result_record(results[m], prior)
        except DivUpdateError as exc:
            records[REPORT_NAMES[m]] = {"status": "error", "error": _error_record(exc)}

    report = {
        "version": docs.FORMAT_VERSION,
        "input_digest": docs.digest(doc),
        "points": list(doc.points),
        "prior": {"weights": _floats(prior.weights), "entropy": shannon_entropy(prior.weights)},
        "methods": records,
    }

    if method == "both":
        cmp = compare_updates(prior, evidence, conditional=conditional)
        report["comparison"] = {
            "max_difference": cmp.max_difference,
            "conditional_max_difference": cmp.conditional_max_difference if conditional else None,
            "evidence_matches_prior": cmp.evidence_matches_prior,
            "blockwise_uniform_prior": cmp.blockwise_uniform,
            "entropies": {REPORT_NAMES[m]: v for m, v in cmp.entropies.items()},
        }

    if certify:
        config = _oracle_config(doc)
        certs = {}
        targets = {
            Method.HELLINGER: (Objective.HELLINGER_SQ, False),
            Method.BREGMAN: (Objective.QUADRATIC_BREGMAN, False),
            Method.HELLINGER_CONDITIONAL: (Objective.HELLINGER_SQ, True),
            Method.BREGMAN_CONDITIONAL: (Objective.QUADRATIC_BREGMAN, True),
        }
        for m, result in results.items():
            if m not in targets:
                continue
            objective, refined = targets[m]
            p, e = prior, evidence
            if refined:
                p, e = refine_by_event(prior, evidence.event), refine_evidence(evidence)
            try:
                cert = oracle_certify(p, e, objective, result.posterior, config)
                certs[REPORT_NAMES[m]] = _certificate_record(cert, result.posterior, config)
            except DivUpdateError as exc:
                certs[REPORT_NAMES[m]] = {"status": "ERROR", "error": _error_record(exc)}
        report["certificates"] = certs

    return report, len(results)


def cmd_update(args) -> int:
    doc, code = _load(args.problem)
    if code is not None:
        return code
    try:
        report, successes = build_update_report(
            doc, args.method, args.conditional, args.existence_mode, args.certify
        )
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(docs.dumps(report), args.out)
    return EXIT_OK if successes else EXIT_FAILED


def build_oracle_report(doc, objective, oracle_method=None, resolution=None, seed=None) -> tuple:
    """Certify the closed form for ``objective``; returns ``(report, passed)``.

    An infeasible quadratic-Bregman instance is certified against its raw
    closed form, which the oracle then rejects.
    """
    prior = docs.to_prior(doc)
    evidence = docs.to_evidence(doc)
    if evidence is None:
        raise UsageError("document has no evidence section")
    objective = Objective(objective)
    config = _oracle_config(
        doc, method=oracle_method or doc.oracle_overrides.get("method", "grid"),
        grid_resolution=resolution, seed=seed,
    )
    note = None
    if objective is Objective.HELLINGER_SQ:
        closed_form = hellinger_update(prior, evidence).posterior
    else:
        try:
            closed_form = bregman_update(prior, evidence).posterior
        except InfeasibleEvidence as exc:
            closed_form, _ = bregman_closed_form(prior, evidence)
            note = str(exc)
    cert = oracle_certify(prior, evidence, objective, closed_form, config)
    report = {
        "version": docs.FORMAT_VERSION,
        "input_digest": docs.digest(doc),
        "points": list(doc.points),
        "certificate": _certificate_record(cert, closed_form, config, note),
    }
    return report, cert.passed


def cmd_oracle_check(args) -> int:
    doc, code = _load(args.problem)
    if code is not None:
        return code
    try:
        report, passed = build_oracle_report(
            doc, args.objective, args.oracle_method, args.resolution, args.seed
        )
    except BlockTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_FAIL
    except (UsageError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(docs.dumps(report), args.out)
    return EXIT_OK if passed else EXIT_ORACLE_FAIL


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divupdate",
        description="Hellinger / quadratic-Bregman optimal updates of a partitioned prior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a problem document")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)

    for name in ("update", "compare"):
        p = sub.add_parser(name, help="compute optimal updates and write a report")
        p.add_argument("problem")
        if name == "update":
            p.add_argument("--method", choices=("hellinger", "bregman", "both"), default="both")
        else:
            p.set_defaults(method="both")
        p.add_argument("--conditional", action="store_true",
                       help="also run the updates that use the event's conditionals")
        p.add_argument("--existence-mode", choices=[m.value for m in ExistenceMode],
                       help="run the density construction in this mode (default with --conditional: consistent)")
        p.add_argument("--certify", action="store_true", help="attach oracle certificates")
        p.add_argument("--out", help="report path (default: stdout)")
        p.set_defaults(func=cmd_update)

    p = sub.add_parser("oracle-check", help="certify a closed form with the brute-force oracle")
    p.add_argument("problem")
    p.add_argument("--objective", choices=[o.value for o in Objective], default="hellinger")
    p.add_argument("--oracle-method", choices=("grid", "descent"))
    p.add_argument("--resolution", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
