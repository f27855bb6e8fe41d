"""Command line entry point.

Exit codes: 0 when everything checked passes, 1 when violations or findings
were reported, 2 on malformed input or tool errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import zoo
from .census import count_models
from .errors import TGSError
from .fuzzy import as_fraction, assign_weights, crisp_reduction_check, fuzzy_closure, load_weights
from .graph import build_graph, components, fingerprint, laplacian_nullity, to_dot
from .homology import ext, presentation, tor
from .ideals import MODES, ideal_violation, spectrum, zero_ideal
from .model import AxiomMode, check_axioms, find_identity_idempotents, load_model
from .modules import check_module_axioms, load_module
from .pipeline import PipelineConfig, PipelineError, run_pipeline

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


def _emit(args, name: str, payload, text: str | None = None) -> None:
    body = text if text is not None else json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)


def _model(args):
    return load_model(args.model)


def cmd_check_model(args) -> int:
    model = _model(args)
    rep = check_axioms(model, AxiomMode(args.strict_t5), max_witnesses=args.max_witnesses)
    zero = zero_ideal(model)
    zw = ideal_violation(model, zero, args.mode)
    payload = {
        "axioms": rep.to_dict(),
        "identity_idempotents": find_identity_idempotents(model),
        "zero_ideal": {"mode": args.mode, "is_ideal": zw is None, "witness": None if zw is None else list(zw)},
    }
    _emit(args, "check-model.json", payload)
    return EXIT_OK if rep.passed and zw is None else EXIT_FINDINGS


def cmd_spec(args) -> int:
    model = _model(args)
    _emit(args, "spec.json", spectrum(model, args.mode).to_dict())
    return EXIT_OK


def cmd_fuzzy(args) -> int:
    model = _model(args)
    sp = spectrum(model, args.mode)
    W = load_weights(args.weights, sp) if args.weights else assign_weights(sp, args.scheme)
    theta = as_fraction(args.theta)
    closures = {I.key: sorted(fuzzy_closure(sp, I, theta, W)) for I in sp.proper_ideals}
    crisp = crisp_reduction_check(model, sp)
    payload = {"theta": str(theta), "weights": W.to_dict(), "closures": closures, "crisp_reduction": crisp.to_dict()}
    _emit(args, "fuzzy.json", payload)
    return EXIT_OK if crisp.passed else EXIT_FINDINGS


def cmd_homology(args) -> int:
    model = _model(args)
    M, _ = load_module(args.M)
    N, _ = load_module(args.N)
    bad = [name for name, X in (("M", M), ("N", N)) if not check_module_axioms(model, X).passed]
    if bad:
        _emit(args, "homology.json", {"invalid_modules": bad})
        return EXIT_FINDINGS
    payload = {
        "presentation": presentation(model, M).to_dict(),
        "ext": [ext(model, M, N, d).to_dict() for d in (0, 1)],
        "tor": [tor(model, M, N, d).to_dict() for d in (0, 1)],
    }
    _emit(args, "homology.json", payload)
    return EXIT_OK


def cmd_fingerprint(args) -> int:
    model = _model(args)
    fp = fingerprint(model, args.mode, args.scheme)
    _emit(args, "fingerprint.json", None, fp.to_json() + "\n")
    return EXIT_FINDINGS if fp.findings else EXIT_OK


def cmd_graph(args) -> int:
    model = _model(args)
    sp = spectrum(model, args.mode)
    G = build_graph(model, sp, assign_weights(sp, args.scheme))
    if args.dot:
        _emit(args, "graph.dot", None, to_dot(G))
    else:
        payload = {**G.to_dict(), "components": components(G), "laplacian_nullity": laplacian_nullity(G)}
        _emit(args, "graph.json", payload)
    return EXIT_OK


def cmd_census(args) -> int:
    ckpt = Path(args.out) / f"census-{args.n}-{args.m}.ckpt" if args.out else None
    rec = count_models(
        args.n, args.m, AxiomMode(args.strict_t5), workers=args.workers,
        checkpoint=ckpt, resume=args.resume, override=args.override,
    )
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        rec.write_ndjson(Path(args.out) / f"census-{args.n}-{args.m}.ndjson")
        sys.stdout.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
    else:
        for model in rec.models():
            sys.stdout.write(model.to_json() + "\n")
        sys.stdout.write(json.dumps(rec.summary(), sort_keys=True, separators=(",", ":")) + "\n")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = PipelineConfig(
        args.n, args.m,
        axiom_mode="strict-t5" if args.strict_t5 else "default",
        mode=args.mode, scheme=args.scheme, thetas=tuple(args.theta or ("0", "1/2", "1")),
        workers=args.workers, out=args.out or "tgs-run", resume=args.resume, cumulative=args.cumulative,
    )
    man = run_pipeline(cfg)
    sys.stdout.write(man.to_json())
    return EXIT_FINDINGS if man.findings else EXIT_OK


def cmd_zoo(args) -> int:
    _emit(args, f"{args.name}.json", None, zoo.NAMED[args.name]().to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=MODES, default="literal", help="ideal absorption mode")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", default=None, help="output directory (default: stdout)")
    common.add_argument("--resume", action="store_true")

    p = argparse.ArgumentParser(prog="tgs", description="Finite ternary Gamma-semiring toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("check-model", cmd_check_model, "verify the axioms and the zero ideal")
    sp.add_argument("model")
    sp.add_argument("--strict-t5", action="store_true")
    sp.add_argument("--max-witnesses", type=int, default=32)

    sp = add("spec", cmd_spec, "prime spectrum as JSON")
    sp.add_argument("model")

    sp = add("fuzzy", cmd_fuzzy, "thresholded closures of every proper ideal")
    sp.add_argument("model")
    sp.add_argument("--theta", default="1/2", help="threshold as p/q or decimal")
    sp.add_argument("--scheme", choices=("uniform", "frequency"), default="uniform")
    sp.add_argument("--weights", default=None, help="weights file (overrides --scheme)")

    sp = add("homology", cmd_homology, "Ext and Tor in degrees 0 and 1")
    sp.add_argument("M")
    sp.add_argument("N")
    sp.add_argument("--model", required=True)

    sp = add("fingerprint", cmd_fingerprint, "spectral fingerprint")
    sp.add_argument("model")
    sp.add_argument("--scheme", choices=("uniform", "frequency"), default="uniform")

    sp = add("graph", cmd_graph, "spectrum graph as JSON or DOT")
    sp.add_argument("model")
    sp.add_argument("--dot", action="store_true")
    sp.add_argument("--scheme", choices=("uniform", "frequency"), default="uniform")

    sp = add("census", cmd_census, "enumerate models up to isomorphism")
    sp.add_argument("n", type=int)
    sp.add_argument("m", type=int)
    sp.add_argument("--strict-t5", action="store_true")
    sp.add_argument("--override", action="store_true", help="allow orders beyond the guard")

    sp = add("run", cmd_run, "full pipeline")
    sp.add_argument("n", type=int)
    sp.add_argument("m", type=int)
    sp.add_argument("--cumulative", action="store_true", help="include every smaller order")
    sp.add_argument("--strict-t5", action="store_true")
    sp.add_argument("--scheme", choices=("uniform", "frequency"), default="uniform")
    sp.add_argument("--theta", action="append", help="repeatable; default 0, 1/2, 1")

    sp = add("zoo", cmd_zoo, "write a named example model")
    sp.add_argument("name", choices=sorted(zoo.NAMED))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PipelineError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return EXIT_ERROR
    except (TGSError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
