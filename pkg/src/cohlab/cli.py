"""Command line front end.

Exit codes: 0 success or pass, 1 fail with witness, 2 unknown at bound, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional

REPORT_SCHEMA = "cohlab-report/1"
CACHE_ENV = "COHLAB_CACHE"

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 4
    depth: int = 3
    budget: int = 3
    max_elements: int = 8
    max_firings: int = 500
    countermodel_size: int = 3
    format: str = "text"
    cache_dir: Optional[str] = None
    seed: int = 0   # reserved; every algorithm here is deterministic

    def __post_init__(self):
        for name in ("n", "depth", "budget", "max_elements", "max_firings", "countermodel_size"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if self.format not in ("text", "json"):
            raise InputError("format must be text or json")

    def bounds(self):
        from .prover import Bounds
        return Bounds(max_elements=self.max_elements, max_firings=self.max_firings,
                      countermodel_size=self.countermodel_size)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("cache_dir")   # results do not depend on the cache
        return d


@dataclass
class Report:
    command: str
    status: str              # pass | fail | unknown | ok
    result: object
    provenance: str
    text: str = ""

    @property
    def exit_code(self) -> int:
        return {"ok": EXIT_OK, "pass": EXIT_OK, "fail": EXIT_FAIL, "unknown": EXIT_UNKNOWN}[self.status]

    def to_json(self, config: RunConfig) -> dict:
        return {"schema": REPORT_SCHEMA, "command": self.command, "config": config.echo(),
                "status": self.status, "provenance": self.provenance, "result": self.result}


def _theory(path):
    from .dsl import ParseError, load_theory
    from . import corpus
    if not os.path.exists(path) and path in corpus.NAMES:
        return corpus.theory(path)
    try:
        return load_theory(path)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except ParseError as exc:
        raise InputError(str(exc)) from exc


def _models(theory, cfg: RunConfig):
    from .models import enumerate_models
    return enumerate_models(theory, cfg.n, cache_dir=cfg.cache_dir)


def _pick(mc, index: int):
    if not 0 <= index < len(mc):
        raise InputError(f"model index {index} out of range (class has {len(mc)} models)")
    return mc[index]


def _parse(fn, *args, **kw):
    from .dsl import ParseError
    try:
        return fn(*args, **kw)
    except ParseError as exc:
        raise InputError(str(exc)) from exc


def _env(items, M):
    env = {}
    sorts = M.signature.sorts
    for item in items or ():
        try:
            name, rest = item.split("=", 1)
            if ":" in rest:
                sort, val = rest.split(":", 1)
            else:
                if len(sorts) != 1:
                    raise ValueError
                sort, val = sorts[0], rest
            env[name] = (sort, int(val))
        except ValueError as exc:
            raise InputError(f"bad label assignment {item!r}; use name=elem or name=sort:elem") from exc
    from .spectrum import SpectrumPoint
    try:
        return SpectrumPoint.of(M, env)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# ---------------------------------------------------------------------------
# commands

def cmd_check(args, cfg):
    from .logic import well_formed
    T = _theory(args.theory)
    diags = well_formed(T)
    if diags:
        raise InputError("; ".join(str(d) for d in diags))
    sig = T.signature
    result = {"theory": T.name, "classical": T.classical, "sorts": list(sig.sorts),
              "functions": len(sig.functions), "relations": len(sig.relations), "axioms": len(T.axioms)}
    text = f"{T.name}: well-formed ({len(sig.sorts)} sorts, {len(sig.functions) + len(sig.relations)} symbols, " \
           f"{len(T.axioms)} axioms)"
    return Report("check", "ok", result, "syntactic", text)


def cmd_models(args, cfg):
    T = _theory(args.theory)
    mc = _models(T, cfg)
    by_size = {}
    for M in mc:
        key = ",".join(f"{s}={M.sizes[s]}" for s in T.signature.sorts) or "-"
        by_size[key] = by_size.get(key, 0) + 1
    result = {"count": len(mc), "by_size": by_size,
              "models": [M.to_json() for M in mc] if args.full else None}
    lines = [f"{len(mc)} models with carriers <= {cfg.n} (up to isomorphism)"]
    lines += [f"  {k}: {v}" for k, v in sorted(by_size.items())]
    return Report("models", "ok", result, "exhaustive at bound", "\n".join(lines))


def cmd_prove(args, cfg):
    from .dsl import parse_sequent
    from .prover import prove
    T = _theory(args.theory)
    seq = _parse(parse_sequent, args.sequent, T.signature, classical=T.classical)
    outcome = prove(T, seq, cfg.bounds())
    status = {"proved": "pass", "countermodel": "fail", "unknown": "unknown"}[outcome.status]
    prov = {"proved": "proved", "countermodel": "countermodel re-validated",
            "unknown": "unknown at bound"}[outcome.status]
    text = f"{outcome.status} ({getattr(outcome, 'method', '') or getattr(outcome, 'reason', '')})"
    if outcome.status == "countermodel":
        text += f"\n  model: {outcome.structure.to_json()}\n  values: {list(outcome.witness)}"
    return Report("prove", status, outcome.to_json(), prov, text)


def cmd_morleyize(args, cfg):
    from .dsl import format_theory
    from .transforms import morleyize
    T = _theory(args.theory)
    res = morleyize(T)
    text = format_theory(res.theory)
    return Report("morleyize", "ok", {"theory": text, "symbols": {k: str(v) for k, v in res.symbols.items()}},
                  "construction", text.rstrip())


def cmd_diagram(args, cfg):
    from .dsl import format_theory
    from .transforms import NotAModel, diagram_theory
    T = _theory(args.theory)
    M = _pick(_models(T, cfg), args.model)
    try:
        D = diagram_theory(T, M)
    except NotAModel as exc:
        raise InputError(str(exc)) from exc
    text = format_theory(D.theory)
    return Report("diagram", "ok", {"theory": text}, "construction", text.rstrip())


def cmd_slice(args, cfg):
    from .dsl import format_theory, parse_formula
    from .transforms import slice_theory
    T = _theory(args.theory)
    f = _parse(parse_formula, args.formula, T.signature, classical=T.classical)
    S = slice_theory(T, f)
    text = format_theory(S.theory)
    return Report("slice", "ok", {"theory": text}, "construction", text.rstrip())


def _interp(path):
    from .interpretations import InterpretationError, load_interpretation
    from .dsl import ParseError
    try:
        return load_interpretation(path)
    except (OSError, ValueError, KeyError, InterpretationError, ParseError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_pushout(args, cfg):
    from .dsl import format_theory
    from .transforms import OverlapError, pushout
    I, J = _interp(args.left), _interp(args.right)
    try:
        P = pushout(I, J)
    except OverlapError as exc:
        raise InputError(str(exc)) from exc
    text = format_theory(P.theory)
    return Report("pushout", "ok", {"theory": text}, "construction", text.rstrip())


def cmd_copower(args, cfg):
    from .dsl import format_theory
    from .transforms import copower
    C = copower(_theory(args.theory))
    text = format_theory(C.theory)
    return Report("copower", "ok", {"theory": text}, "construction", text.rstrip())


def cmd_spectrum(args, cfg):
    from .spectrum import SpectrumGroupoid
    T = _theory(args.theory)
    G = SpectrumGroupoid.build(T, _models(T, cfg).models, cfg.budget)
    if args.dot:
        return Report("spectrum", "ok", {"dot": G.to_dot()}, "exhaustive at bound", G.to_dot().rstrip())
    data = G.to_json()
    text = f"{len(data['points'])} points, {len(data['closure_edges'])} specialization edges"
    return Report("spectrum", "ok", data, "exhaustive at bound", text)


def cmd_closure(args, cfg):
    from .spectrum import closure_leq
    T = _theory(args.theory)
    mc = _models(T, cfg)
    mu = _env(args.label, _pick(mc, args.model))
    nu = _env(args.target_label, _pick(mc, args.target))
    h = closure_leq(mu, nu)
    if h is None:
        return Report("closure", "fail", {"homomorphism": None}, "exhaustive search", "not in closure")
    return Report("closure", "pass", {"homomorphism": h.to_json()}, "exhaustive search",
                  f"in closure via {h.to_json()}")


def cmd_definable(args, cfg):
    from .definability import family_from_json, find_defining_formula
    T = _theory(args.theory)
    mc = _models(T, cfg)
    try:
        with open(args.family, encoding="utf-8") as fh:
            fam = family_from_json(json.load(fh), mc)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"{args.family}: {exc}") from exc
    res = find_defining_formula(fam, cfg.depth)
    if res.found:
        return Report("definable", "pass", {"formula": str(res.formula), "note": res.reason},
                      "certificate verified by evaluation", str(res.formula))
    if res.witness is not None:
        w = res.witness
        result = {"reason": res.reason, "source": w["source"], "target": w["target"], "iso": w["iso"].to_json()}
        return Report("definable", "fail", result, "witness iso", f"{res.reason}: iso {w['iso'].to_json()}")
    return Report("definable", "unknown", {"reason": res.reason}, "unknown at bound", res.reason)


def cmd_isotropy(args, cfg):
    from .analysis import check_group_closure, check_normality, isotropy_at_model
    T = _theory(args.theory)
    mc = _models(T, cfg)
    M = _pick(mc, args.model)
    entries = isotropy_at_model(T, M, depth=min(cfg.depth, args.sigma_depth), budget=args.params, model_class=mc)
    normal, failures = check_normality(M, entries)
    closed = check_group_closure(M, entries)
    result = {"entries": [e.to_json() for e in entries], "normal": normal, "group_closed": closed}
    lines = [f"{e.status}: {e.automorphism.to_json()}" for e in entries]
    lines.append(f"normality: {'pass' if normal else 'fail'}; group closure: {'pass' if closed else 'fail'}")
    status = "pass" if normal and closed else "fail"
    return Report("isotropy", status, result, "exhaustive at bound", "\n".join(lines))


def cmd_compare(args, cfg):
    from .analysis import conceptual_completeness_report
    I = _interp(args.interpretation)
    rep = conceptual_completeness_report(I, n=cfg.n, depth=cfg.depth)
    status = "pass" if rep.equivalence_evidence else "fail"
    lines = [f"{r.row}: {r.verdict}" for r in rep.rows]
    lines += [f"{r.row} (spectral): {r.verdict}" for r in rep.spectral]
    return Report("compare", status, rep.to_json(), "evidence at bound", "\n".join(lines))


def cmd_local(args, cfg):
    from .analysis import check_local_properties
    from .transforms import diagram_theory
    T = _theory(args.theory)
    D = diagram_theory(T, _pick(_models(T, cfg), args.model))
    rep = check_local_properties(D.theory, depth=min(cfg.depth, 2), bounds=cfg.bounds())
    if not rep.ok:
        status = "fail"
    else:
        status = "unknown" if rep.unknowns else "pass"
    text = (f"disjunction property: {sum(v == 'pass' for _, v in rep.disjunctions)} proved instances; "
            f"existence property: {sum(v == 'pass' for _, v in rep.existentials)} proved instances; "
            f"{len(rep.unknowns)} unknown")
    return Report("local", status, rep.to_json(), "proved instances only", text)


COMMANDS = {
    "check": cmd_check, "models": cmd_models, "prove": cmd_prove, "morleyize": cmd_morleyize,
    "diagram": cmd_diagram, "slice": cmd_slice, "pushout": cmd_pushout, "copower": cmd_copower,
    "spectrum": cmd_spectrum, "closure": cmd_closure, "definable": cmd_definable,
    "isotropy": cmd_isotropy, "compare": cmd_compare, "local": cmd_local,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cohlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-n", type=int, default=4, help="carrier size bound (default 4)")
    common.add_argument("--depth", type=int, default=3, help="formula depth bound (default 3)")
    common.add_argument("--budget", type=int, default=3, help="labels per point (default 3)")
    common.add_argument("--max-elements", type=int, default=8)
    common.add_argument("--max-firings", type=int, default=500)
    common.add_argument("--countermodel-size", type=int, default=3)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--cache-dir", default=None, help=f"model cache (default ${CACHE_ENV})")
    common.add_argument("--seed", type=int, default=0, help="reserved")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    add("check", "check a theory file").add_argument("theory")
    s = add("models", "enumerate models up to isomorphism")
    s.add_argument("theory")
    s.add_argument("--full", action="store_true", help="include the model tables")
    s = add("prove", "decide a sequent within bounds")
    s.add_argument("theory")
    s.add_argument("sequent")
    add("morleyize", "coherent translation of a classical theory").add_argument("theory")
    s = add("diagram", "diagram theory of an enumerated model")
    s.add_argument("theory")
    s.add_argument("--model", type=int, required=True, help="index in the enumerated class")
    s = add("slice", "theory with constants for a formula")
    s.add_argument("theory")
    s.add_argument("formula")
    s = add("pushout", "pushout of two interpretations with a common source")
    s.add_argument("left")
    s.add_argument("right")
    add("copower", "theory of homomorphisms between two models").add_argument("theory")
    s = add("spectrum", "labelled points and their specialization order")
    s.add_argument("theory")
    s.add_argument("--dot", action="store_true", help="emit the specialization order in DOT")
    s = add("closure", "is one labelled model in the closure of another")
    s.add_argument("theory")
    s.add_argument("--model", type=int, required=True)
    s.add_argument("--label", action="append", help="name=elem or name=sort:elem")
    s.add_argument("--target", type=int, required=True)
    s.add_argument("--target-label", action="append")
    s = add("definable", "search a formula defining a family given as JSON")
    s.add_argument("theory")
    s.add_argument("family")
    s = add("isotropy", "definable automorphisms of an enumerated model")
    s.add_argument("theory")
    s.add_argument("--model", type=int, required=True)
    s.add_argument("--params", type=int, default=1, help="parameters allowed in definitions")
    s.add_argument("--sigma-depth", type=int, default=2)
    add("compare", "interpretation diagnostics").add_argument("interpretation")
    s = add("local", "existence and disjunction properties of a diagram theory")
    s.add_argument("theory")
    s.add_argument("--model", type=int, required=True)
    return p


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(n=args.n, depth=args.depth, budget=args.budget, max_elements=args.max_elements,
                        max_firings=args.max_firings, countermodel_size=args.countermodel_size,
                        format=args.format, cache_dir=args.cache_dir or os.environ.get(CACHE_ENV), seed=args.seed)
        report = COMMANDS[args.command](args, cfg)
    except InputError as exc:
        if getattr(args, "format", "text") == "json":
            out.write(json.dumps({"schema": REPORT_SCHEMA, "command": args.command, "status": "input-error",
                                  "error": str(exc)}, sort_keys=True, indent=2) + "\n")
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.format == "json":
        out.write(json.dumps(report.to_json(cfg), sort_keys=True, indent=2) + "\n")
    else:
        out.write(report.text + "\n")
    return report.exit_code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
