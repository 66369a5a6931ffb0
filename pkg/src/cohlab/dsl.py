"""Line-oriented theory files and formula syntax.

    theory groups
    sort G
    func e : -> G
    func mul : G G -> G
    rel R : G G
    axiom [x:G] mul(x, e) = x |- true

Formulas use ``true false = /\\ \\/ exists x:S.`` and, in a ``classical theory``,
``not``.  Unicode spellings (⊤ ⊥ ∧ ∨ ∃ ¬ ⊢) are accepted as well.  An axiom
without a bracketed context gets its variables (in order of first use) and
their sorts inferred from the symbols they appear under.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .logic import (
    App, And, BOT, Bot, ClassicalFormula, Context, Eq, Exists, Formula, FormulaError,
    Not, Or, Rel, Sequent, Signature, TOP, Theory, Top, Var, format_node,
    formula_errors, rename_bound, term_sort,
)


@dataclass(frozen=True)
class SourceDiagnostic:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"line {self.line}, col {self.col}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics):
        if isinstance(diagnostics, SourceDiagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(map(str, self.diagnostics)))

    @property
    def line(self):
        return self.diagnostics[0].line

    @property
    def col(self):
        return self.diagnostics[0].col


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<turnstile>\|-|⊢)
  | (?P<and>/\\|∧)
  | (?P<or>\\/|∨)
  | (?P<arrow>->|→)
  | (?P<top>⊤)
  | (?P<bot>⊥)
  | (?P<exists>∃)
  | (?P<not>¬)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[=()\[\],:.])
""", re.VERBOSE)

_KEYWORDS = {"true": "top", "top": "top", "false": "bot", "bot": "bot",
             "exists": "exists", "not": "not"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(SourceDiagnostic(line, col0 + pos, f"unexpected character {text[pos]!r}"))
        kind = m.lastgroup
        val = m.group()
        if kind == "ident" and val in _KEYWORDS:
            kind = _KEYWORDS[val]
        elif kind == "punct":
            kind = val
        if kind != "ws":
            out.append(Tok(kind, val, line, col0 + pos))
        pos = m.end()
    out.append(Tok("eof", "", line, col0 + len(text)))
    return out


class _FormulaParser:
    def __init__(self, tokens, signature: Signature, classical: bool, scope: Optional[dict]):
        self.toks = tokens
        self.i = 0
        self.sig = signature
        self.classical = classical
        # scope None means: unknown identifiers become free variables (inferred)
        self.scope = scope
        self.free_order = []

    def peek(self, k=0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, what=None) -> Tok:
        t = self.peek()
        if t.kind != kind:
            self.fail(t, f"expected {what or kind!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def fail(self, tok, msg):
        raise ParseError(SourceDiagnostic(tok.line, tok.col, msg))

    def formula(self, bound):
        left = self.conj(bound)
        while self.peek().kind == "or":
            self.next()
            left = Or(left, self.conj(bound))
        return left

    def conj(self, bound):
        left = self.unary(bound)
        while self.peek().kind == "and":
            self.next()
            left = And(left, self.unary(bound))
        return left

    def unary(self, bound):
        t = self.peek()
        if t.kind == "not":
            self.next()
            if not self.classical:
                self.fail(t, "classical connective in coherent theory")
            return Not(self.unary(bound))
        if t.kind == "exists":
            self.next()
            binders = [self.binder()]
            while self.peek().kind == ",":
                self.next()
                binders.append(self.binder())
            self.expect(".", ".")
            inner = set(bound) | {n for n, _ in binders}
            body = self.formula(inner)
            for n, s in reversed(binders):
                body = Exists(n, s, body)
            return body
        return self.primary(bound)

    def binder(self):
        name = self.expect("ident", "variable")
        self.expect(":", ":")
        sort = self.expect("ident", "sort")
        if sort.text not in self.sig.sorts:
            self.fail(sort, f"unknown sort {sort.text!r}")
        return name.text, sort.text

    def primary(self, bound):
        t = self.peek()
        if t.kind == "top":
            self.next()
            return TOP
        if t.kind == "bot":
            self.next()
            return BOT
        if t.kind == "(":
            self.next()
            f = self.formula(bound)
            self.expect(")", ")")
            return f
        if t.kind != "ident":
            self.fail(t, f"expected a formula, found {t.text or 'end of input'!r}")
        if self.sig.is_rel(t.text) and t.text not in bound and not self._in_scope(t.text):
            self.next()
            args = self.args(bound) if self.peek().kind == "(" else ()
            want = self.sig.rel(t.text)
            if len(want) != len(args):
                self.fail(t, f"arity mismatch: {t.text} expects {len(want)} arguments, got {len(args)}")
            return Rel(t.text, tuple(args))
        left = self.term(bound)
        eq = self.peek()
        if eq.kind != "=":
            self.fail(eq, f"expected '=' after term {left}")
        self.next()
        return Eq(left, self.term(bound))

    def _in_scope(self, name):
        return self.scope is not None and name in self.scope

    def args(self, bound):
        self.expect("(", "(")
        out = []
        if self.peek().kind != ")":
            out.append(self.term(bound))
            while self.peek().kind == ",":
                self.next()
                out.append(self.term(bound))
        self.expect(")", ")")
        return out

    def term(self, bound):
        t = self.expect("ident", "term")
        name = t.text
        if name in bound or self._in_scope(name):
            if self.peek().kind == "(":
                self.fail(self.peek(), f"variable {name!r} applied to arguments")
            return Var(name)
        if self.sig.is_fn(name):
            args = self.args(bound) if self.peek().kind == "(" else []
            want, _ = self.sig.fn(name)
            if len(want) != len(args):
                self.fail(t, f"arity mismatch: {name} expects {len(want)} arguments, got {len(args)}")
            return App(name, tuple(args))
        if self.sig.is_rel(name):
            self.fail(t, f"relation {name!r} used as a term")
        if self.scope is not None:
            self.fail(t, f"unbound variable {name!r}")
        if self.peek().kind == "(":
            self.fail(t, f"unknown function symbol {name!r}")
        if name not in self.free_order:
            self.free_order.append(name)
        return Var(name)


def _infer_sorts(sig: Signature, nodes, names, first_tok) -> dict:
    sorts = {}

    def visit_term(t, want, local):
        if isinstance(t, Var):
            if want is not None and t.name in names and t.name not in local and t.name not in sorts:
                sorts[t.name] = want
                return True
            return False
        changed = False
        arg_sorts, _ = sig.fn(t.fn)
        for a, s in zip(t.args, arg_sorts):
            changed |= visit_term(a, s, local)
        return changed

    def sort_of(t, local):
        if isinstance(t, Var):
            return local.get(t.name, sorts.get(t.name))
        return sig.fn(t.fn)[1]

    def visit(node, local):
        changed = False
        if isinstance(node, Eq):
            ls, rs = sort_of(node.left, local), sort_of(node.right, local)
            changed |= visit_term(node.left, rs, local)
            changed |= visit_term(node.right, ls, local)
        elif isinstance(node, Rel):
            for a, s in zip(node.args, sig.rel(node.name)):
                changed |= visit_term(a, s, local)
        elif isinstance(node, (And, Or)):
            changed |= visit(node.left, local)
            changed |= visit(node.right, local)
        elif isinstance(node, Exists):
            changed |= visit(node.body, {**local, node.var: node.sort})
        elif isinstance(node, Not):
            changed |= visit(node.body, local)
        return changed

    while any([visit(n, {}) for n in nodes]):
        pass
    for n in names:
        if n not in sorts:
            if len(sig.sorts) == 1:
                sorts[n] = sig.sorts[0]
            else:
                raise ParseError(SourceDiagnostic(first_tok.line, first_tok.col,
                                                  f"cannot infer sort of variable {n!r}"))
    return sorts


def _parse_context(toks, i, sig: Signature):
    """Parse ``[x:S, y:T]`` starting at toks[i]; return (Context, next index)."""
    p = _FormulaParser(toks, sig, False, {})
    p.i = i
    p.expect("[", "[")
    pairs = []
    seen = set()
    if p.peek().kind != "]":
        while True:
            name_tok = p.peek()
            name, sort = p.binder()
            if name in seen:
                p.fail(name_tok, f"variable clash: {name!r} occurs twice in context")
            seen.add(name)
            pairs.append((name, sort))
            if p.peek().kind == ",":
                p.next()
                continue
            break
    p.expect("]", "]")
    return Context(tuple(pairs)), p.i


def _finish(sig, ctx, bodies, classical, tok):
    cls = ClassicalFormula if classical else Formula
    out = []
    for body in bodies:
        body = rename_bound(body, ctx.names)
        try:
            f = cls(ctx, body)
        except FormulaError as exc:
            raise ParseError(SourceDiagnostic(tok.line, tok.col, str(exc)))
        errs = formula_errors(sig, f, classical=classical)
        if errs:
            raise ParseError([SourceDiagnostic(tok.line, tok.col, e) for e in errs])
        out.append(f)
    return out


def _parse_sides(toks, sig, classical, allow_sequent=True, line=1):
    """Shared driver for formulas and sequents with optional leading context."""
    i = 0
    ctx = None
    if toks[0].kind == "[":
        ctx, i = _parse_context(toks, 0, sig)
    p = _FormulaParser(toks, sig, classical, None if ctx is None else set(ctx.names))
    p.i = i
    start = p.peek()
    if allow_sequent and p.peek().kind == "turnstile":
        lhs = TOP
    else:
        lhs = p.formula(set())
    rhs = None
    if allow_sequent:
        p.expect("turnstile", "|-")
        rhs = p.formula(set())
    end = p.peek()
    if end.kind != "eof":
        p.fail(end, f"unexpected {end.text!r}")
    bodies = [lhs] if rhs is None else [lhs, rhs]
    if ctx is None:
        names = p.free_order
        sorts = _infer_sorts(sig, bodies, names, start)
        ctx = Context(tuple((n, sorts[n]) for n in names))
    return _finish(sig, ctx, bodies, classical, start)


def parse_formula(text: str, signature: Signature, context: Optional[Context] = None,
                  classical: bool = False) -> Formula:
    """Parse a formula; ``[x:S] body`` or bare body with an explicit/inferred context."""
    if context is not None:
        text = f"{context} {text}"
    return _parse_sides(tokenize(text), signature, classical, allow_sequent=False)[0]


def parse_sequent(text: str, signature: Signature, classical: bool = False) -> Sequent:
    lhs, rhs = _parse_sides(tokenize(text), signature, classical)
    return Sequent(lhs, rhs)


def parse_context(text: str, signature: Signature) -> Context:
    text = text.strip()
    if not text.startswith("["):
        text = f"[{text}]"
    toks = tokenize(text)
    ctx, i = _parse_context(toks, 0, signature)
    if toks[i].kind != "eof":
        raise ParseError(SourceDiagnostic(toks[i].line, toks[i].col, f"unexpected {toks[i].text!r}"))
    return ctx


def _strip_comment(line: str) -> str:
    idx = line.find("#")
    return line if idx < 0 else line[:idx]


def parse_theory(text: str) -> Theory:
    name = None
    classical = False
    sorts, functions, relations = [], [], []
    axiom_lines = []
    errors = []
    declared = set()

    def err(ln, col, msg):
        errors.append(SourceDiagnostic(ln, col, msg))

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        col = len(line) - len(stripped) + 1
        word, _, rest = stripped.partition(" ")
        rest_col = col + len(word) + 1
        try:
            if word in ("theory", "classical"):
                if name is not None:
                    err(ln, col, "duplicate theory header")
                    continue
                if word == "classical":
                    w2, _, rest = rest.strip().partition(" ")
                    if w2 != "theory":
                        err(ln, col, "expected 'classical theory NAME'")
                        continue
                    classical = True
                name = rest.strip()
                if not re.fullmatch(r"[A-Za-z0-9_.\-]+", name or ""):
                    err(ln, col, "expected a theory name")
                continue
            if name is None:
                err(ln, col, "expected 'theory NAME' header first")
                name = ""
            if word == "sort":
                for t in tokenize(rest, ln, rest_col)[:-1]:
                    if t.kind != "ident":
                        err(t.line, t.col, f"expected a sort name, found {t.text!r}")
                    elif t.text in sorts:
                        err(t.line, t.col, f"duplicate sort {t.text!r}")
                    else:
                        sorts.append(t.text)
            elif word in ("func", "rel", "const"):
                toks = tokenize(rest, ln, rest_col)
                if len(toks) < 3 or toks[0].kind != "ident" or toks[1].kind != ":":
                    err(ln, rest_col, f"expected '{word} NAME : ...'")
                    continue
                sym = toks[0]
                if sym.text in declared:
                    err(sym.line, sym.col, f"duplicate symbol {sym.text!r}")
                    continue
                body = toks[2:-1]
                for t in body:
                    if t.kind not in ("ident", "arrow"):
                        raise ParseError(SourceDiagnostic(t.line, t.col, f"unexpected {t.text!r}"))
                    if t.kind == "ident" and t.text not in sorts:
                        raise ParseError(SourceDiagnostic(t.line, t.col, f"undeclared sort {t.text!r}"))
                if word == "rel":
                    if any(t.kind == "arrow" for t in body):
                        err(ln, col, "relation declarations take no result sort")
                        continue
                    relations.append((sym.text, tuple(t.text for t in body)))
                else:
                    if word == "const":
                        args, res = [], body
                    else:
                        arrows = [k for k, t in enumerate(body) if t.kind == "arrow"]
                        if len(arrows) != 1:
                            err(ln, col, "function declaration needs exactly one '->'")
                            continue
                        args, res = body[:arrows[0]], body[arrows[0] + 1:]
                    if len(res) != 1:
                        err(ln, col, "function declaration needs exactly one result sort")
                        continue
                    functions.append((sym.text, tuple(t.text for t in args), res[0].text))
                declared.add(sym.text)
            elif word == "axiom":
                axiom_lines.append((ln, rest_col, rest))
            else:
                err(ln, col, f"unknown declaration {word!r}")
        except ParseError as exc:
            errors.extend(exc.diagnostics)
    if name is None:
        errors.append(SourceDiagnostic(1, 1, "expected 'theory NAME' header"))
    sig = Signature(tuple(sorts), tuple(functions), tuple(relations))
    axioms = []
    for ln, col, rest in axiom_lines:
        try:
            lhs, rhs = _parse_sides(tokenize(rest, ln, col), sig, classical)
            axioms.append(Sequent(lhs, rhs))
        except ParseError as exc:
            errors.extend(exc.diagnostics)
    if errors:
        raise ParseError(errors)
    return Theory(name, sig, tuple(axioms), classical)


def load_theory(path) -> Theory:
    with open(path, encoding="utf-8") as fh:
        return parse_theory(fh.read())


def format_sequent(seq: Sequent) -> str:
    return f"{seq.context} {format_node(seq.lhs.body)} |- {format_node(seq.rhs.body)}"


def format_formula(f: Formula) -> str:
    return f"{f.context} {format_node(f.body)}"


def format_theory(theory: Theory) -> str:
    sig = theory.signature
    lines = [("classical theory " if theory.classical else "theory ") + theory.name]
    for s in sig.sorts:
        lines.append(f"sort {s}")
    for n, args, res in sig.functions:
        lhs = " ".join(args)
        lines.append(f"func {n} : {lhs + ' ' if lhs else ''}-> {res}")
    for n, args in sig.relations:
        lines.append(f"rel {n} :{' ' if args else ''}{' '.join(args)}")
    for ax in theory.axioms:
        lines.append(f"axiom {format_sequent(ax)}")
    return "\n".join(lines) + "\n"
