"""Signatures, language fragments, and the sentence/action term language.

Surface grammar (ASCII, precedence low -> high: `|`, `&`, prefix operators):

    phi ::= "true" | "false" | IDENT | "~" phi | phi "&" phi | phi "|" phi
          | "<" act ">" phi | "[" act "]" phi | "@" IDENT phi
          | "down" IDENT "." phi | "exists" IDENT "." phi
          | "forall" IDENT "." phi | "(" phi ")"
    act ::= IDENT | act "+" act | act ";" act | act "*" | "(" act ")"

Derived forms (`|`, `[a]`, `forall`, `false`) are expanded while parsing and
never stored; the printer re-introduces them so that parse(print(s)) == s.
Conjunctions are kept canonical: duplicate-free, sorted by a stable term
ordering, and never unary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

OPS = ("diamond", "at", "store", "exists")
ACTION_CTORS = ("union", "comp", "star")

_KEYWORDS = frozenset({"true", "false", "down", "exists", "forall"})


class HdplError(Exception):
    """Base class for errors raised by this package."""


class ParseError(HdplError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UndeclaredSymbolError(HdplError):
    def __init__(self, symbol: str, pos: int | None = None):
        where = f" (at position {pos})" if pos is not None else ""
        super().__init__(f"undeclared symbol '{symbol}'{where}")
        self.symbol = symbol


class FragmentViolationError(HdplError):
    def __init__(self, ctor: str, pos: int | None = None):
        where = f" (at position {pos})" if pos is not None else ""
        super().__init__(f"constructor '{ctor}' is not enabled in this fragment{where}")
        self.ctor = ctor


class SignatureError(HdplError):
    pass


# ---------------------------------------------------------------------------
# Signatures and fragments


@dataclass(frozen=True)
class Signature:
    """Finite vocabulary: nominals, binary relation names, propositional
    symbols, plus the ordered list of variables added by extensions."""

    nominals: tuple[str, ...] = ()
    relations: tuple[str, ...] = ()
    props: tuple[str, ...] = ()
    bound_vars: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nominals", tuple(self.nominals))
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "bound_vars", tuple(self.bound_vars))
        pools = self.nominals + self.relations + self.props + self.bound_vars
        if len(set(pools)) != len(pools):
            raise SignatureError(f"signature name pools are not disjoint: {pools}")

    def all_names(self) -> frozenset[str]:
        return frozenset(self.nominals + self.relations + self.props + self.bound_vars)

    def point_names(self) -> tuple[str, ...]:
        """Names usable as state designators: nominals plus bound variables."""
        return self.nominals + self.bound_vars

    @classmethod
    def from_dict(cls, d: dict) -> "Signature":
        return cls(
            nominals=tuple(d.get("nominals", ())),
            relations=tuple(d.get("relations", ())),
            props=tuple(d.get("props", ())),
            bound_vars=tuple(d.get("bound_vars", ())),
        )

    def to_dict(self) -> dict:
        return {
            "nominals": list(self.nominals),
            "relations": list(self.relations),
            "props": list(self.props),
            "bound_vars": list(self.bound_vars),
        }


def extend_signature(sig: Signature) -> tuple[Signature, str]:
    """Extend `sig` with a fresh variable, named x0, x1, ... by extension
    depth (skipping ahead if a declared symbol already uses the name)."""
    n = len(sig.bound_vars)
    taken = sig.all_names()
    while f"x{n}" in taken:
        n += 1
    var = f"x{n}"
    new = Signature(sig.nominals, sig.relations, sig.props, sig.bound_vars + (var,))
    return new, var


def extend_signature_with(sig: Signature, var: str) -> Signature:
    """Extend `sig` with an explicitly named fresh variable."""
    if var in sig.all_names():
        raise SignatureError(f"variable name '{var}' collides with a declared symbol")
    return Signature(sig.nominals, sig.relations, sig.props, sig.bound_vars + (var,))


@dataclass(frozen=True)
class FragmentConfig:
    """Which sentence operators and action constructors the language keeps.

    The Boolean core (atoms, negation, conjunction) is always present.
    """

    ops: frozenset[str] = frozenset(OPS)
    action_ctors: frozenset[str] = frozenset(ACTION_CTORS)

    def __post_init__(self):
        object.__setattr__(self, "ops", frozenset(self.ops))
        object.__setattr__(self, "action_ctors", frozenset(self.action_ctors))
        bad = self.ops - set(OPS)
        if bad:
            raise SignatureError(f"unknown sentence operators: {sorted(bad)}")
        bad = self.action_ctors - set(ACTION_CTORS)
        if bad:
            raise SignatureError(f"unknown action constructors: {sorted(bad)}")
        if self.action_ctors and "diamond" not in self.ops:
            raise SignatureError("action constructors require the diamond operator")

    @classmethod
    def full(cls) -> "FragmentConfig":
        return cls()

    @classmethod
    def parse(cls, text: str) -> "FragmentConfig":
        """Parse a comma list over diamond,at,store,exists,union,comp,star."""
        ops, ctors = set(), set()
        for item in filter(None, (p.strip() for p in text.split(","))):
            if item in OPS:
                ops.add(item)
            elif item in ACTION_CTORS:
                ctors.add(item)
            else:
                raise SignatureError(f"unknown fragment flag '{item}'")
        return cls(frozenset(ops), frozenset(ctors))

    def describe(self) -> str:
        parts = [op for op in OPS if op in self.ops]
        parts += [c for c in ACTION_CTORS if c in self.action_ctors]
        return ",".join(parts) if parts else "(boolean core)"

    def subsumes(self, other: "FragmentConfig") -> bool:
        return other.ops <= self.ops and other.action_ctors <= self.action_ctors


# ---------------------------------------------------------------------------
# Action terms


@dataclass(frozen=True)
class Rel:
    name: str


@dataclass(frozen=True)
class Union:
    left: "Action"
    right: "Action"


@dataclass(frozen=True)
class Comp:
    left: "Action"
    right: "Action"


@dataclass(frozen=True)
class Star:
    body: "Action"


Action = Rel | Union | Comp | Star


# ---------------------------------------------------------------------------
# Sentence terms


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class Nom:
    """A nominal or bound variable, true exactly at the state it names."""

    name: str


@dataclass(frozen=True)
class And:
    items: tuple["Sentence", ...]


@dataclass(frozen=True)
class Neg:
    body: "Sentence"


@dataclass(frozen=True)
class Dia:
    action: Action
    body: "Sentence"


@dataclass(frozen=True)
class At:
    name: str
    body: "Sentence"


@dataclass(frozen=True)
class Store:
    var: str
    body: "Sentence"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Sentence"


Sentence = Prop | Nom | And | Neg | Dia | At | Store | Exists

TRUE = And(())
FALSE = Neg(TRUE)


def conj(items: Iterable[Sentence]) -> Sentence:
    """Canonical conjunction: deduplicated, sorted, singleton-collapsed."""
    unique = {}
    for s in items:
        unique.setdefault(s, None)
    ordered = sorted(unique, key=print_sentence)
    if len(ordered) == 1:
        return ordered[0]
    return And(tuple(ordered))


def disj(items: Iterable[Sentence]) -> Sentence:
    return Neg(conj([Neg(s) for s in items]))


def box(action: Action, body: Sentence) -> Sentence:
    return Neg(Dia(action, Neg(body)))


def forall(var: str, body: Sentence) -> Sentence:
    return Neg(Exists(var, Neg(body)))


def basic_sentences(sig: Signature) -> tuple[Sentence, ...]:
    """The basic sentences of a signature, in canonical order: nominal and
    variable equations first, then propositional symbols."""
    return tuple(Nom(n) for n in sig.point_names()) + tuple(Prop(p) for p in sig.props)


# ---------------------------------------------------------------------------
# Printing

_P_OR, _P_AND, _P_PREFIX, _P_ATOM = 0, 1, 2, 3


def print_action(a: Action) -> str:
    return _print_act(a, 0)


def _print_act(a: Action, need: int) -> str:
    if isinstance(a, Rel):
        return a.name
    if isinstance(a, Star):
        text = _print_act(a.body, 2) + "*"
        return text
    if isinstance(a, Comp):
        text = _print_act(a.left, 1) + ";" + _print_act(a.right, 2)
        return f"({text})" if need > 1 else text
    if isinstance(a, Union):
        text = _print_act(a.left, 0) + "+" + _print_act(a.right, 1)
        return f"({text})" if need > 0 else text
    raise TypeError(f"not an action: {a!r}")


def print_sentence(s: Sentence) -> str:
    return _print(s, _P_OR)


def _or_parts(s: Sentence) -> list[Sentence] | None:
    # disjunction sugar: ~(~a & ~b & ...)
    if isinstance(s, Neg) and isinstance(s.body, And) and len(s.body.items) >= 2:
        if all(isinstance(i, Neg) for i in s.body.items):
            return [i.body for i in s.body.items]
    return None


def _print(s: Sentence, need: int) -> str:
    if isinstance(s, Prop) or isinstance(s, Nom):
        return s.name
    if isinstance(s, And):
        if not s.items:
            return "true"
        if len(s.items) == 1:
            return _print(s.items[0], need)
        text = " & ".join(_print(i, _P_PREFIX) for i in s.items)
        return f"({text})" if need > _P_AND else text
    if isinstance(s, Neg):
        if s.body == TRUE:
            return "false"
        parts = _or_parts(s)
        if parts is not None:
            text = " | ".join(_print(p, _P_AND) for p in parts)
            return f"({text})" if need > _P_OR else text
        if isinstance(s.body, Dia) and isinstance(s.body.body, Neg):
            return f"[{print_action(s.body.action)}]" + _print(s.body.body.body, _P_PREFIX)
        if isinstance(s.body, Exists) and isinstance(s.body.body, Neg):
            return f"forall {s.body.var} . " + _print(s.body.body.body, _P_PREFIX)
        return "~" + _print(s.body, _P_PREFIX)
    if isinstance(s, Dia):
        return f"<{print_action(s.action)}>" + _print(s.body, _P_PREFIX)
    if isinstance(s, At):
        return f"@{s.name} " + _print(s.body, _P_PREFIX)
    if isinstance(s, Store):
        return f"down {s.var} . " + _print(s.body, _P_PREFIX)
    if isinstance(s, Exists):
        return f"exists {s.var} . " + _print(s.body, _P_PREFIX)
    raise TypeError(f"not a sentence: {s!r}")


# ---------------------------------------------------------------------------
# Tokenizer (shared by the sentence, action and gameboard-tree parsers)

_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*|[()<>\[\]~&|@.;+*]|\S")


def tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        tok = m.group(0)
        if tok.isspace():
            continue
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*|[()<>\[\]~&|@.;+*]", tok):
            raise ParseError(f"unexpected character {tok!r}", m.start())
        tokens.append((tok, m.start()))
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[tuple[str, int]], length: int):
        self.tokens = tokens
        self.i = 0
        self.length = length

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else self.length

    def next(self) -> str:
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of input", self.length)
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str):
        got = self.peek()
        if got != tok:
            raise ParseError(f"expected {tok!r}, found {got!r}", self.pos())
        self.next()

    def ident(self, what: str = "identifier") -> str:
        got = self.peek()
        if got is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", got):
            raise ParseError(f"expected {what}, found {got!r}", self.pos())
        return self.next()


# ---------------------------------------------------------------------------
# Parsing


def parse_action(text: str, sig: Signature, frag: FragmentConfig | None = None) -> Action:
    ts = _TokenStream(tokenize(text), len(text))
    a = _parse_act_union(ts, sig, frag or FragmentConfig.full())
    if ts.peek() is not None:
        raise ParseError(f"trailing input {ts.peek()!r}", ts.pos())
    return a


def _parse_act_union(ts, sig, frag) -> Action:
    a = _parse_act_comp(ts, sig, frag)
    while ts.peek() == "+":
        pos = ts.pos()
        ts.next()
        if "union" not in frag.action_ctors:
            raise FragmentViolationError("union", pos)
        a = Union(a, _parse_act_comp(ts, sig, frag))
    return a


def _parse_act_comp(ts, sig, frag) -> Action:
    a = _parse_act_star(ts, sig, frag)
    while ts.peek() == ";":
        pos = ts.pos()
        ts.next()
        if "comp" not in frag.action_ctors:
            raise FragmentViolationError("comp", pos)
        a = Comp(a, _parse_act_star(ts, sig, frag))
    return a


def _parse_act_star(ts, sig, frag) -> Action:
    a = _parse_act_atom(ts, sig, frag)
    while ts.peek() == "*":
        pos = ts.pos()
        ts.next()
        if "star" not in frag.action_ctors:
            raise FragmentViolationError("star", pos)
        a = Star(a)
    return a


def _parse_act_atom(ts, sig, frag) -> Action:
    if ts.peek() == "(":
        ts.next()
        a = _parse_act_union(ts, sig, frag)
        ts.expect(")")
        return a
    pos = ts.pos()
    name = ts.ident("relation name")
    if name not in sig.relations:
        raise UndeclaredSymbolError(name, pos)
    return Rel(name)


def parse_sentence(text: str, sig: Signature, frag: FragmentConfig | None = None) -> Sentence:
    """Parse the surface syntax into a term, checking symbol declarations and
    fragment gating as the text is consumed."""
    frag = frag or FragmentConfig.full()
    ts = _TokenStream(tokenize(text), len(text))
    s = _parse_or(ts, sig, frag)
    if ts.peek() is not None:
        raise ParseError(f"trailing input {ts.peek()!r}", ts.pos())
    return s


def _parse_or(ts, sig, frag) -> Sentence:
    items = [_parse_and(ts, sig, frag)]
    while ts.peek() == "|":
        ts.next()
        items.append(_parse_and(ts, sig, frag))
    if len(items) == 1:
        return items[0]
    return disj(items)


def _parse_and(ts, sig, frag) -> Sentence:
    items = [_parse_prefix(ts, sig, frag)]
    while ts.peek() == "&":
        ts.next()
        items.append(_parse_prefix(ts, sig, frag))
    if len(items) == 1:
        return items[0]
    return conj(items)


def _parse_binder_var(ts, sig) -> str:
    pos = ts.pos()
    var = ts.ident("variable name")
    if var in _KEYWORDS:
        raise ParseError(f"keyword {var!r} cannot name a variable", pos)
    if var in sig.all_names():
        raise ParseError(f"variable {var!r} collides with a symbol in scope", pos)
    ts.expect(".")
    return var


def _parse_prefix(ts, sig, frag) -> Sentence:
    tok = ts.peek()
    pos = ts.pos()
    if tok is None:
        raise ParseError("unexpected end of input", ts.pos())
    if tok == "(":
        ts.next()
        s = _parse_or(ts, sig, frag)
        ts.expect(")")
        return s
    if tok == "~":
        ts.next()
        return Neg(_parse_prefix(ts, sig, frag))
    if tok == "<":
        ts.next()
        if "diamond" not in frag.ops:
            raise FragmentViolationError("diamond", pos)
        a = _parse_act_union(ts, sig, frag)
        ts.expect(">")
        return Dia(a, _parse_prefix(ts, sig, frag))
    if tok == "[":
        ts.next()
        if "diamond" not in frag.ops:
            raise FragmentViolationError("diamond", pos)
        a = _parse_act_union(ts, sig, frag)
        ts.expect("]")
        return box(a, _parse_prefix(ts, sig, frag))
    if tok == "@":
        ts.next()
        if "at" not in frag.ops:
            raise FragmentViolationError("at", pos)
        name_pos = ts.pos()
        name = ts.ident("nominal or variable")
        if name not in sig.point_names():
            raise UndeclaredSymbolError(name, name_pos)
        return At(name, _parse_prefix(ts, sig, frag))
    if tok == "down":
        ts.next()
        if "store" not in frag.ops:
            raise FragmentViolationError("store", pos)
        var = _parse_binder_var(ts, sig)
        body = _parse_prefix(ts, extend_signature_with(sig, var), frag)
        return Store(var, body)
    if tok == "exists":
        ts.next()
        if "exists" not in frag.ops:
            raise FragmentViolationError("exists", pos)
        var = _parse_binder_var(ts, sig)
        body = _parse_prefix(ts, extend_signature_with(sig, var), frag)
        return Exists(var, body)
    if tok == "forall":
        ts.next()
        if "exists" not in frag.ops:
            raise FragmentViolationError("exists", pos)
        var = _parse_binder_var(ts, sig)
        body = _parse_prefix(ts, extend_signature_with(sig, var), frag)
        return forall(var, body)
    if tok == "true":
        ts.next()
        return TRUE
    if tok == "false":
        ts.next()
        return FALSE
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
        ts.next()
        if tok in sig.props:
            return Prop(tok)
        if tok in sig.point_names():
            return Nom(tok)
        raise UndeclaredSymbolError(tok, pos)
    raise ParseError(f"unexpected token {tok!r}", pos)


# ---------------------------------------------------------------------------
# Well-formedness and fragment validation


def check_action(a: Action, sig: Signature):
    if isinstance(a, Rel):
        if a.name not in sig.relations:
            raise UndeclaredSymbolError(a.name)
    elif isinstance(a, (Union, Comp)):
        check_action(a.left, sig)
        check_action(a.right, sig)
    elif isinstance(a, Star):
        check_action(a.body, sig)
    else:
        raise TypeError(f"not an action: {a!r}")


def check_sentence(s: Sentence, sig: Signature):
    """Raise if `s` is not well-formed over `sig` (undeclared symbols or
    colliding binder names)."""
    if isinstance(s, Prop):
        if s.name not in sig.props:
            raise UndeclaredSymbolError(s.name)
    elif isinstance(s, Nom):
        if s.name not in sig.point_names():
            raise UndeclaredSymbolError(s.name)
    elif isinstance(s, And):
        for i in s.items:
            check_sentence(i, sig)
    elif isinstance(s, Neg):
        check_sentence(s.body, sig)
    elif isinstance(s, Dia):
        check_action(s.action, sig)
        check_sentence(s.body, sig)
    elif isinstance(s, At):
        if s.name not in sig.point_names():
            raise UndeclaredSymbolError(s.name)
        check_sentence(s.body, sig)
    elif isinstance(s, (Store, Exists)):
        check_sentence(s.body, extend_signature_with(sig, s.var))
    else:
        raise TypeError(f"not a sentence: {s!r}")


@dataclass(frozen=True)
class FragmentReport:
    ok: bool
    violations: tuple[tuple[str, str], ...]  # (path, constructor)

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(f"{ctor} at {path}" for path, ctor in self.violations)


def validate_in_fragment(s: Sentence, frag: FragmentConfig) -> FragmentReport:
    """Report every constructor of `s` that the fragment does not enable."""
    out: list[tuple[str, str]] = []

    def walk_act(a: Action, path: str):
        if isinstance(a, Union):
            if "union" not in frag.action_ctors:
                out.append((path, "union"))
            walk_act(a.left, path + "/l")
            walk_act(a.right, path + "/r")
        elif isinstance(a, Comp):
            if "comp" not in frag.action_ctors:
                out.append((path, "comp"))
            walk_act(a.left, path + "/l")
            walk_act(a.right, path + "/r")
        elif isinstance(a, Star):
            if "star" not in frag.action_ctors:
                out.append((path, "star"))
            walk_act(a.body, path + "/b")

    def walk(t: Sentence, path: str):
        if isinstance(t, (Prop, Nom)):
            return
        if isinstance(t, And):
            for i, item in enumerate(t.items):
                walk(item, f"{path}/{i}")
        elif isinstance(t, Neg):
            walk(t.body, path + "/~")
        elif isinstance(t, Dia):
            if "diamond" not in frag.ops:
                out.append((path, "diamond"))
            walk_act(t.action, path + "/act")
            walk(t.body, path + "/<>")
        elif isinstance(t, At):
            if "at" not in frag.ops:
                out.append((path, "at"))
            walk(t.body, path + "/@")
        elif isinstance(t, Store):
            if "store" not in frag.ops:
                out.append((path, "store"))
            walk(t.body, path + "/down")
        elif isinstance(t, Exists):
            if "exists" not in frag.ops:
                out.append((path, "exists"))
            walk(t.body, path + "/exists")

    walk(s, "root")
    return FragmentReport(not out, tuple(out))


# ---------------------------------------------------------------------------
# Renaming (signature morphisms restricted to bijective symbol renamings)


def rename_action(a: Action, mapping: dict[str, str]) -> Action:
    if isinstance(a, Rel):
        return Rel(mapping.get(a.name, a.name))
    if isinstance(a, Union):
        return Union(rename_action(a.left, mapping), rename_action(a.right, mapping))
    if isinstance(a, Comp):
        return Comp(rename_action(a.left, mapping), rename_action(a.right, mapping))
    if isinstance(a, Star):
        return Star(rename_action(a.body, mapping))
    raise TypeError(f"not an action: {a!r}")


def rename_sentence(s: Sentence, mapping: dict[str, str]) -> Sentence:
    """Apply a symbol renaming to every declared symbol (variables are kept)."""
    if isinstance(s, Prop):
        return Prop(mapping.get(s.name, s.name))
    if isinstance(s, Nom):
        return Nom(mapping.get(s.name, s.name))
    if isinstance(s, And):
        return conj([rename_sentence(i, mapping) for i in s.items])
    if isinstance(s, Neg):
        return Neg(rename_sentence(s.body, mapping))
    if isinstance(s, Dia):
        return Dia(rename_action(s.action, mapping), rename_sentence(s.body, mapping))
    if isinstance(s, At):
        return At(mapping.get(s.name, s.name), rename_sentence(s.body, mapping))
    if isinstance(s, Store):
        return Store(s.var, rename_sentence(s.body, mapping))
    if isinstance(s, Exists):
        return Exists(s.var, rename_sentence(s.body, mapping))
    raise TypeError(f"not a sentence: {s!r}")


def canonical_vars(s: Sentence, sig: Signature) -> Sentence:
    """Alpha-rename binder variables to the canonical depth-indexed names the
    signature-extension scheme produces."""

    def walk(t: Sentence, scope: Signature, env: dict[str, str]) -> Sentence:
        if isinstance(t, Prop):
            return t
        if isinstance(t, Nom):
            return Nom(env.get(t.name, t.name))
        if isinstance(t, And):
            return And(tuple(walk(i, scope, env) for i in t.items))
        if isinstance(t, Neg):
            return Neg(walk(t.body, scope, env))
        if isinstance(t, Dia):
            return Dia(t.action, walk(t.body, scope, env))
        if isinstance(t, At):
            return At(env.get(t.name, t.name), walk(t.body, scope, env))
        if isinstance(t, (Store, Exists)):
            inner_scope, fresh = extend_signature(scope)
            inner_env = dict(env)
            inner_env[t.var] = fresh
            body = walk(t.body, inner_scope, inner_env)
            return Store(fresh, body) if isinstance(t, Store) else Exists(fresh, body)
        raise TypeError(f"not a sentence: {t!r}")

    return walk(s, sig, {})
