"""Finite Kripke structures: construction, action interpretation, expansion
and reduct, isomorphism search, reachability, random generation, JSON I/O."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .syntax import (
    Action,
    Comp,
    HdplError,
    Rel,
    Signature,
    SignatureError,
    Star,
    UndeclaredSymbolError,
    Union,
    extend_signature_with,
)

StatePair = tuple[str, str]


class ModelError(HdplError):
    pass


@dataclass(frozen=True, eq=True)
class KripkeModel:
    """A finite first-order frame plus a per-state propositional valuation.

    Values are immutable after construction; treat the mapping fields as
    read-only.
    """

    sig: Signature
    states: tuple[str, ...]
    nominal_interp: dict[str, str]
    relation_interp: dict[str, frozenset[StatePair]]
    valuation: dict[str, frozenset[str]]

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ModelError("a model needs at least one state")
        if len(set(states)) != len(states):
            raise ModelError("duplicate state names")
        object.__setattr__(self, "states", states)
        state_set = set(states)
        interp = dict(self.nominal_interp)
        for name in self.sig.point_names():
            if name not in interp:
                raise ModelError(f"nominal interpretation missing for '{name}'")
            if interp[name] not in state_set:
                raise ModelError(f"nominal '{name}' names unknown state '{interp[name]}'")
        extra = set(interp) - set(self.sig.point_names())
        if extra:
            raise ModelError(f"interpretation for undeclared names: {sorted(extra)}")
        object.__setattr__(self, "nominal_interp", interp)
        rels = {}
        for rel in self.sig.relations:
            pairs = frozenset(self.relation_interp.get(rel, frozenset()))
            for w, v in pairs:
                if w not in state_set or v not in state_set:
                    raise ModelError(f"relation '{rel}' uses unknown state in {(w, v)}")
            rels[rel] = pairs
        extra = set(self.relation_interp) - set(self.sig.relations)
        if extra:
            raise ModelError(f"interpretation for undeclared relations: {sorted(extra)}")
        object.__setattr__(self, "relation_interp", rels)
        val = {}
        prop_set = set(self.sig.props)
        for w in states:
            props = frozenset(self.valuation.get(w, frozenset()))
            if not props <= prop_set:
                raise ModelError(f"state '{w}' carries undeclared props {sorted(props - prop_set)}")
            val[w] = props
        object.__setattr__(self, "valuation", val)

    def __hash__(self):  # pragma: no cover - models are not meant to be hashed
        raise TypeError("KripkeModel is not hashable; use var_fingerprint/state keys")


@dataclass(frozen=True, eq=True)
class PointedModel:
    model: KripkeModel
    current: str

    def __post_init__(self):
        if self.current not in self.model.states:
            raise ModelError(f"current state '{self.current}' not in model")

    def __hash__(self):  # pragma: no cover
        raise TypeError("PointedModel is not hashable")


def pointed(m: KripkeModel, w: str) -> PointedModel:
    return PointedModel(m, w)


def var_fingerprint(m: KripkeModel) -> tuple[tuple[str, str], ...]:
    """Interpretation of the bound variables, in extension order; identifies
    an expansion of a fixed base model."""
    return tuple((x, m.nominal_interp[x]) for x in m.sig.bound_vars)


# ---------------------------------------------------------------------------
# Action interpretation


def _star(pairs: frozenset[StatePair], states: tuple[str, ...]) -> frozenset[StatePair]:
    # reflexive-transitive closure by iterated squaring over the finite pair set
    closure = set(pairs)
    closure.update((w, w) for w in states)
    while True:
        by_src: dict[str, list[str]] = {}
        for a, b in closure:
            by_src.setdefault(a, []).append(b)
        new = set(closure)
        for a, b in closure:
            for c in by_src.get(b, ()):
                new.add((a, c))
        if new == closure:
            return frozenset(closure)
        closure = new


def interpret_action(m: KripkeModel, a: Action) -> frozenset[StatePair]:
    """The accessibility relation an action denotes in a model."""
    if isinstance(a, Rel):
        if a.name not in m.relation_interp:
            raise UndeclaredSymbolError(a.name)
        return m.relation_interp[a.name]
    if isinstance(a, Union):
        return interpret_action(m, a.left) | interpret_action(m, a.right)
    if isinstance(a, Comp):
        left = interpret_action(m, a.left)
        right = interpret_action(m, a.right)
        by_src: dict[str, list[str]] = {}
        for b, c in right:
            by_src.setdefault(b, []).append(c)
        return frozenset((w, c) for w, b in left for c in by_src.get(b, ()))
    if isinstance(a, Star):
        return _star(interpret_action(m, a.body), m.states)
    raise TypeError(f"not an action: {a!r}")


def successor_map(pairs: frozenset[StatePair], states: tuple[str, ...]) -> dict[str, tuple[str, ...]]:
    by_src: dict[str, list[str]] = {w: [] for w in states}
    for a, b in pairs:
        by_src[a].append(b)
    order = {w: i for i, w in enumerate(states)}
    return {w: tuple(sorted(vs, key=order.__getitem__)) for w, vs in by_src.items()}


# ---------------------------------------------------------------------------
# Expansion and reduct


def expand(m: KripkeModel, x: str, w: str) -> KripkeModel:
    """The unique expansion interpreting a fresh variable `x` as state `w`."""
    if w not in m.states:
        raise ModelError(f"witness state '{w}' not in model")
    new_sig = extend_signature_with(m.sig, x)  # raises on stale/colliding names
    interp = dict(m.nominal_interp)
    interp[x] = w
    return KripkeModel(new_sig, m.states, interp, m.relation_interp, m.valuation)


def reduct(m: KripkeModel) -> KripkeModel:
    """Drop the most recently added bound variable (inverse of expand)."""
    if not m.sig.bound_vars:
        raise SignatureError("model signature has no bound variables to drop")
    last = m.sig.bound_vars[-1]
    sig = Signature(m.sig.nominals, m.sig.relations, m.sig.props, m.sig.bound_vars[:-1])
    interp = {k: v for k, v in m.nominal_interp.items() if k != last}
    return KripkeModel(sig, m.states, interp, m.relation_interp, m.valuation)


def reduct_renaming(m: KripkeModel, source_sig: Signature, mapping: dict[str, str]) -> KripkeModel:
    """Reduct of `m` along a bijective symbol renaming from `source_sig` into
    the symbols of `m.sig`."""
    interp = {k: m.nominal_interp[mapping[k]] for k in source_sig.point_names()}
    rels = {r: m.relation_interp[mapping[r]] for r in source_sig.relations}
    inverse_props = {mapping[p]: p for p in source_sig.props}
    val = {
        w: frozenset(inverse_props[p] for p in props if p in inverse_props)
        for w, props in m.valuation.items()
    }
    return KripkeModel(source_sig, m.states, interp, rels, val)


# ---------------------------------------------------------------------------
# Isomorphism search


def verify_isomorphism(pm: PointedModel, pn: PointedModel, h: dict[str, str]) -> bool:
    """Re-check every preservation clause of a candidate isomorphism."""
    m, n = pm.model, pn.model
    if set(h) != set(m.states) or set(h.values()) != set(n.states):
        return False
    if len(set(h.values())) != len(h):
        return False
    if h[pm.current] != pn.current:
        return False
    for name in m.sig.point_names():
        if h[m.nominal_interp[name]] != n.nominal_interp[name]:
            return False
    for w in m.states:
        if m.valuation[w] != n.valuation[h[w]]:
            return False
    for rel in m.sig.relations:
        mapped = frozenset((h[a], h[b]) for a, b in m.relation_interp[rel])
        if mapped != n.relation_interp[rel]:
            return False
    return True


def find_isomorphism(pm: PointedModel, pn: PointedModel) -> dict[str, str] | None:
    """Backtracking search for a point-preserving isomorphism, with valuation
    and degree pruning. Returns the state bijection, or None."""
    m, n = pm.model, pn.model
    if m.sig != n.sig:
        raise ModelError("isomorphism search needs a shared signature")
    if len(m.states) != len(n.states):
        return None

    def profile(model: KripkeModel, w: str) -> tuple:
        noms = tuple(name for name in model.sig.point_names() if model.nominal_interp[name] == w)
        degs = tuple(
            (
                sum(1 for a, _ in model.relation_interp[r] if a == w),
                sum(1 for _, b in model.relation_interp[r] if b == w),
            )
            for r in model.sig.relations
        )
        return (model.valuation[w], noms, degs)

    prof_m = {w: profile(m, w) for w in m.states}
    prof_n = {v: profile(n, v) for v in n.states}
    if sorted(prof_m.values()) != sorted(prof_n.values()):
        return None

    order = [pm.current] + [w for w in m.states if w != pm.current]

    def consistent(h: dict[str, str], w: str, v: str) -> bool:
        if prof_m[w] != prof_n[v]:
            return False
        for r in m.sig.relations:
            rel_n = n.relation_interp[r]
            rel_m = m.relation_interp[r]
            for w2, v2 in h.items():
                if ((w, w2) in rel_m) != ((v, v2) in rel_n):
                    return False
                if ((w2, w) in rel_m) != ((v2, v) in rel_n):
                    return False
            if ((w, w) in rel_m) != ((v, v) in rel_n):
                return False
        return True

    def search(i: int, h: dict[str, str], used: set[str]) -> dict[str, str] | None:
        if i == len(order):
            return dict(h)
        w = order[i]
        candidates = [pn.current] if w == pm.current else [v for v in n.states if v not in used]
        for v in candidates:
            if v in used:
                continue
            if consistent(h, w, v):
                h[w] = v
                used.add(v)
                found = search(i + 1, h, used)
                if found is not None:
                    return found
                del h[w]
                used.discard(v)
        return None

    result = search(0, {}, set())
    if result is not None and not verify_isomorphism(pm, pn, result):
        raise ModelError("internal error: isomorphism failed re-verification")
    return result


# ---------------------------------------------------------------------------
# Reachability


def is_rooted(pm: PointedModel) -> bool:
    """True iff every state is reachable from the current state through the
    union of all relations."""
    m = pm.model
    succ: dict[str, set[str]] = {w: set() for w in m.states}
    for rel in m.sig.relations:
        for a, b in m.relation_interp[rel]:
            succ[a].add(b)
    seen = {pm.current}
    frontier = [pm.current]
    while frontier:
        w = frontier.pop()
        for v in succ[w]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return len(seen) == len(m.states)


def image_finite(m: KripkeModel) -> bool:
    """Trivially true on finite models; exposed for API symmetry."""
    return True


# ---------------------------------------------------------------------------
# Random generation


def _rng(seed_or_rng) -> random.Random:
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


def generate_random_model(seed, n_states: int, edge_density: float, sig: Signature) -> KripkeModel:
    """Deterministic-in-seed random model: nominals placed uniformly, each
    edge and each prop included independently with the given density."""
    if n_states < 1:
        raise ModelError("n_states must be >= 1")
    rng = _rng(seed)
    states = tuple(f"s{i}" for i in range(n_states))
    interp = {name: rng.choice(states) for name in sig.point_names()}
    rels = {
        r: frozenset((a, b) for a in states for b in states if rng.random() < edge_density)
        for r in sig.relations
    }
    val = {
        w: frozenset(p for p in sig.props if rng.random() < edge_density)
        for w in states
    }
    return KripkeModel(sig, states, interp, rels, val)


def generate_random_rooted_model(seed, n_states: int, edge_density: float, sig: Signature) -> KripkeModel:
    """Random model guaranteed rooted at its first state: a random spanning
    arborescence plus density edges."""
    if not sig.relations:
        raise ModelError("a rooted model needs at least one relation")
    rng = _rng(seed)
    m = generate_random_model(rng, n_states, edge_density, sig)
    states = m.states
    rels = {r: set(pairs) for r, pairs in m.relation_interp.items()}
    for i in range(1, n_states):
        parent = states[rng.randrange(i)]
        rel = rng.choice(sig.relations)
        rels[rel].add((parent, states[i]))
    rooted = KripkeModel(sig, states, m.nominal_interp, {r: frozenset(p) for r, p in rels.items()}, m.valuation)
    assert is_rooted(PointedModel(rooted, states[0]))
    return rooted


# ---------------------------------------------------------------------------
# JSON I/O


def model_from_dict(d: dict) -> KripkeModel:
    sig = Signature(
        nominals=tuple(d.get("nominals", {})),
        relations=tuple(d.get("relations", {})),
        props=tuple(d.get("props", {})),
    )
    states = tuple(d["states"])
    rels = {r: frozenset(tuple(p) for p in pairs) for r, pairs in d.get("relations", {}).items()}
    prop_map = d.get("props", {})
    val = {
        w: frozenset(p for p, holders in prop_map.items() if w in holders)
        for w in states
    }
    return KripkeModel(sig, states, dict(d.get("nominals", {})), rels, val)


def model_to_dict(m: KripkeModel) -> dict:
    return {
        "states": list(m.states),
        "nominals": {k: m.nominal_interp[k] for k in m.sig.nominals},
        "relations": {r: sorted([a, b] for a, b in m.relation_interp[r]) for r in m.sig.relations},
        "props": {p: sorted(w for w in m.states if p in m.valuation[w]) for p in m.sig.props},
    }


def load_model(path: str | Path) -> KripkeModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def load_pointed(ref: str) -> PointedModel:
    """Resolve a `path.json:stateName` reference to a pointed model."""
    path, sep, state = ref.rpartition(":")
    if not sep or not path:
        raise ModelError(f"pointed reference '{ref}' is not of the form path.json:state")
    m = load_model(path)
    if state not in m.states:
        raise ModelError(f"state '{state}' not in model {path}")
    return PointedModel(m, state)
