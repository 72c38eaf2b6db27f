"""Seeded random generators for differential suites: sentences, actions,
gameboard trees with bounded game-sentence counts, model pairs, and the
catalog of language fragments the suites cycle through."""

from __future__ import annotations

import random

from .gameboard import (
    AtEdge,
    DiaEdge,
    ExistsEdge,
    GameboardTree,
    IdleEdge,
    StoreEdge,
    leaf,
)
from .games import predicted_theta_size
from .kripke import KripkeModel, generate_random_model
from .syntax import (
    Action,
    And,
    At,
    Comp,
    Dia,
    Exists,
    FragmentConfig,
    Neg,
    Nom,
    Prop,
    Rel,
    Sentence,
    Signature,
    Star,
    Store,
    Union,
    box,
    conj,
    disj,
    extend_signature,
    forall,
)

FRAGMENTS: list[FragmentConfig] = [
    FragmentConfig(frozenset({"diamond"}), frozenset()),
    FragmentConfig(frozenset({"diamond"}), frozenset({"union", "comp", "star"})),
    FragmentConfig(frozenset({"diamond", "at"}), frozenset()),
    FragmentConfig(frozenset({"diamond", "store"}), frozenset()),
    FragmentConfig(frozenset({"diamond", "at", "store"}), frozenset()),
    FragmentConfig(frozenset({"diamond", "store", "exists"}), frozenset()),
    FragmentConfig(frozenset({"diamond", "at", "store", "exists"}), frozenset()),
]


def default_actions(frag: FragmentConfig) -> tuple[Action, ...]:
    """Edge actions for generated trees: the base relation plus one composite
    per enabled constructor."""
    actions: list[Action] = [Rel("l")]
    if "star" in frag.action_ctors:
        actions.append(Star(Rel("l")))
    if "comp" in frag.action_ctors:
        actions.append(Comp(Rel("l"), Rel("l")))
    if "union" in frag.action_ctors:
        actions.append(Union(Rel("l"), Star(Rel("l")) if "star" in frag.action_ctors else Rel("l")))
    return tuple(actions)


def random_action(rng: random.Random, sig: Signature, frag: FragmentConfig, depth: int = 2) -> Action:
    choices = ["rel"]
    if depth > 0:
        choices += [c for c in ("union", "comp", "star") if c in frag.action_ctors]
    kind = rng.choice(choices)
    if kind == "rel" or not sig.relations:
        return Rel(rng.choice(sig.relations))
    if kind == "union":
        return Union(random_action(rng, sig, frag, depth - 1), random_action(rng, sig, frag, depth - 1))
    if kind == "comp":
        return Comp(random_action(rng, sig, frag, depth - 1), random_action(rng, sig, frag, depth - 1))
    return Star(random_action(rng, sig, frag, depth - 1))


def random_sentence(rng: random.Random, sig: Signature, frag: FragmentConfig, depth: int = 3) -> Sentence:
    atoms: list[Sentence] = [Prop(p) for p in sig.props]
    atoms += [Nom(n) for n in sig.point_names()]
    atoms += [And(()), Neg(And(()))]
    if depth <= 0:
        return rng.choice(atoms)
    kinds = ["atom", "neg", "and", "or"]
    if "diamond" in frag.ops and sig.relations:
        kinds += ["dia", "box"]
    if "at" in frag.ops and sig.point_names():
        kinds.append("at")
    if "store" in frag.ops:
        kinds.append("store")
    if "exists" in frag.ops:
        kinds += ["exists", "forall"]
    kind = rng.choice(kinds)
    if kind == "atom":
        return rng.choice(atoms)
    if kind == "neg":
        return Neg(random_sentence(rng, sig, frag, depth - 1))
    if kind == "and":
        return conj([random_sentence(rng, sig, frag, depth - 1) for _ in range(rng.randint(2, 3))])
    if kind == "or":
        return disj([random_sentence(rng, sig, frag, depth - 1) for _ in range(rng.randint(2, 3))])
    if kind == "dia":
        return Dia(random_action(rng, sig, frag), random_sentence(rng, sig, frag, depth - 1))
    if kind == "box":
        return box(random_action(rng, sig, frag), random_sentence(rng, sig, frag, depth - 1))
    if kind == "at":
        return At(rng.choice(sig.point_names()), random_sentence(rng, sig, frag, depth - 1))
    inner, var = extend_signature(sig)
    body = random_sentence(rng, inner, frag, depth - 1)
    if kind == "store":
        return Store(var, body)
    if kind == "exists":
        return Exists(var, body)
    return forall(var, body)


def random_tree(
    rng: random.Random,
    sig: Signature,
    frag: FragmentConfig,
    actions: tuple[Action, ...],
    max_height: int = 3,
    theta_cap: int = 512,
    attempts: int = 40,
) -> GameboardTree:
    """A random valid tree whose predicted game-sentence count stays within
    the cap; shrinks the height on repeated failures."""

    def build(scope: Signature, height: int) -> GameboardTree:
        if height == 0 or rng.random() < 0.3:
            return leaf(scope)
        children = []
        used_at: set[str] = set()
        used_dia: set[Action] = set()
        n_children = rng.randint(1, 2)
        for _ in range(n_children):
            kinds = ["idle"]
            if "diamond" in frag.ops and actions:
                kinds.append("dia")
            if "at" in frag.ops and scope.point_names():
                kinds.append("at")
            if "store" in frag.ops:
                kinds.append("store")
            if "exists" in frag.ops:
                kinds.append("exists")
            kind = rng.choice(kinds)
            if kind == "idle":
                children.append((IdleEdge(), build(scope, height - 1)))
            elif kind == "dia":
                a = rng.choice(actions)
                if a in used_dia:
                    continue
                used_dia.add(a)
                children.append((DiaEdge(a), build(scope, height - 1)))
            elif kind == "at":
                name = rng.choice(scope.point_names())
                if name in used_at:
                    continue
                used_at.add(name)
                children.append((AtEdge(name), build(scope, height - 1)))
            else:
                inner, _ = extend_signature(scope)
                label = StoreEdge() if kind == "store" else ExistsEdge()
                if any(lab == label for lab, _ in children):
                    continue
                children.append((label, build(inner, height - 1)))
        if not children:
            return leaf(scope)
        return GameboardTree(scope, tuple(children))

    height = max_height
    for i in range(attempts):
        tr = build(sig, height)
        if predicted_theta_size(tr, theta_cap) <= theta_cap:
            return tr
        if i % 5 == 4 and height > 1:
            height -= 1
    return leaf(sig)


def observing_tree(tr: GameboardTree) -> GameboardTree:
    """Close a tree so every node can watch the basic-sentence property: each
    internal node gains an idle path to a leaf. On such trees (complete trees
    among them) a game win coincides with game-sentence equality; trees that
    hide the current state's signs behind modal edges make the game strictly
    stronger than game-sentence equality."""
    if not tr.children:
        return tr
    children = [(lab, observing_tree(ch)) for lab, ch in tr.children]
    if not any(isinstance(lab, IdleEdge) for lab, _ in children):
        children.insert(0, (IdleEdge(), leaf(tr.sig)))
    return GameboardTree(tr.sig, tuple(children))


def small_signature(rng: random.Random, with_nominal: bool | None = None) -> Signature:
    n_props = rng.randint(1, 2)
    nominal = rng.random() < 0.4 if with_nominal is None else with_nominal
    return Signature(
        nominals=("k",) if nominal else (),
        relations=("l",),
        props=tuple(f"p{i}" if i else "p" for i in range(n_props)),
    )


def random_model_pair(
    rng: random.Random,
    sig: Signature,
    max_states: int = 4,
    same_chance: float = 0.25,
) -> tuple[KripkeModel, KripkeModel]:
    """Two random models over a shared signature; sometimes literally equal,
    sometimes perturbed copies, so equivalence verdicts are well mixed."""
    n = rng.randint(1, max_states)
    density = rng.uniform(0.15, 0.7)
    m = generate_random_model(rng.randrange(2**30), n, density, sig)
    roll = rng.random()
    if roll < same_chance:
        return m, m
    if roll < same_chance + 0.35:
        n2 = rng.randint(1, max_states)
        return m, generate_random_model(rng.randrange(2**30), n2, rng.uniform(0.15, 0.7), sig)
    # perturbed copy: flip one edge or one prop
    rels = {r: set(pairs) for r, pairs in m.relation_interp.items()}
    val = {w: set(ps) for w, ps in m.valuation.items()}
    if rng.random() < 0.5 and sig.relations:
        r = rng.choice(sig.relations)
        a, b = rng.choice(m.states), rng.choice(m.states)
        rels[r] ^= {(a, b)}
    else:
        w = rng.choice(m.states)
        p = rng.choice(sig.props)
        val[w] ^= {p}
    other = KripkeModel(
        sig,
        m.states,
        dict(m.nominal_interp),
        {r: frozenset(p) for r, p in rels.items()},
        {w: frozenset(p) for w, p in val.items()},
    )
    return m, other
