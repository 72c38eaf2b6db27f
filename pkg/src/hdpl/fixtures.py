"""Built-in example models and formulas used by the demo scenarios, the CLI
replay command, and the test suite."""

from __future__ import annotations

from .kripke import KripkeModel, PointedModel
from .syntax import Signature

# Shared signatures
SIG_P = Signature(relations=("l",), props=("p",))
SIG_PQ = Signature(relations=("l",), props=("p", "q"))
SIG_NOM = Signature(nominals=("k1", "k2"), relations=("l",))


def fork_pair() -> tuple[PointedModel, PointedModel]:
    """A fork with two p-successors against a fork with one: the smallest pair
    separating game equivalence from back-and-forth equivalence when retrieve
    is absent."""
    left = KripkeModel(
        SIG_P,
        states=("0", "1", "2"),
        nominal_interp={},
        relation_interp={"l": frozenset({("0", "1"), ("0", "2")})},
        valuation={"0": frozenset(), "1": frozenset({"p"}), "2": frozenset({"p"})},
    )
    right = KripkeModel(
        SIG_P,
        states=("0", "1"),
        nominal_interp={},
        relation_interp={"l": frozenset({("0", "1")})},
        valuation={"0": frozenset(), "1": frozenset({"p"})},
    )
    return PointedModel(left, "0"), PointedModel(right, "0")


def isolated_state_pair() -> tuple[PointedModel, PointedModel]:
    """Models that differ only outside the reachable component: an unlabeled
    isolated state on the left against a q-labeled appendage on the right.
    Separates quantified game equivalence from back-and-forth equivalence
    when retrieve is absent."""
    left = KripkeModel(
        SIG_PQ,
        states=("0", "1", "2", "3"),
        nominal_interp={},
        relation_interp={"l": frozenset({("0", "1"), ("0", "2")})},
        valuation={
            "0": frozenset(),
            "1": frozenset({"p"}),
            "2": frozenset({"p"}),
            "3": frozenset(),
        },
    )
    right = KripkeModel(
        SIG_PQ,
        states=("0", "1", "2", "3", "4"),
        nominal_interp={},
        relation_interp={"l": frozenset({("0", "1"), ("0", "2"), ("3", "4")})},
        valuation={
            "0": frozenset(),
            "1": frozenset({"p"}),
            "2": frozenset({"p"}),
            "3": frozenset({"q"}),
            "4": frozenset({"q"}),
        },
    )
    return PointedModel(left, "0"), PointedModel(right, "0")


def loop_model() -> KripkeModel:
    """Two states cycling into each other, each with a terminal p-successor."""
    return KripkeModel(
        SIG_P,
        states=("0", "1", "a", "b"),
        nominal_interp={},
        relation_interp={"l": frozenset({("0", "1"), ("1", "0"), ("0", "a"), ("1", "b")})},
        valuation={
            "0": frozenset(),
            "1": frozenset(),
            "a": frozenset({"p"}),
            "b": frozenset({"p"}),
        },
    )


def unrolled_model(depth: int) -> KripkeModel:
    """Finite truncation of the infinite unrolling of the loop: a chain
    0 -> 1 -> ... -> depth where every chain node keeps its terminal
    p-successor. Ends are distinguishable artifacts of the truncation."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    chain = [str(i) for i in range(depth + 1)]
    leaves = [("a" if i % 2 == 0 else "b") + str(i) for i in range(depth + 1)]
    edges = {(chain[i], chain[i + 1]) for i in range(depth)}
    edges |= {(chain[i], leaves[i]) for i in range(depth + 1)}
    val = {w: frozenset() for w in chain}
    val.update({w: frozenset({"p"}) for w in leaves})
    return KripkeModel(
        SIG_P,
        states=tuple(chain + leaves),
        nominal_interp={},
        relation_interp={"l": frozenset(edges)},
        valuation=val,
    )


def loop_pair(depth: int = 4) -> tuple[PointedModel, PointedModel]:
    return PointedModel(loop_model(), "0"), PointedModel(unrolled_model(depth), "0")


def nominal_chain(n: int) -> PointedModel:
    """A chain of n states with k1 naming the first and k2 the last."""
    if n < 2:
        raise ValueError("chain needs at least 2 states")
    states = tuple(f"s{i}" for i in range(n))
    edges = frozenset((states[i], states[i + 1]) for i in range(n - 1))
    return PointedModel(
        KripkeModel(
            SIG_NOM,
            states=states,
            nominal_interp={"k1": states[0], "k2": states[-1]},
            relation_interp={"l": edges},
            valuation={w: frozenset() for w in states},
        ),
        states[0],
    )


def nominal_two_cycle() -> PointedModel:
    """Two states cycling, with k1 and k2 at the two states."""
    return PointedModel(
        KripkeModel(
            SIG_NOM,
            states=("0", "1"),
            nominal_interp={"k1": "0", "k2": "1"},
            relation_interp={"l": frozenset({("0", "1"), ("1", "0")})},
            valuation={"0": frozenset(), "1": frozenset()},
        ),
        "0",
    )


def nominal_loop_model(k1_at: str = "0", k2_at: str = "1") -> PointedModel:
    """The loop model re-signed with two nominals (and no props)."""
    return PointedModel(
        KripkeModel(
            SIG_NOM,
            states=("0", "1", "a", "b"),
            nominal_interp={"k1": k1_at, "k2": k2_at},
            relation_interp={"l": frozenset({("0", "1"), ("1", "0"), ("0", "a"), ("1", "b")})},
            valuation={w: frozenset() for w in ("0", "1", "a", "b")},
        ),
        "0",
    )


def finite_orders_formula() -> str:
    """Axioms pinning discrete linear orders with named endpoints: k1 has a
    unique successor and no predecessor, k2 a unique predecessor and no
    successor, interior states have unique neighbours both ways, and any two
    states are connected through the transitive closure. Only finite models
    satisfy the conjunction."""
    phi1 = (
        "(exists x . (@k1 <l> x & forall y . (~@k1 <l> y | @x y)))"
        " & (forall y . ~@y <l> k1)"
    )
    phi2 = (
        "(exists x . (@x <l> k2 & forall y . (~@y <l> k2 | @x y)))"
        " & (forall y . ~@k2 <l> y)"
    )
    phi3 = (
        "forall x . (@x k1 | @x k2 |"
        " ((exists y . (@y <l> x & forall z . (~@z <l> x | @y z)))"
        "  & (exists y . (@x <l> y & forall z . (~@x <l> z | @y z)))))"
    )
    phi4 = "forall x . forall y . (@x <l*> y | @y <l*> x)"
    return f"({phi1}) & ({phi2}) & ({phi3}) & ({phi4})"
