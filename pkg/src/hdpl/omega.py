"""Countable equivalence games solved as finite safety games, plus the
companion notions: semantic action-pair closure, level-indexed bisimulation
families with validation/extraction/shifting, basic partial isomorphisms and
back-and-forth systems, and the image-finite / rooted-model report harnesses.

Arena positions abstract the two players' naming histories into a set of
named state correspondences plus the current pair; the safety condition is
basic-sentence agreement of the current pair together with consistency
against every named correspondence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .checker import SignatureMismatchError
from .gameboard import complete_tree
from .games import char_formula
from .kripke import (
    KripkeModel,
    PointedModel,
    find_isomorphism,
    is_rooted,
    successor_map,
)
from .syntax import (
    Action,
    Comp,
    FragmentConfig,
    HdplError,
    Rel,
    Star,
    Union,
    print_action,
)

Pair = tuple[str, str]
Position = tuple[frozenset[Pair], Pair]


class OmegaError(HdplError):
    pass


class ClosureOverflowError(OmegaError):
    pass


# ---------------------------------------------------------------------------
# Semantic action-pair closure


@dataclass(frozen=True)
class ActionPair:
    """A pair of accessibility relations realized by one action term on the
    two models; the term is the first witness found."""

    term: Action
    left: frozenset[Pair]
    right: frozenset[Pair]


def _star_pairs(pairs: frozenset[Pair], states: tuple[str, ...]) -> frozenset[Pair]:
    closure = set(pairs)
    closure.update((w, w) for w in states)
    changed = True
    while changed:
        changed = False
        by_src: dict[str, list[str]] = {}
        for a, b in closure:
            by_src.setdefault(a, []).append(b)
        for a, b in list(closure):
            for c in by_src.get(b, ()):
                if (a, c) not in closure:
                    closure.add((a, c))
                    changed = True
    return frozenset(closure)


def _comp_pairs(left: frozenset[Pair], right: frozenset[Pair]) -> frozenset[Pair]:
    by_src: dict[str, list[str]] = {}
    for b, c in right:
        by_src.setdefault(b, []).append(c)
    return frozenset((a, c) for a, b in left for c in by_src.get(b, ()))


def action_pair_closure(
    m: KripkeModel,
    n: KripkeModel,
    ctors: frozenset[str] | set[str],
    cap: int = 4096,
) -> list[ActionPair]:
    """Least set of relation pairs containing every base relation's pair and
    closed pointwise under the enabled constructors. Distinct action terms
    denoting the same relation pair collapse to one entry."""
    if m.sig.relations != n.sig.relations:
        raise SignatureMismatchError("models must share relation names")
    items: list[ActionPair] = []
    seen: set[tuple[frozenset[Pair], frozenset[Pair]]] = set()

    def add(term: Action, left: frozenset[Pair], right: frozenset[Pair]) -> bool:
        key = (left, right)
        if key in seen:
            return False
        if len(items) >= cap:
            raise ClosureOverflowError(f"action-pair closure exceeded cap {cap}")
        seen.add(key)
        items.append(ActionPair(term, left, right))
        return True

    for rel in m.sig.relations:
        add(Rel(rel), m.relation_interp[rel], n.relation_interp[rel])
    changed = True
    while changed:
        changed = False
        snapshot = list(items)
        if "star" in ctors:
            for p in snapshot:
                if add(Star(p.term), _star_pairs(p.left, m.states), _star_pairs(p.right, n.states)):
                    changed = True
        if "union" in ctors:
            for p, q in itertools.product(snapshot, snapshot):
                if add(Union(p.term, q.term), p.left | q.left, p.right | q.right):
                    changed = True
        if "comp" in ctors:
            for p, q in itertools.product(snapshot, snapshot):
                if add(Comp(p.term, q.term), _comp_pairs(p.left, q.left), _comp_pairs(p.right, q.right)):
                    changed = True
    return items


# ---------------------------------------------------------------------------
# The arena and the safety solver


class _Arena:
    def __init__(self, frag: FragmentConfig, m: KripkeModel, n: KripkeModel):
        if m.sig != n.sig:
            raise SignatureMismatchError("models must share a signature")
        if m.sig.bound_vars:
            raise OmegaError("countable games start from variable-free signatures")
        self.frag = frag
        self.m = m
        self.n = n
        self.agree: dict[Pair, bool] = {}
        for w in m.states:
            for v in n.states:
                ok = m.valuation[w] == n.valuation[v] and all(
                    (m.nominal_interp[k] == w) == (n.nominal_interp[k] == v)
                    for k in m.sig.nominals
                )
                self.agree[(w, v)] = ok
        self.nominal_pairs = [
            (m.nominal_interp[k], n.nominal_interp[k]) for k in m.sig.nominals
        ]
        if "diamond" in frag.ops:
            self.action_pairs = action_pair_closure(m, n, frag.action_ctors)
            self.succ = [
                (successor_map(ap.left, m.states), successor_map(ap.right, n.states))
                for ap in self.action_pairs
            ]
        else:
            self.action_pairs = []
            self.succ = []

    def prop(self, pos: Position) -> bool:
        pairs, (w, v) = pos
        if not self.agree[(w, v)]:
            return False
        for a, b in pairs:
            if (w == a) != (v == b):
                return False
        return True

    def options(self, pos: Position):
        """Yield, per challenger option, the list of positions the answering
        player may choose among."""
        pairs, (w, v) = pos
        ops = self.frag.ops
        if "diamond" in ops:
            for sl, sr in self.succ:
                right_choices = sr[v]
                for w2 in sl[w]:
                    yield [(pairs, (w2, v2)) for v2 in right_choices]
                left_choices = sl[w]
                for v2 in right_choices:
                    yield [(pairs, (w2, v2)) for w2 in left_choices]
        if "at" in ops:
            for target in self.nominal_pairs:
                yield [(pairs, target)]
            for target in pairs:
                yield [(pairs, target)]
        if "store" in ops:
            yield [(pairs | {(w, v)}, (w, v))]
        if "exists" in ops:
            for w1 in self.m.states:
                yield [(pairs | {(w1, v1)}, (w, v)) for v1 in self.n.states]
            for v1 in self.n.states:
                yield [(pairs | {(w1, v1)}, (w, v)) for w1 in self.m.states]


@dataclass
class OmegaResult:
    winner: str  # 'eloise' | 'abelard'
    init: Position
    safe: set[Position] | None
    dead: set[Position]
    runs: int
    _arena: _Arena = field(repr=False)
    _ranks: dict[Position, int] | None = field(default=None, repr=False)

    @property
    def eloise_wins(self) -> bool:
        return self.winner == "eloise"

    def dead_ranks(self) -> dict[Position, int]:
        """Rounds-to-violation rank of every position proven unsafe."""
        if self._ranks is None:
            self._ranks = _compute_ranks(self._arena, self.dead)
        return self._ranks

    def loss_rank(self) -> int | None:
        """Minimal number of rounds within which the challenger can force a
        violation, exact via iterative deepening; None on a survivor win."""
        if self.winner != "abelard":
            return None
        upper = self.dead_ranks()[self.init]
        for d in range(upper + 1):
            if not _bounded_survive(self._arena, self.init, d):
                return d
        return upper

    def stabilization_height(self, cap: int = 8) -> int:
        """Number of fixpoint removal rounds observed on the explored arena;
        a proxy for the tree height at which verdicts stop changing."""
        if self.winner == "abelard":
            return max(1, min(self.loss_rank(), cap))
        ranks = self.dead_ranks()
        return max(1, min(1 + max(ranks.values(), default=0), cap))


def omega_solve(frag: FragmentConfig, left: PointedModel, right: PointedModel) -> OmegaResult:
    """Decide countable game equivalence of two pointed models by solving the
    induced finite safety game.

    The solver explores lazily and optimistically from the initial position:
    cycles are assumed safe, disproofs (property violations, options with no
    surviving answer) are permanent, and a run that certified the initial
    position while any disproof occurred is restarted, because its
    assumptions may have leaned on a position that later died. The final run
    either disproves the initial position (sound immediately) or completes
    with no new deaths, in which case its certified set is closed under the
    answering player's strategy and hence genuinely safe.
    """
    arena = _Arena(frag, left.model, right.model)
    init: Position = (frozenset(), (left.current, right.current))
    dead: set[Position] = set()
    runs = 0
    while True:
        runs += 1
        certified, new_deaths, init_alive = _attempt(arena, init, dead)
        if not init_alive:
            return OmegaResult("abelard", init, None, dead, runs, arena)
        if new_deaths == 0:
            return OmegaResult("eloise", init, certified, dead, runs, arena)


def _attempt(arena: _Arena, init: Position, dead: set[Position]):
    """One optimistic depth-first certification pass. Returns the set of
    positions certified in this pass, the number of new disproofs, and
    whether the initial position survived.

    Iterative so depth is not bounded by the interpreter stack. Each frame
    is [pos, options, option_index, reply_index, fresh].
    """
    certified: set[Position] = set()
    onstack: set[Position] = set()
    deaths = 0
    result = True
    stack: list[list] = [[init, None, 0, 0, True]]
    while stack:
        f = stack[-1]
        pos = f[0]
        if f[4]:
            f[4] = False
            if pos in dead:
                stack.pop()
                result = False
                continue
            if pos in certified or pos in onstack:
                stack.pop()
                result = True
                continue
            if not arena.prop(pos):
                dead.add(pos)
                deaths += 1
                stack.pop()
                result = False
                continue
            onstack.add(pos)
            f[1] = list(arena.options(pos))
        else:
            # a child visit for reply (f[2], f[3]) just returned `result`
            if result:
                f[2] += 1  # option answered; move to the next option
                f[3] = 0
            else:
                f[3] += 1  # try the next candidate answer
        pushed = False
        while f[2] < len(f[1]):
            replies = f[1][f[2]]
            if f[3] >= len(replies):
                # no surviving answer to this option: disproven
                onstack.discard(pos)
                dead.add(pos)
                deaths += 1
                stack.pop()
                result = False
                pushed = True
                break
            r = replies[f[3]]
            if r in dead:
                f[3] += 1
                continue
            if r in certified or r in onstack:
                f[2] += 1  # answered by an already-live position
                f[3] = 0
                continue
            stack.append([r, None, 0, 0, True])
            pushed = True
            break
        if pushed:
            continue
        onstack.discard(pos)
        certified.add(pos)
        stack.pop()
        result = True
    return certified, deaths, result


def _bounded_survive(arena: _Arena, pos: Position, depth: int) -> bool:
    """Can the survivor last `depth` rounds from `pos`? Plain bounded-depth
    game search on arena positions."""
    memo: dict[tuple, bool] = {}

    def go(p: Position, d: int) -> bool:
        key = (p, d)
        got = memo.get(key)
        if got is not None:
            return got
        if not arena.prop(p):
            memo[key] = False
            return False
        if d == 0:
            memo[key] = True
            return True
        res = all(any(go(r, d - 1) for r in replies) for replies in arena.options(p))
        memo[key] = res
        return res

    return go(pos, depth)


def _compute_ranks(arena: _Arena, dead: set[Position]) -> dict[Position, int]:
    ranks: dict[Position, int] = {}
    pending = set(dead)
    while pending:
        progressed = False
        for pos in list(pending):
            if not arena.prop(pos):
                ranks[pos] = 0
                pending.discard(pos)
                progressed = True
                continue
            best = None
            for replies in arena.options(pos):
                if not all(r in dead for r in replies):
                    continue
                if not all(r in ranks for r in replies):
                    continue
                cand = 1 + max((ranks[r] for r in replies), default=0)
                if best is None or cand < best:
                    best = cand
            if best is not None:
                ranks[pos] = best
                pending.discard(pos)
                progressed = True
        if not progressed:
            # remaining disproofs lean on each other; resolve with a big rank
            for pos in pending:
                ranks[pos] = len(dead)
            break
    return ranks


# ---------------------------------------------------------------------------
# Level-indexed bisimulation families

Entry = tuple[tuple[tuple[str, ...], str], tuple[tuple[str, ...], str]]


@dataclass
class LBisimFamily:
    """For each level up to l_max, a set of ((left-tuple, left-state),
    (right-tuple, right-state)) entries; tuples at level l have length l."""

    levels: dict[int, set[Entry]]
    l_max: int

    def entries(self, level: int) -> set[Entry]:
        return self.levels.get(level, set())

    def relates(self, w: str, v: str) -> bool:
        return (((), w), ((), v)) in self.entries(0)

    def size(self) -> int:
        return sum(len(s) for s in self.levels.values())


@dataclass(frozen=True)
class BisimReport:
    ok: bool
    violations: tuple[str, ...]
    note: str

    def __str__(self):
        head = "valid" if self.ok else "invalid"
        body = ("; " + "; ".join(self.violations[:10])) if self.violations else ""
        return f"{head} ({self.note}){body}"


def validate_bisim_family(
    fam: LBisimFamily,
    frag: FragmentConfig,
    m: KripkeModel,
    n: KripkeModel,
) -> BisimReport:
    """Check every clause of the level-indexed bisimulation definition on the
    supplied entries, gating each clause by the fragment. The append clauses
    are only checkable up to l_max - 1; the note records that bound."""
    violations: list[str] = []
    empty = fam.size() == 0
    action_pairs = (
        action_pair_closure(m, n, frag.action_ctors) if "diamond" in frag.ops else []
    )

    for level in sorted(fam.levels):
        for entry in fam.levels[level]:
            (wt, w), (vt, v) = entry
            if len(wt) != level or len(vt) != level:
                violations.append(f"malformed tuple lengths at level {level}: {entry}")
                continue
            if w not in m.states or v not in n.states or not set(wt) <= set(m.states) or not set(vt) <= set(n.states):
                violations.append(f"entry mentions unknown states: {entry}")
                continue
            if m.valuation[w] != n.valuation[v]:
                violations.append(f"(prop) fails at level {level}: {entry}")
            for k in m.sig.nominals:
                if (m.nominal_interp[k] == w) != (n.nominal_interp[k] == v):
                    violations.append(f"(nom) fails for {k} at level {level}: {entry}")
            for j in range(level):
                if (wt[j] == w) != (vt[j] == v):
                    violations.append(f"(wvar) fails at index {j + 1}, level {level}: {entry}")
            if "diamond" in frag.ops:
                for ap in action_pairs:
                    asucc = successor_map(ap.left, m.states)[w]
                    bsucc = successor_map(ap.right, n.states)[v]
                    for w2 in asucc:
                        if not any(((wt, w2), (vt, v2)) in fam.entries(level) for v2 in bsucc):
                            violations.append(
                                f"(forth) fails for action {print_action(ap.term)} to {w2}, level {level}: {entry}"
                            )
                    for v2 in bsucc:
                        if not any(((wt, w2), (vt, v2)) in fam.entries(level) for w2 in asucc):
                            violations.append(
                                f"(back) fails for action {print_action(ap.term)} to {v2}, level {level}: {entry}"
                            )
            if "at" in frag.ops:
                for j in range(level):
                    if ((wt, wt[j]), (vt, vt[j])) not in fam.entries(level):
                        violations.append(f"(atv) fails at index {j + 1}, level {level}: {entry}")
                for k in m.sig.nominals:
                    target = ((wt, m.nominal_interp[k]), (vt, n.nominal_interp[k]))
                    if target not in fam.entries(level):
                        violations.append(f"(atn) fails for {k}, level {level}: {entry}")
            if level < fam.l_max:
                if "store" in frag.ops:
                    target = ((wt + (w,), w), (vt + (v,), v))
                    if target not in fam.entries(level + 1):
                        violations.append(f"(st) fails at level {level}: {entry}")
                if "exists" in frag.ops:
                    for w1 in m.states:
                        if not any(
                            ((wt + (w1,), w), (vt + (v1,), v)) in fam.entries(level + 1)
                            for v1 in n.states
                        ):
                            violations.append(f"(ex-f) fails for {w1}, level {level}: {entry}")
                    for v1 in n.states:
                        if not any(
                            ((wt + (w1,), w), (vt + (v1,), v)) in fam.entries(level + 1)
                            for w1 in m.states
                        ):
                            violations.append(f"(ex-b) fails for {v1}, level {level}: {entry}")

    note = f"append clauses checked up to level {fam.l_max - 1}"
    if empty:
        note += "; family is empty"
    return BisimReport(not violations, tuple(violations), note)


def extract_bisim_witness(
    frag: FragmentConfig,
    left: PointedModel,
    right: PointedModel,
    l_max: int,
) -> LBisimFamily:
    """Convert the safe-position fixpoint of a won countable game into a
    level-indexed family: each safe position re-expands into every tuple
    realization of its correspondence set."""
    res = omega_solve(frag, left, right)
    if not res.eloise_wins:
        raise OmegaError("cannot extract a witness from a lost game")
    levels: dict[int, set[Entry]] = {l: set() for l in range(l_max + 1)}
    for pairs, (w, v) in res.safe:
        ordered = sorted(pairs)
        for level in range(len(pairs), l_max + 1):
            for combo in itertools.product(ordered, repeat=level):
                if set(combo) != set(ordered):
                    continue
                wt = tuple(a for a, _ in combo)
                vt = tuple(b for _, b in combo)
                levels[level].add(((wt, w), (vt, v)))
    return LBisimFamily(levels, l_max)


def shift_family(fam: LBisimFamily, anchor: Entry) -> LBisimFamily:
    """Re-anchor a family after naming a state on both sides: level-l entries
    of the result are the level-(l+1) entries of the source whose tuples
    start with the anchored states."""
    (mu_t, mu_cur), (nu_t, nu_cur) = anchor
    if len(mu_t) != 1 or len(nu_t) != 1:
        raise OmegaError("anchor must be a level-1 entry")
    if anchor not in fam.entries(1):
        raise OmegaError("anchor is not in the family at level 1")
    mu, nu = mu_t[0], nu_t[0]
    levels: dict[int, set[Entry]] = {}
    for level in range(0, fam.l_max):
        shifted = set()
        for (wt, w), (vt, v) in fam.entries(level + 1):
            if wt and wt[0] == mu and vt and vt[0] == nu:
                shifted.add(((wt[1:], w), (vt[1:], v)))
        levels[level] = shifted
    return LBisimFamily(levels, fam.l_max - 1)


# ---------------------------------------------------------------------------
# Basic partial isomorphisms and back-and-forth systems

PartialMap = frozenset[Pair]


@dataclass(frozen=True)
class PartialIsoReport:
    mapping: tuple[Pair, ...]
    injective: bool
    basic_preserving: bool
    relation_preserving: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.injective and self.basic_preserving and self.relation_preserving


def partial_iso_from_tuple(m: KripkeModel, n: KripkeModel, entry: Entry) -> PartialIsoReport:
    """The map sending each named state on the left to its counterpart on the
    right, re-checked for injectivity, basic-sentence preservation, and
    relation preservation in both directions."""
    (wt, _), (vt, _) = entry
    pairs = list(dict.fromkeys(zip(wt, vt)))
    violations: list[str] = []
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}
    injective = True
    for a, b in pairs:
        if fwd.get(a, b) != b or bwd.get(b, a) != a:
            injective = False
            violations.append(f"not a partial bijection at ({a},{b})")
        fwd[a] = b
        bwd[b] = a
    basic = True
    for a, b in pairs:
        if m.valuation[a] != n.valuation[b]:
            basic = False
            violations.append(f"prop disagreement at ({a},{b})")
        for k in m.sig.nominals:
            if (m.nominal_interp[k] == a) != (n.nominal_interp[k] == b):
                basic = False
                violations.append(f"nominal {k} disagreement at ({a},{b})")
    relational = True
    for rel in m.sig.relations:
        rm = m.relation_interp[rel]
        rn = n.relation_interp[rel]
        for (a1, b1), (a2, b2) in itertools.product(pairs, pairs):
            if ((a1, a2) in rm) != ((b1, b2) in rn):
                relational = False
                violations.append(f"relation {rel} disagreement at ({a1},{a2})/({b1},{b2})")
    return PartialIsoReport(tuple(pairs), injective, basic, relational, tuple(violations))


@dataclass
class BackAndForthSystem:
    """The maximal family of basic partial isomorphisms closed under the
    extension clauses the fragment enables; possibly empty."""

    maps: frozenset[PartialMap]
    frag: FragmentConfig

    def relates(self, w: str, v: str) -> bool:
        return any((w, v) in h for h in self.maps)

    def __len__(self):
        return len(self.maps)


def max_back_and_forth(frag: FragmentConfig, m: KripkeModel, n: KripkeModel) -> BackAndForthSystem:
    """Greatest fixpoint: start from every basic-sentence-preserving injective
    partial map (including the empty one) and delete maps lacking a required
    extension inside the surviving family, until stable. The survivors form
    the union of all back-and-forth systems between the models."""
    if m.sig != n.sig:
        raise SignatureMismatchError("models must share a signature")
    agree = {
        (w, v): m.valuation[w] == n.valuation[v]
        and all((m.nominal_interp[k] == w) == (n.nominal_interp[k] == v) for k in m.sig.nominals)
        for w in m.states
        for v in n.states
    }

    maps: set[PartialMap] = set()

    def build(i: int, used_v: set[str], acc: list[Pair]):
        maps.add(frozenset(acc))
        for j in range(i, len(m.states)):
            w = m.states[j]
            for v in n.states:
                if v in used_v or not agree[(w, v)]:
                    continue
                acc.append((w, v))
                used_v.add(v)
                build(j + 1, used_v, acc)
                acc.pop()
                used_v.discard(v)

    build(0, set(), [])

    action_pairs = (
        action_pair_closure(m, n, frag.action_ctors) if "diamond" in frag.ops else []
    )
    succ = [
        (successor_map(ap.left, m.states), successor_map(ap.right, n.states))
        for ap in action_pairs
    ]

    def extension_alive(family: set[PartialMap], h: PartialMap, w: str, cond=None) -> bool:
        """Is some one-step extension of h covering w (with optional condition
        on the partner) in the family? Subset-closure of the family makes
        one-step extensions sufficient."""
        fwd = dict(h)
        if w in fwd:
            u = fwd[w]
            return (cond is None or cond(u)) and h in family
        rng = {v for _, v in h}
        for u in n.states:
            if u in rng or not agree[(w, u)]:
                continue
            if cond is not None and not cond(u):
                continue
            if h | {(w, u)} in family:
                return True
        return False

    def extension_alive_back(family: set[PartialMap], h: PartialMap, v: str, cond=None) -> bool:
        bwd = {b: a for a, b in h}
        if v in bwd:
            u = bwd[v]
            return (cond is None or cond(u)) and h in family
        dom = {a for a, _ in h}
        for u in m.states:
            if u in dom or not agree[(u, v)]:
                continue
            if cond is not None and not cond(u):
                continue
            if h | {(u, v)} in family:
                return True
        return False

    family = maps
    while True:
        survivors = set()
        for h in family:
            ok = True
            if "at" in frag.ops:
                for k in m.sig.nominals:
                    if not extension_alive(family, h, m.nominal_interp[k]):
                        ok = False
                        break
            if ok and "diamond" in frag.ops:
                fwd = dict(h)
                bwd = {b: a for a, b in h}
                for (sl, sr) in succ:
                    for w1, v1 in h:
                        for w2 in sl[w1]:
                            if not extension_alive(family, h, w2, cond=lambda u, v1=v1, sr=sr: u in sr[v1]):
                                ok = False
                                break
                        if not ok:
                            break
                        for v2 in sr[v1]:
                            if not extension_alive_back(family, h, v2, cond=lambda u, w1=w1, sl=sl: u in sl[w1]):
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        break
            if ok and "exists" in frag.ops:
                for w in m.states:
                    if not extension_alive(family, h, w):
                        ok = False
                        break
                if ok:
                    for v in n.states:
                        if not extension_alive_back(family, h, v):
                            ok = False
                            break
            if ok:
                survivors.add(h)
        if survivors == family:
            return BackAndForthSystem(frozenset(family), frag)
        family = survivors


def bf_related(frag: FragmentConfig, left: PointedModel, right: PointedModel) -> bool:
    """True iff some back-and-forth system relates the two designated states."""
    system = max_back_and_forth(frag, left.model, right.model)
    return system.relates(left.current, right.current)


# ---------------------------------------------------------------------------
# Report harnesses


@dataclass(frozen=True)
class HennessyMilnerReport:
    fragment: str
    heights: tuple[int, ...]
    char_equal_per_height: tuple[bool, ...]
    elementary_proxy: bool
    omega_equivalent: bool
    bf_equivalent: bool
    hypotheses_met: bool

    @property
    def proxy_matches_omega(self) -> bool:
        return self.elementary_proxy == self.omega_equivalent

    @property
    def bf_matches_omega(self) -> bool:
        return self.bf_equivalent == self.omega_equivalent

    @property
    def divergence_expected(self) -> bool:
        return (not self.bf_matches_omega) and (not self.hypotheses_met)

    def to_dict(self) -> dict:
        return {
            "fragment": self.fragment,
            "heights": list(self.heights),
            "char_equal_per_height": list(self.char_equal_per_height),
            "elementary_proxy": self.elementary_proxy,
            "omega_equivalent": self.omega_equivalent,
            "bf_equivalent": self.bf_equivalent,
            "hypotheses_met": self.hypotheses_met,
            "proxy_matches_omega": self.proxy_matches_omega,
            "bf_matches_omega": self.bf_matches_omega,
            "divergence_expected": self.divergence_expected,
        }


def back_and_forth_hypotheses(frag: FragmentConfig) -> bool:
    """The closure conditions under which game equivalence implies
    back-and-forth equivalence: store is present, and retrieve is present
    whenever possibility or quantification is."""
    if "store" not in frag.ops:
        return False
    if ("diamond" in frag.ops or "exists" in frag.ops) and "at" not in frag.ops:
        return False
    return True


def _feasible_height(sig, frag: FragmentConfig, n_actions: int, wanted: int, budget: int = 100_000) -> int:
    """Largest height <= wanted whose complete tree stays within the node
    budget; the at-branching grows along store chains."""
    height = 0
    nodes = 1
    level = 1
    for depth in range(wanted):
        branching = 1  # idle
        if "store" in frag.ops:
            branching += 1
        if "at" in frag.ops:
            branching += len(sig.point_names()) + ("store" in frag.ops) * depth
        if "diamond" in frag.ops:
            branching += n_actions
        level *= branching
        nodes += level
        if nodes > budget:
            break
        height = depth + 1
    return max(1, height)


def hennessy_milner_check(
    left: PointedModel,
    right: PointedModel,
    frag: FragmentConfig,
) -> HennessyMilnerReport:
    """Compare (a) characteristic-formula agreement on complete trees up to
    the solver's stabilization height, (b) the countable-game verdict, and
    (c) back-and-forth relatedness, for a quantifier-free fragment."""
    if "exists" in frag.ops:
        raise OmegaError("the image-finite harness is for quantifier-free fragments")
    res = omega_solve(frag, left, right)
    actions = tuple(
        ap.term for ap in action_pair_closure(left.model, right.model, frag.action_ctors)
    ) if "diamond" in frag.ops else ()
    tree_frag = frag if actions or "diamond" not in frag.ops else FragmentConfig(
        frag.ops - {"diamond"}, frozenset()
    )
    height = _feasible_height(
        left.model.sig, tree_frag, len(actions), res.stabilization_height()
    )
    per_height = []
    for h in range(1, height + 1):
        tr = complete_tree(left.model.sig, tree_frag, h, actions)
        per_height.append(char_formula(tr, left) == char_formula(tr, right))
    return HennessyMilnerReport(
        fragment=frag.describe(),
        heights=tuple(range(1, height + 1)),
        char_equal_per_height=tuple(per_height),
        elementary_proxy=all(per_height),
        omega_equivalent=res.eloise_wins,
        bf_equivalent=bf_related(frag, left, right),
        hypotheses_met=back_and_forth_hypotheses(frag),
    )


@dataclass(frozen=True)
class RootedIsoReport:
    fragment: str
    isomorphic: bool
    omega_equivalent: bool
    isomorphism: tuple[Pair, ...] | None

    @property
    def agree(self) -> bool:
        return self.isomorphic == self.omega_equivalent

    def to_dict(self) -> dict:
        return {
            "fragment": self.fragment,
            "isomorphic": self.isomorphic,
            "omega_equivalent": self.omega_equivalent,
            "isomorphism": list(self.isomorphism) if self.isomorphism else None,
            "agree": self.agree,
        }


def rooted_iso_check(
    left: PointedModel,
    right: PointedModel,
    frag: FragmentConfig,
) -> RootedIsoReport:
    """For rooted pointed models, compare isomorphism presence with the
    countable-game verdict under a fragment containing diamond, at, store."""
    if not {"diamond", "at", "store"} <= frag.ops:
        raise OmegaError("the rooted harness needs diamond, at and store enabled")
    if not is_rooted(left) or not is_rooted(right):
        raise OmegaError("both pointed models must be rooted")
    iso = find_isomorphism(left, right)
    res = omega_solve(frag, left, right)
    return RootedIsoReport(
        fragment=frag.describe(),
        isomorphic=iso is not None,
        omega_equivalent=res.eloise_wins,
        isomorphism=tuple(sorted(iso.items())) if iso else None,
    )
