"""Data model, parsing, validation, and normalization of directed Steiner
tree instances.

Nodes are numbered 1..node_count.  Arc costs are exact rationals
(`fractions.Fraction`); tightness of payment buckets and feasibility of the
dual certificate are checked with equality, which rules out floats.  The
position of an arc in the arc tuple is its ArcId and doubles as the
purchase tie-breaking order, so arc order is preserved everywhere.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

FAMILY_PLANAR_BIPARTITE = "planar_bipartite"
FAMILY_MINOR_FREE = "minor_free"
FAMILY_UNKNOWN = "unknown"


class ParseError(ValueError):
    """Malformed instance file; the message carries the offending line."""


class InvalidInstanceError(ValueError):
    """Instance failed validation; `violations` holds the report."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid instance: " + "; ".join(violations))
        self.violations = violations


class Arc(NamedTuple):
    tail: int
    head: int
    cost: Fraction


@dataclass(frozen=True)
class Instance:
    """A quasi-bipartite DST instance.

    `terminals` excludes the root.  Every node that is neither the root nor
    a terminal is a Steiner node.  The family tag is declared by the
    instance author and never verified; it only selects reporting
    thresholds downstream.
    """

    node_count: int
    root: int
    terminals: frozenset[int]
    arcs: tuple[Arc, ...]
    family: str = FAMILY_UNKNOWN
    minor_r: int | None = None

    @property
    def steiner(self) -> frozenset[int]:
        return frozenset(
            v
            for v in range(1, self.node_count + 1)
            if v != self.root and v not in self.terminals
        )

    def is_steiner(self, v: int) -> bool:
        return v != self.root and v not in self.terminals

    def cost_of(self, arc_ids: Iterable[int]) -> Fraction:
        return sum((self.arcs[i].cost for i in arc_ids), Fraction(0))


def _parse_cost(token: str) -> Fraction:
    try:
        value = Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad cost literal {token!r}") from exc
    return value


def parse_instance(text: str) -> Instance:
    """Parse the instance file format.

    Format (one record per line, '#' starts a comment)::

        NODES <n>                      nodes are 1..n
        ROOT <id>
        TERMINALS <id> [<id> ...]      may repeat across multiple lines
        FAMILY planar_bipartite | minor_free <r> | unknown
        ARC <tail> <head> <cost>       cost: decimal (0.01) or rational (1/100)
        END

    Raises ParseError with a line number on any malformed input.  Parallel
    arcs are kept; run `normalize_parallel` to deduplicate them.
    """
    node_count: int | None = None
    root: int | None = None
    terminals: set[int] = set()
    saw_terminals = False
    family = FAMILY_UNKNOWN
    minor_r: int | None = None
    arcs: list[Arc] = []
    ended = False

    def err(lineno: int, msg: str) -> ParseError:
        return ParseError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise err(lineno, "content after END")
        fields = line.split()
        keyword, args = fields[0].upper(), fields[1:]
        if keyword == "NODES":
            if node_count is not None:
                raise err(lineno, "duplicate NODES section")
            if len(args) != 1 or not args[0].isdigit():
                raise err(lineno, "NODES expects one integer")
            node_count = int(args[0])
        elif keyword == "ROOT":
            if root is not None:
                raise err(lineno, "duplicate ROOT section")
            if len(args) != 1:
                raise err(lineno, "ROOT expects one node id")
            try:
                root = int(args[0])
            except ValueError:
                raise err(lineno, f"bad node id {args[0]!r}") from None
        elif keyword == "TERMINALS":
            saw_terminals = True
            for tok in args:
                try:
                    terminals.add(int(tok))
                except ValueError:
                    raise err(lineno, f"bad node id {tok!r}") from None
        elif keyword == "FAMILY":
            if not args:
                raise err(lineno, "FAMILY expects a tag")
            tag = args[0]
            if tag == FAMILY_MINOR_FREE:
                if len(args) != 2 or not args[1].isdigit():
                    raise err(lineno, "FAMILY minor_free expects an integer r")
                family, minor_r = FAMILY_MINOR_FREE, int(args[1])
            elif tag in (FAMILY_PLANAR_BIPARTITE, FAMILY_UNKNOWN):
                if len(args) != 1:
                    raise err(lineno, f"FAMILY {tag} takes no parameter")
                family = tag
            else:
                raise err(lineno, f"unknown family tag {tag!r}")
        elif keyword == "ARC":
            if len(args) != 3:
                raise err(lineno, "ARC expects <tail> <head> <cost>")
            try:
                tail, head = int(args[0]), int(args[1])
            except ValueError:
                raise err(lineno, "bad arc endpoint") from None
            try:
                cost = _parse_cost(args[2])
            except ValueError as exc:
                raise err(lineno, str(exc)) from None
            if cost < 0:
                raise err(lineno, f"negative cost {args[2]}")
            arcs.append(Arc(tail, head, cost))
        elif keyword == "END":
            ended = True
        else:
            raise err(lineno, f"unknown record {fields[0]!r}")

    if node_count is None:
        raise ParseError("missing NODES section")
    if root is None:
        raise ParseError("missing ROOT section")
    if not saw_terminals:
        raise ParseError("missing TERMINALS section")
    if not ended:
        raise ParseError("missing END marker")
    if not 1 <= root <= node_count:
        raise ParseError(f"root {root} out of range 1..{node_count}")
    for t in sorted(terminals):
        if not 1 <= t <= node_count:
            raise ParseError(f"terminal {t} out of range 1..{node_count}")
    for i, arc in enumerate(arcs):
        for endpoint in (arc.tail, arc.head):
            if not 1 <= endpoint <= node_count:
                raise ParseError(f"arc {i}: node {endpoint} out of range 1..{node_count}")

    return Instance(
        node_count=node_count,
        root=root,
        terminals=frozenset(terminals),
        arcs=tuple(arcs),
        family=family,
        minor_r=minor_r,
    )


def serialize_instance(inst: Instance) -> str:
    """Render an instance in the file format; parse(serialize(x)) == x."""
    lines = [f"NODES {inst.node_count}", f"ROOT {inst.root}"]
    lines.append("TERMINALS" + "".join(f" {t}" for t in sorted(inst.terminals)))
    if inst.family == FAMILY_MINOR_FREE:
        lines.append(f"FAMILY minor_free {inst.minor_r}")
    else:
        lines.append(f"FAMILY {inst.family}")
    for arc in inst.arcs:
        lines.append(f"ARC {arc.tail} {arc.head} {arc.cost}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def instance_hash(inst: Instance) -> str:
    return hashlib.sha256(serialize_instance(inst).encode("utf-8")).hexdigest()


def reachable_from_root(inst: Instance, arc_ids: Iterable[int] | None = None) -> set[int]:
    """Nodes reachable from the root over the given arc subset (default: all)."""
    ids = range(len(inst.arcs)) if arc_ids is None else arc_ids
    adjacency: dict[int, list[int]] = {}
    for i in ids:
        arc = inst.arcs[i]
        adjacency.setdefault(arc.tail, []).append(arc.head)
    seen = {inst.root}
    queue = deque([inst.root])
    while queue:
        v = queue.popleft()
        for w in adjacency.get(v, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def is_feasible(inst: Instance, arc_ids: Iterable[int]) -> bool:
    """True iff every terminal is reachable from the root over `arc_ids`."""
    return inst.terminals <= reachable_from_root(inst, arc_ids)


def validate(inst: Instance) -> list[str]:
    """Check all instance invariants; returns a list of violations.

    An empty report means: well-formed ids, root not a terminal, no
    negative costs, no self-loops, no parallel duplicates, quasi-bipartite
    (no Steiner-to-Steiner arc), and every terminal reachable from the root
    over the full arc set.
    """
    violations: list[str] = []
    n = inst.node_count
    if not 1 <= inst.root <= n:
        violations.append(f"root {inst.root} out of range 1..{n}")
    for t in sorted(inst.terminals):
        if not 1 <= t <= n:
            violations.append(f"terminal {t} out of range 1..{n}")
    if inst.root in inst.terminals:
        violations.append(f"root {inst.root} listed as terminal")

    steiner = inst.steiner
    seen_pairs: dict[tuple[int, int], int] = {}
    for i, arc in enumerate(inst.arcs):
        name = f"arc {i} ({arc.tail}->{arc.head})"
        if not (1 <= arc.tail <= n and 1 <= arc.head <= n):
            violations.append(f"{name}: endpoint out of range")
            continue
        if arc.tail == arc.head:
            violations.append(f"{name}: self-loop")
        if arc.cost < 0:
            violations.append(f"{name}: negative cost {arc.cost}")
        if arc.tail in steiner and arc.head in steiner:
            violations.append(f"{name}: quasi-bipartite violation (both endpoints Steiner)")
        key = (arc.tail, arc.head)
        if key in seen_pairs:
            violations.append(f"{name}: parallel duplicate of arc {seen_pairs[key]}")
        else:
            seen_pairs[key] = i

    if not violations:
        reached = reachable_from_root(inst)
        for t in sorted(inst.terminals):
            if t not in reached:
                violations.append(f"terminal {t}: unreachable from root")
    return violations


def require_valid(inst: Instance) -> None:
    violations = validate(inst)
    if violations:
        raise InvalidInstanceError(violations)


def normalize_parallel(inst: Instance) -> Instance:
    """Keep only the cheapest arc in each parallel group (ties: smallest
    ArcId); opposite orientations are not parallel.  Relative order of the
    surviving arcs is unchanged."""
    best: dict[tuple[int, int], int] = {}
    for i, arc in enumerate(inst.arcs):
        key = (arc.tail, arc.head)
        if key not in best or arc.cost < inst.arcs[best[key]].cost:
            best[key] = i
    keep = set(best.values())
    arcs = tuple(arc for i, arc in enumerate(inst.arcs) if i in keep)
    if len(arcs) == len(inst.arcs):
        return inst
    return Instance(
        node_count=inst.node_count,
        root=inst.root,
        terminals=inst.terminals,
        arcs=arcs,
        family=inst.family,
        minor_r=inst.minor_r,
    )
