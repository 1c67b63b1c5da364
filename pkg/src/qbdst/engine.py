"""Growth and deletion phases of the bucketed primal-dual solver, the
single-bucket baseline, alive-terminal bookkeeping, and trace files.

Each arc owns payment buckets of capacity c(arc): one antenna bucket for
antenna arcs, separate expansion and killer buckets otherwise (the
baseline uses a single undifferentiated bucket).  Every iteration grows
all active moat duals by the largest epsilon that overfills no paid
bucket, buys exactly one tight arc (smallest ArcId), and recomputes the
moats.  Because only arcs entering a moat are paid, the bucket fills of an
arc always equal its dual load sum over entered sets, so the accumulated
duals y satisfy load <= 2c per arc and y/2 certifies the lower bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, NamedTuple

from .instance import Instance, instance_hash, is_feasible, require_valid
from .moats import (
    ANTENNA,
    EXPANSION,
    KILLER,
    Moat,
    active_moats,
    classify_arc,
    is_antenna_arc,
    key_to_str,
)

STANDARD = "standard"

MODE_BUCKETED = "bucketed"
MODE_STANDARD = "standard"


class EngineError(RuntimeError):
    """Unrecoverable growth-phase failure (e.g. stalled growth)."""


class InvariantBreach(RuntimeError):
    """A run violated the alive-terminal bookkeeping; signals an engine bug."""


class Payment(NamedTuple):
    arc: int
    kind: str
    moat: str
    amount: Fraction


@dataclass(frozen=True)
class IterationRecord:
    index: int
    epsilon: Fraction
    moats: tuple[str, ...]
    payments: tuple[Payment, ...]
    purchased: tuple[int, str]
    kills: tuple[int, ...]


@dataclass
class GrowthTrace:
    """Ordered iteration log of one growth phase plus the dual solution."""

    mode: str
    instance_hash: str
    node_count: int
    root: int
    terminals: frozenset[int]
    iterations: list[IterationRecord] = field(default_factory=list)
    duals: dict[str, Fraction] = field(default_factory=dict)

    def purchases(self) -> list[int]:
        return [rec.purchased[0] for rec in self.iterations]

    def purchase_labels(self) -> dict[int, str]:
        return {rec.purchased[0]: rec.purchased[1] for rec in self.iterations}

    def dual_total(self) -> Fraction:
        return sum(self.duals.values(), Fraction(0))


@dataclass
class Solution:
    """Pruned arc set with purchase-order, labels, and the dual bound."""

    final_arcs: tuple[int, ...]
    arc_labels: dict[int, str]
    total_cost: Fraction
    dual_total: Fraction
    lower_bound: Fraction


class BucketState:
    """Per-(kind, arc) fill levels, each capped by the arc cost."""

    def __init__(self) -> None:
        self._fill: dict[tuple[str, int], Fraction] = {}

    def fill(self, kind: str, arc: int) -> Fraction:
        return self._fill.get((kind, arc), Fraction(0))

    def add(self, kind: str, arc: int, amount: Fraction) -> None:
        if amount:
            self._fill[(kind, arc)] = self.fill(kind, arc) + amount


def _payer_map(
    inst: Instance,
    purchased: frozenset[int],
    moats: list[Moat],
    bucketed: bool,
) -> dict[tuple[int, str], list[str]]:
    """Which moats pay which bucket this iteration.

    Only arcs outside F whose head is in a moat and whose tail is not get
    paid; everything else (arcs into no moat, arcs internal to a moat,
    bought arcs) receives nothing.
    """
    head_moats: dict[int, list[Moat]] = {}
    for moat in moats:
        for v in moat.vertices:
            head_moats.setdefault(v, []).append(moat)

    payers: dict[tuple[int, str], list[str]] = {}
    for arc_id in range(len(inst.arcs)):
        if arc_id in purchased:
            continue
        arc = inst.arcs[arc_id]
        if arc.head not in head_moats:
            continue
        if not bucketed:
            keys = [
                m.key_str
                for m in head_moats[arc.head]
                if arc.tail not in m.vertices
            ]
            if keys:
                payers[(arc_id, STANDARD)] = keys
            continue
        for key, role in classify_arc(inst, purchased, head_moats[arc.head], arc_id):
            payers.setdefault((arc_id, role), []).append(key_to_str(key))
    return payers


def _epsilon_from_payers(
    inst: Instance,
    buckets: BucketState,
    payers: dict[tuple[int, str], list[str]],
) -> tuple[Fraction, list[tuple[int, str]]]:
    epsilon: Fraction | None = None
    for (arc_id, kind), moat_keys in payers.items():
        remaining = inst.arcs[arc_id].cost - buckets.fill(kind, arc_id)
        candidate = remaining / len(moat_keys)
        if epsilon is None or candidate < epsilon:
            epsilon = candidate
    assert epsilon is not None
    tight = sorted(
        (arc_id, kind)
        for (arc_id, kind), moat_keys in payers.items()
        if inst.arcs[arc_id].cost - buckets.fill(kind, arc_id)
        == epsilon * len(moat_keys)
    )
    return epsilon, tight


def compute_epsilon(
    inst: Instance,
    purchased: frozenset[int],
    moats: list[Moat],
    buckets: BucketState,
) -> tuple[Fraction, list[tuple[int, str]]]:
    """Largest uniform growth that overfills no paid bucket, plus every
    bucket reaching capacity at that growth.  Epsilon may be 0."""
    payers = _payer_map(inst, purchased, moats, bucketed=True)
    if not payers:
        raise EngineError(
            "stalled growth: no payable arc enters any active moat "
            "(unreachable terminal escaped validation)"
        )
    return _epsilon_from_payers(inst, buckets, payers)


def _grow(inst: Instance, bucketed: bool) -> GrowthTrace:
    require_valid(inst)
    trace = GrowthTrace(
        mode=MODE_BUCKETED if bucketed else MODE_STANDARD,
        instance_hash=instance_hash(inst),
        node_count=inst.node_count,
        root=inst.root,
        terminals=inst.terminals,
    )
    purchased_set: set[int] = set()
    buckets = BucketState()
    alive = set(inst.terminals)
    moats = active_moats(inst, frozenset())
    index = 0
    while moats:
        if index > len(inst.arcs):
            raise EngineError("growth did not terminate within |E| iterations")
        frozen = frozenset(purchased_set)
        payers = _payer_map(inst, frozen, moats, bucketed)
        if not payers:
            raise EngineError(
                "stalled growth: no payable arc enters any active moat "
                "(unreachable terminal escaped validation)"
            )
        epsilon, tight = _epsilon_from_payers(inst, buckets, payers)

        payments = []
        for (arc_id, kind), moat_keys in sorted(payers.items()):
            buckets.add(kind, arc_id, epsilon * len(moat_keys))
            for key in sorted(moat_keys):
                payments.append(Payment(arc_id, kind, key, epsilon))
        if epsilon:
            for moat in moats:
                key = moat.key_str
                trace.duals[key] = trace.duals.get(key, Fraction(0)) + epsilon

        buy = min(arc_id for arc_id, _ in tight)
        tight_kinds = {kind for arc_id, kind in tight if arc_id == buy}
        purchased_set.add(buy)
        new_moats = active_moats(inst, frozenset(purchased_set))
        new_sets = [m.vertices for m in new_moats]

        if bucketed:
            # Def-4.2 labeling: the bucket that filled now; both full -> expansion.
            if ANTENNA in tight_kinds:
                label = ANTENNA
            elif EXPANSION in tight_kinds:
                label = EXPANSION
            else:
                label = KILLER
        else:
            if is_antenna_arc(inst, buy):
                label = ANTENNA
            else:
                arc = inst.arcs[buy]
                entered = [
                    m
                    for m in moats
                    if arc.head in m.vertices and arc.tail not in m.vertices
                ]
                grows = any(
                    any(m.core < s for s in new_sets) for m in entered
                )
                label = EXPANSION if grows else KILLER

        # A moat dies exactly when its core is inside no active set anymore;
        # its unique alive terminal dies with it.
        kills = []
        for moat in moats:
            if not any(moat.core <= s for s in new_sets):
                for t in sorted(moat.core & alive):
                    kills.append(t)
        alive.difference_update(kills)

        trace.iterations.append(
            IterationRecord(
                index=index,
                epsilon=epsilon,
                moats=tuple(m.key_str for m in moats),
                payments=tuple(payments),
                purchased=(buy, label),
                kills=tuple(kills),
            )
        )
        moats = new_moats
        index += 1
    return trace


def grow_phase(inst: Instance) -> GrowthTrace:
    """Bucketed growth: classify, pay, buy one tight arc per iteration,
    until no active moats remain."""
    return _grow(inst, bucketed=True)


def reverse_delete(inst: Instance, trace: GrowthTrace) -> Solution:
    """Scan purchases in reverse order, dropping every arc whose removal
    keeps all terminals reachable from the root."""
    purchases = trace.purchases()
    labels = trace.purchase_labels()
    kept = set(purchases)
    for arc_id in reversed(purchases):
        kept.discard(arc_id)
        if not is_feasible(inst, kept):
            kept.add(arc_id)
    final = tuple(a for a in purchases if a in kept)
    dual_total = trace.dual_total()
    return Solution(
        final_arcs=final,
        arc_labels={a: labels[a] for a in final},
        total_cost=inst.cost_of(final),
        dual_total=dual_total,
        lower_bound=dual_total / 2,
    )


def solve(inst: Instance) -> tuple[Solution, GrowthTrace]:
    """Bucketed growth followed by reverse delete.  The solution's
    lower_bound is half the accumulated duals, a valid LP lower bound."""
    trace = grow_phase(inst)
    return reverse_delete(inst, trace), trace


def solve_standard_baseline(inst: Instance) -> tuple[Solution, GrowthTrace]:
    """Same loop with one undifferentiated bucket of size c(e) per arc."""
    trace = _grow(inst, bucketed=False)
    return reverse_delete(inst, trace), trace


def alive_report(trace: GrowthTrace) -> dict[int, dict[int, bool]]:
    """Replay kill events; per iteration, every active moat must hold
    exactly one alive terminal and #alive must equal #moats."""
    alive = set(trace.terminals)
    report: dict[int, dict[int, bool]] = {}
    for rec in trace.iterations:
        if len(rec.moats) != len(alive):
            raise InvariantBreach(
                f"iteration {rec.index}: {len(alive)} alive terminals "
                f"but {len(rec.moats)} active moats"
            )
        for key in rec.moats:
            members = {int(tok) for tok in key.split(",")}
            holders = members & alive
            if len(holders) != 1:
                raise InvariantBreach(
                    f"iteration {rec.index}: moat {key} holds "
                    f"{len(holders)} alive terminals"
                )
        report[rec.index] = {t: t in alive for t in sorted(trace.terminals)}
        alive.difference_update(rec.kills)
    return report


def _frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def write_trace(trace: GrowthTrace, out: IO[str]) -> None:
    """JSON Lines: a header record, then one record per iteration with all
    rationals as exact p/q strings."""
    header = {
        "record": "header",
        "mode": trace.mode,
        "instance": trace.instance_hash,
        "nodes": trace.node_count,
        "root": trace.root,
        "terminals": sorted(trace.terminals),
    }
    out.write(json.dumps(header, sort_keys=True) + "\n")
    for rec in trace.iterations:
        row = {
            "record": "iteration",
            "l": rec.index,
            "epsilon": _frac_str(rec.epsilon),
            "moats": list(rec.moats),
            "payments": [
                [p.arc, p.kind, p.moat, _frac_str(p.amount)] for p in rec.payments
            ],
            "purchase": [rec.purchased[0], rec.purchased[1]],
            "kills": list(rec.kills),
        }
        out.write(json.dumps(row, sort_keys=True) + "\n")


def read_trace(src: IO[str]) -> GrowthTrace:
    lines = [line for line in src.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty trace file")
    header = json.loads(lines[0])
    if header.get("record") != "header":
        raise ValueError("trace file must start with a header record")
    trace = GrowthTrace(
        mode=header["mode"],
        instance_hash=header["instance"],
        node_count=header["nodes"],
        root=header["root"],
        terminals=frozenset(header["terminals"]),
    )
    for line in lines[1:]:
        row = json.loads(line)
        if row.get("record") != "iteration":
            raise ValueError(f"unexpected record {row.get('record')!r}")
        epsilon = Fraction(row["epsilon"])
        rec = IterationRecord(
            index=row["l"],
            epsilon=epsilon,
            moats=tuple(row["moats"]),
            payments=tuple(
                Payment(arc, kind, moat, Fraction(amount))
                for arc, kind, moat, amount in row["payments"]
            ),
            purchased=(row["purchase"][0], row["purchase"][1]),
            kills=tuple(row["kills"]),
        )
        trace.iterations.append(rec)
        if epsilon:
            for key in rec.moats:
                trace.duals[key] = trace.duals.get(key, Fraction(0)) + epsilon
    return trace
