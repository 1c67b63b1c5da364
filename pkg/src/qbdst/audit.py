"""Post-hoc verification of a run: dual feasibility of the accumulated
moat duals, the exact cost identity, and the per-iteration counting
bounds on antenna/killer/expansion arcs.

Everything is recomputed from scratch out of the trace's purchase
sequence (moats, roles, payments), never trusted from the recorded
payments, so the audit doubles as a differential test of the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .instance import FAMILY_MINOR_FREE, FAMILY_PLANAR_BIPARTITE, Instance
from .engine import (
    MODE_BUCKETED,
    GrowthTrace,
    IterationRecord,
    Payment,
    Solution,
    STANDARD,
)
from .moats import (
    ANTENNA,
    KILLER,
    Moat,
    active_moats,
    classify_arc,
    is_antenna_arc,
    key_to_str,
    str_to_key,
)

PLANAR_RATIO_BOUND = Fraction(20)


@dataclass
class IterationDelta:
    """Counts of final-solution arcs paid per moat at one iteration, split
    by the role they were eventually bought under.  The three per-moat arc
    sets are pairwise disjoint by construction."""

    index: int
    moat_count: int
    per_moat: dict[str, tuple[int, int, int]]  # key -> (ant, killer, exp)
    killer_front: frozenset[int]  # final killer arcs paid here
    expansion_front: frozenset[int]  # final expansion arcs paid here

    @property
    def delta_total(self) -> int:
        return sum(sum(c) for c in self.per_moat.values())


@dataclass
class AuditReport:
    payments_consistent: bool = True
    cost_identity_ok: bool = True
    dual_feasible_ok: bool = True
    lemmas_ok: bool | None = None
    deltas: list[IterationDelta] = field(default_factory=list)
    alpha_max: Fraction | None = None
    ratio_vs_lb: Fraction | None = None
    ratio_vs_opt: Fraction | None = None
    breaches: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return (
            self.payments_consistent
            and self.cost_identity_ok
            and self.dual_feasible_ok
            and self.lemmas_ok is not False
            and not self.breaches
        )

    def render(self) -> str:
        lines = [
            f"payments_consistent {str(self.payments_consistent).lower()}",
            f"cost_identity_ok {str(self.cost_identity_ok).lower()}",
            f"dual_feasible_ok {str(self.dual_feasible_ok).lower()}",
            "lemmas_ok "
            + ("skipped" if self.lemmas_ok is None else str(self.lemmas_ok).lower()),
            "alpha_max " + (str(self.alpha_max) if self.alpha_max is not None else "n/a"),
            "ratio_vs_lb " + (str(self.ratio_vs_lb) if self.ratio_vs_lb is not None else "n/a"),
            "ratio_vs_opt " + (str(self.ratio_vs_opt) if self.ratio_vs_opt is not None else "n/a"),
        ]
        for breach in self.breaches:
            lines.append(f"breach {breach}")
        return "\n".join(lines) + "\n"


def _replay(
    inst: Instance, trace: GrowthTrace
) -> Iterator[tuple[IterationRecord, frozenset[int], list[Moat], dict[int, list[tuple[str, str]]]]]:
    """Yield, per iteration, the recomputed purchased-set snapshot, active
    moats, and role classification of every unpurchased arc entering a
    moat (arc -> [(moat key str, role)])."""
    bucketed = trace.mode == MODE_BUCKETED
    purchased: set[int] = set()
    for rec in trace.iterations:
        frozen = frozenset(purchased)
        moats = active_moats(inst, frozen)
        head_moats: dict[int, list[Moat]] = {}
        for moat in moats:
            for v in moat.vertices:
                head_moats.setdefault(v, []).append(moat)
        classes: dict[int, list[tuple[str, str]]] = {}
        for arc_id in range(len(inst.arcs)):
            if arc_id in purchased:
                continue
            arc = inst.arcs[arc_id]
            if arc.head not in head_moats:
                continue
            if bucketed:
                pairs = [
                    (key_to_str(key), role)
                    for key, role in classify_arc(inst, frozen, head_moats[arc.head], arc_id)
                ]
            else:
                pairs = [
                    (m.key_str, STANDARD)
                    for m in head_moats[arc.head]
                    if arc.tail not in m.vertices
                ]
            if pairs:
                classes[arc_id] = pairs
        yield rec, frozen, moats, classes
        purchased.add(rec.purchased[0])


def verify_dual_feasibility(
    inst: Instance, trace: GrowthTrace
) -> tuple[dict[int, Fraction], bool]:
    """Per-arc dual load (sum of y over sets the arc enters) and whether
    every load is at most 2c, with antenna arcs at most c."""
    loads = {arc_id: Fraction(0) for arc_id in range(len(inst.arcs))}
    for key_str, y in trace.duals.items():
        members = set(str_to_key(key_str))
        for arc_id, arc in enumerate(inst.arcs):
            if arc.head in members and arc.tail not in members:
                loads[arc_id] += y
    ok = True
    for arc_id, load in loads.items():
        cap = inst.arcs[arc_id].cost
        if is_antenna_arc(inst, arc_id):
            if load > cap:
                ok = False
        elif load > 2 * cap:
            ok = False
    return loads, ok


def _payments_match(rec: IterationRecord, classes: dict[int, list[tuple[str, str]]]) -> bool:
    expected = {
        (arc_id, kind, key, rec.epsilon)
        for arc_id, pairs in classes.items()
        for key, kind in pairs
    }
    return expected == set(rec.payments)


def verify_cost_identity(
    inst: Instance, trace: GrowthTrace, sol: Solution
) -> tuple[bool, list[tuple[int, Fraction, int]]]:
    """Recompute, per iteration, how many final arcs each moat paid under
    their eventual purchase label, and check that
    sum_l epsilon_l * sum_A |Delta_l(A)| equals the pruned cost exactly.

    Returns (ok, table) with table rows (iteration, epsilon, delta_total).
    """
    final_labels = sol.arc_labels
    table = []
    total = Fraction(0)
    for rec, _, _, classes in _replay(inst, trace):
        count = 0
        for arc_id, pairs in classes.items():
            want = final_labels.get(arc_id)
            if want is None:
                continue
            if trace.mode != MODE_BUCKETED:
                count += len(pairs)
                continue
            count += sum(1 for _, role in pairs if role == want)
        table.append((rec.index, rec.epsilon, count))
        total += rec.epsilon * count
    return total == sol.total_cost, table


def verify_counting_lemmas(
    inst: Instance, trace: GrowthTrace, sol: Solution
) -> tuple[bool, list[IterationDelta], Fraction | None]:
    """Per-iteration checks on final-solution arcs: at most one antenna arc
    enters each moat and their total is at most the moat count, final
    killer arcs being paid number at most the moat count, and final
    expansion arcs at most twice the moat count.  Also reports the largest
    delta-to-moat ratio seen.  Only defined for bucketed traces."""
    if trace.mode != MODE_BUCKETED:
        raise ValueError("counting lemmas apply to bucketed traces only")
    final_labels = sol.arc_labels
    deltas: list[IterationDelta] = []
    ok = True
    alpha_max: Fraction | None = None
    for rec, _, moats, classes in _replay(inst, trace):
        per_moat = {m.key_str: [0, 0, 0] for m in moats}
        killer_front: set[int] = set()
        expansion_front: set[int] = set()
        for arc_id, pairs in classes.items():
            want = final_labels.get(arc_id)
            if want is None:
                continue
            for key, role in pairs:
                if role != want:
                    continue
                counts = per_moat[key]
                if role == ANTENNA:
                    counts[0] += 1
                elif role == KILLER:
                    counts[1] += 1
                    killer_front.add(arc_id)
                else:
                    counts[2] += 1
                    expansion_front.add(arc_id)
        delta = IterationDelta(
            index=rec.index,
            moat_count=len(moats),
            per_moat={k: tuple(v) for k, v in per_moat.items()},
            killer_front=frozenset(killer_front),
            expansion_front=frozenset(expansion_front),
        )
        deltas.append(delta)
        ants = [c[0] for c in delta.per_moat.values()]
        if any(a > 1 for a in ants):
            ok = False
        if sum(ants) > delta.moat_count:
            ok = False
        if len(killer_front) > delta.moat_count:
            ok = False
        if len(expansion_front) > 2 * delta.moat_count:
            ok = False
        if delta.moat_count:
            alpha = Fraction(delta.delta_total, delta.moat_count)
            if alpha_max is None or alpha > alpha_max:
                alpha_max = alpha
    return ok, deltas, alpha_max


def minor_free_ratio_bound(r: int) -> float:
    """Reporting threshold for declared K_r-minor-free instances."""
    return 2.0 * (8.0 * r * math.log2(r) + 1.0)


def ratio_report(
    inst: Instance, sol: Solution, opt: Fraction | None = None
) -> AuditReport:
    """Solution-quality ratios plus family-specific breach flags."""
    report = AuditReport()
    if sol.lower_bound:
        report.ratio_vs_lb = sol.total_cost / sol.lower_bound
    if opt is not None and opt:
        report.ratio_vs_opt = sol.total_cost / opt
    if report.ratio_vs_lb is not None:
        if inst.family == FAMILY_PLANAR_BIPARTITE and report.ratio_vs_lb > PLANAR_RATIO_BOUND:
            report.breaches.append(
                f"ratio_vs_lb {report.ratio_vs_lb} exceeds {PLANAR_RATIO_BOUND} (planar_bipartite)"
            )
        if inst.family == FAMILY_MINOR_FREE and inst.minor_r is not None:
            bound = minor_free_ratio_bound(inst.minor_r)
            if float(report.ratio_vs_lb) > bound:
                report.breaches.append(
                    f"ratio_vs_lb {report.ratio_vs_lb} exceeds {bound:.3f} (minor_free {inst.minor_r})"
                )
    return report


def run_full(
    inst: Instance,
    trace: GrowthTrace,
    sol: Solution,
    opt: Fraction | None = None,
) -> AuditReport:
    """All audit checks on one run."""
    report = ratio_report(inst, sol, opt)

    payments_ok = True
    for rec, _, moats, classes in _replay(inst, trace):
        if tuple(m.key_str for m in moats) != rec.moats:
            payments_ok = False
            break
        if not _payments_match(rec, classes):
            payments_ok = False
            break
    report.payments_consistent = payments_ok

    report.cost_identity_ok, _ = verify_cost_identity(inst, trace, sol)
    _, report.dual_feasible_ok = verify_dual_feasibility(inst, trace)
    if trace.mode == MODE_BUCKETED:
        lemmas_ok, deltas, alpha_max = verify_counting_lemmas(inst, trace, sol)
        report.lemmas_ok = lemmas_ok
        report.deltas = deltas
        report.alpha_max = alpha_max
    return report
