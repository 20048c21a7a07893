"""Prediction-aggregation heuristics and the first-fit provisioning epoch.

Both policies collapse a u-step prediction matrix to one target rate per
connection, then fit every connection with the least-disturbance action
cascade.  MMD guards each connection with its own worst predicted interval;
MAD provisions everyone from the single interval whose aggregate demand
peaks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .spectrum import ActionKind, ActionOutcome, NetworkState, plan_action
from .topology import CandidatePath, fs_required
from .traffic import PredictionMatrix

__all__ = ["Selection", "EpochReport", "select_mmd", "select_mad", "provision_epoch"]


@dataclass(frozen=True)
class Selection:
    """One target rate per connection plus where each rate came from.

    ``source_step`` maps each connection to the 1-based prediction step its
    rate was taken from; ``chosen_interval`` is set (and shared) only for the
    aggregate policy.
    """

    rates: dict[int, float]
    source_step: dict[int, int]
    chosen_interval: int | None = None


@dataclass(frozen=True)
class EpochReport:
    outcomes: tuple[ActionOutcome, ...]
    by_conn: dict[int, ActionOutcome] = field(repr=False, default_factory=dict)

    def count(self, kind: ActionKind) -> int:
        return sum(1 for o in self.outcomes if o.kind is kind)

    @property
    def disruptions(self) -> int:
        return self.count(ActionKind.REALLOCATED)

    @property
    def blocked(self) -> int:
        return self.count(ActionKind.BLOCKED)


def _check_matrix(pred: PredictionMatrix) -> None:
    if not pred.rates:
        raise ValueError("empty prediction matrix")
    for conn, rates in pred.rates.items():
        if len(rates) != pred.horizon:
            raise ValueError(
                f"connection {conn}: {len(rates)} rates for horizon {pred.horizon}"
            )
        if any(r < 0 for r in rates):
            raise ValueError(f"connection {conn}: negative predicted rate")


def select_mmd(pred: PredictionMatrix) -> Selection:
    """Maximum per connection: each rate is its own predicted peak.

    The recorded source step is the earliest step attaining the peak.
    """
    _check_matrix(pred)
    rates: dict[int, float] = {}
    source: dict[int, int] = {}
    for conn in pred.connections():
        row = pred.rates[conn]
        best = max(row)
        rates[conn] = best
        source[conn] = row.index(best) + 1
    return Selection(rates=rates, source_step=source)


def select_mad(pred: PredictionMatrix) -> Selection:
    """Aggregate-peak interval: all rates come from the same step i*.

    i* maximizes the column sum over connections; ties resolve to the
    earliest step.
    """
    _check_matrix(pred)
    conns = pred.connections()
    sums = [
        sum(pred.rates[c][i] for c in conns) for i in range(pred.horizon)
    ]
    best = max(sums)
    i_star = sums.index(best)  # earliest maximizer
    rates = {c: pred.rates[c][i_star] for c in conns}
    source = {c: i_star + 1 for c in conns}
    return Selection(rates=rates, source_step=source, chosen_interval=i_star + 1)


def provision_epoch(
    state: NetworkState,
    selection: Selection,
    candidates: dict[int, list[CandidatePath]],
    baud_gbaud: float,
) -> EpochReport:
    """Apply one epoch of first-fit provisioning for the selected rates.

    Connections are processed in descending selected rate (ties by ascending
    id) so the bulkiest blocks grab contiguous space first.  Slot widths are
    per candidate path (each has its own modulation) and are clamped to at
    least one slot: a provisioned connection always holds spectrum, even for
    a zero-rate prediction.
    """
    missing = [c for c in selection.rates if not candidates.get(c)]
    if missing:
        raise ValueError(f"connections without candidate paths: {sorted(missing)}")
    order = sorted(selection.rates, key=lambda c: (-selection.rates[c], c))
    outcomes: list[ActionOutcome] = []
    by_conn: dict[int, ActionOutcome] = {}
    for conn in order:
        paths = candidates[conn]
        widths = [
            max(1, fs_required(selection.rates[conn], baud_gbaud, p.modulation))
            for p in paths
        ]
        outcome = plan_action(state, conn, paths, widths)
        outcomes.append(outcome)
        by_conn[conn] = outcome
    return EpochReport(outcomes=tuple(outcomes), by_conn=by_conn)
