"""Onboard image triage: priority by information content, flash persistence
and bandwidth-limited downlink planning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

PRIORITY_PER_UNIT = 1.0  # priority per unit of information score
DEFAULT_BANDWIDTH = 9600.0  # bit/s


@dataclass(frozen=True)
class ImageRecord:
    id: Hashable
    compressed_size: int  # bytes
    information_score: float
    priority: float
    stored: bool

    @classmethod
    def evaluate(cls, id: Hashable, compressed_size: int, information_score: float | None = None) -> ImageRecord:
        """Grade a freshly compressed image.

        The information score defaults to the compressed size. Images with
        no information (all black) are marked for immediate disposal.
        """
        if compressed_size < 0:
            raise ValueError("compressed_size must be nonnegative")
        score = float(compressed_size if information_score is None else information_score)
        if score < 0:
            raise ValueError("information_score must be nonnegative")
        return cls(id, compressed_size, score, PRIORITY_PER_UNIT * score, score > 0)


def _priority_order(records: Iterable[ImageRecord]) -> list[ImageRecord]:
    return sorted(records, key=lambda r: (-r.priority, r.id))


def pre_shutdown_save(ram_records: Sequence[ImageRecord], flash_capacity: int) -> list:
    """Ids copied from RAM to flash, highest priority first, until flash is full."""
    saved = []
    used = 0
    for rec in _priority_order(r for r in ram_records if r.stored):
        if used + rec.compressed_size > flash_capacity:
            break
        used += rec.compressed_size
        saved.append(rec.id)
    return saved


@dataclass(frozen=True)
class PlanEntry:
    id: Hashable
    bits: int
    priority: float
    partial: bool = False


def select_images(
    stored: Sequence[ImageRecord], bandwidth: float = DEFAULT_BANDWIDTH, window: float = 0.0
) -> list[PlanEntry]:
    """Transmission plan for one contact window.

    Records go out by descending priority (ties by id); the last record may
    be cut short when the window runs out.
    """
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    budget = int(bandwidth * window)
    plan = []
    for rec in _priority_order(r for r in stored if r.information_score > 0):
        if budget <= 0:
            break
        bits = rec.compressed_size * 8
        if bits <= budget:
            plan.append(PlanEntry(rec.id, bits, rec.priority))
            budget -= bits
        else:
            plan.append(PlanEntry(rec.id, budget, rec.priority, partial=True))
            budget = 0
    return plan


def transmitted_priority(plan: Sequence[PlanEntry], records: Sequence[ImageRecord]) -> float:
    """Priority delivered by a plan, prorated for a partial final record."""
    sizes = {r.id: r.compressed_size * 8 for r in records}
    return sum(e.priority * (e.bits / sizes[e.id] if sizes[e.id] else 1.0) for e in plan)
