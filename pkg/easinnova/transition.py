"""PSM-AsIs and PSM-Transformation records: legacy data, platform, migration."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .diagnostics import Diagnostic, error, sort_diagnostics, warning
from .matrix import CellId, Layer, Stage
from .opaal import Category, OpaalLexicon

INVENTORY_CELL = CellId(Layer.PSM, Stage.ASIS)
TRANSFORMATION_CELL = CellId(Layer.PSM, Stage.TRANSFORMATION)


@dataclass(frozen=True)
class DataInventoryEntry:
    entity: str
    store: str = ""
    critical: bool = False

    def to_dict(self) -> dict:
        return {"entity": self.entity, "store": self.store, "critical": self.critical}

    @classmethod
    def from_dict(cls, data: dict) -> DataInventoryEntry:
        return cls(data["entity"], data.get("store", ""), data.get("critical", False))


@dataclass(frozen=True)
class PlatformChoice:
    platform: str
    rationale: str = ""
    shortlist: tuple[str, ...] = ()
    considered: tuple[str, ...] = ()  # market scan; empty = not recorded

    def to_dict(self) -> dict:
        return {
            "platform": self.platform,
            "rationale": self.rationale,
            "shortlist": list(self.shortlist),
            "considered": list(self.considered),
        }

    @classmethod
    def from_dict(cls, data: dict) -> PlatformChoice:
        return cls(
            platform=data["platform"],
            rationale=data.get("rationale", ""),
            shortlist=tuple(data.get("shortlist", [])),
            considered=tuple(data.get("considered", [])),
        )


@dataclass(frozen=True)
class MigrationMapping:
    """Disposition of one legacy entity: map it to a ToBe object or drop it."""

    legacy_entity: str
    map_to: str | None = None
    drop_reason: str | None = None

    @property
    def is_drop(self) -> bool:
        return self.map_to is None

    def to_dict(self) -> dict:
        if self.is_drop:
            return {"legacy_entity": self.legacy_entity, "drop": self.drop_reason or ""}
        return {"legacy_entity": self.legacy_entity, "map_to": self.map_to}

    @classmethod
    def from_dict(cls, data: dict) -> MigrationMapping:
        if "map_to" in data:
            return cls(data["legacy_entity"], map_to=data["map_to"])
        return cls(data["legacy_entity"], drop_reason=data.get("drop", ""))


def validate_inventory(entries: list[DataInventoryEntry] | tuple[DataInventoryEntry, ...]) -> list[Diagnostic]:
    counts = Counter(e.entity for e in entries)
    return sort_diagnostics(
        error("INV-DUP", INVENTORY_CELL, f"{INVENTORY_CELL.path}/inventory#{entity}",
              f"legacy entity '{entity}' listed {count} times")
        for entity, count in counts.items()
        if count > 1
    )


def validate_platform(choice: PlatformChoice) -> list[Diagnostic]:
    subject = f"{TRANSFORMATION_CELL.path}/platform"
    diagnostics = []
    if choice.platform not in choice.shortlist:
        diagnostics.append(
            error("PLAT-NOT-SHORTLISTED", TRANSFORMATION_CELL, subject,
                  f"platform '{choice.platform}' is not on the shortlist")
        )
    if choice.considered:
        for name in choice.shortlist:
            if name not in choice.considered:
                diagnostics.append(
                    warning("PLAT-UNCONSIDERED", TRANSFORMATION_CELL, subject,
                            f"shortlisted platform '{name}' is missing from the market scan")
                )
    return sort_diagnostics(diagnostics)


def validate_migration_plan(
    plan: list[MigrationMapping] | tuple[MigrationMapping, ...],
    inventory: list[DataInventoryEntry] | tuple[DataInventoryEntry, ...],
    tobe_lexicon: OpaalLexicon | None,
) -> list[Diagnostic]:
    """Check a migration plan against the inventory and the ToBe lexicon.

    Args:
        plan: One mapping per legacy entity.
        inventory: Legacy data inventory (PSM-AsIs).
        tobe_lexicon: ToBe lexicon; None means no targets resolve.

    Returns:
        Sorted diagnostics bound to PSM-Transformation.
    """
    cell = TRANSFORMATION_CELL
    objects = tobe_lexicon.names(Category.OBJECT) if tobe_lexicon else frozenset()
    by_entity = {e.entity: e for e in inventory}
    mapped = Counter(m.legacy_entity for m in plan)
    diagnostics = []

    def subject(entity: str) -> str:
        return f"{cell.path}/migration#{entity}"

    for entity in sorted(by_entity):
        if entity not in mapped:
            diagnostics.append(
                error("MIG-UNMAPPED", cell, subject(entity), f"legacy entity '{entity}' has no mapping")
            )
    for entity, count in sorted(mapped.items()):
        if count > 1:
            diagnostics.append(
                error("MIG-DUP", cell, subject(entity), f"legacy entity '{entity}' is mapped {count} times")
            )

    for mapping in plan:
        entry = by_entity.get(mapping.legacy_entity)
        if entry is None:
            diagnostics.append(
                error("MIG-DANGLING", cell, subject(mapping.legacy_entity),
                      f"'{mapping.legacy_entity}' is not in the legacy data inventory")
            )
        if mapping.is_drop:
            if entry is not None and entry.critical:
                diagnostics.append(
                    warning("MIG-DROP-CRITICAL", cell, subject(mapping.legacy_entity),
                            f"critical entity '{mapping.legacy_entity}' is dropped: {mapping.drop_reason}")
                )
        elif mapping.map_to not in objects:
            diagnostics.append(
                error("MIG-UNKNOWN-TARGET", cell, subject(mapping.legacy_entity),
                      f"target '{mapping.map_to}' is not a ToBe Object term")
            )
    return sort_diagnostics(diagnostics)
