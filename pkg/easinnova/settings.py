"""Per-project validation settings stored in project.json."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Waiver
from .matrix import Stage

# Gerund lint mirrors the naming shift between the AsIs and ToBe lexicons
DEFAULT_GERUND_LINT = {Stage.ASIS: True, Stage.TOBE: False}


@dataclass(frozen=True)
class ProjectSettings:
    enterprise: str | None = None  # None = project name
    gerund_lint: dict[Stage, bool] = field(default_factory=lambda: dict(DEFAULT_GERUND_LINT))
    waivers: tuple[Waiver, ...] = ()

    def gerund_lint_for(self, stage: Stage) -> bool:
        return self.gerund_lint.get(stage, DEFAULT_GERUND_LINT.get(stage, False))

    def to_dict(self) -> dict:
        data: dict = {}
        if self.enterprise is not None:
            data["enterprise"] = self.enterprise
        data["gerund_lint"] = {
            stage.name: self.gerund_lint_for(stage) for stage in (Stage.ASIS, Stage.TOBE)
        }
        data["waivers"] = [w.to_dict() for w in self.waivers]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> ProjectSettings:
        lint = dict(DEFAULT_GERUND_LINT)
        for key, enabled in data.get("gerund_lint", {}).items():
            lint[Stage[key]] = enabled
        return cls(
            enterprise=data.get("enterprise"),
            gerund_lint=lint,
            waivers=tuple(
                Waiver(w["code"], w["subject"], w["reason"]) for w in data.get("waivers", [])
            ),
        )
