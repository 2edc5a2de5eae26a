"""The 3x3 innovation matrix: MDA layers crossed with innovation stages."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class Layer(IntEnum):
    CIM = 0
    PIM = 1
    PSM = 2

    @property
    def label(self) -> str:
        return self.name


class Stage(IntEnum):
    ASIS = 0
    TRANSFORMATION = 1
    TOBE = 2

    @property
    def label(self) -> str:
        """Human label used in messages ("AsIs", "ToBe")."""
        return {0: "AsIs", 1: "Transformation", 2: "ToBe"}[self.value]

    @classmethod
    def parse(cls, text: str) -> Stage:
        """Accept ASIS / asis / AsIs style spellings."""
        key = text.replace("-", "").replace("_", "").upper()
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"Unknown stage: {text}") from None


# Stages that own a lexicon and process models
MODEL_STAGES = (Stage.ASIS, Stage.TOBE)


@dataclass(frozen=True, order=True)
class CellId:
    """One cell of the matrix. Ordering is row-major."""

    layer: Layer
    stage: Stage

    def __str__(self) -> str:
        return f"{self.layer.name}-{self.stage.name}"

    @property
    def path(self) -> str:
        """Relative directory of the cell inside a project ("pim/tobe")."""
        return f"{self.layer.name.lower()}/{self.stage.name.lower()}"

    @classmethod
    def parse(cls, text: str) -> CellId:
        """Parse "CIM-ASIS" or "cim/asis"."""
        sep = "/" if "/" in text else "-"
        layer_text, _, stage_text = text.partition(sep)
        try:
            return cls(Layer[layer_text.upper()], Stage.parse(stage_text))
        except (KeyError, ValueError):
            raise ValueError(f"Unknown cell: {text}") from None


ALL_CELLS: tuple[CellId, ...] = tuple(CellId(layer, stage) for layer in Layer for stage in Stage)


class _Done:
    """Returned by next_step when every cell is Ready."""

    _instance: _Done | None = None

    def __new__(cls) -> _Done:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __str__(self) -> str:
        return "Done"

    def __repr__(self) -> str:
        return "Done"


Done = _Done()
DoneType = _Done
