"""JSON artifact envelopes: schemas, reading and deterministic writing.

Schemas check the envelope only (document shape, enums, value types).
Content rules such as name resolution are left to the validators, which
report them as diagnostics instead of rejecting the file.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ArtifactError

log = logging.getLogger(__name__)

NOTE = {"type": "string", "description": "Free-text provenance note"}

TEXT_LIST = {"type": "array", "items": {"type": "string"}}

# JSON schema for the project manifest
PROJECT_SCHEMA = {
    "title": "project",
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "note": NOTE,
        "settings": {
            "type": "object",
            "properties": {
                "enterprise": {"type": "string"},
                "gerund_lint": {
                    "type": "object",
                    "properties": {
                        "ASIS": {"type": "boolean"},
                        "TOBE": {"type": "boolean"},
                    },
                    "additionalProperties": False,
                },
                "waivers": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "code": {"type": "string"},
                            "subject": {"type": "string"},
                            "reason": {"type": "string"},
                        },
                        "required": ["code", "subject", "reason"],
                    },
                },
            },
        },
        "actors_registry": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "signed_off": {"type": "boolean", "default": False},
                    "pim_signed_off": {"type": "boolean", "default": False},
                },
                "required": ["name"],
            },
        },
    },
    "required": ["name"],
}

TEXT_SCHEMA = {
    "title": "text",
    "description": "Narrative or innovation statement",
    "type": "object",
    "properties": {"text": {"type": "string"}, "note": NOTE},
    "required": ["text"],
}

CATEGORIES = ["Object", "Process", "Actor", "Attribute"]

LEXICON_SCHEMA = {
    "title": "lexicon",
    "description": "OPAAL lexicon of one stage",
    "type": "object",
    "properties": {
        "stage": {"enum": ["ASIS", "TOBE"]},
        "note": NOTE,
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {},
                    "category": {"enum": CATEGORIES},
                    "description": {"type": "string"},
                },
            },
        },
        "links": {
            "type": "array",
            "items": {"type": "object", "properties": {"source": {}, "target": {}}},
        },
    },
    "required": ["stage"],
}

MOTIVATIONS_SCHEMA = {
    "title": "motivations",
    "type": "object",
    "properties": {
        "note": NOTE,
        "motivations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "label": {"type": "string"},
                    "kind": {"enum": ["Problem", "Desire"]},
                    "description": {"type": "string"},
                },
                "required": ["label", "kind", "description"],
            },
        },
    },
    "required": ["motivations"],
}

STRATEGIES_SCHEMA = {
    "title": "strategies",
    "type": "object",
    "properties": {
        "note": NOTE,
        "strategies": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "motivation_label": {"type": "string"},
                    "strategy": {"type": "string"},
                },
                "required": ["motivation_label", "strategy"],
            },
        },
    },
    "required": ["strategies"],
}

SOLUTIONS_SCHEMA = {
    "title": "solutions",
    "type": "object",
    "properties": {
        "note": NOTE,
        "solutions": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "label": {"type": "string"},
                    "description": {"type": "string"},
                    "pros": TEXT_LIST,
                    "cons": TEXT_LIST,
                    "mitigations": TEXT_LIST,
                    "selected": {"type": "boolean"},
                },
                "required": ["label", "description"],
            },
        },
    },
    "required": ["solutions"],
}

NOTES_SCHEMA = {
    "title": "transformation notes",
    "type": "object",
    "properties": {
        "note": NOTE,
        "guidelines": TEXT_LIST,
        "units": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string"},
                    "description": {"type": "string"},
                },
                "required": ["name"],
            },
        },
    },
}

CLASSES_SCHEMA = {
    "title": "class skeleton",
    "type": "object",
    "properties": {
        "note": NOTE,
        "classes": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"name": {"type": "string"}, "attributes": TEXT_LIST},
                "required": ["name"],
            },
        },
        "associations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "source": {"type": "string"},
                    "target": {"type": "string"},
                    "label": {"type": ["string", "null"]},
                },
                "required": ["source", "target"],
            },
        },
    },
    "required": ["classes"],
}

USECASES_SCHEMA = {
    "title": "use cases",
    "type": "object",
    "properties": {
        "note": NOTE,
        "use_cases": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"actor": {"type": "string"}, "action": {"type": "string"}},
                "required": ["actor", "action"],
            },
        },
    },
    "required": ["use_cases"],
}

NODE_KINDS = [
    "StartNone",
    "StartMessage",
    "End",
    "Task",
    "XorGateway",
    "AndGateway",
    "CatchMessage",
    "ThrowMessage",
]

EXECUTION_KINDS = ["Unspecified", "User", "ManualPassThrough", "Automatic"]

OPS = ["C", "R", "U", "D", "A"]

PROCESS_SCHEMA = {
    "title": "process model",
    "type": "object",
    "properties": {
        "note": NOTE,
        "stage": {"enum": ["ASIS", "TOBE"]},
        "maturity": {"enum": ["PIM", "PSM"]},
        "pools": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string"},
                    "actor": {"type": "string"},
                    "lanes": TEXT_LIST,
                    "nodes": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "id": {"type": "string"},
                                "kind": {"enum": NODE_KINDS},
                                "name": {"type": ["string", "null"]},
                                "lane": {"type": ["string", "null"]},
                                "execution_kind": {"enum": EXECUTION_KINDS},
                                "effects": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "properties": {
                                            "object": {"type": "string"},
                                            "op": {"enum": OPS},
                                        },
                                        "required": ["object", "op"],
                                    },
                                },
                            },
                            "required": ["id", "kind"],
                        },
                    },
                    "sequence_flows": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "id": {"type": "string"},
                                "source": {"type": "string"},
                                "target": {"type": "string"},
                                "condition": {"type": ["string", "null"]},
                                "default": {"type": "boolean"},
                            },
                            "required": ["id", "source", "target"],
                        },
                    },
                },
                "required": ["name"],
            },
        },
        "message_flows": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "name": {"type": ["string", "null"]},
                    "source_pool": {"type": "string"},
                    "source": {"type": ["string", "null"]},
                    "target_pool": {"type": "string"},
                    "target": {"type": ["string", "null"]},
                },
                "required": ["id", "source_pool", "target_pool"],
            },
        },
    },
    "required": ["stage", "maturity"],
}

INVENTORY_SCHEMA = {
    "title": "legacy data inventory",
    "type": "object",
    "properties": {
        "note": NOTE,
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "entity": {"type": "string"},
                    "store": {"type": "string"},
                    "critical": {"type": "boolean"},
                },
                "required": ["entity"],
            },
        },
    },
    "required": ["entries"],
}

PLATFORM_SCHEMA = {
    "title": "platform choice",
    "type": "object",
    "properties": {
        "note": NOTE,
        "platform": {"type": "string"},
        "rationale": {"type": "string"},
        "shortlist": TEXT_LIST,
        "considered": TEXT_LIST,
    },
    "required": ["platform"],
}

MIGRATION_SCHEMA = {
    "title": "migration plan",
    "type": "object",
    "properties": {
        "note": NOTE,
        "mappings": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "legacy_entity": {"type": "string"},
                    "map_to": {"type": "string"},
                    "drop": {"type": "string"},
                },
                "required": ["legacy_entity"],
                "oneOf": [{"required": ["map_to"]}, {"required": ["drop"]}],
            },
        },
    },
    "required": ["mappings"],
}

ANNOTATIONS_SCHEMA = {
    "title": "PSM annotations",
    "description": "Node id (or Pool/node id) to execution kind",
    "type": "object",
    "additionalProperties": {"enum": EXECUTION_KINDS},
}


def validate(data: Any, schema: dict, source: str | None = None) -> None:
    """Validate a document against its envelope schema.

    Raises:
        ArtifactError: with the failing JSON path in the message.
    """
    try:
        jsonschema.validate(instance=data, schema=schema)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ArtifactError(f"{schema.get('title', 'document')} at {where}: {e.message}", source) from e


def read_json(path: Path, schema: dict | None = None) -> Any:
    """Load a UTF-8 JSON artifact, optionally checking its envelope."""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ArtifactError(f"cannot read: {e.strerror or e}", str(path)) from e
    except UnicodeDecodeError as e:
        raise ArtifactError(f"not UTF-8: byte {e.start} cannot be decoded", str(path)) from e
    except json.JSONDecodeError as e:
        raise ArtifactError(f"invalid JSON at line {e.lineno}: {e.msg}", str(path)) from e
    if schema is not None:
        validate(data, schema, str(path))
    log.debug(f"Loaded {path}")
    return data


def dump_json(data: Any) -> str:
    """Deterministic JSON text: two-space indent, UTF-8, trailing newline."""
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(data), encoding="utf-8")
    log.debug(f"Wrote {path}")
