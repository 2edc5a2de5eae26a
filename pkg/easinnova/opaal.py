"""OPAAL lexicons: parsing, validation, diffing and model derivation."""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Collection, Iterable
from dataclasses import dataclass, field
from enum import Enum

from .diagnostics import Diagnostic, error, info, sort_diagnostics, warning
from .documents import LEXICON_SCHEMA, validate
from .errors import ArtifactError, PreconditionError
from .matrix import CellId, Layer, Stage
from .settings import ProjectSettings

log = logging.getLogger(__name__)

NAME_RE = re.compile(r"^\S+$")
WORD_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z]?[a-z0-9]+")


class Category(Enum):
    OBJECT = "Object"
    PROCESS = "Process"
    ACTOR = "Actor"
    ATTRIBUTE = "Attribute"


# Link endpoint resolution preference when a name is declared more than once
RESOLUTION_ORDER = (Category.OBJECT, Category.ACTOR, Category.PROCESS, Category.ATTRIBUTE)
CLASS_CATEGORIES = (Category.OBJECT, Category.ACTOR)


@dataclass(frozen=True)
class Term:
    name: str
    category: Category
    description: str | None = None


@dataclass(frozen=True)
class Link:
    """A relationship between two terms, stored as written."""

    source: str
    target: str

    @property
    def key(self) -> tuple[str, str]:
        """Unordered identity."""
        return (self.source, self.target) if self.source <= self.target else (self.target, self.source)

    def __str__(self) -> str:
        return f"{self.source}-{self.target}"


@dataclass(frozen=True)
class OpaalLexicon:
    stage: Stage
    terms: tuple[Term, ...] = ()
    links: tuple[Link, ...] = ()

    @property
    def cell(self) -> CellId:
        return CellId(Layer.CIM, self.stage)

    def subject(self, item: str) -> str:
        return f"{self.cell.path}/lexicon#{item}"

    def names(self, category: Category) -> frozenset[str]:
        return frozenset(t.name for t in self.terms if t.category is category)

    def all_names(self) -> frozenset[str]:
        return frozenset(t.name for t in self.terms)

    def categories_of(self, name: str) -> tuple[Category, ...]:
        """Categories declaring ``name``, in resolution preference order."""
        declared = {t.category for t in self.terms if t.name == name}
        return tuple(c for c in RESOLUTION_ORDER if c in declared)

    def has(self, name: str, category: Category) -> bool:
        return any(t.name == name and t.category is category for t in self.terms)

    def resolve(self, name: str) -> Category | None:
        cats = self.categories_of(name)
        return cats[0] if cats else None

    def unresolved_links(self) -> list[Link]:
        declared = self.all_names()
        return [ln for ln in self.links if ln.source not in declared or ln.target not in declared]


@dataclass(frozen=True)
class CategoryDiff:
    added: frozenset[str] = frozenset()
    removed: frozenset[str] = frozenset()
    kept: frozenset[str] = frozenset()

    @property
    def is_empty(self) -> bool:
        return not self.added and not self.removed

    def to_dict(self) -> dict:
        return {
            "added": sorted(self.added),
            "removed": sorted(self.removed),
            "kept": sorted(self.kept),
        }


@dataclass(frozen=True)
class LexiconDiff:
    """Per-category name diff between two lexicons, plus link diff."""

    categories: dict[Category, CategoryDiff]
    links: CategoryDiff = field(default_factory=CategoryDiff)

    def __getitem__(self, category: Category) -> CategoryDiff:
        return self.categories[category]

    @property
    def is_empty(self) -> bool:
        return all(d.is_empty for d in self.categories.values()) and self.links.is_empty

    def to_dict(self) -> dict:
        data = {c.value: self.categories[c].to_dict() for c in Category}
        data["Link"] = self.links.to_dict()
        return data

    def render(self) -> str:
        lines = []
        for label, part in [(c.value, self.categories[c]) for c in Category] + [("Link", self.links)]:
            lines.append(f"{label}:")
            lines.append(f"  added:   {', '.join(sorted(part.added)) or '-'}")
            lines.append(f"  removed: {', '.join(sorted(part.removed)) or '-'}")
            lines.append(f"  kept:    {', '.join(sorted(part.kept)) or '-'}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClassModelSkeleton:
    classes: tuple[tuple[str, tuple[str, ...]], ...] = ()
    associations: tuple[tuple[str, str, str | None], ...] = ()

    def class_names(self) -> list[str]:
        return [name for name, _ in self.classes]

    def attributes_of(self, name: str) -> tuple[str, ...]:
        return dict(self.classes).get(name, ())

    def to_dict(self) -> dict:
        return {
            "classes": [{"name": n, "attributes": list(attrs)} for n, attrs in self.classes],
            "associations": [
                {"source": s, "target": t, "label": label} for s, t, label in self.associations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> ClassModelSkeleton:
        return cls(
            classes=tuple(
                (c["name"], tuple(c.get("attributes", []))) for c in data.get("classes", [])
            ),
            associations=tuple(
                (a["source"], a["target"], a.get("label")) for a in data.get("associations", [])
            ),
        )


@dataclass(frozen=True, order=True)
class UseCase:
    actor: str
    action: str

    def to_dict(self) -> dict:
        return {"actor": self.actor, "action": self.action}


def _valid_name(value: object) -> bool:
    return isinstance(value, str) and bool(NAME_RE.match(value))


def parse_lexicon(
    document: dict | str, source: str | None = None
) -> tuple[OpaalLexicon, list[Diagnostic]]:
    """Parse a lexicon document.

    Args:
        document: Parsed JSON object, or its text.
        source: File name used in error messages.

    Returns:
        The lexicon built from every well-formed entry, and diagnostics for
        the skipped ones.

    Raises:
        ArtifactError: unreadable document, bad envelope or unknown category.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ArtifactError(f"invalid JSON at line {e.lineno}: {e.msg}", source) from e
    validate(document, LEXICON_SCHEMA, source)

    stage = Stage[document["stage"]]
    cell = CellId(Layer.CIM, stage)
    subject = f"{cell.path}/lexicon"
    diagnostics: list[Diagnostic] = []

    terms: list[Term] = []
    seen_terms: set[tuple[str, Category]] = set()
    for index, entry in enumerate(document.get("terms", [])):
        name = entry.get("name")
        if not _valid_name(name) or "category" not in entry:
            diagnostics.append(
                error("OPAAL-MALFORMED", cell, f"{subject}#terms[{index}]",
                      f"term entry needs a whitespace-free name and a category, got {entry!r}")
            )
            continue
        category = Category(entry["category"])
        if (name, category) in seen_terms:
            diagnostics.append(
                error("OPAAL-DUP", cell, f"{subject}#{name}",
                      f"{category.value} term '{name}' declared twice")
            )
            continue
        seen_terms.add((name, category))
        terms.append(Term(name, category, entry.get("description")))

    links: list[Link] = []
    seen_links: set[tuple[str, str]] = set()
    for index, entry in enumerate(document.get("links", [])):
        link_source, link_target = entry.get("source"), entry.get("target")
        if not _valid_name(link_source) or not _valid_name(link_target):
            diagnostics.append(
                error("OPAAL-MALFORMED", cell, f"{subject}#links[{index}]",
                      f"link entry needs two whitespace-free endpoints, got {entry!r}")
            )
            continue
        link = Link(link_source, link_target)
        if link.key in seen_links:
            a, b = link.key
            diagnostics.append(
                warning("OPAAL-DUP", cell, f"{subject}#{a}-{b}", f"link {a}-{b} declared twice")
            )
            continue
        seen_links.add(link.key)
        links.append(link)

    lexicon = OpaalLexicon(stage, tuple(terms), tuple(links))
    log.debug(f"Parsed {stage.label} lexicon: {len(terms)} terms, {len(links)} links")
    return lexicon, sort_diagnostics(diagnostics)


def serialize_lexicon(lex: OpaalLexicon) -> dict:
    terms = []
    for term in lex.terms:
        entry = {"name": term.name, "category": term.category.value}
        if term.description is not None:
            entry["description"] = term.description
        terms.append(entry)
    return {
        "stage": lex.stage.name,
        "terms": terms,
        "links": [{"source": ln.source, "target": ln.target} for ln in lex.links],
    }


def is_gerund(name: str) -> bool:
    """True when one CamelCase word of ``name`` ends in "ing"."""
    return any(word.lower().endswith("ing") for word in WORD_RE.findall(name))


def validate_lexicon(
    lex: OpaalLexicon,
    settings: ProjectSettings | None = None,
    involved: Collection[str] = (),
) -> list[Diagnostic]:
    """Check link resolution, naming and term usage.

    Args:
        lex: Lexicon to check.
        settings: Project settings; decides whether the gerund lint runs.
        involved: Names used by the stage's process models. Terms in no
            link and not in this set are reported as orphans.

    Returns:
        Sorted diagnostics.
    """
    settings = settings or ProjectSettings()
    cell = lex.cell
    declared = lex.all_names()
    diagnostics: list[Diagnostic] = []

    for link in lex.links:
        for endpoint in (link.source, link.target):
            if endpoint not in declared:
                diagnostics.append(
                    error("R1", cell, lex.subject(str(link)),
                          f"link endpoint '{endpoint}' is not a declared term")
                )
                continue
            cats = lex.categories_of(endpoint)
            if len(cats) > 1:
                diagnostics.append(
                    info("OPAAL-AMBIG", cell, lex.subject(str(link)),
                         f"endpoint '{endpoint}' is declared as "
                         f"{', '.join(c.value for c in cats)}; resolved as {cats[0].value}")
                )

    if settings.gerund_lint_for(lex.stage):
        for name in sorted(lex.names(Category.PROCESS)):
            if not is_gerund(name):
                diagnostics.append(
                    warning("OPAAL-GERUND", cell, lex.subject(name),
                            f"Process term '{name}' is not phrased as a gerund")
                )

    for name in sorted(declared):
        cats = lex.categories_of(name)
        if len(cats) > 1:
            diagnostics.append(
                warning("OPAAL-XCAT", cell, lex.subject(name),
                        f"'{name}' is declared in several categories: "
                        f"{', '.join(c.value for c in cats)}")
            )

    linked = {ln.source for ln in lex.links} | {ln.target for ln in lex.links}
    for name in sorted(declared - linked - set(involved)):
        diagnostics.append(
            info("OPAAL-ORPHAN", cell, lex.subject(name),
                 f"term '{name}' takes part in no link and no process model")
        )

    return sort_diagnostics(diagnostics)


def _diff_sets(a: Iterable[str], b: Iterable[str]) -> CategoryDiff:
    a_set, b_set = frozenset(a), frozenset(b)
    return CategoryDiff(added=b_set - a_set, removed=a_set - b_set, kept=a_set & b_set)


def diff_lexicons(a: OpaalLexicon, b: OpaalLexicon) -> LexiconDiff:
    """Set-exact per-category diff of term names from ``a`` to ``b``."""
    return LexiconDiff(
        categories={c: _diff_sets(a.names(c), b.names(c)) for c in Category},
        links=_diff_sets(
            (f"{x}-{y}" for x, y in (ln.key for ln in a.links)),
            (f"{x}-{y}" for x, y in (ln.key for ln in b.links)),
        ),
    )


def _resolved_links(lex: OpaalLexicon, waived_links: Collection[str]) -> list[Link]:
    unresolved = lex.unresolved_links()
    blocking = [ln for ln in unresolved if str(ln) not in waived_links]
    if blocking:
        raise PreconditionError(
            f"{lex.stage.label} lexicon has undefined link endpoints: "
            f"{', '.join(str(ln) for ln in blocking)}"
        )
    return [ln for ln in lex.links if ln not in unresolved]


def derive_use_cases(lex: OpaalLexicon, waived_links: Collection[str] = ()) -> list[UseCase]:
    """One use case per Actor-Process link, in either direction.

    Args:
        lex: Lexicon with no unresolved links.
        waived_links: Unresolved links ("Source-Target") to skip instead
            of failing.

    Raises:
        PreconditionError: the lexicon has unwaived undefined endpoints.
    """
    result: set[UseCase] = set()
    for link in _resolved_links(lex, waived_links):
        for actor, action in ((link.source, link.target), (link.target, link.source)):
            if lex.has(actor, Category.ACTOR) and lex.has(action, Category.PROCESS):
                result.add(UseCase(actor, action))
    return sorted(result)


def derive_class_skeleton(
    lex: OpaalLexicon, waived_links: Collection[str] = ()
) -> ClassModelSkeleton:
    """First class diagram from the lexicon.

    Object and Actor terms become classes. A link reaching an Attribute
    term attaches it to the class on the other end; a link between two
    classes becomes an association. Links touching Process terms only
    label behaviour and yield nothing here.

    Raises:
        PreconditionError: the lexicon has unwaived undefined endpoints.
    """
    class_names = sorted(lex.names(Category.OBJECT) | lex.names(Category.ACTOR))
    attributes: dict[str, set[str]] = {name: set() for name in class_names}
    associations: dict[tuple[str, str], tuple[str, str, str | None]] = {}

    def is_class(name: str) -> bool:
        return name in attributes

    for link in _resolved_links(lex, waived_links):
        s, t = link.source, link.target
        if is_class(s) and lex.has(t, Category.ATTRIBUTE) and s != t:
            attributes[s].add(t)
        elif is_class(t) and lex.has(s, Category.ATTRIBUTE) and s != t:
            attributes[t].add(s)
        elif is_class(s) and is_class(t):
            associations.setdefault(link.key, (s, t, None))

    return ClassModelSkeleton(
        classes=tuple((name, tuple(sorted(attributes[name]))) for name in class_names),
        associations=tuple(sorted(associations.values(), key=lambda a: (a[0], a[1]))),
    )
