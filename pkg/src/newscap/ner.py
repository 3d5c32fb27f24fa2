"""Entity recognition, the visual-entity policy, and exact-match counting.

Two interchangeable taggers back every entity-consuming operation: a
deterministic gazetteer-plus-pattern tagger that keeps the repo
self-contained, and an importer for externally produced annotations so runs
made with another recognizer can be replayed bit-exactly.

Entity comparison is exact, case-sensitive surface matching with multiset
clipping: each reference occurrence can absorb at most one generated
occurrence, so repeating one name cannot inflate precision.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import InputFileError, SchemaError

LABELS = frozenset(
    {
        "PERSON", "ORG", "GPE", "LOC", "EVENT", "FAC", "NORP", "WORK_OF_ART",
        "PRODUCT", "LAW", "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY",
        "QUANTITY", "ORDINAL", "CARDINAL",
    }
)

# Label classes that cannot be depicted in a photograph. DATE is the one
# fixed member; the rest are a configurable default.
DEFAULT_NON_VISUAL_LABELS = frozenset(
    {"DATE", "TIME", "PERCENT", "MONEY", "QUANTITY", "ORDINAL", "CARDINAL"}
)


@dataclass(frozen=True)
class Entity:
    """A recognized entity with its exact surface and character span."""

    surface: str
    label: str
    start_char: int
    end_char: int
    source: str = ""

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise SchemaError(f"unknown entity label {self.label!r}")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start_char, self.end_char)


@dataclass(frozen=True)
class VisualEntityPolicy:
    non_visual_labels: frozenset[str] = DEFAULT_NON_VISUAL_LABELS

    def __post_init__(self) -> None:
        if "DATE" not in self.non_visual_labels:
            raise SchemaError("visual-entity policy must treat DATE as non-visual")
        unknown = self.non_visual_labels - LABELS
        if unknown:
            raise SchemaError(f"unknown labels in policy: {sorted(unknown)}")

    def is_visual(self, entity: Entity) -> bool:
        return entity.label not in self.non_visual_labels


def load_policy(path: str | Path) -> VisualEntityPolicy:
    """Load a policy file: one non-visual label per line."""
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"policy file not found: {path}")
    labels = set()
    for line in path.read_text("utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            labels.add(line)
    return VisualEntityPolicy(non_visual_labels=frozenset(labels))


def visual_entities(entities: list[Entity], policy: VisualEntityPolicy) -> list[Entity]:
    """Drop entities whose label the policy treats as invisible; keeps order."""
    return [e for e in entities if policy.is_visual(e)]


def contains_surface(text: str, surface: str) -> bool:
    """True if surface occurs in text delimited by word boundaries (case-sensitive)."""
    if not surface:
        return False
    pattern = r"(?<!\w)" + re.escape(surface) + r"(?!\w)"
    return re.search(pattern, text) is not None


# ---------------------------------------------------------------------------
# Built-in deterministic tagger: gazetteer + closed pattern rules
# ---------------------------------------------------------------------------

_WEEKDAYS = "Monday Tuesday Wednesday Thursday Friday Saturday Sunday".split()
_MONTHS = (
    "January February March April May June July August September October "
    "November December".split()
)

# Pattern rules applied after the gazetteer; each yields (surface, label).
_PATTERN_RULES: list[tuple[re.Pattern[str], str]] = [
    (re.compile(r"\b(?:%s)\b" % "|".join(_WEEKDAYS)), "DATE"),
    (
        re.compile(r"\b(?:%s)(?: \d{1,2}(?:, \d{4})?)?\b" % "|".join(_MONTHS)),
        "DATE",
    ),
    (re.compile(r"\b\d+(?:\.\d+)? percent\b|\d+(?:\.\d+)?%"), "PERCENT"),
    (re.compile(r"\$\d+(?:[.,]\d+)*(?: (?:million|billion|trillion))?"), "MONEY"),
    (re.compile(r"\b\d+(?:st|nd|rd|th)\b"), "ORDINAL"),
]


class GazetteerTagger:
    """Dictionary tagger with longest-match-first, leftmost-wins resolution.

    The gazetteer maps exact surfaces to labels; matches must sit on word
    boundaries. Pattern rules cover closed classes (weekdays, months,
    percents, money, ordinals) and lose ties against gazetteer entries of
    the same span.
    """

    def __init__(self, entries: dict[str, str]):
        for surface, label in entries.items():
            if not surface:
                raise SchemaError("empty gazetteer surface")
            if label not in LABELS:
                raise SchemaError(f"unknown gazetteer label {label!r} for {surface!r}")
        self._entries = dict(entries)
        self._patterns = [
            (re.compile(r"(?<!\w)" + re.escape(surface) + r"(?!\w)"), surface, label)
            for surface, label in sorted(self._entries.items())
        ]

    def tag(self, text: str, doc_id: str | None = None, field: str = "") -> list[Entity]:
        # priority 0 = gazetteer, 1 = pattern rule; used only to break exact ties
        candidates: list[tuple[int, int, int, str, str]] = []
        for pattern, surface, label in self._patterns:
            for match in pattern.finditer(text):
                candidates.append((match.start(), match.end(), 0, surface, label))
        for pattern, label in _PATTERN_RULES:
            for match in pattern.finditer(text):
                candidates.append((match.start(), match.end(), 1, match.group(0), label))

        candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0], c[2], c[4]))
        chosen: list[tuple[int, int, int, str, str]] = []
        occupied: list[tuple[int, int]] = []
        for cand in candidates:
            start, end = cand[0], cand[1]
            if any(start < e and s < end for s, e in occupied):
                continue
            chosen.append(cand)
            occupied.append((start, end))
        chosen.sort(key=lambda c: c[0])
        return [
            Entity(surface=surface, label=label, start_char=start, end_char=end, source=field)
            for start, end, _prio, surface, label in chosen
        ]


def load_gazetteer(path: str | Path) -> GazetteerTagger:
    """Load a gazetteer file: one ``surface<TAB>label`` entry per line."""
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"gazetteer file not found: {path}")
    entries: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise SchemaError(f"gazetteer line {line_no} is not 'surface<TAB>label'")
        entries[parts[0]] = parts[1]
    return GazetteerTagger(entries)


# ---------------------------------------------------------------------------
# External annotation import
# ---------------------------------------------------------------------------

class AnnotationTagger:
    """Replays externally produced entity annotations keyed by (doc_id, field).

    File format: one JSON record per line with ``doc_id``, ``field``
    ("article", "caption", or "generated"), and ``entities`` as a list of
    {surface, label, start_char, end_char}. Spans are validated against the
    text they are applied to.
    """

    def __init__(self, records: dict[tuple[str, str], list[Entity]]):
        self._records = records

    def tag(self, text: str, doc_id: str | None = None, field: str = "") -> list[Entity]:
        if doc_id is None:
            raise SchemaError("annotation tagger requires a doc_id")
        key = (doc_id, field)
        if key not in self._records:
            raise SchemaError(f"no annotation for doc_id {doc_id!r} field {field!r}")
        entities = self._records[key]
        for ent in entities:
            if text[ent.start_char : ent.end_char] != ent.surface:
                raise SchemaError(
                    f"annotation span mismatch for doc_id {doc_id!r}: "
                    f"{ent.surface!r} at {ent.span}"
                )
        return list(entities)


def load_annotations(path: str | Path) -> AnnotationTagger:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"annotation file not found: {path}")
    records: dict[tuple[str, str], list[Entity]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"malformed annotation at line {line_no}: {exc.msg}") from None
            for name in ("doc_id", "field", "entities"):
                if name not in raw:
                    raise SchemaError(f"missing field {name} at line {line_no}")
            entities = [
                Entity(
                    surface=e["surface"],
                    label=e["label"],
                    start_char=int(e["start_char"]),
                    end_char=int(e["end_char"]),
                    source=raw["field"],
                )
                for e in raw["entities"]
            ]
            entities.sort(key=lambda e: e.start_char)
            records[(raw["doc_id"], raw["field"])] = entities
    return AnnotationTagger(records)


# ---------------------------------------------------------------------------
# Exact-match counting
# ---------------------------------------------------------------------------

def match_entities(
    generated: list[Entity] | list[str], reference: list[Entity] | list[str]
) -> tuple[int, int, int]:
    """Multiset exact-surface matching: returns (tp, fp, fn).

    Each reference occurrence matches at most one generated occurrence, so
    tp <= min(|generated|, |reference|).
    """
    gen = [e.surface if isinstance(e, Entity) else e for e in generated]
    ref = [e.surface if isinstance(e, Entity) else e for e in reference]
    ref_counts: dict[str, int] = {}
    for surface in ref:
        ref_counts[surface] = ref_counts.get(surface, 0) + 1
    tp = 0
    for surface in gen:
        if ref_counts.get(surface, 0) > 0:
            ref_counts[surface] -= 1
            tp += 1
    return tp, len(gen) - tp, len(ref) - tp


def entity_pr(tp: int, fp: int, fn: int) -> tuple[float, float]:
    """Precision and recall with the 0/0 -> 0 convention."""
    if min(tp, fp, fn) < 0:
        raise SchemaError("entity counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return precision, recall
