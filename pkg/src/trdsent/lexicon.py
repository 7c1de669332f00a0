"""Therapy lexicon: compile, validate, extend, and serialize.

A lexicon maps every surface form (generic name, brand, abbreviation,
misspelling, colloquialism) to exactly one generic-name entity.  Ambiguity is
a compile error, not a warning: the downstream mention counts are only
meaningful if normalization is a function.

File format (one JSON object per line, UTF-8)::

    {"generic_name": "fluoxetine", "therapy_class": "ssri",
     "variants": ["fluoxetine", "prozac", "flouxetine"],
     "is_neuromodulation": false}

The companion taxonomy file lists the allowed therapy classes::

    {"classes": [{"name": "ssri", "source_named": true}, ...]}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from statistics import median
from typing import Iterable, Literal, Mapping

from trdsent.errors import (
    AmbiguousSurface,
    EmptyEntity,
    LexiconFormatError,
    MissingClass,
    UnknownEntity,
)
from trdsent.textutil import fold_text

_WS_RUN = re.compile(r"\s+")


def _clean_surface(raw: str) -> str:
    """Casefold (length-preserving), strip, collapse internal whitespace."""
    return _WS_RUN.sub(" ", fold_text(raw).strip())


@dataclass(frozen=True)
class ClassTaxonomy:
    """Ordered therapy-class names; classes the source never names are flagged."""

    classes: tuple[str, ...]
    source_named: Mapping[str, bool] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.classes

    @classmethod
    def from_json(cls, text: str) -> "ClassTaxonomy":
        doc = json.loads(text)
        entries = doc["classes"]
        names = tuple(e["name"] for e in entries)
        flags = {e["name"]: bool(e.get("source_named", False)) for e in entries}
        if len(set(names)) != len(names):
            raise LexiconFormatError("taxonomy contains duplicate class names")
        return cls(classes=names, source_named=flags)


@dataclass(frozen=True)
class MedicationEntity:
    generic_name: str
    therapy_class: str
    variants: tuple[str, ...]  # sorted, casefolded, deduplicated
    is_neuromodulation: bool = False


@dataclass(frozen=True)
class LexiconStats:
    entity_count: int
    variant_count: int
    median_variants: float
    min_variants: int
    max_variants: int


@dataclass(frozen=True)
class Lexicon:
    """Compiled, validated lexicon.  Immutable; safe to share across threads."""

    entities: tuple[MedicationEntity, ...]
    surface_index: Mapping[str, str]  # surface -> generic_name
    taxonomy: ClassTaxonomy

    @property
    def entity_by_name(self) -> dict[str, MedicationEntity]:
        return {e.generic_name: e for e in self.entities}

    def entity_of(self, surface: str) -> str:
        return self.surface_index[surface]

    @property
    def stats(self) -> LexiconStats:
        # Recomputed on demand so it can never go stale.
        sizes = [len(e.variants) for e in self.entities]
        return LexiconStats(
            entity_count=len(self.entities),
            variant_count=len(self.surface_index),
            median_variants=float(median(sizes)),
            min_variants=min(sizes),
            max_variants=max(sizes),
        )

    def to_jsonl(self) -> str:
        lines = []
        for e in self.entities:
            lines.append(
                json.dumps(
                    {
                        "generic_name": e.generic_name,
                        "therapy_class": e.therapy_class,
                        "variants": list(e.variants),
                        "is_neuromodulation": e.is_neuromodulation,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
        return "\n".join(lines) + "\n"


def _parse_records(source: str) -> list[dict]:
    records = []
    for line_no, line in enumerate(source.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LexiconFormatError(f"line {line_no}: not valid JSON ({exc.msg})") from exc
        if not isinstance(rec, dict) or "generic_name" not in rec or "variants" not in rec:
            raise LexiconFormatError(
                f"line {line_no}: record needs generic_name and variants fields"
            )
        records.append(rec)
    if not records:
        raise LexiconFormatError("lexicon source contains no entities")
    return records


def compile_lexicon(source: str, taxonomy: ClassTaxonomy | None = None) -> Lexicon:
    """Parse, normalize, and validate a lexicon from its file content.

    All surfaces are casefolded and whitespace-normalized; duplicates within
    one entity are dropped silently; the generic name is always a member of
    its own variant set.  A surface claimed by two entities raises
    :class:`AmbiguousSurface`.
    """
    if taxonomy is None:
        taxonomy = default_taxonomy()
    entities: list[MedicationEntity] = []
    surface_index: dict[str, str] = {}
    seen_names: set[str] = set()
    for rec in _parse_records(source):
        generic = _clean_surface(str(rec["generic_name"]))
        if not generic:
            raise LexiconFormatError("entity with empty generic_name")
        if generic in seen_names:
            raise LexiconFormatError(f"entity {generic!r} appears twice")
        seen_names.add(generic)

        therapy_class = rec.get("therapy_class")
        if not therapy_class:
            raise MissingClass(generic)
        if therapy_class not in taxonomy:
            raise MissingClass(generic, therapy_class)

        cleaned = [_clean_surface(str(v)) for v in rec["variants"]]
        cleaned = [v for v in cleaned if v]
        if not cleaned:
            raise EmptyEntity(generic)
        variants = sorted(set(cleaned) | {generic})

        for surface in variants:
            owner = surface_index.get(surface)
            if owner is not None and owner != generic:
                raise AmbiguousSurface(surface, owner, generic)
            surface_index[surface] = generic

        entities.append(
            MedicationEntity(
                generic_name=generic,
                therapy_class=str(therapy_class),
                variants=tuple(variants),
                is_neuromodulation=bool(rec.get("is_neuromodulation", False)),
            )
        )
    return Lexicon(entities=tuple(entities), surface_index=surface_index, taxonomy=taxonomy)


# --- bundled reference data --------------------------------------------------


def _data_text(name: str) -> str:
    return resources.files("trdsent.data").joinpath(name).read_text(encoding="utf-8")


def default_taxonomy() -> ClassTaxonomy:
    return ClassTaxonomy.from_json(_data_text("taxonomy.json"))


def load_reference_lexicon() -> Lexicon:
    """Compile the lexicon bundled with the package."""
    return compile_lexicon(_data_text("lexicon.jsonl"), default_taxonomy())


# --- misspelling candidates ---------------------------------------------------


def levenshtein_within(a: str, b: str, limit: int) -> bool:
    """True if edit distance between `a` and `b` is <= `limit` (banded DP)."""
    if abs(len(a) - len(b)) > limit:
        return False
    if a == b:
        return True
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        row_min = i
        for j, cb in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (ca != cb),
            )
            row_min = min(row_min, cur[j])
        if row_min > limit:
            return False
        prev = cur
    return prev[len(b)] <= limit


def generate_misspelling_variants(
    generic_name: str,
    corpus_vocabulary: Iterable[str],
    max_edit_distance: int,
) -> list[str]:
    """Candidate surfaces: vocabulary tokens within the edit-distance budget.

    Restricting candidates to tokens that actually occur in the corpus keeps
    the generated variant set grounded in observed usage instead of the full
    combinatorial edit neighborhood.  The generic name itself is excluded.
    Output is sorted lexicographically.
    """
    if not generic_name:
        raise ValueError("generic_name must be nonempty")
    if max_edit_distance < 1:
        raise ValueError("max_edit_distance must be >= 1")
    target = _clean_surface(generic_name)
    hits = set()
    for token in corpus_vocabulary:
        cand = _clean_surface(token)
        if cand and cand != target and levenshtein_within(cand, target, max_edit_distance):
            hits.add(cand)
    return sorted(hits)


# --- variant-generation prompt -------------------------------------------------

VARIANT_PROMPT_TEMPLATE = """\
You are helping build a medication-name lexicon for informal social media text.

Target therapy (generic name): {therapy}

Here are examples of how people write about medications in posts:
{examples}

List realistic alternative spellings, abbreviations, brand names, and casual \
shorthand that people use for "{therapy}" in posts like the ones above.
Output one candidate per line, in the form:
[variant]
Do not explain, number, or annotate the candidates. Output only the list.
"""

VARIANT_PROMPT_DECODING = {"temperature": 0.2, "top_p": 0.9, "max_new_tokens": 220}


@dataclass(frozen=True)
class PromptSpec:
    text: str
    metadata: Mapping[str, object]


def build_variant_prompt(generic_name: str, usage_examples: list[str]) -> PromptSpec:
    """Fill the variant-generation template; decoding settings ride as metadata."""
    if not generic_name:
        raise ValueError("generic_name must be nonempty")
    examples = "\n".join(f"- {ex}" for ex in usage_examples)
    text = VARIANT_PROMPT_TEMPLATE.format(therapy=generic_name, examples=examples)
    return PromptSpec(text=text, metadata=dict(VARIANT_PROMPT_DECODING))


# --- manual-review merge --------------------------------------------------------

Decision = Literal["accept", "reject"]


@dataclass(frozen=True)
class AuditEntry:
    timestamp: str
    entity: str
    candidate: str
    decision: Decision


def merge_candidates(
    lexicon: Lexicon,
    entity: str,
    candidates: list[str],
    review_decisions: Mapping[str, Decision],
    now: datetime | None = None,
) -> tuple[Lexicon, list[AuditEntry]]:
    """Apply reviewed variant candidates to one entity.

    Accepted candidates join the entity's variant set; every decision is
    recorded as an audit entry.  The merged lexicon is re-validated so a
    candidate already owned by another entity still raises
    :class:`AmbiguousSurface`.
    """
    by_name = lexicon.entity_by_name
    if entity not in by_name:
        raise UnknownEntity(entity)
    missing = [c for c in candidates if c not in review_decisions]
    if missing:
        raise ValueError(f"candidates without a review decision: {missing}")

    stamp = (now or datetime.now(timezone.utc)).isoformat()
    audit = []
    accepted = []
    for cand in candidates:
        decision = review_decisions[cand]
        if decision not in ("accept", "reject"):
            raise ValueError(f"decision for {cand!r} must be accept or reject")
        audit.append(AuditEntry(stamp, entity, cand, decision))
        if decision == "accept":
            accepted.append(_clean_surface(cand))

    for surface in accepted:
        owner = lexicon.surface_index.get(surface)
        if owner is not None and owner != entity:
            raise AmbiguousSurface(surface, owner, entity)

    new_entities = []
    for e in lexicon.entities:
        if e.generic_name == entity and accepted:
            merged = sorted(set(e.variants) | set(accepted))
            e = MedicationEntity(e.generic_name, e.therapy_class, tuple(merged), e.is_neuromodulation)
        new_entities.append(e)
    rebuilt = Lexicon(
        entities=tuple(new_entities),
        surface_index=_rebuild_index(new_entities),
        taxonomy=lexicon.taxonomy,
    )
    return rebuilt, audit


def _rebuild_index(entities: Iterable[MedicationEntity]) -> dict[str, str]:
    index: dict[str, str] = {}
    for e in entities:
        for surface in e.variants:
            owner = index.get(surface)
            if owner is not None and owner != e.generic_name:
                raise AmbiguousSurface(surface, owner, e.generic_name)
            index[surface] = e.generic_name
    return index


def append_audit_log(path: str | Path, entries: Iterable[AuditEntry]) -> None:
    """Append review decisions to the audit log (tab-separated, one per line)."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("a", encoding="utf-8") as f:
        for e in entries:
            f.write(f"{e.timestamp}\t{e.entity}\t{e.candidate}\t{e.decision}\n")
