"""Exception types shared across the pipeline.

Every error the pipeline can surface deliberately derives from
:class:`PipelineError`, so the CLI can render any failure as a single
machine-parsable line (``error: <Kind>: <detail>``).
"""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all deliberate pipeline failures."""

    @property
    def kind(self) -> str:
        return type(self).__name__


# --- lexicon ---------------------------------------------------------------


class LexiconFormatError(PipelineError):
    """Lexicon source does not parse as the documented record format."""


class AmbiguousSurface(PipelineError):
    def __init__(self, surface: str, entity_a: str, entity_b: str):
        super().__init__(
            f"surface {surface!r} is claimed by both {entity_a!r} and {entity_b!r}"
        )
        self.surface = surface
        self.entity_a = entity_a
        self.entity_b = entity_b


class EmptyEntity(PipelineError):
    def __init__(self, generic_name: str):
        super().__init__(f"entity {generic_name!r} has no variants after cleaning")
        self.generic_name = generic_name


class MissingClass(PipelineError):
    def __init__(self, generic_name: str, therapy_class: str | None = None):
        detail = f"entity {generic_name!r} has no class assignment"
        if therapy_class:
            detail = (
                f"entity {generic_name!r} declares class {therapy_class!r} "
                "which is not in the configured taxonomy"
            )
        super().__init__(detail)
        self.generic_name = generic_name
        self.therapy_class = therapy_class


class UnknownEntity(PipelineError):
    def __init__(self, generic_name: str):
        super().__init__(f"no entity named {generic_name!r} in the lexicon")
        self.generic_name = generic_name


# --- corpus ----------------------------------------------------------------


class DanglingMention(PipelineError):
    def __init__(self, post_id: str):
        super().__init__(f"mention references post {post_id!r} not in the corpus")
        self.post_id = post_id


# --- context ---------------------------------------------------------------


class SpanOutOfBounds(PipelineError):
    def __init__(self, start: int, end: int, length: int):
        super().__init__(f"span ({start}, {end}) out of bounds for text of length {length}")
        self.start = start
        self.end = end
        self.length = length


# --- sentiment -------------------------------------------------------------


class UnknownMentionId(PipelineError):
    def __init__(self, mention_id: str):
        super().__init__(f"prediction references unknown mention {mention_id!r}")
        self.mention_id = mention_id


class DuplicatePrediction(PipelineError):
    def __init__(self, mention_id: str):
        super().__init__(f"multiple predictions for mention {mention_id!r}")
        self.mention_id = mention_id


class InvalidLabel(PipelineError):
    def __init__(self, label: str):
        super().__init__(f"label {label!r} is not one of Negative/Neutral/Positive")
        self.label = label


class InvalidConfidence(PipelineError):
    def __init__(self, value: object):
        super().__init__(f"confidence {value!r} is not a probability in [0, 1]")
        self.value = value


class NeutralNotAugmented(PipelineError):
    def __init__(self) -> None:
        super().__init__("only Positive/Negative instances are augmented")


class LengthMismatch(PipelineError):
    def __init__(self, n_gold: int, n_pred: int):
        super().__init__(f"gold has {n_gold} labels but predictions have {n_pred}")
        self.n_gold = n_gold
        self.n_pred = n_pred


class EmptyInput(PipelineError):
    pass


class SampleTooLarge(PipelineError):
    def __init__(self, n: int, population: int):
        super().__init__(f"sample size {n} exceeds population {population}")
        self.n = n
        self.population = population


# --- stats -----------------------------------------------------------------


class EmptyNonNeutral(PipelineError):
    def __init__(self) -> None:
        super().__init__("binomial test needs at least one non-neutral mention")


class InvalidP(PipelineError):
    def __init__(self, value: object):
        super().__init__(f"p-value {value!r} is not in [0, 1]")
        self.value = value


class DegenerateMargin(PipelineError):
    def __init__(self, axis: str, index: int):
        super().__init__(f"contingency table has an all-zero {axis} at index {index}")
        self.axis = axis
        self.index = index


class EmptyGroup(PipelineError):
    pass


# --- report ----------------------------------------------------------------


class ReconciliationError(PipelineError):
    def __init__(self, table: str, expected: object, actual: object):
        super().__init__(f"{table}: expected total {expected!r}, got {actual!r}")
        self.table = table
        self.expected = expected
        self.actual = actual
