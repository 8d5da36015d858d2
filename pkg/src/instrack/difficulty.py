"""Instruction difficulty scoring: attribute rulebook validation, score summing, level mapping."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import ParseError, ValidationError


class Level(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


class Category(str, Enum):
    SPATIAL_POSITION = "SpatialPosition"
    MOVEMENT = "Movement"
    COSTUME = "Costume"
    HUMAN_ATTRIBUTE = "HumanAttribute"
    OBJECT_USAGE = "ObjectUsage"
    OBJECT_APPEARANCE = "ObjectAppearance"
    SPECIFIC_NOUN = "SpecificNoun"
    AUXILIARY_MODIFIER = "AuxiliaryModifier"
    OTHERS = "Others"


@dataclass(frozen=True)
class RuleEntry:
    category: Category
    detailed: str
    min_score: int
    max_score: int


# (category, detailed attribute) -> allowed score range, inclusive. The Object
# Usage row has no detailed-attribute name in the source rubric; keyed "-".
_RULES: tuple[RuleEntry, ...] = (
    RuleEntry(Category.SPATIAL_POSITION, "orientation", 1, 1),
    RuleEntry(Category.SPATIAL_POSITION, "long time position change", 2, 2),
    RuleEntry(Category.SPATIAL_POSITION, "relative position", 1, 3),
    RuleEntry(Category.MOVEMENT, "concrete movement", 1, 1),
    RuleEntry(Category.MOVEMENT, "generalized behavior", 2, 2),
    RuleEntry(Category.MOVEMENT, "movement tendency", 2, 2),
    RuleEntry(Category.MOVEMENT, "social behavior", 2, 2),
    RuleEntry(Category.MOVEMENT, "multi-person associated action", 2, 2),
    RuleEntry(Category.MOVEMENT, "action modifier", 1, 1),
    RuleEntry(Category.COSTUME, "color", 1, 2),
    RuleEntry(Category.COSTUME, "style", 1, 2),
    RuleEntry(Category.COSTUME, "modifier", 2, 3),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "gender", 1, 1),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "age", 1, 1),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "manner", 1, 1),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "appearance", 1, 1),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "figure", 1, 1),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "personality", 1, 3),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "mental activity", 1, 3),
    RuleEntry(Category.HUMAN_ATTRIBUTE, "mood", 1, 3),
    RuleEntry(Category.OBJECT_USAGE, "-", 1, 1),
    RuleEntry(Category.OBJECT_APPEARANCE, "color", 1, 2),
    RuleEntry(Category.OBJECT_APPEARANCE, "size", 1, 1),
    RuleEntry(Category.SPECIFIC_NOUN, "direct description", 1, 1),
    RuleEntry(Category.SPECIFIC_NOUN, "figurative description", 2, 2),
    RuleEntry(Category.AUXILIARY_MODIFIER, "adjective", 1, 1),
    RuleEntry(Category.AUXILIARY_MODIFIER, "adverb", 1, 1),
    RuleEntry(Category.AUXILIARY_MODIFIER, "time determiner", 1, 2),
    RuleEntry(Category.OTHERS, "interrelation", 2, 3),
    RuleEntry(Category.OTHERS, "aim", 2, 4),
    RuleEntry(Category.OTHERS, "common sense interpretation", 1, 3),
    RuleEntry(Category.OTHERS, "event trend words", 2, 3),
)

_RULE_INDEX: dict[tuple[Category, str], RuleEntry] = {
    (r.category, r.detailed): r for r in _RULES
}


def rulebook() -> tuple[RuleEntry, ...]:
    """The full attribute scoring table: (category, detailed, min, max) per attribute."""
    return _RULES


def lookup_rule(category: Category, detailed: str) -> RuleEntry | None:
    return _RULE_INDEX.get((category, detailed))


def parse_category(name: str) -> Category:
    """Accept 'SpatialPosition', 'spatial position', 'SPATIAL_POSITION', etc."""
    normalized = "".join(ch for ch in name.casefold() if ch.isalnum())
    for cat in Category:
        if "".join(ch for ch in cat.value.casefold() if ch.isalnum()) == normalized:
            return cat
    raise ValidationError(f"unknown attribute category {name!r}")


@dataclass(frozen=True)
class AttributeTag:
    """One scored attribute of an instruction; must name a rulebook entry and
    carry a score inside that entry's allowed range."""

    category: Category
    detailed: str
    score: int

    def __post_init__(self) -> None:
        rule = lookup_rule(self.category, self.detailed)
        if rule is None:
            raise ValidationError(
                f"unknown attribute ({self.category.value}, {self.detailed!r})"
            )
        if not (rule.min_score <= self.score <= rule.max_score):
            raise ValidationError(
                f"score {self.score} out of range {rule.min_score}-{rule.max_score} "
                f"for attribute ({self.category.value}, {self.detailed!r})"
            )


def level_for_total(total: int) -> Level:
    if total <= 0:
        raise ValidationError(f"difficulty total must be positive, got {total}")
    if total == 1:
        return Level.EASY
    if total == 2:
        return Level.MEDIUM
    return Level.HARD


@dataclass(frozen=True)
class DifficultyResult:
    total: int
    level: Level


def score(tags: list[AttributeTag] | tuple[AttributeTag, ...]) -> DifficultyResult:
    """Sum attribute scores; total 1 -> easy, 2 -> medium, 3+ -> hard.

    Duplicate (category, detailed) keys are rejected; distinct detailed
    attributes from the same category are fine.
    """
    if not tags:
        raise ValidationError("an instruction needs at least one attribute tag")
    seen: set[tuple[Category, str]] = set()
    for tag in tags:
        key = (tag.category, tag.detailed)
        if key in seen:
            raise ValidationError(
                f"duplicate attribute ({tag.category.value}, {tag.detailed!r})"
            )
        seen.add(key)
    total = sum(tag.score for tag in tags)
    return DifficultyResult(total, level_for_total(total))


@dataclass(frozen=True)
class TaskAttributes:
    task_id: str
    tags: tuple[AttributeTag, ...]


def parse_attribute_annotations(text: str) -> list[TaskAttributes]:
    """One JSON object per line: {"task_id": ..., "tags": [{"category", "detailed", "score"}]}."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}", line=lineno) from exc
        if not isinstance(obj, dict) or "task_id" not in obj or "tags" not in obj:
            raise ParseError("expected object with 'task_id' and 'tags'", line=lineno)
        tags = []
        for entry in obj["tags"]:
            try:
                tags.append(
                    AttributeTag(parse_category(str(entry["category"])), str(entry["detailed"]), int(entry["score"]))
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"malformed tag {entry!r}", line=lineno) from exc
            except ValidationError as exc:
                raise ParseError(str(exc), line=lineno) from exc
        out.append(TaskAttributes(str(obj["task_id"]), tuple(tags)))
    return out


def format_attribute_annotations(annotations: list[TaskAttributes]) -> str:
    lines = []
    for ann in annotations:
        lines.append(
            json.dumps(
                {
                    "task_id": ann.task_id,
                    "tags": [
                        {"category": t.category.value, "detailed": t.detailed, "score": t.score}
                        for t in ann.tags
                    ],
                }
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
