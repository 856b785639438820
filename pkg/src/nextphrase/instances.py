"""Construction of training instances from parsed or plain sentences.

Three record kinds come out of this module:

* next-phrase instances: a sentence prefix plus a lettered list of
  candidate phrases, one of which really continues the prefix;
* next-sentence instances: same shape, but the choices are whole
  sentences and the context is the previous sentence of a document;
* completion pairs: every (prefix, remainder) cut of a sentence.

All random decisions flow through a caller-supplied Random so a
(global seed, sentence id) pair pins every record exactly.
"""

from __future__ import annotations

import enum
import hashlib
import random
import re
import string
from dataclasses import dataclass
from typing import Sequence

from .corpus import detokenize
from .phrases import PhraseGroups, eligible_groups
from .treebank import ConstituencyTree

NPP_PREFIX = "generate next phrase:"
NSP_PREFIX = "generate next sentence:"

# literal backslash-n, the usual single-line separator of lettered QA
# encodings; a real newline would not survive line-oriented files
_SEPARATOR = " \\n "

TEMPLATES = ("lettered",)


class MoreChoicesThanLetters(ValueError):
    """The lettered template runs out at 26 options."""


class SkipReason(enum.Enum):
    NO_ELIGIBLE_GROUP = "no_eligible_group"
    ANSWER_AT_SENTENCE_START = "answer_at_sentence_start"
    POOL_TOO_SMALL = "pool_too_small"


@dataclass(frozen=True)
class Skip:
    reason: SkipReason


@dataclass(frozen=True)
class NppInstance:
    sentence_id: str
    phrase_type: str
    partial_query: tuple[str, ...]
    choices: tuple[str, ...]
    answer: str
    answer_index: int


@dataclass(frozen=True)
class NspInstance:
    sentence_id: str
    context: str
    choices: tuple[str, ...]
    answer: str
    answer_index: int


@dataclass(frozen=True)
class CompletionPair:
    sentence_id: str
    split_point: int
    p: tuple[str, ...]
    q: tuple[str, ...]


def record_rng(global_seed: int, sentence_id: str) -> random.Random:
    """Random stream for one record, stable across runs and workers."""
    digest = hashlib.sha256(f"{global_seed}:{sentence_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _shuffled(items: Sequence, rng: random.Random) -> tuple[list, list[int]]:
    order = list(range(len(items)))
    rng.shuffle(order)
    return [items[i] for i in order], order


def build_npp_instance(
    tree: ConstituencyTree,
    groups: PhraseGroups,
    rng: random.Random,
    sentence_id: str = "",
    min_size: int = 2,
) -> NppInstance | Skip:
    """Pick a phrase group, an answer phrase, and a shuffled choice list.

    The answer may not start the sentence (the prefix would be empty),
    but sentence-initial phrases still appear among the choices.
    """
    eligible = eligible_groups(groups, min_size)
    if not eligible:
        return Skip(SkipReason.NO_ELIGIBLE_GROUP)
    phrase_type, spans = eligible[rng.randrange(len(eligible))]
    candidates = [s for s in spans if s.start != 0]
    if not candidates:
        return Skip(SkipReason.ANSWER_AT_SENTENCE_START)
    answer_span = candidates[rng.randrange(len(candidates))]
    shuffled, order = _shuffled(spans, rng)
    answer_index = order.index(spans.index(answer_span))
    return NppInstance(
        sentence_id=sentence_id,
        phrase_type=phrase_type,
        partial_query=tree.tokens[:answer_span.start],
        choices=tuple(s.text for s in shuffled),
        answer=answer_span.text,
        answer_index=answer_index,
    )


def build_completion_pairs(
    tokens: Sequence[str], sentence_id: str = ""
) -> list[CompletionPair]:
    """All n-1 prefix/remainder cuts of a tokenized sentence."""
    return [
        CompletionPair(sentence_id, k, tuple(tokens[:k]), tuple(tokens[k:]))
        for k in range(1, len(tokens))
    ]


def build_nsp_instance(
    sentences: Sequence[str],
    index: int,
    pool: Sequence[str],
    rng: random.Random,
    sentence_id: str = "",
    num_distractors: int = 1,
) -> NspInstance | Skip:
    """Choice task: which sentence follows sentences[index]?

    ``pool`` must hold sentences from other documents only; distractors
    are drawn from it without replacement.
    """
    if index < 0 or index + 1 >= len(sentences):
        raise IndexError(f"no sentence follows index {index}")
    if num_distractors < 1:
        raise ValueError("need at least one distractor")
    if len(pool) < num_distractors:
        return Skip(SkipReason.POOL_TOO_SMALL)
    context = sentences[index]
    answer = sentences[index + 1]
    distractors = rng.sample(list(pool), num_distractors)
    raw = [answer] + distractors
    shuffled, order = _shuffled(raw, rng)
    return NspInstance(
        sentence_id=sentence_id,
        context=context,
        choices=tuple(shuffled),
        answer=answer,
        answer_index=order.index(0),
    )


def render_prompt(prefix: str, query: str, choices: Sequence[str]) -> str:
    """``<prefix> <query> \\n (A) ... (B) ...`` with single spaces."""
    if len(choices) > len(string.ascii_uppercase):
        raise MoreChoicesThanLetters(f"{len(choices)} choices exceed A-Z")
    lettered = " ".join(
        f"({letter}) {text}"
        for letter, text in zip(string.ascii_uppercase, choices)
    )
    return f"{prefix} {query}{_SEPARATOR}{lettered}"


def parse_prompt(prompt: str) -> tuple[str, str, list[str]]:
    """Inverse of render_prompt: (prefix, query, choices)."""
    head, sep, options = prompt.partition(_SEPARATOR)
    if not sep:
        raise ValueError("prompt has no choice separator")
    match = re.match(r"(.*?:) (.*)", head)
    if not match:
        raise ValueError("prompt has no task prefix")
    prefix, query = match.group(1), match.group(2)
    choices: list[str] = []
    if not options.startswith("(A) "):
        raise ValueError("choices do not start at (A)")
    at = 4
    for pos in range(1, len(string.ascii_uppercase) + 1):
        marker = f" ({string.ascii_uppercase[pos]}) " if pos < 26 else None
        cut = options.find(marker, at) if marker else -1
        if cut < 0:
            choices.append(options[at:])
            break
        choices.append(options[at:cut])
        at = cut + len(marker)
    return prefix, query, choices


def serialize_npp(instance: NppInstance) -> tuple[str, str]:
    """(prompt, target) pair for a next-phrase instance."""
    prompt = render_prompt(
        NPP_PREFIX, detokenize(instance.partial_query), instance.choices
    )
    return prompt, instance.answer


def serialize_nsp(instance: NspInstance) -> tuple[str, str]:
    prompt = render_prompt(NSP_PREFIX, instance.context, instance.choices)
    return prompt, instance.answer
