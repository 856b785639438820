"""Extraction of the lowest NP, VP, and PP constituents from a tree.

Nested phrases of one type collapse to the innermost: a node is kept
only if no descendant carries the same label.  "She wants to eat pie."
therefore contributes a single VP, "eat pie", even though three VP
nodes sit above one another in the parse.
"""

from __future__ import annotations

from dataclasses import dataclass

from .treebank import ConstituencyTree, iter_nodes

PHRASE_TYPES = ("NP", "VP", "PP")


@dataclass(frozen=True)
class PhraseSpan:
    phrase_type: str
    start: int
    end: int
    text: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class PhraseGroups:
    np: tuple[PhraseSpan, ...]
    vp: tuple[PhraseSpan, ...]
    pp: tuple[PhraseSpan, ...]

    def items(self) -> list[tuple[str, tuple[PhraseSpan, ...]]]:
        return [("NP", self.np), ("VP", self.vp), ("PP", self.pp)]


def extract_phrases(tree: ConstituencyTree) -> PhraseGroups:
    """Collect phrases per type, innermost only, in document order."""
    order = list(iter_nodes(tree.root))
    # labels of interest present in each node's subtree; reversed
    # pre-order sees every child before its parent
    present: dict[int, frozenset[str]] = {}
    kept: dict[str, list[PhraseSpan]] = {t: [] for t in PHRASE_TYPES}
    for node in reversed(order):
        below: frozenset[str] = frozenset()
        for child in node.children:
            below |= present[id(child)]
        if node.label in PHRASE_TYPES:
            if node.label not in below:
                text = " ".join(tree.tokens[node.start:node.end])
                kept[node.label].append(
                    PhraseSpan(node.label, node.start, node.end, text)
                )
            below |= {node.label}
        present[id(node)] = below
    # kept spans of one type never overlap, so reversing the
    # reversed-pre-order pass restores document order
    return PhraseGroups(
        np=tuple(reversed(kept["NP"])),
        vp=tuple(reversed(kept["VP"])),
        pp=tuple(reversed(kept["PP"])),
    )


def eligible_groups(
    groups: PhraseGroups, min_size: int = 2
) -> list[tuple[str, tuple[PhraseSpan, ...]]]:
    """Phrase groups large enough to pose a choice task, NP/VP/PP order."""
    if min_size < 1:
        raise ValueError(f"min_size must be at least 1, got {min_size}")
    return [(kind, spans) for kind, spans in groups.items() if len(spans) >= min_size]
