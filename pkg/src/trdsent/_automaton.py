"""Multi-pattern automaton: trie + failure links compiled to a dense DFA.

The scan kernels (compiled and pure-Python) share this table layout:

* ``remap`` maps a codepoint to a character class; class 0 is "any character
  that appears in no pattern" and always transitions to the root.
* ``delta`` is a flat ``n_states x n_classes`` table of next states.
* ``out_start``/``out_len`` give, per state, the lengths of every pattern
  ending at that state (CSR layout), failure closure already applied.

A hit of length L reported at position i means ``text[i+1-L : i+1]`` equals a
pattern exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_BMP = 0x10000


@dataclass(frozen=True)
class CompiledAutomaton:
    n_states: int
    n_classes: int
    delta: np.ndarray  # uint32, flat, n_states * n_classes
    remap_bmp: np.ndarray  # uint16, one slot per BMP codepoint
    out_start: np.ndarray  # int32, n_states + 1
    out_len: np.ndarray  # int32, pattern lengths, CSR by state
    # plain-Python mirrors for the fallback kernel (ndarray scalar reads are slow)
    delta_list: list
    remap_ascii: list
    remap_other: dict
    out_tuple: tuple
    bmp_only: bool  # False when some pattern contains an astral codepoint
    max_pattern_len: int


def build_automaton(patterns: Iterable[str]) -> CompiledAutomaton:
    pats: list[str] = sorted(set(patterns))
    if not pats:
        raise ValueError("no patterns")
    if any(not p for p in pats):
        raise ValueError("empty pattern")

    alphabet = sorted({ch for p in pats for ch in p})
    cls_of = {ch: i + 1 for i, ch in enumerate(alphabet)}
    n_classes = len(alphabet) + 1
    bmp_only = all(ord(ch) < _BMP for ch in alphabet)

    # trie
    children: list[dict[int, int]] = [{}]
    out: list[list[int]] = [[]]
    for p in pats:
        state = 0
        for ch in p:
            c = cls_of[ch]
            nxt = children[state].get(c)
            if nxt is None:
                nxt = len(children)
                children.append({})
                out.append([])
                children[state][c] = nxt
            state = nxt
        out[state].append(len(p))

    n_states = len(children)
    delta = np.zeros(n_states * n_classes, dtype=np.uint32)
    fail = [0] * n_states

    queue: deque[int] = deque()
    for c in range(n_classes):
        child = children[0].get(c, 0)
        delta[c] = child
        if child:
            fail[child] = 0
            queue.append(child)
    while queue:
        s = queue.popleft()
        out[s] = out[s] + out[fail[s]]
        base = s * n_classes
        fbase = fail[s] * n_classes
        for c in range(n_classes):
            child = children[s].get(c)
            if child is None:
                delta[base + c] = delta[fbase + c]
            else:
                delta[base + c] = child
                fail[child] = int(delta[fbase + c])
                queue.append(child)

    remap_bmp = np.zeros(_BMP, dtype=np.uint16)
    remap_ascii = [0] * 128
    remap_other: dict[int, int] = {}
    for ch, c in cls_of.items():
        o = ord(ch)
        if o < _BMP:
            remap_bmp[o] = c
        if o < 128:
            remap_ascii[o] = c
        else:
            remap_other[o] = c

    out_start = np.zeros(n_states + 1, dtype=np.int32)
    flat: list[int] = []
    for s in range(n_states):
        out_start[s] = len(flat)
        flat.extend(sorted(out[s], reverse=True))
    out_start[n_states] = len(flat)

    return CompiledAutomaton(
        n_states=n_states,
        n_classes=n_classes,
        delta=delta,
        remap_bmp=remap_bmp,
        out_start=out_start,
        out_len=np.asarray(flat, dtype=np.int32),
        delta_list=delta.tolist(),
        remap_ascii=remap_ascii,
        remap_other=remap_other,
        out_tuple=tuple(tuple(sorted(o, reverse=True)) for o in out),
        bmp_only=bmp_only,
        max_pattern_len=max(len(p) for p in pats),
    )


def verify_hits(patterns: Sequence[str], text: str, hits: Sequence[tuple[int, int]]) -> bool:
    """Debug helper: every reported span must reproduce a pattern."""
    pset = set(patterns)
    return all(text[a:b] in pset for a, b in hits)
