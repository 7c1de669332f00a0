"""Pure-Python scan kernel; same contract as the compiled one in _scan.pyx."""

from __future__ import annotations

from trdsent._automaton import CompiledAutomaton


def find_hits(text: str, auto: CompiledAutomaton) -> list[tuple[int, int]]:
    """All raw pattern occurrences in `text` as (start, end) spans."""
    delta = auto.delta_list
    k = auto.n_classes
    remap_ascii = auto.remap_ascii
    remap_other = auto.remap_other
    out = auto.out_tuple
    state = 0
    hits: list[tuple[int, int]] = []
    append = hits.append
    for i, ch in enumerate(text):
        o = ord(ch)
        cls = remap_ascii[o] if o < 128 else remap_other.get(o, 0)
        state = delta[state * k + cls]
        lens = out[state]
        if lens:
            end = i + 1
            for length in lens:
                append((end - length, end))
    return hits
