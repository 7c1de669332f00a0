# cython: language_level=3
"""Compiled scan kernel: dense-DFA walk over the text, one table read per char.

Contract matches _scan_py.find_hits; the matcher picks whichever is importable.
"""

import cython


@cython.boundscheck(False)
@cython.wraparound(False)
def find_hits_tables(unicode text,
                     unsigned int[::1] delta,
                     unsigned short[::1] remap_bmp,
                     int n_classes,
                     int[::1] out_start,
                     int[::1] out_len):
    cdef Py_ssize_t i, n = len(text)
    cdef unsigned int state = 0
    cdef Py_UCS4 ch
    cdef int cls, j, a, b
    cdef Py_ssize_t end
    hits = []
    for i in range(n):
        ch = text[i]
        if ch < 0x10000:
            cls = remap_bmp[<int> ch]
        else:
            cls = 0
        state = delta[state * n_classes + cls]
        a = out_start[state]
        b = out_start[state + 1]
        if a != b:
            end = i + 1
            for j in range(a, b):
                hits.append((end - out_len[j], end))
    return hits


def find_hits(text, auto):
    """Adapter taking a CompiledAutomaton, like the pure-Python kernel."""
    return find_hits_tables(
        text, auto.delta, auto.remap_bmp, auto.n_classes, auto.out_start, auto.out_len
    )
