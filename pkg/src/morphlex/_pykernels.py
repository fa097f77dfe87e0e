"""Pure-Python kernels. Same signatures and results as ``_ckernels``."""

import numpy as np

NAME = "python"


def substring_counts(patterns, texts, exclude_self=True):
    """For each pattern, count texts containing it as a contiguous substring.

    A text is counted once however often the pattern recurs in it. With
    ``exclude_self`` a text identical to the pattern does not count.
    """
    index = {p: i for i, p in enumerate(patterns)}
    counts = [0] * len(patterns)
    if not index:
        return np.zeros(0, dtype=np.int64)
    maxlen = max(len(p) for p in patterns)
    for text in texts:
        n = len(text)
        subs = {text[i:j] for i in range(n) for j in range(i + 1, min(n, i + maxlen) + 1)}
        if exclude_self:
            subs.discard(text)
        for s in subs:
            k = index.get(s)
            if k is not None:
                counts[k] += 1
    return np.asarray(counts, dtype=np.int64)


def build_lattice(tokens, index, whitelist):
    """Segment lattice of every token over the pool.

    Edge ``(start, end, part)`` means ``token[start:end]`` is pool member
    ``part``. The whole-token edge is omitted and single characters are kept
    only when whitelisted. Edges of each token are ordered by (end, start).
    Returns CSR arrays ``offsets, starts, ends, parts``.
    """
    maxlen = max((len(t) for t in tokens), default=0)
    offsets = [0]
    starts, ends, parts = [], [], []
    for token in tokens:
        n = len(token)
        for j in range(1, n + 1):
            for i in range(max(0, j - maxlen), j):
                if i == 0 and j == n:
                    continue
                seg = token[i:j]
                if j - i == 1 and seg not in whitelist:
                    continue
                p = index.get(seg)
                if p is not None:
                    starts.append(i)
                    ends.append(j)
                    parts.append(p)
        offsets.append(len(parts))
    return (np.asarray(offsets, dtype=np.int64), np.asarray(starts, dtype=np.int32),
            np.asarray(ends, dtype=np.int32), np.asarray(parts, dtype=np.int32))


def bep_all(scores, lengths, offsets, starts, ends, parts):
    """Best decomposition score of every token given per-token scores.

    Returns ``(bep, found)``; ``bep`` is 0 where no full segmentation exists.
    """
    scores_l = scores.tolist()
    lengths_l = lengths.tolist()
    offsets_l = offsets.tolist()
    starts_l, ends_l, parts_l = starts.tolist(), ends.tolist(), parts.tolist()
    ntok = len(lengths_l)
    bep = [0.0] * ntok
    found = [False] * ntok
    neg = float("-inf")
    for t in range(ntok):
        lo, hi = offsets_l[t], offsets_l[t + 1]
        if lo == hi:
            continue
        n = lengths_l[t]
        best = [neg] * (n + 1)
        best[0] = 0.0
        for e in range(lo, hi):
            b = best[starts_l[e]]
            if b == neg:
                continue
            v = b + scores_l[parts_l[e]]
            j = ends_l[e]
            if v > best[j]:
                best[j] = v
        if best[n] != neg:
            bep[t] = best[n]
            found[t] = True
    return np.asarray(bep, dtype=np.float64), np.asarray(found, dtype=bool)
