"""Hot numeric kernels.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature. The numba path is used when numba imports and the
``PFCA_DISABLE_NUMBA`` environment variable is unset or ``0``; the numpy path
otherwise. Both are always importable so they can be compared directly.

Bitsets are ``uint64`` rows: bit ``i`` of word ``i // 64`` is object ``i``.
"""

import math
import os

import numpy as np

_DISABLED = os.environ.get("PFCA_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by PFCA_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def pack_columns(mask):
    """Pack a boolean ``(n_objects, n_cols)`` matrix into ``(n_cols, n_words)`` bitsets."""
    mask = np.asarray(mask, dtype=bool)
    n_obj, n_cols = mask.shape
    n_words = max(1, (n_obj + 63) // 64)
    padded = np.zeros((n_cols, n_words * 64), dtype=np.uint8)
    padded[:, :n_obj] = mask.T
    # little-endian bit order within each byte, bytes little-endian within a word
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed.view("<u8").astype(np.uint64))


def full_bitset(n_objects):
    n_words = max(1, (n_objects + 63) // 64)
    bits = np.zeros(n_words, dtype=np.uint64)
    for i in range(n_objects // 64):
        bits[i] = np.uint64(0xFFFFFFFFFFFFFFFF)
    rem = n_objects % 64
    if rem:
        bits[n_objects // 64] = np.uint64((1 << rem) - 1)
    return bits


def bitset_to_indices(bits, n_objects):
    as_bytes = np.ascontiguousarray(bits, dtype=np.uint64).view(np.uint8)
    flags = np.unpackbits(as_bytes, bitorder="little")[:n_objects]
    return np.flatnonzero(flags)


# ---------------------------------------------------------------- numpy path


def _popcount_rows_np(words):
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def extension_counts_np(ext, ext_concl, cols):
    """Support of ``premise + l`` and ``premise + l + conclusion`` for every literal column ``l``."""
    n_prem = _popcount_rows_np(cols & ext)
    n_both = _popcount_rows_np(cols & ext_concl)
    return n_prem, n_both


def popcount_np(bits):
    return int(np.bitwise_count(bits).sum(dtype=np.int64))


def _log_ratio_terms(lo, hi, row1, col1, total):
    # log hypergeometric weights relative to w(lo) = 0, via the term ratio recurrence
    k = np.arange(lo, hi, dtype=np.float64)
    num = (row1 - k) * (col1 - k)
    den = (k + 1.0) * (total - row1 - col1 + k + 1.0)
    steps = np.log(num) - np.log(den)
    out = np.empty(hi - lo + 1, dtype=np.float64)
    out[0] = 0.0
    np.cumsum(steps, out=out[1:])
    return out


def fisher_log_greater_np(n11, n10, n01, n00):
    """log P(X >= n11) under the hypergeometric null with fixed margins."""
    row1 = n11 + n10
    col1 = n11 + n01
    total = n11 + n10 + n01 + n00
    lo = max(0, row1 + col1 - total)
    hi = min(row1, col1)
    if n11 <= lo:
        return 0.0
    logw = _log_ratio_terms(lo, hi, row1, col1, total)
    peak = logw.max()
    all_sum = np.exp(logw - peak).sum()
    tail = logw[n11 - lo:]
    tail_peak = tail.max()
    tail_sum = np.exp(tail - tail_peak).sum()
    value = (tail_peak + math.log(tail_sum)) - (peak + math.log(all_sum))
    return min(0.0, value)


def fisher_log_greater_batch_np(n11, n10, n01, n00):
    out = np.empty(len(n11), dtype=np.float64)
    for i in range(len(n11)):
        out[i] = fisher_log_greater_np(int(n11[i]), int(n10[i]), int(n01[i]), int(n00[i]))
    return out


def fisher_expand_np(ext, ext_concl, cols, blocked, n_p, n_b, log_alpha):
    """Admissible one-literal refinements of a premise extent.

    A literal is admissible when it is not blocked, keeps support, strictly
    raises the conclusion rate, and its one-sided Fisher log p-value is below
    ``log_alpha``. Returns ``(literals, log p, child support, child support
    with conclusion)`` sorted by (log p, literal), keeping only the first
    literal for each distinct child extent.
    """
    c_prem, c_both = extension_counts_np(ext, ext_concl, cols)
    ok = (~blocked) & (c_prem > 0) & (c_both * n_p > n_b * c_prem)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, np.empty(0, dtype=np.float64), empty, empty
    # the table depends only on (c_prem, c_both) within a node: test each pair once
    pairs, inverse = np.unique(np.stack([c_prem[idx], c_both[idx]], axis=1), axis=0, return_inverse=True)
    n11 = pairs[:, 1]
    n01 = n_b - n11
    logp = fisher_log_greater_batch_np(n11, pairs[:, 0] - n11, n01, (n_p - pairs[:, 0]) - n01)[inverse.ravel()]
    keep = logp < log_alpha
    idx, logp = idx[keep], logp[keep]
    order = np.lexsort((idx, logp))
    idx, logp = idx[order], logp[order]
    if idx.size:
        children = cols[idx] & ext
        _, first = np.unique(children, axis=0, return_index=True)
        first = np.sort(first)
        idx, logp = idx[first], logp[first]
    return idx.astype(np.int64), logp, c_prem[idx], c_both[idx]


def upsilon_scores_np(in_l, rule_ptr, rule_lits, rule_concl, rule_gamma):
    """Int(L) together with the per-literal add/remove deltas.

    Returns ``(int_value, delta_plus, delta_minus, predicted)`` where
    ``delta_plus[g]`` is Int(L + g) - Int(L) for g not in L, ``delta_minus[g]``
    is Int(L - g) - Int(L) for g in L, and ``predicted[g]`` marks conclusions
    of rules whose premise already holds in L.
    """
    n_lit = in_l.shape[0]
    n_rules = rule_concl.shape[0]
    lengths = np.diff(rule_ptr)
    owner = np.repeat(np.arange(n_rules), lengths)
    absent = ~in_l[rule_lits]
    missing = np.bincount(owner, weights=absent, minlength=n_rules).astype(np.int64)

    concl_in = in_l[rule_concl]
    concl_neg_in = in_l[rule_concl ^ 1]
    status = np.where(concl_in, 1.0, np.where(concl_neg_in, -1.0, 0.0))
    signed = status * rule_gamma

    firing = missing == 0
    int_value = float(signed[firing].sum())

    delta_minus = np.zeros(n_lit, dtype=np.float64)
    delta_plus = np.zeros(n_lit, dtype=np.float64)

    # premise literals of firing rules: dropping one un-fires the rule
    fire_entries = firing[owner]
    delta_minus -= np.bincount(rule_lits[fire_entries], weights=signed[owner[fire_entries]], minlength=n_lit)
    # conclusions of firing rules: dropping a confirmed conclusion loses gamma,
    # dropping the negation of a refuted conclusion removes the penalty
    fc = rule_concl[firing]
    fg = rule_gamma[firing]
    fin = concl_in[firing]
    fneg = concl_neg_in[firing]
    delta_minus -= np.bincount(fc[fin], weights=fg[fin], minlength=n_lit)
    delta_minus += np.bincount(fc[fneg] ^ 1, weights=fg[fneg], minlength=n_lit)
    # additions: undecided conclusions of firing rules
    open_ = ~fin & ~fneg
    delta_plus += np.bincount(fc[open_], weights=fg[open_], minlength=n_lit)
    delta_plus -= np.bincount(fc[open_] ^ 1, weights=fg[open_], minlength=n_lit)
    predicted = np.zeros(n_lit, dtype=np.bool_)
    predicted[fc] = True
    # rules one literal short: adding that literal makes them fire
    near = (missing == 1)[owner] & absent
    delta_plus += np.bincount(rule_lits[near], weights=signed[owner[near]], minlength=n_lit)
    return int_value, delta_plus, delta_minus, predicted


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _popcount64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @njit(cache=True, nogil=True)
    def extension_counts_nb(ext, ext_concl, cols):
        n_cols, n_words = cols.shape
        n_prem = np.zeros(n_cols, dtype=np.int64)
        n_both = np.zeros(n_cols, dtype=np.int64)
        for j in range(n_cols):
            a = 0
            b = 0
            for w in range(n_words):
                c = cols[j, w]
                a += _popcount64(c & ext[w])
                b += _popcount64(c & ext_concl[w])
            n_prem[j] = a
            n_both[j] = b
        return n_prem, n_both

    @njit(cache=True, nogil=True)
    def popcount_nb(bits):
        total = 0
        for w in range(bits.shape[0]):
            total += _popcount64(bits[w])
        return total

    @njit(cache=True, nogil=True)
    def fisher_log_greater_nb(n11, n10, n01, n00):
        row1 = n11 + n10
        col1 = n11 + n01
        total = n11 + n10 + n01 + n00
        lo = max(0, row1 + col1 - total)
        hi = min(row1, col1)
        if n11 <= lo:
            return 0.0
        size = hi - lo + 1
        logw = np.empty(size, dtype=np.float64)
        logw[0] = 0.0
        for i in range(1, size):
            k = float(lo + i - 1)
            num = (row1 - k) * (col1 - k)
            den = (k + 1.0) * (total - row1 - col1 + k + 1.0)
            logw[i] = logw[i - 1] + (math.log(num) - math.log(den))
        peak = logw[0]
        for i in range(size):
            if logw[i] > peak:
                peak = logw[i]
        start = n11 - lo
        tail_peak = logw[start]
        for i in range(start, size):
            if logw[i] > tail_peak:
                tail_peak = logw[i]
        all_sum = 0.0
        tail_sum = 0.0
        for i in range(size):
            all_sum += math.exp(logw[i] - peak)
        for i in range(start, size):
            tail_sum += math.exp(logw[i] - tail_peak)
        value = (tail_peak + math.log(tail_sum)) - (peak + math.log(all_sum))
        return min(0.0, value)

    @njit(cache=True, nogil=True)
    def fisher_log_greater_batch_nb(n11, n10, n01, n00):
        out = np.empty(n11.shape[0], dtype=np.float64)
        for i in range(n11.shape[0]):
            out[i] = fisher_log_greater_nb(n11[i], n10[i], n01[i], n00[i])
        return out


    @njit(cache=True, nogil=True)
    def fisher_expand_nb(ext, ext_concl, cols, blocked, n_p, n_b, log_alpha):
        n_cols, n_words = cols.shape
        c_prem, c_both = extension_counts_nb(ext, ext_concl, cols)
        cand = np.empty(n_cols, dtype=np.int64)
        m = 0
        for j in range(n_cols):
            if blocked[j] or c_prem[j] == 0 or not c_both[j] * n_p > n_b * c_prem[j]:
                continue
            cand[m] = j
            m += 1
        cand = cand[:m]
        # the table depends only on (c_prem, c_both) within a node: test each pair once
        keys = np.empty(m, dtype=np.int64)
        for i in range(m):
            keys[i] = c_prem[cand[i]] * (n_p + 1) + c_both[cand[i]]
        order = np.argsort(keys, kind="mergesort")
        cand_lp = np.empty(m, dtype=np.float64)
        last = -1
        lp = 0.0
        for i in range(m):
            j = cand[order[i]]
            if keys[order[i]] != last:
                last = keys[order[i]]
                n11 = c_both[j]
                n01 = n_b - n11
                lp = fisher_log_greater_nb(n11, c_prem[j] - n11, n01, (n_p - c_prem[j]) - n01)
            cand_lp[order[i]] = lp
        lits = np.empty(m, dtype=np.int64)
        logp = np.empty(m, dtype=np.float64)
        k = 0
        for i in range(m):
            if cand_lp[i] < log_alpha:
                lits[k] = cand[i]
                logp[k] = cand_lp[i]
                k += 1
        lits = lits[:k]
        logp = logp[:k]
        # stable sort by log p; literal codes are already ascending
        order = np.argsort(logp, kind="mergesort")
        lits = lits[order]
        logp = logp[order]
        keep = np.zeros(k, dtype=np.bool_)
        hashes = np.empty(k, dtype=np.uint64)
        for i in range(k):
            h = np.uint64(1469598103934665603)
            for w in range(n_words):
                h = (h ^ (cols[lits[i], w] & ext[w])) * np.uint64(1099511628211)
            hashes[i] = h
            dup = False
            for j in range(i):
                if keep[j] and hashes[j] == h:
                    same = True
                    for w in range(n_words):
                        if (cols[lits[i], w] & ext[w]) != (cols[lits[j], w] & ext[w]):
                            same = False
                            break
                    if same:
                        dup = True
                        break
            keep[i] = not dup
        sel = np.flatnonzero(keep)
        lits = lits[sel]
        return lits, logp[sel], c_prem[lits], c_both[lits]

    @njit(cache=True, nogil=True)
    def upsilon_scores_nb(in_l, rule_ptr, rule_lits, rule_concl, rule_gamma):
        n_lit = in_l.shape[0]
        n_rules = rule_concl.shape[0]
        delta_plus = np.zeros(n_lit, dtype=np.float64)
        delta_minus = np.zeros(n_lit, dtype=np.float64)
        predicted = np.zeros(n_lit, dtype=np.bool_)
        int_value = 0.0
        for r in range(n_rules):
            missing = 0
            gap = -1
            for e in range(rule_ptr[r], rule_ptr[r + 1]):
                if not in_l[rule_lits[e]]:
                    missing += 1
                    gap = rule_lits[e]
                    if missing > 1:
                        break
            if missing > 1:
                continue
            c = rule_concl[r]
            g = rule_gamma[r]
            if in_l[c]:
                signed = g
            elif in_l[c ^ 1]:
                signed = -g
            else:
                signed = 0.0
            if missing == 1:
                delta_plus[gap] += signed
                continue
            int_value += signed
            for e in range(rule_ptr[r], rule_ptr[r + 1]):
                delta_minus[rule_lits[e]] -= signed
            predicted[c] = True
            if in_l[c]:
                delta_minus[c] -= g
            elif in_l[c ^ 1]:
                delta_minus[c ^ 1] += g
            else:
                delta_plus[c] += g
                delta_plus[c ^ 1] -= g
        return int_value, delta_plus, delta_minus, predicted


if HAVE_NUMBA:
    extension_counts = extension_counts_nb
    popcount = popcount_nb
    fisher_log_greater = fisher_log_greater_nb
    fisher_log_greater_batch = fisher_log_greater_batch_nb
    upsilon_scores = upsilon_scores_nb
    fisher_expand = fisher_expand_nb
else:
    extension_counts = extension_counts_np
    popcount = popcount_np
    fisher_log_greater = fisher_log_greater_np
    fisher_log_greater_batch = fisher_log_greater_batch_np
    upsilon_scores = upsilon_scores_np
    fisher_expand = fisher_expand_np
