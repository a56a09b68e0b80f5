"""Fixed-point run kernels.

A value is stored as ``L`` little-endian limbs of ``LIMB_BITS`` bits held in
int64, scaled by ``2**(LIMB_BITS * frac)``.  All limbs except the top one lie
in ``[0, 2**LIMB_BITS)``; the top limb is signed and lies in
``[-2**(LIMB_BITS-1), 2**(LIMB_BITS-1))``.  With ``frac == 0`` the arithmetic
is exact integer arithmetic.

Operators are per-symbol CSR matrices padded to a common nnz:

    indptr  int64 (nsym, dim + 1)
    indices int64 (nsym, maxnnz)
    data    int64 (nsym, maxnnz, Lo)

Both implementations return ``(status, vector, max_dev, trace, steps)``; a
nonzero status means the state vector left the representable range after
``steps`` symbols and the caller must retry with more integer limbs.

Set ``AFA_DISABLE_NUMBA=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os

import numpy as np

LIMB_BITS = 26
BASE = 1 << LIMB_BITS
MASK = BASE - 1
HALF = BASE >> 1
# products of two limbs are < 2**52; this many fit in an int64 column sum
COLUMN_CAPACITY = 2000
# Limb products landing in columns below ``frac - 2`` are dropped: each is worth
# less than 2**-26 of a unit in the last place of the result.

OK = 0
OVERFLOW = 1

DISABLE_ENV = "AFA_DISABLE_NUMBA"


def _numba_wanted() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


try:  # pragma: no cover - import guard
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def run_numpy(indptr, indices, data, codes, v0, frac, record):
    nsym, dim1 = indptr.shape
    dim = dim1 - 1
    lo = data.shape[2]
    lv = v0.shape[1]
    width = lo + lv
    top = frac + lv - 1
    floor = max(0, frac - 2)

    plan = []
    for s in range(nsym):
        counts = np.diff(indptr[s])
        nnz = int(indptr[s, -1])
        filled = counts > 0
        plan.append((indices[s, :nnz], data[s, :nnz], filled, indptr[s, :-1][filled]))

    vec = v0.copy()
    trace = np.zeros((len(codes) + 1 if record else 0, dim, lv), dtype=np.int64)
    if record:
        trace[0] = vec
    max_dev = _deviation_numpy(vec, frac)

    for step in range(len(codes)):
        cols, vals, filled, starts = plan[codes[step]]
        gathered = vec[cols]
        acc = np.zeros((len(cols), width), dtype=np.int64)
        for i in range(lo):
            j0 = max(0, floor - i)
            acc[:, i + j0:i + lv] += vals[:, i:i + 1] * gathered[:, j0:]
        out = np.zeros((dim, width), dtype=np.int64)
        if len(starts):
            out[filled] = np.add.reduceat(acc, starts, axis=0)
        if frac > 0:
            out[:, frac - 1] += HALF
        carry = np.zeros(dim, dtype=np.int64)
        for m in range(width):
            c = out[:, m] + carry
            out[:, m] = c & MASK
            carry = c >> LIMB_BITS
        high = carry
        for m in range(width - 1, top, -1):
            high = high * BASE + out[:, m]
            if np.any((high != 0) & (high != -1)):
                return OVERFLOW, vec, max_dev, trace, step
        head = high * BASE + out[:, top]
        if np.any((head < -HALF) | (head >= HALF)):
            return OVERFLOW, vec, max_dev, trace, step
        vec = out[:, frac:frac + lv].copy()
        vec[:, -1] = head
        if record:
            trace[step + 1] = vec
        dev = _deviation_numpy(vec, frac)
        if dev > max_dev:
            max_dev = dev
    return OK, vec, max_dev, trace, len(codes)


def _deviation_numpy(vec, frac):
    """|sum of entries - 1| as a float."""
    lv = vec.shape[1]
    total = vec.sum(axis=0)
    total[frac] -= 1
    carry = 0
    limbs = [0] * lv
    for m in range(lv - 1):
        c = int(total[m]) + carry
        limbs[m] = c & MASK
        carry = c >> LIMB_BITS
    limbs[lv - 1] = int(total[lv - 1]) + carry
    value = 0.0
    for m in range(lv - 1, -1, -1):
        value = value * BASE + limbs[m]
    return abs(value) * 2.0 ** (-LIMB_BITS * frac)


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _deviation_numba(vec, frac):
        dim, lv = vec.shape
        total = np.zeros(lv, dtype=np.int64)
        for r in range(dim):
            for m in range(lv):
                total[m] += vec[r, m]
        total[frac] -= 1
        carry = 0
        for m in range(lv - 1):
            c = total[m] + carry
            total[m] = c & MASK
            carry = c >> LIMB_BITS
        total[lv - 1] += carry
        value = 0.0
        for m in range(lv - 1, -1, -1):
            value = value * BASE + total[m]
        return abs(value) * 2.0 ** (-LIMB_BITS * frac)

    @numba.njit(cache=True)
    def run_numba(indptr, indices, data, codes, v0, frac, record):
        dim = indptr.shape[1] - 1
        lo = data.shape[2]
        lv = v0.shape[1]
        width = lo + lv
        top = frac + lv - 1
        floor = max(0, frac - 2)

        vec = v0.copy()
        nxt = np.zeros_like(vec)
        live = np.zeros(dim, dtype=np.bool_)
        acc = np.zeros(width, dtype=np.int64)
        nsteps = len(codes)
        trace = np.zeros((nsteps + 1 if record else 0, dim, lv), dtype=np.int64)
        if record:
            trace[0] = vec
        max_dev = _deviation_numba(vec, frac)

        for step in range(nsteps):
            s = codes[step]
            for c in range(dim):
                flag = False
                for m in range(lv):
                    if vec[c, m] != 0:
                        flag = True
                        break
                live[c] = flag
            for r in range(dim):
                for m in range(width):
                    acc[m] = 0
                for p in range(indptr[s, r], indptr[s, r + 1]):
                    c = indices[s, p]
                    if not live[c]:
                        continue
                    for i in range(lo):
                        a = data[s, p, i]
                        if a == 0:
                            continue
                        for j in range(max(0, floor - i), lv):
                            acc[i + j] += a * vec[c, j]
                if frac > 0:
                    acc[frac - 1] += HALF
                carry = 0
                for m in range(width):
                    c2 = acc[m] + carry
                    acc[m] = c2 & MASK
                    carry = c2 >> LIMB_BITS
                high = carry
                for m in range(width - 1, top, -1):
                    high = high * BASE + acc[m]
                    if high != 0 and high != -1:
                        return OVERFLOW, vec, max_dev, trace, step
                head = high * BASE + acc[top]
                if head < -HALF or head >= HALF:
                    return OVERFLOW, vec, max_dev, trace, step
                for m in range(lv - 1):
                    nxt[r, m] = acc[frac + m]
                nxt[r, lv - 1] = head
            vec, nxt = nxt, vec
            if record:
                trace[step + 1] = vec
            dev = _deviation_numba(vec, frac)
            if dev > max_dev:
                max_dev = dev
        return OK, vec, max_dev, trace, nsteps

else:  # pragma: no cover
    run_numba = None


def active_backend() -> str:
    return "numba" if HAVE_NUMBA and _numba_wanted() else "numpy"


def run(indptr, indices, data, codes, v0, frac, record=False):
    if active_backend() == "numba":
        return run_numba(indptr, indices, data, codes, v0, frac, record)
    return run_numpy(indptr, indices, data, codes, v0, frac, record)


def int_to_limbs(value: int, nlimbs: int) -> np.ndarray:
    """Signed-top limb encoding of a Python int; raises if it does not fit."""
    out = np.zeros(nlimbs, dtype=np.int64)
    rest = value
    for m in range(nlimbs - 1):
        out[m] = rest & MASK
        rest >>= LIMB_BITS
    if not -HALF <= rest < HALF:
        raise OverflowError(f"{value} does not fit in {nlimbs} limbs")
    out[nlimbs - 1] = rest
    return out


def limbs_to_int(limbs) -> int:
    value = 0
    for d in reversed([int(x) for x in limbs]):
        value = (value << LIMB_BITS) + d
    return value


def limbs_needed(value: int) -> int:
    """Smallest limb count whose signed range holds ``value``."""
    n = 1
    while not -(1 << (LIMB_BITS * n - 1)) <= value < (1 << (LIMB_BITS * n - 1)):
        n += 1
    return n
