"""Hot loops: lattice marking, pattern histograms, zero-run detection,
residue indexing and brute-force subset counting.

Every kernel exists twice, as a numba ``@njit`` loop (``nb_*``) and as a
vectorized numpy routine (``np_*``). The public names dispatch to the numba
versions unless ``BFREE_DISABLE_NUMBA`` is set. Boxes are stored row-major
with axis 0 slowest; all coordinates are int64.
"""
from contextlib import contextmanager
from types import SimpleNamespace

import numpy as np

from ._accel import USE_NUMBA, njit

LIMIT = 2**62


def row_major_strides(shape) -> np.ndarray:
    d = len(shape)
    strides = np.ones(d, dtype=np.int64)
    for t in range(d - 2, -1, -1):
        strides[t] = strides[t + 1] * shape[t + 1]
    return strides


# --------------------------------------------------------------------------
# marking offset + H Z^d inside a box


@njit(cache=True, nogil=True)
def _nb_mark_lattice(bits, lo, shape, H, offset):
    d = H.shape[0]
    strides = np.ones(d, np.int64)
    for t in range(d - 2, -1, -1):
        strides[t] = strides[t + 1] * shape[t + 1]
    hi = lo + shape - 1
    part = np.zeros((d, d), np.int64)
    cstart = np.zeros(d, np.int64)
    cend = np.zeros(d, np.int64)
    ccur = np.zeros(d, np.int64)
    marked = 0

    i = d - 1
    for r in range(d):
        part[i, r] = offset[r]
    h = H[i, i]
    p = part[i, i]
    cstart[i] = -((p - lo[i]) // h)
    cend[i] = (hi[i] - p) // h
    ccur[i] = cstart[i]
    while True:
        if ccur[i] > cend[i]:
            i += 1
            if i == d:
                break
            ccur[i] += 1
            continue
        if i == 0:
            base = 0
            for r in range(1, d):
                base += (part[0, r] - lo[r]) * strides[r]
            h0 = H[0, 0]
            for c in range(cstart[0], cend[0] + 1):
                bits[base + (part[0, 0] + c * h0 - lo[0]) * strides[0]] = 0
                marked += 1
            ccur[0] = cend[0] + 1
            continue
        for r in range(d):
            part[i - 1, r] = part[i, r] + ccur[i] * H[r, i]
        i -= 1
        h = H[i, i]
        p = part[i, i]
        cstart[i] = -((p - lo[i]) // h)
        cend[i] = (hi[i] - p) // h
        ccur[i] = cstart[i]
    return marked


def _np_mark_lattice(bits, lo, shape, H, offset):
    d = H.shape[0]
    hi = lo + shape - 1
    P = offset.reshape(1, d).copy()
    for i in range(d - 1, -1, -1):
        h = H[i, i]
        p = P[:, i]
        cs = -((p - lo[i]) // h)
        n = np.maximum((hi[i] - p) // h - cs + 1, 0)
        rep = np.repeat(np.arange(len(P)), n)
        step = np.arange(int(n.sum()), dtype=np.int64) - np.repeat(np.cumsum(n) - n, n)
        c = cs[rep] + step
        P = P[rep] + c[:, None] * H[:, i][None, :]
    idx = ((P - lo) * row_major_strides(shape)).sum(axis=1)
    bits[idx] = 0
    return len(idx)


def _prep_mark(bits, lo, shape, H, offset):
    lo = np.asarray(lo, dtype=np.int64)
    shape = np.asarray(shape, dtype=np.int64)
    H = np.asarray(H, dtype=np.int64)
    offset = np.asarray(offset, dtype=np.int64)
    return bits, lo, shape, H, offset


def nb_mark_lattice(bits, lo, shape, H, offset):
    """Zero ``bits`` on every point of offset + H Z^d inside the box."""
    return int(_nb_mark_lattice(*_prep_mark(bits, lo, shape, H, offset)))


def np_mark_lattice(bits, lo, shape, H, offset):
    return int(_np_mark_lattice(*_prep_mark(bits, lo, shape, H, offset)))


# --------------------------------------------------------------------------
# histogram of bit codes of a finite shape over interior positions


def _interior(shape, offsets):
    shape = np.asarray(shape, dtype=np.int64)
    if len(offsets) == 0:
        return np.zeros(len(shape), np.int64), shape.copy()
    start = np.maximum(0, -offsets.min(axis=0))
    stop = np.minimum(shape, shape - offsets.max(axis=0))
    return start, stop


@njit(cache=True, nogil=True)
def _nb_pattern_histogram(bits, shape, offsets, start, stop):
    d = shape.shape[0]
    k = offsets.shape[0]
    strides = np.ones(d, np.int64)
    for t in range(d - 2, -1, -1):
        strides[t] = strides[t + 1] * shape[t + 1]
    delta = np.zeros(k, np.int64)
    for j in range(k):
        for t in range(d):
            delta[j] += offsets[j, t] * strides[t]
    hist = np.zeros(1 << k, np.int64)
    for t in range(d):
        if stop[t] <= start[t]:
            return hist
    pos = start.copy()
    while True:
        base = 0
        for t in range(d - 1):
            base += pos[t] * strides[t]
        for x in range(start[d - 1], stop[d - 1]):
            idx = base + x
            code = 0
            for j in range(k):
                if bits[idx + delta[j]]:
                    code |= 1 << j
            hist[code] += 1
        # advance the outer odometer
        t = d - 2
        while t >= 0:
            pos[t] += 1
            if pos[t] < stop[t]:
                break
            pos[t] = start[t]
            t -= 1
        if t < 0:
            break
    return hist


def _np_pattern_histogram(bits, shape, offsets, start, stop):
    k = offsets.shape[0]
    hist = np.zeros(1 << k, np.int64)
    if np.any(stop <= start):
        return hist
    arr = bits.reshape(tuple(shape))
    code = np.zeros(tuple(stop - start), dtype=np.int64)
    for j in range(k):
        sl = tuple(slice(s + o, e + o) for s, e, o in zip(start, stop, offsets[j]))
        code |= arr[sl].astype(np.int64) << j
    return np.bincount(code.ravel(), minlength=1 << k).astype(np.int64)


def _prep_hist(bits, shape, offsets):
    shape = np.asarray(shape, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, len(shape))
    start, stop = _interior(shape, offsets)
    return bits, shape, offsets, start, stop


def nb_pattern_histogram(bits, shape, offsets):
    """Counts of each code sum_j bits[p + offsets[j]] << j over interior p."""
    return _nb_pattern_histogram(*_prep_hist(bits, shape, offsets))


def np_pattern_histogram(bits, shape, offsets):
    return _np_pattern_histogram(*_prep_hist(bits, shape, offsets))


# --------------------------------------------------------------------------
# all-true runs along one axis


@njit(cache=True, nogil=True)
def _nb_runs2d(mask, k):
    rows, n = mask.shape
    out = np.zeros((rows, n), np.bool_)
    for r in range(rows):
        run = 0
        for i in range(n - 1, -1, -1):
            if mask[r, i]:
                run += 1
            else:
                run = 0
            if run >= k:
                out[r, i] = True
    return out


def _np_runs2d(mask, k):
    rows, n = mask.shape
    out = np.zeros((rows, n), dtype=bool)
    if k > n:
        return out
    cs = np.zeros((rows, n + 1), dtype=np.int64)
    np.cumsum(mask, axis=1, out=cs[:, 1:])
    out[:, : n - k + 1] = (cs[:, k:] - cs[:, : n - k + 1]) == k
    return out


def _zero_windows(runs2d, bits, shape, extent):
    mask = (bits.reshape(tuple(shape)) == 0)
    for axis, k in enumerate(extent):
        moved = np.moveaxis(mask, axis, -1)
        flat = np.ascontiguousarray(moved).reshape(-1, moved.shape[-1])
        res = runs2d(flat, int(k)).reshape(moved.shape)
        mask = np.moveaxis(res, -1, axis)
    return mask


def nb_zero_windows(bits, shape, extent):
    """Boolean array: True at p when bits vanish on p + prod_t [0, extent_t)."""
    return _zero_windows(_nb_runs2d, bits, shape, extent)


def np_zero_windows(bits, shape, extent):
    return _zero_windows(_np_runs2d, bits, shape, extent)


# --------------------------------------------------------------------------
# residue class indices modulo an HNF lattice


@njit(cache=True, nogil=True)
def _nb_residue_indices(points, H):
    n, d = points.shape
    out = np.empty(n, np.int64)
    v = np.empty(d, np.int64)
    for k in range(n):
        for t in range(d):
            v[t] = points[k, t]
        for i in range(d - 1, -1, -1):
            q = v[i] // H[i, i]
            if q != 0:
                for r in range(i + 1):
                    v[r] -= q * H[r, i]
        idx = 0
        scale = 1
        for t in range(d):
            idx += v[t] * scale
            scale *= H[t, t]
        out[k] = idx
    return out


def _np_residue_indices(points, H):
    v = points.copy()
    d = H.shape[0]
    for i in range(d - 1, -1, -1):
        q = v[:, i] // H[i, i]
        v[:, : i + 1] -= q[:, None] * H[: i + 1, i][None, :]
    scale = np.cumprod(np.concatenate([[1], np.diag(H)[:-1]])).astype(np.int64)
    return (v * scale).sum(axis=1)


def _prep_res(points, H):
    H = np.asarray(H, dtype=np.int64)
    points = np.ascontiguousarray(np.asarray(points, dtype=np.int64).reshape(-1, H.shape[0]))
    return points, H


def nb_residue_indices(points, H):
    """Mixed-radix residue index of each row of ``points`` mod the HNF ``H``."""
    return _nb_residue_indices(*_prep_res(points, H))


def np_residue_indices(points, H):
    return _np_residue_indices(*_prep_res(points, H))


# --------------------------------------------------------------------------
# brute-force count of subsets of a small box hitting few classes


@njit(cache=True, nogil=True)
def _nb_brute_count(npoints, masks, nclasses, limits):
    L = masks.shape[0]
    total = 0
    for w in range(1 << npoints):
        ok = True
        for l in range(L):
            hit = 0
            for c in range(nclasses[l]):
                if w & masks[l, c]:
                    hit += 1
            if hit > limits[l]:
                ok = False
                break
        if ok:
            total += 1
    return total


def _np_brute_count(npoints, masks, nclasses, limits, chunk=1 << 18):
    total = 0
    nsub = 1 << npoints
    for lo in range(0, nsub, chunk):
        w = np.arange(lo, min(nsub, lo + chunk), dtype=np.int64)
        ok = np.ones(len(w), dtype=bool)
        for l in range(masks.shape[0]):
            hit = np.zeros(len(w), dtype=np.int64)
            for c in range(nclasses[l]):
                hit += (w & masks[l, c]) != 0
            ok &= hit <= limits[l]
        total += int(ok.sum())
    return total


def _prep_brute(npoints, masks, nclasses, limits):
    return (
        int(npoints),
        np.asarray(masks, dtype=np.int64),
        np.asarray(nclasses, dtype=np.int64),
        np.asarray(limits, dtype=np.int64),
    )


def nb_brute_count(npoints, masks, nclasses, limits):
    """Subsets W of range(npoints) with #{c : W & masks[l, c]} <= limits[l] for all l."""
    return int(_nb_brute_count(*_prep_brute(npoints, masks, nclasses, limits)))


def np_brute_count(npoints, masks, nclasses, limits):
    return _np_brute_count(*_prep_brute(npoints, masks, nclasses, limits))


# --------------------------------------------------------------------------

NUMBA = SimpleNamespace(
    name="numba",
    mark_lattice=nb_mark_lattice,
    pattern_histogram=nb_pattern_histogram,
    zero_windows=nb_zero_windows,
    residue_indices=nb_residue_indices,
    brute_count=nb_brute_count,
)
NUMPY = SimpleNamespace(
    name="numpy",
    mark_lattice=np_mark_lattice,
    pattern_histogram=np_pattern_histogram,
    zero_windows=np_zero_windows,
    residue_indices=np_residue_indices,
    brute_count=np_brute_count,
)

def _install(ns: SimpleNamespace) -> None:
    global ACTIVE, BACKEND, mark_lattice, pattern_histogram, zero_windows, residue_indices, brute_count
    ACTIVE, BACKEND = ns, ns.name
    mark_lattice = ns.mark_lattice
    pattern_histogram = ns.pattern_histogram
    zero_windows = ns.zero_windows
    residue_indices = ns.residue_indices
    brute_count = ns.brute_count


_install(NUMBA if USE_NUMBA else NUMPY)


@contextmanager
def use_backend(name: str):
    """Temporarily route the public kernels through ``numba`` or ``numpy``."""
    ns = {"numba": NUMBA, "numpy": NUMPY}[name]
    prev = ACTIVE
    _install(ns)
    try:
        yield ns
    finally:
        _install(prev)
