"""The numba and numpy paths of every kernel must agree exactly."""
import numpy as np
import pytest

from bfree import kernels

BACKENDS = [kernels.NUMBA, kernels.NUMPY]


def brute_mark(lo, shape, H, offset):
    d = len(shape)
    pts = np.stack(np.meshgrid(*[np.arange(l, l + s) for l, s in zip(lo, shape)], indexing="ij"), -1).reshape(-1, d)
    out = np.ones(len(pts), np.uint8)
    for k, p in enumerate(pts):
        v = p - offset
        # back-substitution on the upper-triangular basis
        for t in range(d - 1, -1, -1):
            q = v[t] // H[t, t]
            v = v - q * H[:, t]
        if not v.any():
            out[k] = 0
    return out


CASES = [
    ((0,), (12,), [[4]], (0,)),
    ((-7,), (30,), [[9]], (5,)),
    ((-3, -2), (7, 9), [[2, 1], [0, 1]], (0, 0)),
    ((-4, 1), (9, 8), [[5, 2], [0, 1]], (3, -1)),
    ((0, 0), (6, 6), [[2, 0], [0, 2]], (1, 1)),
    ((-2, -2, -2), (5, 6, 4), [[3, 1, 2], [0, 1, 0], [0, 0, 1]], (1, 0, -1)),
]


@pytest.mark.parametrize("kb", BACKENDS, ids=lambda k: k.name)
@pytest.mark.parametrize("lo,shape,H,off", CASES)
def test_mark_lattice(kb, lo, shape, H, off):
    H = np.array(H, np.int64)
    bits = np.ones(int(np.prod(shape)), np.uint8)
    kb.mark_lattice(bits, np.array(lo, np.int64), np.array(shape, np.int64), H, np.array(off, np.int64))
    assert np.array_equal(bits, brute_mark(lo, shape, H, np.array(off)))


@pytest.mark.parametrize("shape,offsets", [((50,), [[0], [1], [2]]), ((9, 11), [[0, 0], [1, 0], [0, 2], [-1, 1]])])
def test_pattern_histogram_agrees(shape, offsets):
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, int(np.prod(shape))).astype(np.uint8)
    a = kernels.NUMBA.pattern_histogram(bits, np.array(shape), np.array(offsets))
    b = kernels.NUMPY.pattern_histogram(bits, np.array(shape), np.array(offsets))
    assert np.array_equal(a, b)
    # direct count
    nd = bits.reshape(shape)
    offs = np.array(offsets)
    start = np.maximum(0, -offs.min(0))
    stop = np.array(shape) - np.maximum(0, offs.max(0))
    ref = np.zeros(1 << len(offs), np.int64)
    for p in np.ndindex(*(stop - start)):
        p = np.array(p) + start
        ref[sum(int(nd[tuple(p + o)]) << j for j, o in enumerate(offs))] += 1
    assert np.array_equal(a, ref)


@pytest.mark.parametrize("shape,ext", [((40,), (3,)), ((12, 15), (2, 3)), ((5, 6, 7), (2, 1, 2))])
def test_zero_windows_agree(shape, ext):
    rng = np.random.default_rng(1)
    bits = (rng.random(int(np.prod(shape))) < 0.3).astype(np.uint8)
    a = kernels.NUMBA.zero_windows(bits, shape, ext)
    b = kernels.NUMPY.zero_windows(bits, shape, ext)
    assert np.array_equal(a, b)
    nd = bits.reshape(shape)
    for p in np.ndindex(*shape):
        fits = all(x + e <= s for x, e, s in zip(p, ext, shape))
        sl = tuple(slice(x, x + e) for x, e in zip(p, ext))
        assert a[p] == (fits and not nd[sl].any())


def test_residue_indices_agree():
    rng = np.random.default_rng(2)
    pts = rng.integers(-100, 100, (500, 2))
    H = np.array([[13, 5], [0, 1]], np.int64)
    a = kernels.NUMBA.residue_indices(pts, H)
    b = kernels.NUMPY.residue_indices(pts, H)
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < 13


def test_brute_count_agree():
    masks = np.array([[0b0001, 0b0010, 0b0100, 0b1000]], np.int64)
    for lim, want in [(3, 15), (2, 11), (4, 16)]:
        assert kernels.NUMBA.brute_count(4, masks, [4], [lim]) == want
        assert kernels.NUMPY.brute_count(4, masks, [4], [lim]) == want


def test_backend_name():
    assert kernels.BACKEND in ("numba", "numpy")
