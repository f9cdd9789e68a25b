"""Shared grid construction for membership comparisons."""

from __future__ import annotations

import numpy as np

from germsolver.flux import FluxPair


def rh_branches(fluxes: FluxPair, n: int):
    """RH-feasible pairs indexed by an n-point state grid.

    Two families: u^l on the grid with u^r on the right level set, and u^r on
    the grid with u^l on the left level set.  Each family is split into
    branches by the rank of the partner within its level set, so neighbouring
    grid indices on one branch are neighbouring pairs.
    Returns a list of (index array, pairs array) per branch.
    """
    fl, fr = fluxes.left, fluxes.right
    grid = np.linspace(fluxes.domain.lo, fluxes.domain.hi, n)
    branches: dict = {}
    for fam, (src, dst, src_is_left) in enumerate(((fl, fr, True), (fr, fl, False))):
        for i, u in enumerate(grid):
            partners = sorted(dst.level_points(src(u)))
            for k, w in enumerate(partners):
                pair = (u, w) if src_is_left else (w, u)
                branches.setdefault((fam, k), []).append((i, pair))
    out = []
    for key in sorted(branches):
        items = branches[key]
        out.append((np.array([i for i, _ in items]), np.array([p for _, p in items], dtype=float)))
    return out


def band_mask(idx: np.ndarray, *memberships: np.ndarray, width: int) -> np.ndarray:
    """True where any membership flips within ``width`` grid indices along a branch,
    or where the branch has a gap in that window."""
    m = len(idx)
    band = np.zeros(m, dtype=bool)
    for j in range(m):
        near = np.abs(idx - idx[j]) <= width
        if near.sum() < min(2 * width + 1, m) and (idx[j] - width >= idx.min() and idx[j] + width <= idx.max()):
            band[j] = True
        for mem in memberships:
            if mem[near].min() != mem[near].max():
                band[j] = True
    return band


def compare_on_branches(fluxes: FluxPair, n: int, pred_a, pred_b, width: int):
    """Count disagreements between two vectorized predicates outside the band."""
    total = disagree = outside = 0
    for idx, pairs in rh_branches(fluxes, n):
        a = np.asarray(pred_a(pairs[:, 0], pairs[:, 1]), dtype=bool)
        b = np.asarray(pred_b(pairs[:, 0], pairs[:, 1]), dtype=bool)
        band = band_mask(idx, a, b, width=width)
        diff = a != b
        total += len(pairs)
        disagree += int(diff.sum())
        outside += int((diff & ~band).sum())
    return {"pairs": total, "disagreements": disagree, "outside_band": outside}
