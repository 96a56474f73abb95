"""Combinatorial splitting of a wavelet expansion of ``m_j0``.

Cells are integer indices into a :class:`~roughsing.wavelet.WaveletCoeffSet`.
Within one group ``(lam, G, mu mod S)`` a cell is addressed by its row
``k = mu1`` and column ``l = mu2``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import EmptyInput, PreconditionError
from .kernel import Lattice, SymbolGrid
from .wavelet import WaveletCoeffSet, WaveletPair, synthesize

D1, D2, D3 = 1, 2, 3
PRIORITY_NOTE = ("cone and wedge conditions overlap below the large-j regime; "
                 "labels resolved by priority D1 > D2 > D3")


def classify_diag(coeffs: WaveletCoeffSet, j: int) -> np.ndarray:
    """Label every cell D1, D2 or D3 from its support box ``[a1,b1] x [a2,b2]``.

    D1: the box sits in one closed quadrant inside the cone
    ``2**-j |xi1| <= |xi2| <= 2**j |xi1|``.  D2: the box meets the wedge
    ``|xi2| <= 2**-j |xi1|``.  D3: the mirror wedge.  Priority D1 > D2 > D3.
    """
    box = coeffs.support_boxes()
    a1, b1, a2, b2 = box.T
    c = 2.0 ** -j
    quadrant = ((a1 >= 0) | (b1 <= 0)) & ((a2 >= 0) | (b2 <= 0))
    in_cone = quadrant.copy()
    for x1 in (a1, b1):
        for x2 in (a2, b2):
            in_cone &= (c * np.abs(x1) <= np.abs(x2)) & (np.abs(x2) <= np.abs(x1) / c)
    meets2 = (((b1 >= 0) & (a2 <= c * b1) & (b2 >= -c * b1))
              | ((a1 <= 0) & (a2 <= -c * a1) & (b2 >= c * a1)))
    meets3 = (((b2 >= 0) & (a1 <= c * b2) & (b1 >= -c * b2))
              | ((a2 <= 0) & (a1 <= -c * a2) & (b1 >= c * a2)))
    labels = np.where(in_cone, D1, np.where(meets2, D2, np.where(meets3, D3, 0)))
    if np.any(labels == 0):
        raise AssertionError("unlabelled cell: the three regions must cover the plane")
    return labels


def _shell_index(b: np.ndarray, top: float) -> np.ndarray:
    """``r`` with ``2**(-r-1) top < b <= 2**-r top``, exact at the boundaries."""
    r = np.floor(np.log2(top / b)).astype(np.int64)
    r = np.maximum(r, 0)
    # repair rounding of log2 near the dyadic boundaries
    r = np.where(b > np.ldexp(top, -r), r - 1, r)
    r = np.where(b <= np.ldexp(top, -r - 1), r + 1, r)
    return r


def shell_partition(coeffs: WaveletCoeffSet, wp: WaveletPair, cells=None) -> dict:
    """Magnitude shells ``U_r`` per disjoint-support group.

    Returns ``{group_key: {r: cell indices}}`` where ``group_key`` is
    ``(lam, g1, g2, mu1 mod S, mu2 mod S)``; ``b`` and ``||b||_inf`` are taken
    within the group.  Cells with ``b = 0`` are skipped.
    """
    cells = np.arange(len(coeffs)) if cells is None else np.asarray(cells, dtype=np.int64)
    b = coeffs.b(wp)[cells]
    live = b > 0
    cells, b = cells[live], b[live]
    if cells.size == 0:
        raise EmptyInput("no nonzero coefficient to partition")
    keys = coeffs.group_keys()[cells]
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    out = {}
    order = np.argsort(inv, kind="stable")
    bounds = np.searchsorted(inv[order], np.arange(uniq.shape[0] + 1))
    for gi in range(uniq.shape[0]):
        sel = order[bounds[gi]:bounds[gi + 1]]
        bg = b[sel]
        r = _shell_index(bg, bg.max())
        shells = {}
        for rv in np.unique(r):
            shells[int(rv)] = cells[sel[r == rv]]
        out[tuple(int(v) for v in uniq[gi])] = shells
    return out


def ceil_pow2(e) -> int:
    """``ceil(2**e)`` exactly for rational ``e``."""
    e = Fraction(e)
    if e <= 0:
        return 1
    p, q = e.numerator, e.denominator
    c = int(np.ceil(2.0 ** float(e)))
    c = max(c, 1)
    while c ** q < 2 ** p:
        c += 1
    while c > 1 and (c - 1) ** q >= 2 ** p:
        c -= 1
    return c


def threshold(r: int, j: int, delta, M: int, lam: int) -> int:
    """``ceil(2**((r + delta j + M lam)/4))``."""
    return ceil_pow2((Fraction(r) + Fraction(delta) * j + M * lam) / 4)


def _degrees(keys: np.ndarray) -> np.ndarray:
    _, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
    return counts[inv.reshape(-1)]


def split_shell(cells_kl, r: int, j: int, delta, M: int, lam: int) -> dict:
    """Split one shell ``U_r`` (an ``(n, 2)`` array of ``(k, l)``) into U1, U2, U3.

    Returned index arrays refer to rows of ``cells_kl``; ``T`` is the integer
    threshold ``ceil(2**((r + delta j + M lam)/4))``.
    """
    kl = np.asarray(cells_kl, dtype=np.int64).reshape(-1, 2)
    T = threshold(r, j, delta, M, lam)
    idx = np.arange(kl.shape[0])
    if kl.shape[0] == 0:
        empty = idx[:0]
        return {"U1": empty, "U2": empty, "U3": empty, "T": T}
    row_deg = _degrees(kl[:, 0])
    in1 = row_deg >= T
    rest = idx[~in1]
    in2 = np.zeros(rest.size, dtype=bool)
    if rest.size:
        in2 = _degrees(kl[rest, 1]) >= T
    return {"U1": idx[in1], "U2": rest[in2], "U3": rest[~in2], "T": T}


def vs_decomposition(cells_kl, T: int) -> list[np.ndarray]:
    """Greedy edge colouring into row- and column-injective classes.

    Cells are visited in lexicographic ``(k, l)`` order and each takes the
    smallest class not yet used by its row or column, so at most ``2T - 1``
    classes appear when all degrees are below ``T``.
    """
    kl = np.asarray(cells_kl, dtype=np.int64).reshape(-1, 2)
    if kl.shape[0] == 0:
        return []
    if _degrees(kl[:, 0]).max() >= T or _degrees(kl[:, 1]).max() >= T:
        raise PreconditionError("row or column degree reaches the threshold")
    order = np.lexsort((kl[:, 1], kl[:, 0]))
    row_used = defaultdict(set)
    col_used = defaultdict(set)
    classes = defaultdict(list)
    for i in order:
        k, l = int(kl[i, 0]), int(kl[i, 1])
        busy = row_used[k] | col_used[l]
        c = 0
        while c in busy:
            c += 1
        row_used[k].add(c)
        col_used[l].add(c)
        classes[c].append(i)
    return [np.array(classes[c], dtype=np.int64) for c in sorted(classes)]


def column_grouping(coeffs: WaveletCoeffSet, d2_cells) -> dict:
    """Group D2 cells into columns sharing ``(lam, group, mu2)``."""
    d2_cells = np.asarray(d2_cells, dtype=np.int64)
    keys = coeffs.group_keys()[d2_cells]
    cols = defaultdict(list)
    for cell, key, mu2 in zip(d2_cells, keys, coeffs.mu2[d2_cells]):
        cols[(*(int(v) for v in key), int(mu2))].append(int(cell))
    return {k: np.array(v, dtype=np.int64) for k, v in cols.items()}


def column_bound(j: int, lam: int, support: int) -> tuple[int, float]:
    """Bound on distinct ``mu2`` of D2 cells at level ``lam``: ``(count bound, |mu2| bound)``.

    D2 boxes meet ``|xi2| <= 2**-j |xi1|`` with ``|xi1| <= 2**(j+1) + S 2**-lam``.
    """
    reach = 2.0 + support * 2.0 ** (-j - lam)
    mu_abs = reach * 2.0 ** lam + support
    count = int(np.floor(2 * reach * 2.0 ** lam)) + support + 1
    return count, mu_abs


def reconstruct_part(coeffs: WaveletCoeffSet, selection, wp: WaveletPair, target: Lattice) -> SymbolGrid:
    """Partial synthesis over the selected cells."""
    return synthesize(coeffs.subset(np.asarray(selection, dtype=np.int64)), wp, target)


@dataclass
class SplitReport:
    j: int
    delta: float
    M: int
    diag_assign: np.ndarray
    shells: dict
    u_split: dict
    vs_classes: dict
    columns: dict
    cardinality_certs: list = field(default_factory=list)
    deviations: list = field(default_factory=list)

    def failed_certs(self) -> list:
        return [c for c in self.cardinality_certs if not c["holds"]]

    def summary(self) -> dict:
        kinds = defaultdict(lambda: [0, 0])
        for c in self.cardinality_certs:
            kinds[c["kind"]][0] += 1
            kinds[c["kind"]][1] += int(c["holds"])
        return {
            "j": self.j, "delta": float(self.delta), "M": self.M,
            "cells": int(self.diag_assign.size),
            "D1": int(np.sum(self.diag_assign == D1)),
            "D2": int(np.sum(self.diag_assign == D2)),
            "D3": int(np.sum(self.diag_assign == D3)),
            "groups": len(self.shells),
            "shells": int(sum(len(s) for s in self.shells.values())),
            "U1": int(sum(v["U1"].size for v in self.u_split.values())),
            "U2": int(sum(v["U2"].size for v in self.u_split.values())),
            "U3": int(sum(v["U3"].size for v in self.u_split.values())),
            "vs_classes": int(sum(len(v) for v in self.vs_classes.values())),
            "columns": len(self.columns),
            "certificates": {k: {"checked": v[0], "holds": v[1]} for k, v in kinds.items()},
            "deviations": list(self.deviations),
        }

    def part(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.diag_assign == label)


def _cert(kind: str, group, r, lhs, rhs, holds: bool) -> dict:
    return {"kind": kind, "group": list(group) if group is not None else None, "r": r,
            "lhs": float(lhs), "rhs": float(rhs), "holds": bool(holds)}


def build_split_report(coeffs: WaveletCoeffSet, wp: WaveletPair, j: int,
                       delta=Fraction(1, 16)) -> SplitReport:
    """Run every split on the D1 groups and the column grouping on D2.

    Certificates checked per ``(group, r)``: the shell-size bound
    ``|U_r| ||b||_inf**2 <= 4 ||b||_2**2 4**r`` in exact rational arithmetic,
    ``N1 T <= |U_r|``, the V_s class count ``<= T**2``, and that U1, U2, U3
    partition U_r.  Per level, the D2 column count and ``|mu2|`` bounds.
    """
    M = coeffs.M
    labels = classify_diag(coeffs, j)
    d1 = np.flatnonzero(labels == D1)
    b_all = coeffs.b(wp)
    shells = shell_partition(coeffs, wp, d1) if d1.size else {}
    u_split, vs, certs = {}, {}, []
    for key, group in shells.items():
        lam = key[0]
        members = np.concatenate(list(group.values()))
        bg = b_all[members]
        top = Fraction(float(bg.max()))
        l2sq = sum((Fraction(float(v)) ** 2 for v in bg), Fraction(0))
        for r, cells in group.items():
            n = int(cells.size)
            lhs = n * top * top
            rhs = 4 * l2sq * Fraction(4) ** r
            certs.append(_cert("shell_size", key, r, n, float(rhs / (top * top)), lhs <= rhs))
            kl = np.stack([coeffs.mu1[cells], coeffs.mu2[cells]], axis=1)
            parts = split_shell(kl, r, j, delta, M, lam)
            T = parts["T"]
            split_cells = {name: cells[parts[name]] for name in ("U1", "U2", "U3")}
            u_split[(key, r)] = split_cells
            joined = np.sort(np.concatenate([split_cells[name] for name in ("U1", "U2", "U3")]))
            certs.append(_cert("partition", key, r, joined.size, n,
                               joined.size == n and np.array_equal(joined, np.sort(cells))))
            n1 = int(np.unique(kl[parts["U1"], 0]).size)
            certs.append(_cert("N1", key, r, n1 * T, n, n1 * T <= n))
            classes = vs_decomposition(kl[parts["U3"]], T)
            vs[(key, r)] = [parts_cells for parts_cells in (cells[parts["U3"]][c] for c in classes)]
            certs.append(_cert("vs_count", key, r, len(classes), T * T, len(classes) <= min(2 * T - 1, T * T)))
            bad = 0
            for c in classes:
                sub = kl[parts["U3"]][c]
                bad += int(np.unique(sub[:, 0]).size != sub.shape[0]
                           or np.unique(sub[:, 1]).size != sub.shape[0])
            certs.append(_cert("vs_injective", key, r, bad, 0, bad == 0))
    d2 = np.flatnonzero(labels == D2)
    columns = column_grouping(coeffs, d2)
    S = wp.support
    for lam in np.unique(coeffs.lam[d2]) if d2.size else []:
        sel = d2[coeffs.lam[d2] == lam]
        count = np.unique(coeffs.mu2[sel]).size
        cbound, mbound = column_bound(j, int(lam), S)
        certs.append(_cert("column_count", None, int(lam), count, cbound, count <= cbound))
        worst = float(np.abs(coeffs.mu2[sel]).max())
        certs.append(_cert("column_reach", None, int(lam), worst, mbound, worst <= mbound))
    return SplitReport(j, float(delta), M, labels, shells, u_split, vs, columns, certs,
                       [PRIORITY_NOTE])


def offdiag_support(coeffs: WaveletCoeffSet, cells, j: int) -> dict:
    """Per level, the fraction of cells with ``2**(j-2) <= |xi1 + xi2| <= 2**(j+2)`` on the box."""
    cells = np.asarray(cells, dtype=np.int64)
    box = coeffs.support_boxes()[cells]
    a1, b1, a2, b2 = box.T
    # range of xi1 + xi2 over the box is [a1 + a2, b1 + b2]
    lo, hi = a1 + a2, b1 + b2
    min_abs = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    max_abs = np.maximum(np.abs(lo), np.abs(hi))
    ok = (min_abs >= 2.0 ** (j - 2)) & (max_abs <= 2.0 ** (j + 2))
    lam = coeffs.lam[cells]
    return {int(l): float(ok[lam == l].mean()) for l in np.unique(lam)}
