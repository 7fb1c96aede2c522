"""Descriptor matching: brute force, mutual NN, FGINN ratio, symmetric, GMS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import BinaryDescriptor, Keypoint

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


@dataclass(frozen=True)
class Match:
    """Correspondence between query index and train index with Hamming distance."""

    query_idx: int
    train_idx: int
    distance: int

    def __post_init__(self):
        if not 0 <= self.distance <= 256:
            raise ValueError(f"Hamming distance out of range: {self.distance}")


def _as_matrix(descriptors: list[BinaryDescriptor]) -> np.ndarray:
    return np.frombuffer(b"".join(d.bits for d in descriptors), dtype=np.uint8).reshape(-1, 32)


def hamming_matrix(qd: list[BinaryDescriptor], td: list[BinaryDescriptor]) -> np.ndarray:
    """(N, M) Hamming distances, computed in row chunks to bound memory."""
    q = _as_matrix(qd)
    t = _as_matrix(td)
    out = np.empty((q.shape[0], t.shape[0]), dtype=np.uint16)
    step = max(1, 8_000_000 // max(t.shape[0] * 32, 1))
    for i in range(0, q.shape[0], step):
        xor = q[i : i + step, None, :] ^ t[None, :, :]
        out[i : i + step] = _POPCOUNT[xor].sum(axis=2)
    return out


def match_bruteforce(qd: list[BinaryDescriptor], td: list[BinaryDescriptor]) -> list[Match]:
    """Nearest train descriptor for every query; ties go to the lower index."""
    if not qd or not td:
        raise ValueError("descriptor lists must be non-empty")
    d = hamming_matrix(qd, td)
    nn = d.argmin(axis=1)
    return [Match(i, int(j), int(d[i, j])) for i, j in enumerate(nn)]


def match_mutual_nn(qd: list[BinaryDescriptor], td: list[BinaryDescriptor]) -> list[Match]:
    """Keep (i, j) only when i and j are each other's nearest neighbors."""
    if not qd or not td:
        raise ValueError("descriptor lists must be non-empty")
    d = hamming_matrix(qd, td)
    fwd = d.argmin(axis=1)
    bwd = d.argmin(axis=0)
    return [
        Match(i, int(j), int(d[i, j])) for i, j in enumerate(fwd) if bwd[j] == i
    ]


def match_fginn(
    qkps: list[Keypoint],
    qd: list[BinaryDescriptor],
    tkps: list[Keypoint],
    td: list[BinaryDescriptor],
    ratio: float = 0.8,
    min_geom_dist: float = 10.0,
) -> list[Match]:
    """Ratio test against the first geometrically inconsistent nearest neighbor.

    The denominator is the closest train descriptor whose keypoint lies at
    least ``min_geom_dist`` pixels from the best match's keypoint, so duplicate
    detections of the same corner don't veto a genuine correspondence. With no
    such rival the match is accepted outright.
    """
    if not qd or not td:
        raise ValueError("descriptor lists must be non-empty")
    if len(qkps) != len(qd) or len(tkps) != len(td):
        raise ValueError("keypoints and descriptors must pair up")
    d = hamming_matrix(qd, td)
    order = np.argsort(d, axis=1, kind="stable")
    tpos = np.array([(kp.x, kp.y) for kp in tkps])
    out = []
    for i in range(d.shape[0]):
        row = order[i]
        j1 = int(row[0])
        d1 = int(d[i, j1])
        far = np.hypot(*(tpos[row] - tpos[j1]).T) >= min_geom_dist
        rivals = np.nonzero(far)[0]
        if rivals.size == 0 or d1 < ratio * int(d[i, row[rivals[0]]]):
            out.append(Match(i, j1, d1))
    return out


def match_symmetric(mode: str, forward: list[Match], backward: list[Match]) -> list[Match]:
    """Combine A->B and B->A match lists by intersection or deduplicated union.

    Output pairs are in canonical (query in A, train in B) orientation, sorted
    by (query_idx, train_idx).
    """
    if mode not in ("intersection", "union"):
        raise ValueError(f"mode must be 'intersection' or 'union', got {mode!r}")
    fwd_pairs = {(m.query_idx, m.train_idx): m.distance for m in forward}
    bwd_pairs = {(m.train_idx, m.query_idx): m.distance for m in backward}
    if mode == "intersection":
        keys = fwd_pairs.keys() & bwd_pairs.keys()
    else:
        keys = fwd_pairs.keys() | bwd_pairs.keys()
    merged = {**bwd_pairs, **fwd_pairs}
    return [Match(q, t, merged[(q, t)]) for q, t in sorted(keys)]


def filter_gms(
    qkps: list[Keypoint],
    tkps: list[Keypoint],
    matches: list[Match],
    query_size: tuple[int, int],
    train_size: tuple[int, int],
    grid: int = 20,
    alpha: float = 6.0,
    min_matches: int = 10,
) -> list[Match]:
    """Grid-based motion statistics: keep matches with coherent cell support.

    Both images are split into ``grid`` x ``grid`` cells; a match survives when
    the number of other matches sharing its (query cell, train cell) pairing,
    summed over the 3x3 cell neighborhood shifted identically in both images,
    exceeds alpha * sqrt(mean matches per neighborhood cell). The test is
    repeated under four half-cell grid offsets (a match passing any survives),
    which rescues coherent matches that straddle cell boundaries. Below
    ``min_matches`` total matches the statistics are meaningless and the list
    passes through unfiltered.
    """
    if not matches:
        raise ValueError("need at least one match")
    if len(matches) < min_matches:
        return list(matches)

    passed = np.zeros(len(matches), dtype=bool)
    for sx, sy in ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)):
        passed |= _gms_pass(qkps, tkps, matches, query_size, train_size, grid, alpha, sx, sy)
    return [m for m, ok in zip(matches, passed) if ok]


def _gms_pass(qkps, tkps, matches, query_size, train_size, grid, alpha, sx, sy) -> np.ndarray:
    def cell_of(kp: Keypoint, size: tuple[int, int]) -> tuple[int, int]:
        w, h = size
        col = min(int(kp.x * grid / w + sx), grid - 1)
        row = min(int(kp.y * grid / h + sy), grid - 1)
        return row, col

    qcells = [cell_of(qkps[m.query_idx], query_size) for m in matches]
    tcells = [cell_of(tkps[m.train_idx], train_size) for m in matches]

    pair_count: dict[tuple[tuple[int, int], tuple[int, int]], int] = {}
    qcell_count: dict[tuple[int, int], int] = {}
    for qc, tc in zip(qcells, tcells):
        pair_count[(qc, tc)] = pair_count.get((qc, tc), 0) + 1
        qcell_count[qc] = qcell_count.get(qc, 0) + 1

    ok = np.zeros(len(matches), dtype=bool)
    for i, (qc, tc) in enumerate(zip(qcells, tcells)):
        support = 0
        total = 0
        n_cells = 0
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nq = (qc[0] + dr, qc[1] + dc)
                nt = (tc[0] + dr, tc[1] + dc)
                if not (0 <= nq[0] < grid and 0 <= nq[1] < grid):
                    continue
                if not (0 <= nt[0] < grid and 0 <= nt[1] < grid):
                    continue
                n_cells += 1
                support += pair_count.get((nq, nt), 0)
                total += qcell_count.get(nq, 0)
        support -= 1  # don't let the match vouch for itself
        mean_per_cell = total / max(n_cells, 1)
        ok[i] = support > alpha * np.sqrt(mean_per_cell)
    return ok
