"""Exterior algebra on R^n: sparse k-vectors, wedge products, mass, Hodge star.

Coefficients are stored sparsely over strictly increasing 1-based index
tuples; the grade-0 basis is the empty tuple.  The star convention is fixed
globally as  alpha ^ star(alpha) = +e_{1..n}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

#: Keeps index tuples cheap; desk-scale experiments use n <= 4.
MAX_AMBIENT_DIM = 12

Index = tuple[int, ...]


def check_ambient_dim(n: int) -> None:
    if not 1 <= n <= MAX_AMBIENT_DIM:
        raise ValueError(f"ambient dimension must be in 1..{MAX_AMBIENT_DIM}, got {n}")


def all_index_sets(n: int, k: int) -> list[Index]:
    """All strictly increasing k-tuples from 1..n."""
    return [tuple(c) for c in combinations(range(1, n + 1), k)]


def interleave_sign(left: Index, right: Index) -> tuple[int, Index]:
    """Sign for sorting the concatenation of two increasing index tuples.

    Returns (0, ()) when an index repeats (the wedge vanishes).
    """
    if set(left) & set(right):
        return 0, ()
    inversions = sum(1 for a in left for b in right if a > b)
    merged = tuple(sorted(left + right))
    return (-1 if inversions % 2 else 1), merged


def complement_index(idx: Index, n: int) -> Index:
    return tuple(i for i in range(1, n + 1) if i not in idx)


@dataclass(frozen=True)
class KVector:
    """Element of Lambda^k(R^n), stored as a sparse map over basis index sets."""

    n: int
    k: int
    coeffs: dict

    def __post_init__(self):
        check_ambient_dim(self.n)
        if not 0 <= self.k <= self.n:
            raise ValueError(f"grade must be in 0..{self.n}, got {self.k}")
        clean = {}
        for idx, c in self.coeffs.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.k:
                raise ValueError(f"index {idx} has wrong length for grade {self.k}")
            if any(not 1 <= i <= self.n for i in idx) or any(
                idx[j] >= idx[j + 1] for j in range(len(idx) - 1)
            ):
                raise ValueError(f"index {idx} is not strictly increasing within 1..{self.n}")
            c = float(c)
            if c != 0.0:
                clean[idx] = c
        object.__setattr__(self, "coeffs", clean)

    # -- constructors ------------------------------------------------------
    @staticmethod
    def zero(n: int, k: int) -> "KVector":
        return KVector(n, k, {})

    @staticmethod
    def basis(n: int, idx: Iterable[int], coeff: float = 1.0) -> "KVector":
        idx = tuple(idx)
        return KVector(n, len(idx), {idx: coeff})

    @staticmethod
    def scalar(n: int, value: float) -> "KVector":
        return KVector(n, 0, {(): value})

    # -- generic algebra ---------------------------------------------------
    def __add__(self, other: "KVector") -> "KVector":
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("mismatched ambient dimension or grade")
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0.0) + c
        return KVector(self.n, self.k, out)

    def __neg__(self) -> "KVector":
        return KVector(self.n, self.k, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other: "KVector") -> "KVector":
        return self + (-other)

    def __rmul__(self, scalar: float) -> "KVector":
        return KVector(self.n, self.k, {i: scalar * c for i, c in self.coeffs.items()})

    def __mul__(self, scalar: float) -> "KVector":
        return self.__rmul__(scalar)

    def coeff(self, idx: Iterable[int]) -> float:
        return self.coeffs.get(tuple(idx), 0.0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def allclose(self, other: "KVector", tol: float = 1e-12) -> bool:
        if (self.n, self.k) != (other.n, other.k):
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeff(i) - other.coeff(i)) <= tol for i in keys)


def wedge(u: KVector, v: KVector) -> KVector:
    """Exterior product; bilinear, associative, graded-anticommutative."""
    if u.n != v.n:
        raise ValueError("mismatched ambient dimension")
    if u.k + v.k > u.n:
        raise ValueError("grade exceeds ambient dimension")
    out: dict = {}
    for iu, cu in u.coeffs.items():
        for iv, cv in v.coeffs.items():
            sign, merged = interleave_sign(iu, iv)
            if sign:
                out[merged] = out.get(merged, 0.0) + sign * cu * cv
    return KVector(u.n, u.k + v.k, out)


def mass_kvector(u: KVector) -> float:
    """Euclidean norm over the orthonormal basis {e_I}."""
    return math.sqrt(math.fsum(c * c for c in u.coeffs.values()))


def star_kvector(u: KVector) -> KVector:
    """Hodge star on multivectors: star(e_I) = sign(I, I^c) e_{I^c}.

    sign(I, I^c) is the permutation sign taking (I, I^c) to (1..n), so for
    simple unit u the convention u ^ star(u) = +e_{1..n} holds, and
    star(star(u)) = (-1)^{k(n-k)} u.
    """
    out = {}
    for idx, c in u.coeffs.items():
        comp = complement_index(idx, u.n)
        sign, _ = interleave_sign(idx, comp)
        out[comp] = out.get(comp, 0.0) + sign * c
    return KVector(u.n, u.n - u.k, out)


def frame_to_kvector(vectors: Sequence[Sequence[float]], n: int | None = None) -> KVector:
    """The simple k-vector v_1 ^ ... ^ v_k; dependent frames give 0."""
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if n is None:
        if not vecs:
            raise ValueError("ambient dimension required for an empty frame")
        n = len(vecs[0])
    if len(vecs) > n:
        raise ValueError("grade exceeds ambient dimension")
    out = KVector.scalar(n, 1.0)
    for v in vecs:
        if len(v) != n:
            raise ValueError("frame vectors must share the ambient dimension")
        out = wedge(out, KVector(n, 1, {(i + 1,): v[i] for i in range(n)}))
    return out


def kvector_map(matrix: np.ndarray, u: KVector) -> KVector:
    """Apply Lambda^k of a linear map (rows = outputs) to a k-vector."""
    matrix = np.asarray(matrix, dtype=float)
    n_out, n_in = matrix.shape
    if n_in != u.n:
        raise ValueError("matrix input dimension does not match the k-vector")
    if u.k == 0:
        return KVector(n_out, 0, dict(u.coeffs))
    out: dict = {}
    out_sets = all_index_sets(n_out, u.k)
    for iu, cu in u.coeffs.items():
        cols = [i - 1 for i in iu]
        sub = matrix[:, cols]
        for jo in out_sets:
            rows = [j - 1 for j in jo]
            d = float(np.linalg.det(sub[rows, :]))
            if d != 0.0:
                out[jo] = out.get(jo, 0.0) + cu * d
    return KVector(n_out, u.k, out)


@dataclass(frozen=True)
class KDirection:
    """Unit-mass simple k-vector remembered together with a spanning orthonormal frame.

    Only frame constructors are exposed, keeping simplicity by construction.
    """

    n: int
    k: int
    frame: tuple
    kvector: KVector

    def __post_init__(self):
        if abs(mass_kvector(self.kvector) - 1.0) > 1e-12:
            raise ValueError("direction must have unit mass (within 1e-12)")

    @staticmethod
    def from_frame(vectors: Sequence[Sequence[float]], n: int | None = None) -> "KDirection":
        vecs = tuple(tuple(float(x) for x in v) for v in vectors)
        if n is None:
            if not vecs:
                raise ValueError("ambient dimension required for an empty frame")
            n = len(vecs[0])
        if vecs:
            F = np.array(vecs)
            gram = F @ F.T
            if not np.allclose(gram, np.eye(len(vecs)), atol=1e-12):
                raise ValueError("frame is not orthonormal within 1e-12")
        kv = frame_to_kvector(vecs, n) if vecs else KVector.scalar(n, 1.0)
        return KDirection(n, len(vecs), vecs, kv)

    @staticmethod
    def from_axes(n: int, axes: Iterable[int]) -> "KDirection":
        """Axis direction e_{a_1} ^ ... ^ e_{a_k} for 1-based axis indices."""
        axes = tuple(axes)
        frame = tuple(
            tuple(1.0 if i == a - 1 else 0.0 for i in range(n)) for a in axes
        )
        if axes:
            sign, ordered = _sort_parity(axes)
            kv = KVector.basis(n, ordered, float(sign))
        else:
            kv = KVector.scalar(n, 1.0)
        return KDirection(n, len(axes), frame, kv)

    @staticmethod
    def scalar_direction(n: int) -> "KDirection":
        return KDirection(n, 0, (), KVector.scalar(n, 1.0))

    @property
    def axis_indices(self) -> Index | None:
        """Sorted 1-based axes when every frame row is +-e_i, else None."""
        axes = []
        for row in self.frame:
            nz = [i for i, x in enumerate(row) if x != 0.0]
            if len(nz) != 1 or abs(row[nz[0]]) != 1.0:
                return None
            axes.append(nz[0] + 1)
        if len(set(axes)) != len(axes):
            return None
        return tuple(sorted(axes))


def _sort_parity(seq: Sequence[int]) -> tuple[int, tuple]:
    inversions = sum(
        1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j]
    )
    return (-1 if inversions % 2 else 1), tuple(sorted(seq))


def star_direction(d: KDirection) -> tuple[KDirection, int]:
    """Star of a direction: (direction, sign) with the k-vector starred exactly.

    The returned direction's k-vector is star_kvector(d.kvector) verbatim
    (pure coefficient permutation, no float error); the frame is an
    orthonormal complement oriented by frame ^ complement = +e_{1..n}.  For a
    grade-n input the scalar sign is returned separately so the direction
    keeps unit positive mass.
    """
    star_kv = star_kvector(d.kvector)
    n, k = d.n, d.k
    if k == n:
        val = star_kv.coeff(())
        return KDirection.scalar_direction(n), (1 if val >= 0 else -1)
    if k == 0:
        # star(1) = +e_{1..n}
        return KDirection.from_axes(n, range(1, n + 1)), 1
    F = np.array(d.frame)
    q, _ = np.linalg.qr(F.T, mode="complete")
    W = q[:, k:].T.copy()
    if np.linalg.det(np.vstack([F, W])) < 0:
        W[-1] = -W[-1]
    comp = tuple(tuple(float(x) for x in row) for row in W)
    out = KDirection(n, n - k, comp, star_kv)
    if not frame_to_kvector(comp, n).allclose(star_kv, 1e-9):
        raise AssertionError("complement frame does not reproduce the starred k-vector")
    return out, 1
