"""Exact integer-lattice arithmetic.

Smith normal form with unimodular transforms, invariant factors, cokernels
and kernels of isogenies of tori given by integer cocharacter matrices.
All arithmetic is on Python ints, so entries never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import numpy as np


class LatticeError(ValueError):
    """Raised on malformed matrices or inputs outside an operation's domain."""


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise LatticeError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise LatticeError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise LatticeError("ragged matrix rows")
        return cls(len(rows), cols, tuple(e for r in rows for e in r))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def diag(cls, values: Sequence[int]) -> IntMatrix:
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def parse(cls, text: str) -> IntMatrix:
        """Parse ``"2,1;0,3"`` (rows split by ';', entries by ',')."""
        text = text.strip()
        if not text:
            raise LatticeError("empty matrix string")
        try:
            rows = [[int(x) for x in row.split(",")] for row in text.split(";")]
        except ValueError as exc:
            raise LatticeError(f"malformed matrix {text!r}: {exc}") from None
        return cls.from_rows(rows)

    def __str__(self) -> str:
        return ";".join(",".join(str(e) for e in row) for row in self.to_lists())

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_lists(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    @property
    def T(self) -> IntMatrix:
        return IntMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)], self.rows
        )

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise LatticeError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        a, b = self.to_lists(), other.to_lists()
        out = [
            [sum(a[i][k] * b[k][j] for k in range(self.cols)) for j in range(other.cols)]
            for i in range(self.rows)
        ]
        return IntMatrix.from_rows(out, other.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def det(self) -> int:
        """Determinant by Bareiss fraction-free elimination."""
        if not self.is_square():
            raise LatticeError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        m = self.to_lists()
        sign, prev = 1, 1
        for k in range(n - 1):
            if m[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
                if swap is None:
                    return 0
                m[k], m[swap] = m[swap], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]


def _divides(a: int, b: int) -> bool:
    if a == 0:
        return b == 0
    return b % a == 0


@dataclass(frozen=True, eq=False)
class DivisorChain:
    """Tuple r_1 | r_2 | ... | r_k of nonnegative integers.

    Zero entries may only trail (every integer divides 0). Two chains compare
    equal when they agree after dropping entries equal to 1.
    """

    moduli: tuple[int, ...]

    def __post_init__(self):
        moduli = tuple(int(m) for m in self.moduli)
        if any(m < 0 for m in moduli):
            raise LatticeError(f"negative modulus in divisor chain {moduli}")
        for a, b in zip(moduli, moduli[1:]):
            if not _divides(a, b):
                raise LatticeError(f"{moduli} is not a divisor chain: {a} does not divide {b}")
        object.__setattr__(self, "moduli", moduli)

    def canonical(self) -> tuple[int, ...]:
        return tuple(m for m in self.moduli if m != 1)

    def __eq__(self, other):
        if isinstance(other, DivisorChain):
            return self.canonical() == other.canonical()
        return NotImplemented

    def __hash__(self):
        return hash(self.canonical())

    def __len__(self):
        return len(self.moduli)

    def __iter__(self):
        return iter(self.moduli)

    def __getitem__(self, i):
        return self.moduli[i]

    def order(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    def __repr__(self):
        return f"DivisorChain{self.moduli}"


@dataclass(frozen=True)
class FinAbGroup:
    """Z^free_rank x Z/t_1 x ... x Z/t_k in invariant-factor form (all t_i > 1)."""

    free_rank: int
    torsion: DivisorChain

    def __post_init__(self):
        if self.free_rank < 0:
            raise LatticeError("free rank must be nonnegative")
        torsion = self.torsion
        if not isinstance(torsion, DivisorChain):
            torsion = DivisorChain(tuple(torsion))
        if any(t <= 0 for t in torsion.moduli):
            raise LatticeError("torsion factors must be positive")
        object.__setattr__(self, "torsion", DivisorChain(torsion.canonical()))

    @classmethod
    def trivial(cls) -> FinAbGroup:
        return cls(0, DivisorChain(()))

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion.moduli

    def order(self) -> int | None:
        """Group order, or None if infinite."""
        return None if self.free_rank else self.torsion.order()

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{t}" for t in self.torsion.moduli)
        return " x ".join(parts) if parts else "0"

    def as_mu(self) -> str:
        """Render a finite group as a product of roots-of-unity groups, e.g. ``mu_2 x mu_4``."""
        if self.free_rank:
            raise LatticeError("not a finite diagonalizable group")
        return " x ".join(f"mu_{t}" for t in self.torsion.moduli) or "1"

    @classmethod
    def parse(cls, text: str) -> FinAbGroup:
        """Inverse of ``str``: ``"Z^2 x Z/2 x Z/4"``, ``"Z"``, ``"0"``."""
        text = text.strip()
        if text in ("0", "1", ""):
            return cls.trivial()
        free, torsion = 0, []
        for part in text.split("x"):
            part = part.strip().replace(" ", "")
            try:
                if part == "Z":
                    free += 1
                elif part.startswith("Z^"):
                    free += int(part[2:])
                elif part.startswith("Z/"):
                    torsion.append(int(part[2:]))
                else:
                    raise ValueError(part)
            except ValueError:
                raise LatticeError(f"cannot parse abelian group factor {part!r} in {text!r}") from None
        if any(t <= 0 for t in torsion):
            raise LatticeError(f"torsion moduli must be positive in {text!r}")
        return cls(free, normalize_divisor_chain(torsion) if torsion else DivisorChain(()))


@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    factors: DivisorChain


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    """Return U, D, V with U @ A @ V == D, U and V unimodular, D in Smith form.

    ``factors`` holds all min(rows, cols) diagonal entries of D, 1s and
    trailing 0s included.
    """
    m, n = A.rows, A.cols
    D = A.to_lists()
    U = IntMatrix.identity(m).to_lists()
    V = IntMatrix.identity(n).to_lists()

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):
        # row_dst += q * row_src
        D[dst] = [x + q * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, q):
        for row in D:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            nonzero = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not nonzero:
                break
            _, pi, pj = min(nonzero)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(t, i, -(D[i][t] // p))
                    clean = clean and D[i][t] == 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(t, j, -(D[t][j] // p))
                    clean = clean and D[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(bad, t, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]

    factors = DivisorChain(tuple(D[i][i] for i in range(min(m, n))))
    return SmithDecomposition(
        IntMatrix.from_rows(U, m),
        IntMatrix.from_rows(D, n),
        IntMatrix.from_rows(V, n),
        factors,
    )


def invariant_factors(A: IntMatrix) -> DivisorChain:
    return smith_normal_form(A).factors


def normalize_divisor_chain(moduli: Iterable[int]) -> DivisorChain:
    """Invariant-factor chain of the product of cyclic groups Z/m for m in ``moduli``."""
    moduli = [int(m) for m in moduli]
    if any(m <= 0 for m in moduli):
        raise LatticeError(f"moduli must be positive, got {moduli}")
    if not moduli:
        return DivisorChain(())
    return smith_normal_form(IntMatrix.diag(moduli)).factors


def coker_structure(A: IntMatrix) -> FinAbGroup:
    """Structure of Z^rows / A(Z^cols)."""
    factors = smith_normal_form(A).factors.moduli
    nonzero = [f for f in factors if f]
    return FinAbGroup(A.rows - len(nonzero), DivisorChain(tuple(f for f in nonzero if f > 1)))


def torus_kernel(A: IntMatrix) -> FinAbGroup:
    """Kernel mu_r of the isogeny of tori with cocharacter matrix ``A``."""
    if not A.is_square():
        raise LatticeError(f"torus map must be square, got {A.rows}x{A.cols}")
    if A.det() == 0:
        raise LatticeError("not an isogeny: singular cocharacter matrix")
    return coker_structure(A)


def invariants_from_orders(orders: Sequence[int]) -> DivisorChain:
    """Invariant factors of a finite abelian group from the orders of its elements.

    Uses only the census #{x : ord(x) divides p^j} for each prime p, which
    determines the p-primary partition.
    """
    size = len(orders)
    chains: list[list[int]] = []
    for p in _prime_factors(size):
        top = 0
        while size % p ** (top + 1) == 0:
            top += 1
        ranks = [0]
        j = 0
        while ranks[-1] < top:
            j += 1
            count = sum(1 for o in orders if p ** j % o == 0)
            ranks.append(_exact_log(count, p))
        # conjugate partition: ranks[j] - ranks[j-1] factors have exponent >= j
        at_least = [ranks[k] - ranks[k - 1] for k in range(1, len(ranks))] + [0]
        exps = []
        for k in range(len(at_least) - 1):
            exps.extend([k + 1] * (at_least[k] - at_least[k + 1]))
        chains.append([p ** e for e in sorted(exps, reverse=True)])
    length = max((len(c) for c in chains), default=0)
    out = []
    for i in range(length):
        f = 1
        for c in chains:
            if i < len(c):
                f *= c[i]
        out.append(f)
    return DivisorChain(tuple(reversed(out)))


def torus_points_kernel_oracle(A: IntMatrix, M: int) -> FinAbGroup:
    """Brute force: the subgroup {x in (Z/M)^n : A x = 0 mod M} and its structure."""
    if not A.is_square():
        raise LatticeError("oracle expects a square matrix")
    if M < 1:
        raise LatticeError("modulus must be positive")
    n = A.rows
    if n == 0:
        return FinAbGroup.trivial()
    mat = [[a % M for a in row] for row in A.to_lists()]
    # one broadcast axis per coordinate, so no (n, M^n) index array is built
    axes = [np.arange(M, dtype=np.int64).reshape((1,) * j + (M,) + (1,) * (n - j - 1)) for j in range(n)]
    ok = np.ones((M,) * n, dtype=bool)
    for row in mat:
        ok &= sum(a * ax for a, ax in zip(row, axes)) % M == 0
    hits = np.vstack(np.nonzero(ok))
    g = np.gcd.reduce(np.vstack([hits, np.full(hits.shape[1], M)]), axis=0)
    orders = [M // int(x) for x in g]
    return FinAbGroup(0, invariants_from_orders(orders))


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _exact_log(x: int, p: int) -> int:
    k = 0
    while x > 1:
        if x % p:
            raise LatticeError(f"{x} is not a power of {p}; orders do not form a group")
        x //= p
        k += 1
    return k


def gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g
