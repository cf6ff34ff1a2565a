"""
Pure states, product states and the seeded random stream.

A ProductState keeps its factors so that local perturbations can act
factor-wise; the assembled vector is always recomputed from them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from entsep.errors import InvalidInputError
from entsep.models.density import Grouping, PartitionSpec
from entsep.numerics import kron

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    """
    Normalised state vector.

    Attributes:
        amplitudes: N complex amplitudes with Σ|a|² = 1.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(a)
        if a.size == 0 or abs(norm - 1.0) > NORM_TOL:
            raise InvalidInputError(f"pure state must be normalised, got norm {norm:.12g}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, vector: np.ndarray) -> "PureState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise InvalidInputError("cannot normalise the zero vector")
        return cls(v / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    def overlap(self, other: "PureState") -> complex:
        """⟨self|other⟩."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class ProductState:
    """
    Product of pure factors over the groups of a grouping.

    Attributes:
        partition: The base partition.
        grouping: Which subsystems each factor covers.
        factors: One PureState per group, in group order.
    """

    partition: PartitionSpec
    grouping: Grouping
    factors: Tuple[PureState, ...]
    assembled: PureState = field(init=False)

    def __post_init__(self) -> None:
        dims = self.grouping.coarse_dims(self.partition)
        if len(self.factors) != len(dims) or any(f.dim != d for f, d in zip(self.factors, dims)):
            raise InvalidInputError(
                f"factor dimensions {[f.dim for f in self.factors]} do not match grouping dims {dims}"
            )
        tensor = kron(*(f.amplitudes for f in self.factors))
        vector = self.grouping.from_group_order(tensor, self.partition)
        object.__setattr__(self, "assembled", PureState.normalized(vector))

    @property
    def dim(self) -> int:
        return self.partition.total_dim


@dataclass
class RngStream:
    """
    Seeded, splittable random stream.

    Identical seeds give bit-identical sample sequences. ``split`` derives
    independent child streams so parallel work stays reproducible.

    Attributes:
        seed: 64-bit seed (or the spawn key source for children).
    """

    seed: int
    _sequence: Optional[np.random.SeedSequence] = field(default=None, repr=False)
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self._sequence is None:
            self._sequence = np.random.SeedSequence(int(self.seed) & (2**64 - 1))
        self.generator = np.random.Generator(np.random.PCG64(self._sequence))

    def split(self, n: int) -> List["RngStream"]:
        """Return ``n`` independent child streams."""
        return [RngStream(self.seed, child) for child in self._sequence.spawn(n)]

    def normal(self, size, scale: float = 1.0) -> np.ndarray:
        return self.generator.normal(0.0, scale, size)

    def complex_normal(self, size) -> np.ndarray:
        """i.i.d. complex standard normals (unit variance per component)."""
        g = self.generator
        return g.standard_normal(size) + 1j * g.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def dirichlet(self, alpha) -> np.ndarray:
        return self.generator.dirichlet(alpha)

    def integers(self, low: int, high: int, size=None):
        return self.generator.integers(low, high, size)
