"""
Partitions, groupings and density matrices.

A PartitionSpec fixes the subsystem dimensions of the assembly (leftmost
factor is subsystem 0). A Grouping coarsens it into groups whose product
states populate the separable polytope, and a SeparabilityMode is the list
of groupings in use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import prod
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from entsep.errors import InvalidInputError
from entsep.numerics import HERMITIAN_TOL, HermitianEigen, eig_hermitian, require_hermitian


@dataclass(frozen=True)
class PartitionSpec:
    """
    Subsystem dimensions N_1..N_K of a multipartite assembly.

    Attributes:
        subsystem_dims: Dimension of each subsystem, leftmost first.
    """

    subsystem_dims: Tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.subsystem_dims)
        if not dims:
            raise InvalidInputError("a partition needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise InvalidInputError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "subsystem_dims", dims)

    @classmethod
    def of(cls, *dims: int) -> "PartitionSpec":
        """PartitionSpec.of(3, 2, 2)."""
        return cls(tuple(dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.subsystem_dims)

    @property
    def total_dim(self) -> int:
        return prod(self.subsystem_dims)

    @property
    def n_generic_params(self) -> int:
        """N_CG: complex parameters of a generic state vector."""
        return self.total_dim - 1

    @property
    def n_product_params(self) -> int:
        """N_CS: complex parameters of a product state vector."""
        return sum(d - 1 for d in self.subsystem_dims)

    def full_split(self) -> "Grouping":
        """The K-fold grouping with every subsystem on its own."""
        return Grouping(tuple((k,) for k in range(self.n_subsystems)))

    def bipartitions(self) -> List["Grouping"]:
        """All unordered bipartitions, each listed once."""
        k = self.n_subsystems
        out: List[Grouping] = []
        everyone = tuple(range(k))
        for size in range(1, k // 2 + 1):
            for left in combinations(everyone, size):
                right = tuple(i for i in everyone if i not in left)
                # an even split would otherwise appear twice
                if size * 2 == k and 0 not in left:
                    continue
                out.append(Grouping((left, right)))
        return out


@dataclass(frozen=True)
class Grouping:
    """
    A coarsening of a partition into groups of subsystem indices.

    Attributes:
        groups: Disjoint groups covering every subsystem index exactly once.
    """

    groups: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        groups = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        if not groups or any(not g for g in groups):
            raise InvalidInputError("a grouping needs non-empty groups")
        object.__setattr__(self, "groups", groups)

    def validate(self, partition: PartitionSpec) -> None:
        """Check that the groups cover 0..K-1 exactly once."""
        members = sorted(i for g in self.groups for i in g)
        if members != list(range(partition.n_subsystems)):
            raise InvalidInputError(
                f"grouping {self.label()} is not a coarsening of partition {partition.subsystem_dims}"
            )

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def order(self) -> Tuple[int, ...]:
        """Subsystem indices in group order."""
        return tuple(i for g in self.groups for i in g)

    def coarse_dims(self, partition: PartitionSpec) -> Tuple[int, ...]:
        """Hilbert-space dimension of each group."""
        return tuple(prod(partition.subsystem_dims[i] for i in g) for g in self.groups)

    def rank_bound(self, partition: PartitionSpec) -> int:
        """N − Σ M_j + J − 1 for this grouping (equals N_CG − N_CS)."""
        dims = self.coarse_dims(partition)
        return partition.total_dim - sum(dims) + len(dims) - 1

    def to_group_order(self, vector: np.ndarray, partition: PartitionSpec) -> np.ndarray:
        """Reshape a state vector into a tensor with one axis per group."""
        tensor = np.asarray(vector).reshape(partition.subsystem_dims)
        tensor = np.transpose(tensor, self.order)
        return tensor.reshape(self.coarse_dims(partition))

    def from_group_order(self, tensor: np.ndarray, partition: PartitionSpec) -> np.ndarray:
        """Inverse of to_group_order: flatten back to the natural subsystem order."""
        ordered_dims = [partition.subsystem_dims[i] for i in self.order]
        t = np.asarray(tensor).reshape(ordered_dims)
        t = np.transpose(t, np.argsort(self.order))
        return t.reshape(-1)

    def label(self) -> str:
        return "|".join(",".join(str(i) for i in g) for g in self.groups)


@dataclass(frozen=True)
class SeparabilityMode:
    """
    The groupings whose product states populate the separable polytope.

    Attributes:
        name: "k-sep", "bisep-augmented" or "custom".
        groupings: At least one grouping.
    """

    name: str
    groupings: Tuple[Grouping, ...]

    def validate(self, partition: PartitionSpec) -> None:
        if not self.groupings:
            raise InvalidInputError("a separability mode needs at least one grouping")
        for g in self.groupings:
            g.validate(partition)

    @classmethod
    def k_separable(cls, partition: PartitionSpec) -> "SeparabilityMode":
        return cls("k-sep", (partition.full_split(),))

    @classmethod
    def bisep_augmented(cls, partition: PartitionSpec) -> "SeparabilityMode":
        """Full split plus every bipartition."""
        groupings = [partition.full_split()]
        for g in partition.bipartitions():
            if g not in groupings:
                groupings.append(g)
        return cls("bisep-augmented", tuple(groupings))

    @classmethod
    def custom(cls, partition: PartitionSpec, groups: Iterable[Sequence[Sequence[int]]]) -> "SeparabilityMode":
        mode = cls("custom", tuple(Grouping(tuple(tuple(g) for g in grouping)) for grouping in groups))
        mode.validate(partition)
        return mode

    @classmethod
    def from_name(
        cls,
        name: str,
        partition: PartitionSpec,
        custom_groups: Optional[Sequence[Sequence[Sequence[int]]]] = None,
    ) -> "SeparabilityMode":
        """Build a mode from its CLI name."""
        if name == "k-sep":
            return cls.k_separable(partition)
        if name == "bisep-augmented":
            return cls.bisep_augmented(partition)
        if name == "custom":
            if not custom_groups:
                raise InvalidInputError("mode 'custom' needs explicit groupings")
            return cls.custom(partition, custom_groups)
        raise InvalidInputError(f"unknown separability mode '{name}'")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Positive Hermitian unit-trace matrix over a declared partition.

    Attributes:
        partition: Subsystem structure.
        matrix: N x N complex array.
    """

    partition: PartitionSpec
    matrix: np.ndarray
    tol: float = field(default=HERMITIAN_TOL, repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        n = self.partition.total_dim
        if m.shape != (n, n):
            raise InvalidInputError(
                f"matrix shape {m.shape} does not match partition {self.partition.subsystem_dims} (N={n})"
            )
        require_hermitian(m, self.tol, what="density matrix")
        trace = np.trace(m).real
        if abs(trace - 1.0) > self.tol:
            raise InvalidInputError(f"density matrix trace is {trace:.12g}, expected 1")
        lowest = float(eig_hermitian(m, self.tol).eigenvalues[-1])
        if lowest < -self.tol:
            raise InvalidInputError(f"density matrix is not positive: min eigenvalue {lowest:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_array(cls, matrix: np.ndarray, dims: Sequence[int], tol: float = HERMITIAN_TOL) -> "DensityMatrix":
        return cls(PartitionSpec(tuple(dims)), np.asarray(matrix), tol)

    @classmethod
    def from_pure(cls, vector: np.ndarray, dims: Sequence[int]) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(PartitionSpec(tuple(dims)), np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        partition = PartitionSpec(tuple(dims))
        n = partition.total_dim
        return cls(partition, np.eye(n) / n)

    @property
    def dim(self) -> int:
        return self.partition.total_dim

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigen(self) -> HermitianEigen:
        return eig_hermitian(self.matrix, self.tol)

    def mixed_with_identity(self, eta: float) -> "DensityMatrix":
        """(1 − η)ρ + η I/N."""
        n = self.dim
        return DensityMatrix(self.partition, (1.0 - eta) * self.matrix + eta * np.eye(n) / n, self.tol)
