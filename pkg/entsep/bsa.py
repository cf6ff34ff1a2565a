"""
Best separable approximation by iterative linear programming.

Every iteration builds an LP whose columns are the Liouville vectors of
sampled pure states: product states of the mode's groupings (cost 0) and
generic states (cost 1). The right-hand side is the Liouville vector of ρ,
so an optimal solution writes ρ as a convex mixture that puts the least
possible weight B on non-product states. The basis of the previous
iteration is carried over verbatim and used as a warm start, which makes
B_t non-increasing; its support vertices are also perturbed with a width
that shrinks geometrically, refining the vertex set locally. The
eigenvectors of the current entangled mixture are fed back as columns too,
so the entangled component can settle on its exact range.

Within an iteration the simplex multipliers y price further columns: a
product state |p⟩ enters when ⟨p|Y|p⟩ > 0 and a generic state |v⟩ when
⟨v|Y|v⟩ > 1, with Y = Σ y_k g_k. Those LPs are re-solved from the previous
basis up to ``pricing_rounds`` times.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from entsep.errors import InvalidInputError, LpBreakdownError
from entsep.liouville import GeneratorBasis, build_basis
from entsep.lp import LpProblem, LpSolution, lp_solve, lp_warm_solve
from entsep.models.decomposition import BsaConfig, BsaDecomposition, PptResult, VerificationReport
from entsep.models.density import DensityMatrix, Grouping, PartitionSpec, SeparabilityMode
from entsep.models.states import ProductState, PureState, RngStream
from entsep.numerics import eig_hermitian, frobenius, min_eigenvalue, partial_transpose, rank_with_tolerance
from entsep.sampling import haar_random_batch, random_unitary_batch

logger = logging.getLogger(__name__)

PPT_TOL = 1e-10
PRODUCT_SV_TOL = 1e-8
PRICING_TOL = 1e-8


def rank_bound(mode: SeparabilityMode, partition: PartitionSpec) -> int:
    """
    Maximal rank of an essentially entangled component.

    N − Σ N_k + K − 1 evaluated for every grouping of the mode; the minimum
    is returned since each grouping excludes its own product states.
    """
    mode.validate(partition)
    return min(g.rank_bound(partition) for g in mode.groupings)


def _state_vectors(vertices: Sequence, dim: int, what: str) -> np.ndarray:
    rows = []
    for v in vertices:
        if isinstance(v, ProductState):
            v = v.assembled
        if isinstance(v, PureState):
            v = v.amplitudes
        rows.append(np.asarray(v, dtype=complex).reshape(-1))
    if not rows:
        return np.zeros((0, dim), dtype=complex)
    vectors = np.array(rows)
    if vectors.shape[1] != dim:
        raise InvalidInputError(f"{what} vertices have dimension {vectors.shape[1]}, expected {dim}")
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise InvalidInputError(f"{what} vertices must be normalised")
    return vectors


def _problem_from_vectors(
    target: np.ndarray, product: np.ndarray, entangled: np.ndarray, basis: GeneratorBasis
) -> LpProblem:
    columns = [basis.vectorize_states(v) for v in (product, entangled) if len(v)]
    a = np.hstack(columns) if columns else np.zeros((basis.size, 0))
    c = np.concatenate([np.zeros(len(product)), np.ones(len(entangled))])
    return LpProblem(a, target, c)


def build_lp(rho: DensityMatrix, product_vertices: Sequence, entangled_vertices: Sequence, basis: GeneratorBasis) -> LpProblem:
    """
    LP with one column per vertex, product columns first.

    Vertices may be ProductState, PureState or raw normalised vectors.

    Raises:
        InvalidInputError: On a dimension mismatch between ρ, the basis and the vertices.
    """
    if basis.dim != rho.dim:
        raise InvalidInputError(f"basis dimension {basis.dim} does not match state dimension {rho.dim}")
    product = _state_vectors(product_vertices, rho.dim, "product")
    entangled = _state_vectors(entangled_vertices, rho.dim, "entangled")
    return _problem_from_vectors(basis.vectorize_matrix(rho.matrix), product, entangled, basis)


def _assemble_products(partition: PartitionSpec, grouping: Grouping, factors: List[np.ndarray]) -> np.ndarray:
    """Batched kron of factor rows, permuted back to the natural subsystem order."""
    k = factors[0].shape[0]
    out = factors[0]
    for f in factors[1:]:
        out = (out[:, :, None] * f[:, None, :]).reshape(k, -1)
    ordered_dims = [partition.subsystem_dims[i] for i in grouping.order]
    tensor = out.reshape([k] + ordered_dims)
    tensor = np.transpose(tensor, [0] + [1 + int(a) for a in np.argsort(grouping.order)])
    return tensor.reshape(k, -1)


def product_factors(vector: np.ndarray, partition: PartitionSpec, grouping: Grouping) -> Optional[List[np.ndarray]]:
    """
    Factors of ``vector`` if it is a product over ``grouping``, else None.

    A vector is product when every group-versus-rest matricisation has
    rank one (second singular value below PRODUCT_SV_TOL).
    """
    tensor = grouping.to_group_order(vector, partition)
    factors = []
    for axis in range(grouping.n_groups):
        mat = np.moveaxis(tensor, axis, 0).reshape(tensor.shape[axis], -1)
        u, s, _ = np.linalg.svd(mat, full_matrices=False)
        if s.size > 1 and s[1] > PRODUCT_SV_TOL * max(s[0], 1.0):
            return None
        factors.append(u[:, 0])
    return factors


@dataclass
class _ProductBlock:
    grouping_index: int
    factors: List[np.ndarray]
    vectors: np.ndarray


@dataclass
class _VertexPool:
    """Columns of one iteration's LP, product blocks before entangled blocks."""

    partition: PartitionSpec
    groupings: Tuple[Grouping, ...]
    product_blocks: List[_ProductBlock] = field(default_factory=list)
    entangled_blocks: List[np.ndarray] = field(default_factory=list)

    def add_products(self, grouping_index: int, factors: List[np.ndarray]) -> None:
        if factors[0].shape[0] == 0:
            return
        vectors = _assemble_products(self.partition, self.groupings[grouping_index], factors)
        self.product_blocks.append(_ProductBlock(grouping_index, factors, vectors))

    def add_entangled(self, vectors: np.ndarray) -> None:
        if len(vectors):
            self.entangled_blocks.append(np.asarray(vectors, dtype=complex))

    @property
    def n_product(self) -> int:
        return sum(len(b.vectors) for b in self.product_blocks)

    def product_vectors(self) -> np.ndarray:
        if not self.product_blocks:
            return np.zeros((0, self.partition.total_dim), dtype=complex)
        return np.vstack([b.vectors for b in self.product_blocks])

    def entangled_vectors(self) -> np.ndarray:
        if not self.entangled_blocks:
            return np.zeros((0, self.partition.total_dim), dtype=complex)
        return np.vstack(self.entangled_blocks)

    def _locate(self, index: int) -> Tuple[_ProductBlock, int]:
        for block in self.product_blocks:
            if index < len(block.vectors):
                return block, index
            index -= len(block.vectors)
        raise IndexError(index)

    def product_rows(self, indices: Sequence[int]) -> Dict[int, List[np.ndarray]]:
        """Factor rows of the given product columns, grouped by grouping index."""
        rows: Dict[int, List[List[np.ndarray]]] = {}
        for index in indices:
            block, row = self._locate(int(index))
            rows.setdefault(block.grouping_index, []).append([f[row] for f in block.factors])
        return {g: [np.array(col) for col in zip(*members)] for g, members in rows.items()}

    def product_state(self, index: int) -> ProductState:
        block, row = self._locate(int(index))
        factors = tuple(PureState.normalized(f[row]) for f in block.factors)
        return ProductState(self.partition, self.groupings[block.grouping_index], factors)


@dataclass
class _Carry:
    """Vertices handed from one iteration to the next."""

    products: Dict[int, List[np.ndarray]] = field(default_factory=dict)
    entangled: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    product_sources: Dict[int, List[np.ndarray]] = field(default_factory=dict)
    entangled_sources: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    refined: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    basis_size: int = 0


def _clone_products(
    factors: List[np.ndarray], copies: int, width: float, rng: RngStream
) -> List[np.ndarray]:
    clones = []
    for f in factors:
        repeated = np.repeat(f, copies, axis=0)
        u = random_unitary_batch(f.shape[1], width, len(repeated), rng)
        moved = np.einsum("kab,kb->ka", u, repeated)
        clones.append(moved / np.linalg.norm(moved, axis=1, keepdims=True))
    return clones


def _clone_generic(vectors: np.ndarray, copies: int, width: float, rng: RngStream) -> np.ndarray:
    repeated = np.repeat(vectors, copies, axis=0)
    u = random_unitary_batch(vectors.shape[1], width, len(repeated), rng)
    moved = np.einsum("kab,kb->ka", u, repeated)
    return moved / np.linalg.norm(moved, axis=1, keepdims=True)


def _seed_carry(seed: BsaDecomposition, mode: SeparabilityMode, dim: int) -> _Carry:
    carry = _Carry()
    for p in seed.product_vertices:
        if p.grouping not in mode.groupings:
            continue
        g = mode.groupings.index(p.grouping)
        carry.products.setdefault(g, []).append([f.amplitudes for f in p.factors])
    carry.products = {g: [np.array(col) for col in zip(*rows)] for g, rows in carry.products.items()}
    carry.product_sources = carry.products
    ent = np.array([v.amplitudes for v in seed.entangled_vertices]).reshape(-1, dim)
    carry.entangled = ent
    carry.entangled_sources = ent
    return carry


def _classify_eigenvectors(
    rho: DensityMatrix, mode: SeparabilityMode
) -> Tuple[Dict[int, List[List[np.ndarray]]], np.ndarray]:
    vectors = eig_hermitian(rho.matrix).eigenvectors.T
    products: Dict[int, List[List[np.ndarray]]] = {}
    entangled = []
    for v in vectors:
        for g, grouping in enumerate(mode.groupings):
            factors = product_factors(v, rho.partition, grouping)
            if factors is not None:
                products.setdefault(g, []).append(factors)
                break
        else:
            entangled.append(v)
    return products, np.array(entangled).reshape(-1, rho.dim)


def _build_pool(
    rho: DensityMatrix,
    mode: SeparabilityMode,
    config: BsaConfig,
    rng: RngStream,
    carry: _Carry,
    eigen_products: Dict[int, List[List[np.ndarray]]],
    eigen_entangled: np.ndarray,
    fixed: Tuple[int, List[np.ndarray]],
    width: float,
) -> _VertexPool:
    n = rho.dim
    partition = rho.partition
    pool = _VertexPool(partition, mode.groupings)

    # carried vertices first so that their column indices are known
    for g, factors in carry.products.items():
        pool.add_products(g, factors)
    if carry.entangled.size:
        pool.add_entangled(carry.entangled)
    if carry.refined.size:
        pool.add_entangled(carry.refined)

    for g, rows in eigen_products.items():
        pool.add_products(g, [np.array(col) for col in zip(*rows)])
    pool.add_entangled(eigen_entangled)
    pool.add_products(*fixed)

    per_grouping = -(-config.product_count(n) // len(mode.groupings))
    for g, grouping in enumerate(mode.groupings):
        dims = grouping.coarse_dims(partition)
        pool.add_products(g, [haar_random_batch(d, per_grouping, rng) for d in dims])
    pool.add_entangled(haar_random_batch(n, config.entangled_count(n), rng))

    copies = config.clone_count(n)
    if width > 0 and copies > 0:
        # at most sample_cap clones per class in total
        n_sources = sum(len(f[0]) for f in carry.product_sources.values())
        if n_sources:
            per_source = max(1, min(copies, config.sample_cap // n_sources))
            for g, factors in carry.product_sources.items():
                pool.add_products(g, _clone_products(factors, per_source, width, rng))
        if carry.entangled_sources.size:
            per_source = max(1, min(copies, config.sample_cap // len(carry.entangled_sources)))
            pool.add_entangled(_clone_generic(carry.entangled_sources, per_source, width, rng))
    return pool


def _next_carry(pool: _VertexPool, solution: LpSolution, support_tol: float) -> _Carry:
    n_product = pool.n_product
    entangled = pool.entangled_vectors()
    basis = list(solution.basis)
    support = [j for j in basis if solution.x[j] > support_tol]
    carry = _Carry(basis_size=len(basis))
    carry.products = pool.product_rows([j for j in basis if j < n_product])
    carry.entangled = entangled[[j - n_product for j in basis if j >= n_product]]
    carry.product_sources = pool.product_rows([j for j in support if j < n_product])
    carry.entangled_sources = entangled[[j - n_product for j in support if j >= n_product]]
    weights = solution.x[[j for j in support if j >= n_product]]
    if len(weights):
        eig = eig_hermitian(_mixture(carry.entangled_sources, weights))
        keep = eig.eigenvalues > 1e-12 * eig.eigenvalues[0]
        carry.refined = eig.eigenvectors[:, keep].T
    return carry


def _carried_basis(carry: _Carry, pool: _VertexPool, n_rows: int) -> Optional[List[int]]:
    """Column indices of the previous basis inside the new pool."""
    if carry.basis_size != n_rows:
        return None
    n_prod_carried = sum(len(f[0]) for f in carry.products.values())
    n_ent_carried = len(carry.entangled)
    product_idx = list(range(n_prod_carried))
    entangled_idx = [pool.n_product + k for k in range(n_ent_carried)]
    return product_idx + entangled_idx


def _mixture(vectors: np.ndarray, weights: np.ndarray) -> np.ndarray:
    m = (vectors.T * weights) @ vectors.conj()
    return 0.5 * (m + m.conj().T)


def _computational_products(partition: PartitionSpec, mode: SeparabilityMode) -> Tuple[int, List[np.ndarray]]:
    """Computational basis states as product columns of the first grouping."""
    grouping = mode.groupings[0]
    rows = [product_factors(e, partition, grouping) for e in np.eye(partition.total_dim, dtype=complex)]
    return 0, [np.array(col) for col in zip(*rows)]


def _group_tensor(op: np.ndarray, partition: PartitionSpec, grouping: Grouping) -> np.ndarray:
    """op with row and column indices split into the grouping's coarse factors."""
    k = len(partition.subsystem_dims)
    dims = grouping.coarse_dims(partition)
    tensor = op.reshape(tuple(partition.subsystem_dims) * 2)
    order = list(grouping.order)
    tensor = np.transpose(tensor, order + [k + i for i in order])
    return tensor.reshape(tuple(dims) * 2)


def _factor_operator(tensor: np.ndarray, factors: List[np.ndarray], keep: int) -> np.ndarray:
    """Contract every factor but ``keep`` on both sides of the operator."""
    j = len(factors)
    out = tensor
    for m in reversed(range(j)):
        if m != keep:
            out = np.tensordot(out, factors[m], axes=([j + m], [0]))
    for m in reversed(range(j)):
        if m != keep:
            out = np.tensordot(factors[m].conj(), out, axes=([0], [m]))
    return 0.5 * (out + out.conj().T)


def _maximize_product_expectation(
    tensor: np.ndarray, factors: List[np.ndarray], sweeps: int
) -> Tuple[float, List[np.ndarray]]:
    """Alternating top-eigenvector updates of ⟨p|Y|p⟩, one factor at a time."""
    factors = [f / np.linalg.norm(f) for f in factors]
    value = -np.inf
    for _ in range(sweeps):
        previous = value
        for k in range(len(factors)):
            values, vectors = np.linalg.eigh(_factor_operator(tensor, factors, k))
            factors[k] = vectors[:, -1]
            value = float(values[-1])
        if value - previous <= PRICING_TOL:
            break
    return value, factors


def _priced_columns(
    solution: LpSolution,
    basis: GeneratorBasis,
    partition: PartitionSpec,
    mode: SeparabilityMode,
    config: BsaConfig,
    rng: RngStream,
) -> Tuple[Dict[int, List[np.ndarray]], np.ndarray]:
    """
    Columns with negative reduced cost under the current simplex multipliers.

    With Y = Σ y_k g_k a product column |p⟩ prices out when ⟨p|Y|p⟩ > 0 and a
    generic column |v⟩ when ⟨v|Y|v⟩ > 1. Generic columns are the eigenvectors
    of Y above 1; product columns come from alternating maximisation started
    at the factors of the top eigenvector and at random product states.
    """
    y_op = basis.matrix_from(solution.duals)
    y_op = 0.5 * (y_op + y_op.conj().T)
    values, vectors = np.linalg.eigh(y_op)
    entangled = vectors[:, values > 1.0 + PRICING_TOL].T[::-1]

    products: Dict[int, List[np.ndarray]] = {}
    for g, grouping in enumerate(mode.groupings):
        dims = grouping.coarse_dims(partition)
        tensor = _group_tensor(y_op, partition, grouping)
        top = grouping.to_group_order(vectors[:, -1], partition)
        starts = [[
            np.linalg.svd(np.moveaxis(top, axis, 0).reshape(d, -1), full_matrices=False)[0][:, 0]
            for axis, d in enumerate(dims)
        ]]
        starts += [[haar_random_batch(d, 1, rng)[0] for d in dims] for _ in range(config.pricing_starts)]
        found = []
        for start in starts:
            value, factors = _maximize_product_expectation(tensor, start, config.pricing_sweeps)
            if value > PRICING_TOL:
                found.append(factors)
        if found:
            products[g] = [np.array(col) for col in zip(*found)]
    return products, entangled


def _splice_columns(
    problem: LpProblem,
    n_product: int,
    new_products: np.ndarray,
    new_entangled: np.ndarray,
    basis: GeneratorBasis,
) -> LpProblem:
    """Insert product columns after the existing product block and generic ones at the end."""
    blocks = [problem.a[:, :n_product]]
    if len(new_products):
        blocks.append(basis.vectorize_states(new_products))
    blocks.append(problem.a[:, n_product:])
    if len(new_entangled):
        blocks.append(basis.vectorize_states(new_entangled))
    c = np.concatenate([
        np.zeros(n_product + len(new_products)),
        problem.c[n_product:],
        np.ones(len(new_entangled)),
    ])
    return LpProblem(np.hstack(blocks), problem.b, c)


def _entangled_rank(pool: _VertexPool, solution: LpSolution, rel_tol: float) -> int:
    n_product = pool.n_product
    idx = [j for j in solution.basis if j >= n_product and solution.x[j] > 0.0]
    if not idx:
        return 0
    m = _mixture(pool.entangled_vectors()[[j - n_product for j in idx]], solution.x[idx])
    return rank_with_tolerance(m, rel_tol)


def _solve(problem: LpProblem, start: Optional[List[int]], config: BsaConfig, t: int) -> LpSolution:
    if start is not None:
        solution = lp_warm_solve(problem, start, config.feasibility_tol, support_tol=config.support_tol)
    else:
        solution = lp_solve(problem, config.feasibility_tol, support_tol=config.support_tol)
    if not solution.is_optimal:
        # the eigenvectors alone always give a feasible point
        raise LpBreakdownError(f"iteration {t}: LP reported {solution.status.value}")
    return solution


def _decompose(
    rho: DensityMatrix,
    mode: SeparabilityMode,
    config: BsaConfig,
    rng: RngStream,
    seed: Optional[BsaDecomposition],
    warm_start: bool = True,
) -> BsaDecomposition:
    n = rho.dim
    basis = build_basis(n)
    target = basis.vectorize_matrix(rho.matrix)
    eigen_products, eigen_entangled = _classify_eigenvectors(rho, mode)
    pure_input = rank_with_tolerance(rho.matrix, rel_tol=1e-12) == 1
    fixed = _computational_products(rho.partition, mode)
    bound = rank_bound(mode, rho.partition)

    carry = _seed_carry(seed, mode, n) if seed is not None else _Carry()
    width = config.width_0
    history: List[float] = []
    converged = False
    solution: Optional[LpSolution] = None
    pool: Optional[_VertexPool] = None

    for t in range(1, config.max_iterations + 1):
        iteration_width = width if (t > 1 or seed is not None) else 0.0
        pool = _build_pool(rho, mode, config, rng, carry, eigen_products, eigen_entangled, fixed, iteration_width)
        problem = _problem_from_vectors(target, pool.product_vectors(), pool.entangled_vectors(), basis)
        start = _carried_basis(carry, pool, problem.n_rows) if t > 1 and warm_start else None
        solution = _solve(problem, start, config, t)

        rounds = 0
        while (
            rounds < config.pricing_rounds
            and not pure_input
            and solution.objective_value > config.support_tol
        ):
            priced_products, priced_entangled = _priced_columns(solution, basis, rho.partition, mode, config, rng)
            if not priced_products and not len(priced_entangled):
                break
            n_product = pool.n_product
            for g, factors in priced_products.items():
                pool.add_products(g, factors)
            added = pool.n_product - n_product
            pool.add_entangled(priced_entangled)
            problem = _splice_columns(problem, n_product, pool.product_vectors()[n_product:], priced_entangled, basis)
            start = None
            if warm_start and len(solution.basis) == problem.n_rows:
                start = [j if j < n_product else j + added for j in solution.basis]
            solution = _solve(problem, start, config, t)
            rounds += 1

        b_t = float(solution.objective_value)
        history.append(b_t)
        logger.debug(
            "iteration %d: B=%.12g columns=%d pivots=%d warm=%s width=%.3g pricing_rounds=%d",
            t, b_t, problem.n_cols, solution.pivots, solution.warm_started, iteration_width, rounds,
        )
        carry = _next_carry(pool, solution, config.support_tol)

        if b_t <= config.support_tol or pure_input:
            converged = True
            break
        settled = True
        if config.settle_rank and b_t > config.rank_check_floor:
            settled = _entangled_rank(pool, solution, config.rank_rel_tol) <= bound
        if (
            len(history) > config.patience
            and abs(history[-1] - history[-1 - config.patience]) < config.convergence_tol
            and iteration_width <= config.width_floor
            and settled
        ):
            converged = True
            break
        width *= config.width_decay

    return _components(rho, mode, pool, solution, history, converged, config)


def _components(
    rho: DensityMatrix,
    mode: SeparabilityMode,
    pool: _VertexPool,
    solution: LpSolution,
    history: List[float],
    converged: bool,
    config: BsaConfig,
) -> BsaDecomposition:
    n_product = pool.n_product
    x = solution.x
    product_idx = [j for j in solution.basis if j < n_product and x[j] > 0.0]
    entangled_idx = [j for j in solution.basis if j >= n_product and x[j] > 0.0]
    product_vectors = pool.product_vectors()[product_idx]
    entangled_vectors = pool.entangled_vectors()[[j - n_product for j in entangled_idx]]
    a = x[product_idx]
    b = x[entangled_idx]

    B = float(np.sum(b))
    sep_weight = float(np.sum(a))
    rho_sep = None
    if sep_weight > config.support_tol:
        m = _mixture(product_vectors, a)
        rho_sep = DensityMatrix(rho.partition, m / np.trace(m).real)
    rho_ent = None
    if B > config.support_tol:
        m = _mixture(entangled_vectors, b)
        rho_ent = DensityMatrix(rho.partition, m / np.trace(m).real)

    return BsaDecomposition(
        B=B,
        product_weights=a,
        product_vertices=tuple(pool.product_state(j) for j in product_idx),
        entangled_weights=b,
        entangled_vertices=tuple(PureState.normalized(v) for v in entangled_vectors),
        rho_sep=rho_sep,
        rho_ent=rho_ent,
        iterations_used=len(history),
        converged=converged,
        mode=mode,
        history=tuple(history),
    )


def bsa_decompose(
    rho: DensityMatrix,
    mode: SeparabilityMode,
    config: Optional[BsaConfig] = None,
    rng: Optional[RngStream] = None,
    seed: Optional[BsaDecomposition] = None,
) -> BsaDecomposition:
    """
    Split ρ = (1 − B) ρ_sep + B ρ_ent with B minimal.

    Args:
        rho: Input state.
        mode: Groupings whose product states make up the separable set.
        config: Iteration parameters (defaults when omitted).
        rng: Random stream (seed 0 when omitted).
        seed: A decomposition of a nearby state whose vertices start the search.

    Raises:
        LpBreakdownError: If the LP breaks down and the input-perturbation
            retry is disabled or breaks down as well.
    """
    config = config or BsaConfig()
    rng = rng or RngStream(0)
    mode.validate(rho.partition)
    logger.info("decomposing N=%d state over mode %s (%d groupings)", rho.dim, mode.name, len(mode.groupings))
    try:
        result = _decompose(rho, mode, config, rng, seed)
    except LpBreakdownError as exc:
        if not config.perturb_input_on_breakdown:
            raise
        eta = config.breakdown_eta
        logger.warning("LP breakdown (%s); retrying cold on the input mixed with I/N at eta=%g", exc, eta)
        result = _decompose(rho.mixed_with_identity(eta), mode, config, rng, None, warm_start=False)
        result = replace(result, input_perturbation=eta)
    logger.info(
        "decomposition finished: B=%.10g support=%d iterations=%d converged=%s",
        result.B, result.support_size, result.iterations_used, result.converged,
    )
    return result


def verify_decomposition(
    rho: DensityMatrix,
    result: BsaDecomposition,
    config: Optional[BsaConfig] = None,
    optimizer=None,
) -> VerificationReport:
    """
    Post-hoc diagnostics of a decomposition.

    The rank and extremality checks only run when B > rank_check_floor.
    """
    from entsep.analysis.subspace import EntangledSubspace, max_product_overlap

    config = config or BsaConfig()
    residual = frobenius(result.reconstruct() - rho.matrix)
    bound = rank_bound(result.mode, rho.partition)

    ent_rank = None
    rank_ok = None
    overlap = None
    extremal = None
    if result.rho_ent is not None:
        ent_rank = rank_with_tolerance(result.rho_ent.matrix, config.rank_rel_tol)
    if result.rho_ent is not None and result.B > config.rank_check_floor:
        rank_ok = ent_rank <= bound
        subspace = EntangledSubspace.from_density(result.rho_ent, config.rank_rel_tol)
        probe = max_product_overlap(subspace, result.mode, optimizer)
        overlap = probe.overlap
        extremal = overlap < 1.0 - config.extremality_margin

    return VerificationReport(
        reconstruction_residual=residual,
        weight_sum_residual=abs(result.weight_sum - 1.0),
        sep_min_eigenvalue=min_eigenvalue(result.rho_sep.matrix) if result.rho_sep is not None else None,
        ent_min_eigenvalue=min_eigenvalue(result.rho_ent.matrix) if result.rho_ent is not None else None,
        support_size=result.support_size,
        support_cap=rho.dim * rho.dim,
        ent_rank=ent_rank,
        rank_bound=bound,
        rank_ok=rank_ok,
        extremality_overlap=overlap,
        extremality_ok=extremal,
    )


def _bipartition_transpose(rho: DensityMatrix, bipartition: Grouping) -> np.ndarray:
    bipartition.validate(rho.partition)
    if bipartition.n_groups != 2:
        raise InvalidInputError(f"{bipartition.label()} is not a bipartition")
    return partial_transpose(rho.matrix, rho.partition.subsystem_dims, bipartition.groups[1])


def ppt_check(rho: DensityMatrix, bipartition: Grouping) -> PptResult:
    """Partial transpose over the second group and its smallest eigenvalue."""
    lowest = min_eigenvalue(_bipartition_transpose(rho, bipartition))
    return PptResult(is_ppt=lowest >= -PPT_TOL, min_pt_eigenvalue=lowest)


def negativity(rho: DensityMatrix, bipartition: Grouping) -> float:
    """Sum of the magnitudes of the negative partial-transpose eigenvalues."""
    values = eig_hermitian(_bipartition_transpose(rho, bipartition), tol=1e-8).eigenvalues
    return float(-np.sum(values[values < 0.0]))
