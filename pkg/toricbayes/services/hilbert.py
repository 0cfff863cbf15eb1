"""Minimal Hilbert basis of {t in N^cells : t . k = 0 for every kernel vector k}.

The basis is found by a completion procedure over the lattice program: start
from the unit vectors and repeatedly extend every candidate that is not yet
orthogonal to the kernel by one unit step that moves its residue K t towards
zero (negative scalar product with the step's own residue). Candidates that
dominate an already found generator are pruned. Candidates of total degree d
are settled before degree d + 1 is looked at, so every generator is found in
its own degree and the result is the set of minimal nonzero solutions.

The completion stops at a degree bound read off the extreme rays of the cone
{t >= 0 : K t = 0}. An irreducible vector other than a ray lies in the open
parallelepiped of some simplicial subcone, so its degree is below the sum of
the degrees of at most dim(cone) rays.
"""
from fractions import Fraction
from itertools import combinations
from math import comb, prod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
from ..models.lattice import CheckResult, DesignMatrix, HilbertBasis, KernelBasis, VerificationReport
from ..utils.config_manager import config_manager
from ..utils.errors import CapacityError
from ..utils.intmath import as_int_matrix, dot, left_kernel, primitive
from ..utils.logger import get_logger

logger = get_logger('hilbert')


def _dominates(t: Sequence[int], g: Sequence[int]) -> bool:
    return all(a >= b for a, b in zip(t, g))


def _residue(t: Sequence[int], K: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    return tuple(dot(k, t) for k in K)


def extreme_rays(K: KernelBasis, max_supports: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Primitive extreme rays of the cone {t >= 0 : K t = 0}, sorted.

    A ray is a nonnegative kernel vector of K with minimal support, so its
    support has at most rank(K) + 1 cells and the columns of K on that
    support have a one-dimensional null space.
    """
    n = len(K.cells)
    limit = max_supports or config_manager.get_budget('hilbert_max_ray_supports')
    sizes = range(1, min(K.rank + 1, n) + 1)
    searched = sum(comb(n, size) for size in sizes)
    if searched > limit:
        raise CapacityError('hilbert_max_ray_supports', limit,
                            f"Extreme ray search needs {searched} supports on {n} cells")

    rays: List[Tuple[int, ...]] = []
    supports: List[frozenset] = []
    for size in sizes:
        for subset in combinations(range(n), size):
            if any(s <= set(subset) for s in supports):
                continue
            A = as_int_matrix([[k[x] for k in K.vectors] for x in subset], K.rank)
            local = left_kernel(A)
            if len(local) != 1:
                continue
            v = local[0]
            if not (all(e > 0 for e in v) or all(e < 0 for e in v)):
                continue
            ray = [0] * n
            for x, e in zip(subset, v):
                ray[x] = abs(e)
            rays.append(primitive(ray))
            supports.append(frozenset(subset))
    return sorted(rays)


def degree_bound(K: KernelBasis, rays: Sequence[Tuple[int, ...]]) -> int:
    """Largest total degree a minimal generator can have."""
    dimension = len(K.cells) - K.rank
    degrees = sorted((sum(r) for r in rays), reverse=True)
    return sum(degrees[:dimension])


def hilbert_basis(K: KernelBasis, budgets: Optional[Dict[str, int]] = None) -> HilbertBasis:
    """Minimal Hilbert basis, generators sorted lexicographically."""
    budgets = budgets or config_manager.get_budgets()
    max_generators = budgets['hilbert_max_generators']
    max_degree = budgets['hilbert_max_degree']
    max_frontier = budgets['hilbert_max_frontier']

    n = len(K.cells)
    units = [tuple(1 if i == x else 0 for i in range(n)) for x in range(n)]
    if not K.vectors:
        return HilbertBasis(cells=K.cells, generators=tuple(sorted(units)))

    try:
        rays = extreme_rays(K, budgets['hilbert_max_ray_supports'])
        bound = degree_bound(K, rays)
        logger.debug(f"{len(rays)} extreme rays, generators have degree at most {bound}")
    except CapacityError as e:
        logger.warning(f"{e}; completion runs until no candidate is left")
        bound = max_degree + 1

    steps = [_residue(e, K.vectors) for e in units]
    generators: List[Tuple[int, ...]] = []
    frontier = set(units)
    degree = 1

    while frontier and degree <= bound:
        if degree > max_degree:
            raise CapacityError('hilbert_max_degree', max_degree,
                                f"Hilbert completion still has {len(frontier)} candidates at degree {degree}")

        pending = []
        for t in sorted(frontier):
            residue = _residue(t, K.vectors)
            if not any(residue):
                if not any(_dominates(t, g) for g in generators):
                    generators.append(t)
            else:
                pending.append((t, residue))
        if len(generators) > max_generators:
            raise CapacityError('hilbert_max_generators', max_generators,
                                f"Hilbert basis has more than {max_generators} generators")

        successors = set()
        for t, residue in pending:
            for x, step in enumerate(steps):
                if dot(residue, step) >= 0:
                    continue
                s = t[:x] + (t[x] + 1,) + t[x + 1:]
                if s in successors or any(_dominates(s, g) for g in generators):
                    continue
                successors.add(s)
            if len(successors) > max_frontier:
                raise CapacityError('hilbert_max_frontier', max_frontier,
                                    f"Hilbert completion frontier exceeded at degree {degree + 1}")

        logger.debug(f"Completion degree {degree}: {len(generators)} generators, {len(successors)} candidates next")
        frontier = successors
        degree += 1

    if frontier:
        logger.debug(f"Dropping {len(frontier)} candidates above degree {bound}")
    generators.sort()
    uncovered = [cell for x, cell in enumerate(K.cells) if all(g[x] == 0 for g in generators)]
    if uncovered:
        names = ', '.join(f'({c.row},{c.col})' for c in uncovered)
        logger.warning(f"No generator is positive on cells {names}")
    logger.info(f"Hilbert basis: {len(generators)} generators on {n} cells")
    return HilbertBasis(cells=K.cells, generators=tuple(generators))


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def decompose(t: Tuple[int, ...], generators: Sequence[Tuple[int, ...]],
              memo: Optional[Dict] = None) -> Optional[List[int]]:
    """Indices of generators summing to t, or None when t is not in the generated monoid."""
    memo = {} if memo is None else memo
    if not any(t):
        return []
    if t in memo:
        return memo[t]
    memo[t] = None
    for j, g in enumerate(generators):
        if any(g) and _dominates(t, g):
            rest = decompose(tuple(a - b for a, b in zip(t, g)), generators, memo)
            if rest is not None:
                memo[t] = [j] + rest
                break
    return memo[t]


def verify_hilbert(basis: HilbertBasis, K: KernelBasis, bound: int) -> VerificationReport:
    """Orthogonality, pairwise irreducibility and completeness up to total degree ``bound``."""
    generators = list(basis.generators)
    n = len(basis.cells)

    orthogonality = CheckResult('orthogonality', True)
    for g in generators:
        if any(_residue(g, K.vectors)):
            orthogonality = CheckResult('orthogonality', False, witness=(g,),
                                        detail='generator not orthogonal to the kernel')
            break

    minimality = CheckResult('minimality', True)
    for a_index, g in enumerate(generators):
        reducer = None
        for b_index, a in enumerate(generators):
            if a_index == b_index:
                continue
            diff = tuple(x - y for x, y in zip(g, a))
            if all(v >= 0 for v in diff) and not any(_residue(diff, K.vectors)):
                reducer = (g, a)
                break
        if reducer:
            minimality = CheckResult('minimality', False, witness=reducer,
                                     detail='first generator is reducible by the second')
            break

    completeness = CheckResult('completeness', True)
    memo: Dict = {}
    for total in range(1, bound + 1):
        witness = None
        for t in sorted(_compositions(total, n)):
            if any(_residue(t, K.vectors)):
                continue
            if decompose(t, generators, memo) is None:
                witness = t
                break
        if witness is not None:
            completeness = CheckResult('completeness', False, witness=(witness,),
                                       detail='orthogonal vector not generated by the basis')
            break

    report = VerificationReport(checks=(orthogonality, minimality, completeness))
    logger.info(f"Hilbert verification up to degree {bound}: {'pass' if report.passed else 'FAIL'}")
    return report


def maximal_design(basis: HilbertBasis) -> DesignMatrix:
    """Design whose columns are the generators (the maximal toric parameterisation)."""
    names = [f'zeta_{j}' for j in range(1, basis.size + 1)]
    entries = [[g[x] for g in basis.generators] for x in range(len(basis.cells))]
    return DesignMatrix(cells=basis.cells, param_names=names, entries=entries)


def monomial_point(design: DesignMatrix, zeta: Sequence) -> List:
    """q(x) = prod_j zeta_j^{S_j(x)}; exact when zeta holds ints or Fractions."""
    if len(zeta) != len(design.param_names):
        raise ValueError(f"Expected {len(design.param_names)} parameters, got {len(zeta)}")
    return [prod(z ** e for z, e in zip(zeta, row)) for row in design.entries]


def rational_point(design: DesignMatrix, zeroed: Sequence[int] = ()) -> List[Fraction]:
    """Monomial point with every surviving zeta set to 1 and the ``zeroed`` ones to 0."""
    zeroed = set(zeroed)
    zeta = [Fraction(0) if j in zeroed else Fraction(1) for j in range(len(design.param_names))]
    return monomial_point(design, zeta)
