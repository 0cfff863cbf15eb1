from collections import Counter, defaultdict
from typing import Dict, List, Optional, Sequence
from ..models.table import ContingencyTable
from ..models.lattice import DesignMatrix
from ..models.instance import InstanceFamily, ModelInstance
from ..utils.config_manager import config_manager
from ..utils.errors import CapacityError, NumericError
from ..utils.logger import get_logger
from .tables import positive_cells

logger = get_logger('instances')


def _positive_masks(design: DesignMatrix) -> List[int]:
    """Bitmask of the cells where each generator is positive."""
    masks = []
    for j in range(len(design.param_names)):
        mask = 0
        for x, row in enumerate(design.entries):
            if row[j] > 0:
                mask |= 1 << x
        masks.append(mask)
    return masks


def _restrict(design: DesignMatrix, support: int) -> DesignMatrix:
    rows = [x for x in range(len(design.cells)) if support >> x & 1]
    columns = [j for j in range(len(design.param_names)) if any(design.entries[x][j] > 0 for x in rows)]
    return DesignMatrix(
        cells=[design.cells[x] for x in rows],
        param_names=[design.param_names[j] for j in columns],
        entries=[[design.entries[x][j] for j in columns] for x in rows],
    )


def _membership(support: int, n: int) -> tuple:
    return tuple(0 if support >> x & 1 else 1 for x in range(n))


def enumerate_instances(M_max: DesignMatrix, model_name: str = '',
                        max_generators: Optional[int] = None) -> List[ModelInstance]:
    """All distinct nonempty supports reachable by zeroing subsets of generators.

    The support for a zeroed set Z is the set of cells where every generator
    in Z vanishes. Zeroed sets are grown one generator at a time and merged
    by the union of their positive cells, which visits each distinct support
    once instead of all 2^u subsets.
    """
    limit = max_generators or config_manager.get_budget('enumeration_max_generators')
    u = len(M_max.param_names)
    if u > limit:
        raise CapacityError('enumeration_max_generators', limit,
                            f"Cannot enumerate instances of {u} generators")

    n = len(M_max.cells)
    full = (1 << n) - 1
    unions = {0}
    for mask in _positive_masks(M_max):
        unions |= {covered | mask for covered in unions}
    supports = {full & ~covered for covered in unions} - {0}

    ordered = sorted(supports, key=lambda s: (-bin(s).count('1'), _membership(s, n)))
    seen_in_class: Dict[int, int] = defaultdict(int)
    instances = []
    for support in ordered:
        z = n - bin(support).count('1')
        seen_in_class[z] += 1
        label = f'{model_name}_0' if z == 0 else f'{model_name}_{z}_{seen_in_class[z]}'
        instances.append(ModelInstance(support=support, zero_cell_count=z,
                                       restricted_design=_restrict(M_max, support),
                                       label=label, model_name=model_name))
    logger.info(f"{model_name or 'model'}: {len(instances)} instances from {u} generators")
    return instances


def consistent_instances(instances: Sequence[ModelInstance], table: ContingencyTable) -> List[ModelInstance]:
    """Instances whose support contains every positive-count cell.

    Members that are alone in their zero-cell class are relabelled MODEL_z.
    """
    needed = positive_cells(table)
    kept = [inst for inst in instances if needed <= set(inst.cells)]
    per_class = Counter(inst.zero_cell_count for inst in kept)
    relabelled = []
    for inst in kept:
        if per_class[inst.zero_cell_count] == 1:
            inst = inst.relabel(f'{inst.model_name}_{inst.zero_cell_count}')
        relabelled.append(inst)
    logger.info(f"{len(relabelled)} of {len(instances)} instances are consistent with the data")
    return relabelled


def instance_prior_weights(instances: Sequence[ModelInstance], xi: float,
                           model_name: Optional[str] = None) -> InstanceFamily:
    """q_h = xi^z (1-xi)^(|A|-z) / C(xi), z the number of zero cells of instance h."""
    if not 0 < xi < 1:
        raise NumericError(f"xi must lie in (0, 1), got {xi}")
    if not instances:
        raise ValueError("Cannot weight an empty instance list")

    n_cells = instances[0].size + instances[0].zero_cell_count
    raw = {inst.label: xi ** inst.zero_cell_count * (1 - xi) ** (n_cells - inst.zero_cell_count)
           for inst in instances}
    normalizer = sum(raw.values())
    weights = {label: value / normalizer for label, value in raw.items()}
    return InstanceFamily(
        model_name=model_name if model_name is not None else instances[0].model_name,
        instances=tuple(instances),
        xi=xi,
        weights=weights,
        normalizer=normalizer,
        n_cells=n_cells,
    )


def count_by_zero_cells(instances: Sequence[ModelInstance]) -> Dict[int, int]:
    counts = Counter(inst.zero_cell_count for inst in instances)
    return {z: counts[z] for z in sorted(counts)}


def prior_weight_table(families: Dict[str, Sequence[ModelInstance]],
                       consistent: Dict[str, Sequence[ModelInstance]],
                       xis: Sequence[float]) -> List[Dict[str, float]]:
    """Prior weight of every consistent instance for each xi (one row per xi)."""
    rows = []
    for xi in xis:
        row = {'xi': xi}
        for name, instances in families.items():
            family = instance_prior_weights(instances, xi, model_name=name)
            restricted = family.restricted_to(consistent[name])
            for inst in restricted.instances:
                row[inst.label] = restricted.weight(inst)
        rows.append(row)
    return rows
