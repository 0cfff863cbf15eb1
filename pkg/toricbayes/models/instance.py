from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Tuple
from .table import CellIndex
from .lattice import DesignMatrix


@dataclass(frozen=True)
class ModelInstance:
    """An exponential model on a restricted support of a toric model."""
    support: int                  # bitmask over the canonical cell order
    zero_cell_count: int          # |A| - |support|
    restricted_design: DesignMatrix
    label: str
    model_name: str = ''

    @property
    def cells(self) -> Tuple[CellIndex, ...]:
        return self.restricted_design.cells

    @property
    def size(self) -> int:
        return bin(self.support).count('1')

    def contains(self, index: int) -> bool:
        return bool(self.support >> index & 1)

    def relabel(self, label: str) -> 'ModelInstance':
        return replace(self, label=label)


@dataclass(frozen=True)
class InstanceFamily:
    """Instances of one model with their prior weights q_h.

    ``weights`` are always the weights of the complete family, so a family
    restricted to the data-consistent instances keeps the unnormalised q_h.
    """
    model_name: str
    instances: Tuple[ModelInstance, ...]
    xi: float
    weights: Dict[str, float]
    normalizer: float
    n_cells: int
    complete: bool = True

    def weight(self, instance: ModelInstance) -> float:
        return self.weights[instance.label]

    @property
    def total_weight(self) -> float:
        return sum(self.weights[inst.label] for inst in self.instances)

    def full_support_instance(self) -> ModelInstance:
        for inst in self.instances:
            if inst.zero_cell_count == 0:
                return inst
        raise LookupError(f"No full-support instance in the {self.model_name} family")

    def restricted_to(self, instances: Iterable[ModelInstance]) -> 'InstanceFamily':
        """Same weights and normaliser, fewer instances (matched by support)."""
        kept = tuple(instances)
        by_support = {inst.support: self.weights[inst.label] for inst in self.instances}
        for inst in kept:
            if inst.support not in by_support:
                raise KeyError(f"Instance {inst.label} is not part of the {self.model_name} family")
        return replace(self, instances=kept, weights={inst.label: by_support[inst.support] for inst in kept},
                       complete=False)

    def summary(self) -> List[Dict]:
        return [
            {'label': inst.label, 'z': inst.zero_cell_count, 'weight': self.weights[inst.label]}
            for inst in self.instances
        ]
