"""Core domain types: the voxel space, its three element kinds, and ID resolution.

The world holds exactly three kinds of elements. Items are passive material,
receptors are fixed storage positions on the voxel grid, and agents are the
moving entities that load, transport, unload and assemble. Everything else in
the package resolves identifiers against the registries defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InsufficientItems, UnknownAgentType, UnknownLocation


@dataclass(frozen=True, order=True)
class VoxelCoord:
    """Integer voxel position; z = 0 is ground level."""

    x: int
    y: int
    z: int = 0

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0 or self.z < 0:
            raise ValueError(f"voxel coordinates must be non-negative, got {self}")

    @property
    def cell(self) -> tuple[int, int]:
        """Planar footprint (x, y)."""
        return (self.x, self.y)


@dataclass(frozen=True)
class ItemStack:
    item_id: str
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"stack count must be >= 1, got {self.count} of {self.item_id!r}")


@dataclass
class BomNode:
    """One level of a product composition tree. Leaves are raw materials."""

    item_id: str
    where: str
    count: int
    parts: list[tuple["BomNode", int]] = field(default_factory=list)
    agent_type: str | None = None
    processing_time: float | None = None


@dataclass(frozen=True)
class Receptor:
    receptor_id: str
    coord: VoxelCoord
    group_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class AgentType:
    agent_type_id: str
    speed: float
    base_load_time: float = 0.0
    base_unload_time: float = 0.0
    elevation_penalty_per_level: float = 0.0
    capacity: int = 1
    group_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.speed <= 0:
            raise ValueError(f"agent type {self.agent_type_id!r}: speed must be > 0")
        if self.capacity < 1:
            raise ValueError(f"agent type {self.agent_type_id!r}: capacity must be >= 1")


@dataclass(frozen=True)
class Agent:
    """Static agent declaration; runtime position and load live in the engine."""

    agent_id: str
    agent_type_id: str
    coord: VoxelCoord
    group_ids: tuple[str, ...] = ()


AGENT_STATUSES = ("idle", "moving", "loading", "unloading", "assembling")


@dataclass(frozen=True)
class Parameters:
    grid_width: int
    grid_depth: int
    grid_height: int
    voxel_edge_length: float = 1.0
    default_processing_time: float = 0.0
    random_seed: int = 0
    agent_types: dict[str, AgentType] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.grid_width < 1 or self.grid_depth < 1 or self.grid_height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.voxel_edge_length <= 0:
            raise ValueError("voxel edge length must be > 0")

    def in_grid(self, c: VoxelCoord) -> bool:
        return c.x < self.grid_width and c.y < self.grid_depth and c.z < self.grid_height


class Inventory:
    """Multiset of items at one receptor, keyed by item id."""

    def __init__(self, initial: dict[str, int] | None = None):
        self._counts: dict[str, int] = {}
        if initial:
            for item_id, count in initial.items():
                self.add(ItemStack(item_id, count))

    def add(self, stack: ItemStack) -> None:
        self._counts[stack.item_id] = self._counts.get(stack.item_id, 0) + stack.count

    def remove(self, item_id: str, count: int) -> None:
        have = self._counts.get(item_id, 0)
        if count > have:
            raise InsufficientItems(f"need {count} of {item_id!r} but only {have} present")
        left = have - count
        if left:
            self._counts[item_id] = left
        else:
            del self._counts[item_id]

    def count(self, item_id: str) -> int:
        return self._counts.get(item_id, 0)

    def total(self) -> int:
        return sum(self._counts.values())

    def items(self) -> list[tuple[str, int]]:
        """(item_id, count) pairs in ascending item order."""
        return sorted(self._counts.items())

    def copy(self) -> "Inventory":
        inv = Inventory()
        inv._counts = dict(self._counts)
        return inv

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Inventory) and self._counts == other._counts


def add_items(inventory: Inventory, stack: ItemStack) -> Inventory:
    inventory.add(stack)
    return inventory


def remove_items(inventory: Inventory, item_id: str, count: int) -> Inventory:
    inventory.remove(item_id, count)
    return inventory


def resolve_location(loc: str, model: "SimulationModel") -> list[str]:
    """Resolve a receptor id or receptor-group id to receptor ids, ascending.

    An exact receptor id wins over a group of the same name.
    """
    if loc in model.receptors:
        return [loc]
    members = sorted(r.receptor_id for r in model.receptors.values() if loc in r.group_ids)
    if not members:
        raise UnknownLocation(f"{loc!r} is neither a receptor id nor a receptor group id")
    return members


def resolve_agent_type(ref: str, model: "SimulationModel") -> list[str]:
    """Resolve an agent-type id or agent-type-group tag to type ids, ascending."""
    types = model.parameters.agent_types
    if ref in types:
        return [ref]
    members = sorted(t.agent_type_id for t in types.values() if ref in t.group_ids)
    if not members:
        raise UnknownAgentType(f"{ref!r} is neither an agent type id nor an agent type group")
    return members


@dataclass
class TransportationWorkOrder:
    """Move ``count`` pieces of one item from source to destination.

    Source, destination and agent type may each name a single id or a group.
    ``origin`` is ``user`` for parsed orders and ``self_generated`` for orders
    the engine synthesizes at runtime.
    """

    order_id: str
    item_id: str
    count: int
    source: str
    destination: str
    agent_type: str
    batch_id: str | None = None
    custom_fields: dict[str, str] = field(default_factory=dict)
    origin: str = "user"


@dataclass
class AssemblyWorkOrder:
    """Consume per-unit inputs and emit ``output_count`` of one output item.

    ``inputs`` holds per-unit quantities; the total consumption of each input
    is its count times ``output_count``. Without an agent type the assembly
    runs at the place receptor on its own; with one, an agent of that type
    must attend for the processing time.
    """

    order_id: str
    inputs: list[tuple[str, int]]
    output_item: str
    output_count: int
    place: str
    agent_type: str | None = None
    processing_time: float | None = None
    custom_fields: dict[str, str] = field(default_factory=dict)


@dataclass
class MaterialFlow:
    """Standing route: items stored at source get carried to destination."""

    source: str
    destination: str
    agent_types: list[str]


@dataclass
class SimulationModel:
    """Fully parsed and cross-linked input set for one simulation."""

    parameters: Parameters
    receptors: dict[str, Receptor]
    agents: dict[str, Agent]
    material_flows: list[MaterialFlow] = field(default_factory=list)
    transportation_orders: list[TransportationWorkOrder] = field(default_factory=list)
    assembly_orders: list[AssemblyWorkOrder] = field(default_factory=list)
    item_locations: list[tuple[str, str, int]] = field(default_factory=list)

    def initial_inventories(self) -> dict[str, Inventory]:
        inventories = {rid: Inventory() for rid in self.receptors}
        for receptor_id, item_id, count in self.item_locations:
            inventories[receptor_id].add(ItemStack(item_id, count))
        return inventories

    def clone(self) -> "SimulationModel":
        """Independent structural copy; frozen leaves are shared."""
        return SimulationModel(
            parameters=Parameters(
                grid_width=self.parameters.grid_width,
                grid_depth=self.parameters.grid_depth,
                grid_height=self.parameters.grid_height,
                voxel_edge_length=self.parameters.voxel_edge_length,
                default_processing_time=self.parameters.default_processing_time,
                random_seed=self.parameters.random_seed,
                agent_types=dict(self.parameters.agent_types),
            ),
            receptors=dict(self.receptors),
            agents=dict(self.agents),
            material_flows=[MaterialFlow(f.source, f.destination, list(f.agent_types)) for f in self.material_flows],
            transportation_orders=[
                TransportationWorkOrder(
                    o.order_id, o.item_id, o.count, o.source, o.destination, o.agent_type,
                    o.batch_id, dict(o.custom_fields), o.origin,
                )
                for o in self.transportation_orders
            ],
            assembly_orders=[
                AssemblyWorkOrder(
                    o.order_id, list(o.inputs), o.output_item, o.output_count, o.place,
                    o.agent_type, o.processing_time, dict(o.custom_fields),
                )
                for o in self.assembly_orders
            ],
            item_locations=list(self.item_locations),
        )
