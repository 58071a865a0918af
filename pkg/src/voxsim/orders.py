"""Order lifecycle tracking and self-order generation.

The book owns every work order's state machine. Transport orders dispatch in
chunks (a chunk is one agent trip slice, capped by capacity and by stock on
hand), so a single large order may take several trips. Assembly orders bind
their place receptor on admission and move pending -> active -> completed.

Self-order generation is a pure function of model, inventories, claims and
book contents: it never consults a clock beyond stamping the log, and calling
it twice in a row adds nothing the second time.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .errors import Diagnostic, IllegalTransition
from .model import (
    AssemblyWorkOrder,
    Inventory,
    SimulationModel,
    TransportationWorkOrder,
    resolve_location,
)

PENDING = "pending"
ACTIVE = "active"
COMPLETED = "completed"


@dataclass
class ChunkState:
    """One dispatched trip slice of a transport order."""

    item_id: str
    count: int
    source: str
    destination: str
    loaded: bool = False
    delivered: bool = False


@dataclass
class TransportState:
    order: TransportationWorkOrder
    remaining: int
    chunks: list[ChunkState] = field(default_factory=list)
    status: str = PENDING

    @property
    def delivered_count(self) -> int:
        return sum(c.count for c in self.chunks if c.delivered)


@dataclass
class AssemblyState:
    order: AssemblyWorkOrder
    place_receptor: str
    status: str = PENDING


@dataclass
class GenerationRecord:
    time: float
    order_id: str
    rule: str


class OrderBook:
    """All order states in admission order, plus the self-generation log."""

    def __init__(self) -> None:
        self._transports: dict[str, TransportState] = {}
        self._assemblies: dict[str, AssemblyState] = {}
        self._insertion: list[str] = []
        self.generation_log: list[GenerationRecord] = []
        self.diagnostics: list[Diagnostic] = []
        self._generated = 0
        self._unsourceable_emitted: set[tuple[str, str]] = set()

    # -- admission ---------------------------------------------------------

    def add_transport(self, order: TransportationWorkOrder) -> TransportState:
        if order.order_id in self._transports or order.order_id in self._assemblies:
            raise IllegalTransition(f"order id {order.order_id!r} already admitted")
        state = TransportState(order=order, remaining=order.count)
        self._transports[order.order_id] = state
        self._insertion.append(order.order_id)
        return state

    def add_assembly(self, order: AssemblyWorkOrder, place_receptor: str) -> AssemblyState:
        if order.order_id in self._transports or order.order_id in self._assemblies:
            raise IllegalTransition(f"order id {order.order_id!r} already admitted")
        state = AssemblyState(order=order, place_receptor=place_receptor)
        self._assemblies[order.order_id] = state
        self._insertion.append(order.order_id)
        return state

    def next_generated_id(self) -> str:
        self._generated += 1
        return f"g{self._generated:04d}"

    # -- lookup ------------------------------------------------------------

    def transport_states(self) -> list[TransportState]:
        return list(self._transports.values())

    def assembly_states(self) -> list[AssemblyState]:
        return list(self._assemblies.values())

    def get_transport(self, order_id: str) -> TransportState:
        return self._transports[order_id]

    def get_assembly(self, order_id: str) -> AssemblyState:
        return self._assemblies[order_id]

    def pending_in_order(self) -> list[TransportState | AssemblyState]:
        """Pending order states, oldest admission first."""
        out: list[TransportState | AssemblyState] = []
        for order_id in self._insertion:
            state = self._transports.get(order_id) or self._assemblies[order_id]
            if state.status == PENDING:
                out.append(state)
        return out

    def open_orders_exist(self) -> bool:
        return any(
            s.status != COMPLETED
            for s in list(self._transports.values()) + list(self._assemblies.values())
        )

    # -- transport transitions --------------------------------------------

    def dispatch_chunk(
        self, order_id: str, count: int, source: str, destination: str
    ) -> ChunkState:
        state = self._transports[order_id]
        if state.status != PENDING:
            raise IllegalTransition(f"{order_id}: dispatch on {state.status} order")
        if not 1 <= count <= state.remaining:
            raise IllegalTransition(
                f"{order_id}: chunk of {count} exceeds remaining {state.remaining}"
            )
        chunk = ChunkState(state.order.item_id, count, source, destination)
        state.chunks.append(chunk)
        state.remaining -= count
        if state.remaining == 0:
            state.status = ACTIVE
        return chunk

    def chunk_loaded(self, order_id: str, chunk: ChunkState) -> None:
        if chunk.loaded:
            raise IllegalTransition(f"{order_id}: chunk loaded twice")
        chunk.loaded = True

    def chunk_delivered(self, order_id: str, chunk: ChunkState) -> None:
        state = self._transports[order_id]
        if not chunk.loaded or chunk.delivered:
            raise IllegalTransition(f"{order_id}: delivery before load or delivered twice")
        chunk.delivered = True
        if state.remaining == 0 and all(c.delivered for c in state.chunks):
            state.status = COMPLETED

    def deliver_noop(self, order_id: str, count: int, receptor: str) -> None:
        """Source and destination bound to the same receptor: instant delivery."""
        chunk = self.dispatch_chunk(order_id, count, receptor, receptor)
        chunk.loaded = True
        self.chunk_delivered(order_id, chunk)

    # -- assembly transitions ---------------------------------------------

    def start_assembly(self, order_id: str) -> None:
        state = self._assemblies[order_id]
        if state.status != PENDING:
            raise IllegalTransition(f"{order_id}: start on {state.status} order")
        state.status = ACTIVE

    def complete_assembly(self, order_id: str) -> None:
        state = self._assemblies[order_id]
        if state.status != ACTIVE:
            raise IllegalTransition(f"{order_id}: completion on {state.status} order")
        state.status = COMPLETED

    # -- generation support ------------------------------------------------

    def note_unsourceable(self, order_id: str, item_id: str) -> None:
        key = (order_id, item_id)
        if key in self._unsourceable_emitted:
            return
        self._unsourceable_emitted.add(key)
        self.diagnostics.append(
            Diagnostic(
                "warning", "UnsourceableItem", order_id,
                f"item {item_id!r} exists nowhere and is produced by no assembly order",
            )
        )


def _commitment_map(
    model: SimulationModel,
    claims: dict[tuple[str, str], int],
    book: OrderBook,
    members: dict[str, list[str]],
) -> dict[tuple[str, str], int]:
    """Stock already spoken for, per (receptor, item).

    Claims cover dispatched-but-unloaded chunks and running assemblies. On top
    of that, undispatched remainders of every transport order reserve stock at
    all resolved source members; a group source cannot know its member yet, so
    the reservation is deliberately conservative.
    """
    committed: dict[tuple[str, str], int] = defaultdict(int)
    for key, count in claims.items():
        committed[key] += count
    for state in book.transport_states():
        if state.remaining > 0:
            for rid in members[state.order.source]:
                committed[(rid, state.order.item_id)] += state.remaining
    return committed


def _inbound(
    state_list: list[TransportState],
    members: dict[str, list[str]],
    place: str,
    item_id: str,
) -> int:
    """Pieces of ``item_id`` already on their way to ``place``."""
    total = 0
    for state in state_list:
        if state.order.item_id != item_id:
            continue
        for chunk in state.chunks:
            if not chunk.delivered and chunk.destination == place:
                total += chunk.count
        if state.remaining > 0 and place in members[state.order.destination]:
            total += state.remaining
    return total


def _flow_agent_type(
    model: SimulationModel,
    members: dict[str, list[str]],
    source_rid: str,
    place: str,
) -> str | None:
    for flow in model.material_flows:
        if source_rid in members[flow.source] and place in members[flow.destination]:
            return flow.agent_types[0]
    return None


def generate_self_orders(
    model: SimulationModel,
    inventories: dict[str, Inventory],
    claims: dict[tuple[str, str], int],
    book: OrderBook,
    now: float,
) -> list[TransportationWorkOrder]:
    """Run both generation rules and admit the resulting transport orders.

    Rule one, in admission order over pending assembly orders: for every input
    whose need is not covered by effective stock at the place plus inbound
    pieces, pull the deficit from the receptor with the most uncommitted
    stock, splitting across receptors when one cannot cover it. Rule two, in
    declaration order over material flows: push every uncommitted piece at a
    flow source toward the flow destination.
    """
    members: dict[str, list[str]] = {}

    def resolve(ref: str) -> list[str]:
        if ref not in members:
            members[ref] = resolve_location(ref, model)
        return members[ref]

    for flow in model.material_flows:
        resolve(flow.source), resolve(flow.destination)
    for state in book.transport_states():
        resolve(state.order.source), resolve(state.order.destination)

    committed = _commitment_map(model, claims, book, members)
    produced = {s.order.output_item for s in book.assembly_states()}
    fallback_type = min(model.parameters.agent_types) if model.parameters.agent_types else None
    new_orders: list[TransportationWorkOrder] = []

    # Rule one: assembly deficits.
    for asm in book.assembly_states():
        if asm.status != PENDING:
            continue
        place = asm.place_receptor
        for item_id, per_unit in asm.order.inputs:
            need = per_unit * asm.order.output_count
            on_hand = inventories[place].count(item_id) if place in inventories else 0
            present = max(0, on_hand - committed[(place, item_id)])
            inbound = _inbound(book.transport_states(), members, place, item_id) + sum(
                o.count for o in new_orders if o.item_id == item_id and o.destination == place
            )
            deficit = need - present - inbound
            while deficit > 0:
                candidates = [
                    (rid, inv.count(item_id) - committed[(rid, item_id)])
                    for rid, inv in inventories.items()
                    if rid != place and inv.count(item_id) - committed[(rid, item_id)] > 0
                ]
                if not candidates:
                    total_anywhere = sum(inv.count(item_id) for inv in inventories.values())
                    in_flight = any(
                        c.loaded and not c.delivered
                        for s in book.transport_states()
                        if s.order.item_id == item_id
                        for c in s.chunks
                    )
                    if total_anywhere == 0 and not in_flight and item_id not in produced:
                        book.note_unsourceable(asm.order.order_id, item_id)
                    break
                best = max(available for _, available in candidates)
                source_rid = min(rid for rid, available in candidates if available == best)
                take = min(best, deficit)
                agent_type = _flow_agent_type(model, members, source_rid, place)
                if agent_type is None:
                    agent_type = fallback_type
                    book.diagnostics.append(
                        Diagnostic(
                            "warning", "NoFlowAgentType", asm.order.order_id,
                            f"no material flow covers {source_rid!r} -> {place!r}; "
                            f"falling back to agent type {agent_type!r} for {item_id!r}",
                        )
                    )
                order = TransportationWorkOrder(
                    order_id=book.next_generated_id(),
                    item_id=item_id,
                    count=take,
                    source=source_rid,
                    destination=place,
                    agent_type=agent_type or "",
                    origin="self_generated",
                )
                new_orders.append(order)
                book.generation_log.append(GenerationRecord(now, order.order_id, "assembly_deficit"))
                committed[(source_rid, item_id)] += take
                resolve(source_rid), resolve(place)
                deficit -= take

    # Rule two: material flows push uncommitted stock downstream.
    for flow in model.material_flows:
        for source_rid in members[flow.source]:
            if source_rid not in inventories:
                continue
            if source_rid in members[flow.destination]:
                continue
            for item_id, on_hand in inventories[source_rid].items():
                uncovered = on_hand - committed[(source_rid, item_id)]
                if uncovered <= 0:
                    continue
                order = TransportationWorkOrder(
                    order_id=book.next_generated_id(),
                    item_id=item_id,
                    count=uncovered,
                    source=source_rid,
                    destination=flow.destination,
                    agent_type=flow.agent_types[0],
                    origin="self_generated",
                )
                new_orders.append(order)
                book.generation_log.append(GenerationRecord(now, order.order_id, "material_flow"))
                committed[(source_rid, item_id)] += uncovered
                resolve(flow.destination)

    for order in new_orders:
        resolve(order.source), resolve(order.destination)
        book.add_transport(order)
    return new_orders
