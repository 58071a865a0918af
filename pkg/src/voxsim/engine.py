"""Discrete-event engine.

Each pass of the event function performs three duties in a fixed order: pop
and process every event scheduled for the current clock (including ones
pushed at that same time while processing), run self-order generation, then
dispatch pending orders to idle agents. Time advances to the earliest
scheduled event between passes; the run ends when no open orders and no
events remain, when a custom termination evaluator fires, or when a safety
cap trips.

Everything is deterministic: the heap breaks time ties by scheduling
sequence, every scan iterates in admission or sorted order, and no random
source is consulted anywhere.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import Diagnostic, UnknownAgentType
from .model import (
    AgentType,
    Inventory,
    ItemStack,
    SimulationModel,
    resolve_agent_type,
    resolve_location,
)
from .orders import (
    COMPLETED,
    PENDING,
    AssemblyState,
    ChunkState,
    OrderBook,
    TransportState,
    generate_self_orders,
)
from .routing import Cell, NavGrid, handling_time, travel_time

AGENT_ARRIVAL = "agent_arrival"
LOAD_COMPLETE = "load_complete"
UNLOAD_COMPLETE = "unload_complete"
ASSEMBLY_COMPLETE = "assembly_complete"

LOG_FIELDS = ("time", "seq", "kind", "agent", "order", "receptor", "items", "path", "dur")


@dataclass
class Leg:
    kind: str  # "load" or "unload"
    receptor_id: str
    slices: list[tuple[str, ChunkState]]


@dataclass
class Trip:
    agent_id: str
    legs: list[Leg]
    leg_index: int = 0

    @property
    def current_leg(self) -> Leg:
        return self.legs[self.leg_index]

    @property
    def order_ids(self) -> list[str]:
        seen: list[str] = []
        for leg in self.legs:
            for order_id, _ in leg.slices:
                if order_id not in seen:
                    seen.append(order_id)
        return seen


@dataclass
class AssemblyJob:
    order_id: str
    place_receptor: str


@dataclass
class AgentState:
    agent_id: str
    agent_type: AgentType
    cell: Cell
    status: str = "idle"
    trip: Trip | None = None
    job: AssemblyJob | None = None


@dataclass
class RunConfig:
    max_events: int = 10_000_000
    max_sim_time: float = 1e9
    termination: Callable[["Simulation"], bool] | None = None
    debug_conservation: bool = False


@dataclass
class SimulationResult:
    model: SimulationModel
    makespan: float
    events: list[dict[str, Any]]
    frames: list[dict[str, Any]]
    inventories: dict[str, Inventory]
    book: OrderBook
    grid: NavGrid
    diagnostics: list[Diagnostic]
    event_count: int
    conservation_violations: list[str] = field(default_factory=list)
    stalled: bool = False
    capped: bool = False


class Simulation:
    """Mutable run state: clock, event heap, inventories, claims, agents."""

    def __init__(self, model: SimulationModel, config: RunConfig | None = None):
        self.model = model
        self.config = config or RunConfig()
        self.grid = NavGrid(model)
        self.book = OrderBook()
        self.clock = 0.0
        self.inventories = model.initial_inventories()
        self.claims: dict[tuple[str, str], int] = {}
        self.events: list[dict[str, Any]] = []
        self.frames: list[dict[str, Any]] = []
        self.event_count = 0
        self.diagnostics: list[Diagnostic] = []
        self.conservation_violations: list[str] = []
        self._heap: list[tuple[float, int, str, Any]] = []
        self._seq = 0
        self._initialized = False
        self._frame_moves: list[dict[str, Any]] = []
        self._frame_changes: list[list[Any]] = []
        self._frame_completed: list[str] = []

        self.agents: dict[str, AgentState] = {}
        for aid in sorted(model.agents):
            decl = model.agents[aid]
            self.agents[aid] = AgentState(
                agent_id=aid,
                agent_type=model.parameters.agent_types[decl.agent_type_id],
                cell=decl.coord.cell,
            )

        for order in model.transportation_orders:
            self.book.add_transport(order)
        for order in model.assembly_orders:
            place = resolve_location(order.place, model)[0]
            self.book.add_assembly(order, place)

        # Expected per-item totals; assemblies shift them on completion.
        self._expected_totals: dict[str, int] = {}
        for inv in self.inventories.values():
            for item_id, count in inv.items():
                self._expected_totals[item_id] = self._expected_totals.get(item_id, 0) + count

    # -- scheduling --------------------------------------------------------

    def _schedule(self, time: float, kind: str, payload: Any) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, kind, payload))

    def _log(
        self,
        time: float,
        seq: int,
        kind: str,
        agent: str | None,
        order: list[str],
        receptor: str | None,
        items: list[list[Any]] | None,
        path: list[Cell] | None,
        dur: float,
    ) -> None:
        self.events.append(
            {
                "time": time,
                "seq": seq,
                "kind": kind,
                "agent": agent,
                "order": order,
                "receptor": receptor,
                "items": items,
                "path": [[x, y] for x, y in path] if path is not None else None,
                "dur": dur,
            }
        )

    # -- availability helpers ---------------------------------------------

    def _available(self, receptor_id: str, item_id: str) -> int:
        inv = self.inventories.get(receptor_id)
        on_hand = inv.count(item_id) if inv else 0
        return on_hand - self.claims.get((receptor_id, item_id), 0)

    def _pick_source(self, state: TransportState) -> tuple[str, int] | None:
        """Member with the most uncommitted stock; ties go to the lower id."""
        best: tuple[str, int] | None = None
        for rid in resolve_location(state.order.source, self.model):
            available = self._available(rid, state.order.item_id)
            if available > 0 and (best is None or available > best[1]):
                best = (rid, available)
        return best

    def _pick_destination(self, state: TransportState) -> str:
        """Least-filled member by total piece count; ties go to the lower id."""
        members = resolve_location(state.order.destination, self.model)
        return min(members, key=lambda rid: (self.inventories[rid].total(), rid))

    def _eligible_agents(self, agent_type_ref: str) -> list[AgentState]:
        try:
            type_ids = set(resolve_agent_type(agent_type_ref, self.model))
        except UnknownAgentType:
            type_ids = set()
        out = []
        for aid in sorted(self.agents):
            agent = self.agents[aid]
            decl = self.model.agents[aid]
            if agent.agent_type.agent_type_id in type_ids or agent_type_ref in decl.group_ids:
                out.append(agent)
        return out

    def _nearest_idle(
        self, agents: list[AgentState], receptor_ids: list[str]
    ) -> AgentState | None:
        """Closest idle agent to the first receptor, reachable to all of them."""
        dist = self.grid.distances_from(receptor_ids[0])
        best: tuple[int, str] | None = None
        chosen: AgentState | None = None
        for agent in agents:
            if agent.status != "idle" or agent.cell not in dist:
                continue
            if any(
                agent.cell not in self.grid.distances_from(rid) for rid in receptor_ids[1:]
            ):
                continue
            key = (dist[agent.cell], agent.agent_id)
            if best is None or key < best:
                best = key
                chosen = agent
        return chosen

    # -- movement ----------------------------------------------------------

    def _begin_move(self, agent: AgentState, receptor_id: str) -> None:
        path = self.grid.path_to_receptor(agent.cell, receptor_id)
        self.grid.record_traversal(path)
        agent.status = "moving"
        dur = travel_time(len(path), agent.agent_type.speed)
        self._schedule(
            self.clock + dur, AGENT_ARRIVAL, (agent.agent_id, receptor_id, path, dur)
        )

    def _begin_handling(self, agent: AgentState) -> None:
        leg = agent.trip.current_leg
        receptor = self.model.receptors[leg.receptor_id]
        if leg.kind == "load":
            agent.status = "loading"
            base = agent.agent_type.base_load_time
            kind = LOAD_COMPLETE
        else:
            agent.status = "unloading"
            base = agent.agent_type.base_unload_time
            kind = UNLOAD_COMPLETE
        dur = handling_time(base, receptor.coord.z, agent.agent_type.elevation_penalty_per_level)
        self._schedule(self.clock + dur, kind, (agent.agent_id, dur))

    def _advance_trip(self, agent: AgentState) -> None:
        trip = agent.trip
        trip.leg_index += 1
        if trip.leg_index >= len(trip.legs):
            agent.trip = None
            agent.status = "idle"
            return
        self._begin_move(agent, trip.current_leg.receptor_id)

    # -- event processing --------------------------------------------------

    def _process(self, time: float, seq: int, kind: str, payload: Any) -> None:
        if kind == AGENT_ARRIVAL:
            agent_id, receptor_id, path, dur = payload
            agent = self.agents[agent_id]
            start_cell = agent.cell
            if path:
                agent.cell = path[-1]
            self._frame_moves.append(
                {
                    "agent": agent_id,
                    "from": list(start_cell),
                    "to": list(agent.cell),
                    "path": [[x, y] for x, y in path],
                    "dur": dur,
                }
            )
            self._log(
                time, seq, AGENT_ARRIVAL, agent_id,
                agent.trip.order_ids if agent.trip else [agent.job.order_id],
                receptor_id, None, path, dur,
            )
            if agent.trip is not None:
                self._begin_handling(agent)
            else:
                job = agent.job
                asm = self.book.get_assembly(job.order_id)
                agent.status = "assembling"
                proc = self._processing_time(asm)
                self._schedule(
                    self.clock + proc, ASSEMBLY_COMPLETE, (job.order_id, agent_id, proc)
                )

        elif kind in (LOAD_COMPLETE, UNLOAD_COMPLETE):
            agent_id, dur = payload
            agent = self.agents[agent_id]
            leg = agent.trip.current_leg
            items = []
            for order_id, chunk in leg.slices:
                items.append([chunk.item_id, chunk.count])
                if kind == LOAD_COMPLETE:
                    self.inventories[leg.receptor_id].remove(chunk.item_id, chunk.count)
                    self._release_claim(leg.receptor_id, chunk.item_id, chunk.count)
                    self.book.chunk_loaded(order_id, chunk)
                    self._frame_changes.append([leg.receptor_id, chunk.item_id, -chunk.count])
                else:
                    self.inventories[leg.receptor_id].add(ItemStack(chunk.item_id, chunk.count))
                    self.book.chunk_delivered(order_id, chunk)
                    self._frame_changes.append([leg.receptor_id, chunk.item_id, chunk.count])
                    if self.book.get_transport(order_id).status == COMPLETED:
                        self._frame_completed.append(order_id)
            self._log(
                time, seq, kind, agent_id,
                [oid for oid, _ in leg.slices], leg.receptor_id, items, None, dur,
            )
            self._advance_trip(agent)

        elif kind == ASSEMBLY_COMPLETE:
            order_id, agent_id, dur = payload
            asm = self.book.get_assembly(order_id)
            place = asm.place_receptor
            inv = self.inventories[place]
            for item_id, per_unit in asm.order.inputs:
                need = per_unit * asm.order.output_count
                inv.remove(item_id, need)
                self._release_claim(place, item_id, need)
                self._frame_changes.append([place, item_id, -need])
                self._expected_totals[item_id] = self._expected_totals.get(item_id, 0) - need
            inv.add(ItemStack(asm.order.output_item, asm.order.output_count))
            self._frame_changes.append([place, asm.order.output_item, asm.order.output_count])
            self._expected_totals[asm.order.output_item] = (
                self._expected_totals.get(asm.order.output_item, 0) + asm.order.output_count
            )
            self.book.complete_assembly(order_id)
            self._frame_completed.append(order_id)
            if agent_id is not None:
                agent = self.agents[agent_id]
                agent.job = None
                agent.status = "idle"
            self._log(
                time, seq, ASSEMBLY_COMPLETE, agent_id, [order_id], place,
                [[asm.order.output_item, asm.order.output_count]], None, dur,
            )

        else:  # pragma: no cover - scheduling bug guard
            raise RuntimeError(f"unknown event kind {kind!r}")

    def _release_claim(self, receptor_id: str, item_id: str, count: int) -> None:
        key = (receptor_id, item_id)
        left = self.claims.get(key, 0) - count
        if left > 0:
            self.claims[key] = left
        else:
            self.claims.pop(key, None)

    def _processing_time(self, asm: AssemblyState) -> float:
        if asm.order.processing_time is not None:
            return asm.order.processing_time
        return self.model.parameters.default_processing_time

    def _check_conservation(self) -> None:
        totals: dict[str, int] = {}
        for inv in self.inventories.values():
            for item_id, count in inv.items():
                totals[item_id] = totals.get(item_id, 0) + count
        for state in self.book.transport_states():
            for chunk in state.chunks:
                if chunk.loaded and not chunk.delivered:
                    totals[chunk.item_id] = totals.get(chunk.item_id, 0) + chunk.count
        expected = {k: v for k, v in self._expected_totals.items() if v}
        if totals != expected:
            self.conservation_violations.append(
                f"t={self.clock}: totals {sorted(totals.items())} != "
                f"expected {sorted(expected.items())}"
            )

    # -- dispatch ----------------------------------------------------------

    def _batch_siblings(self, state: TransportState) -> list[TransportState]:
        if not state.order.batch_id:
            return [state]
        return [
            s for s in self.book.transport_states()
            if s.order.batch_id == state.order.batch_id and s.status == PENDING
        ]

    def _deliver_noop(self, state: TransportState, receptor_id: str) -> None:
        self.book.deliver_noop(state.order.order_id, state.remaining, receptor_id)
        if state.status == COMPLETED:
            self._frame_completed.append(state.order.order_id)

    def _dispatch_transport(self, state: TransportState) -> bool:
        """Try to send one trip for this order; True when anything happened."""
        order = state.order
        picked = self._pick_source(state)
        if picked is None:
            return False
        source_rid, _ = picked
        destination_rid = self._pick_destination(state)

        if source_rid == destination_rid:
            # A move within one receptor completes on the spot, agent-free.
            self._deliver_noop(state, source_rid)
            return True

        agents = self._eligible_agents(order.agent_type)
        if not agents:
            return False

        # Pack the trip: this order first, then pending batch siblings.
        slices: list[tuple[str, ChunkState]] = []
        capacity_left = 0
        chosen: AgentState | None = None
        for sibling in self._batch_siblings(state):
            picked = self._pick_source(sibling)
            if picked is None:
                continue
            sib_source, sib_available = picked
            sib_destination = self._pick_destination(sibling)
            if sib_source == sib_destination:
                self._deliver_noop(sibling, sib_source)
                continue
            if chosen is None:
                chosen = self._nearest_idle(agents, [sib_source, sib_destination])
                if chosen is None:
                    return False
                capacity_left = chosen.agent_type.capacity
            if capacity_left == 0:
                break
            if chosen.cell not in self.grid.distances_from(sib_source) or \
                    chosen.cell not in self.grid.distances_from(sib_destination):
                continue
            take = min(sibling.remaining, capacity_left, sib_available)
            if take < 1:
                continue
            chunk = self.book.dispatch_chunk(
                sibling.order.order_id, take, sib_source, sib_destination
            )
            self.claims[(sib_source, sibling.order.item_id)] = (
                self.claims.get((sib_source, sibling.order.item_id), 0) + take
            )
            slices.append((sibling.order.order_id, chunk))
            capacity_left -= take

        if not slices:
            # Only no-op deliveries happened; report progress if this order moved.
            return state.status != PENDING

        load_order: list[str] = []
        unload_order: list[str] = []
        for _, chunk in slices:
            if chunk.source not in load_order:
                load_order.append(chunk.source)
            if chunk.destination not in unload_order:
                unload_order.append(chunk.destination)
        legs = [
            Leg("load", rid, [(oid, c) for oid, c in slices if c.source == rid])
            for rid in load_order
        ] + [
            Leg("unload", rid, [(oid, c) for oid, c in slices if c.destination == rid])
            for rid in unload_order
        ]
        chosen.trip = Trip(chosen.agent_id, legs)
        self._begin_move(chosen, legs[0].receptor_id)
        return True

    def _dispatch_assembly(self, state: AssemblyState) -> bool:
        order = state.order
        place = state.place_receptor
        for item_id, per_unit in order.inputs:
            if self._available(place, item_id) < per_unit * order.output_count:
                return False

        agent: AgentState | None = None
        if order.agent_type is not None:
            agents = self._eligible_agents(order.agent_type)
            agent = self._nearest_idle(agents, [place]) if agents else None
            if agent is None:
                return False

        for item_id, per_unit in order.inputs:
            key = (place, item_id)
            self.claims[key] = self.claims.get(key, 0) + per_unit * order.output_count
        self.book.start_assembly(order.order_id)

        if agent is not None:
            agent.job = AssemblyJob(order.order_id, place)
            self._begin_move(agent, place)
        else:
            proc = self._processing_time(state)
            self._schedule(self.clock + proc, ASSEMBLY_COMPLETE, (order.order_id, None, proc))
        return True

    def _dispatch(self) -> None:
        for state in self.book.pending_in_order():
            if state.status != PENDING:
                continue  # a batch sibling handled earlier in this pass
            if isinstance(state, TransportState):
                while state.status == PENDING:
                    if not self._dispatch_transport(state):
                        break
            else:
                self._dispatch_assembly(state)

    # -- main loop ---------------------------------------------------------

    def event_function(self) -> None:
        while self._heap and self._heap[0][0] == self.clock:
            time, seq, kind, payload = heapq.heappop(self._heap)
            self.event_count += 1
            self._process(time, seq, kind, payload)
            if self.config.debug_conservation:
                self._check_conservation()
        generate_self_orders(self.model, self.inventories, self.claims, self.book, self.clock)
        self._dispatch()

    def is_terminal(self) -> bool:
        if self.config.termination is not None and self.config.termination(self):
            return True
        return not self.book.open_orders_exist() and not self._heap

    def _finish_frame(self) -> dict[str, Any]:
        frame = {
            "time": self.clock,
            "moves": self._frame_moves,
            "inventory_changes": self._frame_changes,
            "completed_orders": self._frame_completed,
        }
        self._frame_moves = []
        self._frame_changes = []
        self._frame_completed = []
        self.frames.append(frame)
        return frame

    def _ensure_initialized(self) -> None:
        """Time-zero pass: generation and dispatch before any event exists."""
        if self._initialized:
            return
        self._initialized = True
        self.event_function()
        self._finish_frame()

    def step(self) -> dict[str, Any] | None:
        """Advance to the next event time; None when nothing remains to do."""
        self._ensure_initialized()
        if self.is_terminal() or not self._heap:
            return None
        self.clock = self._heap[0][0]
        self.event_function()
        return self._finish_frame()

    def run(self) -> SimulationResult:
        stalled = False
        capped = False
        self._ensure_initialized()
        while True:
            if self.is_terminal():
                break
            if not self._heap:
                stalled = True
                for state in self.book.transport_states() + self.book.assembly_states():
                    if state.status != COMPLETED:
                        self.diagnostics.append(
                            Diagnostic(
                                "warning", "StalledOrder", state.order.order_id,
                                "order cannot progress: no stock, no eligible agent "
                                "or unsatisfiable inputs",
                            )
                        )
                break
            if self.event_count >= self.config.max_events:
                capped = True
                self.diagnostics.append(
                    Diagnostic("error", "SafetyCap", "engine",
                               f"event cap {self.config.max_events} reached")
                )
                break
            if self._heap[0][0] > self.config.max_sim_time:
                capped = True
                self.diagnostics.append(
                    Diagnostic("error", "SafetyCap", "engine",
                               f"simulated time cap {self.config.max_sim_time} reached")
                )
                break
            self.clock = self._heap[0][0]
            self.event_function()
            self._finish_frame()

        return SimulationResult(
            model=self.model,
            makespan=self.clock if self.events else 0.0,
            events=self.events,
            frames=self.frames,
            inventories=self.inventories,
            book=self.book,
            grid=self.grid,
            diagnostics=self.book.diagnostics + self.diagnostics,
            event_count=self.event_count,
            conservation_violations=self.conservation_violations,
            stalled=stalled,
            capped=capped,
        )


def run_simulation(model: SimulationModel, config: RunConfig | None = None) -> SimulationResult:
    return Simulation(model, config).run()
