"""KPI extraction from a finished run's event log.

Every number here is recomputed from the log plus the static model, never
read out of engine internals, so a stored log can be re-analyzed later and
the engine's own counters can be cross-checked against the replay.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .engine import (
    AGENT_ARRIVAL,
    ASSEMBLY_COMPLETE,
    LOAD_COMPLETE,
    UNLOAD_COMPLETE,
    RunConfig,
    run_simulation,
)
from .model import SimulationModel
from .routing import Cell, collision_risk


@dataclass
class SimulationReport:
    makespan_seconds: float
    agent_utilization: dict[str, float]
    agent_busy_seconds: dict[str, float]
    traversal_counts: dict[Cell, int]
    collision_count: int
    collision_cells: dict[Cell, int]
    throughput_per_hour: float
    throughput_basis: str  # "assembly" or "transport"
    assembled_pieces: int
    transported_pieces: int
    transport_flows: dict[tuple[str, str, str], int]
    occupancy_by_receptor: dict[str, float]
    occupancy_by_group: dict[str, float]
    event_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "makespan_seconds": self.makespan_seconds,
            "agent_utilization": dict(sorted(self.agent_utilization.items())),
            "agent_busy_seconds": dict(sorted(self.agent_busy_seconds.items())),
            "traversal_counts": [
                [x, y, n] for (x, y), n in sorted(self.traversal_counts.items())
            ],
            "collision_count": self.collision_count,
            "collision_cells": [
                [x, y, n] for (x, y), n in sorted(self.collision_cells.items())
            ],
            "throughput_per_hour": self.throughput_per_hour,
            "throughput_basis": self.throughput_basis,
            "assembled_pieces": self.assembled_pieces,
            "transported_pieces": self.transported_pieces,
            "transport_flows": [
                [item, src, dst, n]
                for (item, src, dst), n in sorted(self.transport_flows.items())
            ],
            "occupancy_by_receptor": dict(sorted(self.occupancy_by_receptor.items())),
            "occupancy_by_group": dict(sorted(self.occupancy_by_group.items())),
            "event_count": self.event_count,
        }


def _agent_speed(model: SimulationModel, agent_id: str) -> float:
    type_id = model.agents[agent_id].agent_type_id
    return model.parameters.agent_types[type_id].speed


def compute_report(events: list[dict[str, Any]], model: SimulationModel) -> SimulationReport:
    """Replay the log into a report; events must be in (time, seq) order."""
    makespan = max((e["time"] for e in events), default=0.0)

    busy: dict[str, float] = {aid: 0.0 for aid in model.agents}
    traversal: dict[Cell, int] = {}
    moves: list[tuple[str, list[Cell], float, float]] = []
    flows: dict[tuple[str, str, str], int] = {}
    cargo: dict[str, list[tuple[str, str, int, str]]] = {}
    assembled = 0
    transported = 0

    assembly_by_id = {o.order_id: o for o in model.assembly_orders}

    # Piecewise-constant total piece count per receptor for occupancy.
    totals = {rid: inv.total() for rid, inv in model.initial_inventories().items()}
    last_change = {rid: 0.0 for rid in totals}
    integral = {rid: 0.0 for rid in totals}

    def bump(receptor_id: str, delta: int, now: float) -> None:
        integral[receptor_id] += totals[receptor_id] * (now - last_change[receptor_id])
        totals[receptor_id] += delta
        last_change[receptor_id] = now

    for event in events:
        agent = event["agent"]
        if agent is not None:
            busy[agent] += event["dur"]
        kind = event["kind"]

        if kind == AGENT_ARRIVAL:
            path = [tuple(cell) for cell in event["path"]]
            for cell in path:
                traversal[cell] = traversal.get(cell, 0) + 1
            if path:
                moves.append(
                    (agent, path, event["time"] - event["dur"], _agent_speed(model, agent))
                )

        elif kind == LOAD_COMPLETE:
            receptor = event["receptor"]
            for (item_id, count), order_id in zip(event["items"], event["order"]):
                bump(receptor, -count, event["time"])
                cargo.setdefault(agent, []).append((order_id, item_id, count, receptor))

        elif kind == UNLOAD_COMPLETE:
            receptor = event["receptor"]
            for (item_id, count), order_id in zip(event["items"], event["order"]):
                bump(receptor, count, event["time"])
                transported += count
                held = cargo.get(agent, [])
                for i, (oid, iid, n, source) in enumerate(held):
                    if oid == order_id and iid == item_id and n == count:
                        del held[i]
                        key = (item_id, source, receptor)
                        flows[key] = flows.get(key, 0) + count
                        break

        elif kind == ASSEMBLY_COMPLETE:
            receptor = event["receptor"]
            order = assembly_by_id.get(event["order"][0])
            if order is not None:
                consumed = sum(per_unit * order.output_count for _, per_unit in order.inputs)
                bump(receptor, -consumed, event["time"])
            for item_id, count in event["items"]:
                bump(receptor, count, event["time"])
                assembled += count

    for rid in totals:
        integral[rid] += totals[rid] * (makespan - last_change[rid])

    occupancy_by_receptor = {
        rid: (integral[rid] / makespan if makespan > 0 else float(totals[rid]))
        for rid in totals
    }
    groups: dict[str, list[str]] = {}
    for rid, receptor in model.receptors.items():
        for gid in receptor.group_ids:
            groups.setdefault(gid, []).append(rid)
    occupancy_by_group = {
        gid: sum(occupancy_by_receptor[rid] for rid in members)
        for gid, members in sorted(groups.items())
    }

    collision_count, collision_cells = collision_risk(moves)

    if assembled > 0:
        basis, pieces = "assembly", assembled
    else:
        basis, pieces = "transport", transported
    throughput = pieces / makespan * 3600.0 if makespan > 0 else 0.0

    return SimulationReport(
        makespan_seconds=makespan,
        agent_utilization={
            aid: (busy[aid] / makespan if makespan > 0 else 0.0) for aid in busy
        },
        agent_busy_seconds=busy,
        traversal_counts=traversal,
        collision_count=collision_count,
        collision_cells=collision_cells,
        throughput_per_hour=throughput,
        throughput_basis=basis,
        assembled_pieces=assembled,
        transported_pieces=transported,
        transport_flows=flows,
        occupancy_by_receptor=occupancy_by_receptor,
        occupancy_by_group=occupancy_by_group,
        event_count=len(events),
    )


def render_report_text(report: SimulationReport) -> str:
    lines = [
        "RUN SUMMARY",
        f"  makespan_seconds   {report.makespan_seconds:.3f}",
        f"  events             {report.event_count}",
        f"  throughput         {report.throughput_per_hour:.3f} pieces/hour ({report.throughput_basis})",
        f"  assembled_pieces   {report.assembled_pieces}",
        f"  transported_pieces {report.transported_pieces}",
        f"  collision_count    {report.collision_count}",
        "",
        "AGENT UTILIZATION",
    ]
    for aid in sorted(report.agent_utilization):
        lines.append(
            f"  {aid:<24} {report.agent_utilization[aid]:.3f}"
            f"  busy {report.agent_busy_seconds[aid]:.3f} s"
        )
    lines.append("")
    lines.append("TRANSPORT FLOWS (item, source, destination, pieces)")
    for (item, src, dst), count in sorted(report.transport_flows.items()):
        lines.append(f"  {item:<20} {src:<20} {dst:<20} {count}")
    if not report.transport_flows:
        lines.append("  (none)")
    lines.append("")
    lines.append("OCCUPANCY (time-weighted average pieces)")
    for gid in sorted(report.occupancy_by_group):
        lines.append(f"  group {gid:<20} {report.occupancy_by_group[gid]:.3f}")
    for rid in sorted(report.occupancy_by_receptor):
        lines.append(f"  {rid:<26} {report.occupancy_by_receptor[rid]:.3f}")
    lines.append("")
    return "\n".join(lines)


@dataclass
class SweepRow:
    agent_count: int
    makespan_seconds: float
    throughput_per_hour: float
    mean_utilization: float


def sweep_agent_count(
    model: SimulationModel,
    agent_type_id: str,
    counts: list[int],
    config: RunConfig | None = None,
) -> list[SweepRow]:
    """Re-run the model with the named agent type scaled to each count.

    Added agents spawn at the first existing agent's position with ids
    ``<type>_sweep<n>``; shrinking drops the highest agent ids first.
    """
    base_agents = sorted(
        aid for aid, a in model.agents.items() if a.agent_type_id == agent_type_id
    )
    if not base_agents:
        raise ValueError(f"no agent of type {agent_type_id!r} in model")
    template = model.agents[base_agents[0]]

    rows = []
    for count in counts:
        variant = model.clone()
        keep = base_agents[:count]
        for aid in base_agents[len(keep):]:
            del variant.agents[aid]
        from .model import Agent

        for i in range(len(keep), count):
            aid = f"{agent_type_id}_sweep{i + 1}"
            variant.agents[aid] = Agent(
                aid, agent_type_id, template.coord, template.group_ids
            )
        result = run_simulation(variant, config)
        report = compute_report(result.events, variant)
        type_agents = [
            aid for aid, a in variant.agents.items() if a.agent_type_id == agent_type_id
        ]
        mean_util = (
            sum(report.agent_utilization[aid] for aid in type_agents) / len(type_agents)
            if type_agents else 0.0
        )
        rows.append(
            SweepRow(count, report.makespan_seconds, report.throughput_per_hour, mean_util)
        )
    return rows
