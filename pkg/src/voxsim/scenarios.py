"""Built-in scenarios as canonical input files.

Each scenario is a dict of file texts in the four canonical formats; models
are always obtained by running those texts through the real parsers, so the
scenarios double as end-to-end parser fixtures. ``random_model`` builds
throwaway instances for property tests; receptors sit on even/even cells and
agents on odd/odd cells, which keeps every receptor reachable and every agent
start cell free by construction.
"""

from __future__ import annotations

import json
import random

from .ingest import parse_model_files
from .model import (
    Agent,
    AgentType,
    Parameters,
    Receptor,
    SimulationModel,
    TransportationWorkOrder,
    VoxelCoord,
)


def _layout(
    grid: tuple[int, int, int],
    agent_types: dict[str, dict],
    receptors: list[dict],
    agents: list[dict],
    flows: list[dict] | None = None,
    **params,
) -> str:
    doc = {
        "parameters": {
            "grid": {"width": grid[0], "depth": grid[1], "height": grid[2]},
            "agent_types": agent_types,
            **params,
        },
        "receptors": receptors,
        "agents": agents,
        "material_flows": flows or [],
    }
    return json.dumps(doc, indent=2) + "\n"


def _csv(header: str, rows: list[str]) -> str:
    return "\n".join([header] + rows) + "\n"


# -- m1: one explicit transport, hand-checkable timing ----------------------

def scenario_m1() -> dict[str, str]:
    return {
        "layout.json": _layout(
            (12, 3, 1),
            {"Carrier": {"speed": 1.0, "load_time": 5.0, "unload_time": 5.0,
                         "elevation_penalty": 0.0, "capacity": 2, "groups": []}},
            [{"id": "R1", "x": 4, "y": 1, "z": 0, "groups": []},
             {"id": "R2", "x": 10, "y": 1, "z": 0, "groups": []}],
            [{"id": "A1", "type": "Carrier", "x": 0, "y": 0, "z": 0, "groups": []}],
        ),
        "transportation_orders.csv": _csv(
            "ItemIDs,pcs,DestLocID,SourceLocID,AgentType",
            ["ItemA,1,R2,R1,Carrier"],
        ),
        "item_locations.csv": _csv("ReceptorID,ItemID,Count", ["R1,ItemA,1"]),
    }


# -- m2: assembly deficit generation ----------------------------------------

def scenario_m2() -> dict[str, str]:
    return {
        "layout.json": _layout(
            (12, 3, 1),
            {"AGV": {"speed": 1.0, "load_time": 2.0, "unload_time": 2.0,
                     "elevation_penalty": 0.0, "capacity": 9, "groups": []}},
            [{"id": "WarehouseArea1", "x": 3, "y": 1, "z": 0, "groups": []},
             {"id": "ProcessB", "x": 9, "y": 1, "z": 0, "groups": []}],
            [{"id": "AGV1", "type": "AGV", "x": 0, "y": 0, "z": 0, "groups": []}],
        ),
        "assembly_orders.json": json.dumps(
            {
                "ProductA": {
                    "parts": {"Sub-ComponentA": 1, "partC": 3},
                    "where": "ProcessB",
                    "count": 3,
                    "processing_time": 10.0,
                }
            },
            indent=2,
        ) + "\n",
        "item_locations.csv": _csv(
            "ReceptorID,ItemID,Count",
            ["WarehouseArea1,Sub-ComponentA,3", "WarehouseArea1,partC,9"],
        ),
    }


# -- m3: chained material flows, no duplicate generation ---------------------

def scenario_m3() -> dict[str, str]:
    return {
        "layout.json": _layout(
            (12, 3, 1),
            {"Mover": {"speed": 1.0, "load_time": 1.0, "unload_time": 1.0,
                       "elevation_penalty": 0.0, "capacity": 4, "groups": []}},
            [{"id": "AreaA", "x": 2, "y": 1, "z": 0, "groups": []},
             {"id": "AreaB", "x": 5, "y": 1, "z": 0, "groups": []},
             {"id": "AreaC", "x": 8, "y": 1, "z": 0, "groups": []}],
            [{"id": "Mover1", "type": "Mover", "x": 0, "y": 0, "z": 0, "groups": []}],
            [{"source": "AreaA", "destination": "AreaB", "agent_types": ["Mover"]},
             {"source": "AreaB", "destination": "AreaC", "agent_types": ["Mover"]}],
        ),
        "item_locations.csv": _csv("ReceptorID,ItemID,Count", ["AreaA,Widget,4"]),
    }


# -- mode equivalence trio: m2's demand in each of the three input modes -----

def _m2_layout(flows: list[dict]) -> str:
    return _layout(
        (12, 3, 1),
        {"AGV": {"speed": 1.0, "load_time": 2.0, "unload_time": 2.0,
                 "elevation_penalty": 0.0, "capacity": 9, "groups": []}},
        [{"id": "WarehouseArea1", "x": 3, "y": 1, "z": 0, "groups": []},
         {"id": "ProcessB", "x": 9, "y": 1, "z": 0, "groups": []}],
        [{"id": "AGV1", "type": "AGV", "x": 0, "y": 0, "z": 0, "groups": []}],
        flows,
    )


_M2_STOCK = _csv(
    "ReceptorID,ItemID,Count",
    ["WarehouseArea1,Sub-ComponentA,3", "WarehouseArea1,partC,9"],
)


def scenario_mode_flows() -> dict[str, str]:
    return {
        "layout.json": _m2_layout(
            [{"source": "WarehouseArea1", "destination": "ProcessB", "agent_types": ["AGV"]}]
        ),
        "item_locations.csv": _M2_STOCK,
    }


def scenario_mode_assembly() -> dict[str, str]:
    return scenario_m2()


def scenario_mode_explicit() -> dict[str, str]:
    return {
        "layout.json": _m2_layout([]),
        "transportation_orders.csv": _csv(
            "ItemIDs,pcs,DestLocID,SourceLocID,AgentType",
            ["Sub-ComponentA,3,ProcessB,WarehouseArea1,AGV",
             "partC,9,ProcessB,WarehouseArea1,AGV"],
        ),
        "item_locations.csv": _M2_STOCK,
    }


# -- railcar factory ---------------------------------------------------------

def scenario_railcar() -> dict[str, str]:
    agent_types = {
        "AGV": {"speed": 2.0, "load_time": 4.0, "unload_time": 4.0,
                "elevation_penalty": 3.0, "capacity": 4, "groups": []},
        "Forklift_TypeA": {"speed": 1.5, "load_time": 6.0, "unload_time": 6.0,
                           "elevation_penalty": 4.0, "capacity": 8,
                           "groups": ["Forklifts"]},
        "Forklift_TypeB": {"speed": 1.5, "load_time": 6.0, "unload_time": 6.0,
                           "elevation_penalty": 4.0, "capacity": 4,
                           "groups": ["Forklifts"]},
        "Worker": {"speed": 1.2, "load_time": 3.0, "unload_time": 3.0,
                   "elevation_penalty": 2.0, "capacity": 4, "groups": []},
    }

    receptors = [
        {"id": "Truck_U1_1", "x": 4, "y": 2, "z": 0, "groups": ["Unload1", "UnloadingAreas"]},
        {"id": "Truck_U1_2", "x": 6, "y": 2, "z": 0, "groups": ["Unload1", "UnloadingAreas"]},
        {"id": "Truck_U2_1", "x": 10, "y": 2, "z": 0, "groups": ["Unload2", "UnloadingAreas"]},
        {"id": "Truck_U2_2", "x": 12, "y": 2, "z": 0, "groups": ["Unload2", "UnloadingAreas"]},
        {"id": "Receiving1", "x": 5, "y": 6, "z": 0, "groups": ["Receiving"]},
        {"id": "Receiving2", "x": 11, "y": 6, "z": 0, "groups": ["Receiving"]},
        {"id": "FloorStorage", "x": 20, "y": 6, "z": 0, "groups": ["Storage"]},
        {"id": "Rack1", "x": 24, "y": 6, "z": 1, "groups": ["Storage", "Racks"]},
        {"id": "Rack2", "x": 24, "y": 6, "z": 2, "groups": ["Storage", "Racks"]},
        {"id": "Rack3", "x": 26, "y": 6, "z": 1, "groups": ["Storage", "Racks"]},
        {"id": "Rack4", "x": 26, "y": 6, "z": 2, "groups": ["Storage", "Racks"]},
        {"id": "ASRS", "x": 30, "y": 6, "z": 2, "groups": ["Storage"]},
        {"id": "ToolCrib", "x": 34, "y": 6, "z": 0, "groups": []},
    ]
    for k in range(1, 5):
        receptors.append(
            {"id": f"Kitting{k}", "x": 2 + 4 * k, "y": 12, "z": 0, "groups": ["KittingST"]}
        )
    for line in range(1, 5):
        for station in range(1, 8):
            receptors.append(
                {
                    "id": f"L{line}.S{station}",
                    "x": 4 + 4 * station,
                    "y": 14 + 4 * line,
                    "z": 0,
                    "groups": [f"Line{line}", "AssemblyStations"],
                }
            )

    agents = [
        {"id": "FA1", "type": "Forklift_TypeA", "x": 2, "y": 2, "z": 0, "groups": []},
        {"id": "FA2", "type": "Forklift_TypeA", "x": 14, "y": 2, "z": 0, "groups": []},
        {"id": "FB1", "type": "Forklift_TypeB", "x": 8, "y": 6, "z": 0, "groups": []},
        {"id": "Worker1", "type": "Worker", "x": 4, "y": 14, "z": 0, "groups": []},
        {"id": "Worker2", "type": "Worker", "x": 8, "y": 14, "z": 0, "groups": []},
        {"id": "Worker3", "type": "Worker", "x": 12, "y": 14, "z": 0, "groups": []},
        {"id": "Worker4", "type": "Worker", "x": 16, "y": 14, "z": 0, "groups": []},
    ]
    for i in range(1, 5):
        agents.append(
            {"id": f"AGV{i}", "type": "AGV", "x": 2, "y": 14 + 4 * i, "z": 0, "groups": []}
        )

    flows = [
        {"source": "Unload1", "destination": "Receiving1", "agent_types": ["Forklift_TypeA"]},
        {"source": "Unload2", "destination": "Receiving2", "agent_types": ["Forklift_TypeA"]},
        {"source": "Receiving1", "destination": "FloorStorage", "agent_types": ["Forklift_TypeB"]},
        {"source": "Receiving2", "destination": "Racks", "agent_types": ["Forklift_TypeB"]},
        {"source": "KittingST", "destination": "AssemblyStations", "agent_types": ["AGV"]},
        {"source": "AssemblyStations", "destination": "AssemblyStations", "agent_types": ["AGV"]},
    ]

    # One seven-station build chain per line, deepest module first when parsed.
    def line_tree(line: int) -> dict:
        module1 = {"parts": {"Frame": 1, "KitA": 1}, "where": f"L{line}.S1",
                   "count": 1, "agent_type": "Worker", "processing_time": 600.0}
        module2 = {"parts": {f"L{line}.Module1": module1, "Bogie": 2},
                   "where": f"L{line}.S2", "count": 1, "agent_type": "Worker",
                   "processing_time": 600.0}
        module3 = {"parts": {f"L{line}.Module2": module2, "Panel": 1, "KitA": 1},
                   "where": f"L{line}.S3", "count": 1, "agent_type": "Worker",
                   "processing_time": 600.0}
        module4 = {"parts": {f"L{line}.Module3": module3, "Seat": 4},
                   "where": f"L{line}.S4", "count": 1, "agent_type": "Worker",
                   "processing_time": 600.0}
        module5 = {"parts": {f"L{line}.Module4": module4, "Glass": 2, "KitB": 1},
                   "where": f"L{line}.S5", "count": 1, "agent_type": "Worker",
                   "processing_time": 600.0}
        module6 = {"parts": {f"L{line}.Module5": module5, "Wire": 1, "KitB": 1},
                   "where": f"L{line}.S6", "count": 1, "agent_type": "Worker",
                   "processing_time": 600.0}
        return {"parts": {f"L{line}.Module6": module6, "Panel": 1},
                "where": f"L{line}.S7", "count": 2, "agent_type": "Worker",
                "processing_time": 600.0}

    assembly = {
        "KitA": {"parts": {"Part_Bolt": 2, "Part_Cable": 1}, "where": "Kitting1",
                 "count": 16, "agent_type": "Worker", "processing_time": 300.0},
        "KitB": {"parts": {"Part_Bolt": 1, "Part_Cable": 2}, "where": "Kitting2",
                 "count": 16, "agent_type": "Worker", "processing_time": 300.0},
    }
    for line in range(1, 5):
        assembly[f"L{line}.RailCar"] = line_tree(line)

    transport_rows = [
        "Tool,1,L1.S1,ToolCrib,Worker,toolrun1",
        "Tool,1,L2.S1,ToolCrib,Worker,toolrun1",
        "Tool,1,L3.S1,ToolCrib,Worker,toolrun1",
        "Tool,1,L4.S1,ToolCrib,Worker,toolrun1",
        "Tool,2,Kitting1,ToolCrib,Forklifts,",
        "Tool,1,ASRS,ToolCrib,Worker,",
        "Pallet,4,FloorStorage,ToolCrib,Worker,",
        "Pallet,2,Receiving1,ToolCrib,Worker,toolrun2",
        "Tool,2,Receiving2,ToolCrib,Worker,toolrun2",
    ]

    stock_rows = [
        # Inbound trailers carry replenishment spares only.
        "Truck_U1_1,SpareFrame,160",
        "Truck_U1_2,SparePanel,160",
        "Truck_U2_1,SpareBolt,160",
        "Truck_U2_2,SpareCable,160",
        # Kit raw material staged in the racks, split to force multi-sourcing.
        "Rack1,Part_Bolt,32",
        "Rack2,Part_Cable,32",
        "Rack3,Part_Bolt,16",
        "Rack4,Part_Cable,16",
        # Line material staged on the floor and in the automated store.
        "FloorStorage,Frame,8",
        "FloorStorage,Bogie,16",
        "FloorStorage,Panel,16",
        "FloorStorage,Seat,32",
        "FloorStorage,Glass,16",
        "ASRS,Wire,8",
        "ToolCrib,Tool,12",
        "ToolCrib,Pallet,8",
    ]

    return {
        "layout.json": _layout(
            (48, 36, 4), agent_types, receptors, agents, flows,
            default_processing_time=120.0, random_seed=0,
        ),
        "transportation_orders.csv": _csv(
            "ItemIDs,pcs,DestLocID,SourceLocID,AgentType,BatchID", transport_rows
        ),
        "assembly_orders.json": json.dumps(assembly, indent=2) + "\n",
        "item_locations.csv": _csv("ReceptorID,ItemID,Count", stock_rows),
    }


SCENARIOS = {
    "m1": scenario_m1,
    "m2": scenario_m2,
    "m3": scenario_m3,
    "mode-flows": scenario_mode_flows,
    "mode-assembly": scenario_mode_assembly,
    "mode-explicit": scenario_mode_explicit,
    "railcar": scenario_railcar,
}


def scenario_files(name: str) -> dict[str, str]:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; have {', '.join(sorted(SCENARIOS))}")
    return SCENARIOS[name]()


def build_scenario(name: str) -> SimulationModel:
    return parse_model_files(scenario_files(name))


# -- random instances for property tests -------------------------------------

def random_model(seed: int) -> SimulationModel:
    """Small random but always-wellformed instance.

    Receptors occupy distinct even/even cells, agents stand on odd/odd cells;
    agents therefore never start blocked and no receptor can be walled in.
    """
    rng = random.Random(seed)
    width = rng.randint(5, 30)
    depth = rng.randint(5, 30)
    height = rng.randint(1, 3)

    type_ids = [f"T{i}" for i in range(1, rng.randint(2, 4))]
    agent_types = {
        tid: AgentType(
            agent_type_id=tid,
            speed=rng.choice([0.5, 1.0, 1.5, 2.0, 3.0]),
            base_load_time=rng.randint(0, 8),
            base_unload_time=rng.randint(0, 8),
            elevation_penalty_per_level=rng.randint(0, 5),
            capacity=rng.randint(1, 6),
            group_ids=("Movers",) if rng.random() < 0.5 else (),
        )
        for tid in type_ids
    }

    even_cells = [
        (x, y) for x in range(0, width, 2) for y in range(0, depth, 2)
    ]
    rng.shuffle(even_cells)
    receptor_count = rng.randint(2, min(12, len(even_cells)))
    receptors: dict[str, Receptor] = {}
    for i in range(receptor_count):
        rid = f"R{i + 1}"
        x, y = even_cells[i]
        groups = tuple(
            g for g in ("GrpA", "GrpB") if rng.random() < 0.3
        )
        receptors[rid] = Receptor(rid, VoxelCoord(x, y, rng.randint(0, height - 1)), groups)

    odd_cells = [
        (x, y) for x in range(1, width, 2) for y in range(1, depth, 2)
    ]
    rng.shuffle(odd_cells)
    agent_count = rng.randint(1, min(10, len(odd_cells)))
    agents: dict[str, Agent] = {}
    for i in range(agent_count):
        aid = f"A{i + 1}"
        x, y = odd_cells[i]
        agents[aid] = Agent(aid, rng.choice(type_ids), VoxelCoord(x, y, 0), ())

    item_ids = [f"Item{i}" for i in range(1, rng.randint(2, 7))]
    item_locations: list[tuple[str, str, int]] = []
    seen: set[tuple[str, str]] = set()
    for _ in range(rng.randint(1, 12)):
        key = (rng.choice(sorted(receptors)), rng.choice(item_ids))
        if key not in seen:
            seen.add(key)
            item_locations.append((key[0], key[1], rng.randint(1, 20)))

    location_refs = sorted(receptors) + ["GrpA", "GrpB"]
    group_refs_valid = {
        g for r in receptors.values() for g in r.group_ids
    }

    def pick_location() -> str:
        while True:
            ref = rng.choice(location_refs)
            if ref in receptors or ref in group_refs_valid:
                return ref

    transports = []
    for i in range(rng.randint(0, 60)):
        transports.append(
            TransportationWorkOrder(
                order_id=f"t{i + 1:04d}",
                item_id=rng.choice(item_ids),
                count=rng.randint(1, 8),
                source=pick_location(),
                destination=pick_location(),
                agent_type=rng.choice(type_ids),
                batch_id=f"b{rng.randint(1, 3)}" if rng.random() < 0.2 else None,
            )
        )

    return SimulationModel(
        parameters=Parameters(
            grid_width=width,
            grid_depth=depth,
            grid_height=height,
            voxel_edge_length=1.0,
            default_processing_time=float(rng.randint(0, 20)),
            random_seed=seed,
            agent_types=agent_types,
        ),
        receptors=receptors,
        agents=agents,
        material_flows=[],
        transportation_orders=transports,
        assembly_orders=[],
        item_locations=item_locations,
    )
