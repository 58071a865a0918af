"""Parsers, validation and canonical serialization for the five input kinds.

Input files are deliberately plain: comma-separated text for transportation
orders and item locations, JSON for the layout and for the assembly order
tree. Any malformed text raises :class:`ParseError` carrying row or key
context; nothing else escapes the parsers.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import Diagnostic, ParseError, SerializationError, UnknownAgentType, UnknownLocation
from .model import (
    Agent,
    AgentType,
    AssemblyWorkOrder,
    MaterialFlow,
    Parameters,
    Receptor,
    SimulationModel,
    TransportationWorkOrder,
    VoxelCoord,
    resolve_agent_type,
    resolve_location,
)

TRANSPORT_COLUMNS = ("ItemIDs", "pcs", "DestLocID", "SourceLocID", "AgentType")
ITEM_LOCATION_COLUMNS = ("ReceptorID", "ItemID", "Count")

RESERVED_NODE_KEYS = ("parts", "where", "count", "agent_type", "processing_time")


def _split_rows(text: str, filename: str) -> list[tuple[int, list[str]]]:
    """Split raw CSV text into (row_number, fields) pairs, no quoting allowed."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if '"' in line:
            raise ParseError.single(
                "QuotedField", f"{filename}:{lineno}",
                "quoted fields are not supported; remove double quotes",
            )
        rows.append((lineno, [tok.strip() for tok in line.split(",")]))
    return rows


def _header_map(
    header: list[str], mandatory: tuple[str, ...], filename: str, lineno: int
) -> dict[str, int]:
    seen: dict[str, int] = {}
    for idx, name in enumerate(header):
        if name in seen:
            raise ParseError.single(
                "DuplicateColumn", f"{filename}:{lineno}", f"column {name!r} appears twice"
            )
        seen[name] = idx
    missing = [c for c in mandatory if c not in seen]
    if missing:
        raise ParseError.single(
            "MissingColumn", f"{filename}:{lineno}",
            f"header is missing required column(s) {', '.join(missing)}",
        )
    return seen


def _parse_count(token: str, filename: str, lineno: int, column: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError.single(
            "NonIntegerCount", f"{filename}:{lineno}",
            f"column {column!r} must be an integer, got {token!r}",
        ) from None
    if value < 1:
        raise ParseError.single(
            "NonPositiveCount", f"{filename}:{lineno}",
            f"column {column!r} must be >= 1, got {value}",
        )
    return value


def _require(token: str, filename: str, lineno: int, column: str) -> str:
    if not token:
        raise ParseError.single(
            "EmptyField", f"{filename}:{lineno}", f"column {column!r} is empty"
        )
    return token


def parse_transportation_orders(
    text: str, filename: str = "transportation_orders.csv"
) -> list[TransportationWorkOrder]:
    """Parse the transport order table; one order per data row, file order kept."""
    rows = _split_rows(text, filename)
    if not rows:
        raise ParseError.single("MissingColumn", f"{filename}:1", "file is empty, header row required")
    header_line, header = rows[0]
    columns = _header_map(header, TRANSPORT_COLUMNS, filename, header_line)
    custom_names = [c for c in header if c not in TRANSPORT_COLUMNS and c != "BatchID"]

    orders: list[TransportationWorkOrder] = []
    for lineno, fields in rows[1:]:
        if len(fields) != len(header):
            raise ParseError.single(
                "RowWidth", f"{filename}:{lineno}",
                f"row has {len(fields)} fields, header has {len(header)}",
            )
        get = lambda name: fields[columns[name]]
        batch = get("BatchID") if "BatchID" in columns else ""
        orders.append(
            TransportationWorkOrder(
                order_id=f"t{len(orders) + 1:04d}",
                item_id=_require(get("ItemIDs"), filename, lineno, "ItemIDs"),
                count=_parse_count(_require(get("pcs"), filename, lineno, "pcs"), filename, lineno, "pcs"),
                source=_require(get("SourceLocID"), filename, lineno, "SourceLocID"),
                destination=_require(get("DestLocID"), filename, lineno, "DestLocID"),
                agent_type=_require(get("AgentType"), filename, lineno, "AgentType"),
                batch_id=batch or None,
                custom_fields={name: get(name) for name in custom_names},
                origin="user",
            )
        )
    return orders


def parse_item_locations(
    text: str, filename: str = "item_locations.csv"
) -> list[tuple[str, str, int]]:
    """Parse starting stock rows; duplicate (receptor, item) rows merge by sum."""
    rows = _split_rows(text, filename)
    if not rows:
        raise ParseError.single("MissingColumn", f"{filename}:1", "file is empty, header row required")
    header_line, header = rows[0]
    columns = _header_map(header, ITEM_LOCATION_COLUMNS, filename, header_line)

    merged: dict[tuple[str, str], int] = {}
    for lineno, fields in rows[1:]:
        if len(fields) != len(header):
            raise ParseError.single(
                "RowWidth", f"{filename}:{lineno}",
                f"row has {len(fields)} fields, header has {len(header)}",
            )
        receptor = _require(fields[columns["ReceptorID"]], filename, lineno, "ReceptorID")
        item = _require(fields[columns["ItemID"]], filename, lineno, "ItemID")
        count = _parse_count(
            _require(fields[columns["Count"]], filename, lineno, "Count"), filename, lineno, "Count"
        )
        key = (receptor, item)
        merged[key] = merged.get(key, 0) + count
    return [(receptor, item, count) for (receptor, item), count in merged.items()]


def _node_int(value: Any, location: str, what: str) -> int:
    if type(value) is not int:
        raise ParseError.single(
            "NonPositiveCount", location, f"{what} must be an integer, got {value!r}"
        )
    if value < 1:
        raise ParseError.single("NonPositiveCount", location, f"{what} must be >= 1, got {value}")
    return value


def _flatten_assembly(
    item_id: str,
    node: Any,
    output_count: int,
    ancestors: tuple[str, ...],
    path: str,
    filename: str,
    out: list[AssemblyWorkOrder],
) -> None:
    location = f"{filename}:{path}"
    if not isinstance(node, dict):
        raise ParseError.single("BadNode", location, f"expected an object for {item_id!r}, got {type(node).__name__}")
    if item_id in ancestors:
        raise ParseError.single(
            "CyclicBom", location, f"{item_id!r} appears on its own ancestor path {' > '.join(ancestors)}"
        )
    if "where" not in node:
        raise ParseError.single("MissingWhere", location, f"node {item_id!r} has no 'where' key")
    where = node["where"]
    if not isinstance(where, str) or not where:
        raise ParseError.single("MissingWhere", location, f"'where' of {item_id!r} must be a non-empty string")
    parts = node.get("parts")
    if not isinstance(parts, dict) or not parts:
        raise ParseError.single("BadNode", location, f"node {item_id!r} needs a non-empty 'parts' object")

    agent_type = node.get("agent_type")
    if agent_type is not None and (not isinstance(agent_type, str) or not agent_type):
        raise ParseError.single("BadNode", location, f"'agent_type' of {item_id!r} must be a non-empty string")
    processing_time = node.get("processing_time")
    if processing_time is not None:
        if isinstance(processing_time, bool) or not isinstance(processing_time, (int, float)) or processing_time < 0:
            raise ParseError.single(
                "BadNode", location, f"'processing_time' of {item_id!r} must be a non-negative number"
            )
        processing_time = float(processing_time)
    custom: dict[str, str] = {}
    for key, value in node.items():
        if key in RESERVED_NODE_KEYS:
            continue
        if isinstance(value, (dict, list)):
            raise ParseError.single("InvalidField", location, f"custom field {key!r} must be a scalar")
        custom[key] = value if isinstance(value, str) else json.dumps(value)

    inputs: list[tuple[str, int]] = []
    nested: list[tuple[str, dict, int]] = []
    for part_id, spec in parts.items():
        if isinstance(spec, dict):
            per_unit = _node_int(spec.get("count"), f"{location}/parts/{part_id}", f"'count' of nested part {part_id!r}")
            inputs.append((part_id, per_unit))
            nested.append((part_id, spec, per_unit))
        else:
            per_unit = _node_int(spec, f"{location}/parts/{part_id}", f"count of part {part_id!r}")
            inputs.append((part_id, per_unit))

    out.append(
        AssemblyWorkOrder(
            order_id=f"a{len(out) + 1:04d}",
            inputs=inputs,
            output_item=item_id,
            output_count=output_count,
            place=where,
            agent_type=agent_type,
            processing_time=processing_time,
            custom_fields=custom,
        )
    )
    for part_id, spec, per_unit in nested:
        _flatten_assembly(
            part_id, spec, per_unit * output_count, ancestors + (item_id,),
            f"{path}/parts/{part_id}", filename, out,
        )


def parse_assembly_orders(
    text: str, filename: str = "assembly_orders.json"
) -> list[AssemblyWorkOrder]:
    """Parse the product tree and flatten it depth-first into one order per node.

    A nested part's ``count`` is its per-unit requirement; the flattened order
    for that part produces per-unit requirement times the parent's output count.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError.single("BadJson", f"{filename}:{exc.lineno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError.single("BadNode", filename, "top level must be an object of product nodes")
    orders: list[AssemblyWorkOrder] = []
    for product_id, node in doc.items():
        count = _node_int(
            node.get("count") if isinstance(node, dict) else None,
            f"{filename}:{product_id}", f"'count' of {product_id!r}",
        )
        _flatten_assembly(product_id, node, count, (), product_id, filename, orders)
    return orders


def _layout_number(value: Any, location: str, what: str, minimum: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError.single("BadLayout", location, f"{what} must be a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ParseError.single("BadLayout", location, f"{what} must be >= {minimum}, got {value}")
    return float(value)


def _layout_int(value: Any, location: str, what: str, minimum: int) -> int:
    if type(value) is not int:
        raise ParseError.single("BadLayout", location, f"{what} must be an integer, got {value!r}")
    if value < minimum:
        raise ParseError.single("BadLayout", location, f"{what} must be >= {minimum}, got {value}")
    return value


def _layout_groups(value: Any, location: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list) or any(not isinstance(g, str) or not g for g in value):
        raise ParseError.single("BadLayout", location, "'groups' must be a list of non-empty strings")
    return tuple(value)


def _layout_coord(entry: dict, location: str, params: Parameters) -> VoxelCoord:
    coord = VoxelCoord(
        _layout_int(entry.get("x"), location, "'x'", 0),
        _layout_int(entry.get("y"), location, "'y'", 0),
        _layout_int(entry.get("z", 0), location, "'z'", 0),
    )
    if not params.in_grid(coord):
        raise ParseError.single(
            "OutOfGrid", location,
            f"coordinate ({coord.x}, {coord.y}, {coord.z}) is outside the "
            f"{params.grid_width}x{params.grid_depth}x{params.grid_height} grid",
        )
    return coord


def parse_layout(
    text: str, filename: str = "layout.json"
) -> tuple[Parameters, dict[str, Receptor], dict[str, Agent], list[MaterialFlow]]:
    """Parse the layout document: parameters, receptors, agents, optional flows."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError.single("BadJson", f"{filename}:{exc.lineno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError.single("BadLayout", filename, "top level must be an object")

    raw_params = doc.get("parameters")
    if not isinstance(raw_params, dict):
        raise ParseError.single("MissingParameters", filename, "'parameters' object is required")
    grid = raw_params.get("grid")
    if not isinstance(grid, dict):
        raise ParseError.single("MissingParameters", f"{filename}:parameters", "'grid' object is required")

    agent_types: dict[str, AgentType] = {}
    raw_types = raw_params.get("agent_types", {})
    if not isinstance(raw_types, dict):
        raise ParseError.single("BadLayout", f"{filename}:parameters", "'agent_types' must be an object")
    for type_id, spec in raw_types.items():
        loc = f"{filename}:parameters.agent_types.{type_id}"
        if not isinstance(spec, dict):
            raise ParseError.single("BadLayout", loc, "agent type must be an object")
        agent_types[type_id] = AgentType(
            agent_type_id=type_id,
            speed=_layout_number(spec.get("speed"), loc, "'speed'", None),
            base_load_time=_layout_number(spec.get("load_time", 0.0), loc, "'load_time'", 0.0),
            base_unload_time=_layout_number(spec.get("unload_time", 0.0), loc, "'unload_time'", 0.0),
            elevation_penalty_per_level=_layout_number(
                spec.get("elevation_penalty", 0.0), loc, "'elevation_penalty'", 0.0
            ),
            capacity=_layout_int(spec.get("capacity", 1), loc, "'capacity'", 1),
            group_ids=_layout_groups(spec.get("groups"), loc),
        )
        if agent_types[type_id].speed <= 0:
            raise ParseError.single("BadLayout", loc, "'speed' must be > 0")

    try:
        params = Parameters(
            grid_width=_layout_int(grid.get("width"), f"{filename}:parameters.grid", "'width'", 1),
            grid_depth=_layout_int(grid.get("depth"), f"{filename}:parameters.grid", "'depth'", 1),
            grid_height=_layout_int(grid.get("height"), f"{filename}:parameters.grid", "'height'", 1),
            voxel_edge_length=_layout_number(
                raw_params.get("voxel_edge_length", 1.0), f"{filename}:parameters", "'voxel_edge_length'", None
            ),
            default_processing_time=_layout_number(
                raw_params.get("default_processing_time", 0.0), f"{filename}:parameters",
                "'default_processing_time'", 0.0,
            ),
            random_seed=_layout_int(raw_params.get("random_seed", 0), f"{filename}:parameters", "'random_seed'", 0),
            agent_types=agent_types,
        )
    except ValueError as exc:
        raise ParseError.single("MissingParameters", f"{filename}:parameters", str(exc)) from None

    raw_receptors = doc.get("receptors")
    if not isinstance(raw_receptors, list) or not raw_receptors:
        raise ParseError.single("ReceptorRequired", filename, "at least one receptor is required")
    receptors: dict[str, Receptor] = {}
    coords_seen: dict[tuple[int, int, int], str] = {}
    for i, entry in enumerate(raw_receptors):
        loc = f"{filename}:receptors[{i}]"
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str) or not entry.get("id"):
            raise ParseError.single("BadLayout", loc, "receptor needs a non-empty string 'id'")
        rid = entry["id"]
        if rid in receptors:
            raise ParseError.single("DuplicateId", loc, f"receptor id {rid!r} already used")
        coord = _layout_coord(entry, loc, params)
        key = (coord.x, coord.y, coord.z)
        if key in coords_seen:
            raise ParseError.single(
                "CoordConflict", loc,
                f"receptor {rid!r} shares voxel ({coord.x}, {coord.y}, {coord.z}) with {coords_seen[key]!r}",
            )
        coords_seen[key] = rid
        receptors[rid] = Receptor(rid, coord, _layout_groups(entry.get("groups"), loc))

    raw_agents = doc.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        raise ParseError.single("AgentRequired", filename, "at least one agent is required")
    agents: dict[str, Agent] = {}
    for i, entry in enumerate(raw_agents):
        loc = f"{filename}:agents[{i}]"
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str) or not entry.get("id"):
            raise ParseError.single("BadLayout", loc, "agent needs a non-empty string 'id'")
        aid = entry["id"]
        if aid in agents:
            raise ParseError.single("DuplicateId", loc, f"agent id {aid!r} already used")
        type_id = entry.get("type")
        if not isinstance(type_id, str) or type_id not in agent_types:
            raise ParseError.single(
                "UnknownAgentType", loc, f"agent {aid!r} names unknown type {type_id!r}"
            )
        agents[aid] = Agent(aid, type_id, _layout_coord(entry, loc, params), _layout_groups(entry.get("groups"), loc))

    flows: list[MaterialFlow] = []
    raw_flows = doc.get("material_flows", [])
    if not isinstance(raw_flows, list):
        raise ParseError.single("BadLayout", filename, "'material_flows' must be a list")
    for i, entry in enumerate(raw_flows):
        loc = f"{filename}:material_flows[{i}]"
        if not isinstance(entry, dict):
            raise ParseError.single("BadLayout", loc, "flow must be an object")
        source = entry.get("source")
        destination = entry.get("destination")
        types = entry.get("agent_types")
        if not isinstance(source, str) or not source or not isinstance(destination, str) or not destination:
            raise ParseError.single("BadLayout", loc, "flow needs 'source' and 'destination' strings")
        if not isinstance(types, list) or not types or any(not isinstance(t, str) or not t for t in types):
            raise ParseError.single("BadLayout", loc, "flow needs a non-empty 'agent_types' list")
        flows.append(MaterialFlow(source, destination, list(types)))

    return params, receptors, agents, flows


def build_model(
    layout: tuple[Parameters, dict[str, Receptor], dict[str, Agent], list[MaterialFlow]],
    transportation_orders: list[TransportationWorkOrder] | None = None,
    assembly_orders: list[AssemblyWorkOrder] | None = None,
    item_locations: list[tuple[str, str, int]] | None = None,
) -> SimulationModel:
    params, receptors, agents, flows = layout
    return SimulationModel(
        parameters=params,
        receptors=receptors,
        agents=agents,
        material_flows=flows,
        transportation_orders=transportation_orders or [],
        assembly_orders=assembly_orders or [],
        item_locations=item_locations or [],
    )


def validate_model(model: SimulationModel) -> list[Diagnostic]:
    """Check every cross-reference and structural invariant; empty list = valid."""
    diags: list[Diagnostic] = []
    err = lambda code, location, msg: diags.append(Diagnostic("error", code, location, msg))
    warn = lambda code, location, msg: diags.append(Diagnostic("warning", code, location, msg))
    params = model.parameters

    if not model.receptors:
        err("ReceptorRequired", "layout", "model has no receptors")
    if not model.agents:
        err("AgentRequired", "layout", "model has no agents")

    coords_seen: dict[tuple[int, int, int], str] = {}
    blocked_cells: set[tuple[int, int]] = set()
    for rid, receptor in model.receptors.items():
        key = (receptor.coord.x, receptor.coord.y, receptor.coord.z)
        if key in coords_seen:
            err("CoordConflict", rid, f"shares voxel {key} with {coords_seen[key]!r}")
        coords_seen[key] = rid
        if not params.in_grid(receptor.coord):
            err("OutOfGrid", rid, f"receptor at {key} is outside the grid")
        blocked_cells.add(receptor.coord.cell)

    for aid, agent in model.agents.items():
        if agent.agent_type_id not in params.agent_types:
            err("UnknownAgentType", aid, f"agent type {agent.agent_type_id!r} is not declared")
        if not params.in_grid(agent.coord):
            err("OutOfGrid", aid, f"agent at ({agent.coord.x}, {agent.coord.y}, {agent.coord.z}) is outside the grid")
        if agent.coord.cell in blocked_cells:
            err(
                "AgentStartBlocked", aid,
                f"agent starts on cell {agent.coord.cell} which is covered by a receptor footprint",
            )

    def check_location(ref: str, location: str) -> None:
        try:
            resolve_location(ref, model)
        except UnknownLocation:
            err("UnknownLocation", location, f"{ref!r} matches no receptor id or group")

    def check_agent_type(ref: str, location: str) -> None:
        try:
            resolve_agent_type(ref, model)
        except UnknownAgentType:
            agent_groups = {g for a in model.agents.values() for g in a.group_ids}
            if ref not in agent_groups:
                err("UnknownAgentType", location, f"{ref!r} matches no agent type id, type group or agent group")

    for i, flow in enumerate(model.material_flows):
        loc = f"material_flows[{i}]"
        check_location(flow.source, loc)
        check_location(flow.destination, loc)
        for ref in flow.agent_types:
            check_agent_type(ref, loc)

    stored_items = {item for _, item, _ in model.item_locations}
    produced_items = {o.output_item for o in model.assembly_orders}

    seen_order_ids: set[str] = set()
    for order in model.transportation_orders:
        loc = order.order_id
        if order.order_id in seen_order_ids:
            err("DuplicateId", loc, "transport order id already used")
        seen_order_ids.add(order.order_id)
        if order.count < 1:
            err("NonPositiveCount", loc, f"count must be >= 1, got {order.count}")
        check_location(order.source, loc)
        check_location(order.destination, loc)
        check_agent_type(order.agent_type, loc)
        if order.item_id not in stored_items and order.item_id not in produced_items:
            warn(
                "UnsourceableItem", loc,
                f"item {order.item_id!r} is neither stored anywhere nor produced by any assembly order",
            )

    output_seen: set[str] = set()
    for order in model.assembly_orders:
        loc = order.order_id
        if order.order_id in seen_order_ids:
            err("DuplicateId", loc, "assembly order id already used")
        seen_order_ids.add(order.order_id)
        if not order.inputs:
            err("EmptyInputs", loc, "assembly order has no inputs")
        if order.output_count < 1:
            err("NonPositiveCount", loc, f"output count must be >= 1, got {order.output_count}")
        check_location(order.place, loc)
        if order.agent_type is not None:
            check_agent_type(order.agent_type, loc)
        if order.output_item in output_seen:
            warn(
                "DuplicateOutput", loc,
                f"more than one assembly order produces {order.output_item!r}; "
                "canonical serialization of this model will fail",
            )
        output_seen.add(order.output_item)
        for item_id, per_unit in order.inputs:
            if per_unit < 1:
                err("NonPositiveCount", loc, f"input {item_id!r} per-unit count must be >= 1")
            if item_id not in stored_items and item_id not in produced_items:
                warn(
                    "UnobtainableInput", loc,
                    f"input {item_id!r} is never stored and never produced; the order cannot start",
                )

    for receptor_id, item_id, count in model.item_locations:
        loc = f"item_locations[{receptor_id}/{item_id}]"
        if receptor_id not in model.receptors:
            err("UnknownLocation", loc, f"receptor {receptor_id!r} does not exist")
        if count < 1:
            err("NonPositiveCount", loc, f"count must be >= 1, got {count}")

    return diags


def _csv_token(value: str, location: str) -> str:
    if any(ch in value for ch in ',\n\r"'):
        raise SerializationError(f"{location}: value {value!r} cannot be written without quoting")
    return value


def serialize_transportation_orders(orders: list[TransportationWorkOrder]) -> str:
    custom_names: list[str] = []
    for order in orders:
        for name in order.custom_fields:
            if name not in custom_names:
                custom_names.append(name)
    with_batch = any(o.batch_id for o in orders)
    header = list(TRANSPORT_COLUMNS) + (["BatchID"] if with_batch else []) + custom_names
    lines = [",".join(header)]
    for order in orders:
        row = [
            _csv_token(order.item_id, order.order_id),
            str(order.count),
            _csv_token(order.destination, order.order_id),
            _csv_token(order.source, order.order_id),
            _csv_token(order.agent_type, order.order_id),
        ]
        if with_batch:
            row.append(_csv_token(order.batch_id or "", order.order_id))
        row += [_csv_token(order.custom_fields.get(name, ""), order.order_id) for name in custom_names]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def serialize_item_locations(item_locations: list[tuple[str, str, int]]) -> str:
    lines = [",".join(ITEM_LOCATION_COLUMNS)]
    for receptor_id, item_id, count in item_locations:
        lines.append(f"{_csv_token(receptor_id, receptor_id)},{_csv_token(item_id, receptor_id)},{count}")
    return "\n".join(lines) + "\n"


def serialize_assembly_orders(orders: list[AssemblyWorkOrder]) -> str:
    doc: dict[str, Any] = {}
    for order in orders:
        if order.output_item in doc:
            raise SerializationError(
                f"{order.order_id}: two orders produce {order.output_item!r}; "
                "the tree format needs unique top-level product ids"
            )
        node: dict[str, Any] = {
            "parts": {item_id: per_unit for item_id, per_unit in order.inputs},
            "where": order.place,
            "count": order.output_count,
        }
        if order.agent_type is not None:
            node["agent_type"] = order.agent_type
        if order.processing_time is not None:
            node["processing_time"] = order.processing_time
        node.update(order.custom_fields)
        doc[order.output_item] = node
    return json.dumps(doc, indent=2) + "\n"


def serialize_layout(model: SimulationModel) -> str:
    params = model.parameters
    doc = {
        "parameters": {
            "grid": {"width": params.grid_width, "depth": params.grid_depth, "height": params.grid_height},
            "voxel_edge_length": params.voxel_edge_length,
            "default_processing_time": params.default_processing_time,
            "random_seed": params.random_seed,
            "agent_types": {
                t.agent_type_id: {
                    "speed": t.speed,
                    "load_time": t.base_load_time,
                    "unload_time": t.base_unload_time,
                    "elevation_penalty": t.elevation_penalty_per_level,
                    "capacity": t.capacity,
                    "groups": list(t.group_ids),
                }
                for t in params.agent_types.values()
            },
        },
        "receptors": [
            {"id": r.receptor_id, "x": r.coord.x, "y": r.coord.y, "z": r.coord.z, "groups": list(r.group_ids)}
            for r in model.receptors.values()
        ],
        "agents": [
            {"id": a.agent_id, "type": a.agent_type_id, "x": a.coord.x, "y": a.coord.y, "z": a.coord.z,
             "groups": list(a.group_ids)}
            for a in model.agents.values()
        ],
        "material_flows": [
            {"source": f.source, "destination": f.destination, "agent_types": list(f.agent_types)}
            for f in model.material_flows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def serialize_model(model: SimulationModel) -> dict[str, str]:
    """Render the model back to its four canonical files; parse of the result
    reproduces the model field for field."""
    return {
        "layout.json": serialize_layout(model),
        "transportation_orders.csv": serialize_transportation_orders(model.transportation_orders),
        "assembly_orders.json": serialize_assembly_orders(model.assembly_orders),
        "item_locations.csv": serialize_item_locations(model.item_locations),
    }


def parse_model_files(files: dict[str, str]) -> SimulationModel:
    """Build a model from canonical file texts keyed by canonical file name.

    Only ``layout.json`` is mandatory; the other inputs default to empty.
    """
    if "layout.json" not in files:
        raise ParseError.single("MissingParameters", "layout.json", "layout file is required")
    layout = parse_layout(files["layout.json"])
    transport = (
        parse_transportation_orders(files["transportation_orders.csv"])
        if "transportation_orders.csv" in files else []
    )
    assembly = (
        parse_assembly_orders(files["assembly_orders.json"])
        if "assembly_orders.json" in files else []
    )
    item_locations = (
        parse_item_locations(files["item_locations.csv"])
        if "item_locations.csv" in files else []
    )
    return build_model(layout, transport, assembly, item_locations)
