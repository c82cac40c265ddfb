"""Concrete system description: rooms, doors, devices, network links, users.

Models are plain immutable dataclasses and are never mutated after
construction; `validate` reports problems as a diagnostic list instead of
raising so that every issue can be surfaced in one pass.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Union

PROTOCOLS = ("tcp", "udp")


@dataclass(frozen=True)
class Zone:
    id: str
    external: bool = False


@dataclass(frozen=True)
class DoorRule:
    """One direction of a door; a two-way door is two rules.

    `required` holds alternative credentials: owning any one of them opens
    the door, and the empty set means no credential is needed.
    """

    door: str
    src: str
    dst: str
    required: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Port:
    id: str
    mac: str
    ip: str
    owner: str


@dataclass(frozen=True)
class Link:
    """Undirected cable between two ports."""

    endpoints: frozenset[str]

    @classmethod
    def between(cls, a: str, b: str) -> "Link":
        return cls(frozenset((a, b)))


@dataclass(frozen=True)
class PhyAcc:
    """Requires the user to be in the device's room."""


@dataclass(frozen=True)
class LocAcc:
    """Requires a session on `device` under an account of group `group`."""

    device: str
    group: str


@dataclass(frozen=True)
class RemAcc:
    """Requires a session on some host with a network path to the device."""

    protocol: str
    port: int


Precondition = Union[PhyAcc, LocAcc, RemAcc]


@dataclass(frozen=True)
class BecomesAccount:
    device: str
    account: str


@dataclass(frozen=True)
class OperationVariant:
    """A way of performing an operation.

    `required` lists alternative credentials (any one suffices; empty means
    none needed).  A variant with an effect opens a session; one without is
    a pure action that leaves the user's state unchanged.
    """

    precondition: Precondition
    required: frozenset[str] = frozenset()
    effect: BecomesAccount | None = None


@dataclass(frozen=True)
class Location:
    """Zone plus the hosting chain (outermost host first) for software objects."""

    zone: str
    hosts: tuple[str, ...] = ()


@dataclass(frozen=True)
class Device:
    id: str
    location: Location
    switch: bool = False
    ports: dict[str, Port] = field(default_factory=dict)
    groups: dict[str, frozenset[str]] = field(default_factory=dict)
    operations: dict[str, tuple[OperationVariant, ...]] = field(default_factory=dict)
    # Filtering rules are accepted only as an empty block; anything else is
    # rejected by validate().
    filters: tuple[str, ...] = ()


@dataclass(frozen=True)
class User:
    id: str
    initial_zone: str
    credentials: frozenset[str] = frozenset()


@dataclass(frozen=True)
class SystemModel:
    credentials: frozenset[str] = frozenset()
    zones: dict[str, Zone] = field(default_factory=dict)
    doors: frozenset[DoorRule] = frozenset()
    devices: dict[str, Device] = field(default_factory=dict)
    links: frozenset[Link] = frozenset()
    users: dict[str, User] = field(default_factory=dict)

    def with_user_credentials(self, user_id: str, credentials: Iterable[str]) -> "SystemModel":
        """Functional update of one user's credential set."""
        users = dict(self.users)
        users[user_id] = replace(users[user_id], credentials=frozenset(credentials))
        return replace(self, users=users)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


class ModelError(Exception):
    """Raised when an operation needs a valid model but validation failed."""

    def __init__(self, message: str, diagnostics: Iterable[Diagnostic] = ()):
        super().__init__(message)
        self.diagnostics = tuple(diagnostics)


def external_zone(model: SystemModel) -> str:
    """Id of the unique external zone."""
    ids = sorted(z.id for z in model.zones.values() if z.external)
    if len(ids) != 1:
        raise ModelError(f"expected exactly one external zone, found {len(ids)}")
    return ids[0]


def root_device(model: SystemModel, device_id: str) -> Device:
    """Physical device ultimately hosting `device_id` (itself if not hosted)."""
    dev = model.devices[device_id]
    seen = {device_id}
    while dev.location.hosts:
        host = dev.location.hosts[-1]
        if host in seen or host not in model.devices:
            raise ModelError(f"unresolvable hosting chain for device '{device_id}'")
        seen.add(host)
        dev = model.devices[host]
    return dev


def validate(model: SystemModel) -> list[Diagnostic]:
    """Check every structural invariant; empty result means the model is well formed."""
    out: list[Diagnostic] = []

    def error(location, message):
        out.append(Diagnostic("error", location, message))

    def warning(location, message):
        out.append(Diagnostic("warning", location, message))

    externals = [z.id for z in model.zones.values() if z.external]
    if len(externals) != 1:
        error("model", f"expected exactly one external zone, found {len(externals)}")

    for name in sorted(model.credentials):
        if not name:
            error("credential", "credential name must be nonempty")
    for zid in sorted(model.zones):
        if not zid:
            error("zone", "zone id must be nonempty")

    for rule in sorted(model.doors, key=lambda r: (r.door, r.src, r.dst)):
        loc = f"door {rule.door} ({rule.src} -> {rule.dst})"
        if rule.src == rule.dst:
            error(loc, "door must connect two distinct zones")
        for zid in (rule.src, rule.dst):
            if zid not in model.zones:
                error(loc, f"unknown zone '{zid}'")
        for cred in sorted(rule.required - model.credentials):
            error(loc, f"unknown credential '{cred}'")

    port_owner: dict[str, str] = {}
    for dev in sorted(model.devices.values(), key=lambda d: d.id):
        loc = f"device {dev.id}"
        if dev.location.zone not in model.zones:
            error(loc, f"unknown zone '{dev.location.zone}'")
        chain_ok = True
        for host in dev.location.hosts:
            if host not in model.devices:
                error(loc, f"unknown hosting device '{host}'")
                chain_ok = False
        if chain_ok and dev.location.hosts:
            # walk direct hosts to detect cycles
            seen = {dev.id}
            cur = dev
            while cur.location.hosts:
                host = cur.location.hosts[-1]
                if host in seen:
                    error(loc, "cyclic hosting chain")
                    chain_ok = False
                    break
                if host not in model.devices:
                    chain_ok = False
                    break
                seen.add(host)
                cur = model.devices[host]
            direct = dev.location.hosts[-1]
            if chain_ok and model.devices[direct].location.zone != dev.location.zone:
                error(loc, f"zone differs from hosting device '{direct}'")
        if dev.switch and dev.operations:
            error(loc, "switch devices cannot declare operations")
        for pid, port in sorted(dev.ports.items()):
            ploc = f"{loc}/port {pid}"
            if port.owner != dev.id:
                error(ploc, f"port owner '{port.owner}' is not the declaring device")
            if pid in port_owner:
                error(ploc, f"port id also declared by device {port_owner[pid]}")
            else:
                port_owner[pid] = dev.id
        for op_name in sorted(dev.operations):
            for i, var in enumerate(dev.operations[op_name]):
                vloc = f"{loc}/operation {op_name}[{i}]"
                pre = var.precondition
                if isinstance(pre, LocAcc):
                    target = model.devices.get(pre.device)
                    if target is None:
                        error(vloc, f"loc_acc references unknown device '{pre.device}'")
                    elif pre.group not in target.groups:
                        error(vloc, f"loc_acc references unknown group '{pre.group}' on {pre.device}")
                elif isinstance(pre, RemAcc):
                    if pre.protocol not in PROTOCOLS:
                        error(vloc, f"unknown protocol '{pre.protocol}'")
                    if not 1 <= pre.port <= 65535:
                        error(vloc, f"port number {pre.port} out of range")
                for cred in sorted(var.required - model.credentials):
                    error(vloc, f"unknown credential '{cred}'")
                if var.effect is not None:
                    target = model.devices.get(var.effect.device)
                    if target is None:
                        error(vloc, f"becomes references unknown device '{var.effect.device}'")
                    elif not any(var.effect.account in members for members in target.groups.values()):
                        error(vloc, f"account '{var.effect.account}' belongs to no group of {var.effect.device}")
        if dev.filters:
            error(loc, "filtering rules are not supported; the filters block must be empty")

    known_ports = {pid for dev in model.devices.values() for pid in dev.ports}
    for link in sorted(model.links, key=lambda l: tuple(sorted(l.endpoints))):
        ends = sorted(link.endpoints)
        loc = f"link {'--'.join(ends)}"
        if len(ends) != 2:
            error(loc, "link endpoints must be two distinct ports")
        for pid in ends:
            if pid not in known_ports:
                error(loc, f"unknown port '{pid}'")

    for user in sorted(model.users.values(), key=lambda u: u.id):
        loc = f"user {user.id}"
        if user.initial_zone not in model.zones:
            error(loc, f"unknown zone '{user.initial_zone}'")
        for cred in sorted(user.credentials - model.credentials):
            error(loc, f"unknown credential '{cred}'")

    # Remote preconditions are pointless when the hosting device has no wired port.
    linked_ports = {pid for link in model.links for pid in link.endpoints}
    for dev in sorted(model.devices.values(), key=lambda d: d.id):
        has_rem = any(
            isinstance(var.precondition, RemAcc)
            for variants in dev.operations.values()
            for var in variants
        )
        if not has_rem:
            continue
        try:
            root = root_device(model, dev.id)
        except (ModelError, KeyError):
            continue  # already reported above
        if not any(pid in linked_ports for pid in root.ports):
            warning(
                f"device {dev.id}",
                f"rem_acc operations unreachable: no linked port on hosting device {root.id}",
            )

    return out


def network_path(model: SystemModel, src: str, dst: str, protocol: str, port: int) -> bool:
    """True when the link graph connects the two root devices through switches only.

    Filtering is out of scope, so `protocol` and `port` do not restrict
    connectivity; they are part of the signature for forward compatibility.
    """
    for dev_id in (src, dst):
        if dev_id not in model.devices:
            raise KeyError(f"unknown device '{dev_id}'")
        if model.devices[dev_id].location.hosts:
            raise ValueError(f"'{dev_id}' is a hosted object, not a root device")
    if src == dst:
        return bool(model.devices[src].ports)

    owner = {pid: dev.id for dev in model.devices.values() for pid in dev.ports}
    adjacency: dict[str, set[str]] = {}
    for link in model.links:
        ends = [owner.get(pid) for pid in link.endpoints]
        if None in ends or len(link.endpoints) != 2:
            continue
        a, b = ends
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)

    visited = {src}
    queue = deque([src])
    while queue:
        here = queue.popleft()
        for neighbor in adjacency.get(here, ()):
            if neighbor == dst:
                return True
            if neighbor not in visited and model.devices[neighbor].switch:
                visited.add(neighbor)
                queue.append(neighbor)
    return False


@dataclass(frozen=True)
class MobilityEdge:
    door: str
    src: str
    dst: str
    required: frozenset[str]


@dataclass(frozen=True)
class MobilityGraph:
    zones: frozenset[str]
    edges: frozenset[MobilityEdge]


def mobility_graph(model: SystemModel) -> MobilityGraph:
    """Zone graph with one credential-labelled directed edge per door rule."""
    return MobilityGraph(
        zones=frozenset(model.zones),
        edges=frozenset(
            MobilityEdge(r.door, r.src, r.dst, r.required) for r in model.doors
        ),
    )
