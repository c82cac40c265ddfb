"""Textual syntax for system models (.ins) and policies (.rbac).

Hand-written lexer and recursive-descent parser with position-carrying
errors, plus canonical printers: printing sorts declarations by kind and id,
so print-parse-print is byte-idempotent and parse(print(x)) is structurally
equal to x.
"""

from __future__ import annotations

from dataclasses import dataclass

from .policy import Permission, PolicySpec, Role
from .sysmodel import (
    BecomesAccount,
    Device,
    DoorRule,
    Link,
    LocAcc,
    Location,
    OperationVariant,
    PhyAcc,
    Port,
    RemAcc,
    SystemModel,
    User,
    Zone,
)

KEYWORDS = frozenset(
    """
    credential zone external door requires device in switch port mac ip
    group operation when phy_acc loc_acc rem_acc tcp udp becomes link
    filters user at credentials role allow deny users hierarchy
    """.split()
)

_PUNCTUATION = ("<->", "->", "--", ";", ",", "{", "}", "(", ")", ".", "<", "/")


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1


class ParseError(Exception):
    def __init__(self, span: SourceSpan, expected: str, found: str):
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(str(self))

    def __str__(self) -> str:
        return (
            f"{self.span.file}:{self.span.line}:{self.span.column}: "
            f"expected {self.expected}, found {self.found}"
        )


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | number | string | punct | eof
    text: str
    line: int
    column: int


def _tokenize(text: str, file: str) -> list[_Token]:
    tokens = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ParseError(SourceSpan(file, line, col), "closing '\"'", "end of input")
            tokens.append(_Token("string", text[i + 1 : j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for punct in _PUNCTUATION:
            if text.startswith(punct, i):
                tokens.append(_Token("punct", punct, line, col))
                col += len(punct)
                i += len(punct)
                break
        else:
            raise ParseError(SourceSpan(file, line, col), "a token", f"'{ch}'")
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.tokens = _tokenize(text, file)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _span(self, token: _Token) -> SourceSpan:
        return SourceSpan(self.file, token.line, token.column, max(len(token.text), 1))

    def fail(self, expected: str, token: _Token | None = None):
        token = token or self.current
        found = "end of input" if token.kind == "eof" else f"'{token.text}'"
        raise ParseError(self._span(token), expected, found)

    def advance(self) -> _Token:
        token = self.current
        if token.kind != "eof":
            self.pos += 1
        return token

    def at_keyword(self, word: str) -> bool:
        return self.current.kind == "ident" and self.current.text == word

    def accept_keyword(self, word: str) -> bool:
        if self.at_keyword(word):
            self.advance()
            return True
        return False

    def expect_keyword(self, word: str):
        if not self.accept_keyword(word):
            self.fail(f'"{word}"')

    def accept_punct(self, punct: str) -> bool:
        if self.current.kind == "punct" and self.current.text == punct:
            self.advance()
            return True
        return False

    def expect_punct(self, punct: str):
        if not self.accept_punct(punct):
            self.fail(f'"{punct}"')

    def expect_ident(self, what: str = "identifier") -> str:
        token = self.current
        if token.kind != "ident" or token.text in KEYWORDS:
            self.fail(what)
        self.advance()
        return token.text

    def expect_number(self) -> int:
        token = self.current
        if token.kind != "number":
            self.fail("a number")
        self.advance()
        return int(token.text)

    def expect_string(self) -> str:
        token = self.current
        if token.kind != "string":
            self.fail("a quoted string")
        self.advance()
        return token.text

    def cred_set(self) -> frozenset[str]:
        self.expect_punct("{")
        items = []
        if not self.accept_punct("}"):
            items.append(self.expect_ident())
            while self.accept_punct(","):
                items.append(self.expect_ident())
            self.expect_punct("}")
        return frozenset(items)

    def duplicate(self, kind: str, name: str, token: _Token):
        raise ParseError(self._span(token), f"a new {kind} name", f"duplicate '{name}'")


def parse_system(text: str, filename: str = "<string>") -> SystemModel:
    """Parse a .ins file; only syntax is checked here (run validate() after)."""
    p = _Parser(text, filename)
    credentials: set[str] = set()
    zones: dict[str, Zone] = {}
    doors: set[DoorRule] = set()
    devices: dict[str, Device] = {}
    links: set[Link] = set()
    users: dict[str, User] = {}

    while p.current.kind != "eof":
        if p.accept_keyword("credential"):
            token = p.current
            name = p.expect_ident()
            if name in credentials:
                p.duplicate("credential", name, token)
            credentials.add(name)
            p.expect_punct(";")
        elif p.accept_keyword("zone"):
            token = p.current
            name = p.expect_ident()
            external = p.accept_keyword("external")
            if name in zones:
                p.duplicate("zone", name, token)
            zones[name] = Zone(name, external)
            p.expect_punct(";")
        elif p.accept_keyword("door"):
            door_id = p.expect_ident()
            src = p.expect_ident()
            if p.accept_punct("->"):
                both = False
            elif p.accept_punct("<->"):
                both = True
            else:
                p.fail('"->" or "<->"')
            dst = p.expect_ident()
            required = p.cred_set() if p.accept_keyword("requires") else frozenset()
            p.expect_punct(";")
            doors.add(DoorRule(door_id, src, dst, required))
            if both:
                doors.add(DoorRule(door_id, dst, src, required))
        elif p.accept_keyword("device"):
            device = _parse_device(p, devices)
            devices[device.id] = device
        elif p.accept_keyword("link"):
            a = p.expect_ident()
            p.expect_punct("--")
            b = p.expect_ident()
            p.expect_punct(";")
            links.add(Link(frozenset((a, b))))
        elif p.accept_keyword("user"):
            token = p.current
            name = p.expect_ident()
            p.expect_keyword("at")
            zone = p.expect_ident()
            p.expect_keyword("credentials")
            creds = p.cred_set()
            p.expect_punct(";")
            if name in users:
                p.duplicate("user", name, token)
            users[name] = User(name, zone, creds)
        else:
            p.fail('a declaration ("credential", "zone", "door", "device", "link" or "user")')

    return SystemModel(
        credentials=frozenset(credentials),
        zones=zones,
        doors=frozenset(doors),
        devices=devices,
        links=frozenset(links),
        users=users,
    )


def _parse_device(p: _Parser, devices: dict[str, Device]) -> Device:
    token = p.current
    dev_id = p.expect_ident()
    if dev_id in devices:
        p.duplicate("device", dev_id, token)
    p.expect_keyword("in")
    zone = p.expect_ident()
    hosts = []
    while p.accept_punct("/"):
        hosts.append(p.expect_ident())
    switch = p.accept_keyword("switch")
    p.expect_punct("{")

    ports: dict[str, Port] = {}
    groups: dict[str, frozenset[str]] = {}
    operations: dict[str, tuple[OperationVariant, ...]] = {}
    while not p.accept_punct("}"):
        if p.accept_keyword("port"):
            ptoken = p.current
            pid = p.expect_ident()
            if pid in ports:
                p.duplicate("port", pid, ptoken)
            p.expect_keyword("mac")
            mac = p.expect_string()
            p.expect_keyword("ip")
            ip = p.expect_string()
            p.expect_punct(";")
            ports[pid] = Port(pid, mac, ip, dev_id)
        elif p.accept_keyword("group"):
            gtoken = p.current
            gid = p.expect_ident()
            if gid in groups:
                p.duplicate("group", gid, gtoken)
            p.expect_punct("{")
            members = []
            if not p.accept_punct("}"):
                members.append(p.expect_ident())
                while p.accept_punct(","):
                    members.append(p.expect_ident())
                p.expect_punct("}")
            groups[gid] = frozenset(members)
        elif p.accept_keyword("operation"):
            otoken = p.current
            op_name = p.expect_ident()
            if op_name in operations:
                p.duplicate("operation", op_name, otoken)
            p.expect_punct("{")
            variants = []
            while not p.accept_punct("}"):
                variants.append(_parse_variant(p, dev_id))
            operations[op_name] = tuple(variants)
        elif p.accept_keyword("filters"):
            p.expect_punct("{")
            p.expect_punct("}")
        else:
            p.fail('"port", "group", "operation", "filters" or "}"')

    return Device(
        id=dev_id,
        location=Location(zone, tuple(hosts)),
        switch=switch,
        ports=ports,
        groups=groups,
        operations=operations,
    )


def _parse_variant(p: _Parser, dev_id: str) -> OperationVariant:
    p.expect_keyword("when")
    if p.accept_keyword("phy_acc"):
        pre = PhyAcc()
    elif p.accept_keyword("loc_acc"):
        p.expect_punct("(")
        first = p.expect_ident()
        if p.accept_punct("."):
            pre = LocAcc(first, p.expect_ident())
        else:
            pre = LocAcc(dev_id, first)
        p.expect_punct(")")
    elif p.accept_keyword("rem_acc"):
        p.expect_punct("(")
        if p.accept_keyword("tcp"):
            proto = "tcp"
        elif p.accept_keyword("udp"):
            proto = "udp"
        else:
            p.fail('"tcp" or "udp"')
        p.expect_punct(",")
        port = p.expect_number()
        p.expect_punct(")")
        pre = RemAcc(proto, port)
    else:
        p.fail('"phy_acc", "loc_acc" or "rem_acc"')
    required = p.cred_set() if p.accept_keyword("requires") else frozenset()
    effect = None
    if p.accept_keyword("becomes"):
        effect = BecomesAccount(dev_id, p.expect_ident())
    p.expect_punct(";")
    return OperationVariant(pre, required, effect)


def parse_policy(text: str, filename: str = "<string>") -> PolicySpec:
    p = _Parser(text, filename)
    roles: dict[str, Role] = {}
    hierarchy: set[tuple[str, str]] = set()
    while p.current.kind != "eof":
        if p.accept_keyword("role"):
            token = p.current
            rid = p.expect_ident()
            if rid in roles:
                p.duplicate("role", rid, token)
            p.expect_punct("{")
            allowed: frozenset[Permission] = frozenset()
            denied: frozenset[Permission] = frozenset()
            members: frozenset[str] = frozenset()
            if p.accept_keyword("allow"):
                allowed = _parse_perm_list(p)
                p.expect_punct(";")
            if p.accept_keyword("deny"):
                denied = _parse_perm_list(p)
                p.expect_punct(";")
            if p.accept_keyword("users"):
                p.expect_punct("{")
                names = []
                if not p.accept_punct("}"):
                    names.append(p.expect_ident())
                    while p.accept_punct(","):
                        names.append(p.expect_ident())
                    p.expect_punct("}")
                members = frozenset(names)
            p.expect_punct("}")
            roles[rid] = Role(rid, allowed, denied, members)
        elif p.accept_keyword("hierarchy"):
            lo = p.expect_ident()
            p.expect_punct("<")
            hi = p.expect_ident()
            p.expect_punct(";")
            hierarchy.add((lo, hi))
        else:
            p.fail('"role" or "hierarchy"')
    return PolicySpec(roles=roles, hierarchy=frozenset(hierarchy))


def _parse_perm_list(p: _Parser) -> frozenset[Permission]:
    perms = [_parse_perm(p)]
    while p.accept_punct(","):
        perms.append(_parse_perm(p))
    return frozenset(perms)


def _parse_perm(p: _Parser) -> Permission:
    p.expect_punct("(")
    op = p.expect_ident()
    p.expect_punct(",")
    ob = p.expect_ident()
    p.expect_punct(")")
    return Permission(op, ob)


def _fmt_cred_set(creds: frozenset[str]) -> str:
    return "{" + ", ".join(sorted(creds)) + "}"


def print_system(model: SystemModel) -> str:
    """Canonical text form: declarations sorted by kind then id."""
    out: list[str] = []
    for name in sorted(model.credentials):
        out.append(f"credential {name};")
    if model.credentials:
        out.append("")
    for zid in sorted(model.zones):
        zone = model.zones[zid]
        out.append(f"zone {zid} external;" if zone.external else f"zone {zid};")
    if model.zones:
        out.append("")
    for rule in sorted(model.doors, key=lambda r: (r.door, r.src, r.dst)):
        req = f" requires {_fmt_cred_set(rule.required)}" if rule.required else ""
        out.append(f"door {rule.door} {rule.src} -> {rule.dst}{req};")
    if model.doors:
        out.append("")
    for dev_id in sorted(model.devices):
        out.extend(_print_device(model.devices[dev_id]))
        out.append("")
    for link in sorted(model.links, key=lambda l: tuple(sorted(l.endpoints))):
        ends = sorted(link.endpoints)
        pair = ends if len(ends) == 2 else ends * 2
        out.append(f"link {pair[0]} -- {pair[1]};")
    if model.links:
        out.append("")
    for uid in sorted(model.users):
        user = model.users[uid]
        out.append(
            f"user {uid} at {user.initial_zone} credentials {_fmt_cred_set(user.credentials)};"
        )
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n" if out else ""


def _print_device(dev: Device) -> list[str]:
    path = "/".join((dev.location.zone,) + dev.location.hosts)
    switch = " switch" if dev.switch else ""
    out = [f"device {dev.id} in {path}{switch} {{"]
    for pid in sorted(dev.ports):
        port = dev.ports[pid]
        out.append(f'    port {pid} mac "{port.mac}" ip "{port.ip}";')
    for gid in sorted(dev.groups):
        members = ", ".join(sorted(dev.groups[gid]))
        inner = f" {members} " if members else ""
        out.append(f"    group {gid} {{{inner}}}")
    for op_name in sorted(dev.operations):
        out.append(f"    operation {op_name} {{")
        for variant in dev.operations[op_name]:
            out.append(f"        {_print_variant(dev.id, variant)}")
        out.append("    }")
    out.append("}")
    return out


def _print_variant(dev_id: str, variant: OperationVariant) -> str:
    pre = variant.precondition
    if isinstance(pre, PhyAcc):
        text = "when phy_acc"
    elif isinstance(pre, LocAcc):
        inner = pre.group if pre.device == dev_id else f"{pre.device}.{pre.group}"
        text = f"when loc_acc({inner})"
    elif isinstance(pre, RemAcc):
        text = f"when rem_acc({pre.protocol}, {pre.port})"
    else:
        raise ValueError(f"unprintable precondition {pre!r}")
    if variant.required:
        text += f" requires {_fmt_cred_set(variant.required)}"
    if variant.effect is not None:
        if variant.effect.device != dev_id:
            raise ValueError("the textual syntax cannot express cross-device effects")
        text += f" becomes {variant.effect.account}"
    return text + ";"


def print_policy(policy: PolicySpec) -> str:
    out: list[str] = []
    for rid in sorted(policy.roles):
        role = policy.roles[rid]
        out.append(f"role {rid} {{")
        if role.allowed:
            perms = ", ".join(f"({p.operation}, {p.object})" for p in sorted(role.allowed))
            out.append(f"    allow {perms};")
        if role.denied:
            perms = ", ".join(f"({p.operation}, {p.object})" for p in sorted(role.denied))
            out.append(f"    deny {perms};")
        if role.users:
            out.append(f"    users {{ {', '.join(sorted(role.users))} }}")
        out.append("}")
        out.append("")
    for lo, hi in sorted(policy.hierarchy):
        out.append(f"hierarchy {lo} < {hi};")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n" if out else ""
