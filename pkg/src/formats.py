"""
Text blocks for groups, groupoids, actions, bibundles, covers, descent data
and certificates.

Every block starts with `<KIND> v1`, holds one directive per line and ends
with `end`. `#` starts a comment line. Blocks are named and may refer to
blocks defined earlier in the same input. Keys are written as compact JSON
(tuples as lists); a token that is not JSON is read as a string.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.actions import LEFT, RIGHT, GroupAction, GroupActionOnGroupoid, GroupoidAction, semidirect_group
from src.bibundle import Bibundle
from src.charted import ChartedGroupoid
from src.descent import Cover, DescentDatum, cocycle_datum, descent_datum, make_cover, rebase
from src.errors import ParseError, StructureError
from src.groupoid import FiniteGroupoid, b_group
from src.groups import (
    FiniteGroup,
    cyclic_group,
    dihedral_group,
    direct_product,
    symmetric_group,
    trivial_group,
)

VERSION = "v1"
KINDS = ("GROUP", "GRPD", "ACT", "GACT", "BIBUNDLE", "COVER", "DESC", "CERT")


def encode_key(key: Hashable) -> str:
    return json.dumps(_plain(key), separators=(",", ":"), ensure_ascii=False)


def decode_key(text: str) -> Hashable:
    try:
        return _tupled(json.loads(text))
    except ValueError:
        return text


def _plain(key):
    if isinstance(key, (tuple, list)):
        return [_plain(k) for k in key]
    if isinstance(key, np.integer):
        return int(key)
    return key


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

@dataclass
class Block:
    kind: str
    start: int
    path: Optional[str]
    lines: List[Tuple[int, str]] = field(default_factory=list)

    def fail(self, message: str, line: Optional[int] = None) -> ParseError:
        return ParseError(f"{self.kind}: {message}", self.path, line if line is not None else self.start)


def split_blocks(text: str, path: Optional[str] = None) -> List[Block]:
    blocks: List[Block] = []
    current: Optional[Block] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if current is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] not in KINDS:
                raise ParseError(f"expected a block header, got {line!r}", path, number)
            if parts[1] != VERSION:
                raise ParseError(f"unsupported version {parts[1]!r}", path, number)
            current = Block(parts[0], number, path)
        elif line == "end":
            blocks.append(current)
            current = None
        else:
            current.lines.append((number, raw.strip()))
    if current is not None:
        raise ParseError(f"{current.kind} block is not closed", path, current.start)
    return blocks


def _ints(block: Block, number: int, tokens: Sequence[str]) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise block.fail(f"expected integers, got {' '.join(tokens)!r}", number) from None


def _put(block: Block, number: int, table: Dict[Any, Any], key: Any, value: Any, what: str) -> None:
    if key in table:
        raise block.fail(f"duplicate {what}", number)
    table[key] = value


def _fields(block: Block, number: int, text: str, n_ints: int, keyed: bool = False) -> Tuple[List[int], Any]:
    """Split `directive i1 .. in [key]` into the ints and the decoded key."""
    parts = text.split(maxsplit=n_ints + 1)
    need = n_ints + 1 + (1 if keyed else 0)
    if len(parts) < need or (not keyed and len(parts) > need):
        raise block.fail(f"malformed line {text!r}", number)
    ids = _ints(block, number, parts[1:n_ints + 1])
    return ids, decode_key(parts[n_ints + 1]) if keyed else None


class Library:
    """Named objects read from one or more inputs, in definition order."""

    def __init__(self):
        self.groups: Dict[str, FiniteGroup] = {}
        self.groupoids: Dict[str, FiniteGroupoid] = {}
        self.charted: Dict[str, ChartedGroupoid] = {}
        self.actions: Dict[str, GroupAction] = {}
        self.gactions: Dict[str, GroupActionOnGroupoid] = {}
        self.bibundles: Dict[str, Bibundle] = {}
        self.covers: Dict[str, Cover] = {}
        self.descents: Dict[str, DescentDatum] = {}
        self.certificates: List[Dict[str, Any]] = []

    def first(self, table: str, name: Optional[str] = None):
        entries = getattr(self, table)
        if name is not None:
            if name not in entries:
                raise StructureError(f"no {table[:-1]} named {name!r}")
            return entries[name]
        if not entries:
            raise StructureError(f"input holds no {table}")
        return next(iter(entries.values()))

    def read(self, text: str, path: Optional[str] = None) -> "Library":
        for block in split_blocks(text, path):
            READERS[block.kind](self, block)
        return self

    def read_file(self, path) -> "Library":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StructureError(f"{path}: {exc.strerror}") from None
        return self.read(text, str(path))

    def _named(self, block: Block, table: str, name: str, number: int):
        entries = getattr(self, table)
        if name not in entries:
            raise block.fail(f"unknown {table[:-1]} {name!r}", number)
        return entries[name]


def read_library(paths: Iterable) -> Library:
    lib = Library()
    for path in paths:
        lib.read_file(path)
    return lib


def _header(block: Block, wanted: Sequence[str]) -> Dict[str, Tuple[int, str]]:
    """Collect single-valued `directive value` lines."""
    out = {}
    for number, text in block.lines:
        parts = text.split(maxsplit=1)
        if parts[0] in wanted:
            if len(parts) != 2:
                raise block.fail(f"{parts[0]} needs a value", number)
            out[parts[0]] = (number, parts[1])
    return out


def _name(block: Block, head) -> str:
    if "name" not in head:
        raise block.fail("missing name")
    return head["name"][1]


def _read_group(lib: Library, block: Block) -> None:
    head = _header(block, ("name",))
    name = _name(block, head)
    rows, labels = [], {}
    builder = None
    for number, text in block.lines:
        parts = text.split()
        word = parts[0]
        if word == "row":
            rows.append(_ints(block, number, parts[1:]))
        elif word == "label":
            (i,), key = _fields(block, number, text, 1, keyed=True)
            _put(block, number, labels, i, key, f"label {i}")
        elif word == "trivial":
            builder = trivial_group
        elif word in ("cyclic", "symmetric", "dihedral"):
            n = _ints(block, number, parts[1:2])[0] if len(parts) == 2 else None
            if n is None or n < 1:
                raise block.fail(f"{word} needs a positive order", number)
            make = {"cyclic": cyclic_group, "symmetric": symmetric_group, "dihedral": dihedral_group}[word]
            builder = (lambda make=make, n=n: make(n))
        elif word == "product":
            if len(parts) != 3:
                raise block.fail("product needs two group names", number)
            a, b = (lib._named(block, "groups", p, number) for p in parts[1:])
            builder = (lambda a=a, b=b: direct_product(a, b))
        elif word not in ("name", "table"):
            raise block.fail(f"unknown directive {word!r}", number)
    try:
        if builder is not None:
            group = builder()
        else:
            if not rows:
                raise block.fail("group has no table")
            group = FiniteGroup(rows, [labels.get(i, i) for i in range(len(rows))], name)
    except StructureError as exc:
        if isinstance(exc, ParseError):
            raise
        raise block.fail(str(exc)) from None
    group.name = name
    lib.groups[name] = group


def _dense(block: Block, entries: Dict[int, Any], what: str) -> List[Any]:
    if sorted(entries) != list(range(len(entries))):
        raise block.fail(f"{what} ids are not 0..{len(entries) - 1}")
    return [entries[i] for i in range(len(entries))]


def _read_groupoid(lib: Library, block: Block) -> None:
    head = _header(block, ("name", "bgroup", "semidirect"))
    name = _name(block, head)
    objects, arrows = {}, {}
    units, invs, comp = {}, {}, {}
    charts, effects = {}, {}
    base: Optional[FiniteGroupoid] = None
    if "bgroup" in head:
        number, group_name = head["bgroup"]
        base = b_group(lib._named(block, "groups", group_name, number), name)
    if "semidirect" in head:
        number, action_name = head["semidirect"]
        base = semidirect_group(lib._named(block, "gactions", action_name, number), name)
    for number, text in block.lines:
        word = text.split(maxsplit=1)[0]
        if word in ("name", "bgroup", "semidirect"):
            continue
        if word in ("object", "arrow", "unit", "inv", "comp") and base is not None:
            raise block.fail(f"{word} cannot follow a bgroup or semidirect directive", number)
        if word == "object":
            (x,), key = _fields(block, number, text, 1, keyed=True)
            _put(block, number, objects, x, key, f"object {x}")
        elif word == "arrow":
            (a, s, t), key = _fields(block, number, text, 3, keyed=True)
            _put(block, number, arrows, a, (s, t, key), f"arrow {a}")
        elif word == "unit":
            (x, a), _ = _fields(block, number, text, 2)
            _put(block, number, units, x, a, f"unit {x}")
        elif word == "inv":
            (a, b), _ = _fields(block, number, text, 2)
            _put(block, number, invs, a, b, f"inv {a}")
        elif word == "comp":
            (g, h, gh), _ = _fields(block, number, text, 3)
            _put(block, number, comp, (g, h), (gh, number), f"comp {g} {h}")
        elif word == "chart":
            parts = text.split()
            x = _ints(block, number, parts[1:2])[0] if len(parts) > 1 else None
            if x is None:
                raise block.fail("chart needs an object id", number)
            _put(block, number, charts, x, tuple(decode_key(t) for t in parts[2:]), f"chart {x}")
        elif word == "effect":
            parts = text.split()
            ids = _ints(block, number, parts[1:])
            if not ids:
                raise block.fail("effect needs an arrow id", number)
            _put(block, number, effects, ids[0], (tuple(ids[1:]), number), f"effect {ids[0]}")
        else:
            raise block.fail(f"unknown directive {word!r}", number)

    if base is None:
        object_keys = _dense(block, objects, "object")
        arrow_rows = _dense(block, arrows, "arrow")
        n, m = len(object_keys), len(arrow_rows)
        for a, (s, t, _) in enumerate(arrow_rows):
            if not (0 <= s < n and 0 <= t < n):
                raise block.fail(f"arrow {a} has an undeclared endpoint")
        for (g, h), (gh, number) in comp.items():
            if not all(0 <= v < m for v in (g, h, gh)):
                raise block.fail("comp names an undeclared arrow", number)
        if any(not 0 <= x < n for x in units) or any(not 0 <= a < m for a in list(units.values()) + list(invs)):
            raise block.fail("unit or inv names an undeclared id")
        base = FiniteGroupoid(
            object_keys=tuple(object_keys),
            arrow_keys=tuple(key for _, _, key in arrow_rows),
            src=tuple(s for s, _, _ in arrow_rows),
            tgt=tuple(t for _, t, _ in arrow_rows),
            unit=tuple(units.get(x) for x in range(n)),
            inv=tuple(invs.get(a) for a in range(m)),
            comp={k: v for k, (v, _) in comp.items()},
            name=name,
        )
    lib.groupoids[name] = base
    if charts or effects:
        if sorted(charts) != list(base.objects):
            raise block.fail("every object needs a chart")
        width = len(charts[0]) if charts else 0
        ident = tuple(range(width))
        for a, (_, number) in effects.items():
            if not 0 <= a < base.n_arrows:
                raise block.fail(f"effect for undeclared arrow {a}", number)
        lib.charted[name] = ChartedGroupoid(
            base, tuple(charts[x] for x in base.objects),
            tuple(effects[a][0] if a in effects else ident for a in base.arrows))


def _read_action(lib: Library, block: Block) -> None:
    head = _header(block, ("name", "group", "side"))
    name = _name(block, head)
    if "group" not in head:
        raise block.fail("missing group")
    group = lib._named(block, "groups", head["group"][1], head["group"][0])
    side = head.get("side", (0, RIGHT))[1]
    if side not in (RIGHT, LEFT):
        raise block.fail(f"unknown side {side!r}", head["side"][0])
    points, table = {}, {}
    for number, text in block.lines:
        word = text.split(maxsplit=1)[0]
        if word == "point":
            (x,), key = _fields(block, number, text, 1, keyed=True)
            _put(block, number, points, x, key, f"point {x}")
        elif word == "act":
            (x, k, y), _ = _fields(block, number, text, 3)
            _put(block, number, table, (x, k), y, f"act {x} {k}")
        elif word not in ("name", "group", "side"):
            raise block.fail(f"unknown directive {word!r}", number)
    carrier = _dense(block, points, "point")
    missing = [(x, k) for x in range(len(carrier)) for k in group.elements if (x, k) not in table]
    if missing:
        raise block.fail(f"no act entry for point {missing[0][0]} and element {missing[0][1]}")
    rows = np.array([[table[(x, k)] for k in group.elements] for x in range(len(carrier))],
                    dtype=np.int64).reshape(len(carrier), group.order)
    rows.setflags(write=False)
    lib.actions[name] = GroupAction(group, tuple(carrier), rows, side, name)


def _read_gaction(lib: Library, block: Block) -> None:
    head = _header(block, ("name", "group", "groupoid"))
    name = _name(block, head)
    for need in ("group", "groupoid"):
        if need not in head:
            raise block.fail(f"missing {need}")
    group = lib._named(block, "groups", head["group"][1], head["group"][0])
    target = lib._named(block, "groupoids", head["groupoid"][1], head["groupoid"][0])
    objs = np.full((target.n_objects, group.order), -1, dtype=np.int64)
    arrs = np.full((target.n_arrows, group.order), -1, dtype=np.int64)
    for number, text in block.lines:
        word = text.split(maxsplit=1)[0]
        if word in ("obj", "arr"):
            (i, k, j), _ = _fields(block, number, text, 3)
            tab = objs if word == "obj" else arrs
            if not (0 <= i < tab.shape[0] and 0 <= k < group.order):
                raise block.fail(f"{word} entry out of range", number)
            if tab[i, k] != -1:
                raise block.fail(f"duplicate {word} {i} {k}", number)
            tab[i, k] = j
        elif word not in ("name", "group", "groupoid"):
            raise block.fail(f"unknown directive {word!r}", number)
    if (objs.size and objs.min() < 0) or (arrs.size and arrs.min() < 0):
        raise block.fail("action tables are incomplete")
    objs.setflags(write=False)
    arrs.setflags(write=False)
    lib.gactions[name] = GroupActionOnGroupoid(group, target, objs, arrs, name)


def _read_bibundle(lib: Library, block: Block) -> None:
    head = _header(block, ("name", "source", "target"))
    name = _name(block, head)
    for need in ("source", "target"):
        if need not in head:
            raise block.fail(f"missing {need}")
    g = lib._named(block, "groupoids", head["source"][1], head["source"][0])
    h = lib._named(block, "groupoids", head["target"][1], head["target"][0])
    points, left, right = {}, {}, {}
    for number, text in block.lines:
        word = text.split(maxsplit=1)[0]
        if word == "point":
            (p, s, t), key = _fields(block, number, text, 3, keyed=True)
            if not (0 <= s < g.n_objects and 0 <= t < h.n_objects):
                raise block.fail("point leg names an undeclared object", number)
            _put(block, number, points, p, (s, t, key), f"point {p}")
        elif word == "left":
            (a, p, q), _ = _fields(block, number, text, 3)
            if not 0 <= a < g.n_arrows:
                raise block.fail("left entry names an undeclared arrow", number)
            _put(block, number, left, (p, a), q, f"left {a} {p}")
        elif word == "right":
            (p, b, q), _ = _fields(block, number, text, 3)
            if not 0 <= b < h.n_arrows:
                raise block.fail("right entry names an undeclared arrow", number)
            _put(block, number, right, (p, b), q, f"right {p} {b}")
        elif word not in ("name", "source", "target"):
            raise block.fail(f"unknown directive {word!r}", number)
    rows = _dense(block, points, "point")
    total = tuple(key for _, _, key in rows)
    lib.bibundles[name] = Bibundle(
        GroupoidAction(g, total, tuple(s for s, _, _ in rows), left, LEFT, f"{name} left"),
        GroupoidAction(h, total, tuple(t for _, t, _ in rows), right, RIGHT, f"{name} right"),
        name)


def _read_cover(lib: Library, block: Block) -> None:
    head = _header(block, ("name",))
    name = _name(block, head)
    points, parts = {}, {}
    for number, text in block.lines:
        word = text.split(maxsplit=1)[0]
        if word == "point":
            (u,), key = _fields(block, number, text, 1, keyed=True)
            _put(block, number, points, u, key, f"point {u}")
        elif word == "part":
            ids = _ints(block, number, text.split()[1:])
            if not ids:
                raise block.fail("part needs an index", number)
            _put(block, number, parts, ids[0], ids[1:], f"part {ids[0]}")
        elif word != "name":
            raise block.fail(f"unknown directive {word!r}", number)
    try:
        lib.covers[name] = make_cover(_dense(block, points, "point"), _dense(block, parts, "part"), name)
    except ParseError:
        raise
    except StructureError as exc:
        raise block.fail(str(exc)) from None


def _read_descent(lib: Library, block: Block) -> None:
    head = _header(block, ("name", "cover", "target", "group"))
    name = _name(block, head)
    if "cover" not in head:
        raise block.fail("missing cover")
    cover = lib._named(block, "covers", head["cover"][1], head["cover"][0])
    target = None
    if "target" in head:
        target = lib._named(block, "groupoids", head["target"][1], head["target"][0])
    local, transitions, cocycle = {}, {}, {}
    for number, text in block.lines:
        parts = text.split()
        word = parts[0]
        if word == "local":
            if len(parts) != 3:
                raise block.fail("local needs a part index and a bibundle name", number)
            a = _ints(block, number, parts[1:2])[0]
            _put(block, number, local, a, (lib._named(block, "bibundles", parts[2], number), number), f"local {a}")
        elif word == "transition":
            (a, b, p, q), _ = _fields(block, number, text, 4)
            _put(block, number, transitions.setdefault((a, b), {}), p, q, f"transition {a} {b} {p}")
        elif word == "k":
            (a, b, u, k), _ = _fields(block, number, text, 4)
            _put(block, number, cocycle.setdefault((a, b), {}), u, k, f"k {a} {b} {u}")
        elif word not in ("name", "cover", "target", "group"):
            raise block.fail(f"unknown directive {word!r}", number)
    try:
        if "group" in head:
            group = lib._named(block, "groups", head["group"][1], head["group"][0])
            datum = cocycle_datum(cover, group, cocycle, target, check=False)
        else:
            if target is None:
                raise block.fail("missing target")
            if sorted(local) != list(range(len(cover.parts))):
                raise block.fail("need one local map per part")
            pieces = []
            for a in range(len(cover.parts)):
                psi, number = local[a]
                if psi.target is not target:
                    raise block.fail(f"local map {psi.name} does not land in {target.name}", number)
                pieces.append(rebase(psi, cover.part_spaces[a]))
            datum = descent_datum(cover, target, pieces, transitions, name)
    except ParseError:
        raise
    except StructureError as exc:
        raise block.fail(str(exc)) from None
    lib.descents[name] = DescentDatum(datum.cover, datum.target, datum.local, datum.transitions, name)
    if datum.target.name not in lib.groupoids:
        lib.groupoids[datum.target.name] = datum.target


def _read_certificate(lib: Library, block: Block) -> None:
    record: Dict[str, Any] = {"stages": [], "counts": {}, "line": block.start, "path": block.path}
    for number, text in block.lines:
        parts = text.split()
        word = parts[0]
        if word == "stage":
            if len(parts) != 3 or parts[2] not in ("ok", "fail"):
                raise block.fail("stage needs a name and ok/fail", number)
            record["stages"].append((parts[1], parts[2] == "ok"))
        elif word == "count":
            if len(parts) != 3:
                raise block.fail("count needs a name and a value", number)
            record["counts"][parts[1]] = _ints(block, number, parts[2:])[0]
        elif len(parts) == 2:
            record[word] = parts[1]
        else:
            raise block.fail(f"malformed line {text!r}", number)
    if "claim" not in record:
        raise block.fail("missing claim")
    lib.certificates.append(record)


READERS: Dict[str, Callable[[Library, Block], None]] = {
    "GROUP": _read_group,
    "GRPD": _read_groupoid,
    "ACT": _read_action,
    "GACT": _read_gaction,
    "BIBUNDLE": _read_bibundle,
    "COVER": _read_cover,
    "DESC": _read_descent,
    "CERT": _read_certificate,
}


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def render_block(kind: str, lines: Iterable[str]) -> str:
    return "\n".join([f"{kind} {VERSION}", *lines, "end"]) + "\n"


def write_group(group: FiniteGroup, name: Optional[str] = None) -> str:
    lines = [f"name {name or group.name}", "table"]
    lines += ["row " + " ".join(str(int(v)) for v in row) for row in group.table]
    lines += [f"label {i} {encode_key(group.label(i))}" for i in group.elements]
    return render_block("GROUP", lines)


def write_groupoid(g: FiniteGroupoid, name: Optional[str] = None,
                   charted: Optional[ChartedGroupoid] = None) -> str:
    lines = [f"name {name or g.name}"]
    lines += [f"object {x} {encode_key(k)}" for x, k in enumerate(g.object_keys)]
    lines += [f"arrow {a} {g.src[a]} {g.tgt[a]} {encode_key(k)}" for a, k in enumerate(g.arrow_keys)]
    lines += [f"unit {x} {a}" for x, a in enumerate(g.unit) if a is not None]
    lines += [f"inv {a} {b}" for a, b in enumerate(g.inv) if b is not None]
    lines += [f"comp {a} {b} {c}" for (a, b), c in sorted(g.comp.items())]
    if charted is not None:
        lines += [f"chart {x} " + " ".join(encode_key(p) for p in c) for x, c in enumerate(charted.charts)]
        lines += [f"effect {a} " + " ".join(str(i) for i in e)
                  for a, e in enumerate(charted.effect) if not charted.is_trivial_effect(a)]
    return render_block("GRPD", [line.rstrip() for line in lines])


def write_semidirect(name: str, action_name: str) -> str:
    return render_block("GRPD", [f"name {name}", f"semidirect {action_name}"])


def write_action(action: GroupAction, name: str, group_name: str) -> str:
    lines = [f"name {name}", f"group {group_name}", f"side {action.side}"]
    lines += [f"point {x} {encode_key(k)}" for x, k in enumerate(action.carrier)]
    lines += [f"act {x} {k} {action.act(x, k)}" for x in range(len(action.carrier)) for k in action.group.elements]
    return render_block("ACT", lines)


def write_gaction(action: GroupActionOnGroupoid, name: str, group_name: str, groupoid_name: str) -> str:
    k, g = action.group, action.target
    lines = [f"name {name}", f"group {group_name}", f"groupoid {groupoid_name}"]
    lines += [f"obj {x} {c} {action.obj(x, c)}" for x in g.objects for c in k.elements]
    lines += [f"arr {a} {c} {action.arr(a, c)}" for a in g.arrows for c in k.elements]
    return render_block("GACT", lines)


def write_bibundle(p: Bibundle, name: str, source_name: str, target_name: str) -> str:
    lines = [f"name {name}", f"source {source_name}", f"target {target_name}"]
    lines += [f"point {q} {p.s_p[q]} {p.t_p[q]} {encode_key(k)}" for q, k in enumerate(p.total)]
    lines += [f"left {a} {q} {r}" for (q, a), r in sorted(p.left.table.items(), key=lambda e: (e[0][0], e[0][1]))]
    lines += [f"right {q} {b} {r}" for (q, b), r in sorted(p.right.table.items())]
    return render_block("BIBUNDLE", lines)


def write_cover(cover: Cover, name: Optional[str] = None) -> str:
    lines = [f"name {name or cover.name}"]
    lines += [f"point {u} {encode_key(k)}" for u, k in enumerate(cover.points)]
    lines += [f"part {a} " + " ".join(str(u) for u in part) for a, part in enumerate(cover.parts)]
    return render_block("COVER", lines)


def write_descent(d: DescentDatum, name: str, cover_name: str, target_name: str) -> str:
    """The datum with its local maps as BIBUNDLE blocks ahead of the DESC block."""
    out = []
    for a, psi in enumerate(d.local):
        out.append(write_groupoid(psi.source, f"{name}_U{a}"))
        out.append(write_bibundle(psi, f"{name}_psi{a}", f"{name}_U{a}", target_name))
    lines = [f"name {name}", f"cover {cover_name}", f"target {target_name}"]
    lines += [f"local {a} {name}_psi{a}" for a in range(len(d.local))]
    lines += [f"transition {a} {b} {p} {q}"
              for (a, b), chi in sorted(d.transitions.items()) for p, q in sorted(chi.items())]
    out.append(render_block("DESC", lines))
    return "".join(out)
