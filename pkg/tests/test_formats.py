"""Reading and writing the text block formats."""
import sys
import os

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from src import corpus
from src.bibundle import compose, validate_bibundle
from src.charted import validate_charted
from src.descent import glue, validate_descent
from src.errors import ParseError, StructureError
from src.formats import Library, decode_key, encode_key, read_library, write_cover, write_groupoid
from src.groupoid import strictly_equal, validate_groupoid
from src.groups import are_isomorphic, direct_product, cyclic_group

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def test_keys():
    assert decode_key('["a",1]') == ("a", 1)
    assert decode_key("plain") == "plain"
    assert decode_key("3") == 3
    assert encode_key(("a", (1, 2))) == '["a",[1,2]]'


def test_read_charted_fixture():
    lib = read_library([fixture("bz4_swap.grpd")])
    g = lib.charted["BZ4"]
    assert g.base is lib.groupoids["BZ4"]
    assert g.effect == corpus.bz4_swap().effect
    assert validate_charted(g).ok


def test_read_product_group():
    lib = read_library([fixture("bz2xz2.grpd")])
    assert are_isomorphic(lib.groups["V4"], direct_product(cyclic_group(2), cyclic_group(2)))
    assert lib.groupoids["BV4"].n_arrows == 4


def test_read_explicit_tables():
    lib = read_library([fixture("pair2.grpd")])
    g = lib.groupoids["Pair2"]
    assert g.object_keys == ("a", "b")
    assert g.arrow_keys[1] == ("b", "a")
    assert validate_groupoid(g).ok
    assert "Pair2" not in lib.charted


def test_read_bibundles_and_compose():
    lib = read_library([fixture("compose.grpd")])
    torsor, collapse = lib.bibundles["torsor"], lib.bibundles["collapse"]
    assert validate_bibundle(torsor).ok
    assert validate_bibundle(collapse).ok
    assert len(compose(torsor, collapse)) == 1


def test_read_descent_from_cocycle():
    lib = read_library([fixture("mobius.grpd")])
    d = lib.descents["mobius"]
    assert validate_descent(d).ok
    assert len(glue(d)) == 6
    assert d.target.name in lib.groupoids


def test_broken_cocycle_fixture_reads_but_fails():
    lib = read_library([fixture("broken_cocycle.grpd")])
    assert "cocycle" in validate_descent(lib.descents["broken"]).axioms_failed()


def test_write_then_read_charted_groupoid():
    g = corpus.bd4_reflect()
    text = write_groupoid(g.base, "D", g)
    lib = Library().read(text)
    assert strictly_equal(lib.groupoids["D"], g.base)
    assert lib.charted["D"].effect == g.effect


def test_write_then_read_cover():
    cover = corpus.circle_cover()
    lib = Library().read(write_cover(cover))
    assert lib.covers["circle"].parts == cover.parts


def test_unknown_directive_reports_its_line():
    with pytest.raises(ParseError) as info:
        Library().read("GRPD v1\nname X\nbogus 1\nend\n", "x.grpd")
    assert info.value.line == 3
    assert info.value.path == "x.grpd"


def test_header_errors():
    with pytest.raises(ParseError) as info:
        Library().read("# comment\nGROUP v2\nname Z\nend\n")
    assert info.value.line == 2
    with pytest.raises(ParseError):
        Library().read("GROUP v1\nname Z\ncyclic 2\n")
    with pytest.raises(ParseError):
        Library().read("WIDGET v1\nend\n")


def test_unknown_reference_is_a_parse_error():
    with pytest.raises(ParseError) as info:
        Library().read("GRPD v1\nname B\nbgroup Q\nend\n")
    assert info.value.line == 3


def test_non_dense_ids_are_rejected():
    with pytest.raises(ParseError):
        Library().read('GRPD v1\nname X\nobject 1 "a"\nend\n')


def test_missing_file():
    with pytest.raises(StructureError):
        read_library([fixture("missing.grpd")])


def test_first_picks_by_name():
    lib = read_library([fixture("bz2xz2.grpd")])
    assert lib.first("groups").name == "Z2"
    assert lib.first("groups", "V4").order == 4
    with pytest.raises(StructureError):
        lib.first("groups", "Q8")
    with pytest.raises(StructureError):
        lib.first("covers")


def with_extra_line(name, anchor, extra):
    """Fixture text with `extra` inserted after the line `anchor`; returns (text, line of extra)."""
    with open(fixture(name)) as handle:
        lines = handle.read().splitlines()
    at = lines.index(anchor) + 1
    return "\n".join(lines[:at] + [extra] + lines[at:]) + "\n", at + 1


@pytest.mark.parametrize("name, anchor, extra, message", [
    ("pair2.grpd", 'object 1 "b"', 'object 1 "c"', "duplicate object 1"),
    ("pair2.grpd", 'arrow 3 1 1 ["b","b"]', 'arrow 3 1 1 "bb"', "duplicate arrow 3"),
    ("pair2.grpd", "unit 1 3", "unit 1 3", "duplicate unit 1"),
    ("pair2.grpd", "inv 3 3", "inv 3 3", "duplicate inv 3"),
    ("pair2.grpd", "comp 3 3 3", "comp 0 0 0", "duplicate comp 0 0"),
    ("bz4_swap.grpd", "chart 0 0 1", "chart 0 1 0", "duplicate chart 0"),
    ("bz4_swap.grpd", "effect 3 1 0", "effect 3 0 1", "duplicate effect 3"),
    ("compose.grpd", "point 1 0 0 1", 'point 1 0 0 "x"', "duplicate point 1"),
    ("compose.grpd", "left 0 1 1", "left 0 1 0", "duplicate left 0 1"),
    ("compose.grpd", "right 1 1 0", "right 1 1 1", "duplicate right 1 1"),
    ("circle.grpd", 'point 2 "c"', 'point 2 "d"', "duplicate point 2"),
    ("circle.grpd", "part 2 2 0", "part 2 0 1", "duplicate part 2"),
    ("mobius.grpd", "k 0 2 0 1", "k 0 2 0 0", "duplicate k 0 2 0"),
])
def test_repeated_ids_in_fixtures_are_rejected(name, anchor, extra, message):
    text, line = with_extra_line(name, anchor, extra)
    with pytest.raises(ParseError) as info:
        Library().read(text, name)
    assert info.value.line == line
    assert message in str(info.value)


Z2 = "GROUP v1\nname Z2\ncyclic 2\nend\n"


@pytest.mark.parametrize("text, line, message", [
    ("GROUP v1\nname E\ntable\nrow 0\nlabel 0 e\nlabel 0 f\nend\n", 6, "duplicate label 0"),
    (Z2 + 'ACT v1\nname A\ngroup Z2\npoint 0 "a"\npoint 0 "b"\nend\n', 9, "duplicate point 0"),
    (Z2 + 'ACT v1\nname A\ngroup Z2\npoint 0 "a"\nact 0 0 0\nact 0 1 0\nact 0 1 0\nend\n', 11, "duplicate act 0 1"),
    (Z2 + "GRPD v1\nname BZ2\nbgroup Z2\nend\n"
     "GACT v1\nname flip\ngroup Z2\ngroupoid BZ2\nobj 0 0 0\nobj 0 1 0\nobj 0 1 0\nend\n", 15, "duplicate obj 0 1"),
])
def test_repeated_ids_inline_are_rejected(text, line, message):
    with pytest.raises(ParseError) as info:
        Library().read(text, "inline")
    assert info.value.line == line
    assert message in str(info.value)
