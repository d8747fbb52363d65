import re
from xml.dom import minidom

from fmtderive.diagnostics import Diagnostic
from fmtderive.emit import DataFormatDoc, FieldEntry, RecordGroup, build_docs, serialize

from conftest import run_pipeline

_ATTR_VALUE = r"(?:[^\"<>&]|&(?:amp|lt|gt|quot);)*"
_TAG = re.compile(
    r"<(/?)([A-Za-z][\w.-]*)((?:\s+[\w.-]+=\"" + _ATTR_VALUE + r"\")*)\s*(/?)>")


def assert_well_formed(text: str) -> None:
    """Minimal well-formedness check, independent of the stdlib XML parser.

    Verifies tag balance, double-quoted attributes, a single root element and
    properly escaped character data.
    """
    stack = []
    roots = 0
    pos = 0
    for match in _TAG.finditer(text):
        between = text[pos:match.start()]
        assert "<" not in between and re.search(r"&(?!amp;|lt;|gt;|quot;)", between) is None, \
            f"unescaped character data: {between!r}"
        closing, name, _attrs, self_closing = match.groups()
        if closing:
            assert not self_closing
            assert stack and stack[-1] == name, f"mismatched </{name}>"
            stack.pop()
        else:
            if not stack:
                roots += 1
            if not self_closing:
                stack.append(name)
        pos = match.end()
    assert stack == [], f"unclosed elements: {stack}"
    assert roots == 1, f"expected a single root element, found {roots}"
    assert text[pos:].strip() == "", f"trailing junk: {text[pos:]!r}"

# Golden documents for the worked example.  The Basic.TXT group sequence is
# the hand expansion of 1X,2(1X,i4),3(1X,f12.6) paired with the five items:
# seps 1x,1x then i4; sep 1x then i4; then (sep 1x, f12.6) three times.
ODTIME_GOLDEN = """\
<dataformat file="ODTIME.PRN" direction="input">
  <group number="18496" separator="list-directed">
    <integer format="*"/>
    <integer format="*"/>
    <double format="*"/>
  </group>
</dataformat>
"""

BASIC_GOLDEN = """\
<dataformat file="Basic.TXT" direction="output">
  <group number="136" separator="explicit">
    <sep format="1x"/>
    <sep format="1x"/>
    <integer format="i4"/>
    <sep format="1x"/>
    <integer format="i4"/>
    <sep format="1x"/>
    <double format="f12.6"/>
    <sep format="1x"/>
    <double format="f12.6"/>
    <sep format="1x"/>
    <double format="f12.6"/>
  </group>
</dataformat>
"""


def docs_for(source, **kwargs):
    _, _, events = run_pipeline(source, **kwargs)
    return build_docs(events)


def test_model_docs_structure(model_source):
    docs = docs_for(model_source)
    assert [d.file_name for d in docs] == ["ODTIME.PRN", "Basic.TXT"]

    odtime, basic = docs
    assert odtime.direction == "input"
    assert len(odtime.groups) == 1
    group = odtime.groups[0]
    assert group.number == 18496
    assert group.separator_mode == "list-directed"
    assert [(e.type_name, e.format) for e in group.entries] == [
        ("integer", "*"), ("integer", "*"), ("double", "*"),
    ]

    assert basic.direction == "output"
    assert len(basic.groups) == 1
    group = basic.groups[0]
    assert group.number == 136
    assert group.separator_mode == "explicit"
    assert [(e.type_name, e.format) for e in group.entries] == [
        ("integer", "i4"), ("integer", "i4"),
        ("double", "f12.6"), ("double", "f12.6"), ("double", "f12.6"),
    ]
    assert group.entries[0].separators_before == ("1x", "1x")
    assert all(e.separators_before == ("1x",) for e in group.entries[1:])


def test_model_docs_golden(model_source):
    docs = docs_for(model_source)
    assert serialize(docs[0]) == ODTIME_GOLDEN
    assert serialize(docs[1]) == BASIC_GOLDEN


def test_empty_event_list_gives_no_docs():
    assert build_docs([]) == []


def test_two_writes_merge_into_one_doc_two_groups():
    src = (
        "      OPEN(8,FILE='TWO.TXT')\n"
        "      WRITE(8,*) A\n"
        "      WRITE(8,100) B\n"
        "  100 FORMAT(F8.2)\n"
        "      CLOSE(8)\n"
    )
    docs = docs_for(src)
    assert len(docs) == 1
    doc = docs[0]
    assert doc.direction == "output"
    assert [g.separator_mode for g in doc.groups] == ["list-directed", "explicit"]


def test_read_and_write_same_file_direction_both():
    src = (
        "      OPEN(8,FILE='RW.TXT')\n"
        "      READ(8,*) A\n"
        "      WRITE(8,*) A\n"
        "      CLOSE(8)\n"
    )
    docs = docs_for(src)
    assert docs[0].direction == "both"


def test_zero_group_doc_serialization():
    doc = DataFormatDoc("X", "input")
    assert serialize(doc) == '<dataformat file="X" direction="input"></dataformat>\n'


def test_defaulted_multiplicity_serialization():
    src = (
        "      OPEN(8,FILE='VAR.TXT')\n"
        "      DO 10 I=1,M\n"
        "      WRITE(8,*) I\n"
        "   10 CONTINUE\n"
        "      CLOSE(8)\n"
    )
    doc = docs_for(src)[0]
    group = doc.groups[0]
    assert group.number == "M"
    assert group.resolved_default == 1
    text = serialize(doc)
    assert '<group number="M" resolved="1" resolution="default" separator="list-directed">' in text
    assert any(d.kind == "default-loop-count" for d in doc.diagnostics)
    assert "<note" in text


def test_conditional_group_attribute(tolerant_source):
    doc = docs_for(tolerant_source)[0]
    assert [g.conditional for g in doc.groups] == [True, False]
    assert 'conditional="true"' in serialize(doc)


def test_notes_and_attributes_are_escaped():
    doc = DataFormatDoc(
        'WE"IRD<&>.TXT', "input",
        (RecordGroup(1, (FieldEntry("integer", "i4"),), "explicit"),),
        (Diagnostic("unknown-unit", 'unit <9> has no "binding" & more'),),
    )
    text = serialize(doc)
    minidom.parseString(text)
    assert_well_formed(text)
    assert "&amp;" in text and "&lt;" in text


def test_all_docs_are_well_formed_xml(model_source, tolerant_source):
    for source in (model_source, tolerant_source):
        for doc in docs_for(source):
            text = serialize(doc)
            minidom.parseString(text)
            assert_well_formed(text)


def test_serialization_is_deterministic(model_source):
    first = [serialize(d) for d in docs_for(model_source)]
    second = [serialize(d) for d in docs_for(model_source)]
    assert first == second


def test_every_item_appears_exactly_once(model_source, tolerant_source):
    for source in (model_source, tolerant_source):
        _, _, events = run_pipeline(source)
        docs = build_docs(events)
        emitted = sum(len(g.entries) for d in docs for g in d.groups)
        expected = sum(len(e.items) for e in events)
        assert emitted == expected


def test_zero_multiplicity_group_is_kept_with_note():
    src = (
        "      OPEN(8,FILE='Z.TXT')\n"
        "      DO 10 I=5,1\n"
        "      WRITE(8,*) I\n"
        "   10 CONTINUE\n"
        "      CLOSE(8)\n"
    )
    doc = docs_for(src)[0]
    assert doc.groups[0].number == 0
    assert any(d.kind == "zero-multiplicity" for d in doc.diagnostics)
