"""Highlight-annotation writer using PDF incremental updates.

The annotated copy is the original file byte-for-byte plus an appended
update section: new annotation objects, re-issued page objects pointing at
them, and a cross-reference section of the same flavor (classic table or
xref stream) as the original.  Page content streams are never touched, so
the text layer and page count are unchanged by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import AnnotationFailure
from .document import PdfDocument
from .syntax import Name, Ref, Stream, serialize


@dataclass
class HighlightBox:
    page_index: int
    x0: float
    y0: float
    x1: float
    y1: float
    color: tuple[float, float, float] = (1.0, 0.85, 0.0)
    opacity: float = 0.35
    note: str = ""


def _appearance_stream(box: HighlightBox) -> Stream:
    w = box.x1 - box.x0
    h = box.y1 - box.y0
    r, g, b = box.color
    body = (
        f"/GS0 gs {r:.3f} {g:.3f} {b:.3f} rg "
        f"0 0 {w:.2f} {h:.2f} re f\n"
    ).encode("ascii")
    return Stream(
        dict={
            "Type": Name("XObject"),
            "Subtype": Name("Form"),
            "BBox": [0.0, 0.0, w, h],
            "Resources": {
                "ExtGState": {
                    "GS0": {
                        "Type": Name("ExtGState"),
                        "ca": box.opacity,
                        "CA": box.opacity,
                        "BM": Name("Multiply"),
                    }
                }
            },
        },
        raw=body,
    )


def _annotation_dict(box: HighlightBox, ap_ref: Ref) -> dict:
    annot = {
        "Type": Name("Annot"),
        "Subtype": Name("Square"),
        "Rect": [box.x0, box.y0, box.x1, box.y1],
        "C": list(box.color),
        "IC": list(box.color),
        "CA": box.opacity,
        "F": 4,  # print flag
        "Border": [0, 0, 0],
        "AP": {"N": ap_ref},
    }
    if box.note:
        annot["Contents"] = box.note.encode("latin-1", errors="replace")
    return annot


def add_highlights(src_bytes: bytes, boxes: list[HighlightBox]) -> bytes:
    """Return a highlighted copy of the document as bytes.

    Raises :class:`AnnotationFailure` when the source cannot be re-opened
    or re-serialized; the caller decides whether that is fatal.
    """
    if not boxes:
        return src_bytes
    try:
        doc = PdfDocument(src_bytes)
        page_refs = doc.page_refs()
        pages = doc.pages()
    except Exception as e:
        raise AnnotationFailure(f"cannot open source for annotation: {e}") from e

    by_page: dict[int, list[HighlightBox]] = {}
    for box in boxes:
        if not 0 <= box.page_index < len(page_refs):
            raise AnnotationFailure(
                f"highlight references page {box.page_index} of a "
                f"{len(page_refs)}-page document"
            )
        by_page.setdefault(box.page_index, []).append(box)

    try:
        next_num = doc.max_object_number() + 1
        new_objects: list[tuple[int, int, object]] = []  # (num, gen, obj)

        for page_index, page_boxes in sorted(by_page.items()):
            annot_refs = []
            for box in page_boxes:
                ap = _appearance_stream(box)
                ap_num = next_num
                next_num += 1
                new_objects.append((ap_num, 0, ap))
                annot_num = next_num
                next_num += 1
                new_objects.append((annot_num, 0, _annotation_dict(box, Ref(ap_num))))
                annot_refs.append(Ref(annot_num))

            page_ref = page_refs[page_index]
            page = dict(pages[page_index])
            existing = page.get("Annots")
            existing_list = doc.resolve(existing) or []
            page["Annots"] = list(existing_list) + annot_refs
            new_objects.append((page_ref.num, page_ref.gen, page))

        return _append_update(src_bytes, doc, new_objects, next_num)
    except AnnotationFailure:
        raise
    except Exception as e:
        raise AnnotationFailure(f"annotation serialization failed: {e}") from e


def _append_update(src: bytes, doc: PdfDocument, new_objects, next_num: int) -> bytes:
    out = bytearray(src)
    if out and out[-1:] != b"\n":
        out += b"\n"

    offsets: dict[int, tuple[int, int]] = {}  # num -> (offset, gen)
    for num, gen, obj in new_objects:
        offsets[num] = (len(out), gen)
        out += b"%d %d obj\n" % (num, gen)
        out += serialize(obj)
        out += b"\nendobj\n"

    prev_start = _last_startxref(src)
    trailer_extra = {
        "Root": doc.trailer.get("Root"),
        "Size": next_num,
    }
    if "Info" in doc.trailer:
        trailer_extra["Info"] = doc.trailer["Info"]
    if "ID" in doc.trailer:
        trailer_extra["ID"] = doc.trailer["ID"]
    if prev_start is not None:
        trailer_extra["Prev"] = prev_start

    if doc.uses_xref_stream:
        xref_num = next_num
        trailer_extra["Size"] = xref_num + 1
        entries = dict(offsets)
        xref_offset = len(out)
        entries[xref_num] = (xref_offset, 0)
        stream = _xref_stream(entries, trailer_extra)
        out += b"%d 0 obj\n" % xref_num
        out += serialize(stream)
        out += b"\nendobj\n"
    else:
        xref_offset = len(out)
        out += _xref_table(offsets)
        out += b"trailer\n" + serialize(trailer_extra) + b"\n"

    out += b"startxref\n%d\n%%%%EOF\n" % xref_offset
    return bytes(out)


def _last_startxref(data: bytes) -> int | None:
    idx = data.rfind(b"startxref")
    if idx < 0:
        return None
    tail = data[idx + 9 : idx + 40].split()
    try:
        return int(tail[0])
    except (IndexError, ValueError):
        return None


def _contiguous_ranges(nums: list[int]) -> list[list[int]]:
    ranges: list[list[int]] = []
    for n in sorted(nums):
        if ranges and n == ranges[-1][-1] + 1:
            ranges[-1].append(n)
        else:
            ranges.append([n])
    return ranges


def _xref_table(offsets: dict[int, tuple[int, int]]) -> bytes:
    out = bytearray(b"xref\n")
    for group in _contiguous_ranges(list(offsets)):
        out += b"%d %d\n" % (group[0], len(group))
        for num in group:
            off, gen = offsets[num]
            out += b"%010d %05d n \n" % (off, gen)
    return bytes(out)


def _xref_stream(entries: dict[int, tuple[int, int]], trailer: dict) -> Stream:
    index: list[int] = []
    data = bytearray()
    for group in _contiguous_ranges(list(entries)):
        index += [group[0], len(group)]
        for num in group:
            off, gen = entries[num]
            data += b"\x01" + off.to_bytes(8, "big") + gen.to_bytes(2, "big")
    sd = {
        "Type": Name("XRef"),
        "W": [1, 8, 2],
        "Index": index,
    }
    sd.update(trailer)
    return Stream(dict=sd, raw=bytes(data))
