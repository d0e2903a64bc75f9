"""PDF document model: cross-reference tables, object access, page tree.

Supports classic xref tables, cross-reference streams (PDF 1.5+), object
streams, hybrid files and incremental updates.  Encrypted documents are
rejected up front.  When the cross-reference data is broken the loader
falls back to scanning the file for ``N G obj`` headers, which recovers
most sloppily-written documents.
"""

from __future__ import annotations

import re
from typing import Any, Iterator

from ..errors import UnreadableDocument
from . import filters
from .syntax import Keyword, Name, PdfSyntaxError, Ref, Stream, parse_object_at, parse_token, skip_ws

_OBJ_HEADER = re.compile(rb"(\d{1,10})\s+(\d{1,5})\s+obj\b")
_STARTXREF = re.compile(rb"startxref\s+(\d+)")


class PdfDocument:
    """Read-only view of a parsed PDF file."""

    def __init__(self, data: bytes):
        if not data.lstrip()[:5].startswith(b"%PDF-"):
            raise UnreadableDocument("missing %PDF header; not a PDF file")
        self.data = data
        self.xref: dict[int, tuple] = {}  # num -> ("file", offset) | ("objstm", container, idx)
        self.trailer: dict = {}
        self.uses_xref_stream = False
        self._cache: dict[int, Any] = {}
        self._objstm_cache: dict[int, list] = {}
        self._load_xref()
        if "Encrypt" in self.trailer:
            raise UnreadableDocument(
                "document is encrypted (password protected); cannot extract text"
            )
        self._pages: list[dict] | None = None

    # --- xref loading -------------------------------------------------------

    def _load_xref(self) -> None:
        tail = self.data[-2048:]
        matches = list(_STARTXREF.finditer(tail))
        if not matches:
            self._recover_by_scan()
            return
        offset = int(matches[-1].group(1))
        seen: set[int] = set()
        try:
            while offset is not None and offset not in seen:
                seen.add(offset)
                offset = self._read_xref_section(offset)
        except (PdfSyntaxError, UnreadableDocument, ValueError, KeyError):
            self._recover_by_scan()
            return
        if "Root" not in self.trailer:
            self._recover_by_scan()

    def _read_xref_section(self, offset: int) -> int | None:
        if offset < 0 or offset >= len(self.data):
            raise UnreadableDocument(f"xref offset {offset} out of range")
        pos = skip_ws(self.data, offset)
        if self.data[pos : pos + 4] == b"xref":
            return self._read_xref_table(pos + 4)
        return self._read_xref_stream(pos)

    def _read_xref_table(self, pos: int) -> int | None:
        data = self.data
        while True:
            pos = skip_ws(data, pos)
            if data[pos : pos + 7] == b"trailer":
                trailer, pos = parse_object_at(data, pos + 7)
                if not isinstance(trailer, dict):
                    raise UnreadableDocument("malformed trailer")
                for k, v in trailer.items():
                    self.trailer.setdefault(k, v)
                # hybrid files keep additional entries in an xref stream
                if "XRefStm" in trailer:
                    self._read_xref_stream(int(trailer["XRefStm"]))
                prev = trailer.get("Prev")
                return int(prev) if prev is not None else None
            start, pos = parse_token(data, pos)
            count, pos = parse_token(data, pos)
            if not isinstance(start, int) or not isinstance(count, int):
                raise UnreadableDocument("malformed xref subsection header")
            pos = skip_ws(data, pos)
            for i in range(count):
                line = data[pos : pos + 20]
                fields = line.split()
                if len(fields) < 3:
                    raise UnreadableDocument("short xref entry")
                off, _gen, kind = int(fields[0]), int(fields[1]), fields[2]
                num = start + i
                if kind == b"n" and num not in self.xref:
                    self.xref[num] = ("file", off)
                pos += 20
                # tolerate 19-byte entries from sloppy writers
                if data[pos - 1 : pos] not in (b"\n", b"\r", b" "):
                    pos -= 1

    def _read_xref_stream(self, pos: int) -> int | None:
        obj, stream = self._parse_indirect_at(pos, resolve_length=False)
        if not isinstance(stream, Stream):
            raise UnreadableDocument("xref offset does not point at an xref stream")
        self.uses_xref_stream = True
        sd = stream.dict
        raw = filters.decode_stream(stream.raw, sd, self._resolve_simple)
        w = [int(x) for x in sd["W"]]
        size = int(sd["Size"])
        index = sd.get("Index", [0, size])
        index = [int(x) for x in index]
        entry_len = sum(w)
        pos2 = 0
        for start, count in zip(index[0::2], index[1::2]):
            for i in range(count):
                if pos2 + entry_len > len(raw):
                    break
                fields = []
                p = pos2
                for width in w:
                    fields.append(int.from_bytes(raw[p : p + width], "big") if width else None)
                    p += width
                pos2 += entry_len
                ftype = fields[0] if w[0] else 1
                num = start + i
                if num in self.xref:
                    continue
                if ftype == 1:
                    self.xref[num] = ("file", fields[1])
                elif ftype == 2:
                    self.xref[num] = ("objstm", fields[1], fields[2])
        for k, v in sd.items():
            if k not in ("W", "Index", "Filter", "DecodeParms", "Length", "Type"):
                self.trailer.setdefault(k, v)
        prev = sd.get("Prev")
        return int(prev) if prev is not None else None

    def _recover_by_scan(self) -> None:
        """Rebuild the xref by scanning for object headers (newest-last wins)."""
        self.xref.clear()
        for m in _OBJ_HEADER.finditer(self.data):
            self.xref[int(m.group(1))] = ("file", m.start())
        if not self.xref:
            raise UnreadableDocument("no indirect objects found; file is not usable")
        trailer_pos = self.data.rfind(b"trailer")
        if trailer_pos >= 0:
            try:
                trailer, _ = parse_object_at(self.data, trailer_pos + 7)
                if isinstance(trailer, dict):
                    self.trailer.update(trailer)
            except PdfSyntaxError:
                pass
        if "Root" not in self.trailer:
            for num in sorted(self.xref):
                try:
                    obj = self.get_object(num)
                except UnreadableDocument:
                    continue
                if isinstance(obj, dict) and obj.get("Type") == Name("Catalog"):
                    self.trailer["Root"] = Ref(num, 0)
                    break
            else:
                raise UnreadableDocument("cannot locate document catalog")

    # --- object access -------------------------------------------------------

    def _resolve_simple(self, obj: Any) -> Any:
        while isinstance(obj, Ref):
            obj = self.get_object(obj.num)
        return obj

    def resolve(self, obj: Any) -> Any:
        return self._resolve_simple(obj)

    def get_object(self, num: int) -> Any:
        if num in self._cache:
            return self._cache[num]
        entry = self.xref.get(num)
        if entry is None:
            return None
        self._cache[num] = None  # cycle guard
        if entry[0] == "file":
            obj = self._load_at_offset(num, entry[1])
        else:
            obj = self._load_from_objstm(entry[1], entry[2], num)
        self._cache[num] = obj
        return obj

    def _parse_indirect_at(self, offset: int, resolve_length: bool = True) -> tuple[int, Any]:
        data = self.data
        pos = skip_ws(data, offset)
        m = _OBJ_HEADER.match(data, pos)
        if not m:
            raise UnreadableDocument(f"no object header at offset {offset}")
        num = int(m.group(1))
        obj, pos = parse_object_at(data, m.end())
        pos2 = skip_ws(data, pos)
        if data[pos2 : pos2 + 6] == b"stream":
            pos2 += 6
            if data[pos2 : pos2 + 2] == b"\r\n":
                pos2 += 2
            elif data[pos2 : pos2 + 1] in (b"\n", b"\r"):
                pos2 += 1
            if not isinstance(obj, dict):
                raise UnreadableDocument("stream keyword after non-dictionary")
            length = obj.get("Length")
            if isinstance(length, Ref) and resolve_length:
                length = self._resolve_simple(length)
            raw = None
            if isinstance(length, int) and 0 <= length and pos2 + length <= len(data):
                end = data[pos2 + length : pos2 + length + 20]
                if b"endstream" in end or end.strip()[:9] == b"endstream":
                    raw = data[pos2 : pos2 + length]
            if raw is None:
                stop = data.find(b"endstream", pos2)
                if stop < 0:
                    raise UnreadableDocument(f"object {num}: unterminated stream")
                raw = data[pos2:stop].rstrip(b"\r\n")
            return num, Stream(obj, raw)
        return num, obj

    def _load_at_offset(self, num: int, offset: int) -> Any:
        got_num, obj = self._parse_indirect_at(offset)
        if got_num != num:
            # stale offset; try a recovery scan for this object number
            pattern = re.compile(rb"(?m)^\s*%d\s+\d+\s+obj\b" % num)
            for m in pattern.finditer(self.data):
                got_num, obj = self._parse_indirect_at(m.start())
                if got_num == num:
                    return obj
            raise UnreadableDocument(f"xref points to object {got_num}, wanted {num}")
        return obj

    def _load_from_objstm(self, container: int, idx: int, want: int) -> Any:
        pairs = self._objstm_cache.get(container)
        if pairs is None:
            stm = self.get_object(container)
            if not isinstance(stm, Stream):
                raise UnreadableDocument(f"object stream {container} missing")
            data = filters.decode_stream(stm.raw, stm.dict, self._resolve_simple)
            n = int(self._resolve_simple(stm.dict["N"]))
            first = int(self._resolve_simple(stm.dict["First"]))
            pairs = []
            pos = 0
            for _ in range(n):
                onum, pos = parse_token(data, pos)
                ooff, pos = parse_token(data, pos)
                pairs.append((int(onum), int(ooff), first, data))
            self._objstm_cache[container] = pairs
        for onum, ooff, first, data in pairs:
            if onum == want:
                obj, _ = parse_object_at(data, first + ooff)
                return obj
        raise UnreadableDocument(f"object {want} not found in object stream {container}")

    def stream_data(self, obj: Any) -> bytes:
        obj = self._resolve_simple(obj)
        if not isinstance(obj, Stream):
            raise UnreadableDocument("expected a stream object")
        if obj.decoded is None:
            obj.decoded = filters.decode_stream(obj.raw, obj.dict, self._resolve_simple)
        return obj.decoded

    # --- page tree ------------------------------------------------------------

    _INHERITED = ("Resources", "MediaBox", "CropBox", "Rotate")

    def pages(self) -> list[dict]:
        """Flattened page dictionaries with inherited attributes filled in."""
        if self._pages is not None:
            return self._pages
        root = self._resolve_simple(self.trailer.get("Root"))
        if not isinstance(root, dict):
            raise UnreadableDocument("document catalog missing")
        tree = self._resolve_simple(root.get("Pages"))
        if not isinstance(tree, dict):
            raise UnreadableDocument("page tree missing")
        out: list[dict] = []
        self._walk_pages(tree, {}, out, set())
        if not out:
            raise UnreadableDocument("document has no pages")
        self._pages = out
        return out

    def _walk_pages(self, node: dict, inherited: dict, out: list, seen: set) -> None:
        nid = id(node)
        if nid in seen or len(out) > 50_000:
            return
        seen.add(nid)
        attrs = dict(inherited)
        for key in self._INHERITED:
            if key in node:
                attrs[key] = node[key]
        ntype = str(node.get("Type", ""))
        kids = node.get("Kids")
        if ntype == "Page" or (kids is None and "Contents" in node):
            page = dict(node)
            for key, val in attrs.items():
                page.setdefault(key, val)
            out.append(page)
            return
        for kid in self._resolve_simple(kids) or []:
            kid = self._resolve_simple(kid)
            if isinstance(kid, dict):
                self._walk_pages(kid, attrs, out, seen)

    def page_refs(self) -> list[Ref]:
        """Indirect references of the page objects, in page order."""
        root = self._resolve_simple(self.trailer.get("Root"))
        tree_ref = root.get("Pages")
        refs: list[Ref] = []

        def walk(ref: Any, inherited_seen: set) -> None:
            node = self._resolve_simple(ref)
            if not isinstance(node, dict) or id(node) in inherited_seen:
                return
            inherited_seen.add(id(node))
            kids = self._resolve_simple(node.get("Kids"))
            if str(node.get("Type", "")) == "Page" or (kids is None and "Contents" in node):
                if isinstance(ref, Ref):
                    refs.append(ref)
                return
            for kid in kids or []:
                walk(kid, inherited_seen)

        walk(tree_ref, set())
        return refs

    def media_box(self, page: dict) -> tuple[float, float, float, float]:
        box = self._resolve_simple(page.get("MediaBox")) or [0, 0, 612, 792]
        vals = [float(self._resolve_simple(v)) for v in box]
        x0, y0, x1, y1 = vals[0], vals[1], vals[2], vals[3]
        return (min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))

    def content_bytes(self, page: dict) -> bytes:
        contents = self._resolve_simple(page.get("Contents"))
        if contents is None:
            return b""
        if isinstance(contents, Stream):
            return self.stream_data(contents)
        parts = []
        for item in contents:
            item = self._resolve_simple(item)
            if isinstance(item, Stream):
                parts.append(self.stream_data(item))
        return b"\n".join(parts)

    def page_annotations(self, page_index: int) -> list[dict]:
        """Resolved annotation dictionaries of one page."""
        page = self.pages()[page_index]
        annots = self._resolve_simple(page.get("Annots")) or []
        out = []
        for a in annots:
            a = self._resolve_simple(a)
            if isinstance(a, dict):
                out.append(a)
        return out

    def max_object_number(self) -> int:
        size = self.trailer.get("Size")
        high = max(self.xref, default=0)
        if isinstance(size, int):
            high = max(high, size - 1)
        return high


def open_pdf(path_or_bytes) -> PdfDocument:
    if isinstance(path_or_bytes, (bytes, bytearray)):
        return PdfDocument(bytes(path_or_bytes))
    try:
        with open(path_or_bytes, "rb") as f:
            data = f.read()
    except OSError as e:
        raise UnreadableDocument(f"cannot read {path_or_bytes}: {e}") from e
    return PdfDocument(data)


def iter_content_tokens(data: bytes) -> Iterator[Any]:
    """Tokenize a content stream, yielding operands and Keyword operators."""
    pos = 0
    n = len(data)
    while True:
        pos = skip_ws(data, pos)
        if pos >= n:
            return
        try:
            obj, pos = parse_token(data, pos)
        except PdfSyntaxError:
            return
        if isinstance(obj, Keyword) and obj.value == b"BI":
            # inline image: skip to EI at a token boundary
            idx = data.find(b"EI", pos)
            while idx > 0 and not (data[idx - 1] in b" \t\r\n\x00" ):
                idx = data.find(b"EI", idx + 2)
            pos = idx + 2 if idx >= 0 else n
            continue
        yield obj
