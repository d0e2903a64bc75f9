"""Tokenizer and parser for the PDF object syntax (ISO 32000 subset).

Operates directly on the file bytes.  Produces plain Python values: dicts
keyed by name strings, lists, bytes for strings, :class:`Name`,
:class:`Ref` and :class:`Stream` wrappers.  The same machinery tokenizes
content streams (where operators appear as :class:`Keyword` tokens).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

WHITESPACE = b"\x00\t\n\x0c\r "
DELIMITERS = b"()<>[]{}/%"


class Name(str):
    """A PDF name object (stored without the leading slash)."""

    __slots__ = ()


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int = 0


@dataclass(frozen=True)
class Keyword:
    """A bare keyword token (operators, obj/endobj, etc.)."""

    value: bytes


@dataclass
class Stream:
    dict: dict
    raw: bytes
    decoded: bytes | None = field(default=None, repr=False)


class PdfSyntaxError(Exception):
    pass


def is_ws(byte: int) -> bool:
    return byte in WHITESPACE


def is_delim(byte: int) -> bool:
    return byte in DELIMITERS


def skip_ws(buf: bytes, pos: int) -> int:
    n = len(buf)
    while pos < n:
        b = buf[pos]
        if b in WHITESPACE:
            pos += 1
        elif b == 0x25:  # % comment runs to end of line
            while pos < n and buf[pos] not in b"\r\n":
                pos += 1
        else:
            break
    return pos


def _parse_literal_string(buf: bytes, pos: int) -> tuple[bytes, int]:
    # pos points just past the opening parenthesis
    out = bytearray()
    depth = 1
    n = len(buf)
    while pos < n:
        b = buf[pos]
        if b == 0x5C:  # backslash escape
            pos += 1
            if pos >= n:
                break
            e = buf[pos]
            if e in b"nrtbf":
                out.append({0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12}[e])
                pos += 1
            elif e in b"()\\":
                out.append(e)
                pos += 1
            elif e in b"01234567":
                oct_digits = bytearray()
                while pos < n and buf[pos] in b"01234567" and len(oct_digits) < 3:
                    oct_digits.append(buf[pos])
                    pos += 1
                out.append(int(oct_digits, 8) & 0xFF)
            elif e in b"\r\n":  # line continuation
                pos += 1
                if e == 0x0D and pos < n and buf[pos] == 0x0A:
                    pos += 1
            else:
                out.append(e)
                pos += 1
        elif b == 0x28:  # (
            depth += 1
            out.append(b)
            pos += 1
        elif b == 0x29:  # )
            depth -= 1
            if depth == 0:
                return bytes(out), pos + 1
            out.append(b)
            pos += 1
        else:
            out.append(b)
            pos += 1
    raise PdfSyntaxError("unterminated literal string")


def _parse_hex_string(buf: bytes, pos: int) -> tuple[bytes, int]:
    # pos points just past the opening angle bracket
    digits = bytearray()
    n = len(buf)
    while pos < n:
        b = buf[pos]
        if b == 0x3E:  # >
            pos += 1
            break
        if b in b"0123456789abcdefABCDEF":
            digits.append(b)
        pos += 1
    if len(digits) % 2:
        digits.append(0x30)
    return bytes.fromhex(digits.decode("ascii")), pos


def _parse_name(buf: bytes, pos: int) -> tuple[Name, int]:
    # pos points just past the slash
    out = bytearray()
    n = len(buf)
    while pos < n:
        b = buf[pos]
        if is_ws(b) or is_delim(b):
            break
        if b == 0x23 and pos + 2 < n:  # #xx hex escape
            try:
                out.append(int(buf[pos + 1 : pos + 3], 16))
                pos += 3
                continue
            except ValueError:
                pass
        out.append(b)
        pos += 1
    return Name(out.decode("latin-1")), pos


_NUMBER_CHARS = b"0123456789+-."


def parse_token(buf: bytes, pos: int) -> tuple[Any, int]:
    """Parse one token/object at ``pos``; indirect references NOT folded."""
    pos = skip_ws(buf, pos)
    n = len(buf)
    if pos >= n:
        raise PdfSyntaxError("unexpected end of data")
    b = buf[pos]
    if b == 0x3C:  # < or <<
        if pos + 1 < n and buf[pos + 1] == 0x3C:
            return _parse_dict(buf, pos + 2)
        return _parse_hex_string(buf, pos + 1)
    if b == 0x28:  # (
        return _parse_literal_string(buf, pos + 1)
    if b == 0x2F:  # /
        return _parse_name(buf, pos + 1)
    if b == 0x5B:  # [
        return _parse_array(buf, pos + 1)
    if b == 0x5D:  # ]
        return Keyword(b"]"), pos + 1
    if b == 0x3E and pos + 1 < n and buf[pos + 1] == 0x3E:
        return Keyword(b">>"), pos + 2
    if b == 0x7B:  # { (type 4 functions; treated as keyword)
        return Keyword(b"{"), pos + 1
    if b == 0x7D:
        return Keyword(b"}"), pos + 1
    if b in _NUMBER_CHARS:
        start = pos
        pos += 1
        while pos < n and buf[pos] in _NUMBER_CHARS:
            pos += 1
        tok = buf[start:pos]
        try:
            if b"." in tok:
                return float(tok), pos
            return int(tok), pos
        except ValueError:
            return Keyword(tok), pos
    # bare keyword
    start = pos
    while pos < n and not is_ws(buf[pos]) and not is_delim(buf[pos]):
        pos += 1
    word = buf[start:pos]
    if not word:
        raise PdfSyntaxError(f"unparseable byte {b!r} at offset {start}")
    if word == b"true":
        return True, pos
    if word == b"false":
        return False, pos
    if word == b"null":
        return None, pos
    return Keyword(word), pos


def _parse_array(buf: bytes, pos: int) -> tuple[list, int]:
    items: list[Any] = []
    while True:
        obj, pos = parse_token(buf, pos)
        if isinstance(obj, Keyword):
            if obj.value == b"]":
                return _fold_refs(items), pos
            if obj.value == b"R" and len(items) >= 2:
                gen = items.pop()
                num = items.pop()
                items.append(Ref(int(num), int(gen)))
                continue
            raise PdfSyntaxError(f"unexpected keyword {obj.value!r} in array")
        items.append(obj)


def _parse_dict(buf: bytes, pos: int) -> tuple[dict, int]:
    items: list[Any] = []
    while True:
        obj, pos = parse_token(buf, pos)
        if isinstance(obj, Keyword):
            if obj.value == b">>":
                break
            if obj.value == b"R" and len(items) >= 2:
                gen = items.pop()
                num = items.pop()
                items.append(Ref(int(num), int(gen)))
                continue
            raise PdfSyntaxError(f"unexpected keyword {obj.value!r} in dict")
        items.append(obj)
    items = _fold_refs(items)
    if len(items) % 2:
        raise PdfSyntaxError("dictionary with odd number of items")
    out = {}
    for k, v in zip(items[0::2], items[1::2]):
        if not isinstance(k, Name):
            raise PdfSyntaxError(f"dictionary key {k!r} is not a name")
        out[str(k)] = v
    return out, pos


def _fold_refs(items: list) -> list:
    # arrays/dicts parse "1 0 R" as three tokens when R was consumed above;
    # nothing further needed here, but integers followed by R inside nested
    # structures were already folded during parsing.
    return items


def parse_object_at(buf: bytes, pos: int) -> tuple[Any, int]:
    """Parse a full object, folding trailing ``num gen R`` references."""
    obj, pos = parse_token(buf, pos)
    if isinstance(obj, int):
        save = pos
        try:
            nxt, p2 = parse_token(buf, pos)
            if isinstance(nxt, int):
                kw, p3 = parse_token(buf, p2)
                if isinstance(kw, Keyword) and kw.value == b"R":
                    return Ref(obj, nxt), p3
        except PdfSyntaxError:
            pass
        return obj, save
    return obj, pos


# --- serialization (used by the annotation writer) ---------------------------


def _escape_literal(data: bytes) -> bytes:
    out = bytearray(b"(")
    for b in data:
        if b in b"()\\":
            out += b"\\" + bytes([b])
        elif 32 <= b < 127:
            out.append(b)
        elif b == 10:
            out += b"\\n"
        elif b == 13:
            out += b"\\r"
        else:
            out += b"\\%03o" % b
    out += b")"
    return bytes(out)


def _name_bytes(name: str) -> bytes:
    out = bytearray(b"/")
    for b in name.encode("latin-1"):
        if is_ws(b) or is_delim(b) or b == 0x23 or not (33 <= b <= 126):
            out += b"#%02X" % b
        else:
            out.append(b)
    return bytes(out)


def serialize(obj: Any) -> bytes:
    """Serialize a Python value back to PDF object syntax."""
    if obj is None:
        return b"null"
    if obj is True:
        return b"true"
    if obj is False:
        return b"false"
    if isinstance(obj, Name):
        return _name_bytes(str(obj))
    if isinstance(obj, Ref):
        return b"%d %d R" % (obj.num, obj.gen)
    if isinstance(obj, int):
        return b"%d" % obj
    if isinstance(obj, float):
        text = f"{obj:.4f}".rstrip("0").rstrip(".")
        return (text or "0").encode("ascii")
    if isinstance(obj, bytes):
        return _escape_literal(obj)
    if isinstance(obj, str):
        return _escape_literal(obj.encode("latin-1", errors="replace"))
    if isinstance(obj, list):
        return b"[" + b" ".join(serialize(x) for x in obj) + b"]"
    if isinstance(obj, dict):
        parts = [b"<<"]
        for k, v in obj.items():
            parts.append(_name_bytes(str(k)) + b" " + serialize(v))
        parts.append(b">>")
        return b"\n".join(parts)
    if isinstance(obj, Stream):
        body = dict(obj.dict)
        body["Length"] = len(obj.raw)
        return serialize(body) + b"\nstream\n" + obj.raw + b"\nendstream"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
