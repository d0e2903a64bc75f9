"""Stream filters: FlateDecode with PNG predictors, ASCIIHex, ASCII85."""

from __future__ import annotations

import zlib

from ..errors import UnreadableDocument


def _apply_png_predictor(data: bytes, colors: int, bpc: int, columns: int) -> bytes:
    bpp = max(1, (colors * bpc) // 8)
    row_len = (columns * colors * bpc + 7) // 8
    out = bytearray()
    prev = bytearray(row_len)
    pos = 0
    n = len(data)
    while pos + 1 <= n:
        if pos + 1 + row_len > n:
            break
        ftype = data[pos]
        row = bytearray(data[pos + 1 : pos + 1 + row_len])
        pos += 1 + row_len
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub
            for i in range(bpp, row_len):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            for i in range(row_len):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif ftype == 3:  # Average
            for i in range(row_len):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(row_len):
                a = row[i - bpp] if i >= bpp else 0
                b = prev[i]
                c = prev[i - bpp] if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                row[i] = (row[i] + pred) & 0xFF
        else:
            raise UnreadableDocument(f"unsupported PNG predictor row type {ftype}")
        out += row
        prev = row
    return bytes(out)


def _flate(data: bytes, parms: dict | None) -> bytes:
    try:
        raw = zlib.decompress(data)
    except zlib.error:
        # tolerate trailing garbage by decompressing incrementally
        try:
            d = zlib.decompressobj()
            raw = d.decompress(data)
        except zlib.error as e:
            raise UnreadableDocument(f"broken Flate stream: {e}") from e
    if parms:
        predictor = int(parms.get("Predictor", 1) or 1)
        if predictor >= 10:
            raw = _apply_png_predictor(
                raw,
                int(parms.get("Colors", 1) or 1),
                int(parms.get("BitsPerComponent", 8) or 8),
                int(parms.get("Columns", 1) or 1),
            )
        elif predictor == 2:
            raise UnreadableDocument("TIFF predictor 2 is not supported")
    return raw


def _ascii_hex(data: bytes, _parms) -> bytes:
    digits = bytearray()
    for b in data:
        if b == 0x3E:  # >
            break
        if b in b"0123456789abcdefABCDEF":
            digits.append(b)
    if len(digits) % 2:
        digits.append(0x30)
    return bytes.fromhex(digits.decode("ascii"))


def _ascii_85(data: bytes, _parms) -> bytes:
    import base64

    text = data.replace(b"\n", b"").replace(b"\r", b"").replace(b" ", b"")
    if text.startswith(b"<~"):
        text = text[2:]
    if text.endswith(b"~>"):
        text = text[:-2]
    try:
        return base64.a85decode(text)
    except ValueError as e:
        raise UnreadableDocument(f"broken ASCII85 stream: {e}") from e


_FILTERS = {
    "FlateDecode": _flate,
    "Fl": _flate,
    "ASCIIHexDecode": _ascii_hex,
    "AHx": _ascii_hex,
    "ASCII85Decode": _ascii_85,
    "A85": _ascii_85,
}


def decode_stream(raw: bytes, stream_dict: dict, resolve) -> bytes:
    """Run a stream's filter chain; ``resolve`` dereferences indirect values."""
    filters = resolve(stream_dict.get("Filter"))
    parms = resolve(stream_dict.get("DecodeParms") or stream_dict.get("DP"))
    if filters is None:
        return raw
    if not isinstance(filters, list):
        filters = [filters]
        parms = [parms]
    elif not isinstance(parms, list):
        parms = [parms] * len(filters)
    data = raw
    for f, p in zip(filters, parms):
        name = str(resolve(f))
        fn = _FILTERS.get(name)
        if fn is None:
            raise UnreadableDocument(f"unsupported stream filter {name!r}")
        data = fn(data, resolve(p))
    return data
