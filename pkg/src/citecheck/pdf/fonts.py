"""Font handling for text extraction: widths and code-to-unicode mapping.

Simple fonts (Type1/TrueType/Type3) use one-byte codes decoded through, in
priority order, the font's /ToUnicode CMap, an /Encoding dictionary with
/Differences, or a named base encoding (WinAnsi and MacRoman map onto the
cp1252/mac-roman codecs).  Composite Type0 fonts use two-byte codes
(Identity ordering) and rely on /ToUnicode.  Widths come from /Widths or
the CID /W array; the built-in metrics of the 14 standard fonts fill the
gap for unembedded base fonts.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .syntax import Name, Stream
from .document import PdfDocument, iter_content_tokens
from . import filters

logger = logging.getLogger(__name__)

# Compact Adobe-glyph-list subset: everything the standard encodings of the
# base-14 fonts and common LaTeX/Type1 subsets actually use.
_GLYPHS = {
    "space": " ", "exclam": "!", "quotedbl": '"', "numbersign": "#",
    "dollar": "$", "percent": "%", "ampersand": "&", "quotesingle": "'",
    "parenleft": "(", "parenright": ")", "asterisk": "*", "plus": "+",
    "comma": ",", "hyphen": "-", "period": ".", "slash": "/",
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
    "colon": ":", "semicolon": ";", "less": "<", "equal": "=", "greater": ">",
    "question": "?", "at": "@", "bracketleft": "[", "backslash": "\\",
    "bracketright": "]", "asciicircum": "^", "underscore": "_",
    "grave": "`", "braceleft": "{", "bar": "|", "braceright": "}",
    "asciitilde": "~", "quoteleft": "‘", "quoteright": "’",
    "quotedblleft": "“", "quotedblright": "”",
    "quotesinglbase": "‚", "quotedblbase": "„",
    "endash": "–", "emdash": "—", "bullet": "•",
    "dagger": "†", "daggerdbl": "‡", "ellipsis": "…",
    "fi": "ﬁ", "fl": "ﬂ", "ff": "ﬀ", "ffi": "ﬃ",
    "ffl": "ﬄ", "dotlessi": "ı", "oe": "œ", "OE": "Œ",
    "ae": "æ", "AE": "Æ", "oslash": "ø", "Oslash": "Ø",
    "germandbls": "ß", "cent": "¢", "sterling": "£",
    "yen": "¥", "florin": "ƒ", "section": "§",
    "currency": "¤", "copyright": "©", "registered": "®",
    "trademark": "™", "degree": "°", "plusminus": "±",
    "multiply": "×", "divide": "÷", "mu": "µ",
    "paragraph": "¶", "periodcentered": "·", "cedilla": "¸",
    "guillemotleft": "«", "guillemotright": "»",
    "guilsinglleft": "‹", "guilsinglright": "›",
    "exclamdown": "¡", "questiondown": "¿", "minus": "−",
    "fraction": "⁄", "acute": "´", "dieresis": "¨",
    "circumflex": "ˆ", "tilde": "˜", "macron": "¯",
    "breve": "˘", "dotaccent": "˙", "ring": "˚",
    "hungarumlaut": "˝", "ogonek": "˛", "caron": "ˇ",
}
for _ch in "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz":
    _GLYPHS[_ch] = _ch
for _name, _ch in {
    "agrave": "à", "aacute": "á", "acircumflex": "â",
    "atilde": "ã", "adieresis": "ä", "aring": "å",
    "ccedilla": "ç", "egrave": "è", "eacute": "é",
    "ecircumflex": "ê", "edieresis": "ë", "igrave": "ì",
    "iacute": "í", "icircumflex": "î", "idieresis": "ï",
    "ntilde": "ñ", "ograve": "ò", "oacute": "ó",
    "ocircumflex": "ô", "otilde": "õ", "odieresis": "ö",
    "ugrave": "ù", "uacute": "ú", "ucircumflex": "û",
    "udieresis": "ü", "yacute": "ý", "ydieresis": "ÿ",
    "thorn": "þ", "eth": "ð", "scaron": "š",
    "zcaron": "ž", "Scaron": "Š", "Zcaron": "Ž",
    "Lslash": "Ł", "lslash": "ł", "Euro": "€",
}.items():
    _GLYPHS[_name] = _ch
    _GLYPHS[_name.capitalize()] = _ch.upper() if len(_ch) == 1 else _ch

_UNI_NAME = re.compile(r"^uni([0-9A-Fa-f]{4})$")
_U_NAME = re.compile(r"^u([0-9A-Fa-f]{4,6})$")

_BASE14_ALIASES = {
    "Arial": "Helvetica",
    "ArialMT": "Helvetica",
    "Arial-Bold": "Helvetica-Bold",
    "Arial-BoldMT": "Helvetica-Bold",
    "TimesNewRoman": "Times-Roman",
    "TimesNewRomanPSMT": "Times-Roman",
    "CourierNew": "Courier",
    "Symbol": "Symbol",
    "ZapfDingbats": "ZapfDingbats",
}


def _glyph_to_unicode(name: str) -> str:
    if name in _GLYPHS:
        return _GLYPHS[name]
    m = _UNI_NAME.match(name)
    if m:
        return chr(int(m.group(1), 16))
    m = _U_NAME.match(name)
    if m:
        return chr(int(m.group(1), 16))
    return ""


def _base14_name(base_font: str) -> str:
    name = base_font.split("+")[-1]  # strip subset prefix like ABCDEF+
    return _BASE14_ALIASES.get(name, name)


def _std14_width(base_font: str, ch: str) -> float:
    try:
        from reportlab.pdfbase import pdfmetrics

        return pdfmetrics.stringWidth(ch, _base14_name(base_font), 1000.0)
    except Exception:
        return 500.0


@dataclass
class Glyph:
    code: int
    text: str
    width: float  # glyph-space units (1/1000 text space)
    is_word_space: bool


def _parse_tounicode(data: bytes) -> dict[int, str]:
    """Extract code -> unicode pairs from a ToUnicode CMap stream."""
    out: dict[int, str] = {}
    tokens = list(iter_content_tokens(data))
    i = 0

    def utf16(b: bytes) -> str:
        try:
            return b.decode("utf-16-be")
        except UnicodeDecodeError:
            return ""

    while i < len(tokens):
        tok = tokens[i]
        if hasattr(tok, "value") and tok.value == b"beginbfchar":
            i += 1
            while i + 1 < len(tokens) and not hasattr(tokens[i], "value"):
                src, dst = tokens[i], tokens[i + 1]
                if isinstance(src, bytes) and isinstance(dst, bytes):
                    out[int.from_bytes(src, "big")] = utf16(dst)
                i += 2
        elif hasattr(tok, "value") and tok.value == b"beginbfrange":
            i += 1
            while i + 2 < len(tokens) and not hasattr(tokens[i], "value"):
                lo, hi, dst = tokens[i], tokens[i + 1], tokens[i + 2]
                if isinstance(lo, bytes) and isinstance(hi, bytes):
                    lo_i = int.from_bytes(lo, "big")
                    hi_i = int.from_bytes(hi, "big")
                    if isinstance(dst, list):
                        for k, d in enumerate(dst):
                            if isinstance(d, bytes):
                                out[lo_i + k] = utf16(d)
                    elif isinstance(dst, bytes):
                        base = int.from_bytes(dst, "big") if len(dst) <= 2 else None
                        for k in range(hi_i - lo_i + 1):
                            if base is not None:
                                out[lo_i + k] = chr(base + k)
                            else:
                                text = utf16(dst)
                                if text:
                                    out[lo_i + k] = text[:-1] + chr(ord(text[-1]) + k)
                i += 3
        i += 1
    return out


class LoadedFont:
    """Decoder for one font resource."""

    def __init__(self, doc: PdfDocument, font_dict: dict):
        r = doc.resolve
        self.subtype = str(r(font_dict.get("Subtype", "")))
        self.base_font = str(r(font_dict.get("BaseFont", "Helvetica")))
        self.is_cid = self.subtype == "Type0"
        self.to_unicode: dict[int, str] = {}
        tu = r(font_dict.get("ToUnicode"))
        if isinstance(tu, Stream):
            try:
                self.to_unicode = _parse_tounicode(doc.stream_data(tu))
            except Exception:
                logger.debug("unparseable ToUnicode CMap in %s", self.base_font)

        if self.is_cid:
            self._init_cid(doc, font_dict)
        else:
            self._init_simple(doc, font_dict)

    # --- simple (one-byte) fonts ---------------------------------------------

    def _init_simple(self, doc: PdfDocument, font_dict: dict) -> None:
        r = doc.resolve
        self.first_char = int(r(font_dict.get("FirstChar", 0)) or 0)
        widths = r(font_dict.get("Widths"))
        self.widths = [float(r(w) or 0) for w in widths] if widths else None
        desc = r(font_dict.get("FontDescriptor")) or {}
        self.missing_width = float(r(desc.get("MissingWidth", 0)) or 0)
        self.ascent = float(r(desc.get("Ascent", 0)) or 0) or 750.0
        self.descent = float(r(desc.get("Descent", 0)) or 0) or -220.0
        # Type3 fonts express widths in their own glyph space
        self.font_matrix = None
        if self.subtype == "Type3":
            fm = r(font_dict.get("FontMatrix"))
            if fm:
                self.font_matrix = [float(r(v)) for v in fm]

        encoding = r(font_dict.get("Encoding"))
        base_codec = "cp1252"
        differences: dict[int, str] = {}
        if isinstance(encoding, Name):
            if str(encoding) == "MacRomanEncoding":
                base_codec = "mac_roman"
        elif isinstance(encoding, dict):
            base = r(encoding.get("BaseEncoding"))
            if base is not None and str(base) == "MacRomanEncoding":
                base_codec = "mac_roman"
            diffs = r(encoding.get("Differences")) or []
            code = 0
            for item in diffs:
                item = r(item)
                if isinstance(item, (int, float)):
                    code = int(item)
                elif isinstance(item, Name):
                    differences[code] = _glyph_to_unicode(str(item))
                    code += 1
        self._codec = base_codec
        self._differences = differences

    # --- composite (Type0) fonts ----------------------------------------------

    def _init_cid(self, doc: PdfDocument, font_dict: dict) -> None:
        r = doc.resolve
        desc_fonts = r(font_dict.get("DescendantFonts")) or []
        desc = r(desc_fonts[0]) if desc_fonts else {}
        self.default_width = float(r(desc.get("DW", 1000)) or 1000)
        self.cid_widths: dict[int, float] = {}
        w = r(desc.get("W")) or []
        i = 0
        w = [r(x) for x in w]
        while i < len(w):
            first = int(w[i])
            nxt = r(w[i + 1]) if i + 1 < len(w) else None
            if isinstance(nxt, list):
                for k, width in enumerate(nxt):
                    self.cid_widths[first + k] = float(r(width))
                i += 2
            elif nxt is not None and i + 2 < len(w):
                last = int(nxt)
                width = float(r(w[i + 2]))
                for cid in range(first, last + 1):
                    self.cid_widths[cid] = width
                i += 3
            else:
                break
        fdesc = r(desc.get("FontDescriptor")) or {}
        self.ascent = float(r(fdesc.get("Ascent", 0)) or 0) or 750.0
        self.descent = float(r(fdesc.get("Descent", 0)) or 0) or -220.0
        # CIDToGIDMap/Identity assumed; codes are big-endian 2-byte
        self.font_matrix = None

    # --- decoding ----------------------------------------------------------------

    def decode(self, raw: bytes) -> list[Glyph]:
        if self.is_cid:
            return self._decode_cid(raw)
        return self._decode_simple(raw)

    def _decode_simple(self, raw: bytes) -> list[Glyph]:
        glyphs = []
        for code in raw:
            text = self.to_unicode.get(code)
            if text is None:
                text = self._differences.get(code)
            if not text:
                try:
                    text = bytes([code]).decode(self._codec)
                except (UnicodeDecodeError, ValueError):
                    text = ""
            if self.widths is not None and 0 <= code - self.first_char < len(self.widths):
                width = self.widths[code - self.first_char]
                if width == 0 and self.missing_width:
                    width = self.missing_width
            elif self.missing_width:
                width = self.missing_width
            else:
                width = _std14_width(self.base_font, text or " ")
            if self.font_matrix:
                width = width * self.font_matrix[0] * 1000.0
            glyphs.append(Glyph(code, text, width, code == 0x20))
        return glyphs

    def _decode_cid(self, raw: bytes) -> list[Glyph]:
        glyphs = []
        for i in range(0, len(raw) - len(raw) % 2, 2):
            code = (raw[i] << 8) | raw[i + 1]
            text = self.to_unicode.get(code, "")
            width = self.cid_widths.get(code, self.default_width)
            glyphs.append(Glyph(code, text, width, False))
        return glyphs
