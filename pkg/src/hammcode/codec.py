"""Fixed-length binary encoding of alphanumeric identifier codes.

A normalized code is an uppercase string over a 39-symbol alphabet:
the letters A-Z, the digits 0-9, and the punctuation marks ``-``, ``/``,
``.``. Each symbol maps to a 6-bit value:

    'A'..'Z' -> 0..25
    '0'..'9' -> 26..35
    '-' -> 36, '/' -> 37, '.' -> 38
    padding  -> 63 (never assigned to a symbol)

A code is packed into a 120-bit key of 20 six-bit slots. Slot ``i``
occupies bits ``[6*i, 6*i + 6)`` of the key, low bit first, so the first
characters live in the low 64-bit word. Codes shorter than 20 characters
are padded with 63; longer codes are truncated at 20. Keys are stored in
128 bits (two little-endian 64-bit words); bits 120-127 are always zero.

This packing is a wire-format contract: snapshot files persist keys
byte-for-byte in this layout (see ``hammcode.index``).
"""

from __future__ import annotations

# A packed 120-bit key, held in a Python int (0 <= key < 2**120).
BinaryCode = int

BITS_PER_CHAR = 6
MAX_CODE_LEN = 20
KEY_BITS = BITS_PER_CHAR * MAX_CODE_LEN
KEY_BYTES = 16
PAD_VALUE = 63

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
DIGITS = "0123456789"
PUNCTUATION = "-/."
SYMBOLS = LETTERS + DIGITS + PUNCTUATION

CHAR_TO_VALUE = {ch: i for i, ch in enumerate(SYMBOLS)}
VALUE_TO_CHAR = {i: ch for i, ch in enumerate(SYMBOLS)}

_SLOT_MASK = (1 << BITS_PER_CHAR) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


class CodecError(ValueError):
    """Base class for encoding and normalization failures."""


class EmptyCodeError(CodecError):
    """Raised when normalization leaves no charset characters."""


class MalformedCodeError(CodecError):
    """Raised when a key does not decode to a valid code."""


def normalize(raw: str) -> str:
    """Reduce arbitrary text to a normalized code.

    Uppercases, then drops every character outside the 39-symbol
    alphabet (whitespace included: "WH 1000XM4" and "WH1000XM4"
    normalize identically). Raises EmptyCodeError if nothing survives.
    """
    kept = [ch for ch in raw.upper() if ch in CHAR_TO_VALUE]
    if not kept:
        raise EmptyCodeError(f"no charset characters in {raw!r}")
    return "".join(kept)


def encode_char(ch: str) -> int:
    """6-bit value of a single charset symbol."""
    return CHAR_TO_VALUE[ch]


def encode(code: str) -> BinaryCode:
    """Pack a normalized code into its 120-bit key.

    Characters beyond position 20 are discarded; unused slots hold the
    pad value. The input must be normalized and non-empty.
    """
    if not code:
        raise EmptyCodeError("cannot encode an empty code")
    key = 0
    for i in range(MAX_CODE_LEN):
        value = CHAR_TO_VALUE[code[i]] if i < len(code) else PAD_VALUE
        key |= value << (BITS_PER_CHAR * i)
    return key


def decode(key: BinaryCode) -> str:
    """Recover the code from a key; inverse of encode for lengths 1-20.

    Rejects keys with bits set above 119, slot values that map to no
    symbol, padding before a non-pad slot, and the all-pad key.
    """
    if key < 0 or key >> KEY_BITS:
        raise MalformedCodeError("key has bits outside the 120-bit range")
    chars = []
    in_padding = False
    for i in range(MAX_CODE_LEN):
        value = (key >> (BITS_PER_CHAR * i)) & _SLOT_MASK
        if value == PAD_VALUE:
            in_padding = True
            continue
        if in_padding:
            raise MalformedCodeError(f"non-suffix padding at slot {i}")
        ch = VALUE_TO_CHAR.get(value)
        if ch is None:
            raise MalformedCodeError(f"unmapped slot value {value} at slot {i}")
        chars.append(ch)
    if not chars:
        raise MalformedCodeError("all-pad key decodes to an empty code")
    return "".join(chars)


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    """Number of differing bit positions between two keys."""
    return (a ^ b).bit_count()


def charset_hash() -> int:
    """FNV-1a hash of the symbol table, used to fingerprint snapshots.

    Hashes the 6-bit value of each symbol in alphabet order, then the
    pad value, one byte per entry.
    """
    h = _FNV_OFFSET
    for ch in SYMBOLS:
        h = ((h ^ CHAR_TO_VALUE[ch]) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    h = ((h ^ PAD_VALUE) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h
