"""Self-contained dictionary compressors used as entropy-rate estimators.

Two reversible coders over an alphabet {0..N-1} share one stream format:

* ``lz78``  - incremental parsing.  Phrase k extends a previous phrase by one
  symbol and is emitted as the parent index in ceil(log2 k) bits (0 bits for
  the first phrase) followed by the extension symbol in ceil(log2 N) bits.
  A final partial phrase is emitted as a bare parent index; the decoder
  recognizes it because the header carries the symbol count.

* ``castore`` - pair concatenation.  The dictionary is seeded with the N
  single symbols; each step greedily matches the longest dictionary word u,
  then the longest dictionary word v of the remainder, emits the two indices
  and adds u+v as a new word.  Index fields are ceil(log2(D+1)) bits for the
  current dictionary size D; index 0 is reserved to mark a final phrase with
  no second component.

Stream layout: 16-byte little-endian header (magic ``EPSC``, version byte,
alphabet size as u16, symbol count as u64, algorithm id byte, reserved = 0),
then the phrase records, then zero padding to a byte boundary.  Reported
``encoded_bits`` include the header.  These are estimators, not archivers:
there is no entropy-coding stage, by design.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .partition import SymbolicSequence

MAGIC = b"EPSC"
VERSION = 1
HEADER_BYTES = 16
HEADER_BITS = HEADER_BYTES * 8
_ALGO_IDS = {"lz78": 0, "castore": 1}
_ALGO_NAMES = {v: k for k, v in _ALGO_IDS.items()}

NODE_CAP = 10**8


class DecodeError(ValueError):
    """Malformed or truncated compressed stream."""


class DictionaryLimitError(RuntimeError):
    """Dictionary grew past the configured node cap."""


@dataclass(frozen=True)
class CompressionReport:
    """Summary of one encode: sizes, rate and a round-trip content hash."""

    input_len: int
    phrase_count: int
    encoded_bits: int
    rate: float
    algorithm: str
    content_hash: str


def content_hash(symbols: np.ndarray) -> str:
    """Order-sensitive hash of a symbol sequence, for round-trip checks."""
    data = np.ascontiguousarray(symbols, dtype="<u4").tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def _bit_width(k: int) -> int:
    """Bits needed to address values 0..k-1 (0 when k == 1)."""
    return (k - 1).bit_length()


class BitWriter:
    """Accumulates big-endian-within-byte bit fields."""

    def __init__(self) -> None:
        self._out = bytearray()
        self._acc = 0
        self._nbits = 0
        self.bits_written = 0

    def write(self, value: int, nbits: int) -> None:
        if nbits == 0:
            return
        if value >> nbits:
            raise ValueError(f"value {value} does not fit in {nbits} bits")
        self._acc = (self._acc << nbits) | value
        self._nbits += nbits
        self.bits_written += nbits
        while self._nbits >= 8:
            self._nbits -= 8
            self._out.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def getvalue(self) -> bytes:
        out = bytes(self._out)
        if self._nbits:
            out += bytes([(self._acc << (8 - self._nbits)) & 0xFF])
        return out


class BitReader:
    """Reads back what :class:`BitWriter` wrote; errors carry byte offsets."""

    def __init__(self, data: bytes, start_byte: int = 0) -> None:
        self._data = data
        self._pos = start_byte * 8

    def read(self, nbits: int) -> int:
        if nbits == 0:
            return 0
        end = self._pos + nbits
        if end > len(self._data) * 8:
            raise DecodeError(f"stream truncated at byte {self._pos // 8}")
        value = 0
        pos = self._pos
        while nbits:
            byte = self._data[pos >> 3]
            avail = 8 - (pos & 7)
            take = min(avail, nbits)
            shift = avail - take
            value = (value << take) | ((byte >> shift) & ((1 << take) - 1))
            pos += take
            nbits -= take
        self._pos = pos
        return value

    def padding_is_clean(self) -> bool:
        """True iff only zero bits remain in the current final byte."""
        total = len(self._data) * 8
        if total - self._pos >= 8:
            return False
        rest = 0
        pos = self._pos
        while pos < total:
            rest |= (self._data[pos >> 3] >> (7 - (pos & 7))) & 1
            pos += 1
        return rest == 0


def _pack_header(alphabet_size: int, input_len: int, algorithm: str) -> bytes:
    return struct.pack(
        "<4sBHQB", MAGIC, VERSION, alphabet_size, input_len, _ALGO_IDS[algorithm]
    )


def _unpack_header(data: bytes) -> tuple[int, int, str]:
    if len(data) < HEADER_BYTES:
        raise DecodeError(f"stream shorter than the {HEADER_BYTES}-byte header")
    magic, version, alphabet_size, input_len, algo_id = struct.unpack(
        "<4sBHQB", data[:HEADER_BYTES]
    )
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r} at byte 0")
    if version != VERSION:
        raise DecodeError(f"unsupported version {version} at byte 4")
    if alphabet_size < 2:
        raise DecodeError(f"alphabet size {alphabet_size} invalid at byte 5")
    if algo_id not in _ALGO_NAMES:
        raise DecodeError(f"unknown algorithm id {algo_id} at byte 15")
    return alphabet_size, input_len, _ALGO_NAMES[algo_id]


def _as_symbols(seq: SymbolicSequence | Sequence[int] | np.ndarray, alphabet_size: int | None) -> tuple[np.ndarray, int]:
    if isinstance(seq, SymbolicSequence):
        return seq.symbols, seq.alphabet_size
    symbols = np.asarray(seq, dtype=np.int32)
    if alphabet_size is None:
        alphabet_size = int(symbols.max()) + 1 if symbols.size else 2
    alphabet_size = max(alphabet_size, 2)
    if symbols.size and (int(symbols.min()) < 0 or int(symbols.max()) >= alphabet_size):
        raise ValueError("symbols outside alphabet range")
    return symbols, alphabet_size


def lz78_encode(
    seq: SymbolicSequence | Sequence[int] | np.ndarray,
    alphabet_size: int | None = None,
    node_cap: int = NODE_CAP,
) -> tuple[bytes, CompressionReport]:
    """Incremental-parse encode; returns the bitstream and its report."""
    symbols, nsym = _as_symbols(seq, alphabet_size)
    sym_bits = max(1, _bit_width(nsym))
    writer = BitWriter()

    trie: dict[tuple[int, int], int] = {}
    node = 0
    next_phrase = 1
    for s in symbols.tolist():
        child = trie.get((node, s))
        if child is not None:
            node = child
            continue
        writer.write(node, _bit_width(next_phrase))
        writer.write(s, sym_bits)
        if next_phrase > node_cap:
            raise DictionaryLimitError(f"dictionary exceeded {node_cap} nodes")
        trie[(node, s)] = next_phrase
        next_phrase += 1
        node = 0
    phrase_count = next_phrase - 1
    if node != 0:
        writer.write(node, _bit_width(next_phrase))
        phrase_count += 1

    stream = _pack_header(nsym, symbols.size, "lz78") + writer.getvalue()
    encoded_bits = HEADER_BITS + writer.bits_written
    rate = encoded_bits / symbols.size if symbols.size else 0.0
    report = CompressionReport(
        input_len=int(symbols.size),
        phrase_count=phrase_count,
        encoded_bits=encoded_bits,
        rate=rate,
        algorithm="lz78",
        content_hash=content_hash(symbols),
    )
    return stream, report


def _lz78_decode_body(reader: BitReader, alphabet_size: int, input_len: int) -> np.ndarray:
    sym_bits = max(1, _bit_width(alphabet_size))
    out = np.empty(input_len, dtype=np.int32)
    parents = [0]
    extensions = [0]
    lengths = [0]

    def emit(phrase: int, at: int) -> int:
        chain = []
        while phrase:
            chain.append(extensions[phrase])
            phrase = parents[phrase]
        out[at : at + len(chain)] = chain[::-1]
        return len(chain)

    decoded = 0
    k = 1
    while decoded < input_len:
        parent = reader.read(_bit_width(k))
        if parent >= k:
            raise DecodeError(f"phrase {k} references unknown parent {parent}")
        if decoded + lengths[parent] >= input_len:
            if decoded + lengths[parent] > input_len:
                raise DecodeError(f"final phrase overruns declared length {input_len}")
            emit(parent, decoded)
            decoded = input_len
            break
        s = reader.read(sym_bits)
        if s >= alphabet_size:
            raise DecodeError(f"symbol {s} outside alphabet of {alphabet_size}")
        n = emit(parent, decoded)
        out[decoded + n] = s
        decoded += n + 1
        parents.append(parent)
        extensions.append(s)
        lengths.append(lengths[parent] + 1)
        k += 1
    return out


def _castore_match(
    trie: dict[tuple[int, int], int],
    node_word: dict[int, int],
    symbols: list[int],
    pos: int,
) -> tuple[int, int]:
    """Longest dictionary word prefixing symbols[pos:]; returns (index, length)."""
    node = 0
    best_word = 0
    best_len = 0
    depth = 0
    n = len(symbols)
    while pos + depth < n:
        node = trie.get((node, symbols[pos + depth]))
        if node is None:
            break
        depth += 1
        word = node_word.get(node)
        if word is not None:
            best_word = word
            best_len = depth
    return best_word, best_len


def castore_encode(
    seq: SymbolicSequence | Sequence[int] | np.ndarray,
    alphabet_size: int | None = None,
    node_cap: int = NODE_CAP,
) -> tuple[bytes, CompressionReport]:
    """Pair-concatenation encode; returns the bitstream and its report."""
    symbols, nsym = _as_symbols(seq, alphabet_size)
    writer = BitWriter()
    syms = symbols.tolist()

    trie: dict[tuple[int, int], int] = {}
    node_word: dict[int, int] = {}
    next_node = 1
    for s in range(nsym):
        trie[(0, s)] = next_node
        node_word[next_node] = s + 1
        next_node += 1

    dict_size = nsym
    phrase_count = 0
    pos = 0
    n = len(syms)
    while pos < n:
        width = _bit_width(dict_size + 1)
        u, lu = _castore_match(trie, node_word, syms, pos)
        phrase_count += 1
        if pos + lu == n:
            writer.write(u, width)
            writer.write(0, width)
            pos = n
            break
        v, lv = _castore_match(trie, node_word, syms, pos + lu)
        writer.write(u, width)
        writer.write(v, width)
        # insert u+v into the trie
        node = 0
        for j in range(pos, pos + lu + lv):
            key = (node, syms[j])
            child = trie.get(key)
            if child is None:
                if next_node > node_cap:
                    raise DictionaryLimitError(f"dictionary exceeded {node_cap} nodes")
                trie[key] = next_node
                child = next_node
                next_node += 1
            node = child
        dict_size += 1
        node_word[node] = dict_size
        pos += lu + lv

    stream = _pack_header(nsym, symbols.size, "castore") + writer.getvalue()
    encoded_bits = HEADER_BITS + writer.bits_written
    rate = encoded_bits / symbols.size if symbols.size else 0.0
    report = CompressionReport(
        input_len=int(symbols.size),
        phrase_count=phrase_count,
        encoded_bits=encoded_bits,
        rate=rate,
        algorithm="castore",
        content_hash=content_hash(symbols),
    )
    return stream, report


def _castore_decode_body(reader: BitReader, alphabet_size: int, input_len: int) -> np.ndarray:
    out = np.empty(input_len, dtype=np.int32)
    # word id -> (left id, right id) with single symbols as (-(s+1), 0)
    pairs: list[tuple[int, int]] = [(0, 0)]
    lengths = [0]
    for s in range(alphabet_size):
        pairs.append((-(s + 1), 0))
        lengths.append(1)
    dict_size = alphabet_size

    def emit(word: int, at: int) -> int:
        stack = [word]
        pos = at
        while stack:
            w = stack.pop()
            left, right = pairs[w]
            if left < 0:
                out[pos] = -left - 1
                pos += 1
            else:
                if right:
                    stack.append(right)
                stack.append(left)
        return pos - at

    decoded = 0
    while decoded < input_len:
        width = _bit_width(dict_size + 1)
        u = reader.read(width)
        if not 1 <= u <= dict_size:
            raise DecodeError(f"word index {u} outside dictionary of {dict_size}")
        v = reader.read(width)
        if v == 0:
            if decoded + lengths[u] != input_len:
                raise DecodeError("final phrase does not close the declared length")
            emit(u, decoded)
            decoded = input_len
            break
        if v > dict_size:
            raise DecodeError(f"word index {v} outside dictionary of {dict_size}")
        if decoded + lengths[u] + lengths[v] > input_len:
            raise DecodeError(f"phrase overruns declared length {input_len}")
        n = emit(u, decoded)
        n += emit(v, decoded + n)
        decoded += n
        pairs.append((u, v))
        lengths.append(lengths[u] + lengths[v])
        dict_size += 1
    return out


def decode(stream: bytes) -> tuple[SymbolicSequence, str]:
    """Decode either algorithm's stream; returns (sequence, algorithm name)."""
    alphabet_size, input_len, algorithm = _unpack_header(stream)
    reader = BitReader(stream, start_byte=HEADER_BYTES)
    if algorithm == "lz78":
        symbols = _lz78_decode_body(reader, alphabet_size, input_len)
    else:
        symbols = _castore_decode_body(reader, alphabet_size, input_len)
    if not reader.padding_is_clean():
        raise DecodeError("trailing data after final phrase")
    return SymbolicSequence(symbols=symbols, alphabet_size=alphabet_size), algorithm


def lz78_decode(stream: bytes) -> SymbolicSequence:
    seq, algorithm = decode(stream)
    if algorithm != "lz78":
        raise DecodeError(f"stream was encoded with {algorithm}, not lz78")
    return seq


def castore_decode(stream: bytes) -> SymbolicSequence:
    seq, algorithm = decode(stream)
    if algorithm != "castore":
        raise DecodeError(f"stream was encoded with {algorithm}, not castore")
    return seq


@dataclass(frozen=True)
class ComplexityRate:
    """Compression rate of a sequence plus its prefix-convergence curve."""

    rate: float
    report: CompressionReport
    prefix_rates: tuple[tuple[int, float], ...]


def complexity_rate(
    seq: SymbolicSequence | Sequence[int] | np.ndarray,
    algorithm: str = "lz78",
    alphabet_size: int | None = None,
    curve_points: int = 12,
) -> ComplexityRate:
    """Bits per symbol under the chosen coder, with log-spaced prefix rates."""
    symbols, nsym = _as_symbols(seq, alphabet_size)
    if symbols.size == 0:
        raise ValueError("cannot rate an empty sequence")
    encoder = lz78_encode if algorithm == "lz78" else castore_encode
    if algorithm not in _ALGO_IDS:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    _, full = encoder(symbols, nsym)
    lengths = sorted(
        {
            max(1, int(round(symbols.size ** (i / (curve_points - 1)))))
            for i in range(curve_points)
        }
        if curve_points > 1
        else {symbols.size}
    )
    curve = []
    for ln in lengths:
        if ln == symbols.size:
            curve.append((ln, full.rate))
        else:
            _, rep = encoder(symbols[:ln], nsym)
            curve.append((ln, rep.rate))
    return ComplexityRate(rate=full.rate, report=full, prefix_rates=tuple(curve))
