"""Container file layout.

All integers are little-endian.

File header (36 bytes)::

    magic         4s   b"WZIP"
    version       u8   1
    mode          u8   0 byte codec, 1 bit codec
    flags         u8   bit 0: dependency elimination
    cwl_max       u8
    block_size    u32
    window_size   u32
    sub_block_seqs u16
    reserved      u16  0
    total_len     u64  uncompressed bytes
    block_count   u32
    crc32         u32  of the uncompressed data

Each block::

    compressed_len   u32  payload bytes
    uncompressed_len u32
    seq_count        u32
    sub_block_count  u32  0 in byte mode
    sub_block_bits   u32 x sub_block_count
    (bit mode) litlen code lengths, dist code lengths, each as
        alphabet_size u16, pair_count u16, pairs of (run - 1 u8, length u8)
    payload          compressed_len bytes
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator, List, Optional, Tuple, Union

import numpy as np

from .core import MAX_BLOCK_SIZE, MAX_WINDOW, Mode, Params
from .entropy import DIST_SYMBOLS, LITLEN_SYMBOLS
from .errors import BadMagic, HeaderInconsistent, Truncated, UnsupportedVersion
from .huffman import is_complete

MAGIC = b"WZIP"
VERSION = 1
FLAG_DE = 1

_FILE_HDR = struct.Struct("<4sBBBBIIHHQII")
_BLOCK_HDR = struct.Struct("<IIII")
_U16 = struct.Struct("<HH")
FILE_HEADER_SIZE = _FILE_HDR.size


@dataclass
class FileHeader:
    mode: Mode
    de_enabled: bool
    cwl_max: int
    block_size: int
    window_size: int
    sub_block_seqs: int
    total_len: int
    block_count: int
    crc32: int = 0
    version: int = VERSION
    magic: bytes = MAGIC

    @classmethod
    def for_params(cls, params: Params, total_len: int, crc32: int = 0) -> "FileHeader":
        return cls(params.mode, params.de_enabled, params.cwl_max, params.block_size,
                   params.window_size, params.sub_block_seqs, total_len,
                   -(-total_len // params.block_size), crc32)

    def pack(self) -> bytes:
        return _FILE_HDR.pack(self.magic, self.version, int(self.mode),
                              FLAG_DE if self.de_enabled else 0, self.cwl_max,
                              self.block_size, self.window_size, self.sub_block_seqs, 0,
                              self.total_len, self.block_count, self.crc32)

    def block_len(self, index: int) -> int:
        """Uncompressed length of block ``index`` implied by the header."""
        return min(self.block_size, self.total_len - index * self.block_size)

    def to_dict(self) -> dict:
        return {
            "magic": self.magic.decode("latin-1"),
            "version": self.version,
            "mode": Mode(self.mode).name.lower(),
            "de_enabled": self.de_enabled,
            "cwl_max": self.cwl_max,
            "block_size": self.block_size,
            "window_size": self.window_size,
            "sub_block_seqs": self.sub_block_seqs,
            "total_len": self.total_len,
            "block_count": self.block_count,
            "crc32": self.crc32,
        }


@dataclass(eq=False)
class BlockHeader:
    compressed_len: int
    uncompressed_len: int
    seq_count: int
    sub_block_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    litlen_lengths: Optional[np.ndarray] = None
    dist_lengths: Optional[np.ndarray] = None

    @property
    def sub_block_count(self) -> int:
        return len(self.sub_block_bits)

    def pack(self) -> bytes:
        parts = [_BLOCK_HDR.pack(self.compressed_len, self.uncompressed_len, self.seq_count,
                                 self.sub_block_count)]
        parts.append(np.asarray(self.sub_block_bits, dtype="<u4").tobytes())
        if self.litlen_lengths is not None:
            parts.append(pack_lengths(self.litlen_lengths))
            parts.append(pack_lengths(self.dist_lengths))
        return b"".join(parts)

    def to_dict(self) -> dict:
        d = {
            "compressed_len": self.compressed_len,
            "uncompressed_len": self.uncompressed_len,
            "seq_count": self.seq_count,
            "sub_block_count": self.sub_block_count,
            "sub_block_bits": [int(x) for x in self.sub_block_bits],
        }
        if self.litlen_lengths is not None:
            d["litlen_lengths"] = [int(x) for x in self.litlen_lengths]
            d["dist_lengths"] = [int(x) for x in self.dist_lengths]
        return d

    def __eq__(self, other):
        if not isinstance(other, BlockHeader):
            return NotImplemented
        return self.pack() == other.pack()


EncodedBlock = Tuple[BlockHeader, bytes]


def pack_lengths(lengths) -> bytes:
    lengths = [int(x) for x in lengths]
    pairs = []
    i = 0
    while i < len(lengths):
        j = i
        while j < len(lengths) and lengths[j] == lengths[i] and j - i < 256:
            j += 1
        pairs.append((j - i - 1, lengths[i]))
        i = j
    return _U16.pack(len(lengths), len(pairs)) + bytes(b for p in pairs for b in p)


def write_file(header: FileHeader, blocks, sink: BinaryIO) -> int:
    """Serialise a header and its (BlockHeader, payload) records. Returns bytes written."""
    written = sink.write(header.pack())
    count = 0
    for bh, payload in blocks:
        written += sink.write(bh.pack())
        written += sink.write(payload)
        count += 1
    if count != header.block_count:
        raise ValueError(f"header declares {header.block_count} blocks, got {count}")
    return written


class _Reader:
    def __init__(self, source: BinaryIO):
        self.source = source
        self.offset = 0

    def read(self, n: int, what: str, block: Optional[int] = None) -> bytes:
        data = self.source.read(n)
        if len(data) != n:
            raise Truncated(f"stream ends inside {what} at offset {self.offset + len(data)}",
                            field=what, block=block)
        self.offset += n
        return data


def _parse_file_header(raw: bytes) -> FileHeader:
    (magic, version, mode, flags, cwl, block_size, window, sub_seqs, reserved, total_len,
     block_count, crc) = _FILE_HDR.unpack(raw)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}", field="magic")
    if version != VERSION:
        raise UnsupportedVersion(f"unsupported version {version}", field="version")

    def bad(fld, msg):
        raise HeaderInconsistent(f"{fld}: {msg}", field=fld)

    if mode not in (0, 1):
        bad("mode", f"unknown mode {mode}")
    if flags & ~FLAG_DE:
        bad("flags", f"unknown flag bits {flags:#x}")
    if not 1 <= cwl <= 15:
        bad("cwl_max", f"{cwl} outside [1, 15]")
    if not 1 <= window <= MAX_WINDOW:
        bad("window_size", f"{window} outside [1, {MAX_WINDOW}]")
    if not 1 <= block_size <= MAX_BLOCK_SIZE:
        bad("block_size", f"{block_size} outside [1, {MAX_BLOCK_SIZE}]")
    if sub_seqs < 1:
        bad("sub_block_seqs", "must be positive")
    if reserved != 0:
        bad("reserved", "must be zero")
    if block_count != -(-total_len // block_size):
        bad("block_count", f"{block_count} blocks cannot hold {total_len} bytes")
    return FileHeader(Mode(mode), bool(flags & FLAG_DE), cwl, block_size, window, sub_seqs,
                      total_len, block_count, crc, version, magic)


def _parse_lengths(reader: _Reader, expected: int, cwl: int, what: str, block: int):
    size, npairs = _U16.unpack(reader.read(4, what, block))
    if size != expected:
        raise HeaderInconsistent(f"{what}: alphabet size {size}, expected {expected}",
                                 field=what, block=block)
    raw = np.frombuffer(reader.read(2 * npairs, what, block), dtype=np.uint8)
    runs = raw[0::2].astype(np.int64) + 1
    values = raw[1::2]
    if int(runs.sum()) != size:
        raise HeaderInconsistent(f"{what}: runs cover {int(runs.sum())} of {size} symbols",
                                 field=what, block=block)
    lengths = np.repeat(values, runs).astype(np.int32)
    if not is_complete(lengths, cwl):
        raise HeaderInconsistent(f"{what}: not a complete code within {cwl} bits",
                                 field=what, block=block)
    return lengths


def _read_block(reader: _Reader, fh: FileHeader, index: int) -> EncodedBlock:
    raw = reader.read(_BLOCK_HDR.size, "block header", index)
    comp_len, uncomp_len, seq_count, nsub = _BLOCK_HDR.unpack(raw)

    def bad(fld, msg):
        raise HeaderInconsistent(f"{fld}: {msg}", field=fld, block=index)

    if uncomp_len != fh.block_len(index):
        bad("uncompressed_len", f"{uncomp_len}, expected {fh.block_len(index)}")
    if not 1 <= seq_count <= uncomp_len // 4 + 1:
        bad("seq_count", f"{seq_count} impossible for {uncomp_len} bytes")
    if comp_len > 2 * uncomp_len + 64:
        bad("compressed_len", f"{comp_len} exceeds the bound for {uncomp_len} bytes")
    bit_mode = fh.mode == Mode.BIT
    want_sub = -(-seq_count // fh.sub_block_seqs) if bit_mode else 0
    if nsub != want_sub:
        bad("sub_block_count", f"{nsub}, expected {want_sub}")
    sizes = np.frombuffer(reader.read(4 * nsub, "sub_block_bits", index),
                          dtype="<u4").astype(np.int64)
    ll = dl = None
    if bit_mode:
        total = int(sizes.sum())
        if not total <= 8 * comp_len < total + 8:
            bad("sub_block_bits", f"{total} bits do not fill a {comp_len}-byte payload")
        ll = _parse_lengths(reader, LITLEN_SYMBOLS, fh.cwl_max, "litlen_lengths", index)
        dl = _parse_lengths(reader, DIST_SYMBOLS, fh.cwl_max, "dist_lengths", index)
    payload = reader.read(comp_len, "payload", index)
    return BlockHeader(comp_len, uncomp_len, seq_count, sizes, ll, dl), payload


def read_file(source: Union[BinaryIO, bytes]) -> Tuple[FileHeader, Iterator[EncodedBlock]]:
    """Parse the file header eagerly; blocks are parsed lazily as iterated."""
    if isinstance(source, (bytes, bytearray, memoryview)):
        source = io.BytesIO(source)
    reader = _Reader(source)
    fh = _parse_file_header(reader.read(FILE_HEADER_SIZE, "file header"))

    def blocks():
        for i in range(fh.block_count):
            yield _read_block(reader, fh, i)
        if source.read(1):
            raise HeaderInconsistent("trailing bytes after the last block", field="block_count")

    return fh, blocks()


def read_all(source) -> Tuple[FileHeader, List[EncodedBlock]]:
    fh, it = read_file(source)
    return fh, list(it)
