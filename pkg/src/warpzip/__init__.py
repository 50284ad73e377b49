"""Block-parallel LZ77 codec whose decompressor runs on a simulated 32-lane warp."""

__version__ = "0.1.0"

from .core import (BackRef, Block, Literal, Mode, Params, Sequence, Strategy,  # noqa: E402
                   sequences_to_bytes)
from .compress import compress_bytes  # noqa: E402
from .decomp import decompress_bytes, decompress_file  # noqa: E402

__all__ = [
    "BackRef", "Block", "Literal", "Mode", "Params", "Sequence", "Strategy",
    "sequences_to_bytes", "compress_bytes", "decompress_bytes", "decompress_file",
]
