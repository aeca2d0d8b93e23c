"""Synthetic document corpus with a planted shared source.

Every document is a sequence of 1000-character blocks drawn from a common
pool (the "source") and private random blocks. Symbols come from a
lowercase-stable alphabet of about 100 characters, so 3-shingles of distinct
blocks rarely coincide by chance.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

ALPHABET = (
    "abcdefghijklmnopqrstuvwxyz0123456789"
    + "".join(chr(c) for c in range(0x3B1, 0x3CA))  # greek lowercase
    + "".join(chr(c) for c in range(0x430, 0x450))  # cyrillic lowercase
    + ".,;:!?-'"
)

BLOCK = 1000

DOC_BLOCKS = 50

# shared source blocks per document pair; no block is shared by three documents
PAIR_OVERLAPS = {(0, 1): 23, (2, 3): 23, (0, 2): 12, (1, 3): 12, (0, 3): 6, (1, 2): 6}


def pairwise_layout(overlaps=PAIR_OVERLAPS, n_docs: int = 4, doc_blocks: int = DOC_BLOCKS):
    """Layout (source block ids, private block count) per document from pair overlaps."""
    ids, nxt = {}, 0
    for pair, count in overlaps.items():
        ids[pair] = range(nxt, nxt + count)
        nxt += count
    layout = []
    for d in range(n_docs):
        blocks = tuple(sorted(b for pair, r in ids.items() if d in pair for b in r))
        if len(blocks) > doc_blocks:
            raise ValueError(f"document {d} needs {len(blocks)} shared blocks > {doc_blocks}")
        layout.append((blocks, doc_blocks - len(blocks)))
    return tuple(layout)


DEFAULT_LAYOUT = pairwise_layout()


def _random_block(rng: np.random.Generator, length: int = BLOCK) -> str:
    idx = rng.integers(0, len(ALPHABET), size=length)
    return "".join(ALPHABET[i] for i in idx)


def make_corpus(seed: int = 2024, layout: Sequence = DEFAULT_LAYOUT) -> list[str]:
    rng = np.random.default_rng(seed)
    n_shared = 1 + max((b for blocks, _ in layout for b in blocks), default=-1)
    source = [_random_block(rng) for _ in range(n_shared)]
    docs = []
    for blocks, n_private in layout:
        parts = [source[b] for b in blocks] + [_random_block(rng) for _ in range(n_private)]
        order = rng.permutation(len(parts))
        docs.append("".join(parts[i] for i in order))
    return docs


def write_corpus(directory, seed: int = 2024, layout: Sequence = DEFAULT_LAYOUT) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, text in enumerate(make_corpus(seed, layout)):
        path = directory / f"doc{i + 1}.txt"
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths
