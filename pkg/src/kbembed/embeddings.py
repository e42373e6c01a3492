"""Dense embedding matrices and their on-disk text/binary formats.

The text format follows the de-facto convention: a `<vocab> <dim>` header
line, then one line per word with space-separated decimal floats. Values
round-trip exactly at 32-bit float precision. Words containing spaces are
written with underscores and a sidecar mapping restores the originals.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kbembed.vocab import Vocabulary

_BINARY_MAGIC = b"KBEMB1\n"


class EmbeddingFormatError(ValueError):
    """Malformed embedding file."""


@dataclass
class EmbeddingMatrix:
    """Vocabulary plus a dense (vocab x dim) real matrix."""

    vocab: Vocabulary
    vectors: np.ndarray

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        if self.vectors.shape[0] != len(self.vocab):
            raise ValueError(
                f"vector count {self.vectors.shape[0]} does not match "
                f"vocabulary size {len(self.vocab)}"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, word: str) -> np.ndarray | None:
        idx = self.vocab.get(word)
        return None if idx is None else self.vectors[idx]


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".words.tsv")


def _format_value(v: np.float32) -> str:
    # repr of the float64 promotion round-trips the float32 value exactly
    return repr(float(v))


def write_embeddings(e: EmbeddingMatrix, path: str | Path, format: str = "text") -> None:
    """Write an embedding matrix in text or binary format.

    Values are stored as little-endian 32-bit floats (binary) or decimal
    strings that parse back to the same 32-bit value (text).
    """
    if len(e.vocab) == 0:
        raise ValueError("refusing to write an empty embedding matrix")
    path = Path(path)
    values = e.vectors.astype(np.float32)
    if format == "text":
        spaced = [(w, w.replace(" ", "_")) for w in e.vocab if " " in w]
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"{len(e.vocab)} {e.dim}\n")
            for i, word in enumerate(e.vocab):
                token = word.replace(" ", "_")
                row = " ".join(_format_value(v) for v in values[i])
                fh.write(f"{token} {row}\n")
        if spaced:
            with _sidecar_path(path).open("w", encoding="utf-8") as fh:
                for word, token in spaced:
                    fh.write(f"{token}\t{word}\n")
    elif format == "binary":
        with path.open("wb") as fh:
            fh.write(_BINARY_MAGIC)
            fh.write(f"{len(e.vocab)} {e.dim}\n".encode("utf-8"))
            for word in e.vocab:
                fh.write(word.encode("utf-8") + b"\n")
            fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())
    else:
        raise ValueError(f"unknown embedding format {format!r}")


def _parse_header(line: str, path: Path) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise EmbeddingFormatError(f"{path}: bad header {line!r}")
    try:
        n, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingFormatError(f"{path}: bad header {line!r}")
    if n <= 0 or dim <= 0:
        raise EmbeddingFormatError(f"{path}: non-positive header counts")
    return n, dim


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an embedding file written by :func:`write_embeddings`."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(len(_BINARY_MAGIC))
    if magic == _BINARY_MAGIC:
        return _read_binary(path)
    return _read_text(path)


def _read_text(path: Path) -> EmbeddingMatrix:
    sidecar: dict[str, str] = {}
    sc_path = _sidecar_path(path)
    if sc_path.exists():
        with sc_path.open(encoding="utf-8") as fh:
            for line in fh:
                token, _, word = line.rstrip("\n").partition("\t")
                if word:
                    sidecar[token] = word

    with path.open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise EmbeddingFormatError(f"{path}: empty file")
        n, dim = _parse_header(header, path)
        vocab = Vocabulary()
        vectors = np.empty((n, dim), dtype=np.float32)
        count = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if count >= n:
                raise EmbeddingFormatError(
                    f"{path}, line {lineno}: more rows than header declares ({n})"
                )
            parts = line.split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}, line {lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            word = sidecar.get(parts[0], parts[0])
            if word in vocab:
                raise EmbeddingFormatError(f"{path}, line {lineno}: duplicate word {word!r}")
            vocab.add(word)
            try:
                vectors[count] = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}, line {lineno}: non-numeric value")
            count += 1
    if count != n:
        raise EmbeddingFormatError(f"{path}: header declares {n} rows but found {count}")
    return EmbeddingMatrix(vocab=vocab, vectors=vectors)


def _read_binary(path: Path) -> EmbeddingMatrix:
    raw = path.read_bytes()
    body = raw[len(_BINARY_MAGIC):]
    nl = body.index(b"\n")
    n, dim = _parse_header(body[:nl].decode("utf-8"), path)
    pos = nl + 1
    vocab = Vocabulary()
    for i in range(n):
        end = body.index(b"\n", pos)
        word = body[pos:end].decode("utf-8")
        if word in vocab:
            raise EmbeddingFormatError(f"{path}: duplicate word {word!r}")
        vocab.add(word)
        pos = end + 1
    payload = body[pos:]
    expected = n * dim * 4
    if len(payload) != expected:
        raise EmbeddingFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(n, dim).copy()
    return EmbeddingMatrix(vocab=vocab, vectors=vectors)
