"""Conversion bookkeeping: what was read, written, and dropped, and why."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


def sha256_of(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def normalize_word(word: str) -> str:
    """Same normalization the downstream ingest applies: trim + lowercase."""
    return word.strip().lower()


@dataclass
class ConversionReport:
    """Record accounting for one converter run.

    ``records_read`` must equal ``records_written`` plus the sum of
    ``records_dropped`` (dropped records carry a reason code, never
    disappear silently).
    """

    source: str
    records_read: int = 0
    records_written: int = 0
    records_dropped: dict[str, int] = field(default_factory=dict)
    output_digests: dict[str, str] = field(default_factory=dict)

    @property
    def n_dropped(self) -> int:
        return sum(self.records_dropped.values())

    def drop(self, reason: str, count: int = 1) -> None:
        self.records_dropped[reason] = self.records_dropped.get(reason, 0) + count

    def check_balance(self) -> None:
        if self.records_read != self.records_written + self.n_dropped:
            raise ValueError(
                f"report does not balance: read {self.records_read} != "
                f"written {self.records_written} + dropped {self.n_dropped}"
            )

    def add_output(self, path: str | Path) -> None:
        self.output_digests[str(path)] = sha256_of(path)

    def to_json(self) -> str:
        payload = {
            "source": self.source,
            "records_read": self.records_read,
            "records_written": self.records_written,
            "records_dropped": dict(sorted(self.records_dropped.items())),
            "output_digests": dict(sorted(self.output_digests.items())),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        self.check_balance()
        Path(path).write_text(self.to_json(), "utf-8")
