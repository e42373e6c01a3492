"""Ordered vocabulary with a stable word <-> id mapping."""

from __future__ import annotations

from typing import Iterable, Iterator


def normalize_word(word: str) -> str:
    """Canonical token form: whitespace-trimmed and lowercased.

    Internal spaces of multi-word entries ("ice cream") are kept.
    """
    return word.strip().lower()


class Vocabulary:
    """Ordered set of unique words with 0-based ids.

    Words keep the insertion order of their first occurrence, so the
    same input stream always yields the same word <-> id mapping.
    """

    __slots__ = ("_words", "_index")

    def __init__(self, words: Iterable[str] = ()) -> None:
        self._words: list[str] = []
        self._index: dict[str, int] = {}
        for word in words:
            self.add(word)

    def add(self, word: str) -> int:
        """Return the id of ``word``, assigning a fresh one if unseen."""
        idx = self._index.get(word)
        if idx is None:
            idx = len(self._words)
            self._index[word] = idx
            self._words.append(word)
        return idx

    def id_of(self, word: str) -> int:
        return self._index[word]

    def get(self, word: str) -> int | None:
        return self._index.get(word)

    def word(self, idx: int) -> str:
        return self._words[idx]

    @property
    def words(self) -> list[str]:
        """The word list in id order. Treat as read-only."""
        return self._words

    def __contains__(self, word: object) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self._words)

    def __iter__(self) -> Iterator[str]:
        return iter(self._words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._words == other._words

    def __repr__(self) -> str:
        return f"Vocabulary({len(self._words)} words)"
