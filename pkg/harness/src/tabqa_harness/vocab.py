"""Word-level tokenization over dataset text. Lowercased; punctuation
split into its own tokens so answer spans align with context tokens
("Migraine," tokenizes to "migraine" + ","). The vocabulary is built from
the training file and saved inside the model artifact."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

PAD, UNK, CLS = "[PAD]", "[UNK]", "[CLS]"
SPECIALS = (PAD, UNK, CLS)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocab:
    itos: tuple[str, ...]

    @property
    def stoi(self) -> dict[str, int]:
        # cached lazily on the instance sidecar dict
        cached = self.__dict__.get("_stoi")
        if cached is None:
            cached = {tok: i for i, tok in enumerate(self.itos)}
            self.__dict__["_stoi"] = cached
        return cached

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def cls_id(self) -> int:
        return 2

    def encode(self, tokens: Iterable[str]) -> list[int]:
        stoi = self.stoi
        unk = self.unk_id
        return [stoi.get(tok, unk) for tok in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.itos[i] for i in ids]


def build_vocab(texts: Iterable[str]) -> Vocab:
    seen: dict[str, None] = {}
    for text in texts:
        for tok in tokenize(text):
            seen.setdefault(tok)
    return Vocab(itos=SPECIALS + tuple(sorted(seen)))


def vocab_from_token_seqs(token_seqs: Iterable[Iterable[str]]) -> Vocab:
    seen: dict[str, None] = {}
    for seq in token_seqs:
        for tok in seq:
            if tok not in SPECIALS:
                seen.setdefault(tok)
    return Vocab(itos=SPECIALS + tuple(sorted(seen)))
