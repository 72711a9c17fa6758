"""Shared training hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from dialeval import DataError

INIT_STD = 0.1  # all parameters start i.i.d. normal(0, INIT_STD)


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    dim: int = 50
    epochs: int = 10
    margin: float = 0.1       # hinge margin for the embedding ranker
    n_neg: int = 10           # negatives per training step
    n_dicts: int = 1          # 1 shared, 2 input/output, 3 input/memory/output
    seed: int = 0
    hops: int = 1             # attention hops (0 allowed: no memory reads)
    hash_n: int = 0           # trailing messages hashed for long-term memory; 0 = all
    hash_cutoff: int = 500    # tokens in more facts than this are ignored
    max_memories: int = 50

    def validate(self) -> "TrainConfig":
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be > 0")
        if self.dim < 1:
            raise DataError("dim must be >= 1")
        if self.margin < 0:
            raise DataError("margin must be >= 0")
        if self.n_neg < 1:
            raise DataError("n_neg must be >= 1")
        if self.n_dicts not in (1, 2, 3):
            raise DataError("n_dicts must be 1, 2 or 3")
        if self.hops < 0:
            raise DataError("hops must be >= 0")
        if self.hash_cutoff < 1:
            raise DataError("hash_cutoff must be >= 1")
        return self

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in sorted(asdict(self).items()))

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        kwargs = {}
        fields = cls.__dataclass_fields__
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            if key not in fields:
                raise DataError(f"unknown config key {key!r}")
            typ = fields[key].type
            kwargs[key] = float(value) if typ == "float" else int(value)
        return cls(**kwargs).validate()
