"""Age bins and bin schemes."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import NoBinError, ValidationError

OPEN = None


@dataclass(frozen=True)
class AgeBin:
    lo: int
    hi: int | None = OPEN  # inclusive; None marks the terminal open bin

    def __post_init__(self):
        if self.hi is not None and self.hi < self.lo:
            raise ValidationError(f"bin ({self.lo}-{self.hi}) has hi < lo")

    def contains(self, age: float) -> bool:
        return age >= self.lo and (self.hi is None or age <= self.hi)

    @property
    def name(self) -> str:
        return f"{self.lo}+" if self.hi is None else f"{self.lo}-{self.hi}"

    def __str__(self):
        return self.name


class BinScheme:
    """Ordered, non-overlapping bins. ``contiguous`` schemes have no gaps."""

    def __init__(self, bins, name=""):
        bins = [b if isinstance(b, AgeBin) else AgeBin(*b) for b in bins]
        if not bins:
            raise ValidationError("a bin scheme needs at least one bin")
        for a, b in zip(bins, bins[1:]):
            if a.hi is None or b.lo <= a.hi:
                raise ValidationError(f"bins {a} and {b} overlap or are out of order")
        self.bins = tuple(bins)
        self.name = name
        self.contiguous = all(b.lo == a.hi + 1 for a, b in zip(bins, bins[1:]))

    def __len__(self):
        return len(self.bins)

    def __iter__(self):
        return iter(self.bins)

    def __getitem__(self, i):
        return self.bins[i]

    @property
    def names(self) -> list:
        return [b.name for b in self.bins]

    def assign(self, age: float) -> int:
        for i, b in enumerate(self.bins):
            if b.contains(age):
                return i
        if age < self.bins[0].lo:
            raise NoBinError(f"age {age} is below the scheme minimum {self.bins[0].lo}")
        raise NoBinError(f"age {age} falls in a gap of the {self.name or 'given'} scheme")

    def __repr__(self):
        return f"BinScheme({self.name!r}, {self.names})"


def assign_bin(age: float, scheme: BinScheme) -> int:
    return scheme.assign(age)


TRAINING_BINS = BinScheme(
    [(0, 2), (3, 6), (7, 12), (13, 17), (18, 22), (23, 26), (27, 33), (34, 44), (45, 59), (60, None)],
    name="agenet",
)

ADIENCE_BINS = BinScheme(
    [(0, 2), (4, 6), (8, 13), (15, 20), (25, 32), (38, 43), (48, 53), (60, None)],
    name="adience",
)

SCHEMES = {"agenet": TRAINING_BINS, "adience": ADIENCE_BINS}


def get_scheme(name: str) -> BinScheme:
    try:
        return SCHEMES[name.lower()]
    except KeyError:
        raise ValidationError(f"unknown bin scheme {name!r}; choose from {sorted(SCHEMES)}") from None
