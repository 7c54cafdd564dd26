from dataclasses import dataclass
import re
from typing import List, Tuple

from ..errors import PatternParseError
from .models import FragmentCatalog


_SEPARATORS = re.compile(r"[\s,;]+")


@dataclass(frozen=True)
class DistributionPattern:
    """bits[i] is True when fragment i (catalog order) lives on the product."""

    bits: Tuple[bool, ...]

    @property
    def k(self) -> int:
        return len(self.bits)

    @property
    def pattern_id(self) -> int:
        # F1 is the least significant bit
        return sum(1 << i for i, bit in enumerate(self.bits) if bit)

    @property
    def bit_string(self) -> str:
        return "".join("1" if bit else "0" for bit in self.bits)

    @property
    def is_oda(self) -> bool:
        return not any(self.bits)

    @property
    def is_full_odap(self) -> bool:
        return all(self.bits)

    def product_fragments(self, catalog: FragmentCatalog) -> Tuple[str, ...]:
        return tuple(fid for fid, bit in zip(catalog.ids, self.bits) if bit)

    def describe(self, catalog: FragmentCatalog) -> str:
        return " ".join(
            fid if bit else f"!{fid}" for fid, bit in zip(catalog.ids, self.bits)
        )

    @classmethod
    def from_id(cls, pattern_id: int, k: int) -> "DistributionPattern":
        if pattern_id < 0 or pattern_id >= 1 << k:
            raise PatternParseError(f"pattern id {pattern_id} out of range for k={k}")
        return cls(tuple(bool(pattern_id >> i & 1) for i in range(k)))

    @classmethod
    def from_bit_string(cls, bit_string: str) -> "DistributionPattern":
        if any(ch not in "01" for ch in bit_string):
            raise PatternParseError(f"invalid pattern bits: {bit_string!r}")
        return cls(tuple(ch == "1" for ch in bit_string))

    @classmethod
    def oda(cls, k: int) -> "DistributionPattern":
        return cls((False,) * k)

    @classmethod
    def full_odap(cls, k: int) -> "DistributionPattern":
        return cls((True,) * k)


def _tokens(spec_string: str, catalog: FragmentCatalog) -> List[Tuple[str, bool]]:
    body = spec_string.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    tokens: List[Tuple[str, bool]] = []
    for raw in _SEPARATORS.split(body):
        if not raw:
            continue
        if ".." in raw:
            tokens.extend(_expand_range(raw, catalog))
            continue
        negated = raw.startswith("!")
        tokens.append((raw[1:] if negated else raw, not negated))
    return tokens


def _expand_range(raw: str, catalog: FragmentCatalog) -> List[Tuple[str, bool]]:
    start, _, end = raw.partition("..")
    start_neg, end_neg = start.startswith("!"), end.startswith("!")
    if start_neg != end_neg:
        raise PatternParseError(f"range {raw!r} mixes negated and plain bounds")
    first, last = start.lstrip("!"), end.lstrip("!")
    for fid in (first, last):
        if fid not in catalog.ids:
            raise PatternParseError(f"unknown fragment {fid!r} in range {raw!r}")
    lo, hi = catalog.index(first), catalog.index(last)
    if lo > hi:
        raise PatternParseError(f"range {raw!r} runs backwards")
    return [(fid, not start_neg) for fid in catalog.ids[lo : hi + 1]]


def pattern_from_spec(spec_string: str, catalog: FragmentCatalog) -> DistributionPattern:
    """Parse ``"!F1 !F2 F3 ..."``: ``Fi`` on the product, ``!Fi`` on its databases.

    Every catalog fragment must appear exactly once.
    """
    placement = {}
    for fid, on_product in _tokens(spec_string, catalog):
        if fid not in catalog.ids:
            raise PatternParseError(f"unknown fragment {fid!r}")
        if fid in placement:
            raise PatternParseError(f"duplicate fragment {fid!r}")
        placement[fid] = on_product
    missing = [fid for fid in catalog.ids if fid not in placement]
    if missing:
        raise PatternParseError(f"missing fragment(s): {', '.join(missing)}")
    return DistributionPattern(tuple(placement[fid] for fid in catalog.ids))


def pattern_from_product_set(
    spec_string: str, catalog: FragmentCatalog
) -> DistributionPattern:
    """Parse a list of product-resident fragments; unlisted fragments stay on DBs."""
    on_product = set()
    for fid, plain in _tokens(spec_string, catalog):
        if not plain:
            raise PatternParseError(
                f"negated fragment {fid!r} in a product set; list every fragment "
                "to use the !Fi notation"
            )
        if fid not in catalog.ids:
            raise PatternParseError(f"unknown fragment {fid!r}")
        if fid in on_product:
            raise PatternParseError(f"duplicate fragment {fid!r}")
        on_product.add(fid)
    return DistributionPattern(tuple(fid in on_product for fid in catalog.ids))


def resolve_pattern(argument: str, catalog: FragmentCatalog) -> DistributionPattern:
    """Accepts ``ODA``, ``ODAP``, a full ``!Fi``/``Fi`` spec or a product set."""
    keyword = argument.strip().upper()
    if keyword == "ODA":
        return DistributionPattern.oda(catalog.k)
    if keyword in ("ODAP", "FULL", "FULL_ODAP"):
        return DistributionPattern.full_odap(catalog.k)
    if "!" in argument:
        return pattern_from_spec(argument, catalog)
    return pattern_from_product_set(argument, catalog)
