"""Short (16-bit) to radio (64-bit) address translation kept by a Mist node.

The table is single-writer. Readers on other threads should work from
``snapshot()`` or hold their own lock around lookups.
"""
from __future__ import annotations

from types import MappingProxyType
from typing import Dict, Iterator, Mapping, Tuple

from ..errors import AddressConflict, AddressNotFound, ValidationError
from ..shared import logger

MAX_SHORT = 0xFFFF
MAX_LONG = 0xFFFFFFFFFFFFFFFF


class AddressTable:

    def __init__(self, pairs: Mapping[int, int] | None = None) -> None:
        self._logger = logger(self)
        self._to_long: Dict[int, int] = {}
        self._to_short: Dict[int, int] = {}
        for short, long in (pairs or {}).items():
            self.insert(short, long)

    def insert(self, short: int, long: int) -> None:
        if not 0 <= short <= MAX_SHORT:
            raise ValidationError("short", short, "must fit 16 bits")
        if not MAX_SHORT < long <= MAX_LONG:
            raise ValidationError("long", long, "must be a 64-bit address above the short range")
        if short in self._to_long:
            raise AddressConflict(short)
        if long in self._to_short:
            raise AddressConflict(long)
        self._to_long[short] = long
        self._to_short[long] = short
        self._logger.debug("mapped 0x%04x <-> 0x%016x", short, long)

    def remove(self, short: int) -> int:
        try:
            long = self._to_long.pop(short)
        except KeyError:
            raise AddressNotFound(short) from None
        del self._to_short[long]
        return long

    def to_long(self, short: int) -> int:
        try:
            return self._to_long[short]
        except KeyError:
            raise AddressNotFound(short) from None

    def to_short(self, long: int) -> int:
        try:
            return self._to_short[long]
        except KeyError:
            raise AddressNotFound(long) from None

    def translate(self, address: int) -> int:
        """Counterpart of `address`, looking at short addresses first."""
        if address in self._to_long:
            return self._to_long[address]
        if address in self._to_short:
            return self._to_short[address]
        raise AddressNotFound(address)

    def snapshot(self) -> Mapping[int, int]:
        return MappingProxyType(dict(self._to_long))

    def __contains__(self, address: object) -> bool:
        return address in self._to_long or address in self._to_short

    def __len__(self) -> int:
        return len(self._to_long)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(list(self._to_long.items()))


def translate(table: AddressTable, address: int) -> int:
    return table.translate(address)
