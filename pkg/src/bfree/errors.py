"""Exception hierarchy shared by every module."""


class BFreeError(Exception):
    """Base class for all library errors."""


class NotMonic(BFreeError):
    pass


class Reducible(BFreeError):
    pass


class DegreeTooLarge(BFreeError):
    pass


class CoordinateOverflow(BFreeError, OverflowError):
    """A coordinate left the signed 64-bit range while not in wide mode."""


class ZeroElement(BFreeError):
    pass


class NotCoprime(BFreeError):
    pass


class NotPrime(BFreeError):
    pass


class UnsafePrime(BFreeError):
    """p^2 divides disc(f) and the order was not asserted to be maximal."""


class EmptyFamily(BFreeError):
    pass


class SizeOverflow(BFreeError):
    """A box exceeds the configured point budget."""


class NotDisjoint(BFreeError):
    pass


class EmptyInterior(BFreeError):
    pass


class BudgetExceeded(BFreeError):
    pass


class Inconclusive(BFreeError):
    pass


class ConfigParse(BFreeError):
    pass


class CacheMismatch(BFreeError):
    pass
