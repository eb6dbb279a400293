"""Exception types shared across modules."""


class SizeMismatchError(ValueError):
    """Permutations or matrices of incompatible sizes were combined."""


class CapacityError(ValueError):
    """A factorial-cost enumeration was asked for beyond its configured cap."""


class SingularityError(ValueError):
    """The Weingarten system (or a closed form) has a pole at this dimension."""


class DomainError(ValueError):
    """Parameters outside the range where a formula is stated."""
